"""In-order reference transforms for negacyclic polynomial multiplication.

The merged-butterfly forward/inverse transforms here compute, for a modulus q
with primitive 2n-th root of unity psi (omega = psi^2):

    forward:  A_k = sum_j a_j psi^j omega^(k*j) mod q
    inverse:  exact inverse, with the n^-1 scaling and psi^-j weights folded
              into the butterflies (each inverse butterfly halves via the
              shift-add trick instead of multiplying by 2^-1)

Both run the same dataflow the streaming pipeline implements, stage by stage,
so they share twiddle tables with it; bit-reversal is performed internally so
callers always see natural coefficient order.  Independent oracles
(schoolbook_negacyclic, nwc_reference) deliberately use separate arithmetic.
"""

from dataclasses import dataclass
from typing import List

from .modint import BarrettParams, mod_add, mod_half, mod_mul, mod_sub
from .primeforge import canonical_psi, is_ntt_compatible


def bitrev(x: int, bits: int) -> int:
    """Reverse the low `bits` bits of x."""
    r = 0
    for _ in range(bits):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


@dataclass(frozen=True)
class NttParams:
    """Per-modulus transform context shared by reference and simulator.

    psi_pows[s][u]     = psi^(2^(m-1-s) * (2*bitrev(u, s) + 1)), the twiddle of
                         forward-stage-s butterfly group u;
    inv_psi_pows[s][j] = psi^(-2^s * (2j + 1)), the twiddle of inverse-stage-s
                         pair j.
    """

    n: int
    m: int
    q: int
    psi: int
    barrett: BarrettParams
    half: int
    psi_pows: tuple
    inv_psi_pows: tuple

    @classmethod
    def create(cls, q: int, n: int, psi: int = None) -> "NttParams":
        if n < 2 or n & (n - 1):
            raise ValueError("n must be a power of two >= 2")
        if not is_ntt_compatible(q, n):
            raise ValueError(f"q={q} is not NTT-compatible for n={n}")
        m = n.bit_length() - 1
        if psi is None:
            psi = canonical_psi(q, 2 * n)
        if pow(psi, n, q) != q - 1:
            raise ValueError("psi is not a primitive 2n-th root of unity")
        inv_psi = pow(psi, -1, q)
        fwd = tuple(
            tuple(pow(psi, (1 << (m - 1 - s)) * (2 * bitrev(u, s) + 1), q)
                  for u in range(1 << s))
            for s in range(m))
        inv = tuple(
            tuple(pow(inv_psi, (1 << s) * (2 * j + 1), q)
                  for j in range(1 << (m - 1 - s)))
            for s in range(m))
        half = (q + 1) // 2
        assert half * 2 % q == 1
        return cls(n=n, m=m, q=q, psi=psi,
                   barrett=BarrettParams.for_modulus(q, 2 * q.bit_length()),
                   half=half, psi_pows=fwd, inv_psi_pows=inv)


@dataclass
class ResiduePoly:
    """Length-n coefficient vector over Z_q tagged with its domain."""

    coeffs: List[int]
    domain: str = "time"  # "time" | "ntt"

    def __post_init__(self):
        if self.domain not in ("time", "ntt"):
            raise ValueError(f"unknown domain {self.domain!r}")


def _check(a: ResiduePoly, p: NttParams, domain: str) -> None:
    if len(a.coeffs) != p.n:
        raise ValueError(f"expected {p.n} coefficients, got {len(a.coeffs)}")
    if a.domain != domain:
        raise ValueError(f"expected a {domain}-domain polynomial")


def ntt_forward(a: ResiduePoly, p: NttParams) -> ResiduePoly:
    """Merged DIT transform: one modular multiplication per butterfly."""
    _check(a, p, "time")
    q, bar = p.q, p.barrett
    buf = list(a.coeffs)
    for s in range(p.m):
        span = 1 << (p.m - 1 - s)
        tw = p.psi_pows[s]
        for u in range(1 << s):
            t = tw[u]
            base = u * (span << 1)
            for w in range(base, base + span):
                x, y = buf[w], buf[w + span]
                ty = mod_mul(y, t, q, bar)
                buf[w] = mod_add(x, ty, q)
                buf[w + span] = mod_sub(x, ty, q)
    out = [buf[bitrev(k, p.m)] for k in range(p.n)]
    return ResiduePoly(out, "ntt")


def ntt_inverse(P: ResiduePoly, p: NttParams) -> ResiduePoly:
    """Merged DIF inverse: each butterfly halves, no final scaling pass."""
    _check(P, p, "ntt")
    q, bar = p.q, p.barrett
    blocks = [list(P.coeffs)]
    for s in range(p.m):
        half = 1 << (p.m - 1 - s)
        tw = p.inv_psi_pows[s]
        nxt = []
        for block in blocks:
            sums, diffs = [], []
            for j in range(half):
                x, y = block[j], block[j + half]
                sums.append(mod_half(mod_add(x, y, q), q))
                diffs.append(mod_mul(mod_half(mod_sub(x, y, q), q), tw[j],
                                     q, bar))
            nxt.append(sums)
            nxt.append(diffs)
        blocks = nxt
    out = [0] * p.n
    for rho, block in enumerate(blocks):
        out[bitrev(rho, p.m)] = block[0]
    return ResiduePoly(out, "time")


def pointwise_mul(A: ResiduePoly, B: ResiduePoly, p: NttParams) -> ResiduePoly:
    _check(A, p, "ntt")
    _check(B, p, "ntt")
    q, bar = p.q, p.barrett
    return ResiduePoly([mod_mul(x, y, q, bar)
                        for x, y in zip(A.coeffs, B.coeffs)], "ntt")


def polymul_ntt(a: ResiduePoly, b: ResiduePoly, p: NttParams) -> ResiduePoly:
    """a * b mod (x^n + 1, q) through the transform pipeline."""
    _check(a, p, "time")
    _check(b, p, "time")
    return ntt_inverse(pointwise_mul(ntt_forward(a, p), ntt_forward(b, p), p), p)


def schoolbook_negacyclic(a: ResiduePoly, b: ResiduePoly, q: int) -> ResiduePoly:
    """O(n^2) oracle: p_k = sum_{i+j==k mod n} (-1)^((i+j)//n) a_i b_j mod q.

    Shares no code with the transforms; plain remainder arithmetic.
    """
    n = len(a.coeffs)
    if len(b.coeffs) != n:
        raise ValueError("length mismatch")
    acc = [0] * n
    for i, ai in enumerate(a.coeffs):
        if ai == 0:
            continue
        for j, bj in enumerate(b.coeffs):
            k = i + j
            if k < n:
                acc[k] += ai * bj
            else:
                acc[k - n] -= ai * bj
    return ResiduePoly([c % q for c in acc], "time")


def nwc_reference(a: ResiduePoly, b: ResiduePoly, p: NttParams) -> ResiduePoly:
    """Negacyclic product via explicit psi weighting around plain omega NTTs.

    Second independent path: unmerged transforms, textbook n^-1 scaling,
    remainder arithmetic throughout.
    """
    _check(a, p, "time")
    _check(b, p, "time")
    n, q, psi = p.n, p.q, p.psi
    omega = psi * psi % q

    def plain_ntt(x, w):
        x = list(x)
        size = 1
        while size < n:
            step = pow(w, n // (2 * size), q)
            for start in range(0, n, 2 * size):
                f = 1
                for k in range(start, start + size):
                    u, t = x[k], x[k + size] * f % q
                    x[k] = (u + t) % q
                    x[k + size] = (u - t) % q
                    f = f * step % q
            size *= 2
        return x

    wa = [a.coeffs[j] * pow(psi, j, q) % q for j in range(n)]
    wb = [b.coeffs[j] * pow(psi, j, q) % q for j in range(n)]
    # decimation-in-time needs bit-reversed input order
    mbits = p.m
    wa = [wa[bitrev(j, mbits)] for j in range(n)]
    wb = [wb[bitrev(j, mbits)] for j in range(n)]
    A = plain_ntt(wa, omega)
    B = plain_ntt(wb, omega)
    C = [x * y % q for x, y in zip(A, B)]
    C = [C[bitrev(j, mbits)] for j in range(n)]
    c = plain_ntt(C, pow(omega, -1, q))
    n_inv = pow(n, -1, q)
    out = [c[j] * n_inv % q * pow(psi, -j, q) % q for j in range(n)]
    return ResiduePoly(out, "time")
