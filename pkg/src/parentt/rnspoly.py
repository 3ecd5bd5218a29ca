"""CRT pre/post-processing and the top-level long-coefficient multiplier.

A coefficient a < q = q_1 * ... * q_t is split into base-B segments
(B = 2^v), and each residue a mod q_i is computed without any general
multiplier: segment k needs z_k * beta_i^k with beta_i = [B]_{q_i}, and
because beta_i is a few signed powers of two the product is a chain of k
shift-add units (SAUs), accumulated and reduced once by Barrett at width mu.

Two datapaths implement this:

* residual_coeff: straight chains (one per segment).  When a chain's next
  SAU would overflow the mu-bit budget, exactly one interior Barrett
  reduction is inserted at that point (config error if disallowed).
* residual_coeff_factored: t = d * t' blocks; each block chains at most
  t' - 1 SAUs, is reduced to v bits, and every block after the first is
  scaled by the precomputed constant [beta_i^(t'*rho)]_{q_i} with one
  v-by-v multiplication, keeping all intermediates at 2v bits.

The inverse mapping computes p_j = sum_i [p_{i,j} * q~_i]_{q_i} * q*_i and
reduces the sum modulo q with at most t - 1 conditional subtractions; no
modular multiplication over the wide q ever happens.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

from .modint import barrett_reduce, sau_multiply
from .nttref import NttParams, ResiduePoly, polymul_ntt
from .primeforge import SpecialPrime, search_special_primes


@dataclass
class OpStats:
    """Datapath operation counters for the multiplier-elimination checks."""

    sau: int = 0
    barrett: int = 0
    general_mul: int = 0   # v-by-v (or wider) integer multiplications


@dataclass(frozen=True)
class RnsContext:
    """Full CRT system over t special primes."""

    t: int
    t_prime: int
    d: int
    v: int
    n: int
    mu: int
    moduli: tuple                 # SpecialPrime per channel
    ntt: tuple                    # NttParams per channel
    q: int
    q_star: tuple                 # q / q_i
    q_tilde: tuple                # (q / q_i)^-1 mod q_i
    e: tuple                      # q_star_i * q_tilde_i
    beta_block_consts: tuple      # per channel: [beta_i^(t'*rho)]_{q_i}, rho in [0, d)

    @property
    def B(self) -> int:
        return 1 << self.v

    def __post_init__(self):
        assert self.t == self.d * self.t_prime
        qs = [sp.q for sp in self.moduli]
        assert len(set(qs)) == self.t
        prod = 1
        for qi in qs:
            prod *= qi
        assert prod == self.q
        for i, sp in enumerate(self.moduli):
            assert self.q_star[i] == self.q // sp.q
            assert self.q_tilde[i] * (self.q_star[i] % sp.q) % sp.q == 1
            assert self.e[i] == self.q_star[i] * self.q_tilde[i]
            for j, spj in enumerate(self.moduli):
                assert self.e[i] % spj.q == (1 if i == j else 0)

    def to_json_dict(self) -> dict:
        return {
            "t": self.t, "t_prime": self.t_prime, "d": self.d,
            "v": self.v, "n": self.n, "mu": self.mu,
            "q": str(self.q),
            "moduli": [sp.to_json_dict() for sp in self.moduli],
            "q_tilde": list(self.q_tilde),
        }


@dataclass
class SegmentVector:
    """Base-B digits of one coefficient, zero-padded to t entries."""

    z: List[int]


@dataclass
class BigPoly:
    """Length-n polynomial with wide coefficients, all reduced modulo q."""

    coeffs: List[int]

    def to_hex_lines(self) -> str:
        return "\n".join(format(c, "x") for c in self.coeffs) + "\n"

    @classmethod
    def from_hex_lines(cls, text: str, n: int, q: int) -> "BigPoly":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if len(lines) != n:
            raise ValueError(f"expected {n} coefficient lines, got {len(lines)}")
        coeffs = [int(ln, 16) for ln in lines]
        bad = [i for i, c in enumerate(coeffs) if not 0 <= c < q]
        if bad:
            raise ValueError(f"coefficient {bad[0]} out of range [0, q)")
        return cls(coeffs)


def build_context(v: int, t: int, t_prime: Optional[int], n: int, mu: int,
                  prime_selection: Optional[Sequence[int]] = None,
                  max_pot_terms: int = 5, n_beta: int = 2) -> RnsContext:
    """Deterministic context: the t smallest admissible primes unless listed."""
    if t_prime is None:
        t_prime = t
    if t % t_prime:
        raise ValueError("t must factor as d * t_prime")
    d = t // t_prime
    pool = search_special_primes(v, n, mu, max_pot_terms, n_beta)
    by_q = {sp.q: sp for sp in pool}
    if prime_selection is not None:
        missing = [q for q in prime_selection if q not in by_q]
        if missing:
            raise ValueError(f"requested primes not admissible: {missing}")
        chosen = [by_q[q] for q in prime_selection]
    else:
        chosen = pool[:t]
    if len(chosen) < t:
        raise ValueError(
            f"only {len(chosen)} special primes exist for v={v}, n={n}, "
            f"mu={mu}, pot={max_pot_terms}, n_beta={n_beta}; need {t}")
    q = 1
    for sp in chosen:
        q *= sp.q
    q_star = tuple(q // sp.q for sp in chosen)
    q_tilde = tuple(pow(q_star[i] % sp.q, -1, sp.q)
                    for i, sp in enumerate(chosen))
    e = tuple(q_star[i] * q_tilde[i] for i in range(t))
    blocks = tuple(
        tuple(pow(sp.beta, t_prime * rho, sp.q) for rho in range(d))
        for sp in chosen)
    ntt = tuple(NttParams.create(sp.q, n) for sp in chosen)
    return RnsContext(t=t, t_prime=t_prime, d=d, v=v, n=n, mu=mu,
                      moduli=tuple(chosen), ntt=ntt, q=q,
                      q_star=q_star, q_tilde=q_tilde, e=e,
                      beta_block_consts=blocks)


def decompose_segments(a: int, ctx: RnsContext) -> SegmentVector:
    """Base-B digits of a, zero-padded to t; rejects a >= B^t."""
    if a < 0 or a >> (ctx.v * ctx.t):
        raise ValueError("coefficient does not fit in t base-B segments")
    mask = ctx.B - 1
    return SegmentVector(z=[(a >> (ctx.v * k)) & mask for k in range(ctx.t)])


def _chain(z_k: int, k: int, sp: SpecialPrime, mu: int,
           allow_interior: bool, stats: Optional[OpStats]):
    """z_k * beta^k by k chained SAUs, with at most one interior reduction."""
    val = z_k
    interiors = 0
    for _ in range(k):
        if val.bit_length() + sp.pot.v1 + 1 > mu - 1:
            if not allow_interior:
                raise ValueError(
                    f"segment chain of depth {k} overflows mu={mu} and "
                    f"interior reduction is disabled")
            if interiors:
                raise ValueError(
                    f"segment chain of depth {k} needs more than one "
                    f"interior reduction under mu={mu}")
            val = barrett_reduce(val, sp.barrett)
            interiors += 1
            if stats:
                stats.barrett += 1
        val = sau_multiply(val, sp.pot)
        if stats:
            stats.sau += 1
    return val


def residual_coeff(a: int, i: int, ctx: RnsContext,
                   allow_interior: bool = True,
                   stats: Optional[OpStats] = None) -> int:
    """a mod q_i by straight SAU chains and one final Barrett reduction."""
    if not 0 <= a < ctx.q:
        raise ValueError("coefficient out of range [0, q)")
    sp = ctx.moduli[i]
    z = decompose_segments(a, ctx).z
    acc = z[0]
    for k in range(1, ctx.t):
        acc += _chain(z[k], k, sp, ctx.mu, allow_interior, stats)
    if acc >> ctx.mu:
        raise ValueError(
            f"accumulated width {acc.bit_length()} exceeds mu={ctx.mu}; "
            f"configuration needs an interior reduction")
    if stats:
        stats.barrett += 1
    return barrett_reduce(acc, sp.barrett)


def residual_coeff_factored(a: int, i: int, ctx: RnsContext,
                            stats: Optional[OpStats] = None) -> int:
    """a mod q_i blockwise: d blocks of t' segments, one multiplier each.

    Block rho chains at most t'-1 SAUs; blocks after the first are reduced
    and scaled by the v-bit constant [beta^(t'*rho)]_{q_i}, so every
    intermediate after the first block is at most 2v bits wide.
    """
    if not 0 <= a < ctx.q:
        raise ValueError("coefficient out of range [0, q)")
    sp = ctx.moduli[i]
    z = decompose_segments(a, ctx).z
    acc = 0
    interior_ok = ctx.d == 1   # the degenerate single block is Approach 1
    for rho in range(ctx.d):
        base = rho * ctx.t_prime
        s = z[base]
        for k in range(1, ctx.t_prime):
            s += _chain(z[base + k], k, sp, ctx.mu, interior_ok, stats)
        if rho == 0:
            acc += s
        else:
            if stats:
                stats.barrett += 1
                stats.general_mul += 1
            acc += barrett_reduce(s, sp.barrett) * ctx.beta_block_consts[i][rho]
    if acc >> ctx.mu:
        raise ValueError(
            f"accumulated width {acc.bit_length()} exceeds mu={ctx.mu}")
    if stats:
        stats.barrett += 1
    return barrett_reduce(acc, sp.barrett)


def to_residues(a: BigPoly, ctx: RnsContext,
                stats: Optional[OpStats] = None) -> List[ResiduePoly]:
    """Coefficient-wise residue computation across all t channels."""
    if len(a.coeffs) != ctx.n:
        raise ValueError(f"expected {ctx.n} coefficients")
    out = []
    for i in range(ctx.t):
        if ctx.d > 1:
            chan = [residual_coeff_factored(c, i, ctx, stats) for c in a.coeffs]
        else:
            chan = [residual_coeff(c, i, ctx, stats=stats) for c in a.coeffs]
        out.append(ResiduePoly(chan, "time"))
    return out


def from_residues(parts: Sequence[ResiduePoly], ctx: RnsContext) -> BigPoly:
    """Inverse CRT: p_j = sum_i [p_{i,j} * q~_i]_{q_i} * q*_i mod q.

    Each summand is below q, so the total is below t*q and conditional
    subtraction replaces any wide modular reduction.
    """
    if len(parts) != ctx.t:
        raise ValueError(f"expected {ctx.t} channels")
    coeffs = []
    for j in range(ctx.n):
        total = 0
        for i, sp in enumerate(ctx.moduli):
            r = parts[i].coeffs[j]
            if not 0 <= r < sp.q:
                raise ValueError(f"channel {i} coefficient {j} out of range")
            inner = barrett_reduce(r * ctx.q_tilde[i], sp.barrett)
            total += inner * ctx.q_star[i]
        subs = 0
        while total >= ctx.q:
            total -= ctx.q
            subs += 1
        assert subs <= ctx.t - 1
        coeffs.append(total)
    return BigPoly(coeffs)


def parentt_multiply(a: BigPoly, b: BigPoly, ctx: RnsContext,
                     channel_multiplier=None) -> BigPoly:
    """a * b mod (x^n + 1, q): residue split, per-channel product, recombine.

    channel_multiplier(a_i, b_i, params) -> ResiduePoly defaults to the
    reference transform path; the CLI's simulation mode passes the streaming
    pipeline instead.
    """
    if channel_multiplier is None:
        channel_multiplier = polymul_ntt
    ra = to_residues(a, ctx)
    rb = to_residues(b, ctx)
    prods = [channel_multiplier(ra[i], rb[i], ctx.ntt[i])
             for i in range(ctx.t)]
    return from_residues(prods, ctx)


# ---------------------------------------------------------------------------
# Independent oracles (share nothing with the datapath above).
# ---------------------------------------------------------------------------

def schoolbook_negacyclic_wide(a: Sequence[int], b: Sequence[int],
                               q: int) -> List[int]:
    """O(n^2) negacyclic product with wide coefficients, plain arithmetic."""
    n = len(a)
    acc = [0] * n
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            k = i + j
            if k < n:
                acc[k] += ai * bj
            else:
                acc[k - n] -= ai * bj
    return [c % q for c in acc]


def kronecker_negacyclic_wide(a: Sequence[int], b: Sequence[int],
                              q: int) -> List[int]:
    """Negacyclic product by Kronecker substitution into one big integer.

    Packs both polynomials at a slot width large enough that coefficients of
    the integer product cannot collide, multiplies once with native bignum
    arithmetic, unpacks 2n slots and folds x^n = -1.  Used to cross-check
    the quadratic oracle and to keep large-n sweeps fast.
    """
    n = len(a)
    slot = 2 * max(q.bit_length(), 1) + n.bit_length() + 1
    pa = sum(c << (slot * i) for i, c in enumerate(a))
    pb = sum(c << (slot * i) for i, c in enumerate(b))
    prod = pa * pb
    mask = (1 << slot) - 1
    out = [0] * n
    for k in range(2 * n - 1):
        c = (prod >> (slot * k)) & mask
        if k < n:
            out[k] += c
        else:
            out[k - n] -= c
    return [c % q for c in out]


def crt_combine_bruteforce(residues: Sequence[int],
                           moduli: Sequence[int]) -> int:
    """Smallest nonnegative solution by exhaustive scan; toy-sized oracle."""
    q = 1
    for m in moduli:
        q *= m
    for x in range(q):
        if all(x % m == r for r, m in zip(residues, moduli)):
            return x
    raise AssertionError("CRT has a solution for coprime moduli")
