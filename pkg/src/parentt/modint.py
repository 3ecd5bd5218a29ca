"""Word-level and wide-integer modular arithmetic primitives.

Everything here is exact integer arithmetic.  Wide intermediates (up to a few
hundred bits) are plain Python ints; the contracts below state the width
bounds the hardware datapath would enforce, and the functions check them.

The only division anywhere is the precomputation of the Barrett reciprocal;
the hot-path operations use shifts, adds, subtracts and one multiply by the
reciprocal, mirroring a multiplier-poor datapath:

    a mod q  =  a - ((a * eps) >> mu) * q,   eps = floor(2^mu / q)

followed by at most two conditional subtractions of q.
"""

from dataclasses import dataclass
from typing import Tuple


@dataclass(frozen=True)
class SignedPotForm:
    """A constant of the form 2^e1 +/- 2^e2 +/- ... - 1 (signed powers of two).

    ``terms`` holds the explicit (sign, exponent) pairs with strictly
    decreasing exponents and leading sign +1; the trailing -1 is implicit.
    The shift-add unit multiplies by such constants without a multiplier.
    """

    terms: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("need at least one explicit power-of-two term")
        if self.terms[0][0] != 1:
            raise ValueError("leading term must be positive")
        exps = [e for _, e in self.terms]
        if any(a <= b for a, b in zip(exps, exps[1:])):
            raise ValueError("exponents must be strictly decreasing")
        if any(s not in (1, -1) for s, _ in self.terms):
            raise ValueError("signs must be +1/-1")
        if self.value <= 0:
            raise ValueError("represented value must be positive")

    @property
    def value(self) -> int:
        """The represented constant beta = sum(sign * 2^exp) - 1."""
        return sum(s << e for s, e in self.terms) - 1

    @property
    def n_terms(self) -> int:
        """Explicit term count n_q (excludes the trailing -1)."""
        return len(self.terms)

    @property
    def v1(self) -> int:
        """Leading exponent, which bounds the SAU output growth."""
        return self.terms[0][1]


@dataclass(frozen=True)
class BarrettParams:
    """Precomputed reduction constants for a fixed word-size modulus.

    mu is the admitted input word-length; eps = floor(2^mu / q).
    """

    q: int
    mu: int
    epsilon: int

    def __post_init__(self):
        if self.q < 3:
            raise ValueError("modulus too small")
        if self.q.bit_length() > 62:
            raise ValueError("modulus wider than 62 bits")
        if self.mu < self.q.bit_length():
            raise ValueError("mu must cover at least one full operand")
        if self.epsilon != (1 << self.mu) // self.q:
            raise ValueError("epsilon inconsistent with floor(2^mu / q)")

    @classmethod
    def for_modulus(cls, q: int, mu: int) -> "BarrettParams":
        return cls(q=q, mu=mu, epsilon=(1 << mu) // q)

    @property
    def epsilon_bits(self) -> int:
        """ceil(log2(epsilon)); matches the reciprocal-width accounting."""
        e = self.epsilon
        return e.bit_length() if e & (e - 1) else e.bit_length() - 1


def barrett_reduce(a: int, p: BarrettParams) -> int:
    """Reduce 0 <= a < 2^mu modulo p.q without division.

    The quotient estimate (a*eps) >> mu undershoots floor(a/q) by at most 2,
    so at most two conditional subtractions finish the job.
    """
    if a < 0 or a >> p.mu:
        raise ValueError(f"operand has more than mu={p.mu} bits")
    r = a - ((a * p.epsilon) >> p.mu) * p.q
    if r >= p.q:
        r -= p.q
    if r >= p.q:
        r -= p.q
    assert 0 <= r < p.q
    return r


def mod_add(a: int, b: int, q: int) -> int:
    """(a + b) mod q for residues a, b < q; single conditional subtract."""
    s = a + b
    return s - q if s >= q else s


def mod_sub(a: int, b: int, q: int) -> int:
    """(a - b) mod q for residues a, b < q; single conditional add."""
    d = a - b
    return d + q if d < 0 else d


def mod_mul(a: int, b: int, q: int, p: BarrettParams = None) -> int:
    """(a * b) mod q via Barrett reduction of the double-width product."""
    if p is None:
        p = BarrettParams.for_modulus(q, 2 * q.bit_length())
    return barrett_reduce(a * b, p)


def mod_half(x: int, q: int) -> int:
    """x * 2^-1 mod q for odd q, using only a shift, a modular add and a mux.

    Even x halves directly; odd x maps to (x >> 1) + (q+1)/2 mod q.
    """
    if q % 2 == 0:
        raise ValueError("modulus must be odd")
    if not 0 <= x < q:
        raise ValueError("operand must be a reduced residue")
    if x & 1 == 0:
        return x >> 1
    h = (x >> 1) + (q + 1) // 2
    return h - q if h >= q else h


def sau_multiply(z: int, pot: SignedPotForm) -> int:
    """z * pot.value using shifts, adds and subtracts only.

    Positive and negative partial sums are accumulated separately and
    subtracted once at the end; the result is nonnegative because the
    represented constant is positive.  Output width is at most
    bitlen(z) + v1 + 1, the growth rule the surrounding datapath sizes for.
    """
    if z < 0:
        raise ValueError("operand must be nonnegative")
    pos = 0
    neg = z  # the trailing "- 1" term contributes -z
    for s, e in pot.terms:
        if s > 0:
            pos += z << e
        else:
            neg += z << e
    assert pos >= neg, "signed form must represent a positive constant"
    out = pos - neg
    assert out == z * pot.value
    return out
