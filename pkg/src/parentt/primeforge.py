"""Search for special NTT-compatible, CRT-friendly primes.

A special prime has the shape

    q = 2^v - beta,    beta = 2^v1 +/- 2^v2 +/- ... - 1,

so that multiplication by beta (the residue of the radix 2^v) decomposes into
a handful of shifts and adds.  A candidate is admitted when

  (1) q is prime and has full word-length v (2^(v-1) < q < 2^v),
  (2) q - 1 is a multiple of 2n (a primitive 2n-th root of unity exists),
  (3) v + n_beta*(v1 + 1) + 1 <= mu, i.e. a chain of n_beta shift-add units
      starting from a v-bit segment still fits the Barrett input width mu.

Constraint (3) is the word-length budget of the residue datapath; n_beta is
the deepest uninterrupted run of shift-add units the datapath allows.  Both
published prime-count tables (the 45-bit/four-modulus and 30-bit/six-modulus
regimes) are reproduced with n_beta = 2: the four-modulus pre-processing
breaks its longest chain with an interior reduction and the six-modulus one
factorizes into blocks of three, so neither ever chains more than two SAUs.
"""

import json
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .modint import BarrettParams, SignedPotForm

# Witnesses proving (non-)primality for every integer below 3.3 * 10^24,
# which covers all 64-bit inputs.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 2^64."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_ntt_compatible(q: int, n: int) -> bool:
    """True iff q is prime and q - 1 is divisible by 2n."""
    if q < 3:
        raise ValueError("q must be at least 3")
    return (q - 1) % (2 * n) == 0 and is_prime(q)


def find_psi(q: int, two_n: int) -> int:
    """Smallest psi whose multiplicative order mod q is exactly two_n.

    For two_n a power of two, psi^n == -1 mod q already pins the order, so a
    single test per candidate suffices.  The linear scan is exact but only
    practical when two_n is within a few orders of magnitude of q (order-2n
    elements have density 2n/q); large-modulus transform contexts use
    canonical_psi instead.
    """
    n = two_n // 2
    if not is_ntt_compatible(q, n):
        raise ValueError(f"q={q} is not NTT-compatible for n={n}")
    for psi in range(2, q):
        if pow(psi, n, q) == q - 1:
            return psi
    raise ValueError(f"no primitive {two_n}-th root of unity mod {q}")


def canonical_psi(q: int, two_n: int) -> int:
    """Deterministic primitive two_n-th root of unity, cheap at any size.

    Raises the smallest base whose (q-1)/two_n power has exact order two_n
    (equivalently, the smallest quadratic nonresidue when two_n is a power
    of two).  Not necessarily the smallest such root itself, but a canonical
    one, reproducible from (q, two_n) alone.
    """
    n = two_n // 2
    if not is_ntt_compatible(q, n):
        raise ValueError(f"q={q} is not NTT-compatible for n={n}")
    exp = (q - 1) // two_n
    for x in range(2, q):
        c = pow(x, exp, q)
        if pow(c, n, q) == q - 1:
            return c
    raise ValueError(f"no primitive {two_n}-th root of unity mod {q}")


def signed_pot_decompose(beta: int, max_terms: int) -> Optional[SignedPotForm]:
    """Minimal signed power-of-two form of beta with the trailing -1 folded in.

    Finds the fewest explicit terms representing beta + 1, preferring the
    smallest leading exponent among equal-length forms (then lexicographically
    smallest exponent tuple), or None if more than max_terms - 2 explicit
    terms are needed.  Exponents are >= 1: a 2^0 term would collide with the
    trailing -1 (and make beta even, i.e. q even).
    """
    if beta < 1:
        raise ValueError("beta must be positive")
    target = beta + 1
    limit = max_terms - 2
    top = target.bit_length() + 1

    def extend(remaining: int, max_exp: int, k: int) -> Optional[List[Tuple[int, int]]]:
        # Fill exactly k more terms with exponents < max_exp summing to remaining.
        if k == 0:
            return [] if remaining == 0 else None
        for e in range(max_exp - 1, 0, -1):
            for s in (1, -1):
                rest = remaining - s * (1 << e)
                # |rest| must be reachable with k-1 terms below 2^e
                if abs(rest) >= 1 << e:
                    continue
                sub = extend(rest, e, k - 1)
                if sub is not None:
                    return [(s, e)] + sub
        return None

    for k in range(1, limit + 1):
        best = None
        for v1 in range(1, top + 1):
            rest = target - (1 << v1)
            if abs(rest) >= 1 << v1:
                continue
            sub = extend(rest, v1, k - 1)
            if sub is not None:
                best = [(1, v1)] + sub
                break  # smallest v1 wins within this term count
        if best is not None:
            return SignedPotForm(terms=tuple(best))
    return None


@dataclass(frozen=True)
class SpecialPrime:
    """An admitted modulus together with its datapath constants."""

    q: int
    v: int
    beta: int
    pot: SignedPotForm
    barrett: BarrettParams
    n_beta: int

    def __post_init__(self):
        if not is_prime(self.q):
            raise ValueError(f"{self.q} is not prime")
        if self.q != (1 << self.v) - self.beta or self.beta != self.pot.value:
            raise ValueError("q, beta and signed form disagree")
        if not (1 << (self.v - 1)) < self.q < (1 << self.v):
            raise ValueError(f"q={self.q} is not a full {self.v}-bit word")
        if self.v + self.n_beta * (self.pot.v1 + 1) + 1 > self.barrett.mu:
            raise ValueError("SAU chain of depth n_beta would overflow mu")

    @property
    def pot_terms_total(self) -> int:
        """Signed power-of-two terms in q itself: 2^v, the explicit ones, +1."""
        return self.pot.n_terms + 2

    def check_ntt(self, n: int) -> bool:
        return (self.q - 1) % (2 * n) == 0

    def to_json_dict(self) -> dict:
        return {
            "q": self.q,
            "pot": [[s, e] for s, e in self.pot.terms],
            "epsilon_bits": self.barrett.epsilon_bits,
        }


def _v1_limit(v: int, mu: int, n_beta: int) -> int:
    # Width budget: v + n_beta*(v1+1) + 1 <= mu.
    return (mu - v - 1) // n_beta - 1


def search_special_primes(v: int, n: int, mu: int, max_pot_terms: int,
                          n_beta: int) -> List[SpecialPrime]:
    """Every special prime admissible under (v, n, mu, max_pot_terms, n_beta).

    Enumerates signed power-of-two forms under the v1 bound rather than
    testing every v-bit prime; the constrained form space is tiny.  Result is
    sorted ascending by q and each prime carries its canonical (fewest-terms,
    smallest-v1) form.
    """
    if v > 62:
        raise ValueError("word-lengths beyond 62 bits are out of scope")
    if n & (n - 1) or n < 2:
        raise ValueError("n must be a power of two")
    if n_beta < 1:
        raise ValueError("n_beta must be positive")
    v1_max = min(_v1_limit(v, mu, n_beta), v - 1)
    forms = {}  # beta -> best admissible form (fewest terms, then smallest v1)

    def consider(beta: int, terms: Tuple[Tuple[int, int], ...]) -> None:
        if beta < 1:
            return
        key = (len(terms), terms[0][1], terms)
        prev = forms.get(beta)
        if prev is None or key < prev[0]:
            forms[beta] = (key, terms)

    def walk(partial: int, terms: Tuple[Tuple[int, int], ...], max_exp: int,
             terms_left: int) -> None:
        consider(partial - 1, terms)
        if terms_left == 0:
            return
        for e in range(1, max_exp):
            for s in (1, -1):
                walk(partial + s * (1 << e), terms + ((s, e),), e,
                     terms_left - 1)

    for v1 in range(1, v1_max + 1):
        walk(1 << v1, ((1, v1),), v1, max_pot_terms - 3)

    out = []
    for beta, (_, terms) in forms.items():
        q = (1 << v) - beta
        if q <= (1 << (v - 1)):
            continue
        if (q - 1) % (2 * n) != 0 or not is_prime(q):
            continue
        out.append(SpecialPrime(
            q=q, v=v, beta=beta, pot=SignedPotForm(terms=terms),
            barrett=BarrettParams.for_modulus(q, mu), n_beta=n_beta))
    return sorted(out, key=lambda sp: sp.q)


def primes_to_json(v: int, n: int, mu: int, n_beta: int,
                   primes: List[SpecialPrime]) -> str:
    """Wire format consumed by the CLI and the golden tests."""
    return json.dumps({
        "v": v,
        "n": n,
        "mu": mu,
        "n_beta": n_beta,
        "primes": [sp.to_json_dict() for sp in primes],
    }, indent=2)
