"""Special-prime search: NTT compatibility, signed forms, admissibility."""

import itertools
import json

import pytest

from parentt.primeforge import (SpecialPrime, canonical_psi, find_psi,
                                is_ntt_compatible, is_prime, primes_to_json,
                                search_special_primes, signed_pot_decompose)


def _trial_division_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


class TestPrimality:
    def test_matches_trial_division(self):
        for n in range(2, 5000):
            assert is_prime(n) == _trial_division_prime(n)

    def test_known_large(self):
        assert is_prime(40961)
        assert is_prime((1 << 45) - 16383 - 1 + 1) in (True, False)  # no crash


class TestNttCompatible:
    def test_q17_n8(self):
        assert is_ntt_compatible(17, 8)

    def test_q17_n16(self):
        assert not is_ntt_compatible(17, 16)

    def test_q12289_n1024(self):
        assert is_ntt_compatible(12289, 1024)

    def test_rejects_tiny_q(self):
        with pytest.raises(ValueError):
            is_ntt_compatible(2, 4)


class TestFindPsi:
    def test_q17_order16(self):
        assert find_psi(17, 16) == 3

    def test_q17_order8(self):
        assert find_psi(17, 8) == 2

    @pytest.mark.parametrize("q,two_n", [(17, 16), (97, 32), (12289, 2048)])
    def test_definitional_postcondition(self, q, two_n):
        psi = find_psi(q, two_n)
        assert pow(psi, two_n, q) == 1
        assert pow(psi, two_n // 2, q) == q - 1

    def test_smallest(self):
        psi = find_psi(97, 32)
        for x in range(2, psi):
            assert pow(x, 16, 97) != 96

    @pytest.mark.parametrize("q,two_n", [(40961, 8192), (1073668097, 8192)])
    def test_canonical_psi_large(self, q, two_n):
        psi = canonical_psi(q, two_n)
        assert pow(psi, two_n, q) == 1
        assert pow(psi, two_n // 2, q) == q - 1


def _brute_force_decompositions(target, max_explicit):
    """All signed power-of-two representations of target with exps >= 1."""
    found = []
    top = target.bit_length() + 1
    for k in range(1, max_explicit + 1):
        for exps in itertools.combinations(range(top, 0, -1), k):
            for signs in itertools.product((1, -1), repeat=k - 1):
                sgn = (1,) + signs
                if sum(s << e for s, e in zip(sgn, exps)) == target:
                    found.append((k, exps[0], tuple(zip(sgn, exps))))
    return found


class TestSignedPotDecompose:
    def test_fifteen(self):
        assert signed_pot_decompose(15, 4).terms == ((1, 4),)

    def test_4095(self):
        assert signed_pot_decompose(4095, 4).terms == ((1, 12),)

    def test_two_is_unrepresentable(self):
        # beta=2 would need a 2^0 term, which the trailing -1 reserves
        assert signed_pot_decompose(2, 4) is None

    def test_minimality_and_canonical_choice(self):
        for beta in range(1, 1 << 10):
            got = signed_pot_decompose(beta, 5)
            all_reps = _brute_force_decompositions(beta + 1, 3)
            if got is None:
                assert not all_reps
                continue
            assert got.value == beta
            best_k = min(k for k, _, _ in all_reps)
            assert got.n_terms == best_k
            best_v1 = min(v1 for k, v1, _ in all_reps if k == best_k)
            assert got.v1 == best_v1


class TestSearch:
    def test_toy_contains_17(self):
        primes = search_special_primes(v=5, n=8, mu=25, max_pot_terms=4,
                                       n_beta=3)
        assert 17 in [sp.q for sp in primes]
        sp = next(sp for sp in primes if sp.q == 17)
        assert sp.pot.terms == ((1, 4),)      # 17 = 2^5 - (2^4 - 1)

    def test_invariants_independently(self):
        # re-verify every returned prime without sharing search code
        primes = search_special_primes(v=30, n=4096, mu=75, max_pot_terms=5,
                                       n_beta=2)
        assert primes
        for sp in primes:
            assert _trial_division_prime(sp.q) or is_prime(sp.q)
            assert (1 << 29) < sp.q < (1 << 30)
            assert (sp.q - 1) % 8192 == 0
            beta = sum(s << e for s, e in sp.pot.terms) - 1
            assert sp.q == (1 << 30) - beta
            # width budget: a depth-n_beta SAU chain stays inside mu
            assert 30 + sp.n_beta * (sp.pot.v1 + 1) + 1 <= sp.barrett.mu
            exps = [e for _, e in sp.pot.terms]
            assert exps == sorted(exps, reverse=True)
            assert sp.pot_terms_total <= 5

    def test_sorted_and_deterministic(self):
        a = search_special_primes(30, 4096, 75, 4, 2)
        b = search_special_primes(30, 4096, 75, 4, 2)
        assert [sp.q for sp in a] == sorted(sp.q for sp in a)
        assert [(sp.q, sp.pot.terms) for sp in a] == \
               [(sp.q, sp.pot.terms) for sp in b]

    def test_monotone_in_mu_and_terms(self):
        base = {sp.q for sp in search_special_primes(30, 4096, 75, 4, 2)}
        wider = {sp.q for sp in search_special_primes(30, 4096, 90, 4, 2)}
        more_terms = {sp.q for sp in search_special_primes(30, 4096, 75, 5, 2)}
        assert base <= wider
        assert base <= more_terms

    def test_empty_result_is_not_an_error(self):
        assert search_special_primes(5, 512, 11, 4, 3) == []

    def test_special_prime_rejects_inconsistency(self):
        sp = search_special_primes(5, 8, 25, 4, 3)[0]
        with pytest.raises(ValueError):
            SpecialPrime(q=sp.q + 2, v=sp.v, beta=sp.beta, pot=sp.pot,
                         barrett=sp.barrett, n_beta=sp.n_beta)

    def test_json_emission(self):
        primes = search_special_primes(5, 8, 25, 4, 3)
        doc = json.loads(primes_to_json(5, 8, 25, 3, primes))
        assert doc["v"] == 5 and doc["n"] == 8
        assert any(p["q"] == 17 for p in doc["primes"])
        for p in doc["primes"]:
            assert p["pot"][0][0] == 1
