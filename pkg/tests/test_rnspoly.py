"""CRT layer: segment decomposition, residue datapaths, inverse mapping."""

import random

import pytest

from parentt.nttref import ResiduePoly, polymul_ntt
from parentt.rnspoly import (BigPoly, OpStats, build_context,
                             crt_combine_bruteforce, decompose_segments,
                             from_residues, kronecker_negacyclic_wide,
                             parentt_multiply, residual_coeff,
                             residual_coeff_factored,
                             schoolbook_negacyclic_wide, to_residues)

# toy system: q = 97 * 113 = 10961, v = 7, n = 8
TOY = build_context(v=7, t=2, t_prime=2, n=8, mu=25)


@pytest.fixture(scope="module")
def ctx6():
    # six 30-bit moduli at a small transform size to keep tests quick
    return build_context(v=30, t=6, t_prime=3, n=8, mu=75, max_pot_terms=4)


@pytest.fixture(scope="module")
def ctx4():
    return build_context(v=45, t=4, t_prime=4, n=8, mu=105, max_pot_terms=4)


class TestContext:
    def test_toy_moduli(self):
        assert [sp.q for sp in TOY.moduli] == [97, 113]
        assert TOY.q == 10961

    def test_reconstruction_constants(self, ctx6):
        for ctx in (TOY, ctx6):
            for i, sp in enumerate(ctx.moduli):
                assert ctx.q_star[i] == ctx.q // sp.q
                assert (ctx.q_tilde[i] * (ctx.q_star[i] % sp.q)) % sp.q == 1
                for j, spj in enumerate(ctx.moduli):
                    assert ctx.e[i] % spj.q == (1 if i == j else 0)

    def test_needs_enough_primes(self):
        with pytest.raises(ValueError):
            build_context(v=5, t=9, t_prime=3, n=8, mu=25)

    def test_explicit_prime_selection(self):
        ctx = build_context(v=7, t=2, t_prime=2, n=8, mu=25,
                            prime_selection=[113, 97])
        assert [sp.q for sp in ctx.moduli] == [113, 97]
        with pytest.raises(ValueError):
            build_context(v=7, t=2, t_prime=2, n=8, mu=25,
                          prime_selection=[97, 101])

    def test_actual_q_bitlength_recorded(self, ctx6):
        # q's width comes from the product, not v*t
        assert ctx6.q.bit_length() <= ctx6.v * ctx6.t
        assert ctx6.q.bit_length() >= ctx6.v * ctx6.t - ctx6.t


class TestSegments:
    def test_zero(self):
        assert decompose_segments(0, TOY).z == [0, 0]

    def test_small_value(self):
        assert decompose_segments(100, TOY).z == [100, 0]

    def test_direct_base_conversion(self):
        assert decompose_segments(10000, TOY).z == [10000 % 128, 10000 // 128]

    def test_rejects_oversized(self):
        with pytest.raises(ValueError):
            decompose_segments(1 << 14, TOY)

    def test_reconstructs(self):
        rng = random.Random(1)
        for _ in range(200):
            a = rng.randrange(TOY.q)
            z = decompose_segments(a, TOY).z
            assert sum(zk << (TOY.v * k) for k, zk in enumerate(z)) == a


class TestResidues:
    def test_small_value_passes_through(self):
        a = TOY.moduli[0].q - 1
        assert residual_coeff(a, 0, TOY) == a

    def test_modulus_maps_to_zero(self):
        assert residual_coeff(TOY.moduli[0].q, 0, TOY) == 0

    def test_direct_remainder_toy(self):
        rng = random.Random(2)
        for _ in range(2000):
            a = rng.randrange(TOY.q)
            for i, sp in enumerate(TOY.moduli):
                assert residual_coeff(a, i, TOY) == a % sp.q
                assert residual_coeff_factored(a, i, TOY) == a % sp.q

    def test_direct_remainder_width180(self, ctx6, ctx4):
        # the six-modulus datapath is the factored one; the four-modulus
        # datapath runs straight chains with one interior reduction
        rng = random.Random(3)
        for _ in range(300):
            a = rng.randrange(ctx6.q)
            for i, sp in enumerate(ctx6.moduli):
                assert residual_coeff_factored(a, i, ctx6) == a % sp.q
            b = rng.randrange(ctx4.q)
            for i, sp in enumerate(ctx4.moduli):
                assert residual_coeff(b, i, ctx4) == b % sp.q
                assert residual_coeff_factored(b, i, ctx4) == b % sp.q

    def test_deep_chain_needs_second_interior(self, ctx6):
        # straight depth-5 chains cannot fit mu=75 even with one interior
        # reduction; the configuration error is explicit
        with pytest.raises(ValueError):
            flat75 = build_context(v=30, t=6, t_prime=6, n=8, mu=75,
                                   max_pot_terms=4)
            for _ in range(50):
                residual_coeff(random.Random(0).randrange(flat75.q), 0,
                               flat75)

    def test_cross_path_equality(self, ctx6):
        # same moduli configured both ways must agree coefficient-wise; the
        # straight-chain path needs the wider Barrett budget to fit depth 5
        flat = build_context(v=30, t=6, t_prime=6, n=8, mu=105,
                             prime_selection=[sp.q for sp in ctx6.moduli])
        rng = random.Random(4)
        for _ in range(200):
            a = rng.randrange(ctx6.q)
            for i in range(6):
                assert (residual_coeff_factored(a, i, ctx6)
                        == residual_coeff(a, i, flat))

    def test_approach1_is_multiplier_free(self, ctx4):
        stats = OpStats()
        rng = random.Random(5)
        for _ in range(50):
            residual_coeff(rng.randrange(ctx4.q), 0, ctx4, stats=stats)
        assert stats.general_mul == 0
        assert stats.sau > 0

    def test_approach2_uses_one_multiplier_per_block(self, ctx6):
        stats = OpStats()
        residual_coeff_factored(random.Random(6).randrange(ctx6.q), 0, ctx6,
                                stats)
        assert stats.general_mul == ctx6.d - 1

    def test_interior_reduction_config_error(self, ctx4):
        rng = random.Random(7)
        a = TOY.q - 1
        # toy chains never need an interior; forcing allow_interior off on a
        # context that does need one raises
        with pytest.raises(ValueError):
            for _ in range(20):
                residual_coeff(rng.randrange(ctx4.q), 0, ctx4,
                               allow_interior=False)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            residual_coeff(TOY.q, 0, TOY)


class TestCrtMapping:
    def test_same_residue_everywhere(self):
        w = min(sp.q for sp in TOY.moduli) - 1
        parts = [ResiduePoly([w] * 8, "time") for _ in range(2)]
        assert from_residues(parts, TOY).coeffs == [w] * 8

    def test_round_trip(self):
        rng = random.Random(8)
        poly = BigPoly([rng.randrange(TOY.q) for _ in range(8)])
        assert from_residues(to_residues(poly, TOY), TOY).coeffs == poly.coeffs

    def test_against_bruteforce_crt(self):
        parts = [ResiduePoly([15] + [0] * 7, "time"),
                 ResiduePoly([3] + [0] * 7, "time")]
        x = from_residues(parts, TOY).coeffs[0]
        assert x == crt_combine_bruteforce([15, 3], [97, 113])
        assert x % 97 == 15 and x % 113 == 3

    def test_zero_poly(self):
        zero = BigPoly([0] * 8)
        parts = to_residues(zero, TOY)
        assert all(c == 0 for part in parts for c in part.coeffs)

    def test_small_fixed_point(self):
        w = 42
        poly = BigPoly([w] * 8)
        for part in to_residues(poly, TOY):
            assert part.coeffs == [w] * 8

    def test_homomorphism(self, ctx6):
        rng = random.Random(9)
        a = BigPoly([rng.randrange(ctx6.q) for _ in range(8)])
        b = BigPoly([rng.randrange(ctx6.q) for _ in range(8)])
        prod = parentt_multiply(a, b, ctx6)
        ra, rp = to_residues(a, ctx6), to_residues(prod, ctx6)
        rb = to_residues(b, ctx6)
        for i in range(ctx6.t):
            chan = polymul_ntt(ra[i], rb[i], ctx6.ntt[i])
            assert chan.coeffs == rp[i].coeffs


class TestMultiply:
    def test_identity(self):
        rng = random.Random(10)
        a = BigPoly([rng.randrange(TOY.q) for _ in range(8)])
        one = BigPoly([1] + [0] * 7)
        assert parentt_multiply(a, one, TOY).coeffs == a.coeffs

    def test_negacyclic_wrap(self):
        x = BigPoly([0, 1] + [0] * 6)
        xn1 = BigPoly([0] * 7 + [1])
        out = parentt_multiply(x, xn1, TOY)
        assert out.coeffs == [TOY.q - 1] + [0] * 7

    def test_against_wide_oracles_dense(self, ctx6):
        rng = random.Random(11)
        for ctx in (TOY, ctx6):
            for _ in range(10):
                a = BigPoly([rng.randrange(ctx.q) for _ in range(8)])
                b = BigPoly([rng.randrange(ctx.q) for _ in range(8)])
                got = parentt_multiply(a, b, ctx).coeffs
                assert got == schoolbook_negacyclic_wide(a.coeffs, b.coeffs,
                                                         ctx.q)
                assert got == kronecker_negacyclic_wide(a.coeffs, b.coeffs,
                                                        ctx.q)

    def test_n64_sweep(self):
        ctx = build_context(v=13, t=2, t_prime=2, n=64, mu=41)
        rng = random.Random(12)
        for _ in range(5):
            a = BigPoly([rng.randrange(ctx.q) for _ in range(64)])
            b = BigPoly([rng.randrange(ctx.q) for _ in range(64)])
            got = parentt_multiply(a, b, ctx).coeffs
            assert got == schoolbook_negacyclic_wide(a.coeffs, b.coeffs, ctx.q)


class TestOracleAgreement:
    def test_schoolbook_equals_kronecker(self):
        rng = random.Random(13)
        for n in (4, 8, 16, 64):
            q = rng.randrange(3, 1 << 60) | 1
            a = [rng.randrange(q) for _ in range(n)]
            b = [rng.randrange(q) for _ in range(n)]
            assert (schoolbook_negacyclic_wide(a, b, q)
                    == kronecker_negacyclic_wide(a, b, q))


class TestHexIo:
    def test_round_trip(self):
        rng = random.Random(14)
        poly = BigPoly([rng.randrange(TOY.q) for _ in range(8)])
        text = poly.to_hex_lines()
        back = BigPoly.from_hex_lines(text, 8, TOY.q)
        assert back.coeffs == poly.coeffs

    def test_wrong_line_count(self):
        with pytest.raises(ValueError):
            BigPoly.from_hex_lines("1\n2\n", 8, TOY.q)

    def test_out_of_range_coefficient(self):
        text = "\n".join(["0"] * 7 + [format(TOY.q, "x")]) + "\n"
        with pytest.raises(ValueError):
            BigPoly.from_hex_lines(text, 8, TOY.q)


class TestContextSerialization:
    def test_json_dict(self, ctx6):
        doc = ctx6.to_json_dict()
        assert doc["t"] == 6 and doc["d"] == 2
        assert int(doc["q"]) == ctx6.q
        assert len(doc["moduli"]) == 6
        assert all(m["q"] for m in doc["moduli"])


class TestChannelParallelism:
    def test_threaded_channels_match_sequential(self, ctx6):
        # channels are independent between the residue split and the inverse
        # mapping; a thread pool must give bit-identical results
        from concurrent.futures import ThreadPoolExecutor

        rng = random.Random(15)
        a = BigPoly([rng.randrange(ctx6.q) for _ in range(8)])
        b = BigPoly([rng.randrange(ctx6.q) for _ in range(8)])
        ra, rb = to_residues(a, ctx6), to_residues(b, ctx6)

        def channel(i):
            return polymul_ntt(ra[i], rb[i], ctx6.ntt[i])

        with ThreadPoolExecutor(max_workers=ctx6.t) as pool:
            parallel = list(pool.map(channel, range(ctx6.t)))
        sequential = [channel(i) for i in range(ctx6.t)]
        assert [p.coeffs for p in parallel] == [s.coeffs for s in sequential]
        assert (from_residues(parallel, ctx6).coeffs
                == parentt_multiply(a, b, ctx6).coeffs)
