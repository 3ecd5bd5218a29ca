"""Folding schedules: published 16-point orders, invariants, cascade law."""

import json

import jsonschema
import pytest

from parentt.foldsched import (FoldingSchedule, bitrev, intt_schedule,
                               ntt_schedule, verify_cascade)
from parentt.schemas import SCHEDULE_SCHEMA


class TestBitrev:
    def test_three_bit_one(self):
        assert bitrev(1, 3) == 4

    def test_zero(self):
        for k in range(1, 8):
            assert bitrev(0, k) == 0

    def test_palindrome(self):
        assert bitrev(5, 3) == 5

    def test_involution(self):
        for bits in range(1, 10):
            for x in range(1 << bits):
                assert bitrev(bitrev(x, bits), bits) == x

    def test_range_check(self):
        with pytest.raises(ValueError):
            bitrev(8, 3)


# The published 16-point folding sets, row by row.
NTT16 = [
    [0, 1, 2, 3, 4, 5, 6, 7],
    [4, 5, 6, 7, 0, 1, 2, 3],
    [2, 3, 4, 5, 6, 7, 0, 1],
    [1, 2, 3, 4, 5, 6, 7, 0],
]
INTT16 = [
    [4, 2, 6, 1, 5, 3, 7, 0],
    [0, 4, 2, 6, 1, 5, 3, 7],
    [3, 7, 0, 4, 2, 6, 1, 5],
    [2, 6, 1, 5, 3, 7, 0, 4],
]


class TestNttSchedule:
    def test_sixteen_point_rows(self):
        s = ntt_schedule(4)
        assert [list(r) for r in s.orders] == NTT16

    def test_dsd_sizes_sixteen(self):
        assert list(ntt_schedule(4).dsd_sizes) == [4, 2, 1]

    @pytest.mark.parametrize("m", range(2, 13))
    def test_rows_are_permutations(self, m):
        s = ntt_schedule(m)
        n2 = 1 << (m - 1)
        for row in s.orders:
            assert sorted(row) == list(range(n2))

    @pytest.mark.parametrize("m", range(2, 13))
    def test_register_total(self, m):
        # geometric sum of 2^(m-s-2) over the m-1 stages
        s = ntt_schedule(m)
        assert sum(s.dsd_sizes) == (1 << (m - 1)) - 1

    def test_m_bounds(self):
        with pytest.raises(ValueError):
            ntt_schedule(1)
        with pytest.raises(ValueError):
            ntt_schedule(17)


class TestInttSchedule:
    def test_sixteen_point_rows(self):
        s = intt_schedule(4)
        assert [list(r) for r in s.orders] == INTT16

    def test_dsd_sizes_sixteen(self):
        assert list(intt_schedule(4).dsd_sizes) == [1, 2, 4]

    @pytest.mark.parametrize("m", range(2, 13))
    def test_rows_are_permutations(self, m):
        s = intt_schedule(m)
        n2 = 1 << (m - 1)
        for row in s.orders:
            assert sorted(row) == list(range(n2))

    @pytest.mark.parametrize("m", range(2, 13))
    def test_register_total(self, m):
        s = intt_schedule(m)
        assert sum(s.dsd_sizes) == (1 << (m - 1)) - 1

    @pytest.mark.parametrize("m", range(2, 13))
    def test_edge_rows_match_general_expression(self, m):
        # the first and last rows have their own published forms; the general
        # expression with floor-mod must coincide with both
        s = intt_schedule(m)
        n2 = 1 << (m - 1)
        first = [bitrev((l + 1) % n2, m - 1) for l in range(n2)]
        last = [bitrev((l + 2) % n2, m - 1) for l in range(n2)]
        assert list(s.orders[0]) == first
        assert list(s.orders[m - 1]) == last


class TestCascade:
    @pytest.mark.parametrize("m", range(2, 13))
    def test_holds_for_all_m(self, m):
        assert verify_cascade(m)

    def test_mismatched_pair_fails(self):
        n = ntt_schedule(4)
        bad = FoldingSchedule(kind="intt", m=4, orders=n.orders,
                              dsd_sizes=intt_schedule(4).dsd_sizes)
        assert not verify_cascade(4, ntt=n, intt=bad)

    @pytest.mark.parametrize("m", range(2, 13))
    def test_production_order_equals_consumption_order(self, m):
        # dataflow-level statement: the last forward stage's butterfly u
        # carries the data pair bitrev(u); the first inverse stage's node j
        # IS the data pair j.  Their per-cycle orders must agree.
        fs, gs = ntt_schedule(m), intt_schedule(m)
        n2 = 1 << (m - 1)
        produced = [bitrev(fs.orders[m - 1][l], m - 1) for l in range(n2)]
        consumed = list(gs.orders[0])
        assert produced == consumed


class TestSerialization:
    def test_json_round_trip_and_schema(self):
        for sched in (ntt_schedule(4), intt_schedule(5)):
            doc = json.loads(sched.to_json())
            jsonschema.validate(doc, SCHEDULE_SCHEMA)
            assert doc["kind"] == sched.kind
            assert doc["orders"] == [list(r) for r in sched.orders]

    def test_validation_rejects_nonpermutation(self):
        with pytest.raises(ValueError):
            FoldingSchedule(kind="ntt", m=2, orders=((0, 0), (0, 1)),
                            dsd_sizes=(1,))
