import pytest

from abom.params import (
    ParamPoint,
    cumulative_fpr,
    entropy_size_bytes,
    fpr,
    max_n,
    sweep,
)

BOUND = 2.0 ** -14

# Frozen reference ranking of the five cheapest geometries under
# f <= 2**-14 and n >= 1000: (z bytes, m, n, k, bytes per item).
TOP_FIVE = [
    (1977, 1 << 24, 1024, 1, 1.931),
    (2160, 1 << 18, 1028, 2, 2.101),
    (2430, 1 << 15, 1015, 5, 2.394),
    (2943, 1 << 15, 1207, 6, 2.438),
    (3531, 1 << 16, 1516, 4, 2.329),
]


class TestFpr:
    def test_zero_items(self):
        assert fpr(1 << 18, 2, 0) == 0.0

    def test_chosen_point_meets_bound(self):
        value = fpr(1 << 18, 2, 1028)
        assert value == pytest.approx(6.103291e-05, rel=1e-6)
        assert value <= BOUND

    def test_next_item_breaks_bound(self):
        assert fpr(1 << 18, 2, 1029) > BOUND

    @pytest.mark.parametrize("m,k", [(1 << 18, 2), (1 << 15, 5), (1 << 24, 1)])
    def test_strictly_increasing_in_n(self, m, k):
        values = [fpr(m, k, n) for n in (1, 10, 100, 1000, 2000)]
        assert values == sorted(values)
        assert len(set(values)) == len(values)


class TestEntropySize:
    @pytest.mark.parametrize("z,m,n,k,_", TOP_FIVE)
    def test_reference_sizes(self, z, m, n, k, _):
        assert entropy_size_bytes(m, k, n) == z


class TestCumulative:
    def test_single_filter(self):
        assert cumulative_fpr(0.25, 1) == 0.25

    def test_zero_rate(self):
        assert cumulative_fpr(0.0, 9) == 0.0

    def test_two_filters_at_bound(self):
        assert cumulative_fpr(BOUND, 2) == pytest.approx(1.2206658721e-4, rel=1e-9)

    def test_four_saturated_filters(self):
        f = fpr(1 << 18, 2, 1028)
        assert cumulative_fpr(f, 4) == pytest.approx(2.4410929e-4, rel=1e-6)


class TestMaxN:
    @pytest.mark.parametrize("z,m,n,k,_", TOP_FIVE)
    def test_reference_capacities(self, z, m, n, k, _):
        assert max_n(m, k, BOUND) == n

    def test_tiny_filter_has_no_capacity(self):
        assert max_n(2, 1, BOUND) == 0

    @pytest.mark.parametrize("m,k", [(1 << 18, 2), (1 << 16, 4), (1 << 24, 1)])
    def test_maximality(self, m, k):
        n = max_n(m, k, BOUND)
        assert fpr(m, k, n) <= BOUND < fpr(m, k, n + 1)


class TestSweep:
    def test_top_five_match_reference_ranking(self):
        rows = sweep()[:5]
        got = [(p.z_bytes, p.m, p.n_max, p.k) for p in rows]
        assert got == [(z, m, n, k) for z, m, n, k, _ in TOP_FIVE]
        for point, (_, _, _, _, bpi) in zip(rows, TOP_FIVE):
            assert round(point.bytes_per_item, 3) == bpi

    def test_all_points_satisfy_constraints(self):
        for point in sweep(max_log2_m=20, max_k=4, min_n=500):
            assert point.f <= BOUND
            assert point.n_max >= 500
            assert point.m <= 1 << 20 and point.k <= 4
            assert isinstance(point, ParamPoint)

    def test_sorted_by_size(self):
        sizes = [p.z_bytes for p in sweep()]
        assert sizes == sorted(sizes)

    def test_unreachable_min_n_gives_empty(self):
        assert sweep(min_n=10 ** 9) == []

    def test_k_ceiling_respected(self):
        assert {p.k for p in sweep(max_k=1)} == {1}

    def test_raising_k_ceiling_adds_interlopers(self):
        # at k=7 a 2**15 geometry undercuts the reference fifth row
        rows = sweep(max_k=8)[:5]
        assert (3322, 1 << 15, 1346, 7) in [
            (p.z_bytes, p.m, p.n_max, p.k) for p in rows
        ]
