import math
from itertools import combinations

import numpy as np
import pytest

from backend import hoi_core
from backend.distributions import (
    DiscreteJointDistribution,
    SubsetMask,
    independent_product,
    make_copy_gate,
    make_xor_gate,
    permute_variables,
    random_distribution,
)
from backend.entropy_sources import DiscreteEntropySource, EntropyCache
from backend.errors import SystemSizeError
from backend.gaussian_estimator import GaussianModel
from backend.synthetic import equicorrelation

GATE_SIZES = range(3, 9)


def _cache(dist):
    return hoi_core.make_cache(dist)


class TestEntropyCache:
    def test_empty_set_has_zero_entropy(self):
        cache = _cache(make_copy_gate(3))
        assert cache.entropy(SubsetMask()) == 0.0

    def test_hit_returns_identical_value(self):
        cache = _cache(random_distribution((2, 3, 2), np.random.default_rng(0)))
        mask = SubsetMask.from_indices([0, 2])
        first = cache.entropy(mask)
        assert cache.misses == 1
        second = cache.entropy(mask)
        assert cache.hits == 1
        assert first == second

    def test_prefetch_fills_memo(self):
        cache = _cache(make_xor_gate(4))
        subsets = [s for s in SubsetMask.full(4).subsets() if s]
        cache.prefetch(subsets + subsets[:3])
        assert len(cache) == 16
        assert cache.misses == 15
        cache.entropy(SubsetMask.full(4))
        assert cache.misses == 15

    def test_rejects_out_of_range_subset(self):
        cache = _cache(make_copy_gate(3))
        with pytest.raises(ValueError):
            cache.entropy(SubsetMask.from_indices([5]))

    def test_cold_and_warm_caches_agree_bitwise(self):
        dist = random_distribution((2, 2, 3, 2, 3), np.random.default_rng(4))
        system = SubsetMask.full(5)
        warm = _cache(dist)
        hoi_core.all_second_gradients(warm, system)
        for i in system:
            assert hoi_core.gradient_first(warm, system, i) == hoi_core.gradient_first(_cache(dist), system, i)

    def test_wraps_existing_source(self):
        source = DiscreteEntropySource(make_copy_gate(3))
        cache = hoi_core.make_cache(source)
        assert isinstance(cache, EntropyCache)
        assert cache.source is source


class TestTotalCorrelations:
    @pytest.mark.parametrize("n", GATE_SIZES)
    def test_copy_gate(self, n):
        cache, system = _cache(make_copy_gate(n)), SubsetMask.full(n)
        assert hoi_core.total_correlation(cache, system) == pytest.approx(n - 1, abs=1e-12)
        assert hoi_core.dual_total_correlation(cache, system) == pytest.approx(1.0, abs=1e-12)
        assert hoi_core.o_information(cache, system) == pytest.approx(n - 2, abs=1e-12)

    @pytest.mark.parametrize("n", GATE_SIZES)
    def test_xor_gate(self, n):
        cache, system = _cache(make_xor_gate(n)), SubsetMask.full(n)
        assert hoi_core.total_correlation(cache, system) == pytest.approx(1.0, abs=1e-12)
        assert hoi_core.dual_total_correlation(cache, system) == pytest.approx(n - 1, abs=1e-12)
        assert hoi_core.o_information(cache, system) == pytest.approx(2 - n, abs=1e-12)

    def test_independent_variables_are_zero(self):
        dist = DiscreteJointDistribution((2, 2, 2), np.full(8, 1 / 8))
        cache, system = _cache(dist), SubsetMask.full(3)
        assert hoi_core.total_correlation(cache, system) == 0.0
        assert hoi_core.dual_total_correlation(cache, system) == 0.0
        assert hoi_core.o_information(cache, system) == 0.0

    def test_omega_is_tc_minus_dtc(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            dist = random_distribution((2, 3, 2, 3), rng)
            cache, system = _cache(dist), SubsetMask.full(4)
            tc = hoi_core.total_correlation(cache, system)
            dtc = hoi_core.dual_total_correlation(cache, system)
            assert tc >= -1e-9 and dtc >= -1e-9
            assert hoi_core.o_information(cache, system) == pytest.approx(tc - dtc, abs=1e-9)

    def test_omega_invariant_under_relabeling(self):
        dist = random_distribution((2, 3, 2, 2), np.random.default_rng(6))
        permuted = permute_variables(dist, (3, 1, 0, 2))
        assert hoi_core.o_information(_cache(dist), SubsetMask.full(4)) == pytest.approx(
            hoi_core.o_information(_cache(permuted), SubsetMask.full(4)), abs=1e-12
        )

    def test_system_size_errors(self):
        cache = _cache(make_copy_gate(3))
        with pytest.raises(SystemSizeError):
            hoi_core.o_information(cache, SubsetMask.from_indices([0, 1]))
        with pytest.raises(SystemSizeError):
            hoi_core.total_correlation(cache, SubsetMask.from_indices([0]))

    def test_interaction_information_of_xor_is_synergistic(self):
        cache = _cache(make_xor_gate(3))
        value = hoi_core.interaction_information(cache, SubsetMask(1), SubsetMask(2), SubsetMask(4))
        assert value == pytest.approx(-1.0, abs=1e-12)


class TestFirstOrderGradient:
    @pytest.mark.parametrize("n", GATE_SIZES)
    def test_copy_gate_reaches_upper_bound(self, n):
        cache, system = _cache(make_copy_gate(n)), SubsetMask.full(n)
        for i in range(n):
            assert abs(hoi_core.gradient_first(cache, system, i) - 1.0) < 1e-12

    @pytest.mark.parametrize("n", GATE_SIZES)
    def test_xor_gate_reaches_lower_bound(self, n):
        cache, system = _cache(make_xor_gate(n)), SubsetMask.full(n)
        for i in range(n):
            assert abs(hoi_core.gradient_first(cache, system, i) - (2 - n)) < 1e-12

    def test_both_methods_agree(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            dist = random_distribution((3, 2, 2, 3, 2), rng)
            cache, system = _cache(dist), SubsetMask.full(5)
            for i in system:
                assert hoi_core.gradient_first(cache, system, i) == pytest.approx(
                    hoi_core.gradient_first(cache, system, i, method="mutual_information"), abs=1e-9
                )

    def test_mutual_information_terms_condition_on_i(self):
        dist = random_distribution((2, 3, 2, 2), np.random.default_rng(0))
        cache, system = _cache(dist), SubsetMask.full(4)
        xi, rest = SubsetMask.from_indices([0]), system.without(0)
        expected = -2 * hoi_core.mutual_information(cache, xi, rest) + sum(
            hoi_core.mutual_information(cache, xi, rest.without(k)) for k in rest
        )
        via_mi = hoi_core.gradient_first(cache, system, 0, method="mutual_information")
        assert via_mi == pytest.approx(expected, abs=1e-12)
        assert via_mi == pytest.approx(hoi_core.gradient_first(cache, system, 0), abs=1e-9)

    def test_splits_into_tc_and_dtc_gradients(self):
        dist = random_distribution((2, 3, 2, 2), np.random.default_rng(9))
        cache, system = _cache(dist), SubsetMask.full(4)
        for i in system:
            split = hoi_core.gradient_tc(cache, system, i) - hoi_core.gradient_dtc(cache, system, i)
            assert hoi_core.gradient_first(cache, system, i) == pytest.approx(split, abs=1e-9)

    def test_bounds_on_random_systems(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            n = int(rng.integers(3, 6))
            dist = random_distribution(tuple(int(a) for a in rng.integers(2, 4, size=n)), rng)
            cache, system = _cache(dist), SubsetMask.full(n)
            low, high = hoi_core.first_order_bounds(cache, system)
            assert high == pytest.approx(math.log2(max(dist.alphabet_sizes)))
            for i in system:
                assert low - 1e-9 <= hoi_core.gradient_first(cache, system, i) <= high + 1e-9

    def test_bounds_undefined_for_gaussian_source(self):
        cache = hoi_core.make_cache(GaussianModel(equicorrelation(3, 0.2)))
        assert hoi_core.first_order_bounds(cache, SubsetMask.full(3)) is None

    def test_requires_member_and_size(self):
        cache = _cache(make_copy_gate(4))
        with pytest.raises(SystemSizeError):
            hoi_core.gradient_first(cache, SubsetMask.from_indices([0, 1, 2]), 3)
        with pytest.raises(SystemSizeError):
            hoi_core.gradient_first(cache, SubsetMask.from_indices([0, 1]), 0)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            hoi_core.gradient_first(_cache(make_copy_gate(3)), SubsetMask.full(3), 0, method="bogus")

    def test_all_first_gradients_keys(self):
        cache = _cache(make_copy_gate(4))
        grads = hoi_core.all_first_gradients(cache, SubsetMask.full(4))
        assert list(grads) == [0, 1, 2, 3]


class TestSecondOrderGradient:
    def test_symmetric_bit_for_bit(self):
        dist = random_distribution((2, 3, 2, 2, 3), np.random.default_rng(12))
        cache, system = _cache(dist), SubsetMask.full(5)
        for i, j in combinations(range(5), 2):
            assert hoi_core.gradient_second(cache, system, i, j) == hoi_core.gradient_second(cache, system, j, i)

    def test_coincides_with_local_on_three_variables(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            dist = random_distribution(tuple(int(a) for a in rng.integers(2, 4, size=3)), rng)
            cache, system = _cache(dist), SubsetMask.full(3)
            for i, j in combinations(range(3), 2):
                assert hoi_core.gradient_second(cache, system, i, j) == pytest.approx(
                    hoi_core.local_o_information(cache, system, i, j), abs=1e-9
                )

    def test_four_variable_counterexample(self, copy4):
        cache, system = _cache(copy4), SubsetMask.full(4)
        second = hoi_core.gradient_second(cache, system, 0, 1)
        local = hoi_core.local_o_information(cache, system, 0, 1)
        assert second == pytest.approx(0.0, abs=1e-12)
        assert local == pytest.approx(1.0, abs=1e-12)
        assert abs(second - local) > 0.1

    @pytest.mark.parametrize(
        "first, second",
        [
            (make_copy_gate(3), make_xor_gate(3)),
            (make_xor_gate(4), make_copy_gate(3)),
            (make_copy_gate(3), make_copy_gate(4)),
        ],
    )
    def test_vanishes_across_independent_blocks(self, first, second):
        joint = independent_product(first, second)
        cache, system = _cache(joint), SubsetMask.full(joint.n_vars)
        for i in range(first.n_vars):
            for j in range(first.n_vars, joint.n_vars):
                assert abs(hoi_core.gradient_second(cache, system, i, j)) < 1e-9

    def test_vanishes_across_random_independent_blocks(self):
        rng = np.random.default_rng(14)
        joint = independent_product(random_distribution((2, 3, 2), rng), random_distribution((3, 2, 2), rng))
        cache, system = _cache(joint), SubsetMask.full(6)
        for i in range(3):
            for j in range(3, 6):
                assert abs(hoi_core.gradient_second(cache, system, i, j)) < 1e-9

    def test_pair_must_be_distinct(self):
        with pytest.raises(SystemSizeError):
            hoi_core.gradient_second(_cache(make_copy_gate(4)), SubsetMask.full(4), 1, 1)


class TestLocalOInformation:
    def test_xor_triplet_is_minus_one_bit(self):
        cache = _cache(make_xor_gate(3))
        for i, j in combinations(range(3), 2):
            assert hoi_core.local_o_information(cache, SubsetMask.full(3), i, j) == pytest.approx(-1.0, abs=1e-12)

    def test_copy_triplet_is_plus_one_bit(self):
        cache = _cache(make_copy_gate(3))
        assert hoi_core.local_o_information(cache, SubsetMask.full(3), 0, 2) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric(self):
        dist = random_distribution((2, 2, 3, 2), np.random.default_rng(15))
        cache, system = _cache(dist), SubsetMask.full(4)
        assert hoi_core.local_o_information(cache, system, 1, 3) == hoi_core.local_o_information(cache, system, 3, 1)


class TestGradientK:
    def test_empty_gamma_is_o_information(self):
        dist = random_distribution((2, 2, 3, 2), np.random.default_rng(16))
        cache, system = _cache(dist), SubsetMask.full(4)
        assert hoi_core.gradient_k(cache, system, SubsetMask()) == pytest.approx(
            hoi_core.o_information(cache, system), abs=1e-12
        )

    def test_matches_lower_orders(self):
        dist = random_distribution((2, 3, 2, 2, 2), np.random.default_rng(17))
        cache, system = _cache(dist), SubsetMask.full(5)
        for i in system:
            assert hoi_core.gradient_k(cache, system, SubsetMask(1 << i)) == pytest.approx(
                hoi_core.gradient_first(cache, system, i), abs=1e-9
            )
        for i, j in combinations(range(5), 2):
            assert hoi_core.gradient_k(cache, system, SubsetMask.from_indices([i, j])) == pytest.approx(
                hoi_core.gradient_second(cache, system, i, j), abs=1e-9
            )

    def test_inclusion_exclusion_matches_recursion(self):
        rng = np.random.default_rng(18)
        for _ in range(20):
            dist = random_distribution((2, 2, 3, 2, 2, 3), rng)
            cache, system = _cache(dist), SubsetMask.full(6)
            for order in (1, 2, 3):
                for gamma in combinations(range(6), order):
                    mask = SubsetMask.from_indices(gamma)
                    assert hoi_core.gradient_k(cache, system, mask) == pytest.approx(
                        hoi_core.gradient_k_recursive(cache, system, mask), abs=1e-9
                    )

    def test_copy_gate_higher_orders_vanish(self):
        cache, system = _cache(make_copy_gate(7)), SubsetMask.full(7)
        # Omega of an m-COPY is m - 2, linear in m, so differences of order >= 2 are zero
        assert hoi_core.gradient_k(cache, system, SubsetMask.from_indices([0, 3, 5])) == pytest.approx(0.0, abs=1e-12)

    def test_rejects_too_few_remaining_variables(self):
        cache = _cache(make_copy_gate(5))
        with pytest.raises(SystemSizeError):
            hoi_core.gradient_k(cache, SubsetMask.full(5), SubsetMask.from_indices([0, 1, 2]))

    def test_rejects_gamma_outside_system(self):
        cache = _cache(make_copy_gate(5))
        with pytest.raises(SystemSizeError):
            hoi_core.gradient_k(cache, SubsetMask.from_indices([0, 1, 2, 3]), SubsetMask.from_indices([4]))


class TestGaussianSource:
    def test_equicorrelated_gradients_are_equal_and_positive(self):
        cache = hoi_core.make_cache(GaussianModel(equicorrelation(5, 0.6)))
        grads = list(hoi_core.all_first_gradients(cache, SubsetMask.full(5)).values())
        assert min(grads) > 0
        np.testing.assert_allclose(grads, grads[0], atol=1e-12)

    def test_independent_gaussians_have_zero_omega(self):
        cache = hoi_core.make_cache(GaussianModel(np.eye(4)))
        assert hoi_core.o_information(cache, SubsetMask.full(4)) == pytest.approx(0.0, abs=1e-12)
