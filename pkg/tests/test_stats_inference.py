import math
from itertools import product

import numpy as np
import pytest

from backend import synthetic
from backend.errors import BootstrapError, DataFormatError, SingularCorrelationError, SystemSizeError
from backend.gaussian_estimator import DataMatrix
from backend.stats_inference import (
    GradientReport,
    bootstrap,
    bootstrap_replicates,
    edge_list,
    gradient_k_significance,
    gradient_significance,
    local_o_significance,
    make_report,
    o_information_report,
    scan_multiplets,
)


def _constant(value):
    def statistic(data):
        return value

    return statistic


def _column_mean(data: DataMatrix) -> float:
    return float(data.values[:, 0].mean())


def _copy_design(repeats: int = 8) -> DataMatrix:
    """Balanced full factorial over four fair bits A-D, laid out as copy-pairs plus a copy-triplet."""
    base = np.array(list(product([0, 1], repeat=4)) * repeats, dtype=float)
    a, b, c, d = base.T
    values = np.column_stack([a, a, b, b, c, c, d, d, d])
    return DataMatrix(values, ("A0", "A1", "B0", "B1", "C0", "C1", "D0", "D1", "D2"))


class TestGradientReport:
    def test_rejects_inverted_interval(self):
        with pytest.raises(ValueError):
            GradientReport("x", 0.0, 1.0, -1.0, True, 100, 0)

    def test_rejects_inconsistent_flag(self):
        with pytest.raises(ValueError):
            GradientReport("x", 0.5, 0.1, 0.9, False, 100, 0)

    def test_make_report_percentiles(self):
        report = make_report("x", 0.3, np.linspace(-1.0, 1.0, 2001), alpha=0.1, n_boot=2001, seed=0)
        assert report.ci_low == pytest.approx(-0.9)
        assert report.ci_high == pytest.approx(0.9)
        assert report.significant is False


class TestBootstrap:
    def test_constant_nonzero_statistic(self):
        data = synthetic.independent_noise(50, 2, seed=0)
        report = bootstrap(data, _constant(0.5), n_boot=200, alpha=0.05, seed=1)
        assert report.ci_low == report.ci_high == report.estimate == 0.5
        assert report.significant

    def test_constant_zero_statistic(self):
        data = synthetic.independent_noise(50, 2, seed=0)
        report = bootstrap(data, _constant(0.0), n_boot=200, alpha=0.05, seed=1)
        assert report.ci_low == report.ci_high == 0.0
        assert not report.significant

    def test_same_seed_is_bit_identical(self):
        data = synthetic.independent_noise(300, 3, seed=2)
        first = bootstrap(data, _column_mean, n_boot=300, alpha=0.05, seed=9)
        second = bootstrap(data, _column_mean, n_boot=300, alpha=0.05, seed=9)
        assert first == second

    def test_parallel_matches_serial(self):
        data = synthetic.independent_noise(200, 3, seed=3)
        serial = bootstrap_replicates(data, _column_mean, 120, seed=4, n_jobs=1)
        parallel = bootstrap_replicates(data, _column_mean, 120, seed=4, n_jobs=3)
        assert np.array_equal(serial, parallel)

    def test_clt_interval_width(self):
        data = synthetic.independent_noise(1000, 1, seed=5)
        report = bootstrap(data, _column_mean, n_boot=1000, alpha=0.05, seed=6)
        expected = 2 * 1.96 / math.sqrt(1000)
        assert report.ci_high - report.ci_low == pytest.approx(expected, rel=0.2)

    def test_parameter_checks(self):
        data = synthetic.independent_noise(50, 2, seed=0)
        with pytest.raises(ValueError):
            bootstrap(data, _column_mean, n_boot=50, alpha=0.05, seed=0)
        with pytest.raises(ValueError):
            bootstrap(data, _column_mean, n_boot=100, alpha=1.5, seed=0)

    def test_failing_statistic_exhausts_retry_budget(self):
        def always_singular(data):
            raise SingularCorrelationError("singular")

        data = synthetic.independent_noise(50, 2, seed=0)
        with pytest.raises(BootstrapError):
            bootstrap_replicates(data, always_singular, 100, seed=0, n_jobs=1)

    def test_failed_replicates_are_redrawn(self):
        calls = {"n": 0}

        def flaky(data):
            calls["n"] += 1
            if calls["n"] % 3 == 0:
                raise SingularCorrelationError("singular")
            return float(data.values[:, 0].mean())

        data = synthetic.independent_noise(50, 2, seed=0)
        replicates = bootstrap_replicates(data, flaky, 100, seed=0, n_jobs=1)
        assert replicates.shape == (100,)

    def test_alpha_monotonicity(self):
        data = synthetic.latent_factor_data(120, 4, loading=0.3, seed=7)
        strict = gradient_significance(data, 1, n_boot=200, alpha=0.01, seed=8)
        loose = gradient_significance(data, 1, n_boot=200, alpha=0.05, seed=8)
        for s, l in zip(strict, loose):
            assert l.ci_low >= s.ci_low and l.ci_high <= s.ci_high
            if s.significant:
                assert l.significant


class TestGradientSignificance:
    def test_latent_factor_gradients_positive(self):
        data = synthetic.latent_factor_data(1000, 5, seed=0)
        reports = gradient_significance(data, 1, n_boot=200, alpha=0.05, seed=0)
        assert [r.label for r in reports] == [f"gradient_first(F{k})" for k in range(5)]
        assert all(r.significant and r.estimate > 0 for r in reports)

    def test_sum_triplet_gradients_negative(self):
        data = synthetic.sum_triplet_data(1000, n_noise=3, seed=1)
        reports = gradient_significance(data, 1, n_boot=200, alpha=0.05, seed=1)
        for report in reports[:3]:
            assert report.members[0] in ("S0", "S1", "S2")
            assert report.significant and report.estimate < 0

    def test_second_order_reports_and_edges(self):
        data = synthetic.latent_factor_data(400, 4, seed=2)
        reports = gradient_significance(data, 2, n_boot=100, alpha=0.05, seed=2)
        assert len(reports) == 6
        assert reports[0].label == "gradient_second(F0,F1)"
        edges = edge_list(reports)
        assert edges[0]["node_i"] == "F0" and edges[0]["node_j"] == "F1"
        assert set(edges[0]) == {"node_i", "node_j", "value", "significant"}

    def test_local_o_reports(self):
        data = synthetic.sum_triplet_data(600, n_noise=1, seed=3)
        reports = local_o_significance(data, n_boot=100, alpha=0.05, seed=3)
        assert len(reports) == 6
        by_label = {r.label: r for r in reports}
        assert by_label["local_o_information(S0,S1)"].estimate < 0

    def test_gradient_k_report(self):
        data = synthetic.latent_factor_data(400, 5, seed=4)
        report = gradient_k_significance(data, ["F3", "F1"], n_boot=100, alpha=0.05, seed=4)
        assert report.label == "gradient_k(F1,F3)"
        assert report.members == ("F1", "F3")

    def test_gradient_k_unknown_column(self):
        data = synthetic.latent_factor_data(100, 4, seed=4)
        with pytest.raises(DataFormatError):
            gradient_k_significance(data, ["F9"], n_boot=100, alpha=0.05, seed=4)

    def test_o_information_report(self):
        data = synthetic.latent_factor_data(500, 4, seed=5)
        report = o_information_report(data, n_boot=100, alpha=0.05, seed=5)
        assert report.label == "o_information"
        assert report.estimate > 0 and report.significant

    def test_needs_three_variables(self):
        data = synthetic.latent_factor_data(100, 2, seed=0)
        with pytest.raises(SystemSizeError):
            gradient_significance(data, 1, n_boot=100, alpha=0.05, seed=0)

    def test_discrete_backend(self):
        data = _copy_design()
        reports = gradient_significance(data, 1, n_boot=100, alpha=0.05, seed=0, backend="discrete")
        assert len(reports) == 9

    def test_discrete_backend_rejects_real_values(self):
        data = synthetic.latent_factor_data(100, 3, seed=0)
        with pytest.raises(DataFormatError):
            gradient_significance(data, 1, n_boot=100, alpha=0.05, seed=0, backend="discrete")


class TestMultipletScan:
    @pytest.mark.parametrize("order, expected", [(3, 364), (4, 1001)])
    def test_combinatorics(self, order, expected):
        data = synthetic.independent_noise(244, 14, seed=0)
        scan = scan_multiplets(data, order, n_boot=100, alpha=0.05, seed=0)
        assert scan.n_multiplets == expected

    def test_redundancy_decomposition(self):
        data = synthetic.latent_factor_data(500, 6, loading=0.7, seed=1)
        scan = scan_multiplets(data, 3, n_boot=100, alpha=0.05, seed=1)
        redundant = scan.significant_redundant()
        assert redundant
        total = sum(scan.redundancy_by_variable.values())
        assert total == pytest.approx(3 * math.fsum(r.estimate for r in redundant), rel=1e-12)
        assert all(v >= 0 for v in scan.redundancy_by_variable.values())
        assert all(v <= 0 for v in scan.synergy_by_variable.values())

    def test_copy_pairs_have_no_synergy(self):
        scan = scan_multiplets(_copy_design(), 3, n_boot=100, alpha=0.05, seed=2, backend="discrete")
        for report in scan.reports:
            if report.significant:
                assert report.estimate >= 0
        assert all(v == 0 for v in scan.synergy_by_variable.values())
        assert scan.redundancy_by_variable["D0"] >= 1.0
        assert scan.redundancy_by_pair[("D0", "D1")] >= 1.0
        assert scan.redundancy_by_variable["A0"] == 0.0

    def test_scan_is_deterministic(self):
        data = synthetic.sum_triplet_data(300, n_noise=2, seed=3)
        first = scan_multiplets(data, 3, n_boot=100, alpha=0.05, seed=3)
        second = scan_multiplets(data, 3, n_boot=100, alpha=0.05, seed=3)
        assert first == second

    def test_order_checks(self):
        data = synthetic.independent_noise(100, 3, seed=0)
        with pytest.raises(ValueError):
            scan_multiplets(data, 5, n_boot=100, alpha=0.05, seed=0)
        with pytest.raises(SystemSizeError):
            scan_multiplets(data, 4, n_boot=100, alpha=0.05, seed=0)


@pytest.mark.slow
class TestCalibration:
    def test_false_positive_rate_on_independent_noise(self):
        flagged = total = 0
        for trial in range(20):
            data = synthetic.independent_noise(244, 14, seed=100 + trial)
            reports = gradient_significance(data, 1, n_boot=1000, alpha=0.05, seed=trial)
            flagged += sum(r.significant for r in reports)
            total += len(reports)
        assert flagged / total <= 0.10
