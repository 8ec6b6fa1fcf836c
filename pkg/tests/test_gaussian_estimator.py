import math

import numpy as np
import pandas as pd
import pytest

from backend import hoi_core, synthetic
from backend.distributions import SubsetMask
from backend.errors import ConstantColumnError, DataFormatError, SingularCorrelationError
from backend.gaussian_estimator import (
    LOG2_2PIE,
    DataMatrix,
    GaussianModel,
    copula_transform,
    entropies_gaussian,
    entropy_gaussian,
    fit,
    fit_copula,
)


class TestDataMatrix:
    def test_default_column_names(self):
        data = DataMatrix(np.zeros((5, 3)))
        assert data.columns == ("X0", "X1", "X2")

    def test_too_few_observations(self):
        with pytest.raises(DataFormatError):
            DataMatrix(np.zeros((4, 3)))

    def test_missing_values(self):
        values = np.ones((6, 2))
        values[2, 1] = np.nan
        with pytest.raises(DataFormatError):
            DataMatrix(values)

    def test_frame_roundtrip_keeps_names(self):
        frame = pd.DataFrame({"a": [1.0, 2.0, 3.0, 4.0], "b": [4.0, 3.0, 1.0, 2.0]})
        data = DataMatrix.from_frame(frame)
        assert data.columns == ("a", "b")
        assert data.select(["b"]).values[:, 0].tolist() == [4.0, 3.0, 1.0, 2.0]

    def test_select_unknown_column(self):
        with pytest.raises(DataFormatError):
            DataMatrix(np.zeros((5, 2)), ("a", "b")).select(["c"])


class TestCopulaTransform:
    def test_three_point_column(self):
        scores = copula_transform(DataMatrix(np.array([[3.0], [1.0], [2.0]]))).values[:, 0]
        np.testing.assert_allclose(scores, [0.6744897501960817, -0.6744897501960817, 0.0], atol=1e-12)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((200, 1))
        a = copula_transform(DataMatrix(x)).values
        b = copula_transform(DataMatrix(np.exp(3.0 * x) + 7.0)).values
        assert np.array_equal(a, b)

    def test_ties_use_average_ranks(self):
        scores = copula_transform(DataMatrix(np.array([[1.0], [1.0], [1.0], [5.0]]))).values[:, 0]
        assert np.all(np.isfinite(scores))
        assert scores[0] == scores[1] == scores[2]
        assert scores[3] > scores[0]

    def test_constant_column_names_the_column(self):
        values = np.column_stack([np.arange(6.0), np.full(6, 2.0)])
        with pytest.raises(ConstantColumnError, match="'flat'"):
            copula_transform(DataMatrix(values, ("x", "flat")))


class TestFit:
    def test_independent_columns_near_identity(self):
        data = synthetic.independent_noise(4000, 2, seed=1)
        corr = fit_copula(data).corr
        assert abs(corr[0, 1]) < 3.0 / math.sqrt(4000)

    def test_recovers_correlation(self):
        data = synthetic.gaussian_sample(synthetic.equicorrelation(2, 0.5), 10_000, seed=5)
        assert fit_copula(data).corr[0, 1] == pytest.approx(0.5, abs=0.03)

    def test_duplicated_column_is_singular(self):
        x = np.random.default_rng(2).standard_normal(50)
        with pytest.raises(SingularCorrelationError):
            fit_copula(DataMatrix(np.column_stack([x, x])))

    def test_ridge_regularizes_singular_matrix(self):
        x = np.random.default_rng(2).standard_normal(50)
        model = fit(copula_transform(DataMatrix(np.column_stack([x, x]))), ridge=0.1)
        np.testing.assert_allclose(np.diag(model.corr), 1.0)
        assert model.corr[0, 1] == pytest.approx(1.0 / 1.1, abs=1e-9)

    def test_model_validation(self):
        with pytest.raises(SingularCorrelationError):
            GaussianModel(np.array([[1.0, 0.2], [0.3, 1.0]]))
        with pytest.raises(SingularCorrelationError):
            GaussianModel(np.array([[2.0, 0.0], [0.0, 1.0]]))
        not_positive_definite = np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])
        with pytest.raises(SingularCorrelationError):
            GaussianModel(not_positive_definite)


class TestGaussianEntropy:
    def test_single_variable(self):
        model = GaussianModel(np.eye(1))
        assert entropy_gaussian(model, SubsetMask.full(1)) == pytest.approx(2.0471, abs=1e-4)
        assert entropy_gaussian(model, SubsetMask.full(1)) == pytest.approx(0.5 * LOG2_2PIE, abs=1e-12)

    def test_independent_pair_is_additive(self):
        model = GaussianModel(np.eye(2))
        assert entropy_gaussian(model, SubsetMask.full(2)) == pytest.approx(LOG2_2PIE, abs=1e-12)

    def test_mutual_information_closed_form(self):
        model = GaussianModel(synthetic.equicorrelation(2, 0.5))
        cache = hoi_core.make_cache(model)
        mi = hoi_core.mutual_information(cache, SubsetMask(1), SubsetMask(2))
        assert mi == pytest.approx(-0.5 * math.log2(0.75), abs=1e-12)
        assert mi == pytest.approx(0.2075, abs=1e-4)

    def test_batched_matches_single(self):
        model = GaussianModel(synthetic.equicorrelation(5, 0.3))
        subsets = [s for s in SubsetMask.full(5).subsets() if s]
        batched = entropies_gaussian(model, subsets)
        single = [entropy_gaussian(model, s) for s in subsets]
        np.testing.assert_allclose(batched, single, rtol=0, atol=1e-12)

    def test_empty_subset_rejected(self):
        with pytest.raises(ValueError):
            entropies_gaussian(GaussianModel(np.eye(2)), [SubsetMask()])


class TestCopulaConsistency:
    """Estimates from samples against the closed form of the generating matrix."""

    def test_omega_and_gradients_match_generating_model(self):
        corr = synthetic.equicorrelation(5, 0.4)
        data = synthetic.gaussian_sample(corr, 10_000, seed=0)
        system = SubsetMask.full(5)
        truth = hoi_core.make_cache(GaussianModel(corr))
        estimate = hoi_core.make_cache(fit_copula(data))

        assert hoi_core.o_information(estimate, system) == pytest.approx(
            hoi_core.o_information(truth, system), abs=0.02
        )
        for i in system:
            assert hoi_core.gradient_first(estimate, system, i) == pytest.approx(
                hoi_core.gradient_first(truth, system, i), abs=0.02
            )
