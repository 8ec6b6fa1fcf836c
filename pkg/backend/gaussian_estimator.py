"""
Gaussian-copula entropy estimation for continuous data.

Each column is rank-transformed to standard normal scores, the correlation of
the scores is estimated once, and the entropy of any variable subset follows
in closed form from the log-determinant of the matching submatrix.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from backend.distributions import SubsetMask
from backend.errors import ConstantColumnError, DataFormatError, SingularCorrelationError

logger = logging.getLogger(__name__)

LOG2_2PIE = math.log2(2.0 * math.pi * math.e)
MAX_CONDITION_NUMBER = 1e12
MATRIX_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """Observations x variables table of reals with column names."""

    values: np.ndarray
    columns: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataFormatError(f"data must be 2-dimensional, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataFormatError("data contains missing or non-finite entries")
        n_obs, n_vars = values.shape
        if n_obs < n_vars + 2:
            raise DataFormatError(
                f"{n_obs} observations are too few for {n_vars} variables (need at least {n_vars + 2})"
            )
        columns = tuple(self.columns) or tuple(f"X{k}" for k in range(n_vars))
        if len(columns) != n_vars:
            raise DataFormatError(f"{len(columns)} column names for {n_vars} variables")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", columns)

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_vars(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "DataMatrix":
        return cls(frame.to_numpy(dtype=np.float64), tuple(str(c) for c in frame.columns))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, columns=list(self.columns))

    def take_rows(self, rows: np.ndarray) -> "DataMatrix":
        return DataMatrix(self.values[rows], self.columns)

    def select(self, columns: Sequence[str]) -> "DataMatrix":
        missing = [c for c in columns if c not in self.columns]
        if missing:
            raise DataFormatError(f"unknown column(s): {', '.join(missing)}")
        idx = [self.columns.index(c) for c in columns]
        return DataMatrix(self.values[:, idx], tuple(columns))


class GaussianModel:
    """
    Correlation matrix of normal scores.

    Symmetric, unit diagonal and positive definite; immutable once built.
    """

    def __init__(self, corr: np.ndarray, columns: Sequence[str] = ()):
        corr = np.array(corr, dtype=np.float64)
        if corr.ndim != 2 or corr.shape[0] != corr.shape[1]:
            raise SingularCorrelationError(f"correlation matrix must be square, got {corr.shape}")
        if not np.allclose(corr, corr.T, rtol=0.0, atol=MATRIX_TOL):
            raise SingularCorrelationError("correlation matrix is not symmetric")
        if not np.allclose(np.diag(corr), 1.0, rtol=0.0, atol=MATRIX_TOL):
            raise SingularCorrelationError("correlation matrix must have a unit diagonal")
        if np.linalg.eigvalsh(corr).min() <= 0.0:
            raise SingularCorrelationError("correlation matrix is not positive definite")
        corr.setflags(write=False)
        self._corr = corr
        self.columns = tuple(columns) or tuple(f"X{k}" for k in range(corr.shape[0]))

    @property
    def corr(self) -> np.ndarray:
        return self._corr

    @property
    def n_vars(self) -> int:
        return self._corr.shape[0]

    def __repr__(self) -> str:
        return f"GaussianModel(n_vars={self.n_vars})"


def copula_transform(data: DataMatrix) -> DataMatrix:
    """
    Replace every column by normal scores of its ranks.

    Scores are ``norm.ppf(r / (N + 1))`` with average ranks for ties, so they
    stay finite for every observation.

    Raises:
        ConstantColumnError: If a column has a single distinct value
    """
    values = data.values
    constant = np.ptp(values, axis=0) == 0
    if np.any(constant):
        name = data.columns[int(np.argmax(constant))]
        raise ConstantColumnError(f"column {name!r} is constant and cannot be rank-transformed")
    ranks = stats.rankdata(values, method="average", axis=0)
    scores = stats.norm.ppf(ranks / (data.n_obs + 1.0))
    return DataMatrix(scores, data.columns)


def fit(data: DataMatrix, ridge: Optional[float] = None) -> GaussianModel:
    """
    Sample correlation matrix of (already copula-transformed) columns.

    Args:
        data: Normal scores from copula_transform
        ridge: If given, an ill-conditioned matrix is regularized as
            ``(R + ridge * I) / (1 + ridge)`` instead of rejected

    Raises:
        SingularCorrelationError: Condition number above 1e12 and no ridge
    """
    corr = np.atleast_2d(np.corrcoef(data.values, rowvar=False))
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    if not np.all(np.isfinite(corr)):
        raise SingularCorrelationError("correlation matrix has non-finite entries")

    cond = np.linalg.cond(corr)
    if not np.isfinite(cond) or cond > MAX_CONDITION_NUMBER:
        if not ridge:
            raise SingularCorrelationError(
                f"correlation matrix is singular or near-singular (condition number {cond:.3g})"
            )
        logger.warning("correlation condition number %.3g; applying ridge %g", cond, ridge)
        corr = (corr + ridge * np.eye(corr.shape[0])) / (1.0 + ridge)
        np.fill_diagonal(corr, 1.0)
    return GaussianModel(corr, data.columns)


def fit_copula(data: DataMatrix, ridge: Optional[float] = None) -> GaussianModel:
    """copula_transform followed by fit."""
    return fit(copula_transform(data), ridge=ridge)


def _logdet_batch(stack: np.ndarray) -> np.ndarray:
    try:
        chol = np.linalg.cholesky(stack)
    except np.linalg.LinAlgError:
        raise SingularCorrelationError("non-positive determinant in a correlation submatrix")
    return 2.0 * np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)


def entropies_gaussian(model: GaussianModel, subsets: Sequence[SubsetMask]) -> List[float]:
    """
    Closed-form entropies (bits) for many subsets at once.

    Subsets of equal size are factorized together in one stacked Cholesky call.
    """
    groups: Dict[int, List[int]] = {}
    for pos, subset in enumerate(subsets):
        if not subset:
            raise ValueError("entropy of an empty subset requested")
        subset.validate(model.n_vars)
        groups.setdefault(subset.size, []).append(pos)

    out = [0.0] * len(subsets)
    for k, positions in groups.items():
        index = np.array([subsets[p].indices() for p in positions])
        stack = model.corr[index[:, :, None], index[:, None, :]]
        logdets = _logdet_batch(stack)
        for p, logdet in zip(positions, logdets):
            out[p] = float(0.5 * (k * LOG2_2PIE + logdet / math.log(2.0)))
    return out


def entropy_gaussian(model: GaussianModel, subset: SubsetMask) -> float:
    """
    Differential entropy in bits: ``0.5 * log2((2 pi e)^k det R_subset)``.

    Raises:
        SingularCorrelationError: If the submatrix is not positive definite
    """
    return entropies_gaussian(model, [subset])[0]
