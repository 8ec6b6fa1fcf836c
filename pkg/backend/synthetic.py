"""
Synthetic data with known higher-order structure.

Used as ground truth for the Gaussian-copula pipeline and written out by the
``simulate`` command.
"""
from typing import Optional, Sequence

import numpy as np

from backend.gaussian_estimator import DataMatrix


def _names(prefix: str, n: int, start: int = 0) -> tuple:
    return tuple(f"{prefix}{k}" for k in range(start, start + n))


def equicorrelation(n_vars: int, rho: float) -> np.ndarray:
    """Correlation matrix with every off-diagonal entry equal to ``rho``."""
    corr = np.full((n_vars, n_vars), float(rho))
    np.fill_diagonal(corr, 1.0)
    return corr


def gaussian_sample(corr: np.ndarray, n_obs: int, seed: int, columns: Sequence[str] = ()) -> DataMatrix:
    """Draw ``n_obs`` rows from a zero-mean Gaussian with covariance ``corr``."""
    rng = np.random.default_rng(seed)
    values = rng.multivariate_normal(np.zeros(corr.shape[0]), corr, size=n_obs, method="cholesky")
    return DataMatrix(values, tuple(columns) or _names("X", corr.shape[0]))


def latent_factor_data(n_obs: int, n_vars: int = 5, loading: float = 0.8, seed: int = 0) -> DataMatrix:
    """
    One common latent factor: ``X_k = loading * Z + sqrt(1 - loading^2) * e_k``.

    Every variable is redundant with the rest, so all first-order gradients
    are positive.
    """
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_obs, 1))
    noise = rng.standard_normal((n_obs, n_vars))
    values = loading * z + np.sqrt(1.0 - loading ** 2) * noise
    return DataMatrix(values, _names("F", n_vars))


def sum_triplet_data(
    n_obs: int, n_noise: int = 3, noise_scale: float = 0.5, seed: int = 0
) -> DataMatrix:
    """
    Two independent drivers and their noisy sum, embedded among independent
    noise columns.

    The triplet (S0, S1, S2 = S0 + S1 + noise) is synergistic: its members have
    negative first-order gradients.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n_obs)
    y = rng.standard_normal(n_obs)
    z = x + y + noise_scale * rng.standard_normal(n_obs)
    noise = rng.standard_normal((n_obs, n_noise))
    values = np.column_stack([x, y, z, noise])
    return DataMatrix(values, _names("S", 3) + _names("N", n_noise))


def independent_noise(n_obs: int, n_vars: int = 14, seed: int = 0, columns: Optional[Sequence[str]] = None) -> DataMatrix:
    """Independent standard-normal columns (null model for calibration)."""
    rng = np.random.default_rng(seed)
    return DataMatrix(rng.standard_normal((n_obs, n_vars)), tuple(columns or _names("W", n_vars)))
