"""
Bootstrap inference for information quantities estimated from data.

Rows are resampled i.i.d. with replacement, percentile intervals are read off
the replicate distribution, and a quantity is significant when its interval
excludes zero. Replicate seeds are spawned per replicate index, so results do
not depend on how replicates are spread over workers.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from functools import partial
from itertools import combinations
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from backend import hoi_core
from backend.config import get_settings
from backend.distributions import SubsetMask, empirical_distribution
from backend.entropy_sources import EntropyCache
from backend.errors import BootstrapError, DataFormatError, HOIError, SystemSizeError
from backend.gaussian_estimator import DataMatrix, fit_copula

logger = logging.getLogger(__name__)

BACKENDS = ("gaussian_copula", "discrete")
MIN_BOOT = 100
RETRY_FACTOR = 10


@dataclass(frozen=True)
class GradientReport:
    """Point estimate, percentile interval and significance of one quantity."""

    label: str
    estimate: float
    ci_low: float
    ci_high: float
    significant: bool
    n_boot: int
    seed: int
    alpha: float = 0.05
    members: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.ci_low > self.ci_high:
            raise ValueError(f"{self.label}: ci_low {self.ci_low} above ci_high {self.ci_high}")
        if self.significant != (not self.ci_low <= 0.0 <= self.ci_high):
            raise ValueError(f"{self.label}: significance flag disagrees with the interval")

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["members"] = list(self.members)
        return out


@dataclass
class MultipletScan:
    """O-information of every multiplet of a given order plus R/S aggregation indices."""

    order: int
    reports: List[GradientReport]
    redundancy_by_variable: Dict[str, float]
    synergy_by_variable: Dict[str, float]
    redundancy_by_pair: Dict[Tuple[str, str], float]
    synergy_by_pair: Dict[Tuple[str, str], float]

    @property
    def n_multiplets(self) -> int:
        return len(self.reports)

    def significant_redundant(self) -> List[GradientReport]:
        return [r for r in self.reports if r.significant and r.estimate > 0]

    def significant_synergistic(self) -> List[GradientReport]:
        return [r for r in self.reports if r.significant and r.estimate < 0]


def make_report(
    label: str,
    estimate: float,
    replicates: np.ndarray,
    alpha: float,
    n_boot: int,
    seed: int,
    members: Sequence[str] = (),
) -> GradientReport:
    """Percentile interval at (alpha/2, 1 - alpha/2) and the zero-exclusion flag."""
    low, high = np.quantile(np.asarray(replicates, dtype=np.float64), [alpha / 2.0, 1.0 - alpha / 2.0])
    low, high = float(low), float(high)
    return GradientReport(
        label=label,
        estimate=float(estimate),
        ci_low=low,
        ci_high=high,
        significant=not (low <= 0.0 <= high),
        n_boot=n_boot,
        seed=seed,
        alpha=alpha,
        members=tuple(members),
    )


def _check_boot_params(n_boot: int, alpha: float) -> None:
    if n_boot < MIN_BOOT:
        raise ValueError(f"n_boot must be at least {MIN_BOOT}, got {n_boot}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def _run_replicates(
    data: DataMatrix,
    statistic: Callable[[DataMatrix], Any],
    seeds: Sequence[np.random.SeedSequence],
    max_attempts: int,
) -> List[Tuple[np.ndarray, int]]:
    out = []
    for seed_seq in seeds:
        rng = np.random.default_rng(seed_seq)
        for attempt in range(1, max_attempts + 1):
            rows = rng.integers(0, data.n_obs, size=data.n_obs)
            try:
                value = np.asarray(statistic(data.take_rows(rows)), dtype=np.float64)
            except (HOIError, np.linalg.LinAlgError) as exc:
                logger.info("bootstrap replicate failed (%s); redrawing", exc)
                continue
            out.append((value, attempt))
            break
        else:
            raise BootstrapError(f"a replicate failed {max_attempts} times in a row")
    return out


def bootstrap_replicates(
    data: DataMatrix,
    statistic: Callable[[DataMatrix], Any],
    n_boot: int,
    seed: int,
    n_jobs: Optional[int] = None,
) -> np.ndarray:
    """
    Evaluate ``statistic`` on ``n_boot`` row resamples.

    A replicate on which the statistic raises is redrawn from the same seed
    stream. More than ``10 * n_boot`` draws in total is an error.

    Returns:
        Array of shape (n_boot,) for scalar statistics, (n_boot, m) for vectors
    """
    n_jobs = get_settings().n_jobs if n_jobs is None else n_jobs
    budget = RETRY_FACTOR * n_boot
    seeds = np.random.SeedSequence(seed).spawn(n_boot)
    n_chunks = max(1, min(n_boot, n_jobs if n_jobs > 0 else 8))
    bounds = np.linspace(0, n_boot, n_chunks + 1).astype(int)
    chunks = [seeds[a:b] for a, b in zip(bounds[:-1], bounds[1:])]

    results = Parallel(n_jobs=n_jobs)(
        delayed(_run_replicates)(data, statistic, chunk, budget) for chunk in chunks
    )
    flat = [item for chunk in results for item in chunk]
    attempts = sum(a for _, a in flat)
    if attempts > budget:
        raise BootstrapError(f"{attempts} draws needed for {n_boot} replicates (limit {budget})")
    if attempts > n_boot:
        logger.warning("%d of %d bootstrap draws were redrawn", attempts - n_boot, attempts)
    return np.stack([v for v, _ in flat])


def bootstrap(
    data: DataMatrix,
    statistic: Callable[[DataMatrix], float],
    n_boot: Optional[int] = None,
    alpha: Optional[float] = None,
    seed: Optional[int] = None,
    label: str = "statistic",
    n_jobs: Optional[int] = None,
) -> GradientReport:
    """
    Percentile bootstrap report for a scalar statistic of a data matrix.

    Args:
        data: Observations to resample
        statistic: Function of a DataMatrix returning bits
        n_boot: Number of replicates (at least 100)
        alpha: Two-sided level, interval at (alpha/2, 1 - alpha/2)
        seed: Root seed; the same seed gives bit-identical reports
        label: Name stored in the report

    Returns:
        GradientReport with the full-sample estimate
    """
    settings = get_settings()
    n_boot = settings.n_boot if n_boot is None else n_boot
    alpha = settings.alpha if alpha is None else alpha
    seed = settings.seed if seed is None else seed
    _check_boot_params(n_boot, alpha)

    estimate = float(statistic(data))
    replicates = bootstrap_replicates(data, statistic, n_boot, seed, n_jobs)
    return make_report(label, estimate, replicates.reshape(n_boot), alpha, n_boot, seed)


# --- statistics over a data matrix ---

def build_cache(data: DataMatrix, backend: str = "gaussian_copula", ridge: Optional[float] = None) -> EntropyCache:
    """Entropy cache for a data matrix under the chosen backend."""
    if backend == "gaussian_copula":
        return hoi_core.make_cache(fit_copula(data, ridge=ridge))
    if backend == "discrete":
        values = data.values
        if not np.all(np.equal(np.mod(values, 1), 0)):
            raise DataFormatError("the discrete backend needs integer-coded columns")
        return hoi_core.make_cache(empirical_distribution(values.astype(np.int64)))
    raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


def _first_order_subsets(system: SubsetMask) -> List[SubsetMask]:
    subsets = [system]
    for i in system:
        subsets.append(SubsetMask(1 << i))
        rest = system.without(i)
        subsets.append(rest)
        subsets.extend(rest.without(k) for k in rest)
    return subsets


def _first_order_statistic(data: DataMatrix, backend: str, ridge: Optional[float]) -> np.ndarray:
    cache = build_cache(data, backend, ridge)
    system = SubsetMask.full(data.n_vars)
    cache.prefetch(_first_order_subsets(system))
    return np.array([hoi_core.gradient_first(cache, system, i) for i in system])


def _second_order_statistic(data: DataMatrix, backend: str, ridge: Optional[float]) -> np.ndarray:
    cache = build_cache(data, backend, ridge)
    system = SubsetMask.full(data.n_vars)
    subsets = _first_order_subsets(system)
    for i, j in combinations(system.indices(), 2):
        rest = system.without(i, j)
        subsets.append(rest)
        subsets.extend(rest.without(k) for k in rest)
    cache.prefetch(subsets)
    return np.array([v for v in hoi_core.all_second_gradients(cache, system).values()])


def _local_o_statistic(data: DataMatrix, backend: str, ridge: Optional[float]) -> np.ndarray:
    cache = build_cache(data, backend, ridge)
    system = SubsetMask.full(data.n_vars)
    return np.array(
        [hoi_core.local_o_information(cache, system, i, j) for i, j in combinations(system.indices(), 2)]
    )


def _gradient_k_statistic(data: DataMatrix, gamma: Tuple[int, ...], backend: str, ridge: Optional[float]) -> float:
    cache = build_cache(data, backend, ridge)
    return hoi_core.gradient_k(cache, SubsetMask.full(data.n_vars), SubsetMask.from_indices(gamma))


def _resolve(n_boot: Optional[int], alpha: Optional[float], seed: Optional[int]) -> Tuple[int, float, int]:
    settings = get_settings()
    n_boot = settings.n_boot if n_boot is None else n_boot
    alpha = settings.alpha if alpha is None else alpha
    seed = settings.seed if seed is None else seed
    _check_boot_params(n_boot, alpha)
    return n_boot, alpha, seed


def _vector_reports(
    data: DataMatrix,
    statistic: Callable[[DataMatrix], np.ndarray],
    labels: List[str],
    members: List[Tuple[str, ...]],
    n_boot: int,
    alpha: float,
    seed: int,
    n_jobs: Optional[int],
) -> List[GradientReport]:
    estimates = statistic(data)
    replicates = bootstrap_replicates(data, statistic, n_boot, seed, n_jobs).reshape(n_boot, len(labels))
    return [
        make_report(labels[k], estimates[k], replicates[:, k], alpha, n_boot, seed, members[k])
        for k in range(len(labels))
    ]


def gradient_significance(
    data: DataMatrix,
    order: int,
    n_boot: Optional[int] = None,
    alpha: Optional[float] = None,
    seed: Optional[int] = None,
    backend: str = "gaussian_copula",
    ridge: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> List[GradientReport]:
    """
    Bootstrap reports for every first-order gradient (order 1) or every
    second-order gradient of an unordered pair (order 2).
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if data.n_vars < 3:
        raise SystemSizeError(f"gradients need at least 3 variables, got {data.n_vars}")
    n_boot, alpha, seed = _resolve(n_boot, alpha, seed)
    cols = data.columns
    if order == 1:
        statistic = partial(_first_order_statistic, backend=backend, ridge=ridge)
        members = [(c,) for c in cols]
        labels = [f"gradient_first({c})" for c in cols]
    else:
        statistic = partial(_second_order_statistic, backend=backend, ridge=ridge)
        members = [(cols[i], cols[j]) for i, j in combinations(range(len(cols)), 2)]
        labels = [f"gradient_second({a},{b})" for a, b in members]
    logger.info("order-%d gradients on %d variables, %d replicates", order, data.n_vars, n_boot)
    return _vector_reports(data, statistic, labels, members, n_boot, alpha, seed, n_jobs)


def local_o_significance(
    data: DataMatrix,
    n_boot: Optional[int] = None,
    alpha: Optional[float] = None,
    seed: Optional[int] = None,
    backend: str = "gaussian_copula",
    ridge: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> List[GradientReport]:
    """Bootstrap reports for the local O-information of every pair."""
    if data.n_vars < 3:
        raise SystemSizeError(f"local O-information needs at least 3 variables, got {data.n_vars}")
    n_boot, alpha, seed = _resolve(n_boot, alpha, seed)
    cols = data.columns
    members = [(cols[i], cols[j]) for i, j in combinations(range(len(cols)), 2)]
    labels = [f"local_o_information({a},{b})" for a, b in members]
    statistic = partial(_local_o_statistic, backend=backend, ridge=ridge)
    return _vector_reports(data, statistic, labels, members, n_boot, alpha, seed, n_jobs)


def gradient_k_significance(
    data: DataMatrix,
    gamma: Sequence[str],
    n_boot: Optional[int] = None,
    alpha: Optional[float] = None,
    seed: Optional[int] = None,
    backend: str = "gaussian_copula",
    ridge: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> GradientReport:
    """Bootstrap report for the gradient of order |gamma| over the named columns."""
    missing = [g for g in gamma if g not in data.columns]
    if missing:
        raise DataFormatError(f"unknown column(s): {', '.join(missing)}")
    n_boot, alpha, seed = _resolve(n_boot, alpha, seed)
    indices = tuple(sorted(data.columns.index(g) for g in gamma))
    members = tuple(data.columns[i] for i in indices)
    statistic = partial(_gradient_k_statistic, gamma=indices, backend=backend, ridge=ridge)
    estimate = statistic(data)
    replicates = bootstrap_replicates(data, statistic, n_boot, seed, n_jobs).reshape(n_boot)
    label = f"gradient_k({','.join(members)})"
    return make_report(label, estimate, replicates, alpha, n_boot, seed, members)


def _omega_statistic(data: DataMatrix, backend: str, ridge: Optional[float]) -> float:
    cache = build_cache(data, backend, ridge)
    return hoi_core.o_information(cache, SubsetMask.full(data.n_vars))


def o_information_report(
    data: DataMatrix,
    n_boot: Optional[int] = None,
    alpha: Optional[float] = None,
    seed: Optional[int] = None,
    backend: str = "gaussian_copula",
    ridge: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> GradientReport:
    """Bootstrap report for the O-information of all columns together."""
    if data.n_vars < 3:
        raise SystemSizeError(f"O-information needs at least 3 variables, got {data.n_vars}")
    n_boot, alpha, seed = _resolve(n_boot, alpha, seed)
    statistic = partial(_omega_statistic, backend=backend, ridge=ridge)
    return bootstrap(data, statistic, n_boot, alpha, seed, label="o_information", n_jobs=n_jobs)


def _multiplet_statistic(
    data: DataMatrix, multiplets: Sequence[Tuple[int, ...]], backend: str, ridge: Optional[float]
) -> np.ndarray:
    cache = build_cache(data, backend, ridge)
    masks = [SubsetMask.from_indices(m) for m in multiplets]
    needed = []
    for mask in masks:
        needed.append(mask)
        for i in mask:
            needed.append(SubsetMask(1 << i))
            needed.append(mask.without(i))
    cache.prefetch(needed)
    return np.array([hoi_core.o_information(cache, mask) for mask in masks])


def scan_multiplets(
    data: DataMatrix,
    order: int,
    n_boot: Optional[int] = None,
    alpha: Optional[float] = None,
    seed: Optional[int] = None,
    backend: str = "gaussian_copula",
    ridge: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> MultipletScan:
    """
    O-information with bootstrap significance for all multiplets of ``order``
    variables, aggregated into redundancy (R) and synergy (S) indices per
    variable and per pair.

    A multiplet counts as redundant (synergistic) when it is significant and
    its full-sample estimate is positive (negative).
    """
    if order not in (3, 4):
        raise ValueError(f"order must be 3 or 4, got {order}")
    if data.n_vars < order:
        raise SystemSizeError(f"{data.n_vars} variables cannot form multiplets of order {order}")
    n_boot, alpha, seed = _resolve(n_boot, alpha, seed)
    cols = data.columns
    multiplets = list(combinations(range(data.n_vars), order))
    logger.info("scanning %d multiplets of order %d", len(multiplets), order)

    statistic = partial(_multiplet_statistic, multiplets=multiplets, backend=backend, ridge=ridge)
    members = [tuple(cols[i] for i in m) for m in multiplets]
    labels = [f"o_information({','.join(m)})" for m in members]
    reports = _vector_reports(data, statistic, labels, members, n_boot, alpha, seed, n_jobs)

    red_var: Dict[str, List[float]] = {c: [] for c in cols}
    syn_var: Dict[str, List[float]] = {c: [] for c in cols}
    red_pair: Dict[Tuple[str, str], List[float]] = {p: [] for p in combinations(cols, 2)}
    syn_pair: Dict[Tuple[str, str], List[float]] = {p: [] for p in combinations(cols, 2)}
    for report in reports:
        if not report.significant or report.estimate == 0.0:
            continue
        by_var, by_pair = (red_var, red_pair) if report.estimate > 0 else (syn_var, syn_pair)
        for name in report.members:
            by_var[name].append(report.estimate)
        for pair in combinations(report.members, 2):
            by_pair[pair].append(report.estimate)

    return MultipletScan(
        order=order,
        reports=reports,
        redundancy_by_variable={k: math.fsum(v) for k, v in red_var.items()},
        synergy_by_variable={k: math.fsum(v) for k, v in syn_var.items()},
        redundancy_by_pair={k: math.fsum(v) for k, v in red_pair.items()},
        synergy_by_pair={k: math.fsum(v) for k, v in syn_pair.items()},
    )


def edge_list(reports: Sequence[GradientReport]) -> List[Dict[str, Any]]:
    """Rows ``(node_i, node_j, value, significant)`` for pairwise reports."""
    rows = []
    for report in reports:
        if len(report.members) != 2:
            raise ValueError(f"{report.label} is not a pairwise quantity")
        rows.append(
            {
                "node_i": report.members[0],
                "node_j": report.members[1],
                "value": report.estimate,
                "significant": report.significant,
            }
        )
    return rows
