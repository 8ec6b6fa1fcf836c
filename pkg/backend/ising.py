"""
Exact Boltzmann distributions of small Ising systems and inverse-temperature sweeps.

States are enumerated in full (2^n configurations), so every information
quantity is computed without sampling error.
"""
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.special import logsumexp

from backend import hoi_core
from backend.config import get_settings
from backend.distributions import DiscreteJointDistribution, SubsetMask
from backend.errors import DataFormatError, SystemSizeError, TableSizeError

logger = logging.getLogger(__name__)

COUPLING_TOL = 1e-12
DEFAULT_GRID_POINTS = 64
DEFAULT_BETA_MAX = 2.0

# Spin 0 is the center, spins 1..6 go around the ring. Spoke signs alternate,
# so every center-ring-ring triangle carries one negative coupling and is
# frustrated.
HEXAGON_RING_SIGN = 1.0
HEXAGON_SPOKE_SIGNS = (1.0, -1.0, 1.0, -1.0, 1.0, -1.0)


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Couplings J (symmetric, zero diagonal) at inverse temperature beta."""

    couplings: np.ndarray
    beta: float = 0.0

    def __post_init__(self):
        j = np.array(self.couplings, dtype=np.float64)
        if j.ndim != 2 or j.shape[0] != j.shape[1]:
            raise DataFormatError(f"couplings must be a square matrix, got shape {j.shape}")
        if not np.all(np.isfinite(j)):
            raise DataFormatError("couplings must be finite")
        if not np.allclose(j, j.T, rtol=0.0, atol=COUPLING_TOL):
            raise DataFormatError("couplings must be symmetric")
        if np.any(np.abs(np.diag(j)) > COUPLING_TOL):
            raise DataFormatError("couplings must have a zero diagonal")
        if not self.beta >= 0.0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        j.setflags(write=False)
        object.__setattr__(self, "couplings", j)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def n_spins(self) -> int:
        return self.couplings.shape[0]

    def with_beta(self, beta: float) -> "IsingModel":
        return IsingModel(self.couplings, beta)

    @classmethod
    def from_couplings_file(cls, path: Union[str, Path], beta: float = 0.0) -> "IsingModel":
        """Load a coupling matrix written as comma- or whitespace-separated rows."""
        text = Path(path).read_text()
        delimiter = "," if "," in text else None
        try:
            matrix = np.loadtxt(path, delimiter=delimiter, comments="#", ndmin=2)
        except ValueError as exc:
            raise DataFormatError(f"cannot parse couplings file {path}: {exc}")
        return cls(matrix, beta)


def hexagon_couplings(
    spoke_signs: Sequence[float] = HEXAGON_SPOKE_SIGNS, ring_sign: float = HEXAGON_RING_SIGN
) -> np.ndarray:
    """Coupling matrix of the center-plus-hexagon geometry."""
    if len(spoke_signs) != 6:
        raise ValueError("the hexagon needs exactly six spoke couplings")
    j = np.zeros((7, 7))
    for k in range(1, 7):
        nxt = k % 6 + 1
        j[k, nxt] = j[nxt, k] = ring_sign
        j[0, k] = j[k, 0] = spoke_signs[k - 1]
    return j


def hexagon_model(beta: float, couplings: Optional[np.ndarray] = None) -> IsingModel:
    """
    Seven spins: a ferromagnetic hexagonal ring plus a center with spokes of
    alternating sign. Pass ``couplings`` to use another sign assignment.
    """
    return IsingModel(hexagon_couplings() if couplings is None else couplings, beta)


def spin_configurations(n_spins: int) -> np.ndarray:
    """All configurations as a (2^n, n) array of +-1 in flat-index order (symbol 1 is s=+1)."""
    states = np.indices((2,) * n_spins).reshape(n_spins, -1).T
    return 2.0 * states - 1.0


def energies(model: IsingModel) -> np.ndarray:
    """H(s) = -sum_{i<j} J_ij s_i s_j for every configuration."""
    s = spin_configurations(model.n_spins)
    # symmetric J with zero diagonal counts every pair twice
    return -0.5 * np.einsum("si,ij,sj->s", s, model.couplings, s)


def log_partition(model: IsingModel) -> float:
    """ln Z by log-sum-exp over all configurations."""
    return float(logsumexp(-model.beta * energies(model)))


def boltzmann_distribution(model: IsingModel, max_states: Optional[int] = None) -> DiscreteJointDistribution:
    """
    Exact Boltzmann table ``exp(-beta H(s)) / Z`` over binary spins.

    Raises:
        TableSizeError: If 2^n exceeds the state cap
    """
    cap = get_settings().max_states if max_states is None else max_states
    n = model.n_spins
    if 2 ** n > cap:
        raise TableSizeError(f"{n} spins need {2 ** n} states, above the cap of {cap}")
    log_weights = -model.beta * energies(model)
    probs = np.exp(log_weights - logsumexp(log_weights))
    probs /= probs.sum()
    return DiscreteJointDistribution((2,) * n, probs, max_states=cap)


_QUANTITY_ARITY = {
    "o_information": 0,
    "gradient_first": 1,
    "gradient_second": 2,
    "local_o_information": 2,
    "gradient_tc": 1,
    "gradient_dtc": 1,
}
_QUANTITY_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\(([^)]*)\))?\s*$")


@dataclass(frozen=True)
class Quantity:
    """An information quantity on the whole system, e.g. ``gradient_second(0,3)``."""

    kind: str
    indices: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.kind == "gradient_k":
            if not self.indices:
                raise ValueError("gradient_k needs at least one index")
        elif self.kind not in _QUANTITY_ARITY:
            raise ValueError(f"unknown quantity {self.kind!r}")
        elif len(self.indices) != _QUANTITY_ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_QUANTITY_ARITY[self.kind]} index(es), got {self.indices}")

    @classmethod
    def parse(cls, text: str) -> "Quantity":
        match = _QUANTITY_RE.match(text)
        if not match:
            raise ValueError(f"cannot parse quantity {text!r}")
        kind, args = match.group(1), match.group(2)
        indices = tuple(int(a) for a in args.split(",") if a.strip()) if args else ()
        return cls(kind, indices)

    @property
    def label(self) -> str:
        if not self.indices:
            return self.kind
        return f"{self.kind}({','.join(str(i) for i in self.indices)})"

    def evaluate(self, cache: hoi_core.EntropyCache, system: SubsetMask) -> float:
        if any(i not in system for i in self.indices):
            raise SystemSizeError(f"{self.label} refers to variables outside the system")
        if self.kind == "o_information":
            return hoi_core.o_information(cache, system)
        if self.kind == "gradient_k":
            return hoi_core.gradient_k(cache, system, SubsetMask.from_indices(self.indices))
        func = getattr(hoi_core, self.kind)
        return func(cache, system, *self.indices)


def default_quantities(n_spins: int) -> List[Quantity]:
    """First-order gradients of every spin."""
    return [Quantity("gradient_first", (i,)) for i in range(n_spins)]


def default_beta_grid(points: int = DEFAULT_GRID_POINTS, beta_max: float = DEFAULT_BETA_MAX) -> np.ndarray:
    return np.linspace(0.0, beta_max, points)


@dataclass
class SweepResult:
    """One curve per quantity label, aligned with ``betas``."""

    betas: List[float]
    curves: Dict[str, List[float]]

    def __post_init__(self):
        for label, values in self.curves.items():
            if len(values) != len(self.betas):
                raise ValueError(f"curve {label!r} has {len(values)} points for {len(self.betas)} betas")

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"beta": self.betas})
        for label, values in self.curves.items():
            frame[label] = values
        return frame

    def to_dict(self) -> Dict[str, object]:
        return {"betas": list(self.betas), "curves": {k: list(v) for k, v in self.curves.items()}}


def _evaluate_point(
    model_factory: Callable[[float], IsingModel], beta: float, quantities: Sequence[Quantity]
) -> List[float]:
    model = model_factory(beta)
    cache = hoi_core.make_cache(boltzmann_distribution(model))
    system = SubsetMask.full(model.n_spins)
    return [q.evaluate(cache, system) for q in quantities]


def sweep(
    model_factory: Callable[[float], IsingModel],
    betas: Sequence[float],
    quantities: Sequence[Union[Quantity, str]],
    n_jobs: Optional[int] = None,
) -> SweepResult:
    """
    Evaluate each quantity exactly at every inverse temperature.

    Each grid point gets its own entropy cache; grid points may run in
    parallel and results are returned in grid order.
    """
    betas = [float(b) for b in betas]
    if not betas:
        raise ValueError("the beta grid is empty")
    parsed = [q if isinstance(q, Quantity) else Quantity.parse(q) for q in quantities]
    if not parsed:
        raise ValueError("no quantities requested")
    n_jobs = get_settings().n_jobs if n_jobs is None else n_jobs
    logger.info("sweeping %d quantities over %d betas (n_jobs=%d)", len(parsed), len(betas), n_jobs)

    rows = Parallel(n_jobs=n_jobs)(delayed(_evaluate_point)(model_factory, b, parsed) for b in betas)
    curves = {q.label: [row[k] for row in rows] for k, q in enumerate(parsed)}
    return SweepResult(betas, curves)


def symmetry_classes(result: SweepResult, labels: Optional[Sequence[str]] = None, tol: float = 1e-9) -> List[List[str]]:
    """Group curves that agree within ``tol`` at every beta."""
    classes: List[List[str]] = []
    representatives: List[np.ndarray] = []
    for label in labels or list(result.curves):
        curve = np.asarray(result.curves[label])
        for rep, members in zip(representatives, classes):
            if np.max(np.abs(rep - curve)) <= tol:
                members.append(label)
                break
        else:
            representatives.append(curve)
            classes.append([label])
    return classes
