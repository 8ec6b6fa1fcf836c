"""
Entropy backends and the memoized subset-entropy cache.
"""
import logging
import threading
from abc import ABC, abstractmethod
from typing import Dict, Iterable, List, Optional

from backend.distributions import DiscreteJointDistribution, SubsetMask, entropy
from backend.gaussian_estimator import GaussianModel, entropies_gaussian

logger = logging.getLogger(__name__)

DISCRETE_TOL = 1e-9
GAUSSIAN_TOL = 1e-6


class EntropySource(ABC):
    """
    Deterministic map from a variable subset to its entropy in bits.

    ``max_alphabet_log2`` is the log-cardinality of the largest alphabet for
    discrete sources and None for continuous ones.
    """

    n_vars: int
    max_alphabet_log2: Optional[float] = None
    tolerance: float = DISCRETE_TOL

    @abstractmethod
    def subset_entropy(self, subset: SubsetMask) -> float:
        ...

    def subset_entropies(self, subsets: List[SubsetMask]) -> List[float]:
        return [self.subset_entropy(s) for s in subsets]


class DiscreteEntropySource(EntropySource):
    """Exact plug-in entropies of a discrete joint table."""

    tolerance = DISCRETE_TOL

    def __init__(self, dist: DiscreteJointDistribution):
        self.dist = dist
        self.n_vars = dist.n_vars
        self.max_alphabet_log2 = dist.max_alphabet_log2

    def subset_entropy(self, subset: SubsetMask) -> float:
        return entropy(self.dist, subset)


class GaussianEntropySource(EntropySource):
    """Closed-form Gaussian entropies of a fitted copula model."""

    tolerance = GAUSSIAN_TOL

    def __init__(self, model: GaussianModel):
        self.model = model
        self.n_vars = model.n_vars
        self.max_alphabet_log2 = None

    def subset_entropy(self, subset: SubsetMask) -> float:
        return entropies_gaussian(self.model, [subset])[0]

    def subset_entropies(self, subsets: List[SubsetMask]) -> List[float]:
        return entropies_gaussian(self.model, subsets)


class EntropyCache:
    """
    Memoized subset entropies bound to one immutable source.

    Lookups are thread-safe. Two threads missing on the same subset may both
    compute it, but the first stored value is the one every caller sees.
    """

    def __init__(self, source: EntropySource):
        self.source = source
        self._memo: Dict[int, float] = {0: 0.0}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @property
    def n_vars(self) -> int:
        return self.source.n_vars

    @property
    def max_alphabet_log2(self) -> Optional[float]:
        return self.source.max_alphabet_log2

    @property
    def tolerance(self) -> float:
        return self.source.tolerance

    def entropy(self, subset: SubsetMask) -> float:
        """Entropy of ``subset``; the empty set has entropy 0."""
        value = self._memo.get(subset.bits)
        if value is not None:
            with self._lock:
                self.hits += 1
            return value
        subset.validate(self.n_vars)
        value = self.source.subset_entropy(subset)
        with self._lock:
            self.misses += 1
            return self._memo.setdefault(subset.bits, value)

    def prefetch(self, subsets: Iterable[SubsetMask]) -> None:
        """Compute all missing subsets in one batched backend call."""
        missing = [s for s in dict.fromkeys(subsets) if s.bits not in self._memo]
        if not missing:
            return
        values = self.source.subset_entropies(missing)
        with self._lock:
            for subset, value in zip(missing, values):
                self._memo.setdefault(subset.bits, value)
            self.misses += len(missing)
        logger.debug("prefetched %d subset entropies", len(missing))

    def __len__(self) -> int:
        return len(self._memo)
