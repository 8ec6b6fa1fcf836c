"""
O-information algebra over a memoized entropy cache.

Every quantity here is expanded to subset entropies and read through an
EntropyCache, so identities between quantities hold to rounding error on a
single numerical path. Works unchanged for discrete and Gaussian-copula
sources.
"""
import logging
from itertools import combinations
from typing import Dict, Optional, Tuple, Union

from backend.distributions import DiscreteJointDistribution, SubsetMask
from backend.entropy_sources import (
    DiscreteEntropySource,
    EntropyCache,
    EntropySource,
    GaussianEntropySource,
)
from backend.errors import SystemSizeError
from backend.gaussian_estimator import GaussianModel

logger = logging.getLogger(__name__)

__all__ = [
    "EntropyCache",
    "EntropySource",
    "make_cache",
    "mutual_information",
    "conditional_mutual_information",
    "interaction_information",
    "total_correlation",
    "dual_total_correlation",
    "o_information",
    "gradient_first",
    "gradient_second",
    "gradient_k",
    "gradient_k_recursive",
    "local_o_information",
    "gradient_tc",
    "gradient_dtc",
    "first_order_bounds",
    "all_first_gradients",
    "all_second_gradients",
]


def make_cache(source: Union[DiscreteJointDistribution, GaussianModel, EntropySource]) -> EntropyCache:
    """Wrap a distribution, a Gaussian model or a ready source in a fresh cache."""
    if isinstance(source, DiscreteJointDistribution):
        source = DiscreteEntropySource(source)
    elif isinstance(source, GaussianModel):
        source = GaussianEntropySource(source)
    return EntropyCache(source)


def _require_size(system: SubsetMask, minimum: int, what: str) -> None:
    if system.size < minimum:
        raise SystemSizeError(f"{what} needs a system of at least {minimum} variables, got {system.size}")


def _require_member(system: SubsetMask, index: int) -> None:
    if index not in system:
        raise SystemSizeError(f"variable {index} is not part of the system {system.indices()}")


def _require_pair(system: SubsetMask, i: int, j: int) -> Tuple[int, int]:
    if i == j:
        raise SystemSizeError(f"a pair needs two distinct variables, got ({i}, {j})")
    _require_member(system, i)
    _require_member(system, j)
    return (i, j) if i < j else (j, i)


def _single(i: int) -> SubsetMask:
    return SubsetMask(1 << i)


# --- entropy combinations ---

def mutual_information(cache: EntropyCache, a: SubsetMask, b: SubsetMask) -> float:
    """I(A; B) for disjoint blocks."""
    h = cache.entropy
    return h(a) + h(b) - h(a.union(b))


def conditional_mutual_information(
    cache: EntropyCache, a: SubsetMask, b: SubsetMask, given: SubsetMask
) -> float:
    """I(A; B | C) for disjoint blocks."""
    h = cache.entropy
    return h(a.union(given)) + h(b.union(given)) - h(a.union(b).union(given)) - h(given)


def interaction_information(cache: EntropyCache, a: SubsetMask, b: SubsetMask, c: SubsetMask) -> float:
    """I(A; B; C) = I(A; B) - I(A; B | C); positive means redundancy."""
    return mutual_information(cache, a, b) - conditional_mutual_information(cache, a, b, c)


# --- TC, DTC, O-information ---

def _tc(cache: EntropyCache, system: SubsetMask) -> float:
    h = cache.entropy
    return sum(h(_single(i)) for i in system) - h(system)


def _dtc(cache: EntropyCache, system: SubsetMask) -> float:
    h = cache.entropy
    joint = h(system)
    return joint - sum(joint - h(system.without(i)) for i in system)


def _omega(cache: EntropyCache, system: SubsetMask) -> float:
    # TC and DTC coincide on one or two variables, so the O-information of such
    # subsystems is identically zero.
    if system.size < 3:
        return 0.0
    h = cache.entropy
    n = system.size
    return (n - 2) * h(system) + sum(h(_single(i)) - h(system.without(i)) for i in system)


def total_correlation(cache: EntropyCache, system: SubsetMask) -> float:
    """Sum of marginal entropies minus the joint entropy."""
    _require_size(system, 2, "total correlation")
    return _tc(cache, system)


def dual_total_correlation(cache: EntropyCache, system: SubsetMask) -> float:
    """Joint entropy minus the sum of residual conditional entropies."""
    _require_size(system, 2, "dual total correlation")
    return _dtc(cache, system)


def o_information(cache: EntropyCache, system: SubsetMask) -> float:
    """
    O-information of ``system``: positive when redundancy dominates,
    negative when synergy does.

    Raises:
        SystemSizeError: For fewer than 3 variables
    """
    _require_size(system, 3, "O-information")
    return _omega(cache, system)


# --- gradients ---

def gradient_first(cache: EntropyCache, system: SubsetMask, i: int, method: str = "difference") -> float:
    """
    Change in O-information when variable ``i`` joins the rest of the system.

    Args:
        cache: Entropy cache of the source
        system: Variables forming the system (at least 3)
        i: Variable whose contribution is measured
        method: ``"difference"`` evaluates Omega(system) - Omega(system - i);
            ``"mutual_information"`` evaluates
            (2 - n) I(X_i; rest) + sum_k I(X_i; rest - k)

    Returns:
        Gradient in bits; positive means ``i`` adds mainly redundancy
    """
    _require_member(system, i)
    _require_size(system, 3, "first-order gradient")
    if method == "difference":
        return _omega(cache, system) - _omega(cache, system.without(i))
    if method != "mutual_information":
        raise ValueError(f"unknown method {method!r}")

    n = system.size
    xi = _single(i)
    rest = system.without(i)
    total = (2 - n) * mutual_information(cache, xi, rest)
    for k in rest:
        total += mutual_information(cache, xi, rest.without(k))
    return total


def gradient_second(cache: EntropyCache, system: SubsetMask, i: int, j: int) -> float:
    """
    Second-order gradient of the pair ``(i, j)`` in whole-minus-sum form.

    Symmetric in its arguments bit-for-bit: the pair is ordered before
    evaluation. On 3 variables it equals the local O-information.
    """
    i, j = _require_pair(system, i, j)
    _require_size(system, 3, "second-order gradient")
    return (
        _omega(cache, system)
        - _omega(cache, system.without(i))
        - _omega(cache, system.without(j))
        + _omega(cache, system.without(i, j))
    )


def gradient_k(cache: EntropyCache, system: SubsetMask, gamma: SubsetMask) -> float:
    """
    Gradient of order |gamma| by inclusion-exclusion over all subsets of gamma.

    The empty gamma gives the O-information itself.

    Raises:
        SystemSizeError: If gamma is not inside the system or removing it
            leaves fewer than 3 variables
    """
    if not gamma.issubset(system):
        raise SystemSizeError(f"gamma {gamma.indices()} is not a subset of the system {system.indices()}")
    if system.size - gamma.size < 3:
        raise SystemSizeError(
            f"gradient of order {gamma.size} needs at least {gamma.size + 3} variables, "
            f"system has {system.size}"
        )
    total = 0.0
    for alpha in gamma.subsets():
        sign = -1.0 if alpha.size % 2 else 1.0
        total += sign * _omega(cache, system.minus(alpha))
    return total


def gradient_k_recursive(cache: EntropyCache, system: SubsetMask, gamma: SubsetMask) -> float:
    """Same quantity as gradient_k, built as a gradient of a lower-order gradient."""
    if not gamma:
        return o_information(cache, system)
    m = gamma.indices()[-1]
    lower = gamma.without(m)
    return gradient_k_recursive(cache, system, lower) - gradient_k_recursive(cache, system.without(m), lower)


def local_o_information(cache: EntropyCache, system: SubsetMask, i: int, j: int) -> float:
    """Interaction information between X_i, X_j and the rest of the system as one block."""
    i, j = _require_pair(system, i, j)
    _require_size(system, 3, "local O-information")
    return interaction_information(cache, _single(i), _single(j), system.without(i, j))


def gradient_tc(cache: EntropyCache, system: SubsetMask, i: int) -> float:
    """Change in total correlation when ``i`` is added: I(X_i; rest)."""
    _require_member(system, i)
    _require_size(system, 3, "total-correlation gradient")
    return mutual_information(cache, _single(i), system.without(i))


def gradient_dtc(cache: EntropyCache, system: SubsetMask, i: int) -> float:
    """Change in dual total correlation when ``i`` is added."""
    _require_member(system, i)
    _require_size(system, 3, "dual-total-correlation gradient")
    return _dtc(cache, system) - _dtc(cache, system.without(i))


def first_order_bounds(cache: EntropyCache, system: SubsetMask) -> Optional[Tuple[float, float]]:
    """
    Bounds ``(-(n-2) log|X|, log|X|)`` on any first-order gradient.

    Only discrete sources have an alphabet; Gaussian sources return None.
    """
    log_card = cache.max_alphabet_log2
    if log_card is None:
        return None
    return (-(system.size - 2) * log_card, log_card)


def all_first_gradients(cache: EntropyCache, system: SubsetMask) -> Dict[int, float]:
    return {i: gradient_first(cache, system, i) for i in system}


def all_second_gradients(cache: EntropyCache, system: SubsetMask) -> Dict[Tuple[int, int], float]:
    return {(i, j): gradient_second(cache, system, i, j) for i, j in combinations(system.indices(), 2)}
