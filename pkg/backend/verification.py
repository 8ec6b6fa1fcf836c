"""
Invariant suite behind the ``verify`` command.

Runs the identities and bounds of the O-information algebra on the COPY and
XOR gates, on random discrete systems and on the hexagon Ising model.
"""
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, List

import numpy as np

from backend import hoi_core
from backend.distributions import (
    SubsetMask,
    independent_product,
    make_copy_gate,
    make_xor_gate,
    random_distribution,
)
from backend.ising import boltzmann_distribution, hexagon_model

logger = logging.getLogger(__name__)

TOL = 1e-9
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    n_cases: int
    detail: str = ""


def _random_systems(n_systems: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(n_systems):
        n = int(rng.integers(3, 7))
        sizes = tuple(int(a) for a in rng.integers(2, 4, size=n))
        yield random_distribution(sizes, rng)


def check_gate_tightness() -> CheckResult:
    failures = []
    for n in range(3, 9):
        for name, gate, expected in (("copy", make_copy_gate(n), 1.0), ("xor", make_xor_gate(n), 2.0 - n)):
            cache = hoi_core.make_cache(gate)
            system = SubsetMask.full(n)
            for i in range(n):
                value = hoi_core.gradient_first(cache, system, i)
                if abs(value - expected) >= EXACT_TOL:
                    failures.append(f"{name}{n}[{i}]={value!r}")
    return CheckResult("gate tightness", not failures, 2 * 6, "; ".join(failures[:5]))


def check_random_bounds(n_systems: int = 1000, seed: int = 0) -> CheckResult:
    """Gradient bounds, TC/DTC signs and the two gradient paths on random pmfs."""
    failures = []
    for idx, dist in enumerate(_random_systems(n_systems, seed)):
        cache = hoi_core.make_cache(dist)
        system = SubsetMask.full(dist.n_vars)
        low, high = hoi_core.first_order_bounds(cache, system)
        tc = hoi_core.total_correlation(cache, system)
        dtc = hoi_core.dual_total_correlation(cache, system)
        omega = hoi_core.o_information(cache, system)
        if tc < -TOL or dtc < -TOL or abs(omega - (tc - dtc)) > TOL:
            failures.append(f"system {idx}: TC={tc:.3g} DTC={dtc:.3g} Omega={omega:.3g}")
        for i in system:
            grad = hoi_core.gradient_first(cache, system, i)
            via_mi = hoi_core.gradient_first(cache, system, i, method="mutual_information")
            split = hoi_core.gradient_tc(cache, system, i) - hoi_core.gradient_dtc(cache, system, i)
            if not low - TOL <= grad <= high + TOL:
                failures.append(f"system {idx}, var {i}: gradient {grad:.6f} outside [{low:.3f}, {high:.3f}]")
            if abs(grad - via_mi) > TOL or abs(grad - split) > TOL:
                failures.append(f"system {idx}, var {i}: gradient paths disagree")
    return CheckResult("random bounds", not failures, n_systems, "; ".join(failures[:5]))


def check_chain_rule(n_systems: int = 1000, seed: int = 0, max_order: int = 3) -> CheckResult:
    """Inclusion-exclusion against the recursive definition for |gamma| <= max_order."""
    failures = []
    n_cases = 0
    for idx, dist in enumerate(_random_systems(n_systems, seed)):
        cache = hoi_core.make_cache(dist)
        system = SubsetMask.full(dist.n_vars)
        for order in range(1, min(max_order, system.size - 3) + 1):
            for gamma in combinations(system.indices(), order):
                mask = SubsetMask.from_indices(gamma)
                direct = hoi_core.gradient_k(cache, system, mask)
                recursive = hoi_core.gradient_k_recursive(cache, system, mask)
                n_cases += 1
                if abs(direct - recursive) > TOL:
                    failures.append(f"system {idx}, gamma {gamma}: {direct:.6g} vs {recursive:.6g}")
                if order == 1 and abs(direct - hoi_core.gradient_first(cache, system, gamma[0])) > TOL:
                    failures.append(f"system {idx}, gamma {gamma}: order-1 mismatch")
                if order == 2 and abs(direct - hoi_core.gradient_second(cache, system, *gamma)) > TOL:
                    failures.append(f"system {idx}, gamma {gamma}: order-2 mismatch")
    return CheckResult("chain rule", not failures, n_cases, "; ".join(failures[:5]))


def check_three_variable_coincidence(n_systems: int = 100, seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    failures = []
    for idx in range(n_systems):
        sizes = tuple(int(a) for a in rng.integers(2, 4, size=3))
        cache = hoi_core.make_cache(random_distribution(sizes, rng))
        system = SubsetMask.full(3)
        for i, j in combinations(range(3), 2):
            second = hoi_core.gradient_second(cache, system, i, j)
            local = hoi_core.local_o_information(cache, system, i, j)
            if abs(second - local) > TOL:
                failures.append(f"system {idx}, pair ({i},{j}): {second:.6g} vs {local:.6g}")
    return CheckResult("n=3 coincidence", not failures, n_systems, "; ".join(failures[:5]))


def check_four_variable_divergence() -> CheckResult:
    """On the 4-COPY gate the second-order gradient is 0 while the local O-information is 1 bit."""
    cache = hoi_core.make_cache(make_copy_gate(4))
    system = SubsetMask.full(4)
    second = hoi_core.gradient_second(cache, system, 0, 1)
    local = hoi_core.local_o_information(cache, system, 0, 1)
    gap = abs(second - local)
    return CheckResult("n=4 divergence", gap > 0.1, 1, f"gradient {second:.6g}, local {local:.6g}")


def check_independent_circuits() -> CheckResult:
    failures = []
    blocks = [
        (make_copy_gate(3), make_xor_gate(3)),
        (make_xor_gate(4), make_copy_gate(3)),
        (make_copy_gate(3), make_copy_gate(4)),
    ]
    for first, second in blocks:
        joint = independent_product(first, second)
        cache = hoi_core.make_cache(joint)
        system = SubsetMask.full(joint.n_vars)
        for i in range(first.n_vars):
            for j in range(first.n_vars, joint.n_vars):
                value = hoi_core.gradient_second(cache, system, i, j)
                if abs(value) > TOL:
                    failures.append(f"{joint.alphabet_sizes} pair ({i},{j}): {value:.3g}")
    return CheckResult("independent circuits", not failures, len(blocks), "; ".join(failures[:5]))


def check_cache_consistency(seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    dist = random_distribution((2, 3, 2, 3, 2), rng)
    system = SubsetMask.full(5)
    warm = hoi_core.make_cache(dist)
    first = [hoi_core.gradient_first(warm, system, i) for i in system]
    second = [hoi_core.gradient_first(warm, system, i) for i in system]
    cold = [hoi_core.gradient_first(hoi_core.make_cache(dist), system, i) for i in system]
    return CheckResult("cache consistency", first == second == cold, len(first))


def check_ising_infinite_temperature() -> CheckResult:
    cache = hoi_core.make_cache(boltzmann_distribution(hexagon_model(0.0)))
    system = SubsetMask.full(7)
    values = [hoi_core.o_information(cache, system)]
    values += list(hoi_core.all_first_gradients(cache, system).values())
    values += list(hoi_core.all_second_gradients(cache, system).values())
    worst = max(abs(v) for v in values)
    return CheckResult("ising beta=0", worst <= TOL, len(values), f"max |value| {worst:.3g}")


def run_invariant_suite(n_random: int = 1000, seed: int = 0) -> List[CheckResult]:
    """Run every check and log one line per result."""
    checks: List[Callable[[], CheckResult]] = [
        check_gate_tightness,
        lambda: check_random_bounds(n_random, seed),
        lambda: check_chain_rule(n_random, seed),
        check_three_variable_coincidence,
        check_four_variable_divergence,
        check_independent_circuits,
        check_cache_consistency,
        check_ising_infinite_temperature,
    ]
    results = []
    for check in checks:
        result = check()
        log = logger.info if result.passed else logger.error
        log("%-22s %s (%d cases) %s", result.name, "PASS" if result.passed else "FAIL", result.n_cases, result.detail)
        results.append(result)
    return results
