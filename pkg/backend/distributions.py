"""
Exact finite discrete joint distributions.

Tables are numpy arrays with one axis per variable (row-major, variable 0 most
significant), which makes marginalization a plain sum over the dropped axes.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from backend.config import get_settings
from backend.errors import (
    DegenerateMarginalError,
    DistributionError,
    SystemSizeError,
    TableSizeError,
)
from backend.utils import decode_state, encode_state, iter_states, state_index

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True, order=True)
class SubsetMask:
    """
    Bit-set over variable indices.

    Bit ``k`` set means variable ``k`` belongs to the subset. Used for the
    system, the removed variables and every sub-system appearing in the
    O-information algebra.
    """

    bits: int = 0

    def __post_init__(self):
        if self.bits < 0:
            raise ValueError("SubsetMask bits must be non-negative")

    @classmethod
    def from_indices(cls, indices: Iterable[int]) -> "SubsetMask":
        bits = 0
        for i in indices:
            if i < 0:
                raise ValueError(f"negative variable index {i}")
            bits |= 1 << int(i)
        return cls(bits)

    @classmethod
    def full(cls, n_vars: int) -> "SubsetMask":
        return cls((1 << n_vars) - 1)

    @property
    def size(self) -> int:
        return bin(self.bits).count("1")

    def __len__(self) -> int:
        return self.size

    def __bool__(self) -> bool:
        return self.bits != 0

    def __contains__(self, index: int) -> bool:
        return index >= 0 and bool(self.bits >> index & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices())

    def indices(self) -> Tuple[int, ...]:
        out = []
        bits, k = self.bits, 0
        while bits:
            if bits & 1:
                out.append(k)
            bits >>= 1
            k += 1
        return tuple(out)

    def without(self, *indices: int) -> "SubsetMask":
        bits = self.bits
        for i in indices:
            bits &= ~(1 << i)
        return SubsetMask(bits)

    def minus(self, other: "SubsetMask") -> "SubsetMask":
        return SubsetMask(self.bits & ~other.bits)

    def union(self, other: "SubsetMask") -> "SubsetMask":
        return SubsetMask(self.bits | other.bits)

    def issubset(self, other: "SubsetMask") -> bool:
        return self.bits & ~other.bits == 0

    def subsets(self) -> Iterator["SubsetMask"]:
        """All sub-masks, the empty one included (2^size of them)."""
        sub = self.bits
        while True:
            yield SubsetMask(sub)
            if sub == 0:
                return
            sub = (sub - 1) & self.bits

    def validate(self, n_vars: int) -> None:
        if self.bits >> n_vars:
            raise ValueError(f"subset {self.indices()} references variables beyond n_vars={n_vars}")

    def __repr__(self) -> str:
        return f"SubsetMask({set(self.indices()) or '{}'})"


class DiscreteJointDistribution:
    """
    Normalized probability table over a finite product alphabet.

    The table is read-only after construction, so instances can be shared by
    concurrent readers.
    """

    def __init__(
        self,
        alphabet_sizes: Sequence[int],
        probs: Union[Sequence[float], np.ndarray],
        max_states: Optional[int] = None,
    ):
        sizes = tuple(int(a) for a in alphabet_sizes)
        if not sizes:
            raise DistributionError("a distribution needs at least one variable")
        if any(a < 1 for a in sizes):
            raise DistributionError(f"alphabet sizes must be positive, got {sizes}")
        n_states = math.prod(sizes)
        cap = get_settings().max_states if max_states is None else max_states
        if n_states > cap:
            raise TableSizeError(f"table with {n_states} states exceeds the cap of {cap}")

        table = np.array(probs, dtype=np.float64)
        if table.size != n_states:
            raise DistributionError(
                f"table length {table.size} does not match product of alphabet sizes {n_states}"
            )
        table = table.reshape(sizes)
        if np.any(table < 0) or not np.all(np.isfinite(table)):
            raise DistributionError("probability masses must be finite and non-negative")
        total = float(table.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DistributionError(f"masses sum to {total!r}, not 1")
        table.setflags(write=False)
        self._table = table

    @property
    def alphabet_sizes(self) -> Tuple[int, ...]:
        return self._table.shape

    @property
    def n_vars(self) -> int:
        return self._table.ndim

    @property
    def table(self) -> np.ndarray:
        """One axis per variable."""
        return self._table

    @property
    def probs(self) -> np.ndarray:
        """Flat mixed-radix table."""
        return self._table.reshape(-1)

    @property
    def max_alphabet_log2(self) -> float:
        return math.log2(max(self.alphabet_sizes))

    def mass(self, state: Sequence[int]) -> float:
        return float(self._table[tuple(state)])

    def __repr__(self) -> str:
        return f"DiscreteJointDistribution(alphabet_sizes={self.alphabet_sizes})"


def _check_subset(dist: DiscreteJointDistribution, subset: SubsetMask) -> None:
    if not subset:
        raise DegenerateMarginalError("cannot marginalize onto an empty set of variables")
    subset.validate(dist.n_vars)


def _marginal_table(dist: DiscreteJointDistribution, keep: SubsetMask) -> np.ndarray:
    drop = tuple(k for k in range(dist.n_vars) if k not in keep)
    if not drop:
        return dist.table
    return dist.table.sum(axis=drop)


def marginalize(dist: DiscreteJointDistribution, keep: SubsetMask) -> DiscreteJointDistribution:
    """
    Marginal distribution over the kept variables (ascending index order).

    Raises:
        DegenerateMarginalError: If ``keep`` is empty
    """
    _check_subset(dist, keep)
    if keep.size == dist.n_vars:
        return dist
    table = _marginal_table(dist, keep)
    # summation order can move the total by a few ulps
    table = table / table.sum()
    return DiscreteJointDistribution(table.shape, table.reshape(-1))


def entropy(dist: DiscreteJointDistribution, subset: SubsetMask) -> float:
    """
    Plug-in Shannon entropy, in bits, of the marginal on ``subset``.

    Zero-mass states contribute nothing (0 log 0 = 0).
    """
    _check_subset(dist, subset)
    p = _marginal_table(dist, subset).reshape(-1)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def permute_variables(dist: DiscreteJointDistribution, order: Sequence[int]) -> DiscreteJointDistribution:
    """Relabel variables: new variable ``k`` is old variable ``order[k]``."""
    table = np.transpose(dist.table, axes=tuple(order))
    return DiscreteJointDistribution(table.shape, np.ascontiguousarray(table).reshape(-1))


def make_copy_gate(n: int) -> DiscreteJointDistribution:
    """
    n-COPY gate: one fair bit copied to all ``n`` variables.

    Attains the upper bound of the first-order gradient.
    """
    if n < 3:
        raise SystemSizeError(f"COPY gate needs n >= 3, got {n}")
    table = np.zeros((2,) * n)
    table[(0,) * n] = 0.5
    table[(1,) * n] = 0.5
    return DiscreteJointDistribution(table.shape, table.reshape(-1))


def make_xor_gate(n: int) -> DiscreteJointDistribution:
    """
    n-XOR gate: ``n - 1`` fair bits plus their parity.

    Uniform over the even-parity states; attains the lower bound of the
    first-order gradient.
    """
    if n < 3:
        raise SystemSizeError(f"XOR gate needs n >= 3, got {n}")
    shape = (2,) * n
    parity = np.indices(shape).sum(axis=0) % 2
    table = np.where(parity == 0, 2.0 ** -(n - 1), 0.0)
    return DiscreteJointDistribution(shape, table.reshape(-1))


def independent_product(
    first: DiscreteJointDistribution, second: DiscreteJointDistribution
) -> DiscreteJointDistribution:
    """Joint of two independent blocks; ``second``'s variables come after ``first``'s."""
    table = np.multiply.outer(first.table, second.table)
    return DiscreteJointDistribution(table.shape, table.reshape(-1))


def random_distribution(
    alphabet_sizes: Sequence[int], rng: np.random.Generator
) -> DiscreteJointDistribution:
    """Random pmf drawn uniformly from the simplex (Dirichlet with unit weights)."""
    n_states = math.prod(alphabet_sizes)
    probs = rng.dirichlet(np.ones(n_states))
    probs = probs / probs.sum()
    return DiscreteJointDistribution(alphabet_sizes, probs)


def empirical_distribution(
    codes: np.ndarray, alphabet_sizes: Optional[Sequence[int]] = None
) -> DiscreteJointDistribution:
    """
    Maximum-likelihood pmf from integer-coded observations.

    Args:
        codes: Observations x variables array of symbols ``0..k-1``
        alphabet_sizes: Per-variable cardinalities; inferred as max + 1 if omitted

    Returns:
        Normalized count table (no bias correction)
    """
    codes = np.asarray(codes)
    if codes.ndim != 2 or codes.shape[0] == 0:
        raise DistributionError("codes must be a non-empty observations x variables matrix")
    if not np.issubdtype(codes.dtype, np.integer):
        if not np.all(np.equal(np.mod(codes, 1), 0)):
            raise DistributionError("discrete data must be integer-coded")
        codes = codes.astype(np.int64)
    if np.any(codes < 0):
        raise DistributionError("discrete symbols must be non-negative")
    if alphabet_sizes is None:
        alphabet_sizes = tuple(int(v) + 1 for v in codes.max(axis=0))
    sizes = tuple(int(a) for a in alphabet_sizes)
    if np.any(codes >= np.asarray(sizes)):
        raise DistributionError(f"symbols exceed the declared alphabet sizes {sizes}")
    n_states = math.prod(sizes)
    cap = get_settings().max_states
    if n_states > cap:
        raise TableSizeError(f"table with {n_states} states exceeds the cap of {cap}")
    flat = np.ravel_multi_index(tuple(codes.T), sizes)
    counts = np.bincount(flat, minlength=n_states).astype(np.float64)
    return DiscreteJointDistribution(sizes, counts / counts.sum())


def dump_table(dist: DiscreteJointDistribution, path: Union[str, Path], skip_zeros: bool = False) -> None:
    """
    Write the table as ``state mass`` lines under an alphabet header.

    Masses use repr() so a dump/load cycle is bit-exact.
    """
    lines = ["# alphabet_sizes: " + " ".join(str(a) for a in dist.alphabet_sizes)]
    for state, mass in zip(iter_states(dist.alphabet_sizes), dist.probs):
        if skip_zeros and mass == 0.0:
            continue
        lines.append(f"{encode_state(state)} {float(mass)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_table(path: Union[str, Path]) -> DiscreteJointDistribution:
    """
    Read a table written by dump_table.

    States that are not listed have zero mass. Without an alphabet header
    the cardinalities are inferred from the largest symbol seen per position.
    """
    sizes: Optional[Tuple[int, ...]] = None
    entries = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            if key.strip() == "alphabet_sizes":
                sizes = tuple(int(tok) for tok in value.split())
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise DistributionError(f"{path}:{lineno}: expected 'state mass', got {raw!r}")
        entries.append((decode_state(parts[0]), float(parts[1])))

    if not entries:
        raise DistributionError(f"{path}: no states listed")
    if sizes is None:
        width = len(entries[0][0])
        sizes = tuple(max(state[k] for state, _ in entries) + 1 for k in range(width))
        logger.warning("%s has no alphabet header; inferred alphabet sizes %s", path, sizes)

    flat = np.zeros(int(np.prod(sizes, dtype=np.int64)))
    for state, mass in entries:
        if len(state) != len(sizes):
            raise DistributionError(f"{path}: state {encode_state(state)} has wrong width")
        if any(d >= size for d, size in zip(state, sizes)):
            raise DistributionError(
                f"{path}: state {encode_state(state)} exceeds alphabet sizes {' '.join(map(str, sizes))}"
            )
        flat[state_index(state, sizes)] = mass
    return DiscreteJointDistribution(sizes, flat)
