"""
Mixed-radix state encoding helpers.

States are written as one digit per variable, variable 0 first (most
significant), so the flat index of a state is its row-major position.
"""
import string
from typing import Iterator, Sequence, Tuple

import numpy as np

_DIGITS = string.digits + string.ascii_lowercase


def encode_state(digits: Sequence[int]) -> str:
    """
    Render a state as a digit string.

    Args:
        digits: Per-variable symbol indices

    Returns:
        One character per variable (0-9 then a-z)
    """
    try:
        return "".join(_DIGITS[d] for d in digits)
    except IndexError:
        raise ValueError(f"symbols above {len(_DIGITS) - 1} cannot be encoded: {tuple(digits)}")


def decode_state(text: str) -> Tuple[int, ...]:
    """Inverse of encode_state."""
    out = []
    for ch in text.strip().lower():
        pos = _DIGITS.find(ch)
        if pos < 0:
            raise ValueError(f"invalid state character {ch!r} in {text!r}")
        out.append(pos)
    return tuple(out)


def state_index(digits: Sequence[int], alphabet_sizes: Sequence[int]) -> int:
    """Flat row-major index of a state."""
    return int(np.ravel_multi_index(tuple(digits), tuple(alphabet_sizes)))


def iter_states(alphabet_sizes: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """All states in flat-index order."""
    for flat in range(int(np.prod(alphabet_sizes, dtype=np.int64))):
        yield tuple(int(d) for d in np.unravel_index(flat, tuple(alphabet_sizes)))
