"""
Run configuration and data ingestion for the command line.
"""
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from backend.errors import DataFormatError
from backend.gaussian_estimator import DataMatrix

logger = logging.getLogger(__name__)

PREPROCESSING = ("none", "log_returns")
BACKENDS = ("gaussian_copula", "discrete")
FORMATS = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one command invocation."""

    command: str
    input_path: Optional[str] = None
    columns: Tuple[str, ...] = field(default=())
    preprocessing: str = "none"
    backend: str = "gaussian_copula"
    order: Optional[str] = None
    gamma: Tuple[str, ...] = field(default=())
    n_boot: Optional[int] = None
    alpha: Optional[float] = None
    seed: Optional[int] = None
    ridge: Optional[float] = None
    beta_max: Optional[float] = None
    beta_points: Optional[int] = None
    couplings_path: Optional[str] = None
    quantities: Tuple[str, ...] = field(default=())
    output_path: Optional[str] = None
    output_format: str = "json"

    def __post_init__(self):
        if self.preprocessing not in PREPROCESSING:
            raise DataFormatError(f"unknown preprocessing {self.preprocessing!r}")
        if self.backend not in BACKENDS:
            raise DataFormatError(f"unknown backend {self.backend!r}")
        if self.output_format not in FORMATS:
            raise DataFormatError(f"unknown output format {self.output_format!r}")
        if self.backend == "discrete" and self.preprocessing == "log_returns":
            raise DataFormatError("log returns are real-valued and cannot feed the discrete backend")

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        for key in ("columns", "gamma", "quantities"):
            out[key] = list(out[key])
        return out


def log_returns(series: Sequence[float]) -> List[float]:
    """
    ``r_t = ln(x_{t+1} / x_t)``; one value shorter than the input.

    Raises:
        DataFormatError: Naming the first row with a non-positive value
    """
    x = np.asarray(series, dtype=np.float64)
    bad = np.flatnonzero(~(x > 0))
    if bad.size:
        raise DataFormatError(f"row {int(bad[0])}: log returns need positive values, got {x[bad[0]]!r}")
    return list(np.log(x[1:] / x[:-1]))


def _looks_like_dates(column: pd.Series) -> bool:
    if pd.api.types.is_datetime64_any_dtype(column):
        return True
    if pd.api.types.is_numeric_dtype(column):
        return False
    try:
        pd.to_datetime(column, errors="raise")
    except (ValueError, TypeError):
        return False
    return True


def read_table(path: str) -> pd.DataFrame:
    """
    Read a comma-separated file with a header row.

    A leading date column is dropped with a notice; every other column must
    be numeric and complete.
    """
    if not Path(path).is_file():
        raise DataFormatError(f"input file not found: {path}")
    try:
        frame = pd.read_csv(path, comment="#")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"malformed CSV {path}: {str(exc).splitlines()[0]}")
    if frame.shape[1] == 0:
        raise DataFormatError(f"{path} has no columns")

    first = frame.columns[0]
    if _looks_like_dates(frame[first]):
        logger.info("dropping date index column %r", first)
        frame = frame.drop(columns=first)

    for name in frame.columns:
        converted = pd.to_numeric(frame[name], errors="coerce")
        bad = converted.isna()
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise DataFormatError(f"column {name!r}, row {row}: missing or non-numeric value")
        frame[name] = converted.astype(np.float64)
    return frame


def load_data(config: RunConfig) -> DataMatrix:
    """Read, select, preprocess and validate the input named by ``config``."""
    if not config.input_path:
        raise DataFormatError(f"command {config.command!r} needs --input")
    frame = read_table(config.input_path)

    if config.columns:
        unknown = [c for c in config.columns if c not in frame.columns]
        if unknown:
            raise DataFormatError(f"unknown column(s): {', '.join(unknown)}")
        frame = frame[list(config.columns)]

    if config.preprocessing == "log_returns":
        frame = pd.DataFrame(
            {name: log_returns(frame[name].to_numpy()) for name in frame.columns}, columns=frame.columns
        )

    if config.backend == "discrete":
        values = frame.to_numpy()
        if not np.all(np.equal(np.mod(values, 1), 0)) or np.any(values < 0):
            raise DataFormatError("the discrete backend needs non-negative integer-coded columns")

    return DataMatrix.from_frame(frame)
