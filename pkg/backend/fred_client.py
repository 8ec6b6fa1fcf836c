"""
FRED observations client.
Downloads the quarterly US macroeconomic series used by the econometric pipeline.
"""
import logging
from typing import Dict, List, Optional, Sequence

import pandas as pd
import requests

from backend.config import get_settings
from backend.errors import FredAPIError

logger = logging.getLogger(__name__)

# Fourteen quarterly indicators, April 1959 to January 2020 (244 quarters).
FRED_SERIES: Dict[str, str] = {
    "COE": "compensation of employees, paid",
    "CPIAUCSL": "consumer price index",
    "FEDFUNDS": "effective federal funds rate",
    "GCE": "government consumption expenditures and investment",
    "GDP": "gross domestic product",
    "GDPDEF": "GDP implicit price deflator",
    "GPDI": "gross private domestic investment",
    "GS10": "ten-year treasury yield",
    "HOANBS": "non-farm business sector hours worked",
    "M1SL": "M1 money stock",
    "M2SL": "M2 money stock",
    "PCEC": "personal consumption expenditures",
    "TB3MS": "three-month treasury bill rate",
    "UNRATE": "unemployment rate",
}
DEFAULT_START = "1959-04-01"
DEFAULT_END = "2020-01-01"


class FredClient:
    """
    Minimal wrapper around the FRED series/observations endpoint.
    Responsibility: fetch one series at quarterly frequency, nothing else.
    """

    def __init__(self, api_key: Optional[str] = None, api_base: Optional[str] = None, timeout: float = 60):
        """Initialize with API credentials from the environment unless given."""
        settings = get_settings()
        self.api_key = api_key or settings.fred_api_key
        self.api_base = api_base or settings.fred_api_base
        self.timeout = timeout

        if not self.api_key:
            raise FredAPIError("FRED_API_KEY must be set in the environment or .env file")

    def fetch_series(
        self, series_id: str, start: str = DEFAULT_START, end: str = DEFAULT_END
    ) -> pd.Series:
        """
        Quarterly observations of one series, averaged within each quarter.

        Args:
            series_id: FRED mnemonic, e.g. ``GDP``
            start: First observation date (YYYY-MM-DD)
            end: Last observation date (YYYY-MM-DD)

        Returns:
            Float series indexed by observation date

        Raises:
            FredAPIError: If the request fails or returns no usable values
        """
        params = {
            "series_id": series_id,
            "api_key": self.api_key,
            "file_type": "json",
            "frequency": "q",
            "aggregation_method": "avg",
            "observation_start": start,
            "observation_end": end,
        }
        response = requests.get(self.api_base, params=params, timeout=self.timeout)
        if response.status_code != 200:
            raise FredAPIError(f"FRED error {response.status_code} for {series_id}: {response.text[:200]}")

        try:
            observations = response.json()["observations"]
        except (ValueError, KeyError) as exc:
            raise FredAPIError(f"malformed FRED response for {series_id}: {exc}")

        dates: List[str] = []
        values: List[float] = []
        for obs in observations:
            # FRED marks missing observations with "."
            if obs.get("value") in (None, "."):
                continue
            dates.append(obs["date"])
            values.append(float(obs["value"]))
        if not values:
            raise FredAPIError(f"FRED returned no observations for {series_id}")
        logger.info("fetched %s: %d observations", series_id, len(values))
        return pd.Series(values, index=pd.Index(dates, name="date"), name=series_id)

    def fetch_panel(
        self, series_ids: Sequence[str] = tuple(FRED_SERIES), start: str = DEFAULT_START, end: str = DEFAULT_END
    ) -> pd.DataFrame:
        """Wide table, one column per series, rows restricted to dates present in all series."""
        columns = [self.fetch_series(sid, start, end) for sid in series_ids]
        frame = pd.concat(columns, axis=1, join="inner")
        return frame.reset_index()
