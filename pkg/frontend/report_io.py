"""
Report writers.

Every file carries a provenance block (schema version, tool version, full run
configuration and seed) and contains no timestamps, so the same configuration
always produces byte-identical files.
"""
import io
import json
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import pandas as pd

from backend.stats_inference import GradientReport, MultipletScan, edge_list
from frontend.run_config import RunConfig

SCHEMA_VERSION = "1.0"
TOOL_NAME = "hoi-gradients"
TOOL_VERSION = "0.1.0"


def provenance(config: RunConfig) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": TOOL_NAME,
        "tool_version": TOOL_VERSION,
        "config": config.to_dict(),
    }


def reports_frame(reports: Sequence[GradientReport]) -> pd.DataFrame:
    rows = []
    for report in reports:
        row = report.to_dict()
        row["members"] = ";".join(report.members)
        rows.append(row)
    return pd.DataFrame(
        rows,
        columns=["label", "members", "estimate", "ci_low", "ci_high", "significant", "n_boot", "seed", "alpha"],
    )


def scan_indices_frame(scan: MultipletScan) -> pd.DataFrame:
    """R/S indices per variable and per pair in one long table."""
    rows = []
    for name, value in scan.redundancy_by_variable.items():
        rows.append({"node_i": name, "node_j": "", "redundancy": value, "synergy": scan.synergy_by_variable[name]})
    for (a, b), value in scan.redundancy_by_pair.items():
        rows.append({"node_i": a, "node_j": b, "redundancy": value, "synergy": scan.synergy_by_pair[(a, b)]})
    return pd.DataFrame(rows, columns=["node_i", "node_j", "redundancy", "synergy"])


def scan_payload(scan: MultipletScan) -> Dict[str, Any]:
    return {
        "order": scan.order,
        "n_multiplets": scan.n_multiplets,
        "reports": [r.to_dict() for r in scan.reports],
        "redundancy_by_variable": scan.redundancy_by_variable,
        "synergy_by_variable": scan.synergy_by_variable,
        "redundancy_by_pair": [
            {"node_i": a, "node_j": b, "value": v} for (a, b), v in scan.redundancy_by_pair.items()
        ],
        "synergy_by_pair": [{"node_i": a, "node_j": b, "value": v} for (a, b), v in scan.synergy_by_pair.items()],
    }


def reports_payload(reports: Sequence[GradientReport], pairwise: bool = False) -> Dict[str, Any]:
    payload: Dict[str, Any] = {"reports": [r.to_dict() for r in reports]}
    if pairwise:
        payload["edges"] = edge_list(reports)
    return payload


def render_json(payload: Dict[str, Any], config: RunConfig) -> str:
    document = {"provenance": provenance(config), **payload}
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def render_csv(frame: pd.DataFrame, config: RunConfig) -> str:
    """
    Provenance as leading ``#`` lines, then an RFC 4180 body (CRLF line ends,
    quoted where needed).
    """
    header = "".join(f"# {key}: {json.dumps(value, sort_keys=True)}\r\n" for key, value in provenance(config).items())
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\r\n")
    return header + buffer.getvalue()


def write_text(text: str, path: Optional[str]) -> Optional[Path]:
    """Write to ``path`` (creating parent folders); returns None when path is None."""
    if path is None:
        return None
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", newline="") as handle:
        handle.write(text)
    return target


def companion_path(path: Optional[str], suffix: str) -> Optional[str]:
    """``out.csv`` -> ``out_<suffix>.csv``."""
    if path is None:
        return None
    p = Path(path)
    return str(p.with_name(f"{p.stem}_{suffix}{p.suffix}"))