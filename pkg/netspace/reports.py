"""Verification reports and their JSON/CSV artifacts."""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import pandas as pd

logger = logging.getLogger(__name__)

SCHEMA = "netspace-report/1"
STATUSES = ("pass", "fail", "inconclusive")
ROW_COLUMNS = ["name", "lhs", "rhs", "ratio", "exact", "status"]


def json_safe(value):
    """Replace non-finite floats by the strings 'inf', '-inf' and 'nan', recursively."""
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {str(key): json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    return value


def dumps(data) -> str:
    return json.dumps(json_safe(data), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


@dataclass
class VerificationReport:
    """
    Result of one verification campaign.

    Attributes:
        inequality (str): Campaign id.
        corpus (str): Corpus descriptor.
        rows (list[dict]): Per-function records with at least name, lhs, rhs, ratio, exact and status.
        declared_bound (float): Bound the ratios are checked against (None when the constant is unknown).
        parameters (dict): Campaign parameters.
        config (dict): Effective run configuration.
        extra (dict): Campaign-specific summaries.
        runtime (float): Wall time in seconds.
    """

    inequality: str
    corpus: str
    rows: list = field(default_factory=list)
    declared_bound: Optional[float] = None
    tolerance: float = 1e-9
    parameters: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def empirical_constant(self) -> float:
        ratios = [row["ratio"] for row in self.rows]
        return max(ratios) if ratios else 0.0

    @property
    def violations(self) -> list:
        return [row["name"] for row in self.rows if row["status"] == "fail"]

    @property
    def inconclusive(self) -> list:
        return [row["name"] for row in self.rows if row["status"] == "inconclusive"]

    @property
    def exact(self) -> bool:
        return all(row["exact"] for row in self.rows)

    @property
    def status(self) -> str:
        if self.violations:
            return "fail"
        if self.inconclusive:
            return "inconclusive"
        return "pass"

    def to_dict(self, include_timings: bool = False) -> dict:
        data = {
            "schema": SCHEMA,
            "inequality": self.inequality,
            "corpus": self.corpus,
            "parameters": self.parameters,
            "config": self.config,
            "rows": self.rows,
            "empirical_constant": self.empirical_constant,
            "declared_bound": self.declared_bound,
            "tolerance": self.tolerance,
            "violations": self.violations,
            "inconclusive": self.inconclusive,
            "engine": {"exact": self.exact, "lower_bound_rows": sum(1 for row in self.rows if not row["exact"])},
            "status": self.status,
            "extra": self.extra,
        }
        if include_timings:
            data["runtime"] = self.runtime
        return json_safe(data)

    def to_json(self, include_timings: bool = False) -> str:
        return dumps(self.to_dict(include_timings))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.rows)
        if frame.empty:
            return pd.DataFrame(columns=ROW_COLUMNS)
        leading = [column for column in ROW_COLUMNS if column in frame.columns]
        return frame[leading + sorted(column for column in frame.columns if column not in leading)]


def classify(ratio: float, bound: Optional[float], tolerance: float) -> str:
    """Row status: 'fail' when the ratio exceeds bound * (1 + tolerance)."""
    if bound is None or ratio <= bound * (1.0 + tolerance):
        return "pass"
    return "fail"


def write_text(path, text: str):
    Path(path).write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")


def write_csv(path, frame: pd.DataFrame):
    frame.to_csv(Path(path), index=False, lineterminator="\n", encoding="utf-8")
    logger.info(f"Wrote {len(frame)} rows to {path}")
