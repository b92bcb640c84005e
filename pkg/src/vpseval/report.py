"""Run reports: one JSON document per command, plus a text rendering.

Every metric value appears twice: the raw real in [0,1] and a four-decimal
percent string rounded half-up. Rounding happens only here, never inside
the metric math. The document embeds the per-video accumulator tallies so
aggregates can be recomputed and checked from the report alone. Wall-clock
data lives under the single "timing" key so determinism comparisons can
strip it.
"""

from __future__ import annotations

import json
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Optional

from ._version import VERSION
from .errors import SchemaError

TABLE_COLUMNS = ("VPQ", "VPQ1", "VPQ2", "VPQ4", "VPQ6", "STQ")


def format_percent(value: float) -> str:
    """value*100 as a string with exactly four decimals, half-up."""
    scaled = Decimal(repr(value)) * 100
    return str(scaled.quantize(Decimal("0.0001"), rounding=ROUND_HALF_UP))


def format_real(value: float) -> str:
    """Raw value with four decimals, half-up (the STQ column convention)."""
    return str(Decimal(repr(value)).quantize(Decimal("0.0001"),
                                             rounding=ROUND_HALF_UP))


def value_entry(value: Optional[float]) -> Optional[dict]:
    if value is None:
        return None
    return {"value": value, "percent": format_percent(value)}


class Report:
    """Mutable builder around the report document."""

    def __init__(self, command: str, config: dict):
        self.data = {
            "tool": {"name": "vpseval", "version": VERSION},
            "command": command,
            "config": config,
            "videos": {},
            "aggregate": {},
            "tallies": {},
            "timing": {},
        }

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())


def load_report(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read report {path}: {exc}") from exc
    if not isinstance(data, dict) or "aggregate" not in data:
        raise SchemaError(f"{path} is not a report document")
    return data


def strip_timing(data: dict) -> dict:
    """Copy of a report document without its wall-clock section."""
    return {k: v for k, v in data.items() if k != "timing"}


def _column_value(data: dict, column: str) -> str:
    agg = data.get("aggregate", {})
    if column == "STQ":
        entry = agg.get("stq")
        return format_real(entry["value"]) if entry else "-"
    if column == "VPQ":
        entry = agg.get("mean_vpq")
        return entry["percent"] if entry else "-"
    entry = agg.get("vpq", {}).get(column[3:])
    return entry["percent"] if entry else "-"


def render_table(data: dict) -> str:
    """The fixed-shape summary row: VPQ VPQ1 VPQ2 VPQ4 VPQ6 STQ."""
    values = [_column_value(data, c) for c in TABLE_COLUMNS]
    widths = [max(len(c), len(v)) for c, v in zip(TABLE_COLUMNS, values)]
    header = "  ".join(c.ljust(w) for c, w in zip(TABLE_COLUMNS, widths))
    row = "  ".join(v.ljust(w) for v, w in zip(values, widths))
    lines = [header, row]
    agg = data.get("aggregate", {})
    if "relabeled_stuff" in agg:
        lines.append("")
        lines.append(f"relabeled stuff tubes:  {agg['relabeled_stuff']}")
        lines.append(f"relabeled thing tubes:  {agg['relabeled_things']}")
        lines.append(f"filled void pixels:     {agg['filled_void_pixels']}")
    lines.append("")
    lines.append(f"videos: {len(data.get('videos', {}))}")
    return "\n".join(lines)
