"""Plot specification files.

A spec is a JSON document mirroring :class:`PlotSpec`::

    {
      "series": [
        {"csv": "results/team-fp.agg.csv", "label": "team-fp", "color": "#1f77b4"},
        {"csv": "results/mwu.agg.csv", "label": "mwu", "color": "#d62728"}
      ],
      "out": "figures/convergence.png",
      "x_label": "iteration",
      "y_label": "TNG",
      "column": "tng_total",
      "log_x": true,
      "bound": 0.5545
    }

``column`` names the metric whose ``<column>_mean`` / ``<column>_std``
aggregate columns are drawn (default ``tng_total``); ``bound`` adds a dashed
horizontal reference line.  Statistics are read from the CSV as-is — this
layer never re-aggregates.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple


class SpecError(Exception):
    """Malformed or unsatisfiable plot specification."""


@dataclass(frozen=True)
class Series:
    csv: Path
    label: str
    color: str


@dataclass(frozen=True)
class PlotSpec:
    series: Tuple[Series, ...]
    out: Path
    x_label: str = "iteration"
    y_label: str = "TNG"
    column: str = "tng_total"
    log_x: bool = False
    bound: Optional[float] = None

    def __post_init__(self):
        if not self.series:
            raise SpecError("spec needs at least one series")
        for s in self.series:
            if not s.csv.exists():
                raise SpecError(f"series CSV not found: {s.csv}")


_KNOWN_KEYS = {"series", "out", "x_label", "y_label", "column", "log_x", "bound"}


def spec_from_dict(doc: dict, base: Path = Path(".")) -> PlotSpec:
    if not isinstance(doc, dict):
        raise SpecError("spec document must be a JSON object")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise SpecError(f"unknown spec keys: {sorted(unknown)}")
    for key in ("series", "out"):
        if key not in doc:
            raise SpecError(f"spec is missing required key '{key}'")
    series = []
    for entry in doc["series"]:
        if not isinstance(entry, dict) or "csv" not in entry:
            raise SpecError("each series needs at least a 'csv' path")
        csv = base / entry["csv"]
        series.append(Series(csv=csv,
                             label=str(entry.get("label", csv.stem)),
                             color=str(entry.get("color", f"C{len(series)}"))))
    bound = doc.get("bound")
    return PlotSpec(series=tuple(series), out=base / doc["out"],
                    x_label=str(doc.get("x_label", "iteration")),
                    y_label=str(doc.get("y_label", "TNG")),
                    column=str(doc.get("column", "tng_total")),
                    log_x=bool(doc.get("log_x", False)),
                    bound=None if bound is None else float(bound))


def load_spec(path) -> PlotSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise SpecError(f"spec file not found: {path}")
    except json.JSONDecodeError as e:
        raise SpecError(f"spec file is not valid JSON: {e}")
    # relative paths inside a spec resolve against the spec file's directory
    return spec_from_dict(doc, base=path.parent)
