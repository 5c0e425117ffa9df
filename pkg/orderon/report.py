import json
import dataclasses
import numpy as np
import pandas as pd
from enum import Enum
from pathlib import Path
from dataclasses import dataclass, field

from .base import log, ExperimentCheckFailed


def to_json(obj):
    if isinstance(obj, pd.DataFrame):
        return to_json(obj.to_dict(orient="records"))
    elif hasattr(obj, "to_dict"):
        return to_json(obj.to_dict())
    elif isinstance(obj, Enum):
        return obj.name
    elif dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_json({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})
    elif isinstance(obj, np.ndarray):
        return obj.tolist()
    elif isinstance(obj, np.bool_):
        return bool(obj)
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif isinstance(obj, Path):
        return str(obj)
    elif isinstance(obj, list) or isinstance(obj, tuple):
        return [to_json(s) for s in obj]
    elif isinstance(obj, dict):
        out = {}
        for k in obj:
            out[str(k)] = to_json(obj[k])
        return out
    else:
        return obj


def dumps(obj) -> str:
    return json.dumps(to_json(obj), indent=2)


def write_json(obj, path):
    Path(path).write_text(dumps(obj) + "\n")


def write_dat(df: pd.DataFrame, path):
    """gnuplot-friendly: '#' header line, whitespace separated columns."""
    lines = ["# " + " ".join(str(c) for c in df.columns)]
    for row in df.itertuples(index=False):
        lines.append(" ".join(str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class Report:
    name: str
    config: dict
    tables: dict[str, pd.DataFrame] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)

    def __repr__(self):
        return f"Report({self.name}, tables={list(self.tables)}, passed={self.passed})"

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failed_checks(self) -> list[str]:
        return [name for name, ok in self.checks.items() if not ok]

    def require_checks(self):
        failed = self.failed_checks()
        if failed:
            raise ExperimentCheckFailed(f"{self.name}: failed checks {failed}")


def write_report(report: Report, out_dir, dat=False) -> Path:
    """<out>/<name>/<table>.csv per table plus manifest.json."""
    from . import __version__

    folder = Path(out_dir) / report.name
    folder.mkdir(parents=True, exist_ok=True)
    for table_name, df in report.tables.items():
        df.to_csv(folder / f"{table_name}.csv", index=False)
        if dat:
            write_dat(df, folder / f"{table_name}.dat")

    write_json(
        {
            "name": report.name,
            "version": __version__,
            "config": report.config,
            "tables": sorted(report.tables),
            "checks": report.checks,
            "passed": report.passed,
        },
        folder / "manifest.json",
    )
    log(f"{report.name}: wrote {len(report.tables)} tables to {folder}", level=2)
    return folder
