"""Per-realization result rows and their CSV/JSON persistence."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

COLUMNS = ("seed", "case", "epsilon_f", "phi", "symmetry_count", "gamma_ulp", "gamma_1e6",
           "delta_rc", "delta_tx", "mc_total", "status")


@dataclass
class ResultRecord:
    seed: int
    case: str
    epsilon_f: float | None
    phi: float
    symmetry_count: int | None = None
    gamma_ulp: int | None = None
    gamma_1e6: int | None = None
    delta_rc: float | None = None
    delta_tx: float | None = None
    mc_total: float | None = None
    status: str = "ok"
    # sort key within a sweep (grid index, realization); not persisted
    key: tuple = ()

    def __post_init__(self):
        if self.epsilon_f is not None and not 0.0 <= self.epsilon_f <= 1.0:
            raise ValueError(f"epsilon_f={self.epsilon_f} outside [0, 1]")
        if self.status not in ("ok", "unstable"):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == "unstable":
            self.gamma_ulp = self.gamma_1e6 = None
            self.delta_rc = self.delta_tx = self.mc_total = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def row(self) -> dict[str, str]:
        d = asdict(self)
        return {c: _fmt(d[c]) for c in COLUMNS}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def _parse(col: str, text: str):
    if text == "":
        return None
    if col in ("seed", "symmetry_count", "gamma_ulp", "gamma_1e6"):
        return int(text)
    if col in ("case", "status"):
        return text
    return float(text)


def records_to_csv(records: list[ResultRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def write_records(records: list[ResultRecord], path: str | Path, fmt: str = "csv") -> Path:
    path = Path(path)
    if fmt == "csv":
        path.write_text(records_to_csv(records))
    elif fmt == "json":
        path.write_text(json.dumps([r.row() for r in records], indent=1) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def read_records(path: str | Path) -> list[ResultRecord]:
    path = Path(path)
    if path.suffix == ".json":
        rows = json.loads(path.read_text())
    else:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    return [ResultRecord(**{c: _parse(c, row[c]) for c in COLUMNS}) for row in rows]


def log10_or_none(v: float | int | None) -> float | None:
    if v is None or v <= 0:
        return None
    return math.log10(v)
