"""Run configuration, provenance headers and atomic artifact writers."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .ingest import MissingFile, SchemaMismatch

COMMENT = "#"


@dataclass(frozen=True)
class RunConfig:
    snapshot_date: date
    threshold: float = 0.5
    seed: int = 42
    n_trees: int = 500
    min_samples_split: int = 8
    stratify: bool = True
    projects: str = ""
    versions: str = ""
    dependencies: str = ""
    out_dir: str = "out"
    threads: int = 1
    denylist: Optional[str] = None
    pdp_features: str = "top3"
    extra: dict = field(default_factory=dict)

    # outputs must not depend on where they are written or on parallelism
    _UNHASHED = ("out_dir", "threads")

    def semantic(self) -> dict:
        d = asdict(self)
        for k in self._UNHASHED:
            d.pop(k)
        d["snapshot_date"] = self.snapshot_date.isoformat()
        return d

    def to_json(self) -> dict:
        d = asdict(self)
        d["snapshot_date"] = self.snapshot_date.isoformat()
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "RunConfig":
        obj = dict(obj)
        obj["snapshot_date"] = date.fromisoformat(obj["snapshot_date"])
        return cls(**obj)


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def provenance(config: dict, seed: Optional[int]) -> dict:
    return {"config_hash": config_hash(config), "seed": seed}


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, obj: dict, prov: Optional[dict] = None) -> None:
    body = {"provenance": prov, **obj} if prov else obj
    atomic_write_text(path, json.dumps(body, indent=2, sort_keys=False, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, date):
        return o.isoformat()
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence] | Iterable[dict],
              prov: Optional[dict] = None) -> None:
    buf = io.StringIO()
    if prov:
        scalars = " ".join(f"{k}={v}" for k, v in prov.items() if not isinstance(v, (dict, list)))
        buf.write(f"{COMMENT} depstrat {scalars}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        vals = [row[h] for h in header] if isinstance(row, dict) else row
        w.writerow([_fmt(v) for v in vals])
    atomic_write_text(path, buf.getvalue())


def read_csv(path: Path, required: Sequence[str] = ()) -> list[dict[str, str]]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"missing input file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith(COMMENT)]
    reader = csv.DictReader(lines)
    missing = [c for c in required if c not in (reader.fieldnames or [])]
    if missing:
        raise SchemaMismatch(f"{path}: missing column(s) {missing}")
    return list(reader)


def read_json(path: Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"missing input file: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"{path}: invalid JSON ({exc})") from exc
