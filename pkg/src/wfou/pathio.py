"""CSV/JSON persistence for sampled paths.

Each path is one CSV file with header ``t,value`` and a JSON sidecar with
the same stem holding ``seed``, ``sub_seed``, ``a``, ``b``, ``kind``,
``quadrature_order`` and ``jitter_used`` (plus ``theta`` and ``scheme``
for wfOU paths).  Floats are written with ``repr`` so they round-trip.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .wfbm import PathSample, TimeGrid


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(obj, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2, allow_nan=False, default=_plain)
        fh.write("\n")


def fmt(x) -> str:
    """CSV cell for an optional float."""
    return "" if x is None else repr(float(x))


def path_sidecar(path: PathSample) -> dict:
    meta = {
        "seed": int(path.seed),
        "sub_seed": None if path.sub_seed is None else int(path.sub_seed),
        "kind": path.kind,
        "index": int(path.index),
        "a": path.meta.get("a"),
        "b": path.meta.get("b"),
        "quadrature_order": path.meta.get("quadrature_order"),
        "jitter_used": path.meta.get("jitter_used"),
    }
    for key in ("theta", "scheme"):
        if key in path.meta:
            meta[key] = path.meta[key]
    return meta


def write_path(path: PathSample, directory, stem: str | None = None) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = stem or f"{path.kind}_{path.index:05d}"
    csv_path = directory / f"{stem}.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "value"])
        for t, v in zip(path.grid.points, path.values):
            w.writerow([repr(float(t)), repr(float(v))])
    json_path = directory / f"{stem}.json"
    dump_json(path_sidecar(path), json_path)
    return csv_path, json_path


def read_path(csv_path) -> PathSample:
    """Load a path CSV; the sidecar, if present, supplies seed and kind."""
    csv_path = Path(csv_path)
    with open(csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "value"]:
            raise ConfigError(f"{csv_path}: expected header 't,value', got {header!r}")
        try:
            rows = [(float(r[0]), float(r[1])) for r in reader if r]
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"{csv_path}: malformed row ({exc})") from None
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    grid = TimeGrid(arr[:, 0])

    sidecar = csv_path.with_suffix(".json")
    meta = {}
    if sidecar.exists():
        with open(sidecar, encoding="utf-8") as fh:
            meta = json.load(fh)
    return PathSample(
        grid, arr[:, 1],
        seed=int(meta.get("seed", 0)),
        kind=meta.get("kind", "wfou"),
        index=int(meta.get("index", 0)),
        sub_seed=meta.get("sub_seed"),
        meta={k: v for k, v in meta.items() if k not in ("seed", "kind", "index", "sub_seed")},
    )
