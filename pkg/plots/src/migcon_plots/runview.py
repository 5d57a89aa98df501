"""Read-only access to a run directory.

Everything here parses the documented on-disk formats directly: flat
"key = value" text for config.echo and meta.txt, CSV with repr'd floats
for series.csv and the harness reports, and the .fld binary layout for
snapshots:

    bytes 0..3   magic b"DMS1"
    uint32       dim (1 or 2), little endian
    uint32 * dim cell counts per axis
    float64 *    u values, C order
    float64 *    v values, C order

Files are opened for reading only; a RunView never writes.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"DMS1"


class UsageError(ValueError):
    """Bad request against a valid on-disk layout (unknown channel,
    out-of-range snapshot, missing file)."""


def read_fld(path) -> tuple[np.ndarray, np.ndarray]:
    """Decode one snapshot file into (u, v) float64 arrays."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read snapshot: {exc}")
    if blob[:4] != MAGIC:
        raise UsageError(f"{path}: bad magic {blob[:4]!r}, "
                         f"expected {MAGIC!r}")
    (dim,) = struct.unpack_from("<I", blob, 4)
    if dim not in (1, 2):
        raise UsageError(f"{path}: unsupported dim {dim}")
    shape = struct.unpack_from(f"<{dim}I", blob, 8)
    off = 8 + 4 * dim
    n = int(np.prod(shape))
    need = off + 2 * 8 * n
    if len(blob) != need:
        raise UsageError(f"{path}: expected {need} bytes, got {len(blob)}")
    u = np.frombuffer(blob, dtype="<f8", count=n, offset=off)
    v = np.frombuffer(blob, dtype="<f8", count=n, offset=off + 8 * n)
    return (u.reshape(shape).astype(np.float64),
            v.reshape(shape).astype(np.float64))


def _parse_kv(text: str, label: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{label} line {lineno}: expected "
                             f"'key = value', got {raw.strip()!r}")
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def _read_text(path) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")


def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    lines = [ln.rstrip("\n") for ln in _read_text(path).splitlines()
             if ln.strip()]
    if not lines:
        raise UsageError(f"{path}: empty file")
    header = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise UsageError(f"{path}: row width {len(parts)} does not "
                             f"match header width {len(header)}")
        rows.append(parts)
    return header, rows


def read_report(path) -> dict[str, np.ndarray]:
    """Parse a harness report CSV into named float columns.

    Blank cells (the first sweep row has no pairwise differences yet)
    come back as nan.  Non-numeric columns stay out of the result.
    """
    header, rows = _read_csv(path)
    cols: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        vals = []
        for parts in rows:
            cell = parts[j].strip()
            if cell == "":
                vals.append(np.nan)
                continue
            try:
                vals.append(float(cell))
            except ValueError:
                vals = None
                break
        if vals is not None:
            cols[name] = np.asarray(vals, dtype=np.float64)
    if not cols:
        raise UsageError(f"{path}: no numeric columns")
    return cols


@dataclass(frozen=True)
class SnapshotEntry:
    index: int
    step: int
    t: float


@dataclass
class RunView:
    """Parsed series, snapshot index, and config echo of one run."""

    rundir: str
    config: dict[str, str]
    meta: dict[str, str]
    times: np.ndarray
    channels: dict[str, np.ndarray]
    snapshots: list[SnapshotEntry] = field(default_factory=list)

    @classmethod
    def load(cls, rundir) -> "RunView":
        rundir = str(rundir)
        if not os.path.isdir(rundir):
            raise UsageError(f"{rundir}: not a run directory")
        config = _parse_kv(
            _read_text(os.path.join(rundir, "config.echo")), "config.echo")

        meta_path = os.path.join(rundir, "meta.txt")
        meta = _parse_kv(_read_text(meta_path), "meta.txt") \
            if os.path.exists(meta_path) else {}

        header, rows = _read_csv(os.path.join(rundir, "series.csv"))
        if header[0] != "t":
            raise UsageError("series.csv: first column must be t")
        table = np.asarray([[float(c) for c in parts] for parts in rows],
                           dtype=np.float64).reshape(len(rows), len(header))
        times = table[:, 0]
        channels = {name: table[:, j + 1]
                    for j, name in enumerate(header[1:])}

        snapshots: list[SnapshotEntry] = []
        index_path = os.path.join(rundir, "snapshots", "index.csv")
        if os.path.exists(index_path):
            _, idx_rows = _read_csv(index_path)
            for parts in idx_rows:
                snapshots.append(SnapshotEntry(index=int(parts[0]),
                                               step=int(parts[1]),
                                               t=float(parts[2])))
        return cls(rundir=rundir, config=config, meta=meta, times=times,
                   channels=channels, snapshots=snapshots)

    @property
    def complete(self) -> bool:
        return self.meta.get("complete") == "true"

    @property
    def dim(self) -> int:
        return int(self.config["grid.dim"])

    @property
    def cells(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.config["grid.cells"].split(","))

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(float(x)
                     for x in self.config["grid.lengths"].split(","))

    def channel(self, name: str) -> np.ndarray:
        if name not in self.channels:
            avail = ", ".join(self.channels)
            raise UsageError(f"unknown channel {name!r}; "
                             f"available: {avail}")
        return self.channels[name]

    def snapshot(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        if not any(e.index == index for e in self.snapshots):
            hi = max((e.index for e in self.snapshots), default=-1)
            raise UsageError(f"snapshot index {index} out of range "
                             f"(run has indices 0..{hi})")
        u, v = read_fld(os.path.join(self.rundir, "snapshots",
                                     f"{index:06d}.fld"))
        want = self.cells
        if u.shape != want:
            raise UsageError(f"snapshot {index} shape {u.shape} does not "
                             f"match the grid spec {want}")
        return u, v
