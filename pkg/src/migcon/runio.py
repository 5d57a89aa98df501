"""Run directory persistence.

Layout written by a simulation:

    config.echo          canonical re-parseable copy of the run config
    series.csv           t plus one column per monitored channel
    snapshots/index.csv  index, step, t for every stored snapshot
    snapshots/NNNNNN.fld paired u, v fields in the binary format below
    audit/*.txt          one verdict file per audit check (written later)
    audit/residuals.csv  per-record-time residual table (written later)
    meta.txt             version, backend, thread count, wall time, flags

Snapshot binary format (.fld), fixed little-endian layout:

    bytes 0..3   magic b"DMS1"
    uint32       dim (1 or 2)
    uint32 * dim cell counts per axis
    float64 *    u values, C order
    float64 *    v values, C order

series.csv numbers are written with repr(), so parsing them back with
float() reproduces every bit.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from . import __version__
from .functionals import FunctionalSeries
from .grid import Grid
from .kernels import backend_name
from .records import RunRecord, SnapshotRef

MAGIC = b"DMS1"


def write_fld(path, u: np.ndarray, v: np.ndarray) -> None:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError("u and v must share a shape")
    if u.ndim not in (1, 2):
        raise ValueError("fields must be 1D or 2D")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", u.ndim))
        fh.write(struct.pack(f"<{u.ndim}I", *u.shape))
        fh.write(np.ascontiguousarray(u, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def read_fld(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ValueError(f"{path}: bad magic {blob[:4]!r}, "
                         f"expected {MAGIC!r}")
    (dim,) = struct.unpack_from("<I", blob, 4)
    if dim not in (1, 2):
        raise ValueError(f"{path}: unsupported dim {dim}")
    shape = struct.unpack_from(f"<{dim}I", blob, 8)
    off = 8 + 4 * dim
    n = int(np.prod(shape))
    need = off + 2 * 8 * n
    if len(blob) != need:
        raise ValueError(f"{path}: expected {need} bytes, got {len(blob)}")
    u = np.frombuffer(blob, dtype="<f8", count=n, offset=off)
    v = np.frombuffer(blob, dtype="<f8", count=n, offset=off + 8 * n)
    return (u.reshape(shape).astype(np.float64),
            v.reshape(shape).astype(np.float64))


def write_series(path, series: FunctionalSeries) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(("t",) + series.names) + "\n")
        for t, row in zip(series.times, series.rows):
            fh.write(",".join(repr(x) for x in (t,) + row) + "\n")


def read_series(path, meta: dict | None = None) -> FunctionalSeries:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty series file")
    header = lines[0].split(",")
    if header[0] != "t":
        raise ValueError(f"{path}: first column must be t")
    names = tuple(header[1:])
    series = FunctionalSeries(names=names, meta=dict(meta or {}))
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise ValueError(f"{path}: row width {len(parts)} does not "
                             f"match header width {len(header)}")
        vals = [float(p) for p in parts]
        series.append(vals[0], dict(zip(names, vals[1:])))
    return series


def _write_kv(path, pairs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in pairs:
            fh.write(f"{k} = {v}\n")


def _fmt_meta(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_meta(path, meta: dict) -> None:
    pairs = [("version", __version__), ("backend", backend_name())]
    for k in sorted(meta):
        pairs.append((k, _fmt_meta(meta[k])))
    _write_kv(path, pairs)


def read_meta(path) -> dict:
    from .config import parse_pairs
    with open(path, "r", encoding="utf-8") as fh:
        raw = parse_pairs(fh.read())
    out: dict = {}
    for k, v in raw.items():
        if v in ("true", "false"):
            out[k] = v == "true"
            continue
        try:
            out[k] = int(v)
        except ValueError:
            try:
                out[k] = float(v)
            except ValueError:
                out[k] = v
    return out


def snapshot_path(rundir, index: int) -> str:
    return os.path.join(rundir, "snapshots", f"{index:06d}.fld")


class RunDirWriter:
    """Incremental writer used by the simulation loop.

    Snapshots stream to disk as they are taken, so a failed run still
    leaves everything recorded up to the failure; finalize() flushes the
    series, the snapshot index, and meta.txt.
    """

    def __init__(self, outdir, config):
        self.outdir = str(outdir)
        os.makedirs(self.outdir, exist_ok=True)
        os.makedirs(os.path.join(self.outdir, "snapshots"), exist_ok=True)
        os.makedirs(os.path.join(self.outdir, "audit"), exist_ok=True)
        with open(os.path.join(self.outdir, "config.echo"), "w",
                  encoding="utf-8") as fh:
            fh.write(config.to_text())
        self.refs: list[SnapshotRef] = []

    def add_snapshot(self, ref: SnapshotRef, u: np.ndarray,
                     v: np.ndarray) -> None:
        write_fld(snapshot_path(self.outdir, ref.index), u, v)
        self.refs.append(ref)

    def finalize(self, series: FunctionalSeries, meta: dict):
        write_series(os.path.join(self.outdir, "series.csv"), series)
        with open(os.path.join(self.outdir, "snapshots", "index.csv"),
                  "w", encoding="utf-8") as fh:
            fh.write("index,step,t\n")
            for ref in self.refs:
                fh.write(f"{ref.index},{ref.step},{repr(ref.t)}\n")
        write_meta(os.path.join(self.outdir, "meta.txt"), meta)
        outdir = self.outdir

        def loader(index: int) -> tuple[np.ndarray, np.ndarray]:
            return read_fld(snapshot_path(outdir, index))

        return loader


def write_audit_reports(rundir, reports) -> None:
    """One verdict file per check plus a shared residual table.

    reports: iterable of AuditReport (see migcon.audits).
    """
    auditdir = os.path.join(rundir, "audit")
    os.makedirs(auditdir, exist_ok=True)
    residual_cols: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for rep in reports:
        path = os.path.join(auditdir, f"{rep.name}.txt")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(rep.render())
        for label, (times, values) in rep.residual_series.items():
            residual_cols[f"{rep.name}.{label}"] = (times, values)
    if residual_cols:
        _write_residuals(os.path.join(auditdir, "residuals.csv"),
                         residual_cols)


def _write_residuals(path, cols: dict) -> None:
    # columns may live on different time axes; rows are the union of the
    # time stamps, missing entries left blank
    axes = [np.asarray(t) for t, _ in cols.values()]
    allt = np.unique(np.concatenate(axes)) if axes else np.array([])
    names = sorted(cols)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(["t"] + names) + "\n")
        for t in allt:
            row = [repr(float(t))]
            for name in names:
                times, values = cols[name]
                idx = np.nonzero(np.asarray(times) == t)[0]
                row.append(repr(float(np.asarray(values)[idx[0]]))
                           if idx.size else "")
            fh.write(",".join(row) + "\n")


def load_run(rundir) -> RunRecord:
    """Reconstruct a RunRecord from a persisted run directory."""
    from . import config as cfgmod

    rundir = str(rundir)
    cfg_path = os.path.join(rundir, "config.echo")
    with open(cfg_path, "r", encoding="utf-8") as fh:
        config_text = fh.read()
    cfg = cfgmod.parse_text(config_text)
    grid = Grid(lengths=cfg.lengths, cells=cfg.cells)
    meta = read_meta(os.path.join(rundir, "meta.txt"))
    series_meta = {k: meta[k] for k in ("alpha", "eps", "ubar0", "p_flux")
                   if k in meta}
    series = read_series(os.path.join(rundir, "series.csv"),
                         meta=series_meta)
    refs: list[SnapshotRef] = []
    index_path = os.path.join(rundir, "snapshots", "index.csv")
    with open(index_path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    for ln in lines[1:]:
        idx_s, step_s, t_s = ln.split(",")
        refs.append(SnapshotRef(index=int(idx_s), step=int(step_s),
                                t=float(t_s)))

    def loader(index: int) -> tuple[np.ndarray, np.ndarray]:
        return read_fld(snapshot_path(rundir, index))

    return RunRecord(grid=grid, series=series, snapshots=refs,
                     loader=loader, complete=bool(meta.get("complete")),
                     meta=meta, config_text=config_text)
