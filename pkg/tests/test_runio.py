"""Binary field format, series round-trips, run directory persistence."""

from __future__ import annotations

import os
import struct

import numpy as np
import pytest

from migcon import runio
from migcon.audits import standard_audits
from migcon.config import parse_text
from migcon.functionals import FunctionalSeries
from migcon.scheme import run

from .conftest import cfg_text, rng


def test_fld_round_trip_1d(tmp_path):
    gen = rng(3)
    u = gen.random(37)
    v = gen.random(37) + 0.5
    path = str(tmp_path / "a.fld")
    runio.write_fld(path, u, v)
    u2, v2 = runio.read_fld(path)
    assert np.array_equal(u, u2)
    assert np.array_equal(v, v2)


def test_fld_round_trip_2d(tmp_path):
    gen = rng(4)
    u = gen.random((6, 9))
    v = gen.random((6, 9)) + 0.5
    path = str(tmp_path / "b.fld")
    runio.write_fld(path, u, v)
    u2, v2 = runio.read_fld(path)
    assert u2.shape == (6, 9)
    assert np.array_equal(u, u2)
    assert np.array_equal(v, v2)


def test_fld_exact_byte_layout(tmp_path):
    u = np.array([1.0, 2.0])
    v = np.array([3.0, 4.0])
    path = str(tmp_path / "c.fld")
    runio.write_fld(path, u, v)
    blob = open(path, "rb").read()
    want = (b"DMS1" + struct.pack("<II", 1, 2)
            + u.astype("<f8").tobytes() + v.astype("<f8").tobytes())
    assert blob == want


def test_fld_rejects_bad_input(tmp_path):
    path = str(tmp_path / "d.fld")
    with pytest.raises(ValueError, match="share a shape"):
        runio.write_fld(path, np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError, match="1D or 2D"):
        runio.write_fld(path, np.zeros((2, 2, 2)), np.zeros((2, 2, 2)))

    runio.write_fld(path, np.zeros(3), np.zeros(3))
    blob = open(path, "rb").read()

    bad = str(tmp_path / "bad.fld")
    open(bad, "wb").write(b"XXXX" + blob[4:])
    with pytest.raises(ValueError, match="bad magic"):
        runio.read_fld(bad)

    open(bad, "wb").write(blob[:-8])
    with pytest.raises(ValueError, match="bytes"):
        runio.read_fld(bad)

    open(bad, "wb").write(blob[:4] + struct.pack("<I", 3) + blob[8:])
    with pytest.raises(ValueError, match="unsupported dim"):
        runio.read_fld(bad)


def test_series_round_trip_bitwise(tmp_path):
    series = FunctionalSeries(names=("mass_u", "entropy"),
                              meta={"alpha": 1.0})
    gen = rng(5)
    t = 0.0
    for _ in range(20):
        t += gen.random() + 1e-3
        series.append(t, {"mass_u": gen.random() * 1e3,
                          "entropy": gen.standard_normal()})
    path = str(tmp_path / "series.csv")
    runio.write_series(path, series)
    back = runio.read_series(path, meta={"alpha": 1.0})
    assert back.names == series.names
    assert np.array_equal(back.times_array(), series.times_array())
    for name in series.names:
        assert np.array_equal(back.column(name), series.column(name))


def test_series_read_errors(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("")
    with pytest.raises(ValueError, match="empty"):
        runio.read_series(str(p))
    p.write_text("x,mass\n0.0,1.0\n")
    with pytest.raises(ValueError, match="first column"):
        runio.read_series(str(p))
    p.write_text("t,mass\n0.0,1.0,9.9\n")
    with pytest.raises(ValueError, match="row width"):
        runio.read_series(str(p))


def test_meta_round_trip(tmp_path):
    path = str(tmp_path / "meta.txt")
    meta = {"alpha": 1.5, "steps": 200, "complete": True,
            "note": "warm", "eps": 0.01}
    runio.write_meta(path, meta)
    back = runio.read_meta(path)
    for k, v in meta.items():
        assert back[k] == v
    assert back["backend"] in ("compiled", "python")
    assert "version" in back


def test_rundir_round_trip(tmp_path):
    outdir = str(tmp_path / "run")
    cfg = parse_text(cfg_text(record__every="50", snapshots__every="100"))
    rec = run(cfg, outdir=outdir)
    back = runio.load_run(outdir)

    assert back.complete
    assert back.config_text == rec.config_text
    assert parse_text(back.config_text) == cfg
    assert back.series.names == rec.series.names
    assert np.array_equal(back.series.times_array(),
                          rec.series.times_array())
    for name in rec.series.names:
        assert np.array_equal(back.series.column(name),
                              rec.series.column(name))
    assert [(r.index, r.step, r.t) for r in back.snapshots] \
        == [(r.index, r.step, r.t) for r in rec.snapshots]
    for ref in rec.snapshots:
        u1, v1 = rec.snapshot(ref.index)
        u2, v2 = back.snapshot(ref.index)
        assert np.array_equal(np.asarray(u1), u2)
        assert np.array_equal(np.asarray(v1), v2)
    assert back.alpha == rec.alpha
    assert back.eps == rec.eps
    assert back.ubar0 == pytest.approx(rec.ubar0, rel=1e-15)
    assert back.meta["p_flux"] == rec.meta["p_flux"]


def test_rundir_layout(tmp_path):
    outdir = str(tmp_path / "run")
    cfg = parse_text(cfg_text(record__every="100"))
    run(cfg, outdir=outdir)
    for rel in ("config.echo", "series.csv", "meta.txt",
                "snapshots/index.csv", "snapshots/000000.fld"):
        assert os.path.exists(os.path.join(outdir, rel)), rel
    with open(os.path.join(outdir, "snapshots", "index.csv")) as fh:
        header = fh.readline().strip()
    assert header == "index,step,t"


def test_write_audit_reports(tmp_path):
    outdir = str(tmp_path / "run")
    cfg = parse_text(cfg_text(record__every="10"))
    rec = run(cfg, outdir=outdir)
    reports = standard_audits(rec)
    runio.write_audit_reports(outdir, reports)
    auditdir = os.path.join(outdir, "audit")
    names = {rep.name for rep in reports}
    assert "conservation" in names
    for name in names:
        path = os.path.join(auditdir, f"{name}.txt")
        assert os.path.exists(path)
        text = open(path).read()
        assert name in text
        assert "result: " in text
    res = os.path.join(auditdir, "residuals.csv")
    assert os.path.exists(res)
    with open(res) as fh:
        header = fh.readline().strip().split(",")
    assert header[0] == "t"
    assert len(header) > 1
