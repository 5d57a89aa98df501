"""Fixtures that build real run directories through the simulator CLI.

The figure scripts consume run directories and report CSVs as files, so
the fixtures produce them the same way a user would: by invoking the
installed `migcon` command in a subprocess.  Nothing here imports the
simulator package.
"""

from __future__ import annotations

import shutil
import subprocess

import pytest

MIGCON = shutil.which("migcon")

BASE = """\
grid.dim = 1
grid.lengths = 1.0
grid.cells = 48
motility.form = prototype
motility.alpha = 0.5
motility.xi0 = 1.0
eps = 0.01
init.kind = gaussian-bump
init.u_amp = 2.0
init.u_width = 0.1
init.v = 1.0
dt.kind = fixed
dt.value = 1e-3
t_end = 0.06
record.every = 5
snapshots.every = 15
"""


def run_migcon(*args, cwd=None) -> subprocess.CompletedProcess:
    assert MIGCON, "the migcon command must be installed for these tests"
    return subprocess.run([MIGCON, *args], cwd=cwd, text=True,
                          capture_output=True)


def _simulate(tmp_path_factory, name: str, cfg_text: str) -> str:
    base = tmp_path_factory.mktemp(name)
    cfg = base / "run.cfg"
    cfg.write_text(cfg_text)
    out = base / "run"
    res = run_migcon("simulate", str(cfg), "-o", str(out))
    assert res.returncode == 0, res.stderr
    return str(out)


@pytest.fixture(scope="session")
def bump_dir(tmp_path_factory) -> str:
    """Sublinear 1D bump run; its series has every sublinear channel."""
    return _simulate(tmp_path_factory, "bump", BASE)


@pytest.fixture(scope="session")
def super_dir(tmp_path_factory) -> str:
    """Superlinear variant; the channel set drops the combined energy."""
    cfg = BASE.replace("motility.alpha = 0.5", "motility.alpha = 1.5")
    return _simulate(tmp_path_factory, "super", cfg)


@pytest.fixture(scope="session")
def homog_dir(tmp_path_factory) -> str:
    cfg = """\
grid.dim = 1
grid.lengths = 1.0
grid.cells = 16
motility.form = prototype
motility.alpha = 1.0
motility.xi0 = 1.0
eps = 0.1
init.kind = homogeneous
init.u = 1.0
init.v = 1.0
dt.kind = fixed
dt.value = 1e-3
t_end = 0.05
record.every = 5
snapshots.every = 10
"""
    return _simulate(tmp_path_factory, "homog", cfg)


@pytest.fixture(scope="session")
def grid2d_dir(tmp_path_factory) -> str:
    cfg = """\
grid.dim = 2
grid.lengths = 1.0, 1.0
grid.cells = 12, 12
motility.form = prototype
motility.alpha = 1.0
motility.xi0 = 1.0
eps = 0.01
init.kind = gaussian-bump
init.u_amp = 2.0
init.u_width = 0.15
init.v = 1.0
dt.kind = fixed
dt.value = 1e-3
t_end = 0.02
record.every = 5
snapshots.every = 10
"""
    return _simulate(tmp_path_factory, "grid2d", cfg)


SMALL = BASE.replace("grid.cells = 48", "grid.cells = 16") \
            .replace("t_end = 0.06", "t_end = 0.05")


@pytest.fixture(scope="session")
def sweep_dir(tmp_path_factory) -> str:
    base = tmp_path_factory.mktemp("sweep")
    cfg = base / "run.cfg"
    cfg.write_text(SMALL)
    out = base / "sweep"
    res = run_migcon("sweep", str(cfg), "--eps", "1e-2,1e-3,1e-4",
                     "-o", str(out))
    assert res.returncode == 0, res.stderr
    return str(out)


@pytest.fixture(scope="session")
def refine_dir(tmp_path_factory) -> str:
    base = tmp_path_factory.mktemp("refine")
    cfg = base / "run.cfg"
    cfg.write_text(SMALL)
    out = base / "refine"
    res = run_migcon("refine", str(cfg), "--mode", "space",
                     "--levels", "3", "-o", str(out))
    assert res.returncode == 0, res.stderr
    return str(out)
