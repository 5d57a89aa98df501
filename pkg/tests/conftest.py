"""Shared helpers: config builders and small cached runs."""

from __future__ import annotations

import numpy as np
import pytest

from migcon import config as cfgmod
from migcon import scheme

BASE_1D = {
    "grid.dim": "1",
    "grid.lengths": "1.0",
    "grid.cells": "64",
    "motility.form": "prototype",
    "motility.alpha": "1.0",
    "motility.xi0": "1.0",
    "eps": "0.01",
    "init.kind": "gaussian-bump",
    "init.u_amp": "2.0",
    "init.u_width": "0.1",
    "init.v": "1.0",
    "dt.kind": "fixed",
    "dt.value": "1e-3",
    "t_end": "0.2",
    "record.every": "10",
}


def cfg_text(**overrides) -> str:
    """Config text from BASE_1D with dotted-key overrides (None removes).

    Changing init.kind drops the default init.* payload first, since the
    parser rejects keys the selected kind does not read.
    """
    pairs = dict(BASE_1D)
    if "init__kind" in overrides:
        for key in [k for k in pairs if k.startswith("init.")]:
            del pairs[key]
        pairs["init.kind"] = str(overrides.pop("init__kind"))
    for key, val in overrides.items():
        dotted = key.replace("__", ".")
        if val is None:
            pairs.pop(dotted, None)
        else:
            pairs[dotted] = str(val)
    return "\n".join(f"{k} = {v}" for k, v in pairs.items()) + "\n"


def run_text(text: str, outdir=None):
    return scheme.run(cfgmod.parse_text(text), outdir=outdir)


@pytest.fixture(scope="session")
def bump_run():
    """Generic smooth 1D run reused by read-only tests."""
    return run_text(cfg_text())


@pytest.fixture(scope="session")
def homogeneous_run():
    text = cfg_text(init__kind="homogeneous", init__u="1.0", init__v="1.0",
                    eps="0.1", t_end="0.5", record__every="5")
    return run_text(text)


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)
