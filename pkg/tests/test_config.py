"""Config parsing, echo round-trip, validation, initial-data builders."""

from __future__ import annotations

import os

import numpy as np
import pytest

from migcon import config as cfgmod
from migcon import runio
from migcon.config import ConfigError, parse_file, parse_text, to_text

from .conftest import cfg_text


def test_round_trip_identity_all_kinds():
    variants = [
        cfg_text(),
        cfg_text(init__kind="homogeneous", init__u="0.5", init__v="1.2"),
        cfg_text(init__kind="cosine", init__u="1.0", init__v_base="1.0",
                 init__v_amp="0.25"),
        cfg_text(grid__dim="2", grid__lengths="1.0, 2.0",
                 grid__cells="8, 12"),
        cfg_text(dt__kind="adaptive", dt__cap="5e-3", dt__cfl="1.5"),
        cfg_text(snapshots__every="40", record__every="20",
                 output__dir="some/dir", threads="2"),
    ]
    for text in variants:
        cfg = parse_text(text)
        assert parse_text(to_text(cfg)) == cfg


def test_defaults_resolved_at_parse():
    cfg = parse_text(cfg_text())
    assert cfg.init_u_center == (0.5,)      # domain midpoint
    assert cfg.snap_every == cfg.record_every
    assert cfg.xi0 == 1.0
    assert cfg.dt_kind == "fixed"
    assert cfg.threads == 1


def test_comments_and_blank_lines():
    text = cfg_text() + "\n# trailing comment\n\n"
    text = text.replace("t_end = 0.2", "t_end = 0.2   # horizon")
    assert parse_text(text).t_end == 0.2


def test_parse_errors():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_text(cfg_text() + "t_end = 0.3\n")
    with pytest.raises(ConfigError, match="key = value"):
        parse_text(cfg_text() + "not a pair\n")
    with pytest.raises(ConfigError, match="unknown keys"):
        parse_text(cfg_text() + "grid.spacing = 0.1\n")
    with pytest.raises(ConfigError, match="missing required"):
        parse_text(cfg_text(t_end=None))
    with pytest.raises(ConfigError, match="expected a number"):
        parse_text(cfg_text(t_end="soon"))
    with pytest.raises(ConfigError, match="grid.dim"):
        parse_text(cfg_text(grid__dim="3"))
    with pytest.raises(ConfigError, match="entries"):
        parse_text(cfg_text(grid__dim="2", grid__cells="8"))


def test_validation_errors():
    with pytest.raises(ConfigError):
        parse_text(cfg_text(motility__alpha="0.0"))
    with pytest.raises(ConfigError):
        parse_text(cfg_text(grid__cells="1"))
    with pytest.raises(ConfigError):
        parse_text(cfg_text(eps="1.5"))
    with pytest.raises(ConfigError):
        parse_text(cfg_text(eps="-0.1"))
    # vanishing regularization needs alpha at least 1
    with pytest.raises(ConfigError):
        parse_text(cfg_text(eps="0.0", motility__alpha="0.5"))
    parse_text(cfg_text(eps="0.0", motility__alpha="1.0"))
    with pytest.raises(ConfigError):
        parse_text(cfg_text(record__every="0"))
    with pytest.raises(ConfigError):
        parse_text(cfg_text(t_end="-1.0"))
    with pytest.raises(ConfigError, match="form"):
        parse_text(cfg_text(motility__form="cubic"))


def test_strict_positivity_of_v_preset():
    text = cfg_text(init__kind="homogeneous", init__u="1.0", init__v="0.0")
    with pytest.raises(ConfigError, match="strict-positivity"):
        cfg = parse_text(text)
        grid = cfgmod.build_grid(cfg)
        cfgmod.build_initial(cfg, grid)


def test_negative_u_preset_rejected():
    with pytest.raises(ConfigError):
        parse_text(cfg_text(init__kind="homogeneous", init__u="-1.0",
                            init__v="1.0"))


def test_build_initial_gaussian():
    cfg = parse_text(cfg_text(grid__cells="128"))
    grid = cfgmod.build_grid(cfg)
    u0, v0 = cfgmod.build_initial(cfg, grid)
    x = grid.centers(0)
    peak = np.argmax(u0.values)
    assert abs(x[peak] - 0.5) <= grid.h[0]
    assert u0.values.max() == pytest.approx(2.0, rel=1e-2)
    assert np.all(v0.values == 1.0)


def test_build_initial_cosine_2d():
    cfg = parse_text(cfg_text(
        grid__dim="2", grid__lengths="1.0, 2.0", grid__cells="8, 10",
        init__kind="cosine", init__u="0.5", init__v_base="1.0",
        init__v_amp="0.25"))
    grid = cfgmod.build_grid(cfg)
    u0, v0 = cfgmod.build_initial(cfg, grid)
    xm, ym = grid.meshes()
    want = 1.0 + 0.25 * np.cos(np.pi * xm / 1.0) * np.cos(np.pi * ym / 2.0)
    assert np.allclose(v0.values, want, rtol=1e-13)
    assert np.all(u0.values == 0.5)


def test_build_initial_from_file(tmp_path):
    grid_cfg = parse_text(cfg_text(grid__cells="32"))
    grid = cfgmod.build_grid(grid_cfg)
    u = np.linspace(0.0, 1.0, 32)
    v = np.linspace(1.0, 2.0, 32)
    path = tmp_path / "state.fld"
    runio.write_fld(str(path), u, v)
    cfg = parse_text(cfg_text(init__kind="file", init__file=str(path)))
    u0, v0 = cfgmod.build_initial(cfg, grid)
    assert np.array_equal(u0.values, u)
    assert np.array_equal(v0.values, v)
    # shape mismatch is a config error
    small = cfgmod.build_grid(parse_text(cfg_text(grid__cells="16")))
    with pytest.raises(ConfigError):
        cfgmod.build_initial(cfg, small)


def test_parse_file_missing(tmp_path):
    with pytest.raises(ConfigError):
        parse_file(str(tmp_path / "nope.cfg"))
    p = tmp_path / "run.cfg"
    p.write_text(cfg_text())
    assert parse_file(str(p)) == parse_text(cfg_text())


def test_to_text_is_parseable_echo():
    cfg = parse_text(cfg_text())
    echo = to_text(cfg)
    assert "grid.dim = 1" in echo
    # floats echo in full precision
    cfg2 = parse_text(cfg_text(dt__value=repr(1.0 / 3.0)))
    assert parse_text(to_text(cfg2)).dt_value == 1.0 / 3.0
