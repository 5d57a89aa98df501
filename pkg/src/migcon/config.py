"""Flat key = value run configuration.

Format: one `key = value` per line, `#` starts a comment, blank lines
ignored.  Dotted prefixes group related keys (grid.*, motility.*, init.*,
dt.*, record.*, snapshots.*, output.*).  Numbers are parsed with float()
/ int(); list-valued keys (grid.lengths, grid.cells, init.u_center) take
comma-separated entries.

The canonical echo written into every run directory (config.echo) lists
all applicable keys in a fixed order with repr-formatted floats, so the
echo re-parses to a plan equal to the original, field for field.

Initial-data presets:
  homogeneous    u0 = init.u, v0 = init.v (both spatially constant)
  gaussian-bump  u0 = init.u_amp * exp(-|x - c|^2 / (2 init.u_width^2)),
                 c = init.u_center (domain midpoint when omitted),
                 v0 = init.v constant
  cosine         u0 = init.u constant,
                 v0 = init.v_base + init.v_amp * prod_i cos(pi x_i / L_i)
                 (the cosine product has zero normal slope on the walls)
  file           u0, v0 read from init.file, a snapshot in the run
                 directory binary format; the grid must match
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid
from .motility import FORMS, MotilitySpec, make_motility
from .scheme import DtPolicy, SimParams


class ConfigError(ValueError):
    """Malformed, inconsistent, or physically inadmissible configuration."""


V_FLOOR = 1e-14

_INIT_KINDS = ("homogeneous", "gaussian-bump", "cosine", "file")


@dataclass(frozen=True)
class RunConfig:
    dim: int
    lengths: tuple[float, ...]
    cells: tuple[int, ...]
    form: str
    alpha: float
    xi0: float
    eps: float
    init_kind: str
    init_u: float = 0.0
    init_v: float = 1.0
    init_u_amp: float = 1.0
    init_u_width: float = 0.1
    init_u_center: tuple[float, ...] | None = None
    init_v_base: float = 1.0
    init_v_amp: float = 0.0
    init_file: str = ""
    dt_kind: str = "fixed"
    dt_value: float = 1e-3
    dt_cap: float = 1e-2
    dt_cfl: float = 2.0
    t_end: float = 1.0
    record_every: int = 1
    snap_every: int | None = None
    outdir: str | None = None
    threads: int = 1

    def to_flat(self) -> list[tuple[str, str]]:
        """Canonical (key, value-text) pairs; only applicable keys appear."""
        def num(x):
            return repr(float(x))

        def nums(xs):
            return ", ".join(repr(float(x)) for x in xs)

        pairs = [
            ("grid.dim", str(self.dim)),
            ("grid.lengths", nums(self.lengths)),
            ("grid.cells", ", ".join(str(int(c)) for c in self.cells)),
            ("motility.form", self.form),
            ("motility.alpha", num(self.alpha)),
            ("motility.xi0", num(self.xi0)),
            ("eps", num(self.eps)),
            ("init.kind", self.init_kind),
        ]
        k = self.init_kind
        if k == "homogeneous":
            pairs += [("init.u", num(self.init_u)),
                      ("init.v", num(self.init_v))]
        elif k == "gaussian-bump":
            center = self.init_u_center
            if center is None:
                center = tuple(l / 2.0 for l in self.lengths)
            pairs += [("init.u_amp", num(self.init_u_amp)),
                      ("init.u_width", num(self.init_u_width)),
                      ("init.u_center", nums(center)),
                      ("init.v", num(self.init_v))]
        elif k == "cosine":
            pairs += [("init.u", num(self.init_u)),
                      ("init.v_base", num(self.init_v_base)),
                      ("init.v_amp", num(self.init_v_amp))]
        elif k == "file":
            pairs += [("init.file", self.init_file)]
        pairs.append(("dt.kind", self.dt_kind))
        if self.dt_kind == "fixed":
            pairs.append(("dt.value", num(self.dt_value)))
        else:
            pairs += [("dt.cap", num(self.dt_cap)),
                      ("dt.cfl", num(self.dt_cfl))]
        pairs += [
            ("t_end", num(self.t_end)),
            ("record.every", str(self.record_every)),
            ("snapshots.every",
             str(self.snap_every if self.snap_every is not None
                 else self.record_every)),
        ]
        if self.outdir is not None:
            pairs.append(("output.dir", self.outdir))
        pairs.append(("threads", str(self.threads)))
        return pairs

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_flat())


def to_text(config: RunConfig) -> str:
    return config.to_text()


def _strip_comment(line: str) -> str:
    # comment must open the line or follow whitespace, so a '#' glued to
    # a value (a filename, say) survives
    if line.lstrip().startswith("#"):
        return ""
    for i, ch in enumerate(line):
        if ch == "#" and i > 0 and line[i - 1] in " \t":
            return line[:i]
    return line


def parse_pairs(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', "
                              f"got {raw.strip()!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = val
    return out


class _Keys:
    """Typed, tracked access to the raw key/value map."""

    def __init__(self, pairs: dict[str, str]):
        self.pairs = pairs
        self.used: set[str] = set()

    def _get(self, key, default, required):
        if key in self.pairs:
            self.used.add(key)
            return self.pairs[key]
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default

    def text(self, key, default=None, required=False):
        return self._get(key, default, required)

    def real(self, key, default=None, required=False):
        raw = self._get(key, None, required)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw!r}")

    def integer(self, key, default=None, required=False):
        raw = self._get(key, None, required)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")

    def reals(self, key, count, required=False):
        raw = self._get(key, None, required)
        if raw is None:
            return None
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        try:
            vals = tuple(float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"{key}: expected numbers, got {raw!r}")
        if len(vals) != count:
            raise ConfigError(f"{key}: expected {count} entries, "
                              f"got {len(vals)}")
        return vals

    def integers(self, key, count, required=False):
        raw = self._get(key, None, required)
        if raw is None:
            return None
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        try:
            vals = tuple(int(p) for p in parts)
        except ValueError:
            raise ConfigError(f"{key}: expected integers, got {raw!r}")
        if len(vals) != count:
            raise ConfigError(f"{key}: expected {count} entries, "
                              f"got {len(vals)}")
        return vals


def parse_text(text: str) -> RunConfig:
    keys = _Keys(parse_pairs(text))
    dim = keys.integer("grid.dim", required=True)
    if dim not in (1, 2):
        raise ConfigError(f"grid.dim must be 1 or 2, got {dim}")
    lengths = keys.reals("grid.lengths", dim, required=True)
    cells = keys.integers("grid.cells", dim, required=True)

    form = keys.text("motility.form", default="prototype")
    if form not in FORMS:
        raise ConfigError(f"motility.form must be one of {FORMS}, "
                          f"got {form!r}")
    alpha = keys.real("motility.alpha", required=True)
    xi0 = keys.real("motility.xi0", default=1.0)
    eps = keys.real("eps", required=True)

    init_kind = keys.text("init.kind", required=True)
    if init_kind not in _INIT_KINDS:
        raise ConfigError(f"init.kind must be one of {_INIT_KINDS}, "
                          f"got {init_kind!r}")
    fields: dict = {}
    if init_kind == "homogeneous":
        fields["init_u"] = keys.real("init.u", required=True)
        fields["init_v"] = keys.real("init.v", required=True)
    elif init_kind == "gaussian-bump":
        fields["init_u_amp"] = keys.real("init.u_amp", required=True)
        fields["init_u_width"] = keys.real("init.u_width", required=True)
        center = keys.reals("init.u_center", dim)
        if center is None:
            center = tuple(l / 2.0 for l in lengths)
        fields["init_u_center"] = center
        fields["init_v"] = keys.real("init.v", required=True)
    elif init_kind == "cosine":
        fields["init_u"] = keys.real("init.u", required=True)
        fields["init_v_base"] = keys.real("init.v_base", required=True)
        fields["init_v_amp"] = keys.real("init.v_amp", required=True)
    else:
        fields["init_file"] = keys.text("init.file", required=True)

    dt_kind = keys.text("dt.kind", default="fixed")
    if dt_kind not in ("fixed", "adaptive"):
        raise ConfigError(f"dt.kind must be fixed or adaptive, "
                          f"got {dt_kind!r}")
    dt_value = keys.real("dt.value", default=1e-3)
    dt_cap = keys.real("dt.cap", default=1e-2)
    dt_cfl = keys.real("dt.cfl", default=2.0)
    t_end = keys.real("t_end", required=True)
    record_every = keys.integer("record.every", default=1)
    snap_every = keys.integer("snapshots.every", default=record_every)
    outdir = keys.text("output.dir", default=None)
    threads = keys.integer("threads", default=1)

    unused = set(keys.pairs) - keys.used
    if unused:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unused))}")

    cfg = RunConfig(dim=dim, lengths=lengths, cells=cells, form=form,
                    alpha=alpha, xi0=xi0, eps=eps, init_kind=init_kind,
                    dt_kind=dt_kind, dt_value=dt_value, dt_cap=dt_cap,
                    dt_cfl=dt_cfl, t_end=t_end, record_every=record_every,
                    snap_every=snap_every, outdir=outdir, threads=threads,
                    **fields)
    validate(cfg)
    return cfg


def parse_file(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return parse_text(text)


def validate(cfg: RunConfig) -> None:
    """Static admissibility checks; field-level checks live in the
    builders so file-loaded data gets the same treatment."""
    if any(not (l > 0.0) for l in cfg.lengths):
        raise ConfigError("grid.lengths must be positive")
    if any(c < 2 for c in cfg.cells):
        raise ConfigError("grid.cells must be at least 2 per axis")
    if not (cfg.alpha > 0.0):
        raise ConfigError("motility.alpha must be positive")
    if not (cfg.xi0 > 0.0):
        raise ConfigError("motility.xi0 must be positive")
    if not (0.0 <= cfg.eps <= 1.0):
        raise ConfigError("eps must lie in [0, 1]")
    if cfg.eps == 0.0 and cfg.alpha < 1.0:
        raise ConfigError("eps = 0 is admissible only for alpha >= 1")
    if not (cfg.t_end >= 0.0):
        raise ConfigError("t_end must be nonnegative")
    if cfg.dt_kind == "fixed" and not (cfg.dt_value > 0.0):
        raise ConfigError("dt.value must be positive")
    if cfg.dt_kind == "adaptive" and not (cfg.dt_cap > 0.0
                                          and cfg.dt_cfl > 0.0):
        raise ConfigError("dt.cap and dt.cfl must be positive")
    if cfg.record_every < 1:
        raise ConfigError("record.every must be at least 1")
    if cfg.snap_every is not None and cfg.snap_every < 1:
        raise ConfigError("snapshots.every must be at least 1")
    if cfg.threads < 1:
        raise ConfigError("threads must be at least 1")
    if cfg.init_kind == "homogeneous":
        if cfg.init_u < 0.0:
            raise ConfigError("init.u must be nonnegative")
    elif cfg.init_kind == "gaussian-bump":
        if cfg.init_u_amp < 0.0:
            raise ConfigError("init.u_amp must be nonnegative")
        if not (cfg.init_u_width > 0.0):
            raise ConfigError("init.u_width must be positive")
    elif cfg.init_kind == "cosine":
        if cfg.init_u < 0.0:
            raise ConfigError("init.u must be nonnegative")
        if cfg.init_v_amp < 0.0:
            raise ConfigError("init.v_amp must be nonnegative")


def build_grid(cfg: RunConfig) -> Grid:
    return Grid(lengths=cfg.lengths, cells=cfg.cells)


def build_motility(cfg: RunConfig) -> MotilitySpec:
    return make_motility(cfg.form, cfg.alpha, cfg.xi0)


def build_params(cfg: RunConfig) -> SimParams:
    dt = (DtPolicy(kind="fixed", value=cfg.dt_value)
          if cfg.dt_kind == "fixed"
          else DtPolicy(kind="adaptive", cap=cfg.dt_cap, cfl=cfg.dt_cfl))
    try:
        return SimParams(motility=build_motility(cfg), eps=cfg.eps, dt=dt,
                         t_end=cfg.t_end, record_every=cfg.record_every,
                         snap_every=cfg.snap_every)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _check_initial(u0: np.ndarray, v0: np.ndarray) -> None:
    if u0.min() < 0.0:
        raise ConfigError("initial u has negative entries; the density "
                          "must be nonnegative")
    if v0.min() < V_FLOOR:
        raise ConfigError(
            f"initial v violates the strict-positivity requirement: "
            f"min {v0.min():.3e} is below {V_FLOOR}; the consumed field "
            f"must be positive everywhere, including the boundary")


def build_initial(cfg: RunConfig, grid: Grid) -> tuple[Field, Field]:
    kind = cfg.init_kind
    if kind == "homogeneous":
        u0 = np.full(grid.shape, float(cfg.init_u))
        v0 = np.full(grid.shape, float(cfg.init_v))
    elif kind == "gaussian-bump":
        center = cfg.init_u_center
        if center is None:
            center = tuple(l / 2.0 for l in cfg.lengths)
        meshes = grid.meshes()
        r2 = sum((m - c) ** 2 for m, c in zip(meshes, center))
        u0 = cfg.init_u_amp * np.exp(-r2 / (2.0 * cfg.init_u_width ** 2))
        v0 = np.full(grid.shape, float(cfg.init_v))
    elif kind == "cosine":
        u0 = np.full(grid.shape, float(cfg.init_u))
        v0 = np.full(grid.shape, float(cfg.init_v_base))
        wave = np.ones(grid.shape)
        for axis, (m, L) in enumerate(zip(grid.meshes(), cfg.lengths)):
            wave = wave * np.cos(math.pi * m / L)
        v0 = v0 + cfg.init_v_amp * wave
    elif kind == "file":
        from .runio import read_fld
        try:
            u0, v0 = read_fld(cfg.init_file)
        except OSError as exc:
            raise ConfigError(f"cannot read init.file: {exc}")
        if u0.shape != grid.shape:
            raise ConfigError(
                f"init.file fields have shape {u0.shape}, grid expects "
                f"{grid.shape}")
    else:
        raise ConfigError(f"unknown init.kind {kind!r}")
    _check_initial(u0, v0)
    return Field(grid, u0), Field(grid, v0)
