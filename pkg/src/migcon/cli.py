"""Command line entry point.

Commands: simulate, audit, check-motility, sweep, refine, alpha-scan.
Exit codes are a stable contract: 0 success, 1 usage or configuration
error, 2 numerical failure (solver breakdown or a failing audit/check).
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import ConfigError, parse_file
from .grid import SolverFailure

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


def _outdir_for(cfg, args, required=True) -> str | None:
    out = getattr(args, "outdir", None) or cfg.outdir
    if not out and required:
        raise ConfigError("no output directory: set output.dir in the "
                          "config or pass --outdir")
    return out


def cmd_simulate(args) -> int:
    from .scheme import run
    try:
        cfg = parse_file(args.config)
        outdir = _outdir_for(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        rec = run(cfg, outdir=outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        print(f"partial run directory left in {outdir}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"run complete: t = {rec.meta['final_t']!r}, "
          f"{rec.meta['steps']} steps, "
          f"wall {rec.meta['wall_s']:.2f} s, -> {outdir}")
    return EXIT_OK


def cmd_audit(args) -> int:
    from .audits import standard_audits
    from .runio import load_run, write_audit_reports
    try:
        rec = load_run(args.rundir)
    except (OSError, ValueError) as exc:
        print(f"cannot load run directory: {exc}", file=sys.stderr)
        return EXIT_USAGE
    reports = standard_audits(rec)
    write_audit_reports(args.rundir, reports)
    all_ok = True
    for rep in reports:
        for chk in rep.checks:
            ok = chk.ok()
            all_ok = all_ok and ok
            print(f"{rep.name}/{chk.name}: {chk.verdict}")
    print("audit result:", "pass" if all_ok else "FAIL")
    return EXIT_OK if all_ok else EXIT_NUMERICAL


def cmd_check_motility(args) -> int:
    from .config import build_motility
    from .motility import validate_hypotheses, verify_small_xi_bound
    try:
        cfg = parse_file(args.config)
        spec = build_motility(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = validate_hypotheses(spec)
    for name, chk in report.checks.items():
        line = f"{name}: {chk.verdict}"
        if chk.verdict != "pass" and chk.witness_xi is not None:
            line += (f"  (witness xi = {chk.witness_xi!r}, "
                     f"value = {chk.witness_value!r})")
        if chk.note:
            line += f"  [{chk.note}]"
        print(line)
    print(f"lower-power ratio min: {report.lower_ratio_min!r}")
    print(f"upper-slope sup:       {report.upper_slope_sup!r}")
    if 0.0 < spec.alpha < 1.0:
        bound = verify_small_xi_bound(spec, xi_star=spec.xi0)
        flag = "divergent" if bound.divergent else (
            "stable" if bound.stable else "unsettled")
        print(f"small-xi bound: sup = {bound.c_emp!r} ({flag})")
        if bound.divergent:
            return EXIT_NUMERICAL
    else:
        print("small-xi bound: skipped (applies to exponents below 1)")
    return EXIT_OK if report.all_pass else EXIT_NUMERICAL


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}")


def cmd_sweep(args) -> int:
    from .harness import eps_sweep
    try:
        cfg = parse_file(args.config)
        outdir = _outdir_for(cfg, args, required=False)
        eps_values = _parse_floats(args.eps)
        rep = eps_sweep(cfg, eps_values, outdir=outdir)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print("eps        budget(T)")
    for e, b in zip(rep.eps_values, rep.budgets):
        print(f"{e:<10g} {b!r}")
    print("pairwise |du|_L1:", ", ".join(repr(x) for x in rep.du_l1))
    print("pairwise |dv|_L1:", ", ".join(repr(x) for x in rep.dv_l1))
    ok = rep.budgets_decreasing_toward_one()
    print("budget trajectory decreasing toward 1:", "yes" if ok else "NO")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_refine(args) -> int:
    from .harness import refinement_study
    try:
        cfg = parse_file(args.config)
        outdir = _outdir_for(cfg, args, required=False)
        rep = refinement_study(cfg, levels=args.levels, mode=args.mode,
                               outdir=outdir)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"mode: {rep.mode}")
    for i in range(len(rep.err_u)):
        print(f"level {i}: h = {rep.hs[i]!r}, dt = {rep.dts[i]!r}, "
              f"err_u = {rep.err_u[i]!r}, err_v = {rep.err_v[i]!r}")
    print(f"observed order: u {rep.order_u:.3f}, v {rep.order_v:.3f}")
    return EXIT_OK


def cmd_alpha_scan(args) -> int:
    from .harness import alpha_scan
    try:
        cfg = parse_file(args.config)
        outdir = _outdir_for(cfg, args, required=False)
        alphas = _parse_floats(args.alphas) if args.alphas else \
            (0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
        rep = alpha_scan(cfg, alphas, outdir=outdir)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print("alpha   p_flux  plateau       budget(T)")
    for row in rep.rows:
        print(f"{row['alpha']:<7g} {row['p_flux']:<7.4g} "
              f"{row['plateau']:<13} {row['budget_final']!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="migcon",
        description="Structure-preserving simulator and audit engine for "
                    "the degenerate migration-consumption system")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a configured simulation")
    p.add_argument("config")
    p.add_argument("-o", "--outdir", default=None)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("audit", help="audit a finished run directory")
    p.add_argument("rundir")
    p.set_defaults(fn=cmd_audit)

    p = sub.add_parser("check-motility",
                       help="validate the configured motility law")
    p.add_argument("config")
    p.set_defaults(fn=cmd_check_motility)

    p = sub.add_parser("sweep", help="rerun a plan at decreasing eps")
    p.add_argument("config")
    p.add_argument("-o", "--outdir", default=None)
    p.add_argument("--eps", required=True,
                   help="comma-separated decreasing eps values")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("refine", help="dyadic refinement study")
    p.add_argument("config")
    p.add_argument("-o", "--outdir", default=None)
    p.add_argument("--mode", choices=("space", "time"), default="space")
    p.add_argument("--levels", type=int, default=3)
    p.set_defaults(fn=cmd_refine)

    p = sub.add_parser("alpha-scan",
                       help="run identical data across exponents")
    p.add_argument("config")
    p.add_argument("-o", "--outdir", default=None)
    p.add_argument("--alphas", default=None,
                   help="comma-separated exponent list")
    p.set_defaults(fn=cmd_alpha_scan)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; remap to the usage code
        code = exc.code if isinstance(exc.code, int) else 0
        return EXIT_USAGE if code != 0 else EXIT_OK
    return args.fn(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
