"""Command-line entry point: ``kdv-balance <subcommand> [--config F] [--output D]``.

Every run writes its CSV tables plus ``manifest.json`` into the output
directory.  Exit status: 0 all checks passed, 1 a check failed, 2 the
configuration or the run itself failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__, thresholds
from .config import COMMANDS, config_from_dict, config_to_dict, load_document
from .dynamics import simulate
from .errors import ConfigError, KdVError
from .experiments import epsilon_sweep, invariant_drift
from .flow import ColumnKind, column_integral, column_slice
from .grid import l2_norm, norms, sobolev_norm
from .laws import conserved_integrals, residual, residual_closed_form

logger = logging.getLogger("kdvbalance")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_ERROR = 0, 1, 2


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


class _Run:
    """Accumulates tables and checks for one invocation."""

    def __init__(self, cfg, out: Path):
        self.cfg = cfg
        self.out = out
        self.tables: list[str] = []
        self.checks: list[dict] = []
        self.extra: dict = {}

    def table(self, name, header, rows):
        write_csv(self.out / name, header, rows)
        self.tables.append(name)

    def check(self, name, value, passed, threshold):
        self.checks.append(
            {"name": name, "value": value, "threshold": threshold, "passed": bool(passed)}
        )


def _cmd_simulate(run: _Run):
    cfg = run.cfg
    eta0 = cfg.profile.build(cfg.grid, cfg.params)
    traj = simulate(eta0, cfg.solver)
    x = cfg.grid.x
    rows = ((t, float(xi), float(v)) for t, s in zip(traj.times, traj.states)
            for xi, v in zip(x, s.values))
    run.table("trajectory.csv", ["t", "x", "eta"], rows)
    drift = invariant_drift(traj) if len(traj.times) > 1 else None
    run.table("invariants.csv", ["t", "m1", "m2", "m3"],
              ((t, *conserved_integrals(s)) for t, s in zip(traj.times, traj.states)))
    if drift is not None:
        for name, d in zip(("m1", "m2", "m3"), drift.max_rel_drift):
            run.check(f"drift_{name}", d, d <= thresholds.DRIFT_TOLERANCE,
                      thresholds.DRIFT_TOLERANCE)


def _cmd_verify(run: _Run):
    cfg = run.cfg
    eta = cfg.profile.build(cfg.grid, cfg.params)
    rows = []
    for law in cfg.laws:
        r = residual(law, eta, cfg.params)
        l2, linf = norms(r)
        closed = residual_closed_form(law, eta, cfg.params)
        closed_l2 = l2_norm(closed)
        diff = l2_norm(r - closed)
        if law.exact:
            rel = diff
            passed = l2 <= thresholds.EXACTNESS
            run.check(f"exact_{law.value}", l2, passed, thresholds.EXACTNESS)
        else:
            rel = diff / max(closed_l2, 1e-300)
            passed = rel <= thresholds.ORACLE_AGREEMENT
            run.check(f"oracle_{law.value}", rel, passed, thresholds.ORACLE_AGREEMENT)
        rows.append((law.value, law.exact, l2, linf, closed_l2, rel, passed))
    run.table(
        "identities.csv",
        ["law", "exact", "residual_l2", "residual_linf", "closed_form_l2", "oracle_diff", "passed"],
        rows,
    )


def _cmd_scan(run: _Run):
    cfg = run.cfg
    summary = {}
    for law in cfg.laws:
        res = epsilon_sweep(cfg.profile, law, cfg.eps_list, cfg.grid, mode=cfg.sweep_mode,
                            sample_times=cfg.sample_times, scheme=cfg.solver.scheme)
        name = f"balance_scan_{law.value}.csv"
        if cfg.sweep_mode == "analysis":
            run.table(name, ["eps", "residual_norm"], zip(res.eps_values, res.residual_norms))
        else:
            rows = ((e, t, v) for e, row in zip(res.eps_values, res.norms_by_time)
                    for t, v in zip(res.sample_times, row))
            run.table(name, ["eps", "t", "residual_norm"], rows)
        summary[law.value] = {
            "slope": res.slope, "r2": res.r2, "c_bound": res.c_bound,
            "slopes_by_time": list(res.slopes_by_time),
            "failed_eps": {fmt(k): v for k, v in res.errors.items()},
        }
        if res.errors:
            run.check(f"complete_{law.value}", len(res.errors), False, 0)
        if law.exact:
            worst = max(res.residual_norms, default=0.0)
            run.check(f"exact_{law.value}", worst, worst <= thresholds.EXACTNESS,
                      thresholds.EXACTNESS)
        else:
            lo, hi = thresholds.SLOPE_WINDOW
            slopes = [s for s in res.slopes_by_time] if cfg.sweep_mode == "dynamic" else [res.slope]
            for t, s in zip(res.sample_times, slopes):
                ok = s is not None and lo <= s <= hi
                label = f"slope_{law.value}" + (f"_t{fmt(t)}" if cfg.sweep_mode == "dynamic" else "")
                run.check(label, s, ok, [lo, hi])
    run.extra["sweeps"] = summary


def _z_label(z: float) -> str:
    return format(z, "g")


def _cmd_fields(run: _Run):
    cfg = run.cfg
    eta = cfg.profile.build(cfg.grid, cfg.params)
    x = cfg.grid.x
    exterior = {}
    for z in cfg.z_levels:
        sl = column_slice(eta, cfg.params, z)
        run.table(f"fields_z{_z_label(z)}.csv", ["x", "phi_x", "phi_z", "p_dyn"],
                  zip(x.tolist(), sl.phi_x.values.tolist(), sl.phi_z.values.tolist(),
                      sl.p_dyn.values.tolist()))
        exterior[_z_label(z)] = int(sl.exterior.sum())
        if z == 0:
            bed = float(abs(sl.phi_z.values).max())
            run.check("bed_impermeability", bed, bed == 0.0, 0.0)
    cols = [column_integral(kind, eta, cfg.params).values.tolist() for kind in ColumnKind]
    run.table("column_integrals.csv", ["x", *[k.value for k in ColumnKind]],
              zip(x.tolist(), *cols))
    run.extra["exterior_points"] = exterior


def _cmd_drift(run: _Run):
    cfg = run.cfg
    eta0 = cfg.profile.build(cfg.grid, cfg.params)
    traj = simulate(eta0, cfg.solver)
    if len(traj.times) < 2:
        raise ConfigError("drift needs t_end >= dt so that two snapshots exist", path="solver.t_end")
    rep = invariant_drift(traj)
    run.table("drift.csv", ["t", "m1", "m2", "m3"], zip(rep.times, rep.m1, rep.m2, rep.m3))
    run.extra["max_rel_drift"] = dict(zip(("m1", "m2", "m3"), rep.max_rel_drift))
    for name, d in zip(("m1", "m2", "m3"), rep.max_rel_drift):
        run.check(f"drift_{name}", d, d <= thresholds.DRIFT_TOLERANCE, thresholds.DRIFT_TOLERANCE)


HANDLERS = {
    "simulate": _cmd_simulate,
    "verify-identities": _cmd_verify,
    "balance-scan": _cmd_scan,
    "fields": _cmd_fields,
    "drift": _cmd_drift,
}


def run(cfg) -> int:
    """Execute one configured command and write its artifacts.

    The manifest is written even when the command fails part-way.
    """
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        logger.error("cannot create output directory %s: %s", out, exc)
        return EXIT_ERROR
    job = _Run(cfg, out)
    status, error = "error", None
    try:
        eta0 = cfg.profile.build(cfg.grid, cfg.params)
        job.extra["initial_sobolev"] = {f"H{k}": sobolev_norm(eta0, k) for k in range(7)}
        HANDLERS[cfg.command](job)
        status = "pass" if all(c["passed"] for c in job.checks) else "fail"
    except (KdVError, ValueError, OSError) as exc:
        error = f"{type(exc).__name__}: {exc}"
        logger.error("%s failed: %s", cfg.command, error)
    finally:
        manifest = {
            "tool": "kdvbalance",
            "version": __version__,
            "thresholds_version": thresholds.THRESHOLDS_VERSION,
            "command": cfg.command,
            "config": config_to_dict(cfg),
            "status": status,
            "partial": status == "error",
            "error": error,
            "tables": job.tables,
            "checks": job.checks,
            **job.extra,
        }
        try:
            (out / "manifest.json").write_text(
                json.dumps(manifest, indent=2, sort_keys=False) + "\n", encoding="utf-8"
            )
        except OSError as exc:
            logger.error("cannot write manifest: %s", exc)
            return EXIT_ERROR
    if status == "error":
        return EXIT_ERROR
    return EXIT_OK if status == "pass" else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdv-balance",
        description="KdV pseudospectral solver and balance-law verification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON run configuration")
        p.add_argument("--output", help="output directory (overrides output_dir)")
        p.add_argument("--quiet", action="store_true", help="only report errors")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.INFO,
        format="%(levelname)s: %(message)s",
    )
    try:
        doc = {}
        if args.config is not None:
            doc = load_document(args.config.read_text(encoding="utf-8"))
        if args.output:
            doc["output_dir"] = args.output
        cfg = config_from_dict(doc, command=args.command)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    code = run(cfg)
    if not args.quiet:
        print(f"{cfg.command}: {['pass', 'checks failed', 'error'][code]} "
              f"(artifacts in {cfg.output_dir})")
    return code


if __name__ == "__main__":
    sys.exit(main())
