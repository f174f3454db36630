"""Command line front end: ``pinto-sim <subcommand> ...``.

Every table is written as CSV with a fixed column order; every SVG figure
is accompanied by the CSV holding exactly the plotted numbers.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import (METRICS, ExperimentConfig, config_to_dict, load_config, parse_config,
                     set_key)
from .errors import ConfigError, PintoSimError
from .jumpdyn import LIFTOFF, compare_modes, simulate_jump
from .lamsa import ActuationMode
from .linkage import workspace_sample
from .scaling import ScalingModel, scaled_height
from .spring import buckling_angle, torque_curve, torque_variation
from .svgplot import Series, bar_plot, line_plot

__all__ = ["main", "run_command", "build_parser"]

TRACE_COLUMNS = ("t_s", "y_m", "v_mps", "phi_in_rad", "phi_out_rad", "grf_N", "duty",
                 "current_A", "dc_power_W", "spring_energy_J", "event", "tension_N",
                 "theta_m_rad", "omega_m_radps", "energy_residual_J")
COMPARE_COLUMNS = ("mode", "outcome", "energy_J", "time_ms", "avg_dc_power_W", "loading_ms",
                   "apex_m")
SUMMARY_FIELDS = ("mode", "outcome", "takeoff_energy", "propulsion_time", "loading_time",
                  "apex_height", "liftoff_time", "liftoff_velocity", "release_time",
                  "avg_dc_power", "electrical_energy", "motor_work", "energy_residual")

# shorthand sweep keys
SWEEP_ALIASES = {
    "release_angle": "robot.latch.release_angle_rad",
    "mass": "robot.mass_kg",
    "i_max": "robot.motor.i_max_a",
}


def _num(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(v) for v in r])
    return buf.getvalue()


def _write(path: Path, text: str):
    """Write via a temporary file so readers never see a partial file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _experiment(path) -> ExperimentConfig:
    return load_config(path) if path else parse_config({})


# -- subcommands -------------------------------------------------------------

def cmd_spring_curve(args):
    cfg = _experiment(args.config)
    template = cfg.robot.springs[0]
    curves = torque_curve(template, args.ratios, args.points)
    phi_b = buckling_angle(template)
    out = Path(args.out)
    rows = [(c.ratio, p, t) for c in curves for p, t in zip(c.phi, c.torque)]
    _write(out / "spring_curve.csv", _csv_text(("ratio", "phi_rad", "torque_Nm"), rows))
    flat = [(c.ratio, torque_variation(c, phi_b)) for c in curves]
    _write(out / "spring_flatness.csv", _csv_text(("ratio", "torque_cov"), flat))
    if cfg.output.svg and not args.no_svg:
        series = [Series(f"R = {c.ratio:g}", c.phi, c.torque) for c in curves]
        _write(out / "spring_curve.svg", line_plot(series, "Spring torque vs link angle",
                                                   "phi (rad)", "torque (N m)"))
    for r, cov in flat:
        print(f"R={r:g} torque CoV={cov:.4f}")
    return 0


def cmd_workspace(args):
    cfg = _experiment(args.config)
    ws = workspace_sample(cfg.robot.leg, args.grid)
    out = Path(args.out)
    rows = [(p[0], p[1], "reachable") for p in ws.points]
    rows += [(p[0], p[1], "coop_same") for p in ws.coop_same]
    rows += [(p[0], p[1], "coop_opposite") for p in ws.coop_opposite]
    _write(out / "workspace.csv", _csv_text(("x_m", "y_m", "tag"), rows))
    if cfg.output.svg and not args.no_svg:
        series = [Series("reachable", ws.points[:, 0], ws.points[:, 1], points=True),
                  Series("coop_same (pitch)", ws.coop_same[:, 0], ws.coop_same[:, 1]),
                  Series("coop_opposite (extension)", ws.coop_opposite[:, 0],
                         ws.coop_opposite[:, 1])]
        _write(out / "workspace.svg", line_plot(series, "Foot workspace", "x (m)", "y (m)",
                                                equal_aspect=True))
    print(f"{len(ws.points)} reachable points")
    return 0


def _summary_rows(res):
    rows = []
    for name in SUMMARY_FIELDS:
        v = getattr(res, name)
        rows.append((name, v.value if isinstance(v, ActuationMode) else v))
    return rows


def cmd_jump(args):
    cfg = _experiment(args.config)
    robot = cfg.robot.with_mode(args.mode) if args.mode else cfg.robot
    res = simulate_jump(robot)
    out = Path(args.out)
    tr = res.traces
    rows = zip(*(tr[c] for c in TRACE_COLUMNS))
    _write(out / "trace.csv", _csv_text(TRACE_COLUMNS, rows))
    _write(out / "events.csv", _csv_text(("t_s", "event"), res.events))
    _write(out / "summary.csv", _csv_text(("quantity", "value"), _summary_rows(res)))
    if cfg.output.svg and not args.no_svg:
        t_ms = tr["t_s"] * 1e3
        _write(out / "jump_height.svg", line_plot(
            [Series("hip height", t_ms, tr["y_m"])], f"{robot.mode.value}: hip height",
            "t (ms)", "y (m)"))
        _write(out / "jump_forces.svg", line_plot(
            [Series("ground force", t_ms, tr["grf_N"]), Series("string tension / 10", t_ms,
                                                               tr["tension_N"] / 10.0)],
            f"{robot.mode.value}: forces", "t (ms)", "force (N)"))
    if res.outcome == LIFTOFF:
        print(f"{robot.mode.value}: liftoff, E={res.takeoff_energy:.4f} J, "
              f"t={res.propulsion_time * 1e3:.1f} ms, P={res.avg_dc_power:.1f} W")
    else:
        print(f"{robot.mode.value}: no liftoff within {robot.t_max:g} s")
    return 0


def cmd_compare(args):
    cfg = _experiment(args.config)
    rows = compare_modes(cfg.robot)
    out = Path(args.out)
    _write(out / "compare.csv", _csv_text(COMPARE_COLUMNS,
                                           [[r[c] for c in COMPARE_COLUMNS] for r in rows]))
    if cfg.output.svg and not args.no_svg:
        labels = [r["mode"] for r in rows]
        _write(out / "compare_energy.svg", bar_plot(labels, [r["energy_J"] for r in rows],
                                                    "Takeoff energy", "energy (J)"))
        _write(out / "compare_time.svg", bar_plot(labels, [r["time_ms"] for r in rows],
                                                  "Propulsion time", "time (ms)"))
        _write(out / "compare_power.svg", bar_plot(labels, [r["avg_dc_power_W"] for r in rows],
                                                   "Average DC power", "power (W)"))
    for r in rows:
        print(f"{r['mode']:>5}: {r['outcome']}, E={r['energy_J']:.4f} J, "
              f"t={r['time_ms']:.1f} ms, P={r['avg_dc_power_W']:.1f} W")
    return 0


def cmd_scaling(args):
    model = ScalingModel(alpha=args.alpha)
    rows = [(s, args.alpha, scaled_height(model, s)) for s in args.scales]
    text = _csv_text(("scale", "alpha", "height_m"), rows)
    if args.out:
        _write(Path(args.out) / "scaling.csv", text)
        if not args.no_svg:
            _write(Path(args.out) / "scaling.svg", line_plot(
                [Series(f"alpha = {args.alpha:g}", [r[0] for r in rows], [r[2] for r in rows])],
                "Jump height vs scale", "scale", "height (m)"))
    sys.stdout.write(text)
    return 0


def _apply(doc, key, value):
    if key == "robot.spring_ratio":
        # output arm length as a multiple of the input arm, for every pack
        doc = json.loads(json.dumps(doc))
        for spring in doc["robot"]["springs"]:
            spring["L2_m"] = value * spring["L1_m"]
        return doc
    return set_key(doc, key, value)


def _sweep_one(job):
    doc, key, value, metric = job
    try:
        cfg = parse_config(_apply(doc, key, value))
        res = simulate_jump(cfg.robot)
        m = getattr(res, metric) if res.outcome == LIFTOFF else float("nan")
        return (value, res.outcome, m, "")
    except PintoSimError as e:
        return (value, "error", float("nan"), str(e))


def _workers():
    raw = os.environ.get("PINTO_SIM_THREADS", "")
    if raw.strip() == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"PINTO_SIM_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("PINTO_SIM_THREADS must be non-negative")
    return n


def cmd_sweep(args):
    cfg = _experiment(args.config)
    doc = config_to_dict(cfg)
    key = SWEEP_ALIASES.get(args.param or cfg.sweep.param, args.param or cfg.sweep.param)
    if not key:
        raise ConfigError("sweep needs --param or sweep.param in the config")
    if not key.startswith("robot."):
        key = "robot." + key
    values = args.values if args.values is not None else list(cfg.sweep.values)
    if not values:
        raise ConfigError("sweep needs --values or sweep.values in the config")
    metric = args.metric or cfg.sweep.metric
    parse_config(_apply(doc, key, values[0]))  # reject bad keys before spawning work
    jobs = [(doc, key, v, metric) for v in values]
    n = min(_workers(), len(jobs))
    if n <= 1:
        rows = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as ex:
            rows = list(ex.map(_sweep_one, jobs))  # map keeps input order
    text = _csv_text((key, "outcome", metric, "error"), rows)
    if args.out:
        _write(Path(args.out) / "sweep.csv", text)
        if cfg.output.svg and not args.no_svg:
            _write(Path(args.out) / "sweep.svg", line_plot(
                [Series(metric, [r[0] for r in rows], [r[2] for r in rows])],
                f"{metric} vs {key}", key, metric))
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pinto-sim",
                                description="Latched spring jumping leg simulator.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, out_required=True):
        sp.add_argument("--config", help="JSON experiment file (default: reference config)")
        sp.add_argument("--out", required=out_required, help="output directory")
        sp.add_argument("--no-svg", action="store_true", help="skip SVG figures")

    sp = sub.add_parser("spring-curve", help="spring torque curves for several arm ratios")
    common(sp)
    sp.add_argument("--ratios", type=_float_list, default=[0.61, 0.92, 1.22])
    sp.add_argument("--points", type=int, default=201)
    sp.set_defaults(func=cmd_spring_curve)

    sp = sub.add_parser("workspace", help="foot workspace and cooperative lines")
    common(sp)
    sp.add_argument("--grid", type=int, default=25, help="joint grid points per axis")
    sp.set_defaults(func=cmd_workspace)

    sp = sub.add_parser("jump", help="simulate one jump and write its traces")
    common(sp)
    sp.add_argument("--mode", choices=[m.value for m in ActuationMode])
    sp.set_defaults(func=cmd_jump)

    sp = sub.add_parser("compare", help="rigid, SEA and PEA side by side")
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("scaling", help="jump height against robot scale")
    sp.add_argument("--alpha", type=float, default=3.0)
    sp.add_argument("--scales", type=_float_list, required=True)
    sp.add_argument("--out")
    sp.add_argument("--no-svg", action="store_true")
    sp.set_defaults(func=cmd_scaling)

    sp = sub.add_parser("sweep", help="vary one config key and record a jump metric")
    common(sp, out_required=False)
    sp.add_argument("--param", help="dotted config key, e.g. latch.release_angle_rad")
    sp.add_argument("--values", type=_float_list)
    sp.add_argument("--metric", choices=METRICS)
    sp.set_defaults(func=cmd_sweep)
    return p


def run_command(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    if getattr(args, "points", 2) < 2 or getattr(args, "grid", 2) < 2:
        parser.error("--points and --grid must be at least 2")
    try:
        return args.func(args)
    except (PintoSimError, OSError) as e:
        print(f"pinto-sim {args.command}: error: {e}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
