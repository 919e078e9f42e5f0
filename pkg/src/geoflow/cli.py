"""Command-line entry point.

Subcommands: run, dispersion, continuation, gauge-report, selftest.
Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numerical abort.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import __version__
from . import flows as fl
from . import gauge as gg
from . import initial_data as idat
from . import outputs as out
from . import pullback as pb
from . import source_geometry as sg
from . import target_geometry as tg
from .errors import (
    GeoflowError,
    NoContractionError,
    NumericalAbortError,
    UnsupportedOperationError,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--target", choices=("s2", "s6", "t2"), default="s2")
    p.add_argument("--metric", default="flat",
                   help="flat or conformal:<amplitude> (2-D grids only)")
    p.add_argument("--grid", default="128", help="N or N,N")
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--t-final", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--scheme", choices=("rk4-project", "imex-spectral", "duhamel"),
                   default="rk4-project")
    p.add_argument("--scenario", choices=idat.SCENARIOS, default="spin-wave")
    p.add_argument("--k-sobolev", type=int, default=2)
    p.add_argument("--diagnostics-every", type=int, default=1)
    p.add_argument("--snapshot-every", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", type=float, default=np.pi / 4)
    p.add_argument("--k-mode", type=int, default=2)
    p.add_argument("--band", type=int, default=3)
    p.add_argument("--winding", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geoflow", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, extra in (
        ("run", "evolve a configured flow and write artifacts"),
        ("dispersion", "fit the rotating-wave frequency against k^2 cos(theta)"),
        ("continuation", "compare regularized runs against the dispersive limit"),
        ("gauge-report", "mode-sweep diagnostics of the gauge operator"),
        ("selftest", "invariant suite plus convergence tables"),
    ):
        p = sub.add_parser(name, help=extra)
        _add_common_flags(p)
        if name == "continuation":
            p.add_argument("--epsilons", default="1e-2,5e-3,2.5e-3",
                           help="comma-separated, strictly decreasing")
        if name == "gauge-report":
            p.add_argument("--max-mode", type=int, default=64)
    return parser


def parse_config(args) -> tuple[fl.FlowConfig, sg.SourceMetric, tg.EmbeddedTarget]:
    sizes = tuple(int(s) for s in args.grid.split(","))
    if args.metric == "flat":
        metric = sg.flat_metric(sizes)
    elif args.metric.startswith("conformal:"):
        amp = float(args.metric.split(":", 1)[1])
        metric = sg.conformal_metric_2d(sizes, amplitude=amp)
    else:
        raise ValueError(f"unknown metric descriptor {args.metric!r}")
    target = tg.make_target(args.target)
    config = fl.FlowConfig(
        epsilon=args.epsilon,
        dt=args.dt,
        t_final=args.t_final,
        scheme=args.scheme.replace("-", "_"),
        diagnostics_stride=args.diagnostics_every,
        k=args.k_sobolev,
        seed=args.seed,
        snapshot_stride=args.snapshot_every,
    )
    config.validate_against(metric)
    return config, metric, target


def build_initial_data(args, metric, target) -> pb.MapState:
    return idat.build_initial_data(
        args.scenario, metric, target, seed=args.seed,
        theta=args.theta, k_mode=args.k_mode, band=args.band,
        winding=args.winding,
    )


def _config_echo(args, config) -> dict:
    return {
        "target": args.target,
        "metric": args.metric,
        "grid": args.grid,
        "scenario": args.scenario,
        "dt": config.dt,
        "t_final": config.t_final,
        "epsilon": config.epsilon,
        "scheme": config.scheme,
        "k_sobolev": config.k,
        "seed": config.seed,
        "diagnostics_every": config.diagnostics_stride,
        "snapshot_every": config.snapshot_stride,
    }


def _write_table(path: str, rows: list[dict]) -> None:
    with open(path, "w", newline="\n") as f:
        writer = csv.writer(f, lineterminator="\n")
        if not rows:
            return
        keys = list(rows[0].keys())
        writer.writerow(keys)
        for row in rows:
            writer.writerow([
                v if isinstance(v, int) else out.format_float(float(v))
                for v in (row[k] for k in keys)
            ])


def cmd_run(args) -> int:
    config, metric, target = parse_config(args)
    u0 = build_initial_data(args, metric, target)
    try:
        traj = fl.evolve(u0, config)
    except NumericalAbortError as exc:
        if args.out and exc.trajectory is not None:
            out.write_outputs(args.out, exc.trajectory, _config_echo(args, config),
                              extra={"aborted": str(exc)})
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.out:
        out.write_outputs(args.out, traj, _config_echo(args, config))
    last = traj.records[-1]
    print(f"final t={last.t:.6g} energy={last.energy:.12g} nk={last.nk:.12g}")
    return EXIT_OK


def fit_wave_frequency(traj: fl.TrajectoryRecord, k_mode: int, dt: float) -> float:
    """Phase-slope fit of the k-th Fourier coefficient of u1 + i u2."""
    if len(traj.snapshots) < 3:
        raise ValueError("need at least 3 snapshots to fit a frequency")
    times, phases = [], []
    for step, state in traj.snapshots:
        w = state.points[..., 0] + 1j * state.points[..., 1]
        coeff = np.fft.fft(w)[k_mode]
        times.append(step * dt)
        phases.append(np.angle(coeff))
    phases = np.unwrap(np.array(phases))
    slope = np.polyfit(np.array(times), phases, 1)[0]
    return float(-slope)


def cmd_dispersion(args) -> int:
    if args.target != "s2" or args.scenario != "spin-wave":
        raise ValueError("dispersion fit requires --target s2 --scenario spin-wave")
    stride = args.snapshot_every or max(1, int(round(args.t_final / args.dt)) // 50)
    args.snapshot_every = stride
    config, metric, target = parse_config(args)
    u0 = build_initial_data(args, metric, target)
    traj = fl.evolve(u0, config)
    omega_fit = fit_wave_frequency(traj, args.k_mode, config.dt)
    omega_exact = args.k_mode ** 2 * np.cos(args.theta)
    rel = abs(omega_fit - omega_exact) / max(abs(omega_exact), 1e-300)
    print(f"omega_fit={omega_fit:.12g} omega_exact={omega_exact:.12g} rel_err={rel:.3e}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_table(os.path.join(args.out, "dispersion.csv"), [{
            "theta": args.theta, "k_mode": args.k_mode,
            "omega_fit": omega_fit, "omega_exact": omega_exact, "rel_err": rel,
        }])
        out.write_manifest(args.out, {"version": __version__,
                                      "config": _config_echo(args, config),
                                      "files": ["dispersion.csv", "manifest.json"]})
    return EXIT_OK


def cmd_continuation(args) -> int:
    config, metric, target = parse_config(args)
    eps_list = [float(e) for e in args.epsilons.split(",")]
    u0 = build_initial_data(args, metric, target)
    rows = fl.epsilon_continuation(u0, eps_list, config)
    for row in rows:
        print(f"epsilon={row['epsilon']:.6g} gap={row['gap']:.6e}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_table(os.path.join(args.out, "continuation.csv"), rows)
        out.write_manifest(args.out, {"version": __version__,
                                      "config": _config_echo(args, config),
                                      "files": ["continuation.csv", "manifest.json"]})
    return EXIT_OK


def cmd_gauge_report(args) -> int:
    config, metric, target = parse_config(args)
    if args.scenario == "spin-wave" and args.target != "s2":
        args.scenario = "s6-hopf-like" if args.target == "s6" else "equator-circle"
    u0 = build_initial_data(args, metric, target)
    op = gg.build_gauge(u0, k=config.k)
    if op.trivial:
        print("gauge operator is the identity (parallel J); nothing to report")
    modes = [n for n in (1, 2, 4, 8, 16, 32, 64, 128, 256, 512)
             if n <= min(args.max_mode, metric.sizes[0] // 3)]
    rows = gg.elimination_residual(op, modes)
    for row in rows:
        print(f"n={row['n']:4d} r={row['r']:.6e} p1={row['p1_growth']:.6e} "
              f"corr={row['corr_norm']:.6e}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_table(os.path.join(args.out, "gauge_elimination.csv"), rows)
        out.write_manifest(args.out, {"version": __version__,
                                      "config": _config_echo(args, config),
                                      "files": ["gauge_elimination.csv", "manifest.json"]})
    return EXIT_OK


def energy_drift_table() -> list[dict]:
    """Relative energy drift of the dispersive run against the step size."""
    target = tg.make_target("s2")
    metric = sg.flat_metric(64)
    u0 = idat.spin_wave(metric, target)
    rows = []
    for dt in (1.28e-2, 6.4e-3, 3.2e-3, 1.6e-3):
        cfg = fl.FlowConfig(epsilon=0.0, dt=dt, t_final=0.512, scheme="rk4_project",
                            diagnostics_stride=10 ** 9)
        records = fl.evolve(u0, cfg).records
        E0, E1 = records[0].energy, records[-1].energy
        rows.append({"x": dt, "error": abs(E1 - E0) / E0, "expected_order": 5})
    return rows


def anticommutation_table() -> list[dict]:
    """|(nabla J) J + J (nabla J)| against the finite-difference step eta."""
    target = tg.make_target("s6")
    metric = sg.flat_metric(128)
    st = idat.s6_hopf_like(metric, target, seed=1)
    du = tg.project_tangent(target, st.points,
                            sg.centered_diff(metric, st.points, 0))
    rng = np.random.default_rng(5)
    V = tg.project_tangent(target, st.points,
                           np.broadcast_to(rng.standard_normal(7), st.points.shape))
    JV = tg.apply_J(target, st.points, V)
    rows = []
    for eta in (1e-3, 5e-4, 2.5e-4):
        nj_then_j = tg.apply_J(target, st.points,
                               tg.nabla_J(target, st.points, du, V,
                                          eta=eta, scheme="offset"))
        j_then_nj = tg.nabla_J(target, st.points, du, JV, eta=eta, scheme="offset")
        res = float(np.max(np.linalg.norm(j_then_nj + nj_then_j, axis=-1)))
        rows.append({"x": eta, "error": res, "expected_order": 3})
    return rows


def commutator_table() -> list[dict]:
    """Curvature-commutator residual against h on a 2-D sphere-valued state."""
    target = tg.make_target("s2")
    rows = []
    for n in (64, 128, 256):
        metric = sg.flat_metric((n, n))
        st = idat.random_smooth(metric, target, seed=4, band=2)
        rng = np.random.default_rng(6)
        V = pb.Section(tg.project_tangent(
            target, st.points,
            np.broadcast_to(rng.standard_normal(3), st.points.shape)), st)
        res = pb.commutator_residual(st, V, 0, 1)
        rows.append({"x": metric.spacings[0], "error": res, "expected_order": 2})
    return rows


def tension_crosscheck_table() -> list[dict]:
    """Extrinsic vs chart tension field against h (southern-hemisphere state)."""
    target = tg.make_target("s2")
    rows = []
    for n in (128, 256, 512):
        metric = sg.flat_metric(n)
        st = idat.random_smooth(metric, target, seed=4, band=3)
        flipped = pb.MapState(0.0, st.points * np.array([1.0, 1.0, -1.0]),
                              target, metric)
        a = pb.tension_extrinsic(flipped).vectors
        b = pb.tension_chart_oracle(flipped).vectors
        res = float(np.max(np.linalg.norm(a - b, axis=-1)))
        rows.append({"x": metric.spacings[0], "error": res, "expected_order": 2})
    return rows


CONVERGENCE_TABLES = {
    "convergence_energy_drift.csv": energy_drift_table,
    "convergence_anticommutation.csv": anticommutation_table,
    "convergence_commutator.csv": commutator_table,
    "convergence_tension.csv": tension_crosscheck_table,
}


def _selftest_convergence_tables(out_dir: str | None) -> list[str]:
    lines = []
    for name, builder in CONVERGENCE_TABLES.items():
        rows = builder()
        if out_dir:
            _write_table(os.path.join(out_dir, name), rows)
        x = np.log([r["x"] for r in rows])
        e = np.log([r["error"] for r in rows])
        slope = float(np.polyfit(x, e, 1)[0])
        lines.append(f"{name}: fitted order {slope:.2f} "
                     f"(expected {rows[0]['expected_order']})")
    return lines


def cmd_selftest(args) -> int:
    checks = []
    target = tg.make_target("s2")
    metric = sg.flat_metric(64)

    u0 = idat.spin_wave(metric, target)
    cfg = fl.FlowConfig(epsilon=0.0, dt=1e-3, t_final=0.1, scheme="rk4_project",
                        diagnostics_stride=10)
    traj = fl.evolve(u0, cfg)
    E = [r.energy for r in traj.records]
    drift = abs(E[-1] - E[0]) / E[0]
    checks.append(("energy drift (eps=0)", drift, drift < 1e-10))

    dev = float(np.max(tg.defining_residual(
        target, traj.info["final_state"].points)))
    checks.append(("constraint deviation", dev, dev < 1e-12))

    s6 = idat.s6_hopf_like(sg.flat_metric(128), tg.make_target("s6"))
    op = gg.build_gauge(s6, k=2)
    anti = gg.anticommutation_residual(op)
    checks.append(("JB+BJ residual (s6)", anti, anti < 1e-6))

    op2 = gg.build_gauge(u0, k=2)
    checks.append(("Kahler gauge trivial", float(op2.trivial), op2.trivial))

    if args.out:
        os.makedirs(args.out, exist_ok=True)
    for line in _selftest_convergence_tables(args.out if args.out else None):
        print(line)
    if args.out:
        out.write_manifest(args.out, {
            "version": __version__,
            "files": sorted(CONVERGENCE_TABLES) + ["manifest.json"],
        })

    ok = True
    for name, value, passed in checks:
        status = "ok" if passed else "FAIL"
        print(f"{status:4s} {name}: {value:.3e}")
        ok = ok and passed
    return EXIT_OK if ok else EXIT_NUMERICAL


COMMANDS = {
    "run": cmd_run,
    "dispersion": cmd_dispersion,
    "continuation": cmd_continuation,
    "gauge-report": cmd_gauge_report,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, UnsupportedOperationError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalAbortError, NoContractionError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except GeoflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
