"""Command line entry point: ``koiterfsi {run,converge,bc-compare,edr}``."""
import argparse
import os
import sys

_threads = os.environ.get("FSI_THREADS")
if _threads is not None and _threads.strip().isdigit() and int(_threads) > 0:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads.strip())

from pathlib import Path  # noqa: E402

from .errors import ConfigError, FSIError  # noqa: E402

USAGE_ERROR = 2
FAILURE = 1


def _float_list(text):
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _mesh(text):
    try:
        nz, nr = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NZxNR, e.g. 31x11, got {text!r}")
    if nz < 2 or nr < 2:
        raise argparse.ArgumentTypeError("mesh needs at least 2x2 nodes")
    return nz, nr


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="koiterfsi",
        description="Fluid-structure interaction with a viscoelastic Koiter shell wall "
                    "(kinematically coupled beta-scheme).")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p):
        src = p.add_mutually_exclusive_group()
        src.add_argument("--benchmark", choices=("example1", "example1b", "example2", "cca"),
                         help="start from a benchmark preset")
        src.add_argument("--config", type=Path, help="configuration file")
        p.add_argument("--dt", type=float, help="time step (s)")
        p.add_argument("--beta", type=float, help="pressure split parameter in [0, 1]")
        p.add_argument("--bc", choices=("clamped", "absorbing"), help="wall end condition")
        p.add_argument("--mesh", type=_mesh, metavar="NZxNR", help="coarse pressure grid")
        p.add_argument("--waveform", type=Path, metavar="FILE",
                       help="periodic inlet pressure CSV (t, p)")
        p.add_argument("--out", type=Path, metavar="DIR", help="output directory")

    p = sub.add_parser("run", help="time integration with observable output")
    common(p)
    p.add_argument("--t-final", type=float, help="final time (s)")
    p.add_argument("--snapshot-every", type=_positive_int, metavar="N",
                   help="write a VTK snapshot every N steps (0: none)")

    p = sub.add_parser("converge", help="time-convergence study")
    common(p)
    p.add_argument("--dt-list", type=_float_list, required=True)
    p.add_argument("--dt-ref", type=float, required=True)
    p.add_argument("--t-eval", type=float, required=True)

    p = sub.add_parser("bc-compare", help="absorbing vs clamped wall ends")
    common(p)
    p.add_argument("--t-eval", type=_float_list, required=True,
                   help="comma-separated output times (s)")

    p = sub.add_parser("edr", help="energy dissipation ratio of the midpoint "
                                   "diameter-pressure loop")
    common(p)
    p.add_argument("--t-final", type=float, help="simulated time (default: one period)")
    p.add_argument("--series", type=Path, metavar="FILE",
                   help="use an existing time-series CSV instead of running")
    return parser


def resolve_config(args):
    """Configuration from ``--config``/``--benchmark`` plus flag overrides."""
    from .bench.configs import cca_boundary
    from .io import parse_config

    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        cfg = parse_config(text, base_dir=args.config.parent)
    elif args.benchmark is not None:
        cfg = parse_config(f"benchmark = {args.benchmark}")
    else:
        raise ConfigError("either --benchmark or --config is required")
    changes = {}
    if args.dt is not None:
        changes["dt"] = args.dt
    if args.beta is not None:
        changes["beta"] = args.beta
    if args.bc is not None:
        changes["bc_kind"] = args.bc
    if args.mesh is not None:
        changes["n_z"], changes["n_r"] = args.mesh
    if getattr(args, "t_final", None) is not None:
        changes["t_final"] = args.t_final
    if getattr(args, "snapshot_every", None) is not None:
        changes["snapshot_every"] = args.snapshot_every
    if args.out is not None:
        changes["out_dir"] = str(args.out)
    if args.waveform is not None:
        try:
            changes["boundary"] = cca_boundary(str(args.waveform), length=cfg.L,
                                               delay=cfg.boundary.delay)
        except OSError as exc:
            raise ConfigError(f"cannot read waveform: {exc}", key="waveform") from exc
    try:
        return cfg.with_(**changes)
    except FSIError as exc:
        raise ConfigError(str(exc)) from exc


def _out_dir(cfg, default):
    out = Path(cfg.out_dir or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args):
    from .driver import run_simulation
    from .io import RunManifest, write_timeseries, write_vtk_snapshot

    cfg = resolve_config(args)
    out = _out_dir(cfg, "run_output")
    RunManifest(cfg, str(out), cfg.snapshot_every).write(out / "manifest.cfg")
    every = cfg.snapshot_every

    def snap(state):
        if every and state.step % every == 0:
            write_vtk_snapshot(state, out / f"snapshot_{state.step:06d}.vtk")

    from .driver import initial_state
    init = initial_state(cfg)
    if every:
        write_vtk_snapshot(init, out / f"snapshot_{0:06d}.vtk")
    result = run_simulation(cfg, initial=init, callback=snap)
    write_timeseries(result.series, out / "series.csv")
    print(f"{cfg.n_steps} steps to t={result.state.t:.6g} s; "
          f"max u_z={result.max_axial_velocity:.6g} cm/s, "
          f"max |eta_r|={result.max_abs_eta_r:.6g} cm; output in {out}")
    return 0


def cmd_converge(args):
    from .bench.convergence import convergence_study

    cfg = resolve_config(args)
    out = _out_dir(cfg, "converge_output")
    report = convergence_study(cfg, args.dt_list, args.dt_ref, args.t_eval)
    path = out / "convergence.csv"
    report.to_csv(path)
    for k, dt in enumerate(report.dts):
        errs = "  ".join(f"{f}={report.errors[f][k]:.4e}" for f in ("u", "p", "eta"))
        print(f"dt={dt:.3e}  {errs}")
    for f in ("u", "p", "eta"):
        print(f"orders {f}: " + ", ".join(f"{o:.3f}" for o in report.orders[f]))
    print(f"report written to {path}")
    return 0


def cmd_bc_compare(args):
    import csv

    from .bench.bc_comparison import bc_comparison

    cfg = resolve_config(args)
    out = _out_dir(cfg, "bc_compare_output")
    res = bc_comparison(cfg, args.t_eval)
    path = out / "bc_compare.csv"
    kinds = list(res.profiles)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["z"] + [f"{k}_t{t:g}" for k in kinds for t in res.times])
        for i, z in enumerate(res.z):
            w.writerow([format(z, ".17g")] + [format(float(res.profiles[k][j][i]), ".17g")
                                              for k in kinds for j in range(len(res.times))])
    for k in kinds:
        print(f"{k}: peak |eta_r| = {res.peak[k]:.6g} cm")
    print(f"profiles written to {path}")
    return 0


def cmd_edr(args):
    from .bench.edr import compute_edr
    from .io import read_timeseries

    if args.series is not None:
        series = read_timeseries(args.series)
    else:
        from .driver import run_simulation
        if args.config is None and args.benchmark is None:
            args.benchmark = "cca"
        cfg = resolve_config(args)
        series = run_simulation(cfg).series
    edr = compute_edr(series.diameter, series.mean_pressure)
    print(f"EDR = {edr:.4f} %")
    return 0


COMMANDS = {"run": cmd_run, "converge": cmd_converge, "bc-compare": cmd_bc_compare,
            "edr": cmd_edr}


def main(argv=None):
    parser = build_parser()
    if _threads is not None and not (_threads.strip().isdigit() and int(_threads) > 0):
        parser.print_usage(sys.stderr)
        print(f"koiterfsi: error: FSI_THREADS must be a positive integer, got {_threads!r}",
              file=sys.stderr)
        return USAGE_ERROR
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("koiterfsi: error: a command is required", file=sys.stderr)
        return USAGE_ERROR
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"koiterfsi: configuration error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FSIError as exc:
        print(f"koiterfsi: error: {exc}", file=sys.stderr)
        return FAILURE
    except OSError as exc:
        print(f"koiterfsi: I/O error: {exc}", file=sys.stderr)
        return FAILURE


if __name__ == "__main__":
    sys.exit(main())
