"""Command line interface.

Subcommands::

    vmsiac run       integrate one case to t_final and save a snapshot
    vmsiac reverse   time-reversibility experiment on one mesh
    vmsiac converge  reversibility experiments over a refinement sequence
    vmsiac filter    apply the SIAC filter to a saved snapshot

Values come from ``--config`` (flat ``key = value`` file) and are overridden
by explicit flags.  Exit status: 0 on success, 2 on usage or configuration
errors, 3 when the time integration diverges.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .cases import RunConfig, load_config, merge_config, save_config
from .diagnostics import emit_table
from .errors import ConfigurationError, DivergenceError, InputError
from .experiments import reversibility_experiment, run, run_convergence_study
from .io import export_sample, load_snapshot, save_snapshot
from .siac import postprocess_field

EXIT_USAGE = 2
EXIT_DIVERGED = 3

log = logging.getLogger("vmsiac")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="flat key = value configuration file")
    p.add_argument("--case", choices=("landau", "two_stream", "weibel"))
    p.add_argument("--nx", type=int)
    p.add_argument("--nv", type=int)
    p.add_argument("--degree", "-k", dest="k", type=int, choices=(1, 2, 3))
    p.add_argument("--cfl", type=float)
    p.add_argument("--tfinal", dest="t_final", type=float)
    p.add_argument("--filter", dest="filter", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--dt-mode", dest="dt_mode", choices=("adaptive", "frozen"))
    p.add_argument("--dt-rule", dest="dt_rule", choices=("degree", "p1"))
    p.add_argument("--error-norm", dest="error_norm", choices=("rms", "absolute"))
    p.add_argument("--out", type=str, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vmsiac", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one case and save the final snapshot")
    _add_common(p)
    p.add_argument("--snapshot-every", dest="snapshot_every", type=int)

    p = sub.add_parser("reverse", help="time-reversibility experiment on one mesh")
    _add_common(p)

    p = sub.add_parser("converge", help="reversibility experiments over refined meshes")
    _add_common(p)
    p.add_argument("--meshes", type=int, nargs="+", default=[16, 32, 64],
                   help="cells per axis for each refinement level")

    p = sub.add_parser("filter", help="apply the SIAC filter to a saved snapshot")
    p.add_argument("snapshot", type=Path)
    p.add_argument("--out", type=str, help="output directory")
    p.add_argument("--points", type=int, default=None, help="plot points per element and axis")
    return parser


_CONFIG_KEYS = ("case", "nx", "nv", "k", "cfl", "t_final", "filter", "dt_mode", "dt_rule",
                "error_norm", "out", "snapshot_every")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file values overlaid with explicitly given flags."""
    base = load_config(args.config) if getattr(args, "config", None) else None
    flags = {k: getattr(args, k) for k in _CONFIG_KEYS if getattr(args, k, None) is not None}
    return merge_config(base, flags)


def _out_dir(config_out: str | None, default: str) -> Path:
    path = Path(config_out or default)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(args) -> int:
    config = resolve_config(args)
    out = _out_dir(config.out, "out")
    state = run(config)
    save_config(config, out / "config.txt")
    path = save_snapshot(state, out / f"{config.case}_final.snap", {"case": config.case})
    print(f"t={state.t:.6g} snapshot={path}")
    return 0


def _report_lines(report) -> list[str]:
    lines = [f"{report.case} {report.mesh} k={report.k} steps={report.steps} "
             f"runtime={report.runtime:.2f}s"]
    for name, e in report.errors.items():
        line = f"  {name:3s} L2={e.l2:.3e} Linf={e.linf:.3e}"
        if e.l2_pp is not None:
            line += f"  filtered L2={e.l2_pp:.3e} Linf={e.linf_pp:.3e}"
        lines.append(line)
    return lines


def cmd_reverse(args) -> int:
    config = resolve_config(args)
    report = reversibility_experiment(config)
    print("\n".join(_report_lines(report)))
    if config.out:
        out = _out_dir(config.out, "out")
        save_config(config, out / "config.txt")
        save_snapshot(report.final_state, out / f"{config.case}_reversed.snap", {"case": config.case})
    return 0


def cmd_converge(args) -> int:
    config = resolve_config(args)
    out = _out_dir(config.out, "out")
    dest = out / f"{config.case}_k{config.k}.csv"
    save_config(config, out / "config.txt")
    table = run_convergence_study(config, args.meshes, destination=dest)
    for row in table.rows:
        print("\n".join(_report_lines(row)))
    csv, side = emit_table(table, dest)
    print(f"table={csv} sidecar={side}")
    return 0


def cmd_filter(args) -> int:
    state, meta = load_snapshot(args.snapshot)
    out = _out_dir(args.out, str(args.snapshot.parent))
    stem = args.snapshot.stem
    n = args.points
    f_path = export_sample(postprocess_field(state.f, grid="uniform", n_points=n),
                           out / f"{stem}_f_filtered.dat", ["f"])
    e_path = export_sample(postprocess_field(state.fields, grid="uniform", n_points=n),
                           out / f"{stem}_fields_filtered.dat", list(state.kind.field_names))
    print(f"t={state.t:.6g} f={f_path} fields={e_path}")
    return 0


COMMANDS = {"run": cmd_run, "reverse": cmd_reverse, "converge": cmd_converge, "filter": cmd_filter}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, InputError, OSError) as exc:
        print(f"vmsiac: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"vmsiac: diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
