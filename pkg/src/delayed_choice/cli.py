"""Command-line front end.

Subcommands::

    verify {wheeler,eraser}     check A = A' and report the residuals
    run EXPERIMENT              seeded Monte Carlo runs -> events, histograms, manifest
    analytic EXPERIMENT         exact joint distribution and per-detector curves

Reports go to stdout as ``key: value`` lines.  Exit codes: 0 success,
1 identity or invariant violation, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, eraser, wheeler
from .errors import ConfigError
from .experiments import eraser_fringes, parse_experiment, run_experiment
from .io import (
    RunManifest,
    load_config,
    manifest_config,
    write_curves_csv,
    write_distribution,
    write_events_csv,
    write_events_json,
    write_histograms_csv,
)
from .runs import DEFAULT_BINS, ERASER_EXPERIMENTS, EXPERIMENTS, label_counts, visibility

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _report(key: str, value) -> None:
    print(f"{key}: {value}")


def _fmt(x: float) -> str:
    return f"{x:.3e}"


def _entry(z: complex) -> str:
    z = complex(z)
    # round-off residue below 1e-14 prints as an exact 0; "+ 0.0" drops "-0"
    re = (z.real if abs(z.real) > 1e-14 else 0.0) + 0.0
    return f"{re:.12g}" if abs(z.imag) <= 1e-14 else f"{z:.12g}"


def _eraser_config(args) -> eraser.EraserConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else eraser.EraserConfig()
    changes = {}
    if getattr(args, "n", None) is not None:
        changes["N"] = args.n
    if getattr(args, "envelope", None):
        changes["envelope"] = args.envelope
    return cfg.replace(**changes) if changes else cfg


def cmd_verify(args) -> int:
    tol = args.tol
    cfg = _eraser_config(args) if args.target == "eraser" else None
    _report("target", args.target)
    _report("tolerance", tol)
    if args.target == "wheeler":
        rep = wheeler.verify_identity()
        for i, row in enumerate(rep.delayed):
            _report(f"A_row{i}", " ".join(_entry(z) for z in row))
        _report("max_abs_diff", _fmt(rep.max_abs_diff))
        _report("max_abs_vs_explicit", _fmt(rep.max_abs_explicit))
        _report("commutator_max_abs", _fmt(rep.commutator_norm))
        ok = rep.holds(tol)
    else:
        rep = eraser.verify_eraser_identity(cfg)
        _report("N", cfg.N)
        _report("envelope", cfg.envelope)
        _report("dimension", f"{2 * cfg.N}x{2 * cfg.N}")
        _report("max_abs_diff", _fmt(rep.max_abs_diff))
        _report("max_abs_vs_y_form", _fmt(rep.max_abs_y_form))
        _report("intertwining_residual", _fmt(rep.intertwining_residual))
        _report("crystal_isometry", str(rep.crystal_isometry).lower())
        ok = rep.holds(tol)
    _report("status", "ok" if ok else "violation")
    return EXIT_OK if ok else EXIT_VIOLATION


def _execute_run(experiment: str, n_runs: int, seed: int, fmt: str, out: Path,
                 cfg: eraser.EraserConfig | None, n_bins: int) -> int:
    kind, _ = parse_experiment(experiment)
    out.mkdir(parents=True, exist_ok=True)
    events = run_experiment(experiment, n_runs, seed, cfg)
    events_name = f"events.{fmt}"
    (write_events_json if fmt == "json" else write_events_csv)(out / events_name, events)
    outputs = [events_name]

    _report("experiment", experiment)
    _report("n_runs", n_runs)
    _report("seed", seed)
    if kind == "eraser":
        fringes = eraser_fringes(experiment, n_runs, seed, cfg, n_bins, events=events)
        write_histograms_csv(out / "histograms.csv", fringes.histograms)
        outputs.append("histograms.csv")
        for group, h in fringes.histograms.items():
            _report(f"count_{group}", h.total)
        for group, h in fringes.histograms.items():
            if h.total:
                _report(f"visibility_{group}", f"{visibility(h, fringes.envelopes[group]).value:.4f}")
    else:
        labels = tuple(wheeler.detector_distribution(int(experiment[-1])))
        for label, c in zip(labels, label_counts(events, labels)):
            _report(f"count_{label}", int(c))

    manifest = RunManifest(
        command="run",
        experiment=experiment,
        config=manifest_config(cfg),
        n_runs=n_runs,
        seed=seed,
        format=fmt,
        n_bins=n_bins if kind == "eraser" else None,
        tool_version=__version__,
        output_paths=outputs + ["manifest.json"],
    )
    manifest.write(out / "manifest.json")
    for name in manifest.output_paths:
        _report("wrote", out / name)
    return EXIT_OK


def cmd_run(args) -> int:
    out = Path(args.out)
    if args.manifest:
        m = RunManifest.read(args.manifest)
        return _execute_run(m.experiment, m.n_runs, m.seed, m.format, out,
                            m.eraser_config(), m.n_bins or DEFAULT_BINS)
    if args.experiment is None:
        print("error: run needs an experiment or --manifest", file=sys.stderr)
        return EXIT_USAGE
    if args.runs < 1:
        raise ConfigError("runs", "must be at least 1")
    if args.seed < 0:
        raise ConfigError("seed", "must be non-negative")
    kind, _ = parse_experiment(args.experiment)
    cfg = _eraser_config(args) if kind == "eraser" else None
    return _execute_run(args.experiment, args.runs, args.seed, args.format, out, cfg, args.bins)


def cmd_analytic(args) -> int:
    cfg = _eraser_config(args)
    number = int(args.experiment[-1])
    joint = eraser.joint_distribution(cfg, number)
    env = eraser.incoherent_envelope(cfg, number)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dist_name = f"distribution.{args.format}"
    write_distribution(out / dist_name, joint, args.format)
    write_curves_csv(out / "curves.csv", joint, env)

    total = float(joint.probs.sum())
    _report("experiment", args.experiment)
    _report("N", cfg.N)
    _report("total_probability", f"{total:.15f}")
    for det, p in joint.detector_totals().items():
        _report(f"total_{det}", f"{p:.6f}")
    cond = joint.conditional_on_screen()
    for j, det in enumerate(joint.detectors):
        # size of the cross term relative to the envelope, max over bins
        fringe = np.abs(joint.probs[:, j] - env.probs[:, j])
        denom = np.where(env.probs[:, j] > 0, env.probs[:, j], 1.0)
        _report(f"fringe_depth_{det}", f"{float(np.max(fringe / denom)):.6f}")
    _report("max_conditional", f"{float(cond.max()):.6f}")
    _report("wrote", out / dist_name)
    _report("wrote", out / "curves.csv")
    ok = abs(total - 1.0) <= 1e-9
    _report("status", "ok" if ok else "violation")
    return EXIT_OK if ok else EXIT_VIOLATION


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value eraser configuration file")
    p.add_argument("--n", type=int, help="number of discrete angles N (overrides config)")
    p.add_argument("--envelope", choices=eraser.ENVELOPES, help="single-slit envelope (overrides config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delayed-choice",
        description="Forward-time simulation of delayed choice experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check that delayed and non-delayed compositions agree")
    v.add_argument("target", choices=("wheeler", "eraser"))
    v.add_argument("--tol", type=float, default=1e-12)
    _add_config_flags(v)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("run", help="seeded Monte Carlo runs")
    r.add_argument("experiment", nargs="?", choices=EXPERIMENTS)
    r.add_argument("--runs", type=int, default=100_000)
    r.add_argument("--seed", type=int, default=42)
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.add_argument("--out", default="out")
    r.add_argument("--bins", type=int, default=DEFAULT_BINS, help="histogram bins across the screen")
    r.add_argument("--manifest", help="replay the run recorded in this manifest")
    _add_config_flags(r)
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analytic", help="exact joint screen/detector distribution")
    a.add_argument("experiment", choices=ERASER_EXPERIMENTS)
    a.add_argument("--format", choices=("csv", "json"), default="csv")
    a.add_argument("--out", default="out")
    _add_config_flags(a)
    a.set_defaults(func=cmd_analytic)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
