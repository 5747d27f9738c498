"""Command line entry point (``factorgd``)."""

from __future__ import annotations

import argparse
import sys

from .. import diagnostics, toycase
from ..sensing import estimate_rip_delta
from . import presets
from .config import ConfigError, ExperimentConfig, parse_config, parse_override
from .csvio import read_trace_csv
from .runner import make_operator, run_experiment, write_outputs


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="factorgd", description="Gradient descent experiments for factorized matrix sensing.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def outputs(sp):
        sp.add_argument("--out", default="runs", help="output directory (default: runs)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key; repeatable")
        sp.add_argument("--quiet", action="store_true", help="no progress lines")

    sp = sub.add_parser("run", help="run every experiment in a config file")
    sp.add_argument("config")
    sp.add_argument("--section", action="append", default=[], help="only run these sections")
    outputs(sp)

    sp = sub.add_parser("preset", help="run a named preset")
    sp.add_argument("name")
    outputs(sp)

    sub.add_parser("list-presets", help="print the preset names")

    sp = sub.add_parser("show-preset", help="print a preset in config-file form")
    sp.add_argument("name")

    sp = sub.add_parser("rip-estimate", help="empirical RIP constants of each operator in a config file")
    sp.add_argument("config")
    sp.add_argument("--trials", type=int, default=None, help="probes per operator (default: rip_trials)")
    sp.add_argument("--rank", type=int, default=None, help="probe rank (default: min(2k+1, n))")

    sp = sub.add_parser("rate-fit", help="fit a linear or power-law rate to a trace CSV column")
    sp.add_argument("trace")
    sp.add_argument("--field", required=True)
    sp.add_argument("--window", default=None, metavar="A,B", help="inclusive t range (default: last half of positive samples)")
    sp.add_argument("--kind", choices=("linear", "power"), default="linear")
    sp.add_argument("--floor", type=float, default=None, help="drop samples at or below this value")

    sp = sub.add_parser("toy-check", help="compare full gradient descent with the k = r + 1 recursions")
    sp.add_argument("--n", type=int, default=6)
    sp.add_argument("--r", type=int, default=2)
    sp.add_argument("--eta", type=float, default=0.05)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--steps", type=int, default=500)
    sp.add_argument("--tol", type=float, default=1e-9)
    return p


def _overrides(items) -> dict:
    out: dict = {}
    for item in items:
        out.update(parse_override(item))
    return out


def _read_configs(path: str) -> list[ExperimentConfig]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("file", f"cannot read {path!r}: {exc.strerror}") from None
    return parse_config(text)


def _execute(configs: list[ExperimentConfig], args) -> None:
    overrides = _overrides(args.set)
    configs = [c.with_overrides(overrides) for c in configs]
    for cfg in configs:  # validate everything before running anything
        cfg.runs()
    progress = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    for cfg in configs:
        results = run_experiment(cfg, progress)
        target = write_outputs(cfg, results, args.out)
        for res in results:
            final = res.summary["final"]
            fit = res.summary["fits"]["main"]
            rate = f"{fit['kind']} rate {fit['rate']:.6g} (r2 {fit['r2']:.4f})" if "rate" in fit else f"fit: {fit['error']}"
            loss = "no records" if final is None else f"t={final['t']} loss_fro2={final['loss_fro2']:.4e}"
            extra = f" diverged at t={res.summary['diverged_at']}" if res.summary["diverged_at"] is not None else ""
            print(f"{cfg.name} {res.label}: {loss}, {rate}{extra}")
        print(f"wrote {target}")


def _rip(args) -> None:
    for cfg in _read_configs(args.config):
        seen = set()
        for run in cfg.runs():
            key = (run.n, run.m, run.seed, run.k)
            if key in seen:
                continue
            seen.add(key)
            if run.m == 0:
                print(f"{cfg.name}: identity operator (delta = 0)")
                continue
            rank = args.rank if args.rank is not None else min(2 * run.k + 1, run.n)
            trials = args.trials if args.trials is not None else max(run.rip_trials, 1)
            est = estimate_rip_delta(make_operator(run), rank, trials, run.seed)
            print(
                f"{cfg.name}: n={run.n} m={run.m} seed={run.seed} rank={rank} trials={trials} "
                f"delta_low={est.delta_low!r} delta_high={est.delta_high!r}"
            )


def _rate_fit(args) -> None:
    trace = read_trace_csv(args.trace)
    lo = hi = None
    if args.window is not None:
        parts = args.window.split(",")
        if len(parts) != 2:
            raise ValueError(f"--window expects A,B, got {args.window!r}")
        lo = int(parts[0]) if parts[0].strip() else None
        hi = int(parts[1]) if parts[1].strip() else None
    fitter = diagnostics.fit_power_rate if args.kind == "power" else diagnostics.fit_linear_rate
    fit = fitter(trace, args.field, lo, hi, args.floor)
    name = "rho" if fit.kind == "linear" else "exponent"
    print(
        f"field={args.field} kind={fit.kind} {name}={fit.rate!r} r2={fit.r2!r} "
        f"window={fit.window[0]},{fit.window[1]} samples={fit.samples} degenerate={str(fit.degenerate).lower()}"
    )


def _toy_check(args) -> int:
    gap = toycase.toy_equivalence(args.n, args.r, args.eta, args.alpha, args.steps)
    traj = toycase.toy_trajectory(args.alpha, args.eta, args.steps)
    t1 = toycase.phase_one_end(traj)
    violations = 0
    if t1 is not None:
        for s in traj[t1:]:
            lower, upper = toycase.loss_bounds(s.t, args.alpha, args.eta, args.n, t1)
            loss = toycase.toy_loss(s, args.n, args.r)
            violations += not (lower <= loss <= upper)
    ok = gap <= args.tol and violations == 0 and t1 is not None
    print(f"max deviation {gap:.3e} (tol {args.tol:g}); T1={t1}; bound violations {violations}; monotone {toycase.is_monotone(traj)}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "list-presets":
            for name in presets.preset_names():
                print(name)
        elif args.command == "show-preset":
            sys.stdout.write(presets.preset_text(args.name))
        elif args.command == "preset":
            _execute([presets.preset(args.name)], args)
        elif args.command == "run":
            configs = _read_configs(args.config)
            if args.section:
                missing = set(args.section) - {c.name for c in configs}
                if missing:
                    raise ConfigError("--section", f"no such section(s): {', '.join(sorted(missing))}")
                configs = [c for c in configs if c.name in args.section]
            _execute(configs, args)
        elif args.command == "rip-estimate":
            _rip(args)
        elif args.command == "rate-fit":
            _rate_fit(args)
        elif args.command == "toy-check":
            return _toy_check(args)
    except ConfigError as exc:
        print(f"factorgd: config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"factorgd: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
