"""Execute experiment configs and write their outputs."""

from __future__ import annotations

import json
import os
import time
import warnings
from dataclasses import dataclass, field

from .. import accel, diagnostics, optimizer
from ..optimizer import DivergenceError, GDConfig
from ..problem import InitSpec, make_ground_truth, make_measurements
from ..sensing import estimate_rip_delta, make_gaussian_operator, make_identity_operator
from .config import ExperimentConfig, RunConfig, run_to_dict
from .csvio import write_trace_csv
from .svg import Series, render_series_svg

_LABEL_KEYS = ("mode", "k", "alpha", "sigma_r", "m", "eta", "ratio", "seed")


@dataclass
class RunResult:
    index: int
    label: str
    run: RunConfig
    trace: list
    summary: dict = field(default_factory=dict)


def make_operator(run: RunConfig):
    if run.m == 0:
        return make_identity_operator(run.n, run.n)
    return make_gaussian_operator(run.n, run.n, run.m, run.seed)


def build_instance(run: RunConfig, op=None):
    truth = make_ground_truth(run.n, run.r, run.singulars)
    mode = "symmetric" if run.mode == "symmetric" else "asymmetric"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return make_measurements(truth, op if op is not None else make_operator(run), run.k, mode)


def init_spec(run: RunConfig) -> InitSpec:
    scheme = {"symmetric": "symmetric_gaussian", "toy": "toy"}.get(run.mode, "asymmetric_imbalanced")
    return InitSpec(scheme, run.alpha, run.ratio, run.init_seed)


def _fit(trace, run: RunConfig, t_start=None, t_end=None, segment=None) -> dict:
    if segment is not None:
        lo, hi = segment
        trace = [rec for rec in trace if lo <= rec.t <= hi]
    fitter = diagnostics.fit_power_rate if run.fit_kind == "power" else diagnostics.fit_linear_rate
    try:
        fit = fitter(trace, run.fit_field, t_start, t_end, run.fit_floor)
    except ValueError as exc:
        return {"field": run.fit_field, "kind": run.fit_kind, "error": str(exc)}
    return {
        "field": run.fit_field,
        "kind": fit.kind,
        "rate": fit.rate,
        "r2": fit.r2,
        "window": list(fit.window),
        "samples": fit.samples,
        "degenerate": fit.degenerate,
    }


def execute_run(run: RunConfig, index: int = 0, label: str | None = None, op=None, rip=None) -> RunResult:
    """Run one configuration. Divergence is reported in the summary, not raised."""
    started = time.perf_counter()
    instance = build_instance(run, op)
    init = optimizer.initial_state(instance, init_spec(run))
    gd = GDConfig(run.eta, run.t_max, run.stop_loss, run.log_stride)
    summary: dict = {"index": index, "label": label or f"{index:02d}", "config": run_to_dict(run)}
    notes = list(instance.notes)
    fire = clamp = None
    diverged = None
    try:
        if run.mode == "accel":
            acfg = accel.AccelConfig(run.accel_beta, run.gamma, run.t_fire)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                res = accel.run_with_accel(instance, init, gd, acfg)
            notes.extend(str(w.message) for w in caught)
            trace, fire, clamp = res.trace, res.fire_iteration, res.clamp
        else:
            trace = optimizer.run(instance, init, gd)
    except DivergenceError as exc:
        trace, diverged = exc.trace, exc.t
        notes.append(str(exc))

    last = trace[-1] if trace else None
    summary["final"] = None if last is None else {
        "t": last.t,
        "loss_fro2": last.loss_fro2,
        "loss_spec": last.loss_spec,
        "train_loss": last.train_loss,
    }
    summary["diverged_at"] = diverged
    lo, hi = run.window
    summary["fits"] = {"main": _fit(trace, run, lo, hi)}
    if run.mode == "accel":
        summary["accel"] = {
            "beta": run.accel_beta,
            "trigger": "threshold" if run.gamma is not None else "fixed_iteration",
            "fire_iteration": fire,
            "clamp_count": None if clamp is None else clamp.count,
            "clamp_smallest": None if clamp is None else clamp.smallest,
        }
        if fire is not None:
            summary["fits"]["pre_fire"] = _fit(trace, run, segment=(0, fire))
            summary["fits"]["post_fire"] = _fit(trace, run, segment=(fire + 1, run.t_max))
    summary["rip"] = rip
    summary["notes"] = notes
    summary["wall_seconds"] = time.perf_counter() - started
    return RunResult(index, summary["label"], run, trace, summary)


def run_labels(cfg: ExperimentConfig) -> list[str]:
    swept = [k for k in _LABEL_KEYS if k in cfg.swept_keys()]
    out = []
    for i, run in enumerate(cfg.runs()):
        parts = [f"{i:02d}"] + [f"{k}{getattr(run, k):g}" if not isinstance(getattr(run, k), str) else getattr(run, k) for k in swept]
        out.append("_".join(parts))
    return out


def _rip_summary(run: RunConfig, op) -> dict | None:
    if run.m == 0 or run.rip_trials == 0:
        return None
    rank = min(2 * run.k + 1, run.n)
    est = estimate_rip_delta(op, rank, run.rip_trials, run.seed)
    return {"rank_probed": rank, "trials": est.trials, "delta_low": est.delta_low, "delta_high": est.delta_high}


def run_experiment(cfg: ExperimentConfig, progress=None) -> list[RunResult]:
    """Run every expanded configuration; operators are shared between runs."""
    runs = cfg.runs()
    labels = run_labels(cfg)
    ops: dict = {}
    rips: dict = {}
    results = []
    for i, (run, label) in enumerate(zip(runs, labels)):
        key = (run.n, run.m, run.seed)
        if key not in ops:
            ops[key] = make_operator(run)
        rkey = key + (run.k, run.rip_trials)
        if rkey not in rips:
            rips[rkey] = _rip_summary(run, ops[key])
        if progress is not None:
            progress(f"[{cfg.name}] run {i + 1}/{len(runs)}: {label}")
        results.append(execute_run(run, i, label, ops[key], rips[rkey]))
    return results


def _plot_series(result: RunResult, field_name: str, loglog: bool) -> Series | None:
    pts = []
    for rec in result.trace:
        v = getattr(rec, field_name)
        if v is None or not v > 0 or (loglog and rec.t < 1):
            continue
        pts.append((float(rec.t), float(v)))
    return Series(f"{result.label} {field_name}", pts) if pts else None


def write_outputs(cfg: ExperimentConfig, results: list[RunResult], out_dir) -> str:
    """Write per-run CSV and SVG, a combined SVG and summary.json under ``out_dir/name``."""
    target = os.path.join(os.fspath(out_dir), cfg.name)
    os.makedirs(target, exist_ok=True)
    combined = []
    for res in results:
        loglog = res.run.fit_kind == "power"
        axes = "loglog" if loglog else "log_y"
        write_trace_csv(res.trace, os.path.join(target, f"{res.label}.csv"))
        series = [s for s in (_plot_series(res, f, loglog) for f in ("loss_fro2", "loss_spec")) if s]
        if series:
            render_series_svg(series, os.path.join(target, f"{res.label}.svg"), axes, title=f"{cfg.name} {res.label}")
        main = _plot_series(res, "loss_fro2", loglog)
        if main is not None:
            combined.append(Series(res.label, main.points))
    if combined:
        axes = "loglog" if all(r.run.fit_kind == "power" for r in results) else "log_y"
        render_series_svg(combined, os.path.join(target, f"{cfg.name}.svg"), axes, title=cfg.name, ylabel="||F G^T - Sigma||_F^2")
    summary = {"name": cfg.name, "runs": [r.summary for r in results]}
    with open(os.path.join(target, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return target
