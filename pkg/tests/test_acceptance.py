"""Acceptance checks, one test per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary lists one
PASS/FAIL line per criterion. Preset runs are shared between criteria through
module-scoped fixtures.
"""

import json
import os
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from factorgd import toycase
from factorgd.accel import rebalance_transform
from factorgd.diagnostics import fit_power_rate
from factorgd.harness import presets
from factorgd.harness.cli import main as cli_main
from factorgd.harness.csvio import read_trace_csv
from factorgd.harness.runner import run_experiment
from factorgd.optimizer import GDState, asym_step, finite_diff_gradient, sym_step
from factorgd.problem import make_ground_truth, make_measurements
from factorgd.sensing import make_gaussian_operator

SLACK = 1e-12


def fits(results, key="main"):
    return [r.summary["fits"][key] for r in results]


@pytest.fixture(scope="module")
def toy_run():
    (res,) = run_experiment(presets.preset("toy-case"))
    return res


@pytest.fixture(scope="module")
def fig2_runs():
    return {
        seed: run_experiment(presets.preset("fig2-asym").with_overrides({"seed": seed}))
        for seed in presets.ACCEPTANCE_SEEDS
    }


@pytest.fixture(scope="module")
def fig2_exact_runs():
    return run_experiment(presets.preset("fig2-asym-exact"))


@pytest.fixture(scope="module")
def fig3_runs():
    return run_experiment(presets.preset("fig3-accel"))


@pytest.mark.criterion(1, "toy-case equivalence with the scalar recursions")
def test_c01_toy_equivalence(detail):
    start = time.perf_counter()
    gap = toycase.toy_equivalence(6, 2, 0.05, 0.5, 500)
    elapsed = time.perf_counter() - start
    detail["text"] = f"max deviation {gap:.2e}, {elapsed:.2f}s"
    assert gap <= 1e-9
    assert elapsed < 1.0


@pytest.mark.criterion(2, "two-sided toy loss bound for t >= T1")
def test_c02_toy_sandwich(detail, toy_run):
    alpha, eta, n = 0.5, 0.05, 6
    traj = toycase.toy_trajectory(alpha, eta, 500)
    t1 = toycase.phase_one_end(traj)
    assert t1 is not None
    violations = 0
    checked = 0
    for rec in toy_run.trace:
        if rec.t < t1:
            continue
        lower, upper = toycase.loss_bounds(rec.t, alpha, eta, n, t1)
        violations += not (lower <= rec.loss_fro2 <= upper)
        checked += 1
    detail["text"] = f"T1={t1}, {checked} records, {violations} violations"
    assert checked == 501 and violations == 0


@pytest.mark.criterion(3, "gradient steps match central finite differences")
def test_c03_gradients(detail):
    n, k, m = 8, 3, 60
    truth = make_ground_truth(n, 2, [1.0, 0.5])
    op = make_gaussian_operator(n, n, m, 11)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for mode in ("symmetric", "asymmetric"):
        inst = make_measurements(truth, op, k, mode)
        F = 0.5 * rng.standard_normal((n, k))
        G = None if mode == "symmetric" else 0.5 * rng.standard_normal((n, k))
        state = GDState(F, G)
        eta = 1.0
        nxt = sym_step(state, inst, eta) if mode == "symmetric" else asym_step(state, inst, eta)
        for _ in range(20):
            i, j = int(rng.integers(n)), int(rng.integers(k))
            which = "X" if mode == "symmetric" else ("F", "G")[int(rng.integers(2))]
            before, after = (state.G, nxt.G) if which == "G" else (state.F, nxt.F)
            analytic = (before[i, j] - after[i, j]) / eta
            fd = finite_diff_gradient(inst, state, (which, i, j))
            worst = max(worst, abs(analytic - fd) / abs(fd))
    detail["text"] = f"worst relative error {worst:.2e} over 40 coordinates"
    assert worst <= 1e-5


@pytest.mark.criterion(4, "rebalancing preserves F G^T and makes F'^T F' = beta^2 I")
def test_c04_transform_invariants(detail):
    beta = 0.5
    worst_p = worst_i = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        F, G = rng.standard_normal((20, 5)), rng.standard_normal((20, 5))
        out = rebalance_transform(F, G, beta)
        P = F @ G.T
        worst_p = max(worst_p, np.linalg.norm(out.F @ out.G.T - P) / np.linalg.norm(P))
        worst_i = max(worst_i, np.linalg.norm(out.F.T @ out.F - beta**2 * np.eye(5)) / beta**2)
    detail["text"] = f"product rel {worst_p:.1e}, isometry rel {worst_i:.1e}"
    assert worst_p <= 1e-9 and worst_i <= 1e-9


@pytest.mark.criterion(5, "symmetric over-parameterized tail slope in [-2.5, -1.5]")
def test_c05_symmetric_slowdown(detail, tmp_path, capsys):
    code = cli_main(["preset", "fig1-sym-overparam", "--out", str(tmp_path), "--quiet"])
    capsys.readouterr()
    assert code == 0
    out = tmp_path / "fig1-sym-overparam"
    assert (out / "summary.json").exists() and (out / "fig1-sym-overparam.svg").exists()
    summary = json.loads((out / "summary.json").read_text())
    (run5,) = [r for r in summary["runs"] if r["config"]["k"] == 5]
    trace = read_trace_csv(out / f"{run5['label']}.csv")
    fit = fit_power_rate(trace, "loss_fro2")
    detail["text"] = (
        f"k=5 slope {fit.exponent:.3f} (r2 {fit.r2:.3f}, window {fit.window}), "
        f"{run5['wall_seconds']:.0f}s"
    )
    assert run5["config"]["alpha"] == 1e-3 and run5["config"]["t_max"] == 200000
    assert run5["wall_seconds"] <= 120
    assert -2.5 <= fit.exponent <= -1.5


@pytest.mark.criterion(6, "symmetric exact-parameterized linear rate")
def test_c06_symmetric_exact(detail):
    (res,) = run_experiment(presets.preset("fig1-sym-exact"))
    fit = res.summary["fits"]["main"]
    detail["text"] = f"rho {fit['rate']:.6f}, r2 {fit['r2']:.5f}, window {fit['window']}"
    assert fit["kind"] == "linear"
    assert fit["r2"] >= 0.99 and fit["rate"] < 1 - 1e-4


@pytest.mark.criterion(7, "asymmetric rates ordered by alpha on every seed")
def test_c07_alpha_ordering(detail, fig2_runs):
    lines = []
    ok = True
    for seed, results in fig2_runs.items():
        alphas = [r.run.alpha for r in results]
        assert alphas == [0.5, 0.2, 0.05]
        f = fits(results)
        rhos = [x["rate"] for x in f]
        r2s = [x["r2"] for x in f]
        ok &= rhos[0] < rhos[1] < rhos[2] and min(r2s) >= 0.95
        ok &= max(r.summary["wall_seconds"] for r in results) <= 120
        lines.append(f"seed {seed}: " + "/".join(f"{x:.5f}" for x in rhos) + f" min r2 {min(r2s):.3f}")
    detail["text"] = "; ".join(lines)
    assert ok


@pytest.mark.criterion(8, "exact parameterization: rates independent of alpha")
def test_c08_exact_alpha_independence(detail, fig2_exact_runs):
    gaps = [1 - x["rate"] for x in fits(fig2_exact_runs)]
    assert [r.run.alpha for r in fig2_exact_runs] == [0.5, 0.2, 0.05]
    detail["text"] = "1-rho " + ", ".join(f"{g:.4f}" for g in gaps) + f"; ratio {max(gaps) / min(gaps):.3f}"
    assert min(gaps) > 0 and max(gaps) / min(gaps) <= 2


@pytest.mark.criterion(9, "rebalancing speeds up and equalizes the rate")
def test_c09_acceleration(detail, fig3_runs):
    by_alpha = {r.run.alpha: r for r in fig3_runs}
    small = by_alpha[0.05].summary["fits"]
    pre, post = 1 - small["pre_fire"]["rate"], 1 - small["post_fire"]["rate"]
    posts = [1 - r.summary["fits"]["post_fire"]["rate"] for r in fig3_runs]
    fires = [r.summary["accel"]["fire_iteration"] for r in fig3_runs]
    assert fires == [r.run.t_max // 2 for r in fig3_runs]
    detail["text"] = (
        f"alpha=0.05 speedup {post / pre:.1f}x; post 1-rho "
        + ", ".join(f"{p:.4f}" for p in posts)
        + f" (ratio {max(posts) / min(posts):.2f})"
    )
    assert post >= 5 * pre
    assert min(posts) > 0 and max(posts) / min(posts) <= 2


@pytest.mark.criterion(10, "imbalance drift bound at every logged step of fig2-asym")
def test_c10_drift(detail, fig2_runs):
    total = bad = rounding = 0
    for results in fig2_runs.values():
        for res in results:
            for rec in res.trace[1:]:
                total += 1
                bad += rec.drift_bound_ok is not True
                rounding += rec.drift_lhs > rec.drift_rhs
    detail["text"] = f"{total} steps, {bad} failures, {rounding} covered only by the rounding allowance"
    assert total > 0 and bad == 0


@pytest.mark.criterion(11, "loss sandwich at every record of every asymmetric run")
def test_c11_loss_sandwich(detail, fig2_runs, fig2_exact_runs, fig3_runs, toy_run):
    runs = [r for rs in fig2_runs.values() for r in rs] + list(fig2_exact_runs) + list(fig3_runs) + [toy_run]
    total = bad = 0
    for res in runs:
        for rec in res.trace:
            total += 1
            upper = rec.norm_UVmS + rec.norm_JV + rec.norm_UK + rec.norm_JK
            bad += not (rec.norm_JK <= rec.loss_spec + SLACK and rec.loss_spec <= upper + SLACK)
    detail["text"] = f"{len(runs)} runs, {total} records, {bad} violations"
    assert bad == 0


@pytest.mark.criterion(12, "rerunning a preset gives byte-identical CSV and SVG")
def test_c12_determinism(detail, tmp_path, capsys):
    names = ["toy-case", "fig2-asym-exact", "fig1-sym-exact"]
    compared = 0
    for name in names:
        for out in ("a", "b"):
            assert cli_main(["preset", name, "--out", str(tmp_path / out), "--quiet"]) == 0
        capsys.readouterr()
        files = sorted(f for f in os.listdir(tmp_path / "a" / name) if f.endswith((".csv", ".svg")))
        assert files
        for f in files:
            assert (tmp_path / "a" / name / f).read_bytes() == (tmp_path / "b" / name / f).read_bytes(), f
            compared += 1
    detail["text"] = f"{compared} files across {', '.join(names)}"


if __name__ == "__main__":
    sys.exit(pytest.main([str(Path(__file__)), "-q"]))
