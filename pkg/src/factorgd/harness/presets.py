"""Named experiment presets.

Every preset uses n = 50, r = 2 and a unit spectrum unless it says otherwise.
Curves within one preset share the measurement operator (built from
``seed``) and differ in the initialization stream (``seed + index``).
The acceptance suite runs presets with seeds 0, 1 and 2.
"""

from __future__ import annotations

from .config import ConfigError, ExperimentConfig, serialize_config

ACCEPTANCE_SEEDS = (0, 1, 2)

_FIG2 = dict(mode="asymmetric", n=50, r=2, k=4, m=700, eta=0.2)

_CATALOG = {
    # Symmetric, identity operator, k > r: the error decays like 1/t^2.
    "fig1-sym-overparam": dict(
        mode="symmetric", n=50, r=2, k=[5, 3], m=0, eta=0.01, alpha=1e-3,
        t_max=200000, log_stride=100, fit_kind="power",
    ),
    # Same with k = r: linear convergence.
    "fig1-sym-exact": dict(
        mode="symmetric", n=50, r=2, k=2, m=0, eta=0.01, alpha=1e-3,
        t_max=5000, log_stride=10,
    ),
    # Asymmetric sensing, k > r, imbalanced start: linear rate grows with alpha.
    "fig2-asym": dict(
        _FIG2, alpha=[0.5, 0.2, 0.05], t_max=[4000, 10000, 20000], log_stride=50,
    ),
    "fig2-asym-exact": dict(
        _FIG2, k=2, alpha=[0.5, 0.2, 0.05], t_max=1000, log_stride=10,
    ),
    # Rebalance once at mid-run; the post-fire rate no longer depends on alpha.
    "fig3-accel": dict(
        _FIG2, mode="accel", alpha=[0.5, 0.2, 0.05], t_max=[2000, 6000, 20000],
        t_fire=[1000, 3000, 10000], log_stride=50, stop_loss=1e-26,
    ),
    # Ill-conditioned spectra, sigma_1 = 1.
    "apdx-kappa": dict(
        _FIG2, alpha=0.2, sigma_1=1.0, sigma_r=[0.66, 0.33, 0.1], t_max=10000, log_stride=50,
    ),
    # Larger rank and more measurements, all three algorithms.
    "apdx-large": dict(
        mode=["symmetric", "asymmetric", "accel"], n=50, r=5, k=10, m=2000, eta=0.2,
        alpha=0.2, t_max=3000, t_fire=[None, None, 1500], log_stride=25,
    ),
    # Large initial scale; the alpha = 5 run is expected to diverge.
    "apdx-large-alpha": dict(
        _FIG2, alpha=[3.0, 5.0], t_max=2000, log_stride=10,
    ),
    # Symmetric against asymmetric on the same operator.
    "apdx-sym-vs-asym": dict(
        mode=["symmetric"] * 3 + ["asymmetric"] * 3, n=50, r=2, k=4, m=1200, eta=0.2,
        alpha=[0.5, 0.2, 0.05] * 2, t_max=5000, log_stride=50,
    ),
    # Structured k = r + 1 start whose dynamics reduce to scalar recursions.
    "toy-case": dict(
        mode="toy", n=6, r=2, k=3, m=0, eta=0.05, alpha=0.5, t_max=500, log_stride=1,
    ),
}


def preset_names() -> list[str]:
    return list(_CATALOG)


def preset(name: str) -> ExperimentConfig:
    if name not in _CATALOG:
        raise ConfigError("preset", f"unknown preset {name!r} (known: {', '.join(_CATALOG)})")
    return ExperimentConfig.from_mapping(name, _CATALOG[name])


def preset_text(name: str) -> str:
    return serialize_config(preset(name))
