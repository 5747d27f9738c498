"""One-shot SVD rebalancing of the factors near the optimum.

Once the iterate is close to the optimum, F is replaced by ``F R`` and G by
``G R^{-T}`` with ``R = Q^T diag(beta / d)`` built from the SVD
``F = P diag(d) Q``. The product ``F G^T`` is unchanged and ``F^T F``
becomes ``beta^2 I``, so the imbalance ``F^T F - G^T G`` on the redundant
directions jumps from the initialization scale to ``beta^2``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

from . import optimizer
from .diagnostics import TraceRecord
from .linalg import ConvergenceError, spectral_norm, thin_svd
from .optimizer import GDConfig, GDState
from .problem import ProblemInstance

CLAMP_RELATIVE = 1e-8


@dataclass(frozen=True)
class AccelConfig:
    """Fire on ``||A*A(F G^T - Sigma)|| <= gamma`` or at iteration ``t_fire``."""

    beta: float
    gamma: float | None = None
    t_fire: int | None = None

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if (self.gamma is None) == (self.t_fire is None):
            raise ValueError("give exactly one of gamma (threshold) or t_fire (fixed iteration)")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.t_fire is not None and self.t_fire < 0:
            raise ValueError(f"t_fire must be nonnegative, got {self.t_fire}")

    @property
    def trigger_mode(self) -> str:
        return "threshold" if self.gamma is not None else "fixed_iteration"


class ClampReport(NamedTuple):
    count: int
    smallest: float


class Rebalanced(NamedTuple):
    F: np.ndarray
    G: np.ndarray
    clamp: ClampReport


def trigger_value(state: GDState, instance: ProblemInstance) -> float:
    """Spectral norm of ``A*A(F G^T - Sigma)`` by power iteration."""
    F, G = state.factors
    R = instance.normal_residual(F @ G.T)
    try:
        return spectral_norm(R)
    except ConvergenceError as exc:
        return exc.estimate


def trigger_check(state: GDState, instance: ProblemInstance, cfg: AccelConfig) -> bool:
    if state.mode != "asymmetric":
        raise ValueError("the rebalancing trigger applies to asymmetric runs")
    if cfg.t_fire is not None:
        return state.t == cfg.t_fire
    return trigger_value(state, instance) <= cfg.gamma


def rebalance_transform(F: np.ndarray, G: np.ndarray, beta: float) -> Rebalanced:
    """Return ``(F R, G R^{-T}, clamp_report)``.

    Singular values of F below ``1e-8 * d_1`` are raised to that level
    before inversion; the product F G^T is still preserved exactly, only the
    isometry ``F'^T F' = beta^2 I`` is lost on the clamped directions.
    """
    if F.shape != G.shape:
        raise ValueError(f"F and G shapes differ: {F.shape} vs {G.shape}")
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    svd = thin_svd(F)
    d = svd.singulars.copy()
    if d[0] == 0.0:
        raise ValueError("cannot rebalance a zero factor")
    floor = CLAMP_RELATIVE * d[0]
    low = d < floor
    report = ClampReport(int(low.sum()), float(d.min()))
    d[low] = floor
    Qt = svd.right.T
    R = Qt * (beta / d)
    R_inv_t = Qt * (d / beta)
    return Rebalanced(F @ R, G @ R_inv_t, report)


class AccelRun(NamedTuple):
    trace: list[TraceRecord]
    fire_iteration: int | None
    clamp: ClampReport | None


def run_with_accel(
    instance: ProblemInstance,
    init: GDState,
    gd_config: GDConfig,
    accel_config: AccelConfig,
    observers: Iterable[Callable[[GDState, TraceRecord], None]] = (),
) -> AccelRun:
    """Gradient descent that rebalances the factors once, at the first trigger."""
    if instance.mode != "asymmetric":
        raise ValueError("run_with_accel needs an asymmetric instance")
    fired: dict = {}

    def transform(state: GDState) -> GDState:
        if fired or not trigger_check(state, instance, accel_config):
            return state
        out = rebalance_transform(state.F, state.G, accel_config.beta)
        fired["t"] = state.t
        fired["clamp"] = out.clamp
        return GDState(out.F, out.G, state.t)

    trace = optimizer.run(instance, init, gd_config, observers, transform=transform)
    if not fired:
        warnings.warn("rebalancing trigger never fired", stacklevel=2)
        return AccelRun(trace, None, None)
    return AccelRun(trace, fired["t"], fired["clamp"])
