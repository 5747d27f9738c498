"""Gradient descent on factorized matrix sensing losses."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import diagnostics
from .diagnostics import TraceRecord
from .problem import InitSpec, ProblemInstance, init_asymmetric_imbalanced, init_symmetric, init_toy


# Factor entries beyond this magnitude count as divergence: products and Gram
# matrices of such factors would overflow before the entries themselves do.
DIVERGENCE_LIMIT = 1e50


class DivergenceError(ArithmeticError):
    """An iterate blew up. ``trace`` holds the records logged so far."""

    def __init__(self, t: int, trace: list[TraceRecord] | None = None):
        super().__init__(
            f"gradient descent diverged at iteration {t} "
            f"(non-finite factor entries or entries above {DIVERGENCE_LIMIT:g})"
        )
        self.t = t
        self.trace = list(trace or [])


@dataclass(frozen=True)
class GDConfig:
    eta: float
    t_max: int
    stop_loss: float | None = None
    log_stride: int = 1

    def __post_init__(self):
        if not self.eta >= 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")
        if self.t_max < 0:
            raise ValueError(f"t_max must be nonnegative, got {self.t_max}")
        if self.log_stride < 1:
            raise ValueError(f"log_stride must be at least 1, got {self.log_stride}")
        if self.stop_loss is not None and not self.stop_loss > 0:
            raise ValueError(f"stop_loss must be positive, got {self.stop_loss}")


@dataclass(frozen=True)
class GDState:
    """Current factors. Symmetric runs keep X in ``F`` and leave ``G`` unset."""

    F: np.ndarray
    G: np.ndarray | None = None
    t: int = 0

    @property
    def mode(self) -> str:
        return "symmetric" if self.G is None else "asymmetric"

    @property
    def X(self) -> np.ndarray:
        if self.G is not None:
            raise AttributeError("X is only defined for symmetric states")
        return self.F

    @property
    def factors(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.F, self.F) if self.G is None else (self.F, self.G)


def initial_state(instance: ProblemInstance, init: InitSpec) -> GDState:
    n, k = instance.n, instance.k
    if init.scheme == "symmetric_gaussian":
        if instance.mode != "symmetric":
            raise ValueError("symmetric_gaussian init needs a symmetric instance")
        return GDState(init_symmetric(n, k, init.alpha, init.seed))
    if instance.mode != "asymmetric":
        raise ValueError(f"{init.scheme} init needs an asymmetric instance")
    if init.scheme == "toy":
        F, G = init_toy(n, instance.r, k, init.alpha)
    else:
        F, G = init_asymmetric_imbalanced(n, k, init.alpha, init.ratio, init.seed)
    return GDState(F, G)


def _blown_up(M: np.ndarray) -> bool:
    with np.errstate(invalid="ignore"):
        return not (np.abs(M) <= DIVERGENCE_LIMIT).all()


def _check_finite(state: GDState) -> GDState:
    if _blown_up(state.F) or (state.G is not None and _blown_up(state.G)):
        raise DivergenceError(state.t)
    return state


def sym_step(state: GDState, instance: ProblemInstance, eta: float) -> GDState:
    """X <- X - 2 eta S X with S the symmetric part of A*A(X X^T - Sigma).

    For the identity operator S is the residual itself. For a general
    operator, 2 S X is the exact gradient of 0.5 ||A(X X^T) - y||^2.
    """
    if state.mode != "symmetric":
        raise ValueError("sym_step needs a symmetric state")
    X = state.F
    R = instance.normal_residual(X @ X.T)
    if not instance.op.is_identity:
        R = 0.5 * (R + R.T)
    return _check_finite(GDState(X - (2.0 * eta) * (R @ X), None, state.t + 1))


def asym_step(state: GDState, instance: ProblemInstance, eta: float) -> GDState:
    """Simultaneous update of F and G from the same pre-step residual."""
    if state.mode != "asymmetric":
        raise ValueError("asym_step needs an asymmetric state")
    F, G = state.F, state.G
    R = instance.normal_residual(F @ G.T)
    return _check_finite(GDState(F - eta * (R @ G), G - eta * (R.T @ F), state.t + 1))


def step(state: GDState, instance: ProblemInstance, eta: float) -> GDState:
    return sym_step(state, instance, eta) if state.mode == "symmetric" else asym_step(state, instance, eta)


def _with_drift(rec: TraceRecord, prev: GDState, cur: GDState, instance, eta: float) -> TraceRecord:
    lhs, rhs, allowance = diagnostics.imbalance_drift(prev, cur, instance, eta)
    return dataclasses.replace(rec, drift_lhs=lhs, drift_rhs=rhs, drift_bound_ok=bool(lhs <= rhs + allowance))


def run(
    instance: ProblemInstance,
    init: GDState,
    config: GDConfig,
    observers: Iterable[Callable[[GDState, TraceRecord], None]] = (),
    transform: Callable[[GDState], GDState] | None = None,
) -> list[TraceRecord]:
    """Iterate from ``init`` and return the logged trace.

    A record is taken at t = 0, every ``log_stride`` iterations and at the
    last iterate. ``transform`` is applied to the iterate before each step
    (it must preserve t); the drift columns always describe the plain
    gradient step from the transformed iterate.
    """
    if init.mode != instance.mode:
        raise ValueError(f"init is {init.mode} but the instance is {instance.mode}")
    if init.F.shape != (instance.n, instance.k):
        raise ValueError(f"factor shape {init.F.shape} does not match n={instance.n}, k={instance.k}")
    observers = list(observers)
    asym = instance.mode == "asymmetric"
    trace: list[TraceRecord] = []

    def log(state: GDState, prev: GDState | None) -> None:
        rec = diagnostics.record(state, instance)
        if asym and prev is not None:
            rec = _with_drift(rec, prev, state, instance, config.eta)
        trace.append(rec)
        for obs in observers:
            obs(state, rec)

    state = init
    _check_finite(state)
    log(state, None)
    for _ in range(config.t_max):
        if transform is not None:
            state = transform(state)
        prev = state
        try:
            state = step(prev, instance, config.eta)
        except DivergenceError as exc:
            raise DivergenceError(exc.t, trace) from None
        stop = False
        if config.stop_loss is not None:
            F, G = state.factors
            res = F @ G.T - instance.Sigma
            stop = float(np.sum(res * res)) <= config.stop_loss
        if stop or state.t % config.log_stride == 0 or state.t == config.t_max:
            log(state, prev)
        if stop:
            break
    return trace


def finite_diff_gradient(
    instance: ProblemInstance, state: GDState, entry: tuple[str, int, int], h: float = 1e-5
) -> float:
    """Central difference of the training loss in one factor entry.

    ``entry`` is ``(factor, i, j)`` with factor ``"F"``, ``"G"`` or ``"X"``.
    """
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    name, i, j = entry

    def loss(delta: float) -> float:
        F = state.F.copy()
        if state.mode == "symmetric":
            if name != "X":
                raise ValueError("symmetric states only have the factor 'X'")
            F[i, j] += delta
            return instance.train_loss(F, F)
        G = state.G.copy()
        if name == "F":
            F[i, j] += delta
        elif name == "G":
            G[i, j] += delta
        else:
            raise ValueError(f"unknown factor {name!r}")
        return instance.train_loss(F, G)

    return (loss(h) - loss(-h)) / (2.0 * h)
