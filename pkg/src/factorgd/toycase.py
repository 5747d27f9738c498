"""Closed-form dynamics of the k = r + 1 toy factorization.

From the structured start (diagonal alpha in F, alpha and alpha/3 in G),
gradient descent on ``0.5 ||F G^T - Sigma||_F^2`` with ``Sigma = diag(I_r, 0)``
keeps U = V = alpha_t (I_r | 0), J = a_t A and K = b_t A, where A has a single
one at (1, k). Three scalar recursions then describe the whole run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import norm2, split_blocks
from .optimizer import GDState, asym_step
from .problem import init_toy, make_ground_truth, make_measurements
from .sensing import make_identity_operator


@dataclass(frozen=True)
class ToyState:
    a: float
    b: float
    alpha_t: float
    t: int = 0


def toy_initial(alpha: float) -> ToyState:
    return ToyState(alpha, alpha / 3.0, alpha, 0)


def toy_step(s: ToyState, eta: float) -> ToyState:
    return ToyState(
        a=s.a - eta * s.a * s.b**2,
        b=s.b - eta * s.a**2 * s.b,
        alpha_t=s.alpha_t * (1.0 + eta - eta * s.alpha_t**2),
        t=s.t + 1,
    )


def toy_trajectory(alpha: float, eta: float, steps: int) -> list[ToyState]:
    out = [toy_initial(alpha)]
    for _ in range(steps):
        out.append(toy_step(out[-1], eta))
    return out


def toy_loss(s: ToyState, n: int, r: int) -> float:
    """``||F G^T - Sigma||_F^2`` of the structured iterate."""
    return r * (s.alpha_t**2 - 1.0) ** 2 + (s.a * s.b) ** 2


def phase_one_end(traj: list[ToyState]) -> int | None:
    """First t with alpha_t >= 1/2, or None if the trajectory never gets there."""
    for s in traj:
        if s.alpha_t >= 0.5:
            return s.t
    return None


def loss_bounds(t: int, alpha: float, eta: float, n: int, t1: int) -> tuple[float, float]:
    """Lower and upper envelopes of the squared Frobenius error at ``t >= t1``."""
    lower = alpha**4 / 36.0 * (1.0 - 4.0 * eta * alpha**2) ** (2 * t)
    upper = 4.0 * n * (1.0 - eta * alpha**2 / 4.0) ** (t - t1)
    return lower, upper


def toy_problem(n: int, r: int):
    truth = make_ground_truth(n, r, [1.0] * r)
    return make_measurements(truth, make_identity_operator(n, n), r + 1, "asymmetric")


def toy_equivalence(n: int, r: int, eta: float, alpha: float, steps: int) -> float:
    """Largest gap between full gradient descent and the scalar recursions.

    Compares J_{1k} with a_t, K_{1k} with b_t, U_{11} with alpha_t, and checks
    U = V, U K^T = 0 and J V^T = 0, over iterations 0..steps.
    """
    k = r + 1
    inst = toy_problem(n, r)
    F, G = init_toy(n, r, k, alpha)
    state = GDState(F, G)
    toy = toy_initial(alpha)
    worst = 0.0
    for i in range(steps + 1):
        U, V, J, K = split_blocks(state.F, state.G, r)
        gaps = (
            abs(J[0, k - 1] - toy.a),
            abs(K[0, k - 1] - toy.b),
            abs(U[0, 0] - toy.alpha_t),
            float(np.max(np.abs(np.diag(U[:, :r]) - toy.alpha_t))),
            norm2(U - V),
            norm2(U @ K.T),
            norm2(J @ V.T),
        )
        worst = max(worst, *gaps)
        if i == steps:
            break
        state = asym_step(state, inst, eta)
        toy = toy_step(toy, eta)
    return worst


def is_monotone(traj: list[ToyState]) -> bool:
    """a_t, b_t and a_t b_t never increase along ``traj``."""
    for s0, s1 in zip(traj, traj[1:]):
        if s1.a > s0.a or s1.b > s0.b or s1.a * s1.b > s0.a * s0.b:
            return False
    return True


__all__ = [
    "ToyState",
    "is_monotone",
    "loss_bounds",
    "phase_one_end",
    "toy_equivalence",
    "toy_initial",
    "toy_loss",
    "toy_problem",
    "toy_step",
    "toy_trajectory",
]
