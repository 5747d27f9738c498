"""Per-iteration diagnostics and convergence-rate fits.

Spectral norms here go through LAPACK (``numpy.linalg.norm(., 2)``) rather
than :func:`factorgd.linalg.spectral_norm`: the inequality checks run on
nearly tight pairs (e.g. the bottom-right residual block against the full
residual), and a power-iteration estimate stopped on relative change can be
off by far more than the 1e-12 slack those checks allow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .linalg import orthonormal_complement, sym_eig_range, thin_svd


def norm2(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


class BlockView(NamedTuple):
    U: np.ndarray
    V: np.ndarray
    J: np.ndarray
    K: np.ndarray


def split_blocks(F: np.ndarray, G: np.ndarray, r: int) -> BlockView:
    """Top ``r`` rows (U, V) and the remaining rows (J, K) of F and G."""
    n = F.shape[0]
    if G.shape != F.shape:
        raise ValueError(f"F and G shapes differ: {F.shape} vs {G.shape}")
    if not 0 <= r < n:
        raise ValueError(f"block split needs 0 <= r < n, got r={r}, n={n}")
    return BlockView(F[:r], G[:r], F[r:], G[r:])


@dataclass(frozen=True)
class TraceRecord:
    """One logged iteration. Fields that do not apply to a mode stay ``None``.

    Block norms (``norm_UVmS`` = ||U V^T - Sigma_r||, ``norm_JV``, ``norm_UK``,
    ``norm_JK``) and ``M_t``, ``P_t``, ``S_t`` are spectral norms.
    ``drift_*`` compare the imbalance change over the step that produced
    this iterate with its bound; they are filled in by the run loop.
    """

    t: int
    loss_fro2: float | None = None
    loss_spec: float | None = None
    train_loss: float | None = None
    potential_At: float | None = None
    theta_max: float | None = None
    theta_excluded: int | None = None
    delta_min: float | None = None
    delta_max: float | None = None
    M_t: float | None = None
    P_t: float | None = None
    S_t: float | None = None
    norm_UVmS: float | None = None
    norm_JV: float | None = None
    norm_UK: float | None = None
    norm_JK: float | None = None
    norm_K: float | None = None
    norm_J: float | None = None
    norm_UmV: float | None = None
    k_perp: float | None = None
    k_perp_degenerate: bool | None = None
    drift_lhs: float | None = None
    drift_rhs: float | None = None
    drift_bound_ok: bool | None = None


TRACE_FIELDS = tuple(f.name for f in fields(TraceRecord))


def _usable_rows(X: np.ndarray) -> tuple[np.ndarray, int]:
    norms = np.linalg.norm(X, axis=1)
    keep = norms >= 1e-300
    return X[keep] / norms[keep, None], int((~keep).sum())


def angle_stat(X: np.ndarray) -> float:
    """Largest squared cosine between two distinct rows of ``X``.

    Rows with norm below 1e-300 are ignored.
    """
    Y, _ = _usable_rows(np.asarray(X, dtype=np.float64))
    if Y.shape[0] < 2:
        raise ValueError("angle_stat needs at least two nonzero rows")
    C = (Y @ Y.T) ** 2
    np.fill_diagonal(C, 0.0)
    return float(min(C.max(), 1.0))


class NullSpaceDiag(NamedTuple):
    value: float
    degenerate: bool


def null_space_diagnostic(F: np.ndarray, K: np.ndarray) -> NullSpaceDiag:
    """``||K W_perp^T||`` where W spans the row space of U = F[:r].

    ``r`` is inferred from ``K`` having ``n - r`` rows. W is the right
    singular factor of U; W_perp completes it from the canonical basis.
    """
    n, k = F.shape
    r = n - K.shape[0]
    if not 0 < r < k:
        raise ValueError(f"null-space diagnostic needs 0 < r < k, got r={r}, k={k}")
    svd = thin_svd(F[:r])
    s = svd.singulars
    degenerate = bool(s[0] == 0.0 or s[-1] < 1e-12 * s[0])
    w_perp = orthonormal_complement(svd.right)
    return NullSpaceDiag(norm2(K @ w_perp.T), degenerate)


def record(state, instance) -> TraceRecord:
    """Diagnostics of one iterate. Pure in ``(state, instance)``."""
    F, G = state.factors
    r = instance.r
    res = F @ G.T - instance.Sigma
    loss_fro2 = float(np.sum(res * res))

    if r < instance.n:
        uvms, jv = norm2(res[:r, :r]), norm2(res[r:, :r])
        uk, jk = norm2(res[:r, r:]), norm2(res[r:, r:])
    else:
        uvms, jv, uk, jk = norm2(res), 0.0, 0.0, 0.0
    blocks = split_blocks(F, G, r) if r < instance.n else BlockView(F, G, F[:0], G[:0])

    out = dict(
        t=state.t,
        loss_fro2=loss_fro2,
        loss_spec=norm2(res),
        train_loss=instance.train_loss(F, G),
        M_t=max(uvms, uk, jv),
        P_t=max(jv, uvms),
        S_t=max(uk, jk),
        norm_UVmS=uvms,
        norm_JV=jv,
        norm_UK=uk,
        norm_JK=jk,
        norm_K=norm2(blocks.K),
        norm_J=norm2(blocks.J),
        norm_UmV=norm2(blocks.U - blocks.V),
    )
    if state.mode == "symmetric":
        X = state.F
        out["potential_At"] = float(np.sum(X[r:] ** 2))
        _, excluded = _usable_rows(X)
        out["theta_excluded"] = excluded
        if X.shape[0] - excluded >= 2:
            out["theta_max"] = angle_stat(X)
    else:
        lo, hi = sym_eig_range(F.T @ F - G.T @ G)
        out["delta_min"], out["delta_max"] = lo, hi
        if r < G.shape[1] and r < instance.n:
            diag = null_space_diagnostic(F, blocks.K)
            out["k_perp"], out["k_perp_degenerate"] = diag.value, diag.degenerate
    return TraceRecord(**out)


def imbalance_drift(prev, nxt, instance, eta: float) -> tuple[float, float, float]:
    """``(lhs, rhs, allowance)`` of the per-step imbalance bound.

    lhs = ||Delta_{t+1} - Delta_t||, rhs = 2 eta^2 R^2 max(||F_t||, ||G_t||)^2
    with R = ||A*A(F_t G_t^T - Sigma)||. ``allowance`` bounds the rounding in
    forming the two Gram differences (n * eps per inner product, summed over
    the four Gram matrices).
    """
    F0, G0 = prev.factors
    F1, G1 = nxt.factors
    lhs = norm2((F1.T @ F1 - G1.T @ G1) - (F0.T @ F0 - G0.T @ G0))
    R = norm2(instance.normal_residual(F0 @ G0.T))
    rhs = 2.0 * eta**2 * R**2 * max(norm2(F0), norm2(G0)) ** 2
    n = F0.shape[0]
    frob2 = sum(float(np.sum(M * M)) for M in (F0, G0, F1, G1))
    allowance = 2.0 * n * np.finfo(float).eps * frob2
    return lhs, rhs, allowance


def imbalance_drift_check(prev, nxt, instance, eta: float) -> bool:
    if prev.mode != "asymmetric" or nxt.mode != "asymmetric":
        raise ValueError("the imbalance drift check applies to asymmetric runs")
    lhs, rhs, allowance = imbalance_drift(prev, nxt, instance, eta)
    return lhs <= rhs + allowance


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit of log(field) against t (linear) or log t (power).

    ``rate`` is the per-step contraction factor for ``kind == "linear"`` and
    the power-law exponent for ``kind == "power"``. ``degenerate`` marks a
    window with zero variance in log(field), where ``r2`` is reported as 0.
    """

    kind: str
    rate: float
    r2: float
    window: tuple[int, int]
    samples: int
    degenerate: bool = False

    @property
    def rho(self) -> float:
        if self.kind != "linear":
            raise AttributeError("rho is defined for linear fits only")
        return self.rate

    @property
    def exponent(self) -> float:
        if self.kind != "power":
            raise AttributeError("exponent is defined for power fits only")
        return self.rate


def _window(
    trace: Iterable[TraceRecord],
    field: str,
    t_start: int | None,
    t_end: int | None,
    floor: float | None,
    min_t: int,
) -> list[tuple[int, float]]:
    if field not in TRACE_FIELDS or field == "t":
        raise ValueError(f"unknown trace field {field!r}")
    pts = []
    for rec in trace:
        v = getattr(rec, field)
        if v is None or isinstance(v, bool):
            continue
        pts.append((rec.t, float(v)))
    if floor is not None:
        pts = [p for p in pts if p[1] > floor]
    if t_start is None and t_end is None:
        pts = [p for p in pts if p[1] > 0 and p[0] >= min_t]
        pts = pts[len(pts) // 2 :]
    else:
        lo = -math.inf if t_start is None else t_start
        hi = math.inf if t_end is None else t_end
        pts = [p for p in pts if lo <= p[0] <= hi]
        for t, v in pts:
            if not v > 0:
                raise ValueError(f"{field} is not positive at t={t} ({v}); log fit undefined")
            if t < min_t:
                raise ValueError(f"power-law fit needs t >= {min_t}, window contains t={t}")
    if len(pts) < 3:
        raise ValueError(f"rate fit needs at least 3 samples of {field}, got {len(pts)}")
    return pts


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, bool]:
    if np.all(y == y[0]):
        return 0.0, 0.0, True
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    slope = float(dx @ dy / (dx @ dx))
    ss_tot = float(dy @ dy)
    if ss_tot == 0.0:
        return slope, 0.0, True
    resid = dy - slope * dx
    r2 = 1.0 - float(resid @ resid) / ss_tot
    return slope, min(max(r2, 0.0), 1.0), False


def fit_linear_rate(
    trace: Sequence[TraceRecord],
    field: str = "loss_fro2",
    t_start: int | None = None,
    t_end: int | None = None,
    floor: float | None = None,
) -> RateFit:
    """Fit ``field ~ c * rho^t``.

    Without an explicit window the last half of the positive samples is
    used. Samples at or below ``floor`` are dropped first, which keeps
    values stuck at the floating-point floor out of the fit.
    """
    pts = _window(trace, field, t_start, t_end, floor, min_t=-(2**63))
    t = np.array([p[0] for p in pts], dtype=np.float64)
    slope, r2, degenerate = _ols(t, np.log([p[1] for p in pts]))
    return RateFit("linear", math.exp(slope), r2, (pts[0][0], pts[-1][0]), len(pts), degenerate)


def fit_power_rate(
    trace: Sequence[TraceRecord],
    field: str = "loss_fro2",
    t_start: int | None = None,
    t_end: int | None = None,
    floor: float | None = None,
) -> RateFit:
    """Fit ``field ~ c * t^p`` by least squares on log-log axes."""
    pts = _window(trace, field, t_start, t_end, floor, min_t=1)
    t = np.array([p[0] for p in pts], dtype=np.float64)
    slope, r2, degenerate = _ols(np.log(t), np.log([p[1] for p in pts]))
    return RateFit("power", slope, r2, (pts[0][0], pts[-1][0]), len(pts), degenerate)
