"""Linear measurement operators ``M -> (<A_i, M>)_i`` and their adjoints."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import derive_seed, gaussian_matrix


class MeasurementOperator:
    """Either ``m`` dense sensing matrices or the identity (exact) map.

    The Gaussian kind keeps the matrices stacked row-major as an
    ``(m, n1*n2)`` array so that ``apply`` and ``adjoint`` are single
    matrix-vector products.
    """

    def __init__(self, n1: int, n2: int, matrices: np.ndarray | None = None):
        self.n1 = int(n1)
        self.n2 = int(n2)
        if matrices is None:
            self._flat = None
        else:
            matrices = np.asarray(matrices, dtype=np.float64)
            if matrices.ndim != 3 or matrices.shape[1:] != (self.n1, self.n2):
                raise ValueError(
                    f"sensing matrices must all be {self.n1}x{self.n2}, got array of shape {matrices.shape}"
                )
            self._flat = np.ascontiguousarray(matrices.reshape(matrices.shape[0], -1))

    @property
    def kind(self) -> str:
        return "identity" if self._flat is None else "gaussian"

    @property
    def is_identity(self) -> bool:
        return self._flat is None

    @property
    def m(self) -> int:
        return self.n1 * self.n2 if self._flat is None else self._flat.shape[0]

    def matrix(self, i: int) -> np.ndarray:
        """The i-th sensing matrix ``A_i``."""
        if self._flat is None:
            e = np.zeros(self.n1 * self.n2)
            e[i] = 1.0
            return e.reshape(self.n1, self.n2)
        return self._flat[i].reshape(self.n1, self.n2).copy()

    def apply(self, M) -> np.ndarray:
        M = np.asarray(M, dtype=np.float64)
        if M.shape != (self.n1, self.n2):
            raise ValueError(f"operator acts on {self.n1}x{self.n2} matrices, got {M.shape}")
        if self._flat is None:
            return M.ravel().copy()
        return self._flat @ M.ravel()

    def adjoint(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64).ravel()
        if z.shape[0] != self.m:
            raise ValueError(f"adjoint expects a vector of length {self.m}, got {z.shape[0]}")
        if self._flat is None:
            return z.reshape(self.n1, self.n2).copy()
        return (z @ self._flat).reshape(self.n1, self.n2)

    def normal(self, M) -> np.ndarray:
        """``A*A(M)``; exactly ``M`` for the identity kind."""
        if self._flat is None:
            return np.array(M, dtype=np.float64)
        return self.adjoint(self.apply(M))

    def __repr__(self) -> str:
        return f"MeasurementOperator(kind={self.kind!r}, n1={self.n1}, n2={self.n2}, m={self.m})"


@dataclass(frozen=True)
class RipEstimate:
    """Empirical RIP constants from random low-rank probes.

    These are lower bounds on the true constant: only the sampled matrices
    are checked.
    """

    delta_low: float
    delta_high: float
    trials: int
    rank_probed: int

    @property
    def delta(self) -> float:
        return max(self.delta_low, self.delta_high)


def make_gaussian_operator(n1: int, n2: int, m: int, seed: int) -> MeasurementOperator:
    """``m`` matrices with i.i.d. N(0, 1/m) entries; ``A_i`` uses stream ``i`` of ``seed``."""
    if min(n1, n2, m) < 1:
        raise ValueError(f"n1, n2 and m must be positive, got {n1}, {n2}, {m}")
    std = 1.0 / np.sqrt(m)
    mats = np.empty((m, n1, n2))
    for i in range(m):
        mats[i] = gaussian_matrix(n1, n2, std, derive_seed(seed, i))
    return MeasurementOperator(n1, n2, mats)


def make_identity_operator(n1: int, n2: int) -> MeasurementOperator:
    if min(n1, n2) < 1:
        raise ValueError(f"dimensions must be positive, got {n1}x{n2}")
    return MeasurementOperator(n1, n2)


def apply(op: MeasurementOperator, M) -> np.ndarray:
    return op.apply(M)


def adjoint(op: MeasurementOperator, z) -> np.ndarray:
    return op.adjoint(z)


def estimate_rip_delta(op: MeasurementOperator, probe_rank: int, trials: int, seed: int) -> RipEstimate:
    """Probe ``||A(M)||^2 / ||M||_F^2`` on random rank-``probe_rank`` matrices.

    Each probe is ``L R^T`` with standard Gaussian factors, scaled to unit
    Frobenius norm. Trial ``j`` draws its factors from streams ``(j, 0)`` and
    ``(j, 1)`` of ``seed``.
    """
    if probe_rank < 1 or trials < 1:
        raise ValueError("probe_rank and trials must be at least 1")
    lo, hi = np.inf, -np.inf
    for j in range(trials):
        left = gaussian_matrix(op.n1, probe_rank, 1.0, derive_seed(seed, j, 0))
        right = gaussian_matrix(op.n2, probe_rank, 1.0, derive_seed(seed, j, 1))
        M = left @ right.T
        M /= np.linalg.norm(M)
        y = op.apply(M)
        ratio = float(y @ y)
        lo = min(lo, ratio)
        hi = max(hi, ratio)
    return RipEstimate(delta_low=1.0 - lo, delta_high=hi - 1.0, trials=trials, rank_probed=probe_rank)


__all__ = [
    "MeasurementOperator",
    "RipEstimate",
    "adjoint",
    "apply",
    "estimate_rip_delta",
    "make_gaussian_operator",
    "make_identity_operator",
]
