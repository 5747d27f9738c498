"""Ground truth, measurements and initializations."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import derive_seed, gaussian_matrix
from .sensing import MeasurementOperator

MODES = ("symmetric", "asymmetric")


@dataclass(frozen=True)
class GroundTruth:
    n: int
    r: int
    singulars: tuple[float, ...]

    @property
    def Sigma(self) -> np.ndarray:
        S = np.zeros((self.n, self.n))
        idx = np.arange(self.r)
        S[idx, idx] = self.singulars
        return S

    @property
    def Sigma_r(self) -> np.ndarray:
        return np.diag(np.asarray(self.singulars, dtype=np.float64))

    @property
    def kappa(self) -> float:
        return self.singulars[0] / self.singulars[-1]


def make_ground_truth(n: int, r: int, singulars) -> GroundTruth:
    sv = tuple(float(s) for s in singulars)
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    if len(sv) != r:
        raise ValueError(f"expected {r} singular values, got {len(sv)}")
    if any(not np.isfinite(s) or s <= 0 for s in sv):
        raise ValueError(f"singular values must be positive and finite, got {sv}")
    if any(a < b for a, b in zip(sv, sv[1:])):
        raise ValueError(f"singular values must be nonincreasing, got {sv}")
    return GroundTruth(n=int(n), r=int(r), singulars=sv)


@dataclass
class ProblemInstance:
    truth: GroundTruth
    op: MeasurementOperator
    y: np.ndarray
    k: int
    mode: str
    notes: list[str] = field(default_factory=list)
    Sigma: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.Sigma = self.truth.Sigma

    @property
    def n(self) -> int:
        return self.truth.n

    @property
    def r(self) -> int:
        return self.truth.r

    def normal_residual(self, P: np.ndarray) -> np.ndarray:
        """``A*A(P - Sigma)``, computed as ``A*(A(P) - y)``."""
        if self.op.is_identity:
            return P - self.Sigma
        return self.op.adjoint(self.op.apply(P) - self.y)

    def train_loss(self, F: np.ndarray, G: np.ndarray) -> float:
        """``0.5 * ||A(F G^T) - y||^2``."""
        z = self.op.apply(F @ G.T) - self.y
        return 0.5 * float(z @ z)


def make_measurements(truth: GroundTruth, op: MeasurementOperator, k: int, mode: str) -> ProblemInstance:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if (op.n1, op.n2) != (truth.n, truth.n):
        raise ValueError(f"operator acts on {op.n1}x{op.n2} matrices but the truth is {truth.n}x{truth.n}")
    if k > truth.n:
        raise ValueError(f"search rank k={k} exceeds n={truth.n}")
    if k < 1:
        raise ValueError(f"search rank must be positive, got {k}")
    notes = []
    if k < truth.r:
        msg = f"under-parameterized run: k={k} < r={truth.r}"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    y = op.apply(truth.Sigma)
    return ProblemInstance(truth=truth, op=op, y=y, k=int(k), mode=mode, notes=notes)


@dataclass(frozen=True)
class InitSpec:
    """How to draw the starting factors.

    ``scheme`` is ``"symmetric_gaussian"``, ``"asymmetric_imbalanced"`` or
    ``"toy"``; ``ratio`` is the scale of G relative to F for the imbalanced
    scheme.
    """

    scheme: str
    alpha: float
    ratio: float = 1.0 / 3.0
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in ("symmetric_gaussian", "asymmetric_imbalanced", "toy"):
            raise ValueError(f"unknown init scheme {self.scheme!r}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.ratio <= 1:
            raise ValueError(f"ratio must lie in (0, 1], got {self.ratio}")


def init_symmetric(n: int, k: int, alpha: float, seed: int) -> np.ndarray:
    """``alpha * X`` with X entries N(0, 1/k)."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return alpha * gaussian_matrix(n, k, 1.0 / np.sqrt(k), seed)


def init_asymmetric_imbalanced(
    n: int, k: int, alpha: float, ratio: float = 1.0 / 3.0, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """F0 = alpha * F~, G0 = ratio * alpha * G~ with F~, G~ entries N(0, 1/n).

    F~ and G~ come from streams 0 and 1 of ``seed``.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not 0 < ratio <= 1:
        raise ValueError(f"ratio must lie in (0, 1], got {ratio}")
    std = 1.0 / np.sqrt(n)
    F = alpha * gaussian_matrix(n, k, std, derive_seed(seed, 0))
    G = (ratio * alpha) * gaussian_matrix(n, k, std, derive_seed(seed, 1))
    return F, G


def init_toy(n: int, r: int, k: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    if k != r + 1:
        raise ValueError(f"the toy initialization needs k = r + 1, got r={r}, k={k}")
    if n <= r:
        raise ValueError(f"the toy initialization needs n > r, got n={n}, r={r}")
    F = np.zeros((n, k))
    G = np.zeros((n, k))
    F[np.arange(k), np.arange(k)] = alpha
    G[np.arange(r), np.arange(r)] = alpha
    G[r, r] = alpha / 3.0
    return F, G
