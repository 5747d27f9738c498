"""Dense linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. The routines
here add shape checks and the few algorithms the rest of the code depends on
being reproducible: a power-iteration spectral norm, a one-sided Jacobi thin
SVD, a cyclic Jacobi symmetric eigensolver and a seeded Gaussian sampler.

Random numbers come from numpy's ``PCG64`` bit generator (128-bit state,
64-bit output) and Gaussian variates from ``Generator.standard_normal``
(ziggurat method). Matrices are filled in row-major (C) order.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

# Largest seed accepted by gaussian_matrix / derive_seed.
SEED_MAX = 2**64 - 1

# thin_svd treats singular values below RANK_TOL * ||a||_F as exact zeros.
RANK_TOL = 1e-14


class ConvergenceError(ArithmeticError):
    """An iterative routine ran out of budget.

    ``estimate`` carries the last iterate's value (e.g. the last norm
    estimate or the remaining off-diagonal mass).
    """

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class ThinSvd(NamedTuple):
    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a 2-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got an array of shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("matrix has non-finite entries")
    return arr


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}: "
            f"inner dimensions {a.shape[1]} and {b.shape[0]} differ"
        )
    return a @ b


def transpose(a) -> np.ndarray:
    return np.ascontiguousarray(as_matrix(a).T)


def frobenius_norm(a) -> float:
    a = as_matrix(a)
    amax = float(np.max(np.abs(a))) if a.size else 0.0
    if amax == 0.0:
        return 0.0
    # scaled so that squaring cannot underflow or overflow
    return amax * float(np.linalg.norm(a / amax))


def spectral_norm(a, tol: float = 1e-12, max_iter: int = 5000) -> float:
    """Largest singular value by power iteration on the smaller Gram matrix.

    The input is first scaled to unit max entry. Starts from the normalized
    all-ones vector. If the iterate collapses (norm below 1e-300) it is
    restarted once from a fixed non-constant vector and then from the heaviest column of the Gram matrix, which cannot be
    annihilated by a nonzero PSD matrix. Stops when the Rayleigh quotient
    changes by less than ``tol`` relative.
    """
    a = as_matrix(a)
    if not a.any():
        return 0.0
    amax = float(np.max(np.abs(a)))
    a = a / amax
    gram = a.T @ a if a.shape[1] <= a.shape[0] else a @ a.T
    q = gram.shape[0]

    starts = [
        np.ones(q),
        np.cos(1.0 + np.arange(q) * 0.6180339887498949),
        gram[:, int(np.argmax(np.diag(gram)))].copy(),
    ]
    v = starts.pop(0)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = gram @ v
        wn = np.linalg.norm(w)
        if wn < 1e-300:
            if not starts:
                return 0.0  # unreachable for a nonzero input
            v = starts.pop(0)
            v /= np.linalg.norm(v)
            continue
        new = float(v @ w)
        v = w / wn
        if new > 0.0 and abs(new - lam) <= tol * new:
            return amax * math.sqrt(new)
        lam = new
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations", amax * math.sqrt(max(lam, 0.0))
    )


def orthonormal_complement(rows: np.ndarray) -> np.ndarray:
    """Orthonormal rows spanning the complement of ``rows``' row space.

    ``rows`` (p x d) must have orthonormal rows. Canonical basis vectors are
    orthogonalized against the current basis (two Gram-Schmidt passes) in
    index order and kept when enough of them survives, so the result is
    deterministic.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    p, d = rows.shape
    basis = [r for r in rows] if p else []
    extra = []
    for i in range(d):
        if len(basis) == d:
            break
        v = np.zeros(d)
        v[i] = 1.0
        for _ in range(2):
            for b in basis:
                v -= (b @ v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            v /= nv
            basis.append(v)
            extra.append(v)
    if not extra:
        return np.zeros((0, d))
    return np.array(extra)


def thin_svd(a, tol: float = 1e-13, max_sweeps: int = 60) -> ThinSvd:
    """Thin SVD by one-sided (Hestenes) Jacobi.

    Columns of a working copy are rotated pairwise until every pair is
    orthogonal to ``tol`` relative to the product of their norms. Wide inputs
    are handled through the transpose.
    """
    a = as_matrix(a)
    rows, cols = a.shape
    if rows < cols:
        left, s, right = thin_svd(a.T, tol=tol, max_sweeps=max_sweeps)
        return ThinSvd(right.T.copy(), s, left.T.copy())

    # Work on a copy scaled to unit max entry so squared norms cannot
    # overflow or underflow.
    amax = float(np.max(np.abs(a))) if a.size else 0.0
    work = a / amax if amax > 0.0 else a.copy()
    vmat = np.eye(cols)
    # Columns whose squared norm falls to this level are rounding noise of a
    # rank-deficient input; they are not rotated and count as zero.
    negligible = (RANK_TOL * float(np.linalg.norm(work))) ** 2
    for _ in range(max_sweeps):
        worst = 0.0
        for i in range(cols - 1):
            for j in range(i + 1, cols):
                ci = work[:, i]
                cj = work[:, j]
                alpha = float(ci @ ci)
                beta = float(cj @ cj)
                gamma = float(ci @ cj)
                if gamma == 0.0 or alpha <= negligible or beta <= negligible:
                    continue
                rel = abs(gamma) / (math.sqrt(alpha) * math.sqrt(beta))
                if rel <= tol:
                    continue
                worst = max(worst, rel)
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                wi = ci.copy()
                work[:, i] = c * wi - s * cj
                work[:, j] = s * wi + c * work[:, j]
                vi = vmat[:, i].copy()
                vmat[:, i] = c * vi - s * vmat[:, j]
                vmat[:, j] = s * vi + c * vmat[:, j]
        if worst == 0.0:
            break
    else:
        raise ConvergenceError(
            f"one-sided Jacobi did not converge in {max_sweeps} sweeps "
            f"(largest relative column coupling {worst:.3e})",
            worst,
        )

    sing = np.linalg.norm(work, axis=0)
    order = np.argsort(-sing, kind="stable")
    sing = sing[order]
    work = work[:, order]
    right = vmat[:, order].T.copy()

    left = np.zeros_like(work)
    good = sing > max(1e-300, math.sqrt(negligible))
    left[:, good] = work[:, good] / sing[good]
    if not good.all():
        sing[~good] = 0.0
        fill = orthonormal_complement(left[:, good].T)
        left[:, ~good] = fill[: int((~good).sum())].T
    return ThinSvd(left, sing * amax if amax > 0.0 else sing, right)


def _jacobi_eigen(s: np.ndarray, tol: float, max_sweeps: int) -> np.ndarray:
    a = np.array(s, dtype=np.float64)
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n)
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(a[offmask] ** 2)))
        if off <= tol * scale:
            return np.diag(a).copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * (abs(a[p, p]) + abs(a[q, q])) or abs(apq) < 1e-300:
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                rp = a[p, :].copy()
                a[p, :] = c * rp - sn * a[q, :]
                a[q, :] = sn * rp + c * a[q, :]
                cp = a[:, p].copy()
                a[:, p] = c * cp - sn * a[:, q]
                a[:, q] = sn * cp + c * a[:, q]
    raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps", off)


def sym_eigvals(s, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """All eigenvalues (ascending) of the symmetrized input, by cyclic Jacobi."""
    s = as_matrix(s)
    if s.shape[0] != s.shape[1]:
        raise ValueError(f"eigenvalues need a square matrix, got {s.shape[0]}x{s.shape[1]}")
    sym = 0.5 * (s + s.T)
    return np.sort(_jacobi_eigen(sym, tol, max_sweeps))


def sym_eig_range(s, tol: float = 1e-12) -> tuple[float, float]:
    vals = sym_eigvals(s, tol=tol)
    return float(vals[0]), float(vals[-1])


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def derive_seed(seed: int, *keys: int) -> int:
    """Child seed for stream ``keys`` of ``seed`` (numpy SeedSequence spawn key)."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


def gaussian_matrix(rows: int, cols: int, std: float, seed: int) -> np.ndarray:
    if not std > 0:
        raise ValueError(f"std must be positive, got {std}")
    rng = np.random.Generator(np.random.PCG64(_check_seed(seed)))
    return std * rng.standard_normal((int(rows), int(cols)))
