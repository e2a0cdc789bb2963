"""Cost function evaluation and a dense projected-gradient reference solver.

``J(alpha) = alpha^T K alpha - tau * d^T alpha``, minimized over the capped
simplex ``{sum(alpha) = 1, 0 <= alpha_i <= 1 / (nu m)}``. The reference solver
materializes ``K`` and is only meant for scenes of a few hundred points.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .config import CompressionParams
from .kernel import BLOCK_ELEMENTS, _rbf_block, gram_matrix


@dataclass(frozen=True)
class ObjectiveBreakdown:
    coverage: float
    distinctiveness: float
    total: float

    def to_dict(self) -> dict:
        return asdict(self)


def _positions(scene_or_positions) -> np.ndarray:
    return np.asarray(getattr(scene_or_positions, "positions", scene_or_positions), dtype=np.float64)


def coverage(alpha: np.ndarray, positions: np.ndarray, sigma: float) -> float:
    """``alpha^T K alpha`` restricted to the support of ``alpha``, in blocks."""
    idx = np.flatnonzero(alpha)
    if idx.size == 0:
        return 0.0
    xs = positions[idx]
    a = alpha[idx]
    step = max(1, BLOCK_ELEMENTS // idx.size)
    total = 0.0
    for start in range(0, idx.size, step):
        stop = min(start + step, idx.size)
        k = _rbf_block(xs[start:stop], xs, sigma)
        total += float(a[start:stop] @ (k @ a))
    return total


def evaluate(alpha, scene, scores, tau: float, sigma: float) -> ObjectiveBreakdown:
    """Exact coverage, distinctiveness and total cost of ``alpha``.

    ``alpha`` only has to be non-negative; the sum and box constraints are not
    checked here.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    x = _positions(scene)
    d = np.asarray(scores, dtype=np.float64)
    if alpha.shape != (len(x),) or d.shape != (len(x),):
        raise ValueError(
            f"length mismatch: alpha {alpha.shape}, scores {d.shape}, {len(x)} points"
        )
    if (alpha < 0).any():
        raise ValueError("alpha has negative entries")
    c = coverage(alpha, x, sigma)
    dist = float(d @ alpha)
    return ObjectiveBreakdown(coverage=c, distinctiveness=dist, total=c - tau * dist)


def project_capped_simplex(v: np.ndarray, cap: float, tol: float = 1e-12) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{sum(x) = 1, 0 <= x_i <= cap}``.

    Bisection on the shift ``lam`` in ``clip(v - lam, 0, cap)``, followed by a
    closed-form solve for ``lam`` on the free coordinates the bisection found.
    """
    v = np.asarray(v, dtype=np.float64)
    if cap * len(v) < 1.0 - 1e-12:
        raise ValueError("capped simplex is empty: cap * m < 1")

    def mass(lam):
        return np.clip(v - lam, 0.0, cap).sum()

    lo = float(v.min()) - cap  # mass(lo) = m * cap >= 1
    hi = float(v.max())  # mass(hi) = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if mass(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    shifted = v - lam
    free = (shifted > 0) & (shifted < cap)
    if free.any():
        n_cap = np.count_nonzero(shifted >= cap)
        refined = (v[free].sum() + n_cap * cap - 1.0) / np.count_nonzero(free)
        x = np.clip(v - refined, 0.0, cap)
        if abs(x.sum() - 1.0) <= abs(mass(lam) - 1.0):
            return x
    return np.clip(shifted, 0.0, cap)


def gershgorin_bound(k: np.ndarray) -> float:
    """Upper bound on the largest eigenvalue of a symmetric matrix."""
    return float(np.abs(k).sum(axis=1).max())


def min_eigenvalue(k: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(k)[0])


def oracle_solve(
    scene,
    scores,
    params: CompressionParams,
    max_iters: int = 100_000,
    tol: float = 1e-14,
    start: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Projected gradient descent on the dense problem.

    Step size ``1 / (2 * gershgorin(K))``. Stops once two successive objective
    values differ by less than ``tol`` or after ``max_iters`` iterations.
    Starts from ``start`` if given, else from the top-score initialization.
    Returns ``(alpha, J(alpha))``.
    """
    from .solver import initialize

    x = _positions(scene)
    m = len(x)
    d = np.asarray(scores, dtype=np.float64)
    k = gram_matrix(x, params.sigma)
    cap = 1.0 / (params.nu * m)
    tau = params.tau
    alpha = initialize(d, params.nu, m).alpha.copy() if start is None else np.array(start, dtype=float)
    step = 1.0 / (2.0 * gershgorin_bound(k))

    def cost(a):
        return float(a @ k @ a - tau * (d @ a))

    j_prev = cost(alpha)
    for _ in range(max_iters):
        grad = 2.0 * (k @ alpha) - tau * d
        alpha = project_capped_simplex(alpha - step * grad, cap)
        j = cost(alpha)
        if abs(j_prev - j) < tol:
            j_prev = j
            break
        j_prev = j
    return alpha, j_prev
