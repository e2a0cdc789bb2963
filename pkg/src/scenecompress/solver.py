"""Sequential minimal optimization over the capped simplex.

Each step picks two coordinates ``(i, j)``, keeps their joint mass
``delta = alpha_i + alpha_j`` fixed and minimizes the cost exactly along the
feasible segment ``alpha_i in [max(0, delta - cap), min(cap, delta)]``.

The solver keeps ``theta[i] = sum_l alpha_l K[i, l]`` up to date, so a step
touches only the two kernel rows of the pair, and only when mass actually
moves.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import CompressionParams
from .kernel import KernelRowCache, cache_capacity, kernel_weighted_sum

log = logging.getLogger(__name__)

# below this, 1 - K_ij is treated as zero and the pair subproblem as linear
DEGENERATE_GAP = 1e-12

_DRAW_BATCH = 8192


def min_support_size(nu: float, m: int) -> int:
    """``ceil(nu * m)``, snapping products within rounding noise of an integer."""
    prod = nu * m
    near = round(prod)
    if abs(prod - near) <= 1e-9 * max(1.0, prod):
        return max(1, int(near))
    return max(1, math.ceil(prod))


@dataclass
class AlphaDistribution:
    alpha: np.ndarray
    cap: float

    @property
    def m(self) -> int:
        return len(self.alpha)

    def support(self, threshold: float = 0.0) -> np.ndarray:
        return np.flatnonzero(self.alpha > threshold)

    def violations(self, nu: float, sum_tol: float = 1e-9, box_tol: float = 1e-12) -> list[str]:
        """Describe every broken feasibility invariant (empty list when feasible)."""
        a = self.alpha
        out = []
        s = math.fsum(a)
        if abs(s - 1.0) > sum_tol:
            out.append(f"sum(alpha) = {s!r}")
        if a.min() < 0.0:
            out.append(f"min(alpha) = {a.min()!r} < 0")
        if a.max() > self.cap + box_tol:
            out.append(f"max(alpha) = {a.max()!r} > cap {self.cap!r}")
        need = min_support_size(nu, self.m)
        have = int(np.count_nonzero(a > 0))
        if have < need:
            out.append(f"{have} positive entries < {need}")
        return out


def initialize(scores, nu: float, m: int) -> AlphaDistribution:
    """Feasible start: mass ``1 / (nu m)`` on the ``ceil(nu m)`` best-scoring points.

    Ties go to the lower index. When ``nu m`` is not an integer the last
    (lowest-scoring) selected point takes the remainder so the total is 1.
    """
    d = np.asarray(scores, dtype=np.float64)
    if m < 1 or d.shape != (m,):
        raise ValueError(f"need {m} >= 1 scores, got shape {d.shape}")
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    cap = 1.0 / (nu * m)
    n = min_support_size(nu, m)
    order = np.argsort(-d, kind="stable")[:n]
    alpha = np.zeros(m)
    alpha[order] = cap
    if abs(n - nu * m) > 1e-9 * max(1.0, nu * m):
        alpha[order[-1]] = 1.0 - (n - 1) * cap
    return AlphaDistribution(alpha, cap)


def unboxed_optimum(theta_i, theta_j, d_i, d_j, k_ij, delta, tau) -> float:
    """Stationary point of the pair cost along ``alpha_i + alpha_j = delta``.

    ``theta_*`` are the kernel-weighted sums over all other coordinates.
    Undefined for ``k_ij == 1``.
    """
    t = tau * (d_i - d_j) - 2.0 * theta_i + 2.0 * theta_j
    return 0.5 * (t / (2.0 * (1.0 - k_ij)) + delta)


class _ActiveSet:
    """Index set with O(1) add, discard and uniform pick."""

    def __init__(self, members):
        self.items = [int(i) for i in members]
        self.pos = {i: k for k, i in enumerate(self.items)}

    def __len__(self):
        return len(self.items)

    def add(self, i):
        if i not in self.pos:
            self.pos[i] = len(self.items)
            self.items.append(i)

    def discard(self, i):
        k = self.pos.pop(i, None)
        if k is None:
            return
        last = self.items.pop()
        if k < len(self.items):
            self.items[k] = last
            self.pos[last] = k

    def pick(self, u: float) -> int:
        n = len(self.items)
        return self.items[min(int(u * n), n - 1)]


@dataclass
class SolverState:
    alpha: np.ndarray
    cap: float
    nu: float
    tau: float
    scores: np.ndarray
    theta: np.ndarray
    kernel: KernelRowCache
    rng: np.random.Generator
    iteration: int = 0
    active: Optional[_ActiveSet] = None
    _draws: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    _next: int = 0

    @classmethod
    def start(cls, scene, scores, params: CompressionParams, init: AlphaDistribution | None = None):
        x = np.asarray(getattr(scene, "positions", scene), dtype=np.float64)
        m = len(x)
        d = np.asarray(scores, dtype=np.float64)
        if d.shape != (m,):
            raise ValueError(f"scores have shape {d.shape}, expected ({m},)")
        if init is None:
            init = initialize(d, params.nu, m)
        alpha = init.alpha.copy()
        kernel = KernelRowCache(x, params.sigma, cache_capacity(m, params.kernel_cache_mb))
        theta = kernel_weighted_sum(x, params.sigma, alpha)
        active = _ActiveSet(np.flatnonzero(alpha > 0)) if params.pair_strategy == "active" else None
        return cls(
            alpha=alpha,
            cap=init.cap,
            nu=params.nu,
            tau=params.tau,
            scores=d,
            theta=theta,
            kernel=kernel,
            rng=np.random.default_rng(params.seed),
            active=active,
        )

    @property
    def m(self) -> int:
        return len(self.alpha)

    def distribution(self) -> AlphaDistribution:
        return AlphaDistribution(self.alpha.copy(), self.cap)

    def uniform(self) -> float:
        if self._next >= len(self._draws):
            self._draws = self.rng.random(_DRAW_BATCH)
            self._next = 0
        u = self._draws[self._next]
        self._next += 1
        return float(u)

    def objective(self) -> float:
        """Cost from the maintained sums, O(m)."""
        return float(self.alpha @ self.theta - self.tau * (self.scores @ self.alpha))

    def recompute_theta(self) -> np.ndarray:
        return kernel_weighted_sum(self.kernel.positions, self.kernel.sigma, self.alpha)


def select_pair(state: SolverState, strategy: str = "uniform") -> tuple[int, int]:
    """Draw ``(i, j)``, ``i != j``, from the state's random stream.

    ``uniform`` picks both uniformly among distinct indices. ``active`` picks
    ``i`` among the indices with positive mass and ``j`` among the rest.
    """
    m = state.m
    if m < 2:
        raise ValueError("pair selection needs at least two points")
    if strategy == "uniform":
        i = min(int(state.uniform() * m), m - 1)
    elif strategy == "active":
        if state.active is None:
            state.active = _ActiveSet(np.flatnonzero(state.alpha > 0))
        i = state.active.pick(state.uniform())
    else:
        raise ValueError(f"unknown pair strategy {strategy!r}")
    j = min(int(state.uniform() * (m - 1)), m - 2)
    if j >= i:
        j += 1
    return i, j


def smo_step(state: SolverState, i: int, j: int) -> bool:
    """Optimize the pair ``(i, j)`` in place. Returns True if ``alpha`` changed."""
    alpha = state.alpha
    ai = float(alpha[i])
    aj = float(alpha[j])
    delta = ai + aj
    if delta <= 0.0:
        return False
    cap = state.cap
    lo = delta - cap if delta > cap else 0.0
    hi = cap if cap < delta else delta
    if lo >= hi:
        return False

    row_i = state.kernel.row(i)
    kij = float(row_i[j])
    theta = state.theta
    d = state.scores
    theta_i = float(theta[i]) - ai - aj * kij
    theta_j = float(theta[j]) - aj - ai * kij
    gap = 1.0 - kij
    if gap < DEGENERATE_GAP:
        # the pair cost is linear in alpha_i with slope -t
        t = state.tau * (float(d[i]) - float(d[j])) - 2.0 * theta_i + 2.0 * theta_j
        if t > 0:
            new_i = hi
        elif t < 0:
            new_i = lo
        else:
            return False
    else:
        new_i = unboxed_optimum(theta_i, theta_j, float(d[i]), float(d[j]), kij, delta, state.tau)
        new_i = max(lo, min(hi, new_i))
    if new_i == ai:
        return False
    new_j = delta - new_i
    alpha[i] = new_i
    alpha[j] = new_j
    row_j = state.kernel.row(j)
    theta += (new_i - ai) * row_i
    theta += (new_j - aj) * row_j
    if state.active is not None:
        for k, v in ((i, new_i), (j, new_j)):
            if v > 0.0:
                state.active.add(k)
            else:
                state.active.discard(k)
    return True


def run(
    state: SolverState,
    iterations: int,
    strategy: str = "uniform",
    callback: Callable[[SolverState, int, int], None] | None = None,
    log_every: int = 0,
) -> SolverState:
    """Apply ``iterations`` rounds of pair selection + update to ``state``."""
    if state.m < 2:
        return state
    for _ in range(iterations):
        i, j = select_pair(state, strategy)
        smo_step(state, i, j)
        state.iteration += 1
        if callback is not None:
            callback(state, i, j)
        if log_every and state.iteration % log_every == 0:
            log.info(
                "iter %d  J=%.12g  positive=%d",
                state.iteration,
                state.objective(),
                int(np.count_nonzero(state.alpha > 0)),
            )
    return state


def solve(scene, scores, params: CompressionParams, callback=None, log_every: int = 0) -> AlphaDistribution:
    """Initialize and run ``params.iterations`` SMO rounds; returns the final distribution."""
    state = SolverState.start(scene, scores, params)
    run(state, params.iterations, params.pair_strategy, callback=callback, log_every=log_every)
    return state.distribution()
