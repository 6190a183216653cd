"""Numerical checks of when the Brier game is eta-mixable.

Two independent routes:

* the sign of the Gauss-Kronecker curvature of the exponentiated loss
  surface, which is proportional to
  ``sum_i u_i prod_{j != i} (1 - 2 eta u_j)``;
* a direct search for two forecasts and a mixing weight whose exponentiated
  mixture is not dominated by any single forecast. The water-filling
  substitution attains the best uniform shift, so it is the only candidate
  that needs checking.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass

import numpy as np

from .core import loss_vectors
from .saa import substitute_with_shift

VIOLATION_TOL = 1e-9
STRESS_EPS = 1e-3


@dataclass(frozen=True)
class SimplexPoint:
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 1 or len(u) < 2:
            raise ValueError("a simplex point needs at least two coordinates")
        if np.any(u <= 0):
            raise ValueError("coordinates must be strictly positive (interior point)")
        if abs(u.sum() - 1.0) > 1e-12:
            raise ValueError(f"coordinates sum to {u.sum()!r}, not 1")
        object.__setattr__(self, "u", u)

    def __array__(self, dtype=None, copy=None):
        return self.u if dtype is None else self.u.astype(dtype)


@dataclass(frozen=True)
class Witness:
    gamma1: list
    gamma2: list
    alpha: float
    outcome: int
    violation: float


@dataclass(frozen=True)
class MixabilityReport:
    eta: float
    n: int
    grid_resolution: int
    verdict: str
    witness: Witness | None = None
    worst_shift: float = 0.0
    pairs_checked: int = 0

    def __post_init__(self):
        if (self.verdict == "counterexample") != (self.witness is not None):
            raise ValueError("a witness must accompany a counterexample verdict, and only then")

    def to_dict(self) -> dict:
        return asdict(self)


def curvature_value(u, eta: float):
    """Quantity with the sign of the Gauss-Kronecker curvature at interior point ``u``.

    Broadcasts over leading axes of ``u``.
    """
    u = np.asarray(u, dtype=float)
    t = 1.0 - 2.0 * eta * u
    n = u.shape[-1]
    others = np.where(np.eye(n, dtype=bool), 1.0, t[..., None, :])
    val = np.sum(u * np.prod(others, axis=-1), axis=-1)
    return val if val.ndim else float(val)


def exp_map(f, eta: float) -> np.ndarray:
    return np.exp(-eta * np.asarray(f, dtype=float))


def stress_points(n: int, eps: float = STRESS_EPS) -> np.ndarray:
    """Points near (1/2, 1/2, 0, ..., 0) where curvature first turns negative for eta > 1."""
    if n == 2:
        return np.array([[0.5, 0.5]])
    base = np.full(n, 2.0 * eps / (n - 2))
    base[:2] = 0.5 - eps
    return np.array([np.roll(base, k) for k in range(n)])


def curvature_sign_sweep(n: int, eta: float, samples: int, seed: int = 0):
    """Minimum of :func:`curvature_value` over Dirichlet(1, ..., 1) samples plus stress points.

    Returns ``(min_value, argmin_point)``.
    """
    if n < 2 or samples < 1:
        raise ValueError("need n >= 2 and at least one sample")
    rng = np.random.default_rng(seed)
    pts = np.vstack([rng.dirichlet(np.ones(n), size=samples), stress_points(n)])
    # Dirichlet draws can touch the boundary in floating point.
    pts = pts[np.all(pts > 0, axis=1)]
    vals = curvature_value(pts, eta)
    i = int(np.argmin(vals))
    return float(vals[i]), pts[i]


def simplex_grid(n: int, resolution: int) -> np.ndarray:
    """All points of the simplex with coordinates in ``{0, 1/r, ..., 1}``."""
    pts = [
        c + (resolution - sum(c),)
        for c in itertools.product(range(resolution + 1), repeat=n - 1)
        if sum(c) <= resolution
    ]
    return np.array(pts, dtype=float) / resolution


def mixability_search(eta: float, n: int, grid_resolution: int, alphas=None) -> MixabilityReport:
    """Look for a violation of eta-mixability among grid forecasts.

    For every pair of grid forecasts and every mixing weight, the
    exponentiated mixture is compared with the exponentiated losses of the
    substituted forecast; the largest shortfall above ``VIOLATION_TOL`` is
    returned as the witness. The default weights are symmetric about 1/2,
    so unordered pairs cover both orders.
    """
    if n not in (2, 3):
        raise ValueError(f"grid search supports n = 2 or 3, got {n}")
    if grid_resolution < 10:
        raise ValueError("grid_resolution must be at least 10")
    grid = simplex_grid(n, grid_resolution)
    if alphas is None:
        alphas = np.union1d([0.5], np.linspace(0.0, 1.0, grid_resolution + 1))
    e = exp_map(loss_vectors(grid), eta)
    i1, i2 = np.triu_indices(len(grid), k=1)
    e1, e2 = e[i1], e[i2]

    best = (-np.inf, None)
    worst_shift = np.inf
    for alpha in alphas:
        mix = alpha * e1 + (1.0 - alpha) * e2
        G = -np.log(mix) / eta
        delta, shift = substitute_with_shift(G)
        worst_shift = min(worst_shift, float(np.min(shift)))
        gap = mix - exp_map(loss_vectors(delta), eta)
        flat = int(np.argmax(gap))
        row, col = divmod(flat, n)
        if gap[row, col] > best[0]:
            best = (float(gap[row, col]), (row, col, float(alpha)))

    witness = None
    if best[0] > VIOLATION_TOL:
        row, col, alpha = best[1]
        witness = Witness(
            gamma1=grid[i1[row]].tolist(),
            gamma2=grid[i2[row]].tolist(),
            alpha=alpha,
            outcome=col + 1,
            violation=best[0],
        )
    return MixabilityReport(
        eta=eta,
        n=n,
        grid_resolution=grid_resolution,
        verdict="counterexample" if witness else "consistent",
        witness=witness,
        worst_shift=worst_shift,
        pairs_checked=len(i1) * len(alphas),
    )
