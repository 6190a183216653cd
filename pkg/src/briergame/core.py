"""The Brier game: outcome spaces, probability forecasts and the quadratic loss.

Outcomes are labelled ``1..n`` everywhere in the public API. Array helpers
work on the last axis so that batches of forecasts can be scored at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SUM_TOL = 1e-9


@dataclass(frozen=True)
class OutcomeSpace:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"an outcome space needs n >= 2 outcomes, got {self.n}")

    def check(self, omega: int) -> int:
        """Validate a 1-based outcome label and return it as an int."""
        omega_i = int(omega)
        if omega_i != omega or not 1 <= omega_i <= self.n:
            raise ValueError(f"outcome {omega} outside 1..{self.n}")
        return omega_i


@dataclass(frozen=True)
class ProbVector:
    """A point of the probability simplex.

    Build it with :meth:`from_values`; components within ``SUM_TOL`` of a unit
    sum are re-normalised and the pre-normalisation deviation is kept.
    """

    p: np.ndarray
    deviation: float = 0.0
    space: OutcomeSpace = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "space", OutcomeSpace(len(self.p)))

    @classmethod
    def from_values(cls, values, tol: float = SUM_TOL) -> "ProbVector":
        p = np.array(values, dtype=float)
        if p.ndim != 1:
            raise ValueError("a probability vector must be one-dimensional")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError(f"probabilities must be finite and non-negative: {p}")
        total = p.sum()
        deviation = float(total - 1.0)
        if abs(deviation) > tol:
            raise ValueError(f"probabilities sum to {total!r}, not 1 (tolerance {tol})")
        p = p / total
        p.setflags(write=False)
        return cls(p, deviation)

    @property
    def n(self) -> int:
        return len(self.p)

    def __array__(self, dtype=None, copy=None):
        return self.p if dtype is None else self.p.astype(dtype)

    def __len__(self):
        return len(self.p)

    def __getitem__(self, i):
        return self.p[i]


def vertex(omega: int, n: int) -> ProbVector:
    """The forecast concentrated on outcome ``omega``."""
    omega = OutcomeSpace(n).check(omega)
    p = np.zeros(n)
    p[omega - 1] = 1.0
    return ProbVector.from_values(p)


def brier_loss(omega: int, gamma) -> float:
    """Squared distance between ``gamma`` and the vertex of ``omega``."""
    g = np.asarray(gamma, dtype=float)
    if g.ndim != 1:
        raise ValueError("brier_loss expects a single forecast; use loss_vectors for batches")
    omega = OutcomeSpace(len(g)).check(omega)
    d = g.copy()
    d[omega - 1] -= 1.0
    return float(np.dot(d, d))


def loss_vectors(preds) -> np.ndarray:
    """Loss of each forecast under every outcome.

    For forecasts of shape ``(..., n)`` returns ``(..., n)`` whose entry
    ``[..., w]`` is the loss when outcome ``w + 1`` happens:
    ``sum(p**2) - 2 p[w] + 1``.
    """
    p = np.asarray(preds, dtype=float)
    return np.sum(p * p, axis=-1, keepdims=True) - 2.0 * p + 1.0


def take_outcome(values, outcomes) -> np.ndarray:
    """Pick ``values[..., outcome - 1]`` for 1-based outcomes of shape ``values.shape[:-1]``."""
    values = np.asarray(values)
    idx = np.asarray(outcomes, dtype=np.intp) - 1
    return np.take_along_axis(values, idx[..., None], axis=-1)[..., 0]
