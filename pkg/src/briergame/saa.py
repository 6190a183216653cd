"""Strong Aggregating Algorithm for the Brier game.

Weights are kept on the log scale and never normalised. The generalized
prediction is turned into a forecast by water-filling: find the level ``s``
with ``sum((s - G)^+) = 2`` and predict ``(s - G)^+ / 2``.

All functions broadcast over leading batch axes: expert forecasts have shape
``(..., K, n)``, log-weights ``(..., K)`` and generalized predictions
``(..., n)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import OutcomeSpace, loss_vectors, take_outcome


@dataclass(frozen=True)
class SaaState:
    log_weights: np.ndarray
    n_outcomes: int
    eta: float = 1.0

    name = "saa"

    def __post_init__(self):
        OutcomeSpace(self.n_outcomes)
        if not 0 < self.eta <= 1:
            raise ValueError(
                f"learning rate {self.eta} outside (0, 1]: the Brier game is not "
                "eta-mixable for eta > 1, so the loss bound would fail"
            )
        if np.shape(self.log_weights)[-1:] in ((), (0,)):
            raise ValueError("need at least one expert")

    @classmethod
    def initial(cls, n_experts: int, n_outcomes: int, eta: float = 1.0, batch_shape=()):
        return cls(np.zeros((*batch_shape, n_experts)), n_outcomes, eta)

    @property
    def n_experts(self) -> int:
        return self.log_weights.shape[-1]

    def predict(self, expert_preds) -> np.ndarray:
        return predict(self, expert_preds)

    def loss_vector(self, expert_preds) -> np.ndarray:
        return loss_vectors(self.predict(expert_preds))

    def update(self, outcome, expert_preds) -> "SaaState":
        return update(self, outcome, expert_preds)


def _check_preds(state: SaaState, expert_preds) -> np.ndarray:
    preds = np.asarray(expert_preds, dtype=float)
    if preds.ndim < 2 or preds.shape[-2] != state.n_experts:
        raise ValueError(f"expected {state.n_experts} expert forecasts, got shape {preds.shape}")
    if preds.shape[-1] != state.n_outcomes:
        raise ValueError(f"expected forecasts over {state.n_outcomes} outcomes, got {preds.shape[-1]}")
    return preds


def mix_losses(state: SaaState, expert_preds) -> np.ndarray:
    """Generalized prediction ``G(w) = -(1/eta) ln sum_k w_k exp(-eta loss_k(w))``."""
    preds = _check_preds(state, expert_preds)
    losses = loss_vectors(preds)  # (..., K, n)
    a = state.log_weights[..., :, None] - state.eta * losses
    return -logsumexp(a, axis=-2) / state.eta


def solve_threshold(G) -> np.ndarray:
    """The unique ``s`` solving ``sum_i (s - G_i)^+ = 2``.

    Exact: sort ``G`` and take the largest active set ``m`` whose candidate
    level ``(2 + sum of the m smallest)/m`` lies above its m-th entry.
    """
    g = np.asarray(G, dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("generalized prediction must be finite")
    base = g.min(axis=-1, keepdims=True)
    gs = np.sort(g - base, axis=-1)
    m = np.arange(1, g.shape[-1] + 1)
    levels = (2.0 + np.cumsum(gs, axis=-1)) / m
    active = np.count_nonzero(gs < levels, axis=-1)
    s = np.take_along_axis(levels, active[..., None] - 1, axis=-1)
    return (s + base)[..., 0] if g.ndim > 1 else float((s + base)[0])


def _water_fill(g: np.ndarray):
    base = g.min(axis=-1, keepdims=True)
    shifted = g - base
    s = np.asarray(solve_threshold(shifted))[..., None]
    u = np.maximum(s - shifted, 0.0) / 2.0
    return u, s, base


def substitute(G) -> np.ndarray:
    """Forecast ``(s - G)^+ / 2`` whose losses sit below ``G`` shifted by the largest constant."""
    u, _, _ = _water_fill(np.asarray(G, dtype=float))
    return u


def substitute_with_shift(G):
    """Both :func:`substitute` and :func:`max_shift` from one water-filling pass."""
    u, s, base = _water_fill(np.asarray(G, dtype=float))
    t = s[..., 0] + base[..., 0] - 1.0 - np.sum(u * u, axis=-1)
    return u, (t if t.ndim else float(t))


def max_shift(G):
    """Largest ``t`` such that ``G - t`` still dominates some forecast's loss vector."""
    return substitute_with_shift(G)[1]


def predict(state: SaaState, expert_preds) -> np.ndarray:
    return substitute(mix_losses(state, expert_preds))


def update(state: SaaState, outcome, expert_preds) -> SaaState:
    preds = _check_preds(state, expert_preds)
    incurred = take_outcome(loss_vectors(preds), np.asarray(outcome)[..., None])
    return SaaState(state.log_weights - state.eta * incurred, state.n_outcomes, state.eta)
