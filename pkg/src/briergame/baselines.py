"""Comparison algorithms for prediction with expert advice.

Each algorithm is an immutable state object with the same surface as
:class:`briergame.saa.SaaState`: ``predict(expert_preds)``,
``loss_vector(expert_preds)`` (the loss it suffers under each outcome; an
expectation for the randomized Hedge family) and ``update(outcome,
expert_preds)`` returning a new state. Arrays broadcast over leading batch
axes exactly as in the SAA module.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import softmax

from .core import loss_vectors, take_outcome

TIE_TOL = 1e-12


class PoolCollapse(RuntimeError):
    """Every expert has assigned probability zero to an observed outcome."""


@dataclass(frozen=True)
class CumulativeLosses:
    losses: np.ndarray
    step_count: int = 0

    @classmethod
    def zeros(cls, n_experts: int, batch_shape=()):
        return cls(np.zeros((*batch_shape, n_experts)))

    def add(self, outcome, expert_preds) -> "CumulativeLosses":
        lv = loss_vectors(expert_preds)
        inc = take_outcome(lv, np.asarray(outcome)[..., None])
        return CumulativeLosses(self.losses + inc, self.step_count + 1)


def _losses(L) -> np.ndarray:
    return np.asarray(L.losses if isinstance(L, CumulativeLosses) else L, dtype=float)


def _mix(weights, expert_preds) -> np.ndarray:
    """Average forecasts ``(..., K, n)`` with normalised weights ``(..., K)``."""
    return np.einsum("...k,...kn->...n", weights, np.asarray(expert_preds, dtype=float))


def weighted_average(log_weights, expert_preds) -> np.ndarray:
    return _mix(softmax(np.asarray(log_weights, dtype=float), axis=-1), expert_preds)


def _check_positive(c, name="c"):
    if not c > 0:
        raise ValueError(f"{name} must be positive, got {c}")


def wdaa_predict(L, expert_preds, c: float) -> np.ndarray:
    """Weighted Average Algorithm: mean of forecasts with weights ``exp(-L_k / c)``."""
    _check_positive(c)
    return weighted_average(-_losses(L) / c, expert_preds)


def wdaa_optimal_c(n: int) -> float:
    """``8 R^2`` where ``R = sqrt(1 - 1/n)`` is the radius of the ball around the simplex."""
    if n < 2:
        raise ValueError("need n >= 2")
    return 8.0 * (1.0 - 1.0 / n)


def wkaa_predict(L, expert_preds, c: float, step_count: int | None = None) -> np.ndarray:
    """Weak Aggregating Algorithm: weights ``exp(-c L_k / sqrt(N + 1))`` after N steps."""
    _check_positive(c)
    if step_count is None:
        step_count = L.step_count if isinstance(L, CumulativeLosses) else 0
    return weighted_average(-c * _losses(L) / np.sqrt(step_count + 1.0), expert_preds)


def _leaders(losses: np.ndarray) -> np.ndarray:
    mask = losses <= losses.min(axis=-1, keepdims=True) + TIE_TOL
    return mask / mask.sum(axis=-1, keepdims=True)


def hedge_distribution(L, beta: float) -> np.ndarray:
    """Hedge weights ``p_k`` proportional to ``beta ** L_k``.

    ``beta = 0`` is Follow the Leader (ties share equally), ``beta = 1`` is
    uniform.
    """
    if not 0 <= beta <= 1:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    losses = _losses(L)
    if beta == 0:
        return _leaders(losses)
    return softmax(losses * np.log(beta), axis=-1)


def saa_ha_distribution(p, beta: float) -> np.ndarray:
    """Replace Hedge weights by ``-ln(1 + (beta - 1) p_k)``, renormalised."""
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1) for the SAA-HA transform, got {beta}")
    q = -np.log1p((beta - 1.0) * np.asarray(p, dtype=float))
    return q / q.sum(axis=-1, keepdims=True)


def follow_leader(L, expert_preds) -> np.ndarray:
    """Forecast of the expert with the smallest loss so far; ties are averaged."""
    return _mix(_leaders(_losses(L)), expert_preds)


def simple_average(expert_preds) -> np.ndarray:
    return np.mean(np.asarray(expert_preds, dtype=float), axis=-2)


def bma_predict(log_weights, expert_preds) -> np.ndarray:
    """Bayes mixture of the experts' forecasts."""
    lw = np.asarray(log_weights, dtype=float)
    if np.any(np.all(np.isneginf(lw), axis=-1)):
        raise PoolCollapse("all experts eliminated: every one gave zero probability to an observed outcome")
    return weighted_average(lw, expert_preds)


def bma_update(log_weights, outcome, expert_preds) -> np.ndarray:
    probs = take_outcome(np.asarray(expert_preds, dtype=float), np.asarray(outcome)[..., None])
    with np.errstate(divide="ignore"):
        return np.asarray(log_weights, dtype=float) + np.log(probs)


class _Learner:
    def loss_vector(self, expert_preds) -> np.ndarray:
        return loss_vectors(self.predict(expert_preds))


@dataclass(frozen=True)
class _LossTracking(_Learner):
    cum: CumulativeLosses

    def update(self, outcome, expert_preds):
        return replace(self, cum=self.cum.add(outcome, expert_preds))


@dataclass(frozen=True)
class WeightedAverage(_LossTracking):
    c: float = 1.0
    name = "wdaa"

    def predict(self, expert_preds):
        return wdaa_predict(self.cum, expert_preds, self.c)


@dataclass(frozen=True)
class WeakAggregating(_LossTracking):
    c: float = 1.0
    name = "wkaa"

    def predict(self, expert_preds):
        return wkaa_predict(self.cum, expert_preds, self.c)


@dataclass(frozen=True)
class Hedge(_LossTracking):
    """Hedge, scored by its expected loss.

    ``predict`` without a generator follows the most probable experts
    (averaging ties within ``TIE_TOL`` loss units); with a generator it samples
    one expert from the distribution.
    """

    beta: float = 0.5
    name = "hedge"

    def __post_init__(self):
        if not 0 <= self.beta <= 1:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")

    def distribution(self) -> np.ndarray:
        return hedge_distribution(self.cum, self.beta)

    def loss_vector(self, expert_preds):
        return np.einsum("...k,...kn->...n", self.distribution(), loss_vectors(expert_preds))

    def predict(self, expert_preds, rng: np.random.Generator | None = None):
        p = self.distribution()
        if rng is not None:
            u = rng.random(p.shape[:-1])[..., None]
            k = np.minimum((np.cumsum(p, axis=-1) < u).sum(axis=-1), p.shape[-1] - 1)
            preds = np.asarray(expert_preds, dtype=float)
            return np.take_along_axis(preds, k[..., None, None], axis=-2)[..., 0, :]
        return _mix(self._selection(p), expert_preds)

    def _selection(self, p):
        if self.beta in (0.0, 1.0):
            return _leaders(-p)
        with np.errstate(divide="ignore"):
            logp = np.log(p)
        tol = TIE_TOL * abs(np.log(self.beta))
        mask = logp >= logp.max(axis=-1, keepdims=True) - tol
        return mask / mask.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class SaaHedge(Hedge):
    name = "saa_ha"

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1) for SAA-HA, got {self.beta}")

    def distribution(self) -> np.ndarray:
        return saa_ha_distribution(hedge_distribution(self.cum, self.beta), self.beta)


@dataclass(frozen=True)
class FollowLeader(_LossTracking):
    name = "follow_leader"

    def predict(self, expert_preds):
        return follow_leader(self.cum, expert_preds)


@dataclass(frozen=True)
class SimpleAverage(_Learner):
    n_experts: int
    name = "simple_average"

    def predict(self, expert_preds):
        return simple_average(expert_preds)

    def update(self, outcome, expert_preds):
        return self


@dataclass(frozen=True)
class BayesMixture(_Learner):
    log_weights: np.ndarray
    name = "bma"

    def predict(self, expert_preds):
        return bma_predict(self.log_weights, expert_preds)

    def update(self, outcome, expert_preds):
        return BayesMixture(bma_update(self.log_weights, outcome, expert_preds))
