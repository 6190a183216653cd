"""Running the expert-advice protocol and summarising regret.

A game is a pair of arrays: expert forecasts of shape ``(N, *batch, K, n)``
and 1-based outcomes of shape ``(N, *batch)``. Leading batch axes let many
independent games of the same size run in lock-step, which is how the
randomized bound suites stay fast.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .baselines import (
    BayesMixture,
    CumulativeLosses,
    FollowLeader,
    Hedge,
    SaaHedge,
    SimpleAverage,
    WeakAggregating,
    WeightedAverage,
    wdaa_optimal_c,
)
from .core import loss_vectors, take_outcome
from .saa import SaaState

log = logging.getLogger(__name__)

ALGORITHMS = ("saa", "wdaa", "wkaa", "hedge", "saa_ha", "follow_leader", "simple_average", "bma")
PARAM_NAMES = {"saa": "eta", "wdaa": "c", "wkaa": "c", "hedge": "beta", "saa_ha": "beta"}
BOUND_TOL = 1e-9


def default_param(name: str, n_outcomes: int):
    return {
        "saa": 1.0,
        "wdaa": wdaa_optimal_c(n_outcomes),
        "wkaa": 1.0,
        "hedge": 0.5,
        "saa_ha": 0.5,
    }.get(name)


def make_algorithm(name: str, n_experts: int, n_outcomes: int, param=None, batch_shape=()):
    """Fresh learner state for one of :data:`ALGORITHMS`."""
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
    if param is None:
        param = default_param(name, n_outcomes)
    cum = CumulativeLosses.zeros(n_experts, batch_shape)
    if name == "saa":
        return SaaState.initial(n_experts, n_outcomes, eta=param, batch_shape=batch_shape)
    if name == "wdaa":
        return WeightedAverage(cum, c=param)
    if name == "wkaa":
        return WeakAggregating(cum, c=param)
    if name == "hedge":
        if param == 0:
            return FollowLeader(cum)
        return Hedge(cum, beta=param)
    if name == "saa_ha":
        return SaaHedge(cum, beta=param)
    if name == "follow_leader":
        return FollowLeader(cum)
    if name == "simple_average":
        return SimpleAverage(n_experts)
    return BayesMixture(np.zeros((*batch_shape, n_experts)))


@dataclass
class Trajectory:
    learner_cumulative: np.ndarray  # (N, *batch)
    expert_cumulative: np.ndarray  # (N, *batch, K)
    outcomes: np.ndarray  # (N, *batch)
    predictions: np.ndarray | None = None  # (N, *batch, n)

    @property
    def n_steps(self) -> int:
        return self.learner_cumulative.shape[0]

    @property
    def n_experts(self) -> int:
        return self.expert_cumulative.shape[-1]


def adversarial_outcome(learner_losses, expert_losses) -> np.ndarray:
    """Outcome maximising the learner's loss minus the best expert's loss on this step."""
    gain = learner_losses - expert_losses.min(axis=-2)
    return np.argmax(gain, axis=-1) + 1


def _groups(n_steps: int, batch_keys):
    if batch_keys is None:
        return [(i, i + 1) for i in range(n_steps)]
    keys = list(batch_keys)
    if len(keys) != n_steps:
        raise ValueError("need one batch key per step")
    bounds, start = [], 0
    for i in range(1, n_steps + 1):
        if i == n_steps or keys[i] != keys[start]:
            bounds.append((start, i))
            start = i
    return bounds


def run_protocol(
    algorithm,
    expert_preds,
    outcomes=None,
    *,
    adversary=None,
    batch_keys=None,
    keep_predictions: bool = False,
) -> Trajectory:
    """Play the expert-advice protocol with ``algorithm`` as the learner.

    Exactly one of ``outcomes`` and ``adversary`` is given. ``adversary`` is
    called as ``adversary(learner_loss_vector, expert_loss_vectors)`` and
    returns 1-based outcomes. With ``batch_keys`` (e.g. match dates), steps
    sharing a consecutive key are all predicted from the state at the start of
    the group and the updates are applied once the group is over.
    """
    preds = np.asarray(expert_preds, dtype=float)
    if (outcomes is None) == (adversary is None):
        raise ValueError("give exactly one of outcomes and adversary")
    if preds.ndim < 3:
        raise ValueError(f"expert forecasts must have shape (N, ..., K, n), got {preds.shape}")
    n_steps = preds.shape[0]
    batch = preds.shape[1:-2]
    if outcomes is not None:
        outcomes = np.asarray(outcomes, dtype=np.intp)
        if outcomes.shape != (n_steps, *batch):
            raise ValueError(f"outcomes shape {outcomes.shape} does not match forecasts {preds.shape}")
        if outcomes.size and (outcomes.min() < 1 or outcomes.max() > preds.shape[-1]):
            raise ValueError("outcomes outside 1..n")
    chosen = np.zeros((n_steps, *batch), dtype=np.intp)
    learner_inc = np.zeros((n_steps, *batch))
    expert_inc = np.zeros((n_steps, *batch, preds.shape[-2]))
    kept = np.zeros((n_steps, *batch, preds.shape[-1])) if keep_predictions else None

    state = algorithm
    for start, stop in _groups(n_steps, batch_keys):
        for i in range(start, stop):
            lv = state.loss_vector(preds[i])
            elv = loss_vectors(preds[i])
            w = adversary(lv, elv) if adversary is not None else outcomes[i]
            chosen[i] = w
            learner_inc[i] = take_outcome(lv, w)
            expert_inc[i] = take_outcome(elv, np.asarray(w)[..., None])
            if keep_predictions:
                kept[i] = state.predict(preds[i])
        for i in range(start, stop):
            state = state.update(chosen[i], preds[i])

    return Trajectory(
        np.cumsum(learner_inc, axis=0),
        np.cumsum(expert_inc, axis=0),
        chosen,
        kept,
    )


def max_difference(t: Trajectory):
    """``max_N (L_N - min_k L_N^k)``; the best expert is re-chosen at every N."""
    if t.n_steps == 0:
        raise ValueError("empty trajectory")
    d = np.max(t.learner_cumulative - t.expert_cumulative.min(axis=-1), axis=0)
    return d if np.ndim(d) else float(d)


def regret_curve(t: Trajectory, k: int) -> np.ndarray:
    """Excess loss ``L_N^k - L_N`` of expert ``k`` (0-based) over the learner."""
    if not 0 <= k < t.n_experts:
        raise IndexError(f"expert index {k} outside 0..{t.n_experts - 1}")
    return t.expert_cumulative[..., k] - t.learner_cumulative


def theoretical_bound(name: str, n_experts: int, n_outcomes: int, param=None):
    """Guaranteed bound on the maximal difference, or a text marker when there is none."""
    if param is None:
        param = default_param(name, n_outcomes)
    lnk = math.log(n_experts)
    if name == "saa":
        return lnk / param
    if name == "wdaa":
        # Averaging is exp-concave for c >= 8 R^2, giving c ln K.
        if param >= wdaa_optimal_c(n_outcomes) - 1e-12:
            return param * lnk
        return "none of the form (2)"
    if name in ("wkaa", "hedge", "saa_ha"):
        return "none of the form (2)"
    return "none"


# --- synthetic games -------------------------------------------------------


@dataclass(frozen=True)
class SyntheticSpec:
    """Random games: experts are noisy copies of a hidden per-step distribution."""

    n_steps: int = 500
    n_experts: int = 4
    n_outcomes: int = 3
    seed: int = 0
    outcomes: str = "iid"  # "iid" or "adversarial"

    def __post_init__(self):
        if self.outcomes not in ("iid", "adversarial"):
            raise ValueError(f"outcomes must be 'iid' or 'adversarial', got {self.outcomes!r}")


_SPEC_KEYS = {"N": "n_steps", "K": "n_experts", "n": "n_outcomes", "seed": "seed", "outcomes": "outcomes"}


def parse_synthetic(text: str) -> SyntheticSpec:
    """Parse ``"N=500,K=4,n=3,seed=0,outcomes=iid"`` (any subset of keys)."""
    kwargs = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, _, value = part.partition("=")
        if key not in _SPEC_KEYS:
            raise ValueError(f"unknown synthetic key {key!r}; expected one of {', '.join(_SPEC_KEYS)}")
        field_name = _SPEC_KEYS[key]
        kwargs[field_name] = value if field_name == "outcomes" else int(value)
    return SyntheticSpec(**kwargs)


def synthetic_game(spec: SyntheticSpec, batch_shape=(), rng=None):
    """Expert forecasts ``(N, *batch, K, n)`` and i.i.d. outcomes (``None`` when adversarial)."""
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    N, K, n = spec.n_steps, spec.n_experts, spec.n_outcomes
    truth = rng.dirichlet(np.ones(n), size=(N, *batch_shape))
    noise = rng.dirichlet(np.ones(n), size=(N, *batch_shape, K))
    skill = rng.uniform(0.0, 1.0, size=(*batch_shape, K, 1))
    preds = skill * truth[..., None, :] + (1.0 - skill) * noise
    if spec.outcomes == "adversarial":
        return preds, None
    u = rng.random((N, *batch_shape, 1))
    outcomes = np.minimum((np.cumsum(truth, axis=-1) < u).sum(axis=-1), n - 1) + 1
    return preds, outcomes


def play_synthetic(algorithm, spec: SyntheticSpec, batch_shape=(), **kw) -> Trajectory:
    preds, outcomes = synthetic_game(spec, batch_shape)
    if outcomes is None:
        return run_protocol(algorithm, preds, adversary=adversarial_outcome, **kw)
    return run_protocol(algorithm, preds, outcomes, **kw)


# --- real data ---------------------------------------------------------------


def records_to_game(records):
    """Expert forecasts from the odds (recomputed here, never cached), outcomes and dates."""
    if not records:
        raise ValueError("no match records")
    preds = np.stack([r.expert_probs() for r in records])
    outcomes = np.array([r.outcome for r in records])
    return preds, outcomes, [r.date for r in records]


# --- results and reports -----------------------------------------------------


@dataclass
class RunResult:
    algorithm: str
    param: float | None
    trajectory: Trajectory
    n_outcomes: int
    expert_names: list[str] = field(default_factory=list)

    @property
    def n_experts(self) -> int:
        return self.trajectory.n_experts

    def summary(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "parameter": self.param,
            "steps": self.trajectory.n_steps,
            "experts": self.n_experts,
            "outcomes": self.n_outcomes,
            "max_difference": max_difference(self.trajectory) if self.trajectory.n_steps else None,
            "theoretical_bound": theoretical_bound(self.algorithm, self.n_experts, self.n_outcomes, self.param),
            "final_learner_loss": float(self.trajectory.learner_cumulative[-1]) if self.trajectory.n_steps else 0.0,
        }

    def to_dict(self) -> dict:
        t = self.trajectory
        return {
            "summary": self.summary(),
            "expert_names": list(self.expert_names),
            "learner_cumulative": t.learner_cumulative.tolist(),
            "expert_cumulative": t.expert_cumulative.tolist(),
            "outcomes": t.outcomes.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunResult":
        s = d["summary"]
        t = Trajectory(
            np.asarray(d["learner_cumulative"], dtype=float),
            np.asarray(d["expert_cumulative"], dtype=float).reshape(len(d["learner_cumulative"]), -1),
            np.asarray(d["outcomes"], dtype=np.intp),
        )
        return cls(s["algorithm"], s["parameter"], t, s["outcomes"], d.get("expert_names", []))


@dataclass
class SweepResult:
    algorithm: str
    parameter_values: np.ndarray
    max_differences: np.ndarray
    diagnostics: list[str] = field(default_factory=list)

    def best(self):
        """Best grid point in hindsight, as ``(parameter, max_difference)``."""
        i = int(np.nanargmin(self.max_differences))
        return float(self.parameter_values[i]), float(self.max_differences[i])

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "parameter_values": self.parameter_values.tolist(),
            "max_differences": [None if math.isnan(x) else x for x in self.max_differences.tolist()],
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepResult":
        md = np.array([np.nan if x is None else x for x in d["max_differences"]], dtype=float)
        return cls(d["algorithm"], np.asarray(d["parameter_values"], dtype=float), md, d.get("diagnostics", []))


def _sweep_point(args):
    name, value, preds, outcomes, batch_keys = args
    algo = make_algorithm(name, preds.shape[-2], preds.shape[-1], value)
    return max_difference(run_protocol(algo, preds, outcomes, batch_keys=batch_keys))


def sweep(name: str, grid, expert_preds, outcomes, *, batch_keys=None, workers: int = 1) -> SweepResult:
    """Maximal difference for every parameter value, each from a fresh run.

    A failing grid point is recorded as NaN with a diagnostic rather than
    aborting the sweep.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty parameter grid")
    preds = np.asarray(expert_preds, dtype=float)
    jobs = [(name, float(v), preds, outcomes, batch_keys) for v in grid]
    diags: list[str] = []
    out = np.full(grid.shape, np.nan)

    def record(i, fn):
        try:
            out[i] = fn()
        except (ValueError, ArithmeticError, RuntimeError) as exc:
            diags.append(f"{name} at {grid[i]:g}: {exc}")
            log.warning("sweep point %s=%g failed: %s", name, grid[i], exc)

    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(_sweep_point, j) for j in jobs]
            for i, fut in enumerate(futures):
                record(i, fut.result)
    else:
        for i, j in enumerate(jobs):
            record(i, lambda j=j: _sweep_point(j))
    return SweepResult(name, grid, out, diags)


def parse_grid(text: str) -> np.ndarray:
    """``"lo:hi:steps"`` to an inclusive linear grid, or a comma-separated list."""
    if ":" in text:
        lo, hi, steps = text.split(":")
        return np.linspace(float(lo), float(hi), int(steps))
    return np.array([float(x) for x in text.split(",")])


def check_invariants(result: RunResult) -> list[str]:
    """Violations of the trajectory invariants and of any guaranteed bound."""
    problems = []
    t = result.trajectory
    if t.n_steps == 0:
        return problems
    for label, series in (("learner", t.learner_cumulative), ("expert", t.expert_cumulative)):
        inc = np.diff(series, axis=0, prepend=0.0)
        if np.any(inc < -1e-12) or np.any(inc > 2 + 1e-12):
            problems.append(f"{label} per-step losses outside [0, 2]")
    bound = theoretical_bound(result.algorithm, t.n_experts, result.n_outcomes, result.param)
    if isinstance(bound, float):
        md = max_difference(t)
        if np.any(np.asarray(md) > bound + BOUND_TOL):
            problems.append(f"{result.algorithm}: maximal difference {np.max(md):.6f} exceeds bound {bound:.6f}")
    return problems


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return "" if math.isnan(x) else f"{x:.6f}"
    return str(x)


def emit_report(results, fmt: str = "csv") -> str:
    """Tables-style summary of runs and sweeps as CSV or JSON text.

    CSV columns: ``kind, algorithm, parameter, max_difference,
    theoretical_bound``; sweeps contribute one row per grid point plus a
    ``hindsight`` row for the best point.
    """
    if not results:
        raise ValueError("nothing to report")
    if fmt == "json":
        payload = {"runs": [], "sweeps": []}
        for r in results:
            if isinstance(r, SweepResult):
                d = r.to_dict()
                d["hindsight_best"] = r.best() if np.any(np.isfinite(r.max_differences)) else None
                payload["sweeps"].append(d)
            else:
                payload["runs"].append(r.summary())
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}; use csv or json")

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "algorithm", "parameter", "max_difference", "theoretical_bound"])
    for r in results:
        if isinstance(r, SweepResult):
            for v, md in zip(r.parameter_values, r.max_differences):
                w.writerow(["sweep", r.algorithm, _fmt(float(v)), _fmt(float(md)), ""])
            if np.any(np.isfinite(r.max_differences)):
                v, md = r.best()
                w.writerow(["hindsight", r.algorithm, _fmt(v), ">= " + _fmt(md), ""])
        else:
            s = r.summary()
            w.writerow(["run", s["algorithm"], _fmt(s["parameter"]), _fmt(s["max_difference"]), _fmt(s["theoretical_bound"])])
    return buf.getvalue()


def curves_csv(result: RunResult) -> str:
    """Per-step excess loss of every expert over the learner, ready for plotting."""
    t = result.trajectory
    names = result.expert_names or [f"expert{k + 1}" for k in range(t.n_experts)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "learner_cumulative", *[f"{nm}_excess" for nm in names]])
    for i in range(t.n_steps):
        excess = t.expert_cumulative[i] - t.learner_cumulative[i]
        w.writerow([i + 1, f"{t.learner_cumulative[i]:.10g}", *(f"{x:.10g}" for x in excess)])
    return buf.getvalue()


def histogram_csv(hist) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_lo", "bin_hi", "count"])
    edges = hist.edges
    for i, c in enumerate(hist.counts):
        w.writerow([f"{edges[i]:.10g}", f"{edges[i + 1]:.10g}", int(c)])
    return buf.getvalue()
