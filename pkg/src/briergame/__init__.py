"""Prediction with expert advice for the Brier game."""

from .baselines import (
    BayesMixture,
    CumulativeLosses,
    FollowLeader,
    Hedge,
    PoolCollapse,
    SaaHedge,
    SimpleAverage,
    WeakAggregating,
    WeightedAverage,
    bma_predict,
    bma_update,
    follow_leader,
    hedge_distribution,
    saa_ha_distribution,
    simple_average,
    wdaa_optimal_c,
    wdaa_predict,
    wkaa_predict,
)
from .core import OutcomeSpace, ProbVector, brier_loss, loss_vectors, vertex
from .experiment import (
    ALGORITHMS,
    RunResult,
    SweepResult,
    SyntheticSpec,
    Trajectory,
    emit_report,
    make_algorithm,
    max_difference,
    regret_curve,
    run_protocol,
    sweep,
)
from .mixability import curvature_sign_sweep, curvature_value, exp_map, mixability_search
from .odds import MatchRecord, OddsVector, Schema, build_histogram, odds_to_probs, overround, parse_matches
from .saa import SaaState, max_shift, mix_losses, predict, solve_threshold, substitute, update

__version__ = "0.1.0"
