import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from briergame.core import brier_loss, loss_vectors, take_outcome
from briergame.saa import SaaState, max_shift, mix_losses, predict, solve_threshold, substitute, update
from oracles import max_shift_grid, saa_reference, threshold_bisection

gen_preds = st.integers(2, 5).flatmap(
    lambda n: arrays(float, n, elements=st.floats(-5, 5, allow_subnormal=False))
)


def random_preds(rng, K, n):
    return rng.dirichlet(np.ones(n), size=K)


class TestMixLosses:
    def test_single_expert_gives_its_losses(self):
        g = np.array([0.2, 0.5, 0.3])
        G = mix_losses(SaaState.initial(1, 3), [g])
        assert G == pytest.approx([brier_loss(w, g) for w in (1, 2, 3)], abs=1e-14)

    def test_identical_experts_shift_by_log_k(self):
        g = np.array([0.2, 0.5, 0.3])
        G = mix_losses(SaaState.initial(2, 3), [g, g])
        assert G == pytest.approx([brier_loss(w, g) - math.log(2) for w in (1, 2, 3)], abs=1e-14)

    def test_opposite_vertices(self):
        G = mix_losses(SaaState.initial(2, 2), [[1, 0], [0, 1]])
        # -ln(1 + e^-2)
        assert G == pytest.approx([-0.1269280110429726] * 2, abs=1e-14)

    def test_wrong_shapes(self):
        with pytest.raises(ValueError):
            mix_losses(SaaState.initial(2, 3), [[0.2, 0.5, 0.3]])
        with pytest.raises(ValueError):
            mix_losses(SaaState.initial(1, 3), [[0.5, 0.5]])

    def test_survives_huge_cumulative_losses(self):
        st_ = SaaState(np.array([-1e5, -1e5 - 3.0]), 3)
        G = mix_losses(st_, [[0.2, 0.5, 0.3], [0.6, 0.2, 0.2]])
        assert np.all(np.isfinite(G))
        assert np.isclose(predict(st_, [[0.2, 0.5, 0.3], [0.6, 0.2, 0.2]]).sum(), 1.0)


class TestThreshold:
    @pytest.mark.parametrize("G, s", [([0, 0, 0], 2 / 3), ([0.5, 1.0, 1.5], 5 / 3), ([0, 2], 2.0)])
    def test_examples(self, G, s):
        assert solve_threshold(G) == pytest.approx(s, abs=1e-14)
        assert threshold_bisection(G) == pytest.approx(s, abs=1e-12)

    @given(gen_preds)
    def test_matches_bisection(self, G):
        assert solve_threshold(G) == pytest.approx(threshold_bisection(list(G)), abs=1e-10)

    @given(gen_preds)
    def test_solves_equation(self, G):
        s = solve_threshold(G)
        assert np.maximum(s - G, 0).sum() == pytest.approx(2.0, abs=1e-12)

    def test_ties(self):
        assert solve_threshold([1.0, 1.0, 5.0]) == pytest.approx(2.0)

    def test_batched(self):
        G = np.array([[0, 0, 0], [0.5, 1.0, 1.5]])
        assert solve_threshold(G) == pytest.approx([2 / 3, 5 / 3])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            solve_threshold([0.0, np.inf])


class TestSubstitute:
    @pytest.mark.parametrize(
        "G, gamma",
        [
            ([0, 0, 0], [1 / 3, 1 / 3, 1 / 3]),
            ([0.5, 1.0, 1.5], [7 / 12, 1 / 3, 1 / 12]),
            ([0, 2], [1, 0]),
        ],
    )
    def test_examples(self, G, gamma):
        assert substitute(G) == pytest.approx(gamma, abs=1e-14)

    def test_grid_oracle_agrees_on_example(self):
        _, u = max_shift_grid([0.5, 1.0, 1.5])
        assert u == pytest.approx([7 / 12, 1 / 3, 1 / 12], abs=2e-3)

    @given(st.integers(2, 6).flatmap(lambda n: arrays(float, n, elements=st.floats(0, 1)).filter(lambda a: a.sum() > 1e-3)))
    def test_idempotent_on_loss_vectors(self, raw):
        gamma = raw / raw.sum()
        assert substitute(loss_vectors(gamma)) == pytest.approx(gamma, abs=1e-12)
        assert max_shift(loss_vectors(gamma)) == pytest.approx(0.0, abs=1e-12)

    @given(gen_preds)
    def test_valid_probability_vector(self, G):
        u = substitute(G)
        assert np.all(u >= 0)
        assert u.sum() == pytest.approx(1.0, abs=1e-12)

    @given(gen_preds, st.floats(-50, 50))
    def test_shift_invariance(self, G, c):
        assert substitute(G + c) == pytest.approx(substitute(G), abs=1e-12)

    @given(gen_preds)
    def test_dominance_with_equality_on_support(self, G):
        u = substitute(G)
        t = max_shift(G)
        lv = loss_vectors(u)
        assert np.all(lv <= G - t + 1e-9)
        support = u > 0
        assert lv[support] == pytest.approx((G - t)[support], abs=1e-9)


class TestMaxShift:
    def test_uniform(self):
        assert max_shift([0, 0, 0]) == pytest.approx(-2 / 3, abs=1e-14)

    def test_example_against_grid(self):
        exact = 5 / 3 - 1 - (49 + 16 + 1) / 144
        assert max_shift([0.5, 1.0, 1.5]) == pytest.approx(exact, abs=1e-14)
        assert max_shift_grid([0.5, 1.0, 1.5])[0] == pytest.approx(exact, abs=2e-3)

    @given(st.floats(-10, 10))
    def test_translation(self, c):
        gamma = np.array([0.5, 0.25, 0.25])
        assert max_shift(loss_vectors(gamma) + c) == pytest.approx(c, abs=1e-12)

    def test_grid_oracle_random(self):
        rng = np.random.default_rng(1)
        for G in rng.uniform(0, 3, size=(40, 3)):
            t_grid, _ = max_shift_grid(G)
            assert t_grid <= max_shift(G) + 1e-12
            assert max_shift(G) - t_grid < 2e-3


class TestUpdate:
    def test_perfect_expert_keeps_weight(self):
        s = update(SaaState.initial(2, 3), 2, [[0, 1, 0], [1, 0, 0]])
        assert s.log_weights == pytest.approx([0.0, -2.0])

    def test_worked_example(self):
        s = update(SaaState.initial(1, 3), 1, [[0.5, 0.25, 0.25]])
        assert s.log_weights == pytest.approx([-3 / 8])

    def test_eta_scales_update(self):
        s = update(SaaState.initial(1, 2, eta=0.5), 1, [[0, 1]])
        assert s.log_weights == pytest.approx([-1.0])

    def test_state_is_not_mutated(self):
        s0 = SaaState.initial(2, 2)
        update(s0, 1, [[0, 1], [1, 0]])
        assert s0.log_weights.tolist() == [0.0, 0.0]


class TestPredict:
    def test_single_expert(self):
        g = np.array([0.1, 0.6, 0.3])
        assert predict(SaaState(np.array([-7.0]), 3), [g]) == pytest.approx(g, abs=1e-14)

    def test_identical_experts(self):
        g = np.array([0.1, 0.6, 0.3])
        assert predict(SaaState(np.array([-1.0, -4.0, 0.0]), 3), [g, g, g]) == pytest.approx(g, abs=1e-14)

    def test_symmetric(self):
        assert predict(SaaState.initial(2, 2), [[1, 0], [0, 1]]) == pytest.approx([0.5, 0.5], abs=1e-15)

    def test_batched_matches_single(self):
        rng = np.random.default_rng(3)
        preds = rng.dirichlet(np.ones(4), size=(6, 3))
        lw = rng.normal(size=(6, 3))
        batch = predict(SaaState(lw, 4), preds)
        for b in range(6):
            assert batch[b] == pytest.approx(predict(SaaState(lw[b], 4), preds[b]), abs=1e-14)

    def test_rejects_eta_above_one(self):
        with pytest.raises(ValueError, match="mixable"):
            SaaState.initial(2, 3, eta=1.1)
        with pytest.raises(ValueError):
            SaaState.initial(2, 3, eta=0.0)


def _run(state, preds, outcomes):
    losses = []
    for p, w in zip(preds, outcomes):
        losses.append(brier_loss(w, state.predict(p)))
        state = state.update(w, p)
    return losses


def test_matches_plain_loop_reference():
    preds = [[[0.5, 0.25, 0.25], [0.2, 0.3, 0.5]], [[0.6, 0.2, 0.2], [0.1, 0.1, 0.8]], [[0.3, 0.4, 0.3], [0.4, 0.4, 0.2]]]
    expected = [0.6213836198030829, 0.5504255337476307, 0.5498111730520294]  # saa_reference
    assert saa_reference(preds, [1, 3, 2]) == pytest.approx(expected, abs=1e-12)
    assert _run(SaaState.initial(2, 3), np.array(preds), [1, 3, 2]) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("eta", [1.0, 0.5])
def test_random_runs_match_reference(eta):
    rng = np.random.default_rng(7)
    for _ in range(5):
        K, n = rng.integers(1, 6), rng.integers(2, 6)
        preds = rng.dirichlet(np.ones(n), size=(30, K))
        outcomes = rng.integers(1, n + 1, size=30)
        got = _run(SaaState.initial(K, n, eta), preds, outcomes)
        assert got == pytest.approx(saa_reference(preds.tolist(), outcomes.tolist(), eta), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.05, 1.0))
def test_small_eta_substitution_dominates_normalised_mixture(seed, eta):
    # The water-filling rule is used unchanged for eta < 1: check its output is
    # below the generalized prediction computed from normalised weights.
    rng = np.random.default_rng(seed)
    K, n = 4, 3
    state = SaaState(rng.normal(scale=3, size=K), n, eta)
    preds = rng.dirichlet(np.ones(n), size=K)
    lw = state.log_weights - np.logaddexp.reduce(state.log_weights)
    G_norm = mix_losses(SaaState(lw, n, eta), preds)
    gamma = predict(state, preds)
    assert np.all(loss_vectors(gamma) <= G_norm + 1e-9)


def test_loss_bound_short_adversarial_run():
    rng = np.random.default_rng(11)
    K, n = 5, 3
    state = SaaState.initial(K, n)
    L, Lk = 0.0, np.zeros(K)
    for _ in range(300):
        p = rng.dirichlet(np.ones(n), size=K)
        lv = state.loss_vector(p)
        w = int(np.argmax(lv - loss_vectors(p).min(axis=0))) + 1
        L += lv[w - 1]
        Lk += take_outcome(loss_vectors(p), np.full(K, w))
        state = state.update(w, p)
        assert L <= Lk.min() + math.log(K) + 1e-9
