import math

import numpy as np
import pytest

from renyiacc import entropy as ent
from renyiacc.channel import (
    BOT,
    SamplingProtocol,
    TwoQubitStrategy,
    build_sampling_channel,
)
from renyiacc.eatrate import (
    ConstraintSet,
    asymptotic_check,
    compare_entropies,
    finite_size_bound,
    gen_round_entropy,
    inner_inf_v,
    inner_inf_v_grid,
    optimize_strategy,
    single_round_h,
    strategy_gen_state,
)
from renyiacc.errors import (
    BadProbabilityError,
    InfeasibleError,
)
from renyiacc.qcore import random_distribution, rng_from

ALPHABET = ("0", "1", BOT)


def alice_protocol(gamma, p_gen=None):
    outs = ("0", "1")
    setts = tuple(f"{x}{y}" for x in range(2) for y in range(2))
    score = {(a, b): a for a in outs for b in setts}
    return SamplingProtocol(gamma=gamma, outcomes=outs, settings=setts,
                            p_gen=p_gen if p_gen is not None else [0.25] * 4,
                            p_test=[0.25] * 4, score=score, d=1)


class TestConstraintSet:
    def test_full_simplex(self):
        cs = ConstraintSet.full_simplex(ALPHABET)
        assert cs.k == 0 and cs.contains([0.2, 0.3, 0.5])

    def test_min_max(self):
        cs = ConstraintSet.min_mass(ALPHABET, "1", 0.4)
        assert cs.contains([0.1, 0.5, 0.4])
        assert not cs.contains([0.5, 0.1, 0.4])
        cs2 = ConstraintSet.max_mass(ALPHABET, BOT, 0.5)
        assert cs2.contains([0.4, 0.2, 0.4])
        assert not cs2.contains([0.1, 0.1, 0.8])

    def test_stack_and_feasibility(self):
        cs = ConstraintSet.stack(ConstraintSet.min_mass(ALPHABET, "1", 0.3),
                                 ConstraintSet.max_mass(ALPHABET, BOT, 0.6))
        point = cs.check_nonempty()
        assert cs.contains(point, tol=1e-8)
        empty = ConstraintSet.stack(
            ConstraintSet.min_mass(ALPHABET, "1", 0.8),
            ConstraintSet.min_mass(ALPHABET, "0", 0.8))
        with pytest.raises(InfeasibleError):
            empty.check_nonempty()


class TestInnerInfV:
    def test_full_simplex_zero_entropy(self):
        p = np.array([0.2, 0.3, 0.5])
        sol = inner_inf_v(p, 0.0, ConstraintSet.full_simplex(ALPHABET), 2.0)
        assert abs(sol.value) < 1e-12
        assert np.abs(sol.v_star - p).max() < 1e-12

    @pytest.mark.parametrize("alpha", (1.2, 2.0, 3.0))
    def test_full_simplex_analytic(self, alpha):
        p = np.array([0.15, 0.05, 0.8])
        h = 0.6
        sol = inner_inf_v(p, h, ConstraintSet.full_simplex(ALPHABET), alpha)
        beta = alpha - 1
        pred = -math.log2(sum(
            pi * 2 ** (-beta * h * (c == BOT))
            for pi, c in zip(p, ALPHABET))) / beta
        assert abs(sol.value - pred) < 1e-12
        grid = inner_inf_v_grid(p, h, ConstraintSet.full_simplex(ALPHABET),
                                alpha, resolution=120)
        assert abs(sol.value - grid) < 1e-6

    @pytest.mark.parametrize("seed", range(10))
    def test_certified_against_grid(self, seed):
        rng = rng_from((40, seed))
        p = random_distribution(3, rng)
        h = float(rng.uniform(0, 1.2))
        alpha = float(rng.choice([1.2, 1.5, 2.0, 3.0]))
        bound = min(0.9, p[1] + float(rng.uniform(0.02, 0.3)))
        cs = ConstraintSet.min_mass(ALPHABET, "1", bound)
        sol = inner_inf_v(p, h, cs, alpha)
        assert sol.kkt_residual < 1e-9
        assert sol.primal_violation <= 1e-9
        assert np.all(sol.lam >= 0)
        grid = inner_inf_v_grid(p, h, cs, alpha, resolution=150)
        assert abs(sol.value - grid) < 1e-5

    def test_binding_constraint_active(self):
        p = np.array([0.05, 0.05, 0.9])
        cs = ConstraintSet.min_mass(ALPHABET, "1", 0.3)
        sol = inner_inf_v(p, 0.5, cs, 2.0)
        assert abs(sol.v_star[1] - 0.3) < 1e-9
        assert sol.lam[0] > 0

    def test_infeasible_raises(self):
        p = np.array([0.05, 0.05, 0.9])
        with pytest.raises(InfeasibleError):
            inner_inf_v(p, 0.5, ConstraintSet.min_mass(ALPHABET, "1", 1.2), 2.0)

    def test_monotone_under_nesting(self):
        p = np.array([0.1, 0.2, 0.7])
        h = 0.7
        small = ConstraintSet.min_mass(ALPHABET, "1", 0.5)
        large = ConstraintSet.min_mass(ALPHABET, "1", 0.25)
        v_small = inner_inf_v(p, h, small, 2.0).value
        v_large = inner_inf_v(p, h, large, 2.0).value
        assert v_large <= v_small + 1e-12


class TestGenRound:
    @pytest.mark.parametrize("seed", range(8))
    def test_deterministic_pgen_equals_down(self, seed):
        rng = rng_from((41, seed))
        s = TwoQubitStrategy.from_params(
            np.concatenate([[rng.uniform(0, math.pi / 4)],
                            rng.uniform(-math.pi, math.pi, 4)]), 2, 2)
        k = int(rng.integers(0, 4))
        p_gen = np.zeros(4)
        p_gen[k] = 1.0
        ge = gen_round_entropy(s, p_gen, 2.0)
        hd = ent.h_down(strategy_gen_state(s, p_gen), ["A"], 2.0)
        assert abs(ge - hd) < 1e-10

    def test_pure_max_chsh_equals_up(self):
        s = TwoQubitStrategy.chsh_tsirelson()
        p_gen = np.ones(4) / 4
        ge = gen_round_entropy(s, p_gen, 2.0)
        hu = ent.h_up(strategy_gen_state(s, p_gen).marginal(["A", "B"]),
                      ["A"], 2.0)
        assert abs(ge - hu) < 1e-9

    @pytest.mark.parametrize("seed", range(5))
    def test_sandwich_ordering(self, seed):
        rng = rng_from((42, seed))
        s = TwoQubitStrategy.from_params(
            np.concatenate([[rng.uniform(0, math.pi / 4)],
                            rng.uniform(-math.pi, math.pi, 4)]), 2, 2)
        p_gen = random_distribution(4, rng)
        st = strategy_gen_state(s, p_gen)
        for alpha in (1.5, 2.0):
            ge = gen_round_entropy(s, p_gen, alpha)
            assert ent.h_down(st, ["A"], alpha) <= ge + 1e-9
            assert ge <= ent.h_up(st, ["A"], alpha) + 1e-9


class TestSingleRound:
    def test_gamma_zero_value_is_gen_entropy(self):
        proto = alice_protocol(0.0)
        s = TwoQubitStrategy.chsh_tsirelson()
        cset = ConstraintSet.full_simplex(proto.c_alphabet)
        sol = single_round_h(s, proto, cset, 2.0)
        # p_C is a point mass on bot, so v = delta_bot and the value is the
        # full generation entropy
        assert abs(sol.value - gen_round_entropy(s, proto.p_gen, 2.0)) < 1e-9

    def test_honest_threshold_gives_weighted_gen(self):
        # near order one the KL coefficient dominates, pinning the optimizer
        # to the honest score distribution and the rate to (1-gamma) h_gen
        gamma = 0.2
        alpha = 1.01
        proto = alice_protocol(gamma)
        s = TwoQubitStrategy.chsh_tsirelson()
        ch = build_sampling_channel(s, proto)
        p_c = ch.p_c()
        cset = ConstraintSet.min_mass(proto.c_alphabet, "1",
                                      p_c[proto.c_alphabet.index("1")] - 1e-6)
        sol = single_round_h(s, proto, cset, alpha)
        kl = ent.kl_divergence(sol.v_star, p_c)
        assert kl < 0.01
        expect = (1 - gamma) * gen_round_entropy(s, proto.p_gen, alpha)
        assert abs(sol.value - expect) < 0.02

    def test_tighter_than_down_variant(self):
        # replacing the partial entropy by the plain down entropy can only
        # lower the objective
        proto = alice_protocol(0.1)
        rng = rng_from(43)
        s = TwoQubitStrategy.from_params(
            np.concatenate([[0.5], rng.uniform(-2, 2, 4)]), 2, 2)
        cset = ConstraintSet.full_simplex(proto.c_alphabet)
        sol = single_round_h(s, proto, cset, 2.0)
        ch = build_sampling_channel(s, proto)
        hd = ent.h_down(strategy_gen_state(s, proto.p_gen), ["A"], 2.0)
        down_sol = inner_inf_v(ch.p_c(), hd, cset, 2.0)
        assert sol.value >= down_sol.value - 1e-10


class TestFiniteSize:
    def test_trivial_event(self):
        assert abs(finite_size_bound(100, 0.5, 1.0, 2.0) - 50.0) < 1e-12

    def test_linear_in_n(self):
        b1 = finite_size_bound(10, 0.5, 0.9, 2.0)
        b2 = finite_size_bound(20, 0.5, 0.9, 2.0)
        assert abs((b2 - b1) - 10 * 0.5) < 1e-12

    def test_validation(self):
        with pytest.raises(BadProbabilityError):
            finite_size_bound(10, 0.5, 0.0, 2.0)
        with pytest.raises(BadProbabilityError):
            finite_size_bound(0, 0.5, 0.9, 2.0)


class TestOptimizeStrategy:
    def test_reproducible_and_monotone_in_restarts(self):
        proto = alice_protocol(0.1)
        cset = ConstraintSet.full_simplex(proto.c_alphabet)
        r1 = optimize_strategy(proto, cset, 2.0, restarts=1, seed=5,
                               max_iter=60)
        r1b = optimize_strategy(proto, cset, 2.0, restarts=1, seed=5,
                                max_iter=60)
        assert r1.h_alpha == r1b.h_alpha
        r3 = optimize_strategy(proto, cset, 2.0, restarts=3, seed=5,
                               max_iter=60)
        assert r3.h_alpha <= r1.h_alpha + 1e-12
        assert r3.kkt_residual < 1e-9
        assert r3.note.startswith("upper bound")

    def test_unconstrained_rate_collapses(self):
        # with no statistical constraint the best attack is deterministic and
        # the certified rate is (near) zero
        proto = alice_protocol(0.05)
        cset = ConstraintSet.full_simplex(proto.c_alphabet)
        rep = optimize_strategy(proto, cset, 2.0, restarts=4, seed=7,
                                max_iter=250)
        assert rep.h_alpha < 0.05


class TestCompare:
    def test_deterministic_pb_zero_gap(self):
        s = TwoQubitStrategy.chsh_tsirelson()
        p_b = np.array([1.0, 0.0, 0.0, 0.0])
        rows = compare_entropies(s, p_b, (1.5, 2.0))
        for r in rows:
            assert abs(r.gap) < 1e-10

    def test_symmetric_chsh_tiny_gap(self):
        s = TwoQubitStrategy.chsh_tsirelson()
        rows = compare_entropies(s, np.ones(4) / 4, (2.0,))
        assert rows[0].gap < 1e-9
        assert rows[0].asymmetry < 1e-9

    def test_gap_positive_when_asymmetric(self):
        s = TwoQubitStrategy.from_schmidt(
            0.45, meas_a=((0.1, 0.0), (1.3, 0.0)), meas_b=((0.6, 0.0),))
        rows = compare_entropies(s, np.array([0.5, 0.5]), (2.0,),
                                 settings="alice")
        assert rows[0].asymmetry > 1e-3
        assert rows[0].gap > 0


class TestAsymptotics:
    def test_honest_chsh_approaches_one_bit(self):
        s = TwoQubitStrategy.chsh_tsirelson()
        schedule = [(1.2, 0.05), (1.05, 0.01), (1.001, 1e-4)]
        rows = asymptotic_check(
            s, schedule, alice_protocol,
            lambda proto: ConstraintSet.full_simplex(proto.c_alphabet))
        vals = [r.value for r in rows]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))
        assert 0.98 <= vals[-1] <= 1.0 + 1e-9
        assert rows[-1].kl_term < 1e-3
        assert abs(rows[-1].target_vn - 1.0) < 1e-9
