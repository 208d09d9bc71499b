import itertools
import math

import numpy as np
import pytest

from renyiacc import entropy as ent
from renyiacc.channel import BOT, SamplingProtocol
from renyiacc.eatrate import ConstraintSet
from renyiacc.errors import EmptyEventError
from renyiacc.qcore import rng_from
from renyiacc.verify import (
    ALL_CHECKS,
    ClassicalAttack,
    SuiteConfig,
    check_chain_rule,
    check_classical_chain,
    check_fweighted_props,
    check_partial_entropy_props,
    check_ordering,
    check_read_and_prepare,
    check_two_round_accumulation,
    chain_rule_gap,
    counterexample_channel_instance,
    random_attack,
    run_property_suite,
    simulate_two_rounds,
)

SMALL = SuiteConfig(seed=3, counts={"ordering": 10, "partial_props": 5, "chain_rule": 5,
                                    "classical_chain": 30, "fweighted": 4,
                                    "read_and_prepare": 5, "two_round": 6})


def simple_protocol(gamma, n_a=2, n_b=2):
    outs = tuple(str(a) for a in range(n_a))
    setts = tuple(str(b) for b in range(n_b))
    score = {(a, b): str((int(a) + int(b)) % 2) for a in outs for b in setts}
    return SamplingProtocol(gamma=gamma, outcomes=outs, settings=setts,
                            p_gen=np.ones(n_b) / n_b, p_test=np.ones(n_b) / n_b,
                            score=score, d=1)


class TestChecksPass:
    def test_ordering(self):
        assert check_ordering(SMALL).passed

    def test_partial_entropy_props(self):
        assert check_partial_entropy_props(SMALL).passed

    def test_chain_rule(self):
        rep = check_chain_rule(SMALL)
        assert rep.passed
        assert rep.instances == 6  # includes the worked counterexample

    def test_classical_chain(self):
        assert check_classical_chain(SMALL).passed

    def test_fweighted(self):
        assert check_fweighted_props(SMALL).passed

    def test_read_and_prepare(self):
        assert check_read_and_prepare(SMALL).passed

    def test_two_round(self):
        assert check_two_round_accumulation(SMALL).passed


class TestDeterminism:
    def test_suite_repeats_identically(self):
        cfg = SuiteConfig(seed=9, counts={k: 3 for k in ALL_CHECKS})
        r1 = run_property_suite(cfg)
        r2 = run_property_suite(cfg)
        for a, b in zip(r1.results, r2.results):
            assert a.worst_slack == b.worst_slack
            assert a.passed == b.passed

    def test_report_serializes(self):
        cfg = SuiteConfig(seed=9, counts={k: 2 for k in ALL_CHECKS})
        doc = run_property_suite(cfg).as_dict()
        assert doc["all_passed"] in (True, False)
        assert len(doc["results"]) == len(ALL_CHECKS)


class TestMutationSanity:
    def test_broken_entropy_is_caught(self):
        # an off-by-base partial entropy (natural log instead of log2)
        def broken_partial(state, a_names, up_name, alpha):
            return ent.h_partial(state, a_names, up_name, alpha) * math.log(2)

        rep = check_ordering(SMALL, h_partial_fn=broken_partial)
        assert not rep.passed
        assert rep.failures
        assert "seed" in rep.failures[0]

    def test_reproducer_seed_replays(self):
        def broken_partial(state, a_names, up_name, alpha):
            return ent.h_partial(state, a_names, up_name, alpha) - 0.1

        rep = check_ordering(SMALL, h_partial_fn=broken_partial)
        assert not rep.passed
        seed = tuple(rep.failures[0]["seed"])
        rng = rng_from(seed)
        assert rng is not None  # the child seed is reconstructible


class TestChainRuleInstance:
    def test_counterexample_instance_holds_with_gap(self):
        omega, p_b2, kernel = counterexample_channel_instance()
        slack, cert, lhs, first, inf_term = chain_rule_gap(
            omega, p_b2, kernel, 1.5)
        assert slack > 0.005  # strictly positive gap at order 1.5
        assert cert < 1e-8
        assert abs(lhs - 0.82057) < 1e-5
        assert abs(first - 0.35295) < 1e-5
        assert inf_term < 0.47118  # partial-entropy infimum below the up one

    def test_product_channel_additivity(self):
        # a channel ignoring its memory makes the chain rule tight
        rng = rng_from(77)
        from renyiacc.qcore import random_distribution
        omega = random_distribution(4, rng).reshape(2, 2, 1)
        p_b2 = random_distribution(2, rng)
        kernel = np.zeros((2, 1, 2))
        for b2 in range(2):
            kernel[:, 0, b2] = random_distribution(2, rng)
        slack, cert, lhs, first, inf_term = chain_rule_gap(
            omega, p_b2, kernel, 2.0)
        assert abs(slack) < 1e-9


class TestTwoRounds:
    def test_iid_honest_attack(self):
        proto = simple_protocol(0.3)
        # memoryless deterministic-ish attack: kernels ignore memory
        rng = rng_from(11)
        from renyiacc.qcore import random_distribution
        k = np.zeros((2, 2, 2, 2))
        for b in range(2):
            out = random_distribution(2, rng)
            for r in range(2):
                k[r, b, :, 0] = out  # memory reset to 0
        attack = ClassicalAttack(np.array([[1.0], [0.0]]), (k, k))
        cset = ConstraintSet.full_simplex(proto.c_alphabet)
        res = simulate_two_rounds(proto, attack, cset, 2.0)
        assert res.p_omega == 1.0
        assert res.bound == pytest.approx(2 * res.h_alpha)
        assert res.slack >= -1e-9
        # the exact entropy of two independent rounds is twice one round
        single = simulate_two_rounds(proto, attack, cset, 2.0)
        assert res.lhs_exact == pytest.approx(single.lhs_exact)

    def test_full_event_zero_penalty(self):
        proto = simple_protocol(0.5)
        attack = random_attack(rng_from(12), 2, 2, 2, 2)
        cset = ConstraintSet.full_simplex(proto.c_alphabet)
        res = simulate_two_rounds(proto, attack, cset, 1.5)
        assert res.p_omega == 1.0
        assert res.bound == pytest.approx(2 * res.h_alpha)

    def test_empty_event_raises(self):
        proto = simple_protocol(0.0)  # only bot ever occurs
        attack = random_attack(rng_from(13), 2, 1, 2, 2)
        cset = ConstraintSet.min_mass(proto.c_alphabet, "1", 0.9)
        with pytest.raises(EmptyEventError):
            simulate_two_rounds(proto, attack, cset, 2.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_adversarial_memory_attacks(self, seed):
        rng = rng_from((14, seed))
        proto = simple_protocol(float(rng.uniform(0.1, 0.9)))
        attack = random_attack(rng, 3, 2, 2, 2)
        p_bot = 1.0 - proto.gamma
        cset = ConstraintSet.max_mass(proto.c_alphabet, BOT,
                                      min(1.0, p_bot + 0.1))
        res = simulate_two_rounds(proto, attack, cset, 2.0)
        assert res.slack >= -1e-9

    def test_scripted_reset_attack(self):
        # round two answers deterministically from the copied round-one key
        proto = simple_protocol(0.4)
        k1 = np.zeros((2, 2, 2, 2))
        for r, b in itertools.product(range(2), range(2)):
            a = (r + b) % 2
            k1[r, b, a, a] = 1.0  # output a, store it
        k2 = np.zeros((2, 2, 2, 2))
        for r, b in itertools.product(range(2), range(2)):
            k2[r, b, r, r] = 1.0  # replay the stored bit
        attack = ClassicalAttack(np.array([[0.6], [0.4]]), (k1, k2))
        cset = ConstraintSet.full_simplex(proto.c_alphabet)
        res = simulate_two_rounds(proto, attack, cset, 2.0)
        assert res.slack >= -1e-9
