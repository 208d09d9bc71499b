"""Seeded property harness: every inequality the entropies must satisfy,
as executable checks with reproducible failure records.

Each check draws its instances from per-index child seeds of the suite seed,
so single failures replay in isolation, and parallel or serial execution sees
identical streams. The two-round check is the accumulation oracle: it
enumerates an exact joint distribution for two spot-checking rounds under a
classical memory attack and compares the conditioned optimized entropy
against the finite-size bound assembled from certified single-round pieces.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import entropy
from .channel import (
    BOT,
    SamplingProtocol,
    build_read_and_prepare,
)
from .counterexample import P_A1_GIVEN_B1, P_B1, p_a2_given
from .eatrate import ConstraintSet, finite_size_bound, inner_inf_v
from .errors import EmptyEventError, InfeasibleError
from .optimize import concave_simplex_max, nelder_mead, simplex_grid
from .qcore import (
    CqState,
    DensityOperator,
    creg,
    qreg,
    random_cq,
    random_density,
    random_distribution,
    random_isometry,
    random_kraus_channel,
    rng_from,
    trace_distance,
)

DEFAULT_ALPHAS = (1.1, 1.5, 2.0, 3.0)


@dataclass
class SuiteConfig:
    seed: int = 0
    counts: dict = field(default_factory=dict)
    alphas: tuple = DEFAULT_ALPHAS
    max_classical: int = 4
    max_quantum: int = 4
    tolerances: dict = field(default_factory=dict)

    def count(self, name: str, default: int) -> int:
        return int(self.counts.get(name, default))

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


@dataclass
class PropertyReport:
    name: str
    passed: bool
    instances: int
    worst_slack: float
    tolerance: float
    failures: list
    elapsed: float

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "instances": self.instances, "worst_slack": self.worst_slack,
                "tolerance": self.tolerance, "failures": self.failures,
                "elapsed": round(self.elapsed, 3)}


@dataclass
class SuiteReport:
    seed: int
    results: list

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def as_dict(self) -> dict:
        return {"seed": self.seed, "all_passed": self.all_passed,
                "results": [r.as_dict() for r in self.results]}


def _child(seed, *tags) -> tuple:
    return (int(seed),) + tuple(int(t) for t in tags)


def _report(name, slacks, tol, failures, t0, count) -> PropertyReport:
    worst = min(slacks) if slacks else math.inf
    return PropertyReport(name=name, passed=not failures, instances=count,
                          worst_slack=worst, tolerance=tol, failures=failures,
                          elapsed=time.time() - t0)


# ---------------------------------------------------------------------------
# ordering sandwich
# ---------------------------------------------------------------------------

def check_ordering(cfg: SuiteConfig, h_down_fn=None, h_partial_fn=None,
                   h_up_fn=None) -> PropertyReport:
    """H_down <= H_partial <= H_up on seeded random cq states.

    The entropy callables are injectable so a broken implementation can be
    shown to trip the check (mutation sanity).
    """
    t0 = time.time()
    h_down_fn = h_down_fn or entropy.h_down
    h_partial_fn = h_partial_fn or entropy.h_partial
    h_up_fn = h_up_fn or entropy.h_up
    tol = cfg.tol("ordering", 1e-9)
    n = cfg.count("ordering", 120)
    slacks, failures = [], []
    for i in range(n):
        rng = rng_from(_child(cfg.seed, 1, i))
        nb = int(rng.integers(2, cfg.max_classical + 1))
        da = int(rng.integers(2, min(cfg.max_quantum, 4) + 1))
        dc = int(rng.integers(2, min(cfg.max_quantum, 4) + 1))
        if i % 3 == 2:
            # fully classical side information exercises the closed forms
            st = random_cq((nb, dc, da), (), rng, names=["B", "C", "A"],
                           qnames=[])
        else:
            st = random_cq((nb,), (da, dc), rng, names=["B"],
                           qnames=["A", "C"])
        for alpha in cfg.alphas:
            hd = h_down_fn(st, ["A"], alpha)
            hp = h_partial_fn(st, ["A"], "B", alpha)
            hu = h_up_fn(st, ["A"], alpha)
            s1, s2 = hp - hd, hu - hp
            slacks += [s1, s2]
            if s1 < -tol or s2 < -tol:
                failures.append({"seed": _child(cfg.seed, 1, i),
                                 "alpha": alpha, "h_down": hd,
                                 "h_partial": hp, "h_up": hu})
    return _report("ordering", slacks, tol, failures, t0, n)


# ---------------------------------------------------------------------------
# partial-entropy properties (data processing, consistency, subadditivity)
# ---------------------------------------------------------------------------

def check_partial_entropy_props(cfg: SuiteConfig) -> PropertyReport:
    t0 = time.time()
    tol = cfg.tol("partial_props", 1e-9)
    n = cfg.count("partial_props", 40)
    slacks, failures = [], []
    for i in range(n):
        rng = rng_from(_child(cfg.seed, 2, i))
        alpha = float(rng.choice(cfg.alphas))
        nb = int(rng.integers(2, 4))
        da, dc = int(rng.integers(2, 4)), int(rng.integers(2, 4))

        # (i) product structure reduces to the plain entropies
        p_b = random_distribution(nb, rng)
        rho_c = random_density((dc,), rng).matrix
        conds = {(j,): np.kron(random_density((da,), rng).matrix, rho_c)
                 for j in range(nb)}
        regs = [creg("B", tuple(range(nb))), qreg("A", da), qreg("C", dc)]
        st = CqState(regs, p_b, conds)
        gap_up = entropy.h_partial(st, ["A"], "B", alpha) - \
            entropy.h_up(st.marginal(["A", "B"]), ["A"], alpha)
        rho_ac = random_density((da, dc), rng).matrix
        st2 = CqState(regs, p_b, {(j,): rho_ac for j in range(nb)})
        gap_down = entropy.h_partial(st2, ["A"], "B", alpha) - \
            entropy.h_down(DensityOperator(rho_ac, (da, dc), ("A", "C")),
                           ["A"], alpha)
        for g, tag in ((gap_up, "consistency-up"), (gap_down, "consistency-down")):
            slacks.append(tol - abs(g))
            if abs(g) > tol:
                failures.append({"seed": _child(cfg.seed, 2, i), "check": tag,
                                 "gap": g})

        # (ii) data processing / isometric invariance on C
        st3 = random_cq((nb,), (da, dc), rng, names=["B"], qnames=["A", "C"])
        before = entropy.h_partial(st3, ["A"], "B", alpha)
        kraus = random_kraus_channel(dc, dc, 2, rng)
        after = entropy.h_partial(st3.apply_quantum_channel(kraus, "C"),
                                  ["A"], "B", alpha)
        slack = after - before + tol
        slacks.append(slack)
        if slack < 0:
            failures.append({"seed": _child(cfg.seed, 2, i),
                             "check": "data-processing", "before": before,
                             "after": after})
        iso = random_isometry(dc, dc + 1, rng)
        inv = entropy.h_partial(st3.apply_quantum_channel([iso], "C"),
                                ["A"], "B", alpha) - before
        slacks.append(tol - abs(inv))
        if abs(inv) > tol:
            failures.append({"seed": _child(cfg.seed, 2, i),
                             "check": "isometry", "gap": inv})

        # (iii) classical D register: monotonicity and subadditivity
        nd = int(rng.integers(2, 4))
        st4 = random_cq((nb, nd), (da, dc), rng, names=["B", "D"],
                        qnames=["A", "C"])
        mid = entropy.h_partial(st4.marginal(["A", "B", "C"]), ["A"], "B", alpha)
        left = entropy.h_partial(st4, ["A", "D"], "B", alpha)
        right = entropy.h_partial(st4, ["A"], "B", alpha)
        for s, tag in ((left - mid, "AD-monotone"), (mid - right, "subadditive")):
            slacks.append(s + tol)
            if s < -tol:
                failures.append({"seed": _child(cfg.seed, 2, i), "check": tag,
                                 "slack": s})
    return _report("partial_props", slacks, tol, failures, t0, n)


# ---------------------------------------------------------------------------
# chain rules
# ---------------------------------------------------------------------------

def _classical_up(joint: np.ndarray, a_axes, b_axes, alpha: float) -> float:
    axes = tuple(a_axes) + tuple(b_axes)
    p = joint.transpose(axes)
    na = int(np.prod([p.shape[i] for i in range(len(a_axes))], initial=1))
    return entropy.h_classical(p.reshape(na, -1), alpha, "up")


def _classical_down(joint: np.ndarray, a_axes, b_axes, alpha: float) -> float:
    axes = tuple(a_axes) + tuple(b_axes)
    p = joint.transpose(axes)
    na = int(np.prod([p.shape[i] for i in range(len(a_axes))], initial=1))
    return entropy.h_classical(p.reshape(na, -1), alpha, "down")


def counterexample_channel_instance():
    """The worked two-round counterexample in the chain-rule checker's format."""
    omega = np.zeros((2, 2, 2))  # p(a1, b1, r) with r = a1
    for a1 in range(2):
        for b1 in range(2):
            omega[a1, b1, a1] = float(P_B1[b1] * P_A1_GIVEN_B1[a1][b1])
    p_b2 = np.array([0.5, 0.5])
    kernel = np.zeros((2, 2, 2))  # k[a2, r, b2]
    for a2 in range(2):
        for r in range(2):
            for b2 in range(2):
                kernel[a2, r, b2] = float(p_a2_given(a2, r, b2))
    return omega, p_b2, kernel


def chain_rule_gap(omega: np.ndarray, p_b2: np.ndarray,
                        kernel: np.ndarray, alpha: float):
    """Slack of the tightened chain rule on one fully classical instance.

    ``omega[a1, b1, r]`` is the input joint, ``kernel[a2, r, b2]`` the round-two
    response. The partial-entropy infimum over inputs reduces exactly to a
    concave maximization over distributions on the memory (orthogonal
    side-information copies are optimal and the channel pinches its input),
    solved with a refinement certificate.
    """
    n_r = omega.shape[2]
    joint = np.einsum("abr,s,zrs->abzs", omega, p_b2, kernel)
    lhs = _classical_up(joint, (0, 2), (1, 3), alpha)
    first = _classical_up(omega.sum(axis=2)[:, :, None], (0,), (1, 2), alpha)
    s_eb = (kernel ** alpha).sum(axis=0)  # s[r, b2]

    def inner(q):
        mix = q @ s_eb  # per b2
        return float((p_b2 * mix ** (1.0 / alpha)).sum())

    res = concave_simplex_max(inner, n_r, coarse=64)
    inf_term = (alpha / (1.0 - alpha)) * math.log2(res.value)
    return lhs - (first + inf_term), res.certificate, lhs, first, inf_term


def check_chain_rule(cfg: SuiteConfig) -> PropertyReport:
    t0 = time.time()
    tol = cfg.tol("chain_rule", 1e-9)
    n = cfg.count("chain_rule", 40)
    slacks, failures = [], []
    instances = [(_child(cfg.seed, 3, 10 ** 6),) + counterexample_channel_instance()]
    for i in range(n):
        rng = rng_from(_child(cfg.seed, 3, i))
        na1, nb1 = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        n_r = int(rng.integers(2, 4))
        na2, nb2 = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        omega = random_distribution(na1 * nb1 * n_r, rng).reshape(na1, nb1, n_r)
        p_b2 = random_distribution(nb2, rng)
        kernel = np.stack([
            np.stack([random_distribution(na2, rng) for _ in range(nb2)], axis=1)
            for _ in range(n_r)], axis=1)
        instances.append((_child(cfg.seed, 3, i), omega, p_b2, kernel))
    for tag, omega, p_b2, kernel in instances:
        alpha = float(rng_from(tag).choice(cfg.alphas))
        slack, cert, lhs, first, inf_term = chain_rule_gap(
            omega, p_b2, kernel, alpha)
        slacks.append(slack + tol)
        if slack < -tol or cert > 1e-8:
            failures.append({"seed": tag, "alpha": alpha, "slack": slack,
                             "certificate": cert, "lhs": lhs, "first": first,
                             "inf_term": inf_term})
    return _report("chain_rule", slacks, tol, failures, t0, len(instances))


def check_classical_chain(cfg: SuiteConfig) -> PropertyReport:
    """Chain rule for the un-optimized entropy under independent side info."""
    t0 = time.time()
    tol = cfg.tol("classical_chain", 1e-9)
    n = cfg.count("classical_chain", 200)
    slacks, failures = [], []
    for i in range(n):
        rng = rng_from(_child(cfg.seed, 4, i))
        alpha = float(rng.choice(cfg.alphas))
        na1, nb1, na2, nb2 = (int(rng.integers(2, 4)) for _ in range(4))
        p_ab = random_distribution(na1 * nb1, rng).reshape(na1, nb1)
        p_b2 = random_distribution(nb2, rng)
        kern = np.zeros((na2, na1, nb1, nb2))
        for a1 in range(na1):
            for b1 in range(nb1):
                for b2 in range(nb2):
                    kern[:, a1, b1, b2] = random_distribution(na2, rng)
        joint = np.einsum("ab,s,zabs->abzs", p_ab, p_b2, kern)
        lhs = _classical_down(joint, (0, 2), (1, 3), alpha)
        first = entropy.h_classical(p_ab, alpha, "down")
        worst_round2 = min(
            entropy.h_classical(np.einsum("s,zs->zs", p_b2, kern[:, a1, b1, :]),
                                alpha, "down")
            for a1 in range(na1) for b1 in range(nb1))
        slack = lhs - (first + worst_round2)
        slacks.append(slack + tol)
        if slack < -tol:
            failures.append({"seed": _child(cfg.seed, 4, i), "alpha": alpha,
                             "slack": slack})
    return _report("classical_chain", slacks, tol, failures, t0, n)


# ---------------------------------------------------------------------------
# f-weighted entropy properties
# ---------------------------------------------------------------------------

def _random_measure_round(rng, d_r: int, n_a: int, n_c: int, n_b: int):
    """Random B-independent measurement round: POVMs per setting + p_b."""
    p_b = random_distribution(n_b, rng)
    povms = []
    for _ in range(n_b):
        blocks = [random_density((d_r,), rng).matrix *
                  float(rng.uniform(0.2, 1.0)) for _ in range(n_a * n_c)]
        total = sum(blocks)
        from .qcore import matrix_power
        inv = matrix_power(total, -0.5)
        povms.append([inv @ g @ inv for g in blocks])
    return p_b, povms


def _measured_state(psi: DensityOperator, p_b, povms, n_a: int, n_c: int,
                    side_names) -> CqState:
    """Apply the measurement round to a pure input on (R, side...)."""
    d_r = psi.dims[0]
    d_side = psi.dim() // d_r
    regs = [creg("A", tuple(range(n_a))), creg("C", tuple(range(n_c))),
            creg("B", tuple(range(len(p_b))))]
    regs += [qreg(nm, psi.dims[1 + k]) for k, nm in enumerate(side_names)]
    w = np.zeros((n_a, n_c, len(p_b)))
    conds = {}
    t = psi.matrix.reshape(d_r, d_side, d_r, d_side)
    for b, povm in enumerate(povms):
        for a in range(n_a):
            for c in range(n_c):
                # tr_R[(F x I) psi psi^dag] on the side registers
                blk = np.einsum("ab,bsat->st", povm[a * n_c + c], t)
                tr = float(np.trace(blk).real)
                w[a, c, b] = tr * p_b[b]
                conds[(a, c, b)] = (blk / tr if tr > 1e-15
                                    else np.eye(d_side) / d_side)
    return CqState(regs, w, conds)


def check_fweighted_props(cfg: SuiteConfig) -> PropertyReport:
    t0 = time.time()
    tol = cfg.tol("fweighted", 1e-9)
    n = cfg.count("fweighted", 40)
    slacks, failures = [], []
    for i in range(n):
        rng = rng_from(_child(cfg.seed, 5, i))
        alpha = float(rng.choice(cfg.alphas))

        # (a) concavity in f of the q_B-optimized entropy
        st = random_cq((3, 2), (2, 2), rng, names=["C", "B"], qnames=["A", "E"])
        f1 = rng.uniform(-1.0, 1.0, size=3)
        f2 = rng.uniform(-1.0, 1.0, size=3)
        h1 = entropy.f_weighted_sup_qb(st, ["A"], "C", "B", f1, alpha)
        h2 = entropy.f_weighted_sup_qb(st, ["A"], "C", "B", f2, alpha)
        hm = entropy.f_weighted_sup_qb(st, ["A"], "C", "B", (f1 + f2) / 2, alpha)
        s = hm - 0.5 * (h1 + h2)
        slacks.append(s + tol)
        if s < -tol:
            failures.append({"seed": _child(cfg.seed, 5, i),
                             "check": "f-concavity", "slack": s})

        # (b) continuity in the state
        m_const = 1.4
        st_a = random_cq((3,), (2, 2), rng, names=["C"], qnames=["A", "B"])
        st_b = random_cq((3,), (2, 2), rng, names=["C"], qnames=["A", "B"])
        lam = float(rng.uniform(0.0, 0.2))
        mix_w = (1 - lam) * st_a.weights + lam * st_b.weights
        mix_c = {}
        for idx in np.ndindex(*st_a.weights.shape):
            num = ((1 - lam) * st_a.weights[idx] * st_a.conds[idx]
                   + lam * st_b.weights[idx] * st_b.conds[idx])
            mix_c[idx] = num / mix_w[idx]
        st_tau = CqState(st_a.regs, mix_w, mix_c)
        eps = trace_distance(st_a.to_density(), st_tau.to_density())
        sigma = random_density((2,), rng, rank=2).matrix
        f = rng.uniform(-m_const * 0.9, m_const * 0.45, size=3)
        ha = entropy.f_weighted(st_a, ["A"], "C", sigma, f, alpha)
        hb = entropy.f_weighted(st_tau, ["A"], "C", sigma, f, alpha)
        m_sig = float(np.linalg.eigvalsh(sigma).min())
        kappa = 2 * 3 * 2 ** math.ceil(2 * m_const) / m_sig
        bound = (alpha / (alpha - 1.0)) * math.log2(
            1.0 + eps * kappa ** ((alpha - 1.0) / alpha))
        s = bound - abs(ha - hb)
        slacks.append(s + tol)
        if s < -tol:
            failures.append({"seed": _child(cfg.seed, 5, i),
                             "check": "continuity", "gap": abs(ha - hb),
                             "bound": bound, "eps": eps})

        # (c) mixing bound for the channel-output entropy
        d_r = int(rng.integers(2, 4))
        p_b, povms = _random_measure_round(rng, d_r, 2, 2, 2)
        f_mix = rng.uniform(-0.8, 0.8, size=2)
        omegas = [random_density((d_r,), rng) for _ in range(2)]
        lam = float(rng.uniform(0.1, 0.9))
        purs = []
        for om in omegas:
            w, v = np.linalg.eigh(om.matrix)
            w = np.clip(w, 0, None)
            vec = np.zeros(d_r * d_r, dtype=complex)
            for j in range(d_r):
                vec += math.sqrt(max(w[j], 0.0)) * np.kron(v[:, j], np.eye(d_r)[j])
            purs.append(vec)
        h_parts = []
        for vec in purs:
            psi = DensityOperator(np.outer(vec, vec.conj()), (d_r, d_r),
                                  ("R", "E"))
            stm = _measured_state(psi, p_b, povms, 2, 2, ["E"])
            h_parts.append(entropy.f_weighted_sup_qb(stm, ["A"], "C", "B",
                                                     f_mix, alpha))
        psi_mix = np.zeros(d_r * d_r * 2, dtype=complex)
        psi_mix[0::2] = math.sqrt(lam) * purs[0]
        psi_mix[1::2] = math.sqrt(1.0 - lam) * purs[1]
        psi_m = DensityOperator(np.outer(psi_mix, psi_mix.conj()),
                                (d_r, d_r, 2), ("R", "E", "F"))
        stm = _measured_state(psi_m, p_b, povms, 2, 2, ["E", "F"])
        h_mix = entropy.f_weighted_sup_qb(stm, ["A"], "C", "B", f_mix, alpha)
        s = lam * h_parts[0] + (1 - lam) * h_parts[1] - h_mix
        slacks.append(s + tol)
        if s < -tol:
            failures.append({"seed": _child(cfg.seed, 5, i),
                             "check": "mixing", "slack": s})

        # (d) the divergence cap from the classical weight; two independent
        # states per instance so the default run covers twice the count
        for rep in range(2):
            st_d = random_cq((int(rng.integers(2, 5)), int(rng.integers(2, 5))),
                             (int(rng.integers(2, 4)),), rng,
                             names=["A", "B"], qnames=["E"])
            rho_e = st_d.marginal(["E"]).conds[()]
            for combo, pa, sub in st_d.group_by(["A"]):
                if pa <= 0 or sub is None:
                    continue
                ref = CqState(sub.regs, np.ones_like(sub.weights),
                              {idx: rho_e for idx, _, _, _ in sub.outcomes()})
                d_val = entropy.renyi_divergence(sub, ref, alpha)
                s = -math.log2(pa) - d_val
                slacks.append(s + tol)
                if s < -tol:
                    failures.append({"seed": _child(cfg.seed, 5, i),
                                     "check": "div_bnd", "slack": s})

        # (e) data processing under a channel on E
        st_e = random_cq((2, 2), (2, 3), rng, names=["C", "B"],
                         qnames=["A", "E"])
        f_e = rng.uniform(-0.8, 0.8, size=2)
        before = entropy.f_weighted_sup_qb(st_e, ["A"], "C", "B", f_e, alpha)
        kraus = random_kraus_channel(3, 2, 2, rng)
        after = entropy.f_weighted_sup_qb(
            st_e.apply_quantum_channel(kraus, "E"), ["A"], "C", "B", f_e, alpha)
        s = after - before
        slacks.append(s + tol)
        if s < -tol:
            failures.append({"seed": _child(cfg.seed, 5, i),
                             "check": "dpi-E", "slack": s})
    return _report("fweighted", slacks, tol, failures, t0, n)


def check_read_and_prepare(cfg: SuiteConfig) -> PropertyReport:
    """Divergence-expression identity and non-disturbance on random tuples."""
    t0 = time.time()
    tol = cfg.tol("read_and_prepare", 1e-8)
    n = cfg.count("read_and_prepare", 40)
    slacks, failures = [], []
    for i in range(n):
        rng = rng_from(_child(cfg.seed, 6, i))
        alpha = float(rng.choice(cfg.alphas))
        n_c = int(rng.integers(2, 4))
        st = random_cq((n_c,), (2, 2), rng, names=["C"], qnames=["A", "B"])
        m_const = float(rng.uniform(0.8, 1.6))
        f = rng.uniform(-m_const, m_const * 0.49, size=n_c)
        sigma = random_density((2,), rng).matrix
        rp = build_read_and_prepare(f, m_const, alpha, tuple(range(n_c)))
        for j, fc in enumerate(f):
            h_tau = entropy.renyi_entropy(rp.taus[j], alpha)
            if abs(h_tau - (m_const - fc)) > 1e-10:
                failures.append({"seed": _child(cfg.seed, 6, i),
                                 "check": "tau-target",
                                 "gap": h_tau - (m_const - fc)})
        lhs = entropy.f_weighted(st, ["A"], "C", sigma, f, alpha)
        bar = rp.apply(st, "C")
        from .qcore import embed as _embed
        ref_blk = _embed(sigma, (2, 2), (1,))
        ref = CqState(bar.regs, np.ones_like(bar.weights),
                      {idx: ref_blk for idx, _, _, _ in bar.outcomes()})
        rhs = -entropy.renyi_divergence(bar, ref, alpha) - m_const
        gap = abs(lhs - rhs)
        slacks.append(tol - gap)
        if gap > tol:
            failures.append({"seed": _child(cfg.seed, 6, i),
                             "check": "divergence-expr", "gap": gap})
        undo = bar.marginal(["C", "A", "B"])
        dist = trace_distance(undo.to_density(), st.to_density())
        if dist > 1e-12:
            failures.append({"seed": _child(cfg.seed, 6, i),
                             "check": "non-disturbance", "gap": dist})
    return _report("read_and_prepare", slacks, tol, failures, t0, n)


# ---------------------------------------------------------------------------
# two-round accumulation oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalAttack:
    """Two rounds of classical memory kernels with initial side information.

    ``initial[r0, e]`` is the joint start distribution; ``kernels[i][r, b, a,
    r']`` gives p(outcome a, new memory r' | memory r, setting b) for round i.
    """

    initial: np.ndarray
    kernels: tuple

    def marginal_kernels(self):
        return [k.sum(axis=3) for k in self.kernels]  # k[r, b, a]


def random_attack(rng, r_dim: int, e_dim: int, n_b: int, n_a: int,
                  rounds: int = 2) -> ClassicalAttack:
    initial = random_distribution(r_dim * e_dim, rng).reshape(r_dim, e_dim)
    kernels = []
    for _ in range(rounds):
        k = np.zeros((r_dim, n_b, n_a, r_dim))
        for r in range(r_dim):
            for b in range(n_b):
                k[r, b] = random_distribution(n_a * r_dim, rng).reshape(
                    n_a, r_dim)
        kernels.append(k)
    return ClassicalAttack(initial, tuple(kernels))


@dataclass(frozen=True)
class TwoRoundResult:
    lhs_exact: float
    bound: float
    h_alpha: float
    p_omega: float

    @property
    def slack(self) -> float:
        return self.lhs_exact - self.bound


def _round_rate_min(proto: SamplingProtocol, k_marg: np.ndarray,
                    cset: ConstraintSet, alpha: float) -> float:
    """min over memory distributions q of the certified single-round objective.

    The channel pinches its classical memory and data processing lets the
    side-information copy be classical, so the infimum over input states
    reduces to distributions q on the memory alphabet; a grid plus simplex
    polish finds the minimum of the resulting smooth low-dimensional
    function.
    """
    r_dim = k_marg.shape[0]
    gamma = proto.gamma
    n_c = len(proto.c_alphabet)
    c_index = {c: j for j, c in enumerate(proto.c_alphabet)}
    # p_C(q) = base + mat q (affine); bot row is constant 1 - gamma
    mat = np.zeros((n_c, r_dim))
    for ib, b in enumerate(proto.settings):
        for ia, a in enumerate(proto.outcomes):
            j = c_index[proto.score[(a, b)]]
            mat[j] += gamma * proto.p_test[ib] * k_marg[:, ib, ia]
    mat[c_index[BOT]] = 0.0
    base = np.zeros(n_c)
    base[c_index[BOT]] = 1.0 - gamma
    s_tab = (k_marg ** alpha).sum(axis=2)  # s[r, b]
    gen_on = proto.p_gen > 0.0

    def value(q):
        p_c = base + mat @ q
        inner = q @ s_tab  # per-b sum_a p(a|q,b)^alpha
        mix = float((proto.p_gen[gen_on] *
                     inner[gen_on] ** (1.0 / alpha)).sum())
        h_gen = (alpha / (1.0 - alpha)) * math.log2(mix)
        return inner_inf_v(p_c, max(h_gen, 0.0), cset, alpha).value

    res = {2: 48, 3: 20, 4: 12}.get(r_dim, 10)
    grid = simplex_grid(r_dim, res)
    vals = [value(q) for q in grid]
    best = int(np.argmin(vals))
    best_val = vals[best]
    if r_dim > 1:
        from .eatrate import _softmax
        x0 = np.log(np.maximum(grid[best], 1e-6))
        x, val, _ = nelder_mead(lambda x: value(_softmax(x)), x0,
                                scale=0.25, tol=1e-13, max_iter=600)
        best_val = min(best_val, val)
    return best_val


def simulate_two_rounds(proto: SamplingProtocol, attack: ClassicalAttack,
                        cset: ConstraintSet, alpha: float) -> TwoRoundResult:
    """Exact two-round entropy versus the accumulated finite-size bound.

    Enumerates the full classical joint of two spot-checking rounds under the
    memory attack, conditions on the score-frequency event, evaluates the
    optimized entropy of (outputs, scores) given (settings, side info)
    exactly, and compares with twice the certified single-round rate minus
    the conditioning penalty.
    """
    alpha = entropy.check_alpha(alpha)
    if tuple(cset.alphabet) != tuple(proto.c_alphabet):
        raise InfeasibleError("constraint alphabet differs from protocol")
    n_a, n_b = len(proto.outcomes), len(proto.settings)
    n_c = len(proto.c_alphabet)
    r_dim, e_dim = attack.initial.shape
    pt = np.array([1.0 - proto.gamma, proto.gamma])
    pb_t = np.stack([proto.p_gen, proto.p_test])  # [t, b]
    c_of = np.zeros((2, n_b, n_a), dtype=int)
    c_index = {c: j for j, c in enumerate(proto.c_alphabet)}
    for ib, b in enumerate(proto.settings):
        for ia, a in enumerate(proto.outcomes):
            c_of[0, ib, ia] = c_index[BOT]
            c_of[1, ib, ia] = c_index[proto.score[(a, b)]]
    k1, k2 = attack.kernels
    # joint over (e, t1, b1, a1, t2, b2, a2), memories summed
    s1 = np.einsum("re,t,tb,rbaq->etbaq", attack.initial, pt, pb_t, k1)
    joint = np.einsum("etbaq,s,sc,qcdw->etbascd", s1, pt, pb_t, k2)
    # axes: e t1 b1 a1 t2 b2 a2 -> wait: einsum output etbascd: e,t1,b1,a1,s=t2,c=b2,d=a2
    freq_member = np.zeros((2, n_b, n_a, 2, n_b, n_a), dtype=bool)
    for t1, b1, a1, t2, b2, a2 in itertools.product(
            range(2), range(n_b), range(n_a), range(2), range(n_b), range(n_a)):
        f = np.zeros(n_c)
        f[c_of[t1, b1, a1]] += 0.5
        f[c_of[t2, b2, a2]] += 0.5
        freq_member[t1, b1, a1, t2, b2, a2] = cset.contains(f, tol=1e-12)
    mask = freq_member[None, ...]
    p_omega = float(joint[np.broadcast_to(mask, joint.shape)].sum())
    p_omega = 1.0 if p_omega > 1.0 - 1e-12 else p_omega
    if p_omega <= 1e-14:
        raise EmptyEventError("the non-abort event has zero probability")
    cond = np.where(mask, joint, 0.0) / p_omega
    # H_up(A^2 C^2 | B^2 E): condition on (e, t1, b1, t2, b2); inner over
    # (a1, c1, a2, c2) -- c is a function of (t, b, a), so inner over (a1, a2)
    tot = 0.0
    for e, t1, b1, t2, b2 in itertools.product(
            range(e_dim), range(2), range(n_b), range(2), range(n_b)):
        blk = cond[e, t1, b1, :, t2, b2, :]
        w = float(blk.sum())
        if w <= 0.0:
            continue
        tot += w * float(((blk / w) ** alpha).sum()) ** (1.0 / alpha)
    lhs = (alpha / (1.0 - alpha)) * math.log2(tot)
    h_alpha = min(_round_rate_min(proto, km, cset, alpha)
                  for km in attack.marginal_kernels())
    bound = finite_size_bound(2, h_alpha, p_omega, alpha)
    return TwoRoundResult(lhs_exact=lhs, bound=bound, h_alpha=h_alpha,
                          p_omega=p_omega)


def _random_protocol(rng, n_a: int, n_b: int, d: int = 1) -> SamplingProtocol:
    outcomes = tuple(str(a) for a in range(n_a))
    settings = tuple(str(b) for b in range(n_b))
    bits = ["".join(t) for t in itertools.product("01", repeat=d)]
    score = {(a, b): bits[int(rng.integers(0, len(bits)))]
             for a in outcomes for b in settings}
    return SamplingProtocol(
        gamma=float(rng.uniform(0.05, 0.95)),
        outcomes=outcomes, settings=settings,
        p_gen=random_distribution(n_b, rng),
        p_test=random_distribution(n_b, rng),
        score=score, d=d)


def check_two_round_accumulation(cfg: SuiteConfig) -> PropertyReport:
    t0 = time.time()
    tol = cfg.tol("two_round", 1e-9)
    n = cfg.count("two_round", 40)
    slacks, failures = [], []
    done = 0
    i = 0
    while done < n:
        rng = rng_from(_child(cfg.seed, 7, i))
        i += 1
        alpha = float(rng.choice(cfg.alphas))
        n_a = int(rng.integers(2, 5))
        n_b = int(rng.integers(2, 5))
        r_dim = int(rng.integers(2, 5))
        e_dim = int(rng.integers(1, 5))
        proto = _random_protocol(rng, n_a, n_b)
        attack = random_attack(rng, r_dim, e_dim, n_b, n_a)
        # build a non-abort set around an achievable score frequency
        k_marg = attack.marginal_kernels()[0]
        q0 = attack.initial.sum(axis=1)
        p_c = np.zeros(len(proto.c_alphabet))
        c_index = {c: j for j, c in enumerate(proto.c_alphabet)}
        p_c[c_index[BOT]] = 1.0 - proto.gamma
        for ib, b in enumerate(proto.settings):
            for ia, a in enumerate(proto.outcomes):
                p_c[c_index[proto.score[(a, b)]]] += \
                    proto.gamma * proto.p_test[ib] * float(q0 @ k_marg[:, ib, ia])
        kind = int(rng.integers(0, 3))
        if kind == 0:
            cset = ConstraintSet.full_simplex(proto.c_alphabet)
        elif kind == 1:
            sym = proto.c_alphabet[int(rng.integers(0, len(proto.c_alphabet)))]
            level = max(0.0, p_c[c_index[sym]] - float(rng.uniform(0.05, 0.4)))
            cset = ConstraintSet.min_mass(proto.c_alphabet, sym, level)
        else:
            sym = proto.c_alphabet[int(rng.integers(0, len(proto.c_alphabet)))]
            level = min(1.0, p_c[c_index[sym]] + float(rng.uniform(0.05, 0.4)))
            cset = ConstraintSet.max_mass(proto.c_alphabet, sym, level)
        try:
            res = simulate_two_rounds(proto, attack, cset, alpha)
        except EmptyEventError:
            continue
        done += 1
        slacks.append(res.slack + tol)
        if res.slack < -tol:
            failures.append({"seed": _child(cfg.seed, 7, i - 1),
                             "alpha": alpha, "lhs": res.lhs_exact,
                             "bound": res.bound, "p_omega": res.p_omega})
    return _report("two_round_accumulation", slacks, tol, failures, t0, done)


# ---------------------------------------------------------------------------
# the suite
# ---------------------------------------------------------------------------

ALL_CHECKS = {
    "ordering": check_ordering,
    "partial_props": check_partial_entropy_props,
    "chain_rule": check_chain_rule,
    "classical_chain": check_classical_chain,
    "fweighted": check_fweighted_props,
    "read_and_prepare": check_read_and_prepare,
    "two_round": check_two_round_accumulation,
}


def run_property_suite(cfg: SuiteConfig, only=None) -> SuiteReport:
    names = [only] if only else list(ALL_CHECKS)
    results = [ALL_CHECKS[name](cfg) for name in names]
    return SuiteReport(seed=cfg.seed, results=results)
