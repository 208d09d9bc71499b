"""Quantum channels and the special constructions used by the rate machinery.

Covers plain Kraus channels, per-setting CP map families, infrequent-sampling
round channels (spot checking), read-and-prepare channels that encode a
tradeoff weight into the entropy of an appended register, the reweighted
state behind the two-term divergence decomposition, and two-qubit
measurement strategies with Bell functionals.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .entropy import check_alpha, renyi_divergence
from .errors import (
    AlphabetMismatchError,
    DimMismatchError,
    SupportViolationError,
    TargetOutOfRangeError,
)
from .qcore import (
    CqState,
    DensityOperator,
    creg,
    embed,
    matrix_power,
    qreg,
    rng_from,
    support_contained,
    tensor,
    trace_distance,
)

BOT = "⊥"

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


# ---------------------------------------------------------------------------
# Kraus channels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KrausChannel:
    """Completely positive map given by a Kraus operator list."""

    kraus: tuple
    in_dims: tuple[int, ...]
    out_dims: tuple[int, ...]
    cp_only: bool = False

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        din = int(np.prod(self.in_dims, initial=1))
        dout = int(np.prod(self.out_dims, initial=1))
        for k in ks:
            if k.shape != (dout, din):
                raise DimMismatchError(f"Kraus block {k.shape} vs ({dout},{din})")
        object.__setattr__(self, "kraus", ks)
        object.__setattr__(self, "in_dims", tuple(int(d) for d in self.in_dims))
        object.__setattr__(self, "out_dims", tuple(int(d) for d in self.out_dims))

    def completeness(self) -> np.ndarray:
        din = int(np.prod(self.in_dims, initial=1))
        s = np.zeros((din, din), dtype=complex)
        for k in self.kraus:
            s += k.conj().T @ k
        return s

    def validate(self, tol: float = 1e-9) -> "KrausChannel":
        s = self.completeness()
        eye = np.eye(s.shape[0])
        if self.cp_only:
            w = np.linalg.eigvalsh(eye - s)
            if w.min() < -tol:
                raise DimMismatchError("CP-only channel exceeds trace preservation")
        elif np.abs(s - eye).max() > tol:
            raise DimMismatchError("channel is not trace preserving")
        return self

    def apply_matrix(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        out = None
        for k in self.kraus:
            term = k @ rho @ k.conj().T
            out = term if out is None else out + term
        return out

    def apply(self, rho: DensityOperator) -> DensityOperator:
        if rho.dims != self.in_dims:
            raise DimMismatchError(f"input dims {rho.dims} vs {self.in_dims}")
        return DensityOperator(self.apply_matrix(rho.matrix), self.out_dims,
                               normalized=not self.cp_only)

    def compose(self, first: "KrausChannel") -> "KrausChannel":
        """self after first: (self . first)(rho) = self(first(rho))."""
        if first.out_dims != self.in_dims:
            raise DimMismatchError("composition dims mismatch")
        ks = tuple(a @ b for a in self.kraus for b in first.kraus)
        return KrausChannel(ks, first.in_dims, self.out_dims,
                            cp_only=self.cp_only or first.cp_only)

    @staticmethod
    def identity(dims) -> "KrausChannel":
        dims = (dims,) if isinstance(dims, int) else tuple(dims)
        d = int(np.prod(dims, initial=1))
        return KrausChannel((np.eye(d, dtype=complex),), dims, dims)

    @staticmethod
    def dephasing(dim: int) -> "KrausChannel":
        ks = tuple(np.outer(np.eye(dim)[i], np.eye(dim)[i]).astype(complex)
                   for i in range(dim))
        return KrausChannel(ks, (dim,), (dim,))

    @staticmethod
    def from_isometry(v, in_dim: int, out_dim: int, env_dim: int) -> "KrausChannel":
        """Stinespring dilation V: in -> out*env, traced over the environment."""
        v = np.asarray(v, dtype=complex)
        if v.shape != (out_dim * env_dim, in_dim):
            raise DimMismatchError("isometry shape mismatch")
        ks = tuple(v[i * out_dim:(i + 1) * out_dim, :] for i in range(env_dim))
        return KrausChannel(ks, (in_dim,), (out_dim,))


def apply(ch: KrausChannel, rho):
    return ch.apply(rho) if isinstance(rho, DensityOperator) else ch.apply_matrix(rho)


def compose(ch2: KrausChannel, ch1: KrausChannel) -> KrausChannel:
    return ch2.compose(ch1)


@dataclass(frozen=True)
class CPMapFamily:
    """CP maps M^{a|b} indexed by outcome and setting, trace preserving per b."""

    maps: dict
    outcomes: tuple
    settings: tuple

    def __post_init__(self):
        for b in self.settings:
            for a in self.outcomes:
                if (a, b) not in self.maps:
                    raise AlphabetMismatchError(f"missing map for ({a!r}, {b!r})")

    def validate(self, seed=0, trials: int = 3, tol: float = 1e-9) -> "CPMapFamily":
        from .qcore import random_density
        rng = rng_from(seed)
        any_map = next(iter(self.maps.values()))
        din = int(np.prod(any_map.in_dims, initial=1))
        for _ in range(trials):
            omega = random_density((din,), rng).matrix
            for b in self.settings:
                tot = sum(np.trace(self.maps[(a, b)].apply_matrix(omega)).real
                          for a in self.outcomes)
                if abs(tot - 1.0) > tol:
                    raise DimMismatchError(
                        f"family not normalized at setting {b!r}: {tot}")
        return self


# ---------------------------------------------------------------------------
# infrequent sampling channels
# ---------------------------------------------------------------------------

def score_alphabet(d: int) -> tuple:
    """The spot-check score alphabet {0,1}^d + the generation symbol."""
    bits = ["".join(t) for t in itertools.product("01", repeat=d)]
    return tuple(bits) + (BOT,)


@dataclass(frozen=True)
class SamplingProtocol:
    """Spot-checking round description: test with probability gamma.

    ``score(a, b)`` maps outcome and setting to a d-bit string on test rounds;
    generation rounds record the bot symbol.
    """

    gamma: float
    outcomes: tuple
    settings: tuple
    p_gen: np.ndarray
    p_test: np.ndarray
    score: dict
    d: int = 1

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise TargetOutOfRangeError(f"gamma {self.gamma} outside [0, 1]")
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "settings", tuple(self.settings))
        for name in ("p_gen", "p_test"):
            p = np.asarray(getattr(self, name), dtype=float)
            if p.shape != (len(self.settings),) or abs(p.sum() - 1) > 1e-9 \
                    or p.min() < -1e-12:
                raise AlphabetMismatchError(f"{name} is not a distribution on B")
            object.__setattr__(self, name, p)
        want = set("".join(t) for t in itertools.product("01", repeat=self.d))
        for a in self.outcomes:
            for b in self.settings:
                if (a, b) not in self.score:
                    raise AlphabetMismatchError(f"score missing ({a!r}, {b!r})")
                if self.score[(a, b)] not in want:
                    raise AlphabetMismatchError(
                        f"score value {self.score[(a, b)]!r} not a {self.d}-bit string")

    @property
    def c_alphabet(self) -> tuple:
        return score_alphabet(self.d)


class SamplingChannel:
    """One spot-checking round, built from a strategy or a CP map family.

    The output is classical on (A, C, T, B) with the quantum leftovers
    appended: Eve's purifier for strategy mode, any bystander register for
    family mode.
    """

    def __init__(self, proto: SamplingProtocol, p_a_given_b, cond_for,
                 cond_dims, cond_name: str = "E"):
        self.proto = proto
        self._p = p_a_given_b  # dict (a, b) -> prob
        self._cond = cond_for  # dict (a, b) -> density matrix on leftovers
        self._cond_dims = tuple(cond_dims)
        self._cond_name = cond_name
        self.b_names = ("T", "B")

    def output_state(self) -> CqState:
        proto = self.proto
        regs = [creg("A", proto.outcomes), creg("C", proto.c_alphabet),
                creg("T", (0, 1)), creg("B", proto.settings)]
        qd = int(np.prod(self._cond_dims, initial=1))
        if qd > 1:
            regs.append(qreg(self._cond_name, qd))
        shape = tuple(len(r.alphabet) for r in regs if r.is_classical)
        w = np.zeros(shape)
        conds: dict = {}
        c_idx = {c: i for i, c in enumerate(proto.c_alphabet)}
        for ia, a in enumerate(proto.outcomes):
            for ib, b in enumerate(proto.settings):
                p_ab = self._p[(a, b)]
                if p_ab <= 0.0:
                    continue
                blk = self._cond[(a, b)]
                for t, (pt, pb) in enumerate(
                        ((1.0 - proto.gamma, proto.p_gen[ib]),
                         (proto.gamma, proto.p_test[ib]))):
                    c = BOT if t == 0 else proto.score[(a, b)]
                    idx = (ia, c_idx[c], t, ib)
                    val = pt * pb * p_ab
                    if val <= 0.0:
                        continue
                    w[idx] += val
                    conds[idx] = blk if qd > 1 else np.ones((1, 1))
        return CqState(regs, w, conds)

    def p_c(self) -> np.ndarray:
        """Marginal score distribution over the protocol's c alphabet."""
        out = self.output_state().marginal(["C"])
        return out.weights.copy()


def build_sampling_channel(strategy, proto: SamplingProtocol,
                           outputs: str = "alice") -> SamplingChannel:
    """Bind a device strategy (or CP map family) to a sampling protocol."""
    if isinstance(strategy, TwoQubitStrategy):
        table = strategy.response_table(proto.settings, outputs=outputs)
        missing = [a for a in proto.outcomes if a not in table.outcomes]
        if missing:
            raise AlphabetMismatchError(f"protocol outcomes {missing} unknown "
                                        "to the strategy")
        extra = [a for a in table.outcomes if a not in proto.outcomes]
        if extra:
            raise AlphabetMismatchError(f"strategy outcomes {extra} unknown "
                                        "to the protocol")
        return SamplingChannel(proto, table.p, table.cond, table.cond_dims)
    if isinstance(strategy, CPMapFamily):
        if tuple(strategy.outcomes) != tuple(proto.outcomes) or \
                tuple(strategy.settings) != tuple(proto.settings):
            raise AlphabetMismatchError("family alphabets do not match protocol")

        def bound(omega: DensityOperator, rp_dims=()):
            return _family_round(strategy, proto, omega, rp_dims)

        return bound
    raise AlphabetMismatchError(f"unsupported strategy type {type(strategy)!r}")


def _family_round(family: CPMapFamily, proto: SamplingProtocol,
                  omega: DensityOperator, rp_dims) -> CqState:
    """Apply one sampling round built on a CP family to omega on (R, R')."""
    any_map = next(iter(family.maps.values()))
    din = int(np.prod(any_map.in_dims, initial=1))
    d_rp = omega.dim() // din
    regs = [creg("A", proto.outcomes), creg("C", proto.c_alphabet),
            creg("T", (0, 1)), creg("B", proto.settings)]
    if d_rp > 1:
        regs.append(qreg("Rp", d_rp))
    shape = tuple(len(r.alphabet) for r in regs if r.is_classical)
    w = np.zeros(shape)
    conds: dict = {}
    c_idx = {c: i for i, c in enumerate(proto.c_alphabet)}
    for ia, a in enumerate(proto.outcomes):
        for ib, b in enumerate(proto.settings):
            ch = family.maps[(a, b)]
            dout = int(np.prod(ch.out_dims, initial=1))
            big = [np.kron(k, np.eye(d_rp)) for k in ch.kraus]
            moved = None
            for k in big:
                term = k @ omega.matrix @ k.conj().T
                moved = term if moved is None else moved + term
            # trace out the updated memory, keep the bystander
            t4 = moved.reshape(dout, d_rp, dout, d_rp)
            left = np.trace(t4, axis1=0, axis2=2)
            p_ab = float(np.trace(left).real)
            if p_ab <= 1e-15:
                continue
            blk = left / p_ab
            for t, (pt, pb) in enumerate(((1.0 - proto.gamma, proto.p_gen[ib]),
                                          (proto.gamma, proto.p_test[ib]))):
                c = BOT if t == 0 else proto.score[(a, b)]
                idx = (ia, c_idx[c], t, ib)
                val = pt * pb * p_ab
                if val <= 0.0:
                    continue
                w[idx] += val
                conds[idx] = blk if d_rp > 1 else np.ones((1, 1))
    return CqState(regs, w, conds)


def check_b_independence(round_channel, trials: int, seed, r_dim: int,
                         rp_dim: int = 2, b_names=("T", "B"),
                         rp_name: str = "Rp", tol: float = 1e-8):
    """Empirical check of the side-information independence condition.

    Feeds random entangled inputs on (R, R') through the round channel and
    measures || rho_{B R'} - rho_B x omega_{R'} ||_1 / 2. Returns
    (all_below_tol, worst_deviation).
    """
    from .qcore import random_density
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(trials):
        omega = random_density((r_dim, rp_dim), rng)
        omega = DensityOperator(omega.matrix, (r_dim, rp_dim), ("R", "Rp"))
        out = round_channel(omega) if callable(round_channel) \
            else round_channel.apply(omega)
        keep = [n for n in b_names if out.has_register(n)]
        joint = out.marginal(list(keep) + [rp_name]).to_density()
        marg_b = out.marginal(list(keep)).to_density()
        marg_rp = omega.partial_trace_labels(["Rp"])
        dev = trace_distance(joint, tensor(marg_b, marg_rp))
        worst = max(worst, dev)
    return worst < tol, worst


# ---------------------------------------------------------------------------
# read-and-prepare channels
# ---------------------------------------------------------------------------

def flat_spike_distribution(target: float, alpha: float, dim: int,
                            tol: float = 1e-13) -> np.ndarray:
    """Distribution (x, (1-x)/(d-1), ...) with Renyi entropy = target.

    Solved by bisection on x in [1/d, 1]; the entropy decreases from log2(d)
    to 0 over that interval.
    """
    alpha = check_alpha(alpha)
    if dim < 1:
        raise TargetOutOfRangeError("dimension must be positive")
    top = math.log2(dim)
    if target < -1e-12 or target > top + 1e-12:
        raise TargetOutOfRangeError(f"entropy {target} outside [0, {top}]")
    if dim == 1 or target <= 0.0:
        out = np.zeros(dim)
        out[0] = 1.0
        return out

    def h_of(x: float) -> float:
        rest = (1.0 - x) / (dim - 1)
        tot = x ** alpha + (dim - 1) * rest ** alpha
        return math.log2(tot) / (1.0 - alpha)

    lo, hi = 1.0 / dim, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h_of(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * 0.01:
            break
    x = 0.5 * (lo + hi)
    out = np.full(dim, (1.0 - x) / (dim - 1))
    out[0] = x
    return out


@dataclass(frozen=True)
class ReadAndPrepareChannel:
    """Reads a classical register and appends a fresh classical register D.

    The appended state tau(c) is chosen with H_alpha(tau(c)) = M - f_c; the
    input passes through untouched (tracing D undoes the channel).
    """

    alphabet: tuple
    taus: tuple
    m_const: float
    alpha: float

    @property
    def dim_d(self) -> int:
        return len(self.taus[0])

    def tau(self, symbol) -> np.ndarray:
        return self.taus[self.alphabet.index(symbol)]

    def apply(self, state: CqState, c_name: str, d_name: str = "D") -> CqState:
        if tuple(state.alphabet(c_name)) != self.alphabet:
            raise AlphabetMismatchError(
                f"register {c_name!r} alphabet does not match the channel")
        pos = state.classical_names.index(c_name)
        taus = self.taus

        def dist_for(outcome):
            sym = outcome[pos]
            return taus[self.alphabet.index(sym)]

        return state.append_classical(d_name, tuple(range(self.dim_d)), dist_for)


def build_read_and_prepare(f, m_const: float, alpha: float,
                           alphabet) -> ReadAndPrepareChannel:
    """Read-and-prepare channel with exact per-symbol entropy targets M - f_c."""
    alpha = check_alpha(alpha)
    alphabet = tuple(alphabet)
    if isinstance(f, dict):
        f_arr = np.array([float(f[c]) for c in alphabet])
    else:
        f_arr = np.asarray(f, dtype=float)
        if f_arr.shape != (len(alphabet),):
            raise AlphabetMismatchError("tradeoff vector length mismatch")
    if m_const <= 0.0:
        raise TargetOutOfRangeError("cap M must be positive")
    if np.any(m_const - f_arr <= m_const / 2.0):
        raise TargetOutOfRangeError("need f_c < M/2 for every score symbol")
    dim_d = 2 ** math.ceil(float(np.max(m_const - f_arr)) - 1e-12)
    taus = tuple(flat_spike_distribution(m_const - fc, alpha, dim_d)
                 for fc in f_arr)
    return ReadAndPrepareChannel(alphabet, taus, float(m_const), alpha)


# ---------------------------------------------------------------------------
# reweighted state and the two-term divergence decomposition
# ---------------------------------------------------------------------------

def _embedded(op, rho: DensityOperator, labels) -> np.ndarray:
    return embed(op, rho.dims, rho.indices_of(labels))


def reweighted_state(state: CqState, a1: str, b1: str, a2: str, b2: str,
             sigma_b1, alpha: float) -> CqState:
    """Reweighted cq-state nu for a state classical on b2.

    Requires the side-information product structure (the (a1, b1) marginal
    must not depend on the b2 outcome). The output shares its conditional
    operator with the input: conditioning the reweighted state on (A1, B1)
    reproduces the input's (A2, B2) conditional exactly.
    """
    alpha = check_alpha(alpha)
    if not state.reg(b2).is_classical:
        raise AlphabetMismatchError(f"register {b2!r} must be classical")
    sigma_b1 = sigma_b1.matrix if isinstance(sigma_b1, DensityOperator) else \
        np.asarray(sigma_b1, dtype=complex)
    keep = [n for n in state.names if n in (a1, b1)]
    rho_ab = state.marginal(keep).to_density()
    if not support_contained(rho_ab.partial_trace_labels([b1]).matrix, sigma_b1):
        raise SupportViolationError("supp(rho_B1) exceeds supp(sigma_B1)")
    blocks = {}
    for combo, p, sub in state.group_by([b2]):
        if p <= 0.0 or sub is None:
            continue
        marg = sub.marginal(keep).to_density()
        if trace_distance(marg, rho_ab) > 1e-8:
            raise SupportViolationError(
                "the (A1, B1) marginal depends on the b2 outcome; the "
                "decomposition needs rho_{A1 B1 B2} = rho_{A1 B1} x rho_{B2}")
    alpha_p = (alpha - 1.0) / alpha
    sig_pow = _embedded(matrix_power(sigma_b1, -alpha_p), rho_ab, [b1])
    root = matrix_power(rho_ab.matrix, 0.5)
    core = matrix_power(root @ sig_pow @ root, alpha)
    nu_ab = core / np.trace(core).real
    k_small = matrix_power(nu_ab, 0.5) @ matrix_power(rho_ab.matrix, -0.5)
    # push each b2 block through K . K^dag on the (A1, B1) factors
    sample = next(sub for _, p, sub in state.group_by([b2]) if p > 0.0)
    qnames = sample.quantum_names
    qdims = sample.qdims
    pos = [i for i, n in enumerate(qnames) if n in (a1, b1)]
    k_big = embed(k_small, qdims, pos)
    new_conds = {}
    w = np.zeros(len(state.alphabet(b2)))
    for j, (combo, p, sub) in enumerate(state.group_by([b2])):
        w[j] = p
        if p <= 0.0 or sub is None:
            continue
        dense = sub.to_density()
        blk = k_big @ dense.matrix @ k_big.conj().T
        tr = np.trace(blk).real
        new_conds[(j,)] = blk / tr if tr > 1e-14 else blk
    regs = [creg(b2, state.alphabet(b2))] + \
        [qreg(n, d) for n, d in zip(qnames, qdims)]
    return CqState(regs, w, new_conds)


def decomposition_gap(rho: DensityOperator, a1_labels, a2_labels,
                          b_labels, sigma_b, alpha: float) -> float:
    """|LHS - RHS| of the two-term divergence decomposition.

    LHS = -D_alpha(rho_{A1 A2 B} || I x sigma_B); RHS subtracts the (A1, B)
    part and adds H_down(A2 | A1 B) on the reweighted state.
    """
    alpha = check_alpha(alpha)
    sigma_b = sigma_b.matrix if isinstance(sigma_b, DensityOperator) else \
        np.asarray(sigma_b, dtype=complex)
    a1_labels, a2_labels, b_labels = map(list, (a1_labels, a2_labels, b_labels))
    if not support_contained(rho.partial_trace_labels(b_labels).matrix, sigma_b):
        raise SupportViolationError("supp(rho_B) exceeds supp(sigma_B)")
    ref_full = _embedded(sigma_b, rho, b_labels)
    lhs = -renyi_divergence(rho.matrix, ref_full, alpha)

    keep = [n for n in rho.labels if n in set(a1_labels) | set(b_labels)]
    rho_a1b = rho.partial_trace_labels(keep)
    ref_small = _embedded(sigma_b, rho_a1b, b_labels)
    term1 = -renyi_divergence(rho_a1b.matrix, ref_small, alpha)

    alpha_p = (alpha - 1.0) / alpha
    root = matrix_power(rho_a1b.matrix, 0.5)
    core = matrix_power(
        root @ _embedded(matrix_power(sigma_b, -alpha_p), rho_a1b, b_labels) @ root,
        alpha)
    nu_small = core / np.trace(core).real
    inv_root_big = _embedded(matrix_power(rho_a1b.matrix, -0.5), rho, keep)
    cond_op = inv_root_big @ rho.matrix @ inv_root_big
    nu_root_big = _embedded(matrix_power(nu_small, 0.5), rho, keep)
    nu_full = nu_root_big @ cond_op @ nu_root_big
    nu_ref = _embedded(nu_small, rho, keep)
    term2 = -renyi_divergence(nu_full, nu_ref, alpha)
    return abs(lhs - (term1 + term2))


# ---------------------------------------------------------------------------
# two-qubit strategies and Bell functionals
# ---------------------------------------------------------------------------

def bloch_projectors(theta: float, phi: float = 0.0):
    """Two-outcome projective qubit measurement along the Bloch direction."""
    n = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi),
         math.cos(theta))
    obs = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
    eye = np.eye(2, dtype=complex)
    return (eye + obs) / 2.0, (eye - obs) / 2.0


@dataclass(frozen=True)
class ResponseTable:
    outcomes: tuple
    p: dict
    cond: dict
    cond_dims: tuple


@dataclass(frozen=True)
class TwoQubitStrategy:
    """Shared two-qubit state plus projective qubit measurements per setting.

    Measurement angles are (theta, phi) Bloch pairs; mixed states are purified
    onto Eve's register when responses are computed.
    """

    state: DensityOperator
    meas_a: tuple
    meas_b: tuple

    def __post_init__(self):
        if self.state.dims != (2, 2):
            raise DimMismatchError("strategy state must live on two qubits")
        object.__setattr__(self, "meas_a",
                           tuple((float(t), float(p)) for t, p in self.meas_a))
        object.__setattr__(self, "meas_b",
                           tuple((float(t), float(p)) for t, p in self.meas_b))

    @staticmethod
    def from_schmidt(theta: float, meas_a, meas_b) -> "TwoQubitStrategy":
        vec = np.zeros(4, dtype=complex)
        vec[0] = math.cos(theta)
        vec[3] = math.sin(theta)
        mat = np.outer(vec, vec.conj())
        return TwoQubitStrategy(DensityOperator(mat, (2, 2), ("Qa", "Qb")),
                                tuple(meas_a), tuple(meas_b))

    @staticmethod
    def from_params(params, n_a: int, n_b: int) -> "TwoQubitStrategy":
        """Planar parametrization: Schmidt angle + one polar angle per setting."""
        params = np.asarray(params, dtype=float)
        if params.shape != (1 + n_a + n_b,):
            raise DimMismatchError(f"want {1 + n_a + n_b} parameters")
        theta = params[0]
        meas_a = tuple((t, 0.0) for t in params[1:1 + n_a])
        meas_b = tuple((t, 0.0) for t in params[1 + n_a:])
        return TwoQubitStrategy.from_schmidt(theta, meas_a, meas_b)

    @staticmethod
    def chsh_tsirelson() -> "TwoQubitStrategy":
        """Maximally entangled state with the standard CHSH-optimal angles."""
        return TwoQubitStrategy.from_schmidt(
            math.pi / 4,
            meas_a=((0.0, 0.0), (math.pi / 2, 0.0)),
            meas_b=((math.pi / 4, 0.0), (-math.pi / 4, 0.0)))

    def projectors_a(self, x: int):
        return bloch_projectors(*self.meas_a[x])

    def projectors_b(self, y: int):
        return bloch_projectors(*self.meas_b[y])

    def observable_a(self, x: int):
        p0, p1 = self.projectors_a(x)
        return p0 - p1

    def observable_b(self, y: int):
        p0, p1 = self.projectors_b(y)
        return p0 - p1

    def purified(self) -> DensityOperator:
        return self.state.purify(copy_label="E")

    def setting_labels(self, settings: str = "pairs") -> tuple:
        if settings == "pairs":
            return tuple(f"{x}{y}" for x in range(len(self.meas_a))
                         for y in range(len(self.meas_b)))
        if settings == "alice":
            return tuple(str(x) for x in range(len(self.meas_a)))
        raise AlphabetMismatchError(f"unknown settings mode {settings!r}")

    def response_table(self, setting_labels, outputs: str = "alice") -> ResponseTable:
        """Outcome probabilities and Eve conditionals per (outcome, setting).

        Setting labels "xy" address the pair (Alice x, Bob y); a bare "x"
        addresses Alice alone. ``outputs`` selects whether the recorded
        outcome is Alice's bit or the joint pair "ab".
        """
        pur = self.purified()
        d_e = pur.dims[2]
        mat = pur.matrix
        dims = pur.dims
        p: dict = {}
        cond: dict = {}
        outcome_set: list = []
        for lab in setting_labels:
            sx = int(str(lab)[0])
            has_y = len(str(lab)) > 1
            pa = self.projectors_a(sx)
            pb = self.projectors_b(int(str(lab)[1])) if has_y else None
            if outputs == "alice":
                combos = [(str(a), (a, None)) for a in range(2)]
            elif outputs == "pair":
                if not has_y:
                    raise AlphabetMismatchError(
                        "pair outputs need pair settings")
                combos = [(f"{a}{b}", (a, b)) for a in range(2)
                          for b in range(2)]
            else:
                raise AlphabetMismatchError(f"unknown outputs mode {outputs!r}")
            for sym, (a, b) in combos:
                proj = pa[a]
                if b is not None:
                    proj = np.kron(pa[a], pb[b])
                    big = embed(proj, dims, (0, 1))
                else:
                    big = embed(proj, dims, (0,))
                sub = big @ mat @ big.conj().T
                reduced = DensityOperator(sub, dims, pur.labels,
                                          normalized=False)
                blk = reduced.partial_trace_labels(["E"]).matrix
                prob = float(np.trace(blk).real)
                p[(sym, lab)] = prob
                cond[(sym, lab)] = blk / prob if prob > 1e-15 else \
                    np.eye(d_e) / d_e
                if sym not in outcome_set:
                    outcome_set.append(sym)
        return ResponseTable(tuple(outcome_set), p, cond, (d_e,))


def strategy_to_cq(strategy: TwoQubitStrategy, p_b, settings: str = "pairs",
                   outputs: str = "alice") -> CqState:
    """Classical (A, B) with Eve's purifier: sum_ab p(b) p(a|b) |ab><ab| x rho_E."""
    labels = strategy.setting_labels(settings)
    p_b = np.asarray(p_b, dtype=float)
    if p_b.shape != (len(labels),):
        raise AlphabetMismatchError("p_b length does not match the settings")
    table = strategy.response_table(labels, outputs=outputs)
    regs = [creg("A", table.outcomes), creg("B", labels),
            qreg("E", int(np.prod(table.cond_dims, initial=1)))]
    w = np.zeros((len(table.outcomes), len(labels)))
    conds = {}
    for i, a in enumerate(table.outcomes):
        for j, b in enumerate(labels):
            w[i, j] = p_b[j] * table.p[(a, b)]
            conds[(i, j)] = table.cond[(a, b)]
    return CqState(regs, w, conds)


@dataclass(frozen=True)
class BellFunctional:
    """Correlator-coefficient Bell functional sum_xy M[x, y] <A_x B_y>."""

    coefficients: np.ndarray
    name: str = ""
    classical_bound: float | None = None

    def __post_init__(self):
        m = np.asarray(self.coefficients, dtype=float)
        if m.ndim != 2 or not np.all(np.isfinite(m)):
            raise AlphabetMismatchError("coefficient matrix must be finite 2-D")
        object.__setattr__(self, "coefficients", m)

    @staticmethod
    def chsh() -> "BellFunctional":
        return BellFunctional(np.array([[1.0, 1.0], [1.0, -1.0]]), "chsh", 2.0)

    @staticmethod
    def i3322_correlator() -> "BellFunctional":
        doc = json.loads(resources.files("renyiacc.presets")
                         .joinpath("i3322.json").read_text())
        return BellFunctional(np.asarray(doc["correlators"], dtype=float),
                              doc["name"], float(doc["classical_bound"]))

    @staticmethod
    def by_name(name: str) -> "BellFunctional":
        if name == "chsh":
            return BellFunctional.chsh()
        if name in ("i3322", "i3322_correlator"):
            return BellFunctional.i3322_correlator()
        raise AlphabetMismatchError(f"unknown Bell functional {name!r}")


CHANNEL_SCHEMA = "renyiacc/channel/v1"
PROTOCOL_SCHEMA = "renyiacc/protocol/v1"
STRATEGY_SCHEMA = "renyiacc/strategy/v1"


def kraus_to_dict(ch: KrausChannel) -> dict:
    from .qcore.serialize import matrix_to_json
    return {"schema": CHANNEL_SCHEMA, "in": list(ch.in_dims),
            "out": list(ch.out_dims), "cp_only": ch.cp_only,
            "kraus": [matrix_to_json(k) for k in ch.kraus]}


def kraus_from_dict(doc: dict) -> KrausChannel:
    import numpy as _np
    din = int(_np.prod(doc["in"], initial=1))
    dout = int(_np.prod(doc["out"], initial=1))
    ks = []
    for payload in doc["kraus"]:
        arr = _np.asarray(payload, dtype=float)
        ks.append((arr[:, 0] + 1j * arr[:, 1]).reshape(dout, din))
    return KrausChannel(tuple(ks), tuple(doc["in"]), tuple(doc["out"]),
                        cp_only=bool(doc.get("cp_only", False)))


def protocol_to_dict(proto: SamplingProtocol) -> dict:
    return {
        "schema": PROTOCOL_SCHEMA,
        "gamma": proto.gamma,
        "outcomes": list(proto.outcomes),
        "settings": list(proto.settings),
        "pGen": {str(b): float(p) for b, p in zip(proto.settings, proto.p_gen)},
        "pTest": {str(b): float(p) for b, p in zip(proto.settings, proto.p_test)},
        "d": proto.d,
        "score": {f"{a}|{b}": v for (a, b), v in proto.score.items()},
    }


def protocol_from_dict(doc: dict) -> SamplingProtocol:
    outcomes = tuple(doc["outcomes"])
    settings = tuple(doc["settings"])
    p_gen = np.array([float(doc["pGen"].get(str(b), 0.0)) for b in settings])
    p_test = np.array([float(doc["pTest"].get(str(b), 0.0)) for b in settings])
    score = {}
    for key, v in doc["score"].items():
        a, b = key.split("|", 1)
        score[(a, b)] = v
    return SamplingProtocol(gamma=float(doc["gamma"]), outcomes=outcomes,
                            settings=settings, p_gen=p_gen, p_test=p_test,
                            score=score, d=int(doc.get("d", 1)))


def strategy_to_dict(s: TwoQubitStrategy) -> dict:
    from .qcore.serialize import density_to_dict
    return {"schema": STRATEGY_SCHEMA, "state": density_to_dict(s.state),
            "measA": [list(m) for m in s.meas_a],
            "measB": [list(m) for m in s.meas_b]}


def strategy_from_dict(doc: dict) -> TwoQubitStrategy:
    meas_a = tuple((float(t), float(p)) for t, p in doc["measA"])
    meas_b = tuple((float(t), float(p)) for t, p in doc["measB"])
    if "schmidt" in doc:
        return TwoQubitStrategy.from_schmidt(float(doc["schmidt"]),
                                             meas_a, meas_b)
    from .qcore.serialize import density_from_dict
    return TwoQubitStrategy(density_from_dict(doc["state"]), meas_a, meas_b)


def bell_value(strategy: TwoQubitStrategy, functional: BellFunctional) -> float:
    m = functional.coefficients
    if m.shape[0] > len(strategy.meas_a) or m.shape[1] > len(strategy.meas_b):
        raise AlphabetMismatchError("strategy has too few settings for the "
                                    "functional")
    rho = strategy.state.matrix
    total = 0.0
    for x in range(m.shape[0]):
        for y in range(m.shape[1]):
            if m[x, y] == 0.0:
                continue
            ob = np.kron(strategy.observable_a(x), strategy.observable_b(y))
            total += m[x, y] * float(np.trace(ob @ rho).real)
    return total
