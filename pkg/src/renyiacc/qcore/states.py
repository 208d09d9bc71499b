"""Density operators with subsystem labels, and classical-quantum states.

A :class:`DensityOperator` is a dense PSD matrix over an ordered list of
subsystems (Kronecker order, index 0 leftmost). A :class:`CqState` is a state
that is block diagonal over one or more classical registers: a probability
weight and a conditional density operator per classical outcome tuple.

Registers of a ``CqState`` keep a fixed order that also fixes the subsystem
order of the dense embedding produced by :meth:`CqState.to_density`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import (
    BadIndexError,
    BadPartitionError,
    DimMismatchError,
    NotHermitianError,
    NotPSDError,
)
from .linalg import (
    HERMITICITY_TOL,
    PSD_TOL,
    as_matrix,
    embed,
    eigvalsh_desc,
    hermitian_eig,
    is_hermitian,
    matrix_power,
)

TRACE_TOL = 1e-10
WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class DensityOperator:
    """Dense state with subsystem dimensions and names.

    ``dims`` multiply out to the matrix size; ``labels`` name the subsystems.
    ``normalized=False`` marks a deliberately sub-normalized state (trace <= 1).
    """

    matrix: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...] = ()
    normalized: bool = True

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dims = tuple(int(d) for d in self.dims)
        labels = tuple(self.labels) if self.labels else tuple(
            f"Q{i}" for i in range(len(dims)))
        if len(labels) != len(dims):
            raise DimMismatchError("labels and dims length mismatch")
        if int(np.prod(dims, initial=1)) != m.shape[0]:
            raise DimMismatchError(
                f"prod(dims)={np.prod(dims)} != matrix size {m.shape[0]}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    # -- validation ---------------------------------------------------------
    def validate(self, trace_tol: float = TRACE_TOL) -> "DensityOperator":
        if not is_hermitian(self.matrix, HERMITICITY_TOL):
            raise NotHermitianError("density operator is not Hermitian")
        w = eigvalsh_desc(self.matrix)
        if w[-1] < -PSD_TOL:
            raise NotPSDError(f"negative eigenvalue {w[-1]:.3e}")
        tr = self.trace()
        if self.normalized:
            if abs(tr - 1.0) > trace_tol:
                raise DimMismatchError(f"trace {tr} not 1 within {trace_tol}")
        elif tr > 1.0 + trace_tol:
            raise DimMismatchError(f"sub-normalized state has trace {tr} > 1")
        return self

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def dim(self) -> int:
        return self.matrix.shape[0]

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise BadIndexError(f"no subsystem named {label!r}") from None

    def indices_of(self, names) -> tuple[int, ...]:
        return tuple(self.index_of(n) for n in names)

    # -- algebra ------------------------------------------------------------
    def tensor(self, other: "DensityOperator") -> "DensityOperator":
        labels = self.labels + other.labels
        if len(set(labels)) != len(labels):
            labels = tuple(self.labels) + tuple(f"{x}'" for x in other.labels)
        return DensityOperator(
            np.kron(self.matrix, other.matrix),
            self.dims + other.dims,
            labels,
            normalized=self.normalized and other.normalized,
        )

    def partial_trace(self, keep) -> "DensityOperator":
        """Trace out everything except the subsystem indices in ``keep``."""
        keep = tuple(keep)
        k = len(self.dims)
        for i in keep:
            if i < 0 or i >= k:
                raise BadIndexError(f"subsystem index {i} out of range")
        if len(set(keep)) != len(keep):
            raise BadIndexError("duplicate subsystem index")
        t = self.matrix.reshape(self.dims + self.dims)
        drop = sorted(i for i in range(k) if i not in keep)
        for off, i in enumerate(drop):
            ax = i - off
            t = np.trace(t, axis1=ax, axis2=ax + (k - off))
        # axes now ordered by increasing original index; permute to keep-order
        remaining = sorted(keep)
        perm = [remaining.index(i) for i in keep]
        kk = len(keep)
        t = t.transpose(perm + [kk + j for j in perm])
        d = int(np.prod([self.dims[i] for i in keep], initial=1))
        return DensityOperator(
            t.reshape(d, d),
            tuple(self.dims[i] for i in keep),
            tuple(self.labels[i] for i in keep),
            normalized=self.normalized,
        )

    def partial_trace_labels(self, keep_labels) -> "DensityOperator":
        return self.partial_trace(self.indices_of(keep_labels))

    def permute(self, order) -> "DensityOperator":
        """Reorder subsystems; ``order`` lists current indices in new order."""
        order = tuple(order)
        k = len(self.dims)
        if sorted(order) != list(range(k)):
            raise BadIndexError(f"order {order} is not a permutation")
        t = self.matrix.reshape(self.dims + self.dims)
        t = t.transpose(list(order) + [k + i for i in order])
        return DensityOperator(
            t.reshape(self.dim(), self.dim()),
            tuple(self.dims[i] for i in order),
            tuple(self.labels[i] for i in order),
            normalized=self.normalized,
        )

    def permute_labels(self, label_order) -> "DensityOperator":
        return self.permute(self.indices_of(label_order))

    def conditional_operator(self, cond) -> np.ndarray:
        """rho_cond^{-1/2} rho rho_cond^{-1/2} with pseudo-inverse square roots.

        ``cond`` are the conditioning subsystem indices; the result acts on the
        full space with the embedded marginal inverse roots.
        """
        cond = tuple(cond)
        sigma = self.partial_trace(cond).matrix
        inv_sqrt = matrix_power(sigma, -0.5)
        big = embed(inv_sqrt, self.dims, cond)
        return big @ self.matrix @ big

    def apply_channel(self, kraus, on_label: str) -> "DensityOperator":
        """Apply a CP map (Kraus list, possibly dim-changing) to one subsystem."""
        pos = self.index_of(on_label)
        kraus = [np.asarray(k, dtype=complex) for k in kraus]
        dout, din = kraus[0].shape
        if din != self.dims[pos]:
            raise DimMismatchError("Kraus input dim mismatch")
        k = len(self.dims)
        t = self.matrix.reshape(self.dims + self.dims)
        out = None
        for op in kraus:
            t1 = np.moveaxis(np.tensordot(op, t, axes=([1], [pos])), 0, pos)
            t2 = np.moveaxis(
                np.tensordot(t1, op.conj(), axes=([k + pos], [1])), -1, k + pos)
            out = t2 if out is None else out + t2
        dims = self.dims[:pos] + (dout,) + self.dims[pos + 1:]
        d = int(np.prod(dims, initial=1))
        return DensityOperator(out.reshape(d, d), dims, self.labels,
                               normalized=self.normalized)

    def purify(self, copy_label: str = "ref") -> "DensityOperator":
        """Rank-revealing purification onto a copy register of dim = rank."""
        w, v = hermitian_eig(self.matrix)
        w = np.clip(w, 0.0, None)
        on = w > 1e-14 * max(w[0], 1e-300)
        lam = w[on]
        r = int(on.sum())
        # |Psi> = sum_i sqrt(l_i) |psi_i> x |i>
        vec = np.zeros(self.dim() * r, dtype=complex)
        for i in range(r):
            contrib = np.kron(v[:, on][:, i], np.eye(r)[i])
            vec += np.sqrt(lam[i]) * contrib
        mat = np.outer(vec, vec.conj())
        return DensityOperator(
            mat, self.dims + (r,), self.labels + (copy_label,),
            normalized=self.normalized)

    def is_pure(self, tol: float = 1e-10) -> bool:
        w = eigvalsh_desc(self.matrix)
        return bool(abs(w[0] - self.trace()) <= tol and
                    np.all(np.abs(w[1:]) <= tol))


def tensor(a: DensityOperator, b: DensityOperator) -> DensityOperator:
    return a.tensor(b)


def partial_trace(rho: DensityOperator, keep) -> DensityOperator:
    return rho.partial_trace(keep)


def conditional_operator(rho: DensityOperator, cond=None) -> np.ndarray:
    """Conditional operator of a state; the last subsystem conditions by default."""
    if cond is None:
        cond = (len(rho.dims) - 1,)
    return rho.conditional_operator(cond)


def purify(rho: DensityOperator, copy_label: str = "ref") -> DensityOperator:
    return rho.purify(copy_label)


def trace_distance(rho, tau) -> float:
    """(1/2)||rho - tau||_1 for equal-shape Hermitian matrices or states."""
    a = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    b = tau.matrix if isinstance(tau, DensityOperator) else np.asarray(tau, dtype=complex)
    if a.shape != b.shape:
        raise DimMismatchError(f"shape mismatch {a.shape} vs {b.shape}")
    w = eigvalsh_desc(a - b)
    return float(0.5 * np.abs(w).sum())


# ---------------------------------------------------------------------------
# classical-quantum states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Register:
    """One register of a CqState: classical (alphabet) or quantum (dim)."""

    name: str
    alphabet: tuple | None = None
    dim: int | None = None

    def __post_init__(self):
        if (self.alphabet is None) == (self.dim is None):
            raise BadPartitionError("register must be classical xor quantum")
        if self.alphabet is not None:
            object.__setattr__(self, "alphabet", tuple(self.alphabet))

    @property
    def is_classical(self) -> bool:
        return self.alphabet is not None

    @property
    def size(self) -> int:
        return len(self.alphabet) if self.is_classical else int(self.dim)


def creg(name: str, alphabet) -> Register:
    return Register(name, alphabet=tuple(alphabet))


def qreg(name: str, dim: int) -> Register:
    return Register(name, dim=int(dim))


class CqState:
    """State block diagonal over classical registers.

    ``weights`` has one axis per classical register (in register order) and
    sums to one; ``conds[idx]`` is the conditional density matrix on the joint
    quantum part (quantum registers in register order), or ``None`` where the
    weight vanishes. States with no quantum register use 1x1 conditionals.

    ``conds`` may be given as an object array of the classical shape, a dict
    mapping index tuples to matrices, a bare matrix (scalar classical shape),
    or ``None`` for maximally mixed placeholders.
    """

    def __init__(self, regs, weights, conds=None):
        self.regs: tuple[Register, ...] = tuple(regs)
        names = [r.name for r in self.regs]
        if len(set(names)) != len(names):
            raise BadPartitionError("duplicate register names")
        self.cregs = tuple(r for r in self.regs if r.is_classical)
        self.qregs = tuple(r for r in self.regs if not r.is_classical)
        self.qdim = int(np.prod([r.dim for r in self.qregs], initial=1))
        shape = tuple(len(r.alphabet) for r in self.cregs)
        self.weights = np.asarray(weights, dtype=float).reshape(shape)
        filled = np.empty(shape, dtype=object)
        if conds is None:
            eye = np.eye(self.qdim, dtype=complex) / self.qdim
            for idx in np.ndindex(*shape):
                filled[idx] = eye
        elif isinstance(conds, dict):
            for idx in np.ndindex(*shape):
                entry = conds.get(idx)
                filled[idx] = None if entry is None else np.asarray(entry, complex)
        elif isinstance(conds, np.ndarray) and conds.dtype == object:
            if conds.shape != shape:
                raise DimMismatchError("conds object array has wrong shape")
            for idx in np.ndindex(*shape):
                entry = conds[idx]
                filled[idx] = None if entry is None else np.asarray(entry, complex)
        else:
            if shape != ():
                raise DimMismatchError("bare conditional only valid with no "
                                       "classical registers")
            filled[()] = np.asarray(conds, dtype=complex)
        self.conds = filled

    # -- basics -------------------------------------------------------------
    @property
    def classical_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.cregs)

    @property
    def quantum_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.qregs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.regs)

    @property
    def qdims(self) -> tuple[int, ...]:
        return tuple(r.dim for r in self.qregs)

    def reg(self, name: str) -> Register:
        for r in self.regs:
            if r.name == name:
                return r
        raise BadIndexError(f"no register named {name!r}")

    def has_register(self, name: str) -> bool:
        return any(r.name == name for r in self.regs)

    def alphabet(self, name: str):
        r = self.reg(name)
        if not r.is_classical:
            raise BadPartitionError(f"register {name!r} is quantum")
        return r.alphabet

    def outcomes(self):
        """Iterate (index tuple, outcome tuple, weight, conditional matrix)."""
        for idx in np.ndindex(*self.weights.shape):
            out = tuple(self.cregs[i].alphabet[j] for i, j in enumerate(idx))
            yield idx, out, float(self.weights[idx]), self.conds[idx]

    def validate(self, atol: float = TRACE_TOL) -> "CqState":
        w = self.weights
        if w.size and w.min() < -WEIGHT_TOL:
            raise NotPSDError("negative classical weight")
        if abs(w.sum() - 1.0) > atol:
            raise DimMismatchError(f"weights sum to {w.sum()}, not 1")
        for idx, _, p, c in self.outcomes():
            if p <= WEIGHT_TOL:
                continue
            if c is None or c.shape != (self.qdim, self.qdim):
                raise DimMismatchError(f"conditional at {idx} has wrong shape")
            DensityOperator(c, self.qdims or (1,)).validate(atol)
        return self

    # -- structure manipulation ---------------------------------------------
    def _cpos(self, name: str) -> int:
        for i, r in enumerate(self.cregs):
            if r.name == name:
                return i
        raise BadIndexError(f"no classical register named {name!r}")

    def _qpos(self, name: str) -> int:
        for i, r in enumerate(self.qregs):
            if r.name == name:
                return i
        raise BadIndexError(f"no quantum register named {name!r}")

    def marginal(self, keep_names) -> "CqState":
        """Sum out classical and trace out quantum registers not in ``keep_names``."""
        keep_names = set(keep_names)
        for n in keep_names:
            self.reg(n)
        keep_c = [i for i, r in enumerate(self.cregs) if r.name in keep_names]
        keep_q = [i for i, r in enumerate(self.qregs) if r.name in keep_names]
        qdims = self.qdims
        new_regs = [r for r in self.regs if r.name in keep_names]
        new_shape = tuple(len(self.cregs[i].alphabet) for i in keep_c)
        del_q = keep_q != list(range(len(self.qregs)))
        dq_new = int(np.prod([qdims[i] for i in keep_q], initial=1))
        new_w = np.zeros(new_shape)
        acc = np.empty(new_shape, dtype=object)
        for idx, _, p, c in self.outcomes():
            if p <= WEIGHT_TOL or c is None:
                continue
            nidx = tuple(idx[i] for i in keep_c)
            cm = c
            if del_q and self.qregs:
                cm = DensityOperator(c, qdims).partial_trace(keep_q).matrix
            new_w[nidx] += p
            acc[nidx] = p * cm if acc[nidx] is None else acc[nidx] + p * cm
        conds = np.empty(new_shape, dtype=object)
        for idx in np.ndindex(*new_shape):
            if new_w[idx] > WEIGHT_TOL:
                conds[idx] = acc[idx] / new_w[idx]
            else:
                conds[idx] = np.eye(max(dq_new, 1), dtype=complex) / max(dq_new, 1)
        return CqState(new_regs, new_w, conds)

    def condition(self, assignment: dict):
        """Condition on classical values; returns (probability, reduced CqState)."""
        pos = {self._cpos(n): self.alphabet(n).index(v)
               for n, v in assignment.items()}
        sel = tuple(pos.get(i, slice(None)) for i in range(len(self.cregs)))
        w = np.asarray(self.weights[sel])
        p = float(w.sum())
        if p <= 0.0:
            return 0.0, None
        new_regs = [r for r in self.regs
                    if not (r.is_classical and r.name in assignment)]
        sub = self.conds[sel]
        if not (isinstance(sub, np.ndarray) and sub.dtype == object):
            wrapped = np.empty((), dtype=object)
            wrapped[()] = sub
            sub = wrapped
        return p, CqState(new_regs, w / p, sub)

    def group_by(self, names):
        """Iterate (outcome tuple, probability, conditional CqState) over ``names``."""
        alphabets = [self.alphabet(n) for n in names]
        for combo in itertools.product(*alphabets):
            p, rest = self.condition(dict(zip(names, combo)))
            yield combo, p, rest

    def tensor(self, other: "CqState") -> "CqState":
        regs = self.regs + other.regs
        w = np.multiply.outer(self.weights, other.weights)
        n1 = self.weights.ndim
        conds = np.empty(w.shape, dtype=object)
        for idx in np.ndindex(*w.shape):
            c1 = self.conds[idx[:n1]]
            c2 = other.conds[idx[n1:]]
            conds[idx] = None if (c1 is None or c2 is None) else np.kron(c1, c2)
        return CqState(regs, w, conds)

    def apply_quantum_channel(self, kraus, on_name: str) -> "CqState":
        """Apply a CP map (Kraus list) to one named quantum register of every block."""
        pos = self._qpos(on_name)
        qdims = list(self.qdims)
        m = len(qdims)
        kraus = [np.asarray(k, dtype=complex) for k in kraus]
        dout, din = kraus[0].shape
        if din != qdims[pos]:
            raise DimMismatchError("Kraus input dim mismatch")

        def act(c):
            t = c.reshape(qdims + qdims)
            out = None
            for k in kraus:
                t1 = np.moveaxis(np.tensordot(k, t, axes=([1], [pos])), 0, pos)
                t2 = np.moveaxis(
                    np.tensordot(t1, k.conj(), axes=([m + pos], [1])), -1, m + pos)
                out = t2 if out is None else out + t2
            d = int(np.prod(qdims, initial=1)) // din * dout
            return out.reshape(d, d)

        regs = [qreg(r.name, dout) if (not r.is_classical and r.name == on_name)
                else r for r in self.regs]
        conds = np.empty(self.weights.shape, dtype=object)
        for idx in np.ndindex(*self.weights.shape):
            c = self.conds[idx]
            conds[idx] = None if c is None else act(c)
        return CqState(regs, self.weights, conds)

    def apply_classical_map(self, name: str, kernel, new_alphabet) -> "CqState":
        """Push one classical register through a stochastic map.

        ``kernel[j, i]`` is the probability of new symbol j given old symbol i.
        """
        pos = self._cpos(name)
        kernel = np.asarray(kernel, dtype=float)
        old_n = len(self.cregs[pos].alphabet)
        new_alphabet = tuple(new_alphabet)
        new_n = len(new_alphabet)
        if kernel.shape != (new_n, old_n):
            raise DimMismatchError("kernel shape mismatch")
        shape = self.weights.shape
        new_shape = shape[:pos] + (new_n,) + shape[pos + 1:]
        w = np.zeros(new_shape)
        acc = np.empty(new_shape, dtype=object)
        for idx, _, p, c in self.outcomes():
            if p <= WEIGHT_TOL or c is None:
                continue
            for j in range(new_n):
                q = kernel[j, idx[pos]] * p
                if q <= 0:
                    continue
                nidx = idx[:pos] + (j,) + idx[pos + 1:]
                w[nidx] += q
                acc[nidx] = q * c if acc[nidx] is None else acc[nidx] + q * c
        conds = np.empty(new_shape, dtype=object)
        for idx in np.ndindex(*new_shape):
            conds[idx] = (acc[idx] / w[idx]) if w[idx] > WEIGHT_TOL else None
        regs = [creg(name, new_alphabet) if r.name == name else r
                for r in self.regs]
        return CqState(regs, w, conds)

    def append_classical(self, name: str, alphabet, dist_for) -> "CqState":
        """Append a classical register distributed according to the existing outcome.

        ``dist_for(outcome_tuple)`` returns the distribution of the new symbol
        over ``alphabet``.
        """
        alphabet = tuple(alphabet)
        n = len(alphabet)
        shape = self.weights.shape + (n,)
        w = np.zeros(shape)
        conds = np.empty(shape, dtype=object)
        for idx, out, p, c in self.outcomes():
            d = np.asarray(dist_for(out), dtype=float)
            for j in range(n):
                w[idx + (j,)] = p * d[j]
                conds[idx + (j,)] = c
        return CqState(self.regs + (creg(name, alphabet),), w, conds)

    # -- dense embedding ----------------------------------------------------
    def register_dims(self) -> tuple[int, ...]:
        return tuple(r.size for r in self.regs)

    def to_density(self) -> DensityOperator:
        """Dense embedding with classical registers as diagonal subsystems."""
        dims = self.register_dims()
        d = int(np.prod(dims, initial=1))
        k = len(dims)
        full = np.zeros((d, d), dtype=complex)
        t = full.reshape(dims + dims)
        qdims = self.qdims
        cpos = [i for i, r in enumerate(self.regs) if r.is_classical]
        for idx, _, p, c in self.outcomes():
            if p <= WEIGHT_TOL or c is None:
                continue
            sel: list = [slice(None)] * (2 * k)
            for ci, j in zip(cpos, idx):
                sel[ci] = j
                sel[k + ci] = j
            if qdims:
                t[tuple(sel)] += (p * c).reshape(qdims + qdims)
            else:
                t[tuple(sel)] += p * c[0, 0]
        return DensityOperator(full, dims, self.names)

    def classical_joint(self) -> np.ndarray:
        """Joint distribution over the classical registers (weights copy)."""
        return self.weights.copy()


def cq_from_joint(names, alphabets, joint) -> CqState:
    """Fully classical CqState from a joint probability array."""
    regs = [creg(n, a) for n, a in zip(names, alphabets)]
    joint = np.asarray(joint, dtype=float)
    shape = tuple(len(a) for a in alphabets)
    conds = np.empty(shape, dtype=object)
    one = np.ones((1, 1), dtype=complex)
    for idx in np.ndindex(*shape):
        conds[idx] = one
    return CqState(regs, joint.reshape(shape), conds)
