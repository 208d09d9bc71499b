"""Dense complex Hermitian linear algebra on small matrices.

Conventions used throughout the package:

- matrices are numpy complex arrays;
- eigenvalues are returned in descending order;
- negative and fractional powers of PSD matrices are taken on the numerical
  support (pseudo-inverse convention) with a relative eigenvalue cutoff of
  ``SUPPORT_CUTOFF`` against the largest eigenvalue;
- eigenvalues above ``-PSD_TOL`` are accepted as nonnegative and clipped.
"""

from __future__ import annotations

import numpy as np

from ..errors import (
    BadIndexError,
    DimMismatchError,
    NotHermitianError,
    NotPSDError,
)

HERMITICITY_TOL = 1e-10
PSD_TOL = 1e-8
SUPPORT_CUTOFF = 1e-12


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatchError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise NotHermitianError("matrix contains NaN or Inf entries")
    return a


def is_hermitian(m, tol: float = HERMITICITY_TOL) -> bool:
    a = np.asarray(m)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol * max(1.0, np.max(np.abs(a))))


def hermitian_eig(m, tol: float = HERMITICITY_TOL):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, v)`` with ``m = v @ diag(w) @ v.conj().T`` and unitary ``v``.
    """
    a = as_matrix(m)
    if not is_hermitian(a, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return w[::-1].copy(), v[:, ::-1].copy()


def jacobi_hermitian_eig(m, tol: float = 1e-13, max_sweeps: int = 64):
    """Cyclic-Jacobi eigendecomposition via the embedded real-symmetric form.

    The complex Hermitian ``m = X + iY`` is embedded as ``[[X, -Y], [Y, X]]``
    and diagonalized by sweeps of plane rotations. Eigenpairs of the embedding
    come in duplicates; one complex representative of each pair is kept by
    Gram-Schmidt over ``top + i*bottom`` halves. Serves as an independent
    cross-check of :func:`hermitian_eig`; prefer the LAPACK path when speed
    matters.
    """
    a = as_matrix(m)
    if not is_hermitian(a):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    n = a.shape[0]
    big = np.block([[a.real, -a.imag], [a.imag, a.real]])
    p = np.eye(2 * n)
    scale = max(np.max(np.abs(big)), 1e-300)
    for _ in range(max_sweeps):
        off = 0.0
        for k in range(2 * n - 1):
            for l in range(k + 1, 2 * n):
                if abs(big[k, l]) <= tol * scale:
                    continue
                off = max(off, abs(big[k, l]))
                diff = big[l, l] - big[k, k]
                if abs(diff) > 1e300 * abs(big[k, l]):
                    t = big[k, l] / diff
                else:
                    phi = diff / (2.0 * big[k, l])
                    t = 1.0 / (abs(phi) + np.sqrt(phi * phi + 1.0))
                    if phi < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rk, rl = big[k, :].copy(), big[l, :].copy()
                big[k, :] = c * rk - s * rl
                big[l, :] = s * rk + c * rl
                ck, cl = big[:, k].copy(), big[:, l].copy()
                big[:, k] = c * ck - s * cl
                big[:, l] = s * ck + c * cl
                pk, pl = p[:, k].copy(), p[:, l].copy()
                p[:, k] = c * pk - s * pl
                p[:, l] = s * pk + c * pl
        if off <= tol * scale:
            break
    w = np.diag(big).copy()
    order = np.argsort(w)[::-1]
    w = w[order]
    p = p[:, order]
    vals, vecs = [], []
    for i in range(2 * n):
        if len(vals) == n:
            break
        u = p[:n, i] + 1j * p[n:, i]
        for v in vecs:
            u = u - (v.conj() @ u) * v
        nrm = np.linalg.norm(u)
        if nrm > 1e-6:
            vecs.append(u / nrm)
            vals.append(w[i])
    if len(vals) < n:
        raise NotHermitianError("jacobi eigenvector extraction failed")
    return np.array(vals), np.column_stack(vecs)


def eigvalsh_desc(m) -> np.ndarray:
    a = as_matrix(m)
    return np.linalg.eigvalsh((a + a.conj().T) / 2)[::-1].copy()


def check_psd(w: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Clip a descending eigenvalue vector to [0, inf); reject if clearly negative."""
    if w.size and w[-1] < -tol:
        raise NotPSDError(f"matrix has a significantly negative eigenvalue {w[-1]:.3e}")
    return np.clip(w, 0.0, None)


def matrix_power(m, t: float, psd_tol: float = PSD_TOL,
                 cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """Spectral power of a PSD matrix with 0**t := 0 for all t.

    Eigenvalues below ``cutoff`` relative to the largest are treated as zero,
    so negative powers act as pseudo-inverses on the support.
    """
    w, v = hermitian_eig(m)
    w = check_psd(w, psd_tol)
    top = w[0] if w.size else 0.0
    wt = np.zeros_like(w)
    on = w > cutoff * max(top, 1e-300)
    wt[on] = w[on] ** t
    return (v * wt) @ v.conj().T


def support_projector(m, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    w, v = hermitian_eig(m)
    w = check_psd(w)
    top = w[0] if w.size else 0.0
    on = w > cutoff * max(top, 1e-300)
    return (v[:, on]) @ (v[:, on].conj().T)


def support_contained(rho, sigma, cutoff: float = SUPPORT_CUTOFF,
                      leak_tol: float = 1e-10) -> bool:
    """supp(rho) subseteq supp(sigma), judged by trace leakage outside supp(sigma)."""
    pi = support_projector(sigma, cutoff)
    r = np.asarray(rho, dtype=complex)
    tr = float(np.trace(r).real)
    leak = tr - float(np.trace(pi @ r @ pi).real)
    return leak <= leak_tol * max(tr, 1.0)


def kron_all(mats) -> np.ndarray:
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def embed(op, dims, acting_on) -> np.ndarray:
    """Embed ``op`` acting on the subsystems ``acting_on`` of a product space.

    ``dims`` lists every subsystem dimension in Kronecker order (index 0 is the
    leftmost factor); ``op`` must act on the listed subsystems in that same
    relative order. Identity is placed everywhere else.
    """
    dims = tuple(int(d) for d in dims)
    acting_on = tuple(acting_on)
    k = len(dims)
    op = np.asarray(op, dtype=complex)
    d_act = 1
    for i in acting_on:
        if i < 0 or i >= k:
            raise BadIndexError(f"subsystem index {i} out of range")
        d_act *= dims[i]
    if op.shape != (d_act, d_act):
        raise DimMismatchError(
            f"operator shape {op.shape} does not match subsystem dims {d_act}")
    rest = [i for i in range(k) if i not in acting_on]
    d_rest = int(np.prod([dims[i] for i in rest], initial=1))
    full = np.kron(op, np.eye(d_rest, dtype=complex))
    # current tensor order is acting_on + rest; permute back to 0..k-1
    cur = list(acting_on) + rest
    perm = [cur.index(i) for i in range(k)]
    cur_dims = [dims[i] for i in cur]
    t = full.reshape(cur_dims + cur_dims)
    t = t.transpose(perm + [k + j for j in perm])
    d = int(np.prod(dims, initial=1))
    return np.ascontiguousarray(t.reshape(d, d))
