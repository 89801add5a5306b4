"""Walker-walker entanglement after tracing out the impurity spin.

The reduced state is kept in factored form ``rho = sum_s |Psi_s><Psi_s|``
where ``Psi_s`` (``s`` the impurity spin) is a ``d1 x d2`` matrix over the
occupied composite indices ``(x, sigma)`` of each walker.

The partial transpose on walker 1 has entries
``rho^T1[(i, j), (i', j')] = sum_s Psi_s[i', j] conj(Psi_s[i, j'])``.
Its nonzero spectrum is unchanged by local isometries on either walker, so
by default both walkers are first compressed onto the span of their
occupied local states (an SVD of the stacked factors).  The dense matrix
then has dimension ``rank1 * rank2`` instead of ``d1 * d2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionCapError

ZERO_EIG = 1e-13
DEFAULT_CAP = 10_000
RANK_RTOL = 1e-12


@dataclass
class ReducedDensity:
    """Factored two-walker density matrix on the occupied support.

    Attributes
    ----------
    factors : ndarray, shape (2, d1, d2)
        ``Psi_up`` and ``Psi_down``.
    support1, support2 : ndarray of int
        Composite indices ``2*site + sigma`` kept for each walker.
    """

    factors: np.ndarray
    support1: np.ndarray
    support2: np.ndarray

    @property
    def shape(self):
        return self.factors.shape[1:]

    @property
    def trace(self):
        return float(np.sum(np.abs(self.factors) ** 2))

    def dense(self):
        """Full ``d1*d2`` square density matrix (small cases only)."""
        f = self.factors.reshape(2, -1)
        return f.T @ f.conj()


@dataclass
class NegativityResult:
    negativity: float
    min_eigenvalue: float
    spectrum_dim: int
    support_dim: int
    trace_norm: float


def _factors(state):
    lx = state.lx
    g = state.grid()  # (site1, site2, s0, sigma2, sigma1)
    return g.transpose(2, 0, 4, 1, 3).reshape(2, 2 * lx, 2 * lx)


def reduce_impurity(state, support_eps=0.0):
    """Trace out the impurity and restrict to the occupied support.

    A composite index is kept when its marginal probability exceeds
    ``support_eps``; with the default of zero only exact zeros are pruned.
    """
    m = _factors(state)
    w = np.abs(m) ** 2
    s1 = np.flatnonzero(w.sum(axis=(0, 2)) > support_eps)
    s2 = np.flatnonzero(w.sum(axis=(0, 1)) > support_eps)
    return ReducedDensity(np.ascontiguousarray(m[:, s1][:, :, s2]), s1, s2)


def local_compress(rd, rtol=RANK_RTOL):
    """Express both factors in orthonormal bases of the occupied local spaces."""
    f = rd.factors
    if f.size == 0:
        return f
    u, sv, _ = np.linalg.svd(np.concatenate([f[0], f[1]], axis=1), full_matrices=False)
    q1 = u[:, sv > rtol * sv[0]]
    _, sv, vh = np.linalg.svd(np.concatenate([f[0], f[1]], axis=0), full_matrices=False)
    q2h = vh[sv > rtol * sv[0]]
    return np.einsum("ai,sab,jb->sij", q1.conj(), f, q2h.conj())


def partial_transpose(factors):
    """Dense ``rho^T1`` from factors of shape ``(2, d1, d2)``."""
    _, d1, d2 = factors.shape
    pt = np.einsum("sIj,siJ->ijIJ", factors, factors.conj())
    return pt.reshape(d1 * d2, d1 * d2)


def partial_transpose_spectrum(rd, cap=DEFAULT_CAP, compress=True):
    """Eigenvalues of the partially transposed reduced density matrix.

    Parameters
    ----------
    rd : ReducedDensity
    cap : int
        Largest dense dimension allowed.
    compress : bool
        Reduce each walker to its occupied local subspace first.  The
        spectrum then omits only eigenvalues that are exactly zero.
    """
    f = local_compress(rd) if compress else rd.factors
    _, d1, d2 = f.shape
    if d1 * d2 > cap:
        raise DimensionCapError(
            f"partial transpose dimension {d1 * d2} exceeds cap {cap}; "
            "use a smaller lattice or a larger support_eps"
        )
    if d1 * d2 == 0:
        return np.zeros(0)
    return np.linalg.eigvalsh(partial_transpose(f))


def negativity(state, support_eps=0.0, cap=DEFAULT_CAP, compress=True):
    """Sum of the magnitudes of the negative partial-transpose eigenvalues."""
    rd = reduce_impurity(state, support_eps)
    ev = partial_transpose_spectrum(rd, cap=cap, compress=compress)
    neg = ev[ev < -ZERO_EIG]
    return NegativityResult(
        negativity=float(-neg.sum()),
        min_eigenvalue=float(ev.min()) if ev.size else 0.0,
        spectrum_dim=int(ev.size),
        support_dim=int(rd.shape[0] * rd.shape[1]),
        trace_norm=float(np.abs(ev).sum()),
    )
