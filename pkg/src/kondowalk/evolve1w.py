"""Dense one-walker step operators, their spectra and bound-state observables."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import EigensolverError, FitQualityError
from .hilbert import StateVector1W
from .operators import coin, coin_sqrt, s_imp_1w, s_imp_1w_sqrt

RESIDUAL_TOL = 1e-9


class Frame(enum.Enum):
    """Ordering of the factors inside one time step.

    ``SYMMETRIC`` is ``sqrt(C0) sqrt(C) S sqrt(C) sqrt(C0)``; ``SHIFTED`` is
    ``S sqrt(C) C0 sqrt(C)``.  Both are similar matrices.
    """

    SYMMETRIC = "symmetric"
    SHIFTED = "shifted"


class StateClass(enum.Enum):
    BULK = "bulk"
    BOUND = "bound"


@dataclass(frozen=True)
class Unitary1W:
    entries: np.ndarray
    frame: Frame

    @property
    def dim(self):
        return self.entries.shape[0]


@dataclass
class SpectrumResult:
    """Eigenpairs sorted by phase in ``[0, 2 pi)``.

    Attributes
    ----------
    eigenvalues : ndarray, shape (n,)
    eigenvectors : ndarray, shape (n, n)
        Column ``k`` belongs to ``eigenvalues[k]``; unit norm, with the
        largest-magnitude component real and positive.
    classes : list of StateClass
    loc_lengths : ndarray
        Fitted localization length for bound states, ``nan`` for bulk
        states or failed fits.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    classes: list
    loc_lengths: np.ndarray

    @property
    def phases(self):
        return np.mod(np.angle(self.eigenvalues), 2 * np.pi)

    @property
    def bound_mask(self):
        return np.array([c is StateClass.BOUND for c in self.classes])

    def bound_indices(self):
        return np.flatnonzero(self.bound_mask)


# ---------------------------------------------------------------- operators


def _block_diag_coin(block, lx):
    return np.kron(np.eye(2 * lx), block)


def shift_matrix(lx):
    """Periodic shift: L components move to ``x-1``, R components to ``x+1``."""
    n = 4 * lx
    m = np.zeros((n, n))
    site = np.arange(lx)
    for s0 in (0, 1):
        m[4 * ((site - 1) % lx) + 2 * s0, 4 * site + 2 * s0] = 1
        m[4 * ((site + 1) % lx) + 2 * s0 + 1, 4 * site + 2 * s0 + 1] = 1
    return m


def _origin_block(block, lx):
    m = np.eye(4 * lx, dtype=complex)
    o = 4 * ((lx - 1) // 2)
    m[o : o + 4, o : o + 4] = block
    return m


def _factors(params):
    jx, jy, jz = params.couplings
    eps = params.epsilon
    return {
        "shift": shift_matrix(params.lx),
        "c_sqrt": _block_diag_coin(coin_sqrt(params.phi).entries, params.lx),
        "c0": _origin_block(s_imp_1w(eps, jx, jy, jz).entries, params.lx),
        "c0_sqrt": _origin_block(s_imp_1w_sqrt(eps, jx, jy, jz).entries, params.lx),
    }


def build_u1w(params, frame=Frame.SYMMETRIC):
    """Dense one-step operator on the ``4*lx`` dimensional space."""
    frame = Frame(frame)
    f = _factors(params)
    if frame is Frame.SYMMETRIC:
        u = f["c0_sqrt"] @ f["c_sqrt"] @ f["shift"] @ f["c_sqrt"] @ f["c0_sqrt"]
    else:
        u = f["shift"] @ f["c_sqrt"] @ f["c0"] @ f["c_sqrt"]
    return Unitary1W(u, frame)


def frame_map(params, shifted_vec):
    """Map a shifted-frame eigenvector to the symmetric frame.

    With ``W = sqrt(C0) sqrt(C)`` one has ``U_sym W = W U_shift``, so ``W v``
    is a symmetric-frame eigenvector with the same eigenvalue.
    """
    f = _factors(params)
    return f["c0_sqrt"] @ (f["c_sqrt"] @ np.asarray(shifted_vec))


# ---------------------------------------------------------------- spectra


def gauge_fix(vec):
    """Normalize and rotate so the largest-magnitude entry is real positive."""
    vec = np.asarray(vec, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    k = int(np.argmax(np.abs(vec)))
    return vec * (abs(vec[k]) / vec[k])


def classify(eigenvalue, phi, band_margin=1e-9):
    """Bound iff ``cos^2 lam > cos^2 phi + band_margin``."""
    lam = np.angle(eigenvalue)
    if math.cos(lam) ** 2 > math.cos(phi) ** 2 + band_margin:
        return StateClass.BOUND
    return StateClass.BULK


def spectrum(u, params, fit_lengths=True):
    """Full eigendecomposition of a dense one-walker step operator."""
    mat = u.entries if isinstance(u, Unitary1W) else np.asarray(u)
    if not np.all(np.isfinite(mat)):
        raise EigensolverError("operator contains non-finite entries")
    try:
        w, v = np.linalg.eig(mat)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(
            f"eigensolver failed; condition number {np.linalg.cond(mat):.3e}"
        ) from exc
    order = np.argsort(np.mod(np.angle(w), 2 * np.pi), kind="stable")
    w, v = w[order], v[:, order]
    v = np.column_stack([gauge_fix(v[:, k]) for k in range(v.shape[1])])
    resid = np.linalg.norm(mat @ v - v * w, axis=0)
    if resid.max() > RESIDUAL_TOL:
        raise EigensolverError(
            f"eigenpair residual {resid.max():.3e} exceeds {RESIDUAL_TOL}; "
            f"condition number {np.linalg.cond(mat):.3e}"
        )
    classes = [classify(x, params.phi, params.band_margin) for x in w]
    lengths = np.full(len(w), np.nan)
    if fit_lengths:
        for k, c in enumerate(classes):
            if c is StateClass.BOUND:
                try:
                    lengths[k] = localization_fit(v[:, k], params)
                except FitQualityError:
                    pass
    return SpectrumResult(w, v, classes, lengths)


def isolated_count(params, frame=Frame.SYMMETRIC):
    """Number of bound-classified eigenvalues of the one-step operator."""
    res = spectrum(build_u1w(params, frame), params, fit_lengths=False)
    return int(res.bound_mask.sum())


# ---------------------------------------------------------------- observables


def site_probability(vec, lx):
    a = np.asarray(vec.amplitudes if hasattr(vec, "amplitudes") else vec)
    return np.sum(np.abs(a.reshape(lx, 4)) ** 2, axis=1)


def localization_fit(eigvec, params, floor=1e-24, min_r2=0.99):
    """Localization length from the exponential tail of a bound state.

    Regresses ``log P(x)`` on ``|x|`` over ``2 <= |x| <= lx/4`` with a
    shared slope and separate intercepts for the two sides.  Sites whose
    probability is below ``floor`` times the peak are dropped, since they
    carry only round-off.  Returns ``2/|slope|``.
    """
    lx = params.lx
    p = site_probability(eigvec, lx)
    x = np.arange(lx) - (lx - 1) // 2
    ax = np.abs(x)
    keep = (ax >= 2) & (ax <= lx / 4) & (p > floor * p.max())
    if keep.sum() < 4 or not (np.any(keep & (x < 0)) and np.any(keep & (x > 0))):
        raise FitQualityError("too few tail sites above the noise floor")
    y = np.log(p[keep])
    design = np.column_stack([ax[keep], x[keep] < 0, x[keep] > 0]).astype(float)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fit = design @ coef
    ss_res = np.sum((y - fit) ** 2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    slope = coef[0]
    if r2 < min_r2 or slope >= 0:
        raise FitQualityError(f"non-exponential tail: R^2={r2:.4f}, slope={slope:.3g}")
    return 2.0 / abs(slope)


_PAULI = (
    np.array([[0, 1], [1, 0]], complex),
    np.array([[0, -1j], [1j, 0]], complex),
    np.array([[1, 0], [0, -1]], complex),
)

# Internal index is 2*s0 + sigma, so the impurity is the left Kronecker factor.
# L and up are the "+" states of their respective doublets.
J10_SQUARED = 1.5 * np.eye(4) + 0.5 * sum(np.kron(p, p) for p in _PAULI)


def j10_squared(state):
    """Expectation of ``(s_walker + s_impurity)^2`` per unit norm."""
    a = np.asarray(state.amplitudes if hasattr(state, "amplitudes") else state)
    g = a.reshape(-1, 4)
    num = np.einsum("si,ij,sj->", g.conj(), J10_SQUARED, g).real
    return float(num / np.vdot(a, a).real)


def as_state(vec, lx):
    """Wrap a raw eigenvector as a normalized :class:`StateVector1W`."""
    vec = np.asarray(vec, dtype=complex)
    return StateVector1W(vec / np.linalg.norm(vec), lx, normalized=True)
