"""Matrix-free two-walker dynamics, initial states and observables.

The state is handled as an array with axes ``(site1, site2, s0, sigma2,
sigma1)``; see :mod:`kondowalk.hilbert`.  One step applies, right to left,

    sqrt(C0) . half-coins . S2 S1 . half-coins . sqrt(C0)

where ``sqrt(C0)`` is the identity except on the axes ``x1 = 0`` or
``x2 = 0`` (one-walker impurity root on the walker at the origin) and at
``(0, 0)`` (two-walker impurity root).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import LatticeRangeError, UnsupportedParameterError
from .hilbert import (
    L,
    ParticleStatistics,
    StateVector1W,
    StateVector2W,
    exchange_2w,
)
from .operators import (
    coin_sqrt,
    detect_family,
    s_imp_1w_sqrt,
    s_imp_2w_sqrt,
)


class Side(enum.Enum):
    """Half-line on which transmitted probability is counted."""

    NEGATIVE = "negative"
    POSITIVE = "positive"


@dataclass
class Observables2W:
    """Snapshot observables of a two-walker state.

    Attributes
    ----------
    p_joint : ndarray, shape (lx, lx)
        ``P(x1, x2)`` summed over chiralities and impurity spin.
    p_marg1, p_marg2 : ndarray, shape (lx,)
    sz : float
        Impurity polarization ``P(up) - P(down)``.
    singlet_weight : ndarray, shape (2,)
        Probability that walker 1 (entry 0) or walker 2 (entry 1) sits at
        the origin in the singlet with the impurity.
    triplet_weights : ndarray, shape (2, 3)
        Same for the three triplet states (m = +1, 0, -1).
    """

    p_joint: np.ndarray
    p_marg1: np.ndarray
    p_marg2: np.ndarray
    sz: float
    singlet_weight: np.ndarray
    triplet_weights: np.ndarray


class Evolver2W:
    """Applies the two-walker step operator without forming it.

    Parameters
    ----------
    params : ModelParams
        Couplings must belong to the XX family (any epsilon) or the SU(2)
        family (``epsilon = 1``); only these have a closed-form two-walker
        impurity root.
    """

    def __init__(self, params):
        family = detect_family(*params.couplings)
        if family is None:
            raise UnsupportedParameterError(
                "two-walker evolution needs XX (j_x=j_y, j_z=0) or SU(2) "
                "(j_x=j_y=j_z) couplings"
            )
        self.params = params
        self.lx = params.lx
        self.origin = params.half
        self.coin_sqrt = coin_sqrt(params.phi).entries
        self.imp1_sqrt = s_imp_1w_sqrt(params.epsilon, *params.couplings).entries
        self.imp2_sqrt = s_imp_2w_sqrt(params.epsilon, params.j_x, family).entries
        self._off = np.arange(self.lx) != self.origin

    # -- passes ---------------------------------------------------------

    def _impurity(self, g):
        o, off = self.origin, self._off
        m1 = self.imp1_sqrt
        # walker 1 at the origin: (s0, sigma1) pair, index 2*s0 + sigma1
        row = g[o, off].transpose(0, 2, 1, 3).reshape(-1, 2, 4)
        row = np.einsum("ij,nkj->nki", m1, row)
        g[o, off] = row.reshape(-1, 2, 2, 2).transpose(0, 2, 1, 3)
        # walker 2 at the origin: (s0, sigma2) pair, index 2*s0 + sigma2
        col = g[off, o].transpose(0, 3, 1, 2).reshape(-1, 2, 4)
        col = np.einsum("ij,nkj->nki", m1, col)
        g[off, o] = col.reshape(-1, 2, 2, 2).transpose(0, 2, 3, 1)
        g[o, o] = (self.imp2_sqrt @ g[o, o].reshape(8)).reshape(2, 2, 2)

    def _half_coins(self, g):
        c = self.coin_sqrt
        g[:] = np.einsum("ij,abcdj->abcdi", c, g)
        g[:] = np.einsum("ij,abcjd->abcid", c, g)

    @staticmethod
    def _shift(g):
        g[..., L] = np.roll(g[..., L], -1, axis=0)
        g[..., 1 - L] = np.roll(g[..., 1 - L], 1, axis=0)
        g[:, :, :, L, :] = np.roll(g[:, :, :, L, :], -1, axis=1)
        g[:, :, :, 1 - L, :] = np.roll(g[:, :, :, 1 - L, :], 1, axis=1)

    # -- public ---------------------------------------------------------

    def step(self, state):
        """Return the state after one time step."""
        g = state.amplitudes.reshape(self.lx, self.lx, 2, 2, 2).copy()
        self._impurity(g)
        self._half_coins(g)
        self._shift(g)
        self._half_coins(g)
        self._impurity(g)
        return StateVector2W(g.ravel(), self.lx)

    def run(self, state, steps):
        """Yield ``(t, state)`` for ``t = 0 .. steps``."""
        yield 0, state
        for t in range(1, steps + 1):
            state = self.step(state)
            yield t, state


# ---------------------------------------------------------------- initial states


def _check_x0(params, x0):
    if not 0 < x0 <= params.half:
        raise LatticeRangeError(f"x0 must lie in (0, {params.half}], got {x0}")


def _symmetrize(first, stats):
    stats = ParticleStatistics(stats)
    if stats is ParticleStatistics.DISTINGUISHABLE:
        a = first.amplitudes
    else:
        sign = -1.0 if stats is ParticleStatistics.FERMION else 1.0
        a = first.amplitudes + sign * exchange_2w(first).amplitudes
    return StateVector2W(a / np.linalg.norm(a), first.lx, normalized=True)


def initial_delta_delta(params, stats, x0):
    """Walker 1 at the origin, walker 2 at ``x0``, impurity entangled.

    The unsymmetrized term is
    ``|0, x0> (|L, L, down> - |R, L, up>) / sqrt(2)`` in the order
    ``(sigma1, sigma2, s0)``; fermions and bosons subtract or add its
    exchanged copy.
    """
    _check_x0(params, x0)
    first = StateVector2W.zeros(params.lx)
    g = first.grid()
    o = params.half
    g[o, o + x0, 1, L, L] = 1
    g[o, o + x0, 0, L, 1 - L] = -1
    return _symmetrize(first, stats)


def initial_bound_delta(params, stats, x0, bound):
    """Walker 1 in a bound profile, walker 2 a left-moving delta at ``x0``.

    Parameters
    ----------
    bound : StateVector1W or ndarray
        One-walker amplitudes with axes ``(site, s0, sigma)`` when reshaped.
    """
    _check_x0(params, x0)
    b = np.asarray(bound.amplitudes if hasattr(bound, "amplitudes") else bound)
    b = b.reshape(params.lx, 2, 2) / np.linalg.norm(b)
    first = StateVector2W.zeros(params.lx)
    first.grid()[:, params.half + x0, :, L, :] = b
    return _symmetrize(first, stats)


# ---------------------------------------------------------------- observables

_SQ = 1 / np.sqrt(2)
# rows: singlet, triplet m=+1, m=0, m=-1 over the pair index 2*s0 + sigma
SPIN_BASIS = np.array(
    [
        [0, -_SQ, _SQ, 0],
        [1, 0, 0, 0],
        [0, _SQ, _SQ, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)


def spin_amplitudes_1w(state, lx):
    """Singlet and triplet amplitudes of a one-walker state at the origin.

    Returns an array ``(singlet, t+1, t0, t-1)``.
    """
    a = np.asarray(state.amplitudes if hasattr(state, "amplitudes") else state)
    o = (lx - 1) // 2
    return SPIN_BASIS.conj() @ a[4 * o : 4 * o + 4]


def observables(state):
    """Probability distributions, impurity polarization and spin weights."""
    lx = state.lx
    g = state.grid()
    prob = np.abs(g) ** 2
    p_joint = prob.sum(axis=(2, 3, 4))
    by_spin = prob.sum(axis=(0, 1, 3, 4))
    o = (lx - 1) // 2
    # walker 1 at origin: pair (s0, sigma1) for every (site2, sigma2)
    w1 = g[o].transpose(0, 2, 1, 3).reshape(-1, 4)
    w2 = g[:, o].transpose(0, 3, 1, 2).reshape(-1, 4)
    weights = np.array(
        [np.sum(np.abs(w @ SPIN_BASIS.conj().T) ** 2, axis=0) for w in (w1, w2)]
    )
    return Observables2W(
        p_joint=p_joint,
        p_marg1=p_joint.sum(axis=1),
        p_marg2=p_joint.sum(axis=0),
        sz=float(by_spin[0] - by_spin[1]),
        singlet_weight=weights[:, 0],
        triplet_weights=weights[:, 1:],
    )


def transmission(state, origin_side=Side.NEGATIVE, walker=2):
    """Marginal probability of one walker strictly beyond the origin.

    The mobile walker starts at ``x0 > 0``, so the far side is ``x < 0``.
    """
    obs = observables(state)
    marg = obs.p_marg2 if walker == 2 else obs.p_marg1
    o = (state.lx - 1) // 2
    part = marg[:o] if Side(origin_side) is Side.NEGATIVE else marg[o + 1 :]
    return float(min(1.0, max(0.0, part.sum())))
