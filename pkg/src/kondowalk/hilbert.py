"""Index conventions, parameter container and state vectors.

One walker
    flat index ``i = 4*site + 2*s0 + sigma`` with ``site = x + (lx-1)//2``.
    The internal order is therefore (L up, R up, L down, R down).
Two walkers
    flat index ``i = 8*(site1*lx + site2) + 4*s0 + 2*sigma2 + sigma1``.
    The internal order is (LL up, RL up, LR up, RR up, LL down, ...), where
    the first letter is walker 1's chirality.

Chirality ``L = 0`` moves toward negative x, ``R = 1`` toward positive x.
Impurity spin ``UP = 0``, ``DOWN = 1``.  Boundaries are periodic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, LatticeRangeError

L, R = 0, 1
UP, DOWN = 0, 1

NORM_TOL = 1e-12


class ParticleStatistics(enum.Enum):
    """Exchange statistics of the two walkers."""

    FERMION = "fermion"
    BOSON = "boson"
    DISTINGUISHABLE = "distinguishable"


@dataclass(frozen=True)
class ModelParams:
    """Physical and numerical parameters of the walk.

    Parameters
    ----------
    phi : float
        Coin angle in radians.  May be omitted when ``m`` is given, in which
        case it is derived from the Dirac-fermion correspondence.
    epsilon : float
        Kinetic velocity scale, strictly positive.
    m : float or None
        Optional delta-potential strength, only used to derive ``phi``.
    j_x, j_y, j_z : float
        Exchange couplings between walker chirality and impurity spin.
    lx : int
        Odd number of lattice sites; positions run over
        ``-(lx-1)/2 .. (lx-1)/2``.
    band_margin : float
        Slack for the bound/bulk classification ``cos^2 lam > cos^2 phi``.
    support_eps : float
        Probability threshold below which a composite index is pruned when
        restricting density matrices.
    """

    phi: float | None = None
    epsilon: float = 1.0
    m: float | None = None
    j_x: float = 0.0
    j_y: float = 0.0
    j_z: float = 0.0
    lx: int = 201
    band_margin: float = 1e-9
    support_eps: float = 0.0

    def __post_init__(self):
        from .operators import phi_from_dirac

        if not (self.epsilon > 0):
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.lx) != self.lx or self.lx < 3 or self.lx % 2 == 0:
            raise ConfigError(f"lx must be an odd integer >= 3, got {self.lx}")
        if self.band_margin < 0 or self.support_eps < 0:
            raise ConfigError("band_margin and support_eps must be nonnegative")
        if self.m is not None:
            derived = phi_from_dirac(self.epsilon, self.m)
            if self.phi is None:
                object.__setattr__(self, "phi", derived)
            elif abs(math.remainder(self.phi - derived, 2 * math.pi)) > 1e-12:
                raise ConfigError(
                    f"phi={self.phi!r} inconsistent with (epsilon, m) -> {derived!r}"
                )
        if self.phi is None:
            raise ConfigError("either phi or m must be supplied")
        object.__setattr__(self, "lx", int(self.lx))

    @classmethod
    def xx(cls, j, phi=math.pi / 10, **kw):
        """XX coupling ``j_x = j_y = j``, ``j_z = 0``."""
        return cls(phi=phi, j_x=j, j_y=j, j_z=0.0, **kw)

    @classmethod
    def su2(cls, j, phi=math.pi / 10, **kw):
        """Isotropic Heisenberg coupling ``j_x = j_y = j_z = j``."""
        return cls(phi=phi, j_x=j, j_y=j, j_z=j, **kw)

    def with_(self, **kw):
        """Return a copy with some fields replaced."""
        return replace(self, **kw)

    @property
    def half(self):
        """Largest lattice coordinate, ``(lx - 1) // 2``."""
        return (self.lx - 1) // 2

    @property
    def couplings(self):
        return (self.j_x, self.j_y, self.j_z)


def _site(x, lx):
    half = (lx - 1) // 2
    if not -half <= x <= half:
        raise LatticeRangeError(f"position {x} outside [-{half}, {half}]")
    return x + half


def _check_bit(name, value):
    if value not in (0, 1):
        raise LatticeRangeError(f"{name} must be 0 or 1, got {value}")


def index_1w(x, sigma, s0, lx):
    """Flat index of ``|x, sigma> (x) |s0>`` in the one-walker basis."""
    _check_bit("sigma", sigma)
    _check_bit("s0", s0)
    return 4 * _site(x, lx) + 2 * s0 + sigma


def unindex_1w(i, lx):
    """Inverse of :func:`index_1w`; returns ``(x, sigma, s0)``."""
    if not 0 <= i < 4 * lx:
        raise LatticeRangeError(f"index {i} outside [0, {4 * lx})")
    site, c = divmod(i, 4)
    return site - (lx - 1) // 2, c & 1, c >> 1


def index_2w(x1, sigma1, x2, sigma2, s0, lx):
    """Flat index of ``|x1 sigma1; x2 sigma2> (x) |s0>``."""
    for name, v in (("sigma1", sigma1), ("sigma2", sigma2), ("s0", s0)):
        _check_bit(name, v)
    return 8 * (_site(x1, lx) * lx + _site(x2, lx)) + 4 * s0 + 2 * sigma2 + sigma1


def unindex_2w(i, lx):
    """Inverse of :func:`index_2w`; returns ``(x1, sigma1, x2, sigma2, s0)``."""
    if not 0 <= i < 8 * lx * lx:
        raise LatticeRangeError(f"index {i} outside [0, {8 * lx * lx})")
    pair, c = divmod(i, 8)
    s1, s2 = divmod(pair, lx)
    half = (lx - 1) // 2
    return s1 - half, c & 1, s2 - half, (c >> 1) & 1, c >> 2


@dataclass
class StateVector1W:
    """One-walker amplitudes of length ``4*lx``."""

    amplitudes: np.ndarray
    lx: int
    normalized: bool = field(default=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (4 * self.lx,):
            raise ValueError(
                f"expected {4 * self.lx} amplitudes, got {self.amplitudes.shape}"
            )
        if self.normalized:
            _check_normalized(self.amplitudes)

    @classmethod
    def zeros(cls, lx):
        return cls(np.zeros(4 * lx, complex), lx)

    def grid(self):
        """View with axes ``(site, s0, sigma)``."""
        return self.amplitudes.reshape(self.lx, 2, 2)

    def site_probability(self):
        return np.sum(np.abs(self.grid()) ** 2, axis=(1, 2))


@dataclass
class StateVector2W:
    """Two-walker amplitudes of length ``8*lx**2``."""

    amplitudes: np.ndarray
    lx: int
    normalized: bool = field(default=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (8 * self.lx * self.lx,):
            raise ValueError(
                f"expected {8 * self.lx ** 2} amplitudes, got {self.amplitudes.shape}"
            )
        if self.normalized:
            _check_normalized(self.amplitudes)

    @classmethod
    def zeros(cls, lx):
        return cls(np.zeros(8 * lx * lx, complex), lx)

    def grid(self):
        """View with axes ``(site1, site2, s0, sigma2, sigma1)``."""
        return self.amplitudes.reshape(self.lx, self.lx, 2, 2, 2)

    def copy(self):
        return StateVector2W(self.amplitudes.copy(), self.lx, self.normalized)


def _check_normalized(a):
    n = np.linalg.norm(a)
    if abs(n - 1.0) > NORM_TOL:
        raise ValueError(f"state flagged normalized has norm {n!r}")


def norm(state):
    """Euclidean norm of a state vector or raw amplitude array.

    The sum of squares is correctly rounded, so the result does not depend
    on the order of the amplitudes.
    """
    a = np.asarray(state.amplitudes if hasattr(state, "amplitudes") else state)
    a = a.ravel()
    return math.sqrt(math.fsum(np.concatenate([a.real**2, a.imag**2])))


def exchange_2w(state):
    """Swap walker labels ``(x1, sigma1) <-> (x2, sigma2)``, keeping ``s0``."""
    g = state.grid()
    swapped = np.ascontiguousarray(g.transpose(1, 0, 2, 4, 3))
    return StateVector2W(swapped.ravel(), state.lx, state.normalized)
