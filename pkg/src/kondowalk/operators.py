"""Local unitary building blocks.

Every function here is a pure function of the model parameters and returns a
:class:`ScatteringMatrix`.  Closed-form impurity matrices are paired with
independent oracles that solve the midpoint jump condition of the continuum
Dirac problem as a small linear system (``cayley_oracle_1w``/``_2w``).

Basis orders follow :mod:`kondowalk.hilbert`: (L up, R up, L down, R down)
for one walker and (LL up, RL up, LR up, RR up, LL down, RL down, LR down,
RR down) for two walkers at the origin.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    BranchAmbiguityWarning,
    SingularParameterError,
    UnsupportedParameterError,
)

UNITARY_TOL = 1e-12
_SINGULAR_REL = 1e-14


class MatrixLabel(enum.Enum):
    COIN = "coin"
    COIN_SQRT = "coin_sqrt"
    S_IMP_1W = "s_imp_1w"
    S_IMP_1W_SQRT = "s_imp_1w_sqrt"
    S_IMP_2W = "s_imp_2w"
    S_IMP_2W_SQRT = "s_imp_2w_sqrt"
    S_DIRAC = "s_dirac"


class Family(enum.Enum):
    """Coupling families with closed-form two-walker square roots."""

    XX = "xx"
    SU2 = "su2"


@dataclass(frozen=True)
class ScatteringMatrix:
    """A small unitary block with a label describing its origin."""

    entries: np.ndarray
    label: MatrixLabel

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4, 8):
            raise ValueError(f"unsupported block shape {m.shape}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self):
        return self.entries.shape[0]

    def unitarity_error(self):
        m = self.entries
        return float(np.abs(m.conj().T @ m - np.eye(self.dim)).max())

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


# ---------------------------------------------------------------- coins


def coin(phi):
    """Coin ``exp(-i sigma_y phi) = [[cos, -sin], [sin, cos]]``."""
    c, s = math.cos(phi), math.sin(phi)
    return ScatteringMatrix(np.array([[c, -s], [s, c]]), MatrixLabel.COIN)


def coin_sqrt(phi):
    """Principal square root of :func:`coin`, i.e. the half-angle coin."""
    return ScatteringMatrix(coin(phi / 2).entries, MatrixLabel.COIN_SQRT)


def phi_from_dirac(epsilon, m):
    """Coin angle equivalent to a Dirac delta potential of strength ``m``."""
    den = epsilon**2 + m**2 / 4
    return math.atan2(-epsilon * m / den, (epsilon**2 - m**2 / 4) / den)


def s_dirac(epsilon, m):
    """Transmission matrix of a Dirac fermion through a delta potential."""
    den = epsilon**2 + m**2 / 4
    a = epsilon**2 - m**2 / 4
    b = epsilon * m
    return ScatteringMatrix(np.array([[a, b], [-b, a]]) / den, MatrixLabel.S_DIRAC)


# ---------------------------------------------------------------- helpers


def _check_den(d, scale):
    if abs(d) <= _SINGULAR_REL * scale:
        raise SingularParameterError(f"vanishing denominator {d!r}")


def _sqrt(z):
    """Principal complex square root, warning when ``z`` sits on the cut."""
    z = complex(z)
    if z.real < 0 and abs(z.imag) <= 1e-15 * abs(z):
        warnings.warn(
            f"square root of {z!r} taken on the negative real axis",
            BranchAmbiguityWarning,
            stacklevel=3,
        )
    return np.sqrt(z)


def _pattern_1w(a, b, g, d):
    return np.array(
        [[a, 0, 0, b], [0, g, d, 0], [0, d, g, 0], [b, 0, 0, a]], dtype=complex
    )


# ---------------------------------------------------------------- one walker


def s_imp_1w_entries(epsilon, j_x, j_y, j_z):
    """Closed-form entries ``(alpha, beta, gamma, delta)`` of the 1w impurity matrix."""
    jm, jp = j_x - j_y, j_x + j_y
    d1 = (2j * epsilon + j_z) ** 2 - jm**2
    d2 = (2j * epsilon - j_z) ** 2 - jp**2
    scale = (2 * epsilon + abs(j_z) + abs(j_x) + abs(j_y)) ** 2
    _check_den(d1, scale)
    _check_den(d2, scale)
    e2 = 4 * epsilon**2
    alpha = -(e2 - jm**2 + j_z**2) / d1
    beta = -4j * epsilon * jm / d1
    gamma = -(e2 - jp**2 + j_z**2) / d2
    delta = -4j * epsilon * jp / d2
    return alpha, beta, gamma, delta


def s_imp_1w(epsilon, j_x, j_y, j_z):
    """One-walker impurity scattering matrix at the origin."""
    return ScatteringMatrix(
        _pattern_1w(*s_imp_1w_entries(epsilon, j_x, j_y, j_z)), MatrixLabel.S_IMP_1W
    )


def s_imp_1w_sqrt(epsilon, j_x, j_y, j_z):
    """Square root of :func:`s_imp_1w` built from principal-branch roots.

    Each 2x2 block ``[[a, b], [b, a]]`` has eigenvalues ``a +- b`` on the
    vectors ``(1, +-1)``, so its root is ``[[p+q, p-q], [p-q, p+q]]/2``
    with ``p = sqrt(a+b)`` and ``q = sqrt(a-b)``.
    """
    a, b, g, d = s_imp_1w_entries(epsilon, j_x, j_y, j_z)
    pa, qa = _sqrt(a + b), _sqrt(a - b)
    pg, qg = _sqrt(g + d), _sqrt(g - d)
    m = 0.5 * _pattern_1w(pa + qa, pa - qa, pg + qg, pg - qg)
    return ScatteringMatrix(m, MatrixLabel.S_IMP_1W_SQRT)


def _jump_hamiltonian_1w(j_x, j_y, j_z):
    jm, jp = j_x - j_y, j_x + j_y
    return np.array(
        [[j_z, 0, 0, jm], [0, -j_z, jp, 0], [0, jp, -j_z, 0], [jm, 0, 0, j_z]],
        dtype=complex,
    )


def cayley_oracle_1w(epsilon, j_x, j_y, j_z):
    """Impurity matrix from the midpoint jump condition, solved numerically.

    The jump condition reads ``A psi(0+) = B psi(0-)`` with
    ``A, B = -i eps sigma_z (x) 1 +- H/2``.  Incoming amplitudes are the
    left movers at ``0+`` and right movers at ``0-``; the outgoing ones are
    the opposite pair.  Collecting them gives a 4x4 linear system.
    """
    sz = np.diag([1.0, -1.0, 1.0, -1.0]).astype(complex)
    h = _jump_hamiltonian_1w(j_x, j_y, j_z)
    a = -1j * epsilon * sz + h / 2
    b = -1j * epsilon * sz - h / 2
    left = np.diag([1.0, 0.0, 1.0, 0.0]).astype(complex)
    right = np.eye(4) - left
    lhs = a @ right - b @ left
    rhs = b @ right - a @ left
    return ScatteringMatrix(_solve(lhs, rhs), MatrixLabel.S_IMP_1W)


def _solve(lhs, rhs):
    if np.linalg.cond(lhs) > 1e13:
        raise SingularParameterError("jump-condition system is singular")
    return np.linalg.solve(lhs, rhs)


# ---------------------------------------------------------------- two walkers


def s_imp_2w_entries(epsilon, j_x, j_y, j_z):
    """Closed-form entries of the two-walker origin matrix.

    Returns a dict with keys ``alpha_p, alpha_m, beta, gamma, delta,
    eps_p, eps_m``.
    """
    e = epsilon
    den = -2j * j_x * j_y * j_z + (j_x**2 + j_y**2 + j_z**2) * e + e**3
    _check_den(den, (e + abs(j_x) + abs(j_y) + abs(j_z)) ** 3)
    common = 2j * j_x * j_y * j_z - j_z**2 * e + e**3
    split = 2j * j_z * e**2 + 2 * j_x * j_y * e
    return {
        "alpha_p": (common + split) / den,
        "alpha_m": (common - split) / den,
        "beta": (-(j_x**2) + j_y**2) * e / den,
        "gamma": (j_z**2 * e + e**3) / den,
        "delta": (2j * j_x * j_y * j_z - (j_x**2 + j_y**2) * e) / den,
        "eps_p": (j_x + j_y) * (j_z + 1j * e) * e / den,
        "eps_m": -(j_x - j_y) * (j_z - 1j * e) * e / den,
    }


def s_imp_2w(epsilon, j_x, j_y, j_z):
    """Scattering matrix when both walkers sit on the impurity."""
    c = s_imp_2w_entries(epsilon, j_x, j_y, j_z)
    ap, am, b, g, d = c["alpha_p"], c["alpha_m"], c["beta"], c["gamma"], c["delta"]
    ep, em = c["eps_p"], c["eps_m"]
    m = np.array(
        [
            [ap, 0, 0, b, 0, em, em, 0],
            [0, g, d, 0, ep, 0, 0, em],
            [0, d, g, 0, ep, 0, 0, em],
            [b, 0, 0, am, 0, ep, ep, 0],
            [0, ep, ep, 0, am, 0, 0, b],
            [em, 0, 0, ep, 0, g, d, 0],
            [em, 0, 0, ep, 0, d, g, 0],
            [0, em, em, 0, b, 0, 0, ap],
        ],
        dtype=complex,
    )
    return ScatteringMatrix(m, MatrixLabel.S_IMP_2W)


def _pattern_2w_sqrt(ap, am, g, d, ep):
    return np.array(
        [
            [ap, 0, 0, 0, 0, 0, 0, 0],
            [0, g, d, 0, ep, 0, 0, 0],
            [0, d, g, 0, ep, 0, 0, 0],
            [0, 0, 0, am, 0, ep, ep, 0],
            [0, ep, ep, 0, am, 0, 0, 0],
            [0, 0, 0, ep, 0, g, d, 0],
            [0, 0, 0, ep, 0, d, g, 0],
            [0, 0, 0, 0, 0, 0, 0, ap],
        ],
        dtype=complex,
    )


def s_imp_2w_sqrt(epsilon, j, family):
    """Closed-form square root of the two-walker origin matrix.

    Parameters
    ----------
    epsilon : float
        Kinetic scale.  The SU(2) family is only available at ``epsilon=1``.
    j : float
        Coupling strength of the family.
    family : Family or str
        ``"xx"`` for ``(j, j, 0)`` or ``"su2"`` for ``(j, j, j)``.
    """
    family = Family(family)
    if family is Family.XX:
        r = math.sqrt(2 * j * j + epsilon**2)
        q = epsilon / r
        m = _pattern_2w_sqrt(1.0, q, (1 + q) / 2, (-1 + q) / 2, 1j * j / r)
    else:
        if epsilon != 1:
            raise UnsupportedParameterError(
                "SU(2) two-walker square root is only available at epsilon=1"
            )
        a = _sqrt((1j - j) / (1j + j))
        b = _sqrt((1j + 2 * j) / (1j - 2 * j))
        m = _pattern_2w_sqrt(
            a, (2 * b + a) / 3, (3 + b + 2 * a) / 6, (-3 + b + 2 * a) / 6, (a - b) / 3
        )
    return ScatteringMatrix(m, MatrixLabel.S_IMP_2W_SQRT)


def family_couplings(family, j):
    """Coupling triple ``(j_x, j_y, j_z)`` of a family."""
    return (j, j, 0.0) if Family(family) is Family.XX else (j, j, j)


def detect_family(j_x, j_y, j_z):
    """Return the :class:`Family` matching a coupling triple, or ``None``."""
    if j_x != j_y:
        return None
    if j_z == 0:
        return Family.XX
    if j_z == j_x:
        return Family.SU2
    return None


def cayley_oracle_2w(epsilon, j_x, j_y, j_z):
    """Two-walker origin matrix ``(i eps + M/2)^-1 (i eps - M/2)``."""
    jp, jm = j_x + j_y, j_x - j_y
    m = np.zeros((8, 8), complex)
    m[0, 0] = m[7, 7] = 2 * j_z
    m[3, 3] = m[4, 4] = -2 * j_z
    m[0, 5] = m[0, 6] = jm
    m[1, 4] = m[2, 4] = jp
    m[1, 7] = m[2, 7] = jm
    m[3, 5] = m[3, 6] = jp
    m[4, 1] = m[4, 2] = jp
    m[5, 0] = m[6, 0] = jm
    m[5, 3] = m[6, 3] = jp
    m[7, 1] = m[7, 2] = jm
    eye = np.eye(8)
    s = _solve(1j * epsilon * eye + m / 2, 1j * epsilon * eye - m / 2)
    return ScatteringMatrix(s, MatrixLabel.S_IMP_2W)
