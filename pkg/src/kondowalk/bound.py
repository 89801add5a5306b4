"""Closed-form bound states of one walker with XX coupling.

Away from the origin an eigenvector with eigenvalue ``exp(i lam)`` obeys a
two-site recursion ``Psi(x+1) = T Psi(x)`` on the vector
``(psi_L(x-1), psi_R(x), psi_L down(x-1), psi_R down(x))``.  Across the
origin the recursion is ``T0``.  When ``cos^2 lam > cos^2 phi`` the
eigenvalues ``zeta+-`` of ``T`` are real with ``zeta+ zeta- = 1``, and a bound
state exists iff the component of ``T0 Psi(0)`` along the growing
eigenvectors can vanish.  This is a 2x2 determinant condition in ``lam``
whose roots are available in closed form.

All dot products between transfer vectors are bilinear (no conjugation).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BulkRegimeError, SingularParameterError
from .hilbert import StateVector1W


class Branch(enum.Enum):
    COS_POSITIVE = "cos_positive"
    COS_NEGATIVE = "cos_negative"


@dataclass(frozen=True)
class TransferPair:
    t_bulk: np.ndarray
    t_origin: np.ndarray
    lam: float
    zeta_plus: float
    zeta_minus: float
    v1p: np.ndarray
    v1m: np.ndarray
    v2p: np.ndarray
    v2m: np.ndarray


@dataclass(frozen=True)
class BoundStateSolution:
    """An assembled bound eigenstate of the shifted-frame step operator.

    The coefficients describe the recursion vector: ``a0 v1 + b0 v2`` at
    ``x <= 0`` (growing vectors) and ``c0 v1 + d0 v2`` at ``x >= 1``
    (decaying vectors), each multiplied by the appropriate power of zeta.
    """

    eigenvalue: complex
    branch: Branch
    zeta_plus: float
    a0: complex
    b0: complex
    c0: complex
    d0: complex
    localization_length: float
    wavefunction: StateVector1W
    determinant_residual: float


def _check_coin(phi):
    if abs(math.cos(phi)) < 1e-14:
        raise SingularParameterError("transfer matrix undefined for cos(phi) = 0")


def transfer_bulk(lam, phi):
    """Bulk transfer matrix: two identical 2x2 blocks with unit determinant."""
    _check_coin(phi)
    c, s = math.cos(phi), math.sin(phi)
    block = np.array([[cmath.exp(-1j * lam), -s], [-s, cmath.exp(1j * lam)]]) / c
    return np.kron(np.eye(2), block)


def transfer_origin(lam, phi, j):
    """Transfer matrix across the impurity for XX coupling ``j``."""
    den = 1 - 2 * j * j + math.cos(2 * phi)
    if abs(den) < 1e-14:
        raise SingularParameterError(f"origin transfer matrix singular at j={j}")
    em, ep = cmath.exp(-1j * lam), cmath.exp(1j * lam)
    c, s, s2 = math.cos(phi), math.sin(phi), math.sin(2 * phi)
    jj = j * j
    m = np.array(
        [
            [2 * em * (-jj + c), -s2, 2j * em * j * s, 2j * j * (-1 + c)],
            [-s2, 2 * ep * (jj + c), -2j * j * (1 + c), 2j * ep * j * s],
            [-2j * em * j * s, 2j * j * (1 + c), 2 * em * (jj + c), -s2],
            [-2j * j * (-1 + c), -2j * ep * j * s, -s2, 2 * ep * (-jj + c)],
        ]
    )
    return m / den


def _root_gap(lam, phi):
    gap = math.cos(lam) ** 2 - math.cos(phi) ** 2
    if gap <= 0:
        raise BulkRegimeError(
            f"cos^2(lam) <= cos^2(phi) at lam={lam!r}: transfer eigenvalues are complex"
        )
    return math.sqrt(gap)


def transfer_eigensystem(lam, phi):
    """Eigenvalues ``zeta+-`` and unit eigenvectors of :func:`transfer_bulk`.

    Returns
    -------
    tuple
        ``(zeta_plus, zeta_minus, v1p, v1m, v2p, v2m)``; ``v1`` lives on the
        up-spin pair, ``v2`` on the down-spin pair.
    """
    _check_coin(phi)
    r = _root_gap(lam, phi)
    c = math.cos(phi)
    zp = (math.cos(lam) + r) / c
    zm = (math.cos(lam) - r) / c
    out = []
    for sign in (1, -1):
        u = np.array([math.sin(phi), -1j * math.sin(lam) - sign * r])
        u = u / np.linalg.norm(u)
        out.append(u)
    zero = np.zeros(2)
    v1p, v1m = (np.concatenate([u, zero]) for u in out)
    v2p, v2m = (np.concatenate([zero, u]) for u in out)
    return zp, zm, v1p, v1m, v2p, v2m


def closed_form_vectors(j):
    """Transfer eigenvectors at the ``cos > 0``, ``Im < 0`` root for ``j > 0``.

    Returns ``(v1p, v1m, v2p, v2m)`` built from ``sqrt(j +- i)`` with the
    prefactor ``1 / (sqrt(2) (j^2+1)^(1/4))``.  At the ``Im > 0`` root the
    eigenvectors are the complex conjugates of these.
    """
    k = 1 / (math.sqrt(2) * (j * j + 1) ** 0.25)
    a, b = cmath.sqrt(j + 1j), cmath.sqrt(j - 1j)
    up = k * np.array([a, -b, 0, 0])
    um = k * np.array([b, a, 0, 0])
    return up, um, np.roll(up, 2), np.roll(um, 2)


def transfer_pair(lam, phi, j):
    zp, zm, v1p, v1m, v2p, v2m = transfer_eigensystem(lam, phi)
    return TransferPair(
        transfer_bulk(lam, phi), transfer_origin(lam, phi, j), lam, zp, zm,
        v1p, v1m, v2p, v2m,
    )


def bound_eigenvalues_xx(phi, j):
    """The four closed-form bound eigenvalues for XX coupling ``j``.

    Ordered as ``(c + i s, c - i s, -c + i s, -c - i s)`` with ``c > 0`` and
    ``s >= 0``; the first two belong to the ``cos > 0`` branch.
    """
    c = math.sqrt((1 + 2 * j * j + math.cos(2 * phi)) / 2)
    s = abs(math.sin(phi))
    base = (c + 1j * s) / math.sqrt(1 + j * j), (c - 1j * s) / math.sqrt(1 + j * j)
    return np.array([base[0], base[1], -base[0], -base[1]])


def squared_eigenvalue_roots(phi, j):
    """The two roots of the quadratic in ``exp(2 i lam)``: ``(+i root, -i root)``."""
    re = j * j + math.cos(2 * phi)
    im = math.sqrt(2) * math.sqrt((1 + 2 * j * j + math.cos(2 * phi)) * math.sin(phi) ** 2)
    return np.array([re + 1j * im, re - 1j * im]) / (1 + j * j)


def _growing(lam, phi):
    zp, zm, v1p, v1m, v2p, v2m = transfer_eigensystem(lam, phi)
    if abs(zp) > 1:
        return (zp, v1p, v2p), (zm, v1m, v2m)
    return (zm, v1m, v2m), (zp, v1p, v2p)


def _coefficient_matrix(lam, phi, j):
    (_, g1, g2), _ = _growing(lam, phi)
    t0 = transfer_origin(lam, phi, j)
    return np.array([[g1 @ t0 @ g1, g1 @ t0 @ g2], [g2 @ t0 @ g1, g2 @ t0 @ g2]])


def determinant_condition(lam, phi, j):
    """Determinant whose zeros are the bound-state phases.

    Uses the growing transfer eigenvectors (``v+`` when ``cos lam > 0``,
    ``v-`` otherwise).
    """
    m = _coefficient_matrix(lam, phi, j)
    return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def antisymmetry_residual(lam, phi, j):
    """``|v1 . T0 v2 + v2 . T0 v1|``, which vanishes identically."""
    m = _coefficient_matrix(lam, phi, j)
    return abs(m[0, 1] + m[1, 0])


def localization_length_analytic(lam, phi):
    """``1 / ln((|cos lam| + sqrt(cos^2 lam - cos^2 phi)) / cos phi)``."""
    r = _root_gap(lam, phi)
    return 1.0 / math.log((abs(math.cos(lam)) + r) / abs(math.cos(phi)))


def _mirror_shift(psi_mirror, lx):
    """Map a solution of the mirrored recursion onto our lattice.

    The recursion above is derived for a lattice where the shift moves L
    components toward +x.  Reflecting sites and applying one shift step
    turns its eigenvector into one of ``S sqrt(C) C0 sqrt(C)``.
    """
    g = psi_mirror.reshape(lx, 2, 2)[::-1]
    out = np.empty_like(g)
    out[:, :, 0] = np.roll(g[:, :, 0], -1, axis=0)
    out[:, :, 1] = np.roll(g[:, :, 1], 1, axis=0)
    return out.ravel()


def assemble_bound_state(phi, j, which, lx):
    """Closed-form bound eigenvector of the shifted-frame step operator.

    Parameters
    ----------
    phi, j : float
        Coin angle and XX coupling.
    which : int
        1..4, indexing :func:`bound_eigenvalues_xx`.
    lx : int
        Odd lattice size; should span many localization lengths.
    """
    if which not in (1, 2, 3, 4):
        raise ValueError(f"which must be in 1..4, got {which}")
    w = complex(bound_eigenvalues_xx(phi, j)[which - 1])
    lam = cmath.phase(w)
    (zg, g1, g2), (zd, d1, d2) = _growing(lam, phi)
    t0 = transfer_origin(lam, phi, j)
    m = _coefficient_matrix(lam, phi, j)
    _, _, vh = np.linalg.svd(m)
    a, b = vh[-1].conj()
    k = a if abs(a) >= abs(b) else b
    a, b = a * abs(k) / k, b * abs(k) / k
    p0 = a * g1 + b * g2
    q = t0 @ p0
    (c, d), *_ = np.linalg.lstsq(np.column_stack([d1, d2]), q, rcond=None)

    half = (lx - 1) // 2
    xs = np.arange(-half, half + 2)
    rec = np.empty((len(xs), 4), complex)
    left = xs <= 0
    rec[left] = np.power(zg, xs[left].astype(float))[:, None] * p0
    rec[~left] = np.power(zd, xs[~left].astype(float) - 1)[:, None] * q
    # rec[k] holds (psi_L(x-1), psi_R(x), psi_Ld(x-1), psi_Rd(x)) at x = xs[k]
    mirror = np.empty((lx, 4), complex)
    mirror[:, 0] = rec[1:, 0]
    mirror[:, 2] = rec[1:, 2]
    mirror[:, 1] = rec[:-1, 1]
    mirror[:, 3] = rec[:-1, 3]
    psi = _mirror_shift(mirror.ravel(), lx)
    scale = 1.0 / np.linalg.norm(psi)
    return BoundStateSolution(
        eigenvalue=w,
        branch=Branch.COS_POSITIVE if w.real > 0 else Branch.COS_NEGATIVE,
        zeta_plus=max(abs(zg), abs(zd)),
        a0=a * scale,
        b0=b * scale,
        c0=c * scale,
        d0=d * scale,
        localization_length=localization_length_analytic(lam, phi),
        wavefunction=StateVector1W(psi * scale, lx, normalized=True),
        determinant_residual=abs(determinant_condition(lam, phi, j)),
    )
