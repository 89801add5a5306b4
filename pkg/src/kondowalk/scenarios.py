"""Ready-made initial states and traces for the collision experiments."""

from __future__ import annotations

import numpy as np

from .bound import assemble_bound_state
from .entanglement import DEFAULT_CAP, negativity
from .errors import UnsupportedParameterError
from .evolve1w import Frame, build_u1w, frame_map, spectrum
from .evolve2w import Evolver2W, initial_bound_delta, initial_delta_delta
from .hilbert import StateVector1W
from .operators import Family, detect_family


def sharp_bound_states(params):
    """Symmetric-frame bound eigenvectors with ``Im(eigenvalue) > 0``.

    Sorted from the sharpest (eigenvalue closest to the real axis, largest
    ``|cos lam|``) to the widest.  Returns ``(eigenvalues, vectors)``.
    """
    res = spectrum(build_u1w(params, Frame.SYMMETRIC), params, fit_lengths=False)
    keep = [k for k in res.bound_indices() if res.eigenvalues[k].imag > 0]
    keep.sort(key=lambda k: -abs(res.eigenvalues[k].real))
    return res.eigenvalues[keep], res.eigenvectors[:, keep]


def bound_profile(params, index):
    """Symmetric-frame bound state used as the resting walker.

    XX couplings use the closed-form state ``index`` (1..4, in the order of
    :func:`kondowalk.bound.bound_eigenvalues_xx`) mapped from the shifted
    frame.  Other couplings use :func:`sharp_bound_states` and ``index``
    counts from the sharpest state.
    """
    family = detect_family(*params.couplings)
    if family is Family.XX and params.j_x != 0:
        sol = assemble_bound_state(params.phi, params.j_x, index, params.lx)
        vec = frame_map(params, sol.wavefunction.amplitudes)
    else:
        _, vecs = sharp_bound_states(params)
        if not 1 <= index <= vecs.shape[1]:
            raise UnsupportedParameterError(
                f"bound_index {index} out of range; {vecs.shape[1]} bound states found"
            )
        vec = vecs[:, index - 1]
    vec = vec / np.linalg.norm(vec)
    return StateVector1W(vec, params.lx, normalized=True)


def initial_state(params, init, stats, x0, bound_index=1):
    if init == "delta_delta":
        return initial_delta_delta(params, stats, x0)
    if init == "bound_delta":
        return initial_bound_delta(params, stats, x0, bound_profile(params, bound_index))
    raise ValueError(f"unknown init {init!r}")


def negativity_trace(params, init, stats, x0, steps, bound_index=1, cap=DEFAULT_CAP,
                     times=None):
    """Negativity results at ``t = 0..steps`` (or only at ``times``)."""
    ev = Evolver2W(params)
    want = None if times is None else set(times)
    out = {}
    for t, s in ev.run(initial_state(params, init, stats, x0, bound_index), steps):
        if want is None or t in want:
            out[t] = negativity(s, params.support_eps, cap=cap)
    return out
