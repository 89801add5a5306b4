import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kondowalk.errors import ConfigError, LatticeRangeError
from kondowalk.evolve2w import initial_delta_delta
from kondowalk.hilbert import (
    DOWN,
    L,
    R,
    UP,
    ModelParams,
    ParticleStatistics,
    StateVector1W,
    StateVector2W,
    exchange_2w,
    index_1w,
    index_2w,
    norm,
    unindex_1w,
    unindex_2w,
)


def test_index_1w_examples():
    assert index_1w(0, L, UP, 201) == 400
    assert index_1w(-100, L, UP, 201) == 0
    assert index_1w(100, R, DOWN, 201) == 803


def test_index_1w_out_of_range():
    with pytest.raises(LatticeRangeError):
        index_1w(101, L, UP, 201)
    with pytest.raises(LatticeRangeError):
        index_1w(0, 2, UP, 201)


def test_index_1w_bijection_small_lattice():
    lx = 5
    seen = []
    for x in range(-2, 3):
        for sigma in (L, R):
            for s0 in (UP, DOWN):
                i = index_1w(x, sigma, s0, lx)
                assert unindex_1w(i, lx) == (x, sigma, s0)
                seen.append(i)
    assert sorted(seen) == list(range(4 * lx))


def test_index_2w_bijection_small_lattice():
    lx = 5
    seen = []
    for x1 in range(-2, 3):
        for x2 in range(-2, 3):
            for s1 in (L, R):
                for s2 in (L, R):
                    for s0 in (UP, DOWN):
                        i = index_2w(x1, s1, x2, s2, s0, lx)
                        assert unindex_2w(i, lx) == (x1, s1, x2, s2, s0)
                        seen.append(i)
    assert sorted(seen) == list(range(8 * lx * lx))


def test_index_2w_internal_order():
    # (LL up, RL up, LR up, RR up, LL down, ...) at the origin pair
    lx = 3
    base = index_2w(-1, L, -1, L, UP, lx)
    assert base == 0
    assert index_2w(-1, R, -1, L, UP, lx) == 1
    assert index_2w(-1, L, -1, R, UP, lx) == 2
    assert index_2w(-1, L, -1, L, DOWN, lx) == 4


def test_params_validation():
    with pytest.raises(ConfigError):
        ModelParams(phi=0.1, lx=4)
    with pytest.raises(ConfigError):
        ModelParams(phi=0.1, lx=1)
    with pytest.raises(ConfigError):
        ModelParams(phi=0.1, epsilon=0.0)
    with pytest.raises(ConfigError):
        ModelParams()


def test_params_phi_from_m():
    p = ModelParams(epsilon=1.0, m=2.0, lx=5)
    assert p.phi == pytest.approx(-math.pi / 2, abs=1e-15)
    with pytest.raises(ConfigError):
        ModelParams(phi=0.3, epsilon=1.0, m=2.0, lx=5)


def test_family_constructors():
    assert ModelParams.xx(2.0).couplings == (2.0, 2.0, 0.0)
    assert ModelParams.su2(2.0).couplings == (2.0, 2.0, 2.0)


def test_statistics_enum_is_exhaustive():
    assert {s.value for s in ParticleStatistics} == {
        "fermion",
        "boson",
        "distinguishable",
    }


def test_norm_examples():
    assert norm(np.zeros(8)) == 0
    s = StateVector1W.zeros(3)
    s.amplitudes[5] = 1
    assert norm(s) == 1
    p = ModelParams.xx(1.0, lx=11)
    assert norm(initial_delta_delta(p, "distinguishable", 3)) == pytest.approx(1, abs=1e-15)


def test_normalized_flag_is_checked():
    with pytest.raises(ValueError):
        StateVector1W(np.ones(12), 3, normalized=True)


def test_exchange_of_statistics_states():
    p = ModelParams.xx(1.0, lx=11)
    f = initial_delta_delta(p, "fermion", 3)
    b = initial_delta_delta(p, "boson", 3)
    np.testing.assert_array_equal(exchange_2w(f).amplitudes, -f.amplitudes)
    np.testing.assert_array_equal(exchange_2w(b).amplitudes, b.amplitudes)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_exchange_is_unitary_involution(seed):
    rng = np.random.default_rng(seed)
    lx = 5
    a = rng.normal(size=8 * lx * lx) + 1j * rng.normal(size=8 * lx * lx)
    s = StateVector2W(a, lx)
    e = exchange_2w(s)
    np.testing.assert_array_equal(exchange_2w(e).amplitudes, a)
    assert norm(e) == norm(s)


def test_exchange_moves_labels():
    lx = 5
    s = StateVector2W.zeros(lx)
    s.amplitudes[index_2w(-1, L, 2, R, DOWN, lx)] = 1
    e = exchange_2w(s)
    assert e.amplitudes[index_2w(2, R, -1, L, DOWN, lx)] == 1
