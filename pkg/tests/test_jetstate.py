import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jetflow.errors import NodeError
from jetflow.jetstate import JetState, Physics, from_wavefunction_analytic
from jetflow.multiindex import MultiIndex, all_upto, empty, unit


class StaticGaussian:
    """Test oracle: psi(x) = (pi a^2)^{-1/4} exp(-(x-x0)^2/(2a^2) + i k0 (x-x0)).

    Log-derivatives are written out by hand, independently of the package's
    analytic-state machinery.
    """

    def __init__(self, a=1.0, k0=0.0, x0=0.0):
        self.a, self.k0, self.x0 = a, k0, x0

    def value(self, q, t):
        x = float(np.atleast_1d(q)[0])
        u = x - self.x0
        return (math.pi * self.a**2) ** -0.25 * np.exp(
            -u**2 / (2 * self.a**2) + 1j * self.k0 * u)

    def peak_amplitude(self, t):
        return (math.pi * self.a**2) ** -0.25

    def log_derivatives(self, q, t, max_order):
        x = float(np.atleast_1d(q)[0])
        u = x - self.x0
        d = {empty(1): -0.25 * math.log(math.pi * self.a**2)
             - u**2 / (2 * self.a**2) + 1j * self.k0 * u}
        d[MultiIndex((1,))] = -u / self.a**2 + 1j * self.k0
        d[MultiIndex((2,))] = -1 / self.a**2 + 0j
        for k in range(3, max_order + 1):
            d[MultiIndex((k,))] = 0j
        return d


def gaussian_state(a=1.0, hbar=1.0):
    p = {MultiIndex((1,)): 0j, MultiIndex((2,)): 1j * hbar / a**2}
    p0 = (hbar / 1j) * (-0.25 * math.log(math.pi * a**2))
    return JetState(t=0.0, q=np.zeros(1), p=p, p0=p0, order=2)


def zero_state(n, order):
    return JetState(t=0.0, q=np.zeros(n),
                    p={s: 0j for s in all_upto(n, order, 1)}, p0=0j, order=order)


def test_taylor_eval_trivial():
    st0 = zero_state(1, 2)
    assert st0.taylor_eval(0.7) == pytest.approx(1.0)

    st1 = zero_state(1, 2)
    st1.p0 = 2.5
    assert st1.taylor_eval(1.3) == pytest.approx(np.exp(1j * 2.5))
    assert abs(st1.taylor_eval(1.3)) == pytest.approx(1.0)


def test_taylor_eval_gaussian_closed_form():
    a = 1.0
    st = gaussian_state(a=a)
    want = (math.pi * a**2) ** -0.25 * math.exp(-0.5)
    assert st.taylor_eval(a) == pytest.approx(want, rel=1e-14)


def test_taylor_eval_at_center():
    st = gaussian_state()
    assert st.taylor_eval(0.0) == pytest.approx(np.exp(1j * st.p0), rel=1e-15)


def test_to_sr():
    hbar = 1.0
    st = zero_state(1, 2)
    st.p[MultiIndex((1,))] = 0.7  # hbar*k0 real
    st.p[MultiIndex((2,))] = 1j * hbar / 4.0
    sr = st.to_sr()
    assert sr[MultiIndex((1,))] == pytest.approx((0.7, 0.0))
    assert sr[MultiIndex((2,))] == pytest.approx((0.0, -1 / 4.0))

    st.p0 = 3 - 1j * hbar * 2
    assert st.action_pair() == pytest.approx((3.0, 2.0))


def test_velocity():
    st = zero_state(1, 2)
    st.p[MultiIndex((1,))] = 0.9
    assert st.velocity() == pytest.approx([0.9])
    assert st.velocity(Physics(masses=(2.0,))) == pytest.approx([0.45])

    st.p[MultiIndex((1,))] = 1j / 1.0**2
    assert st.velocity() == pytest.approx([0.0])

    st2 = zero_state(2, 1)
    st2.p[unit(2, 0)] = 1.2
    st2.p[unit(2, 1)] = 1j * 0.5
    assert st2.velocity() == pytest.approx([1.2, 0.0])


def test_velocity_equals_grad_s_over_m():
    rng = np.random.default_rng(3)
    for _ in range(20):
        st = zero_state(2, 3)
        for s in st.p:
            st.p[s] = complex(rng.normal(), rng.normal())
        masses = (1.5, 0.5)
        sr = st.to_sr()
        grad_s = np.array([sr[unit(2, i)].s for i in range(2)]) / np.array(masses)
        assert st.velocity(Physics(masses=masses)) == pytest.approx(grad_s)


def test_from_wavefunction_analytic_gaussian():
    st = from_wavefunction_analytic(StaticGaussian(), q=0.0, t=0.0, order=2)
    assert st.p[MultiIndex((1,))] == pytest.approx(0.0)
    assert st.p[MultiIndex((2,))] == pytest.approx(1j)


def test_from_wavefunction_plane_wave_factor():
    k0 = 2.5
    st = from_wavefunction_analytic(StaticGaussian(k0=k0), q=0.0, t=0.0, order=2)
    assert st.p[MultiIndex((1,))] == pytest.approx(k0)
    assert st.p[MultiIndex((2,))] == pytest.approx(1j)


def test_from_wavefunction_node_error():
    class Antisymmetric:
        """Two opposite-phase packets: exact zero midway between them."""

        def value(self, q, t):
            g = StaticGaussian(x0=-1.0)
            h = StaticGaussian(x0=1.0)
            return g.value(q, t) - h.value(q, t)

        def peak_amplitude(self, t):
            return StaticGaussian().peak_amplitude(t)

        def log_derivatives(self, q, t, max_order):
            raise AssertionError("should fail before differentiating")

    with pytest.raises(NodeError):
        from_wavefunction_analytic(Antisymmetric(), q=0.0, t=0.0, order=2)


def test_round_trip_wavefunction_taylor():
    # gaussian log is a degree-2 polynomial: exact at order 2 up to round-off
    spec = StaticGaussian(a=0.8, k0=1.1, x0=0.3)
    st = from_wavefunction_analytic(spec, q=0.5, t=0.0, order=2)
    for x in np.linspace(0.42, 0.58, 9):
        assert st.taylor_eval(x) == pytest.approx(spec.value(x, 0.0), rel=1e-12)


def test_validation_rejects_holes():
    with pytest.raises(ValueError):
        JetState(t=0.0, q=np.zeros(2), p={unit(2, 0): 1j}, order=2)


def test_json_round_trip():
    st = gaussian_state(a=0.7)
    st.t = 1.25
    back = JetState.from_json(st.to_json())
    assert back.t == st.t
    assert np.array_equal(back.q, st.q)
    assert back.p0 == st.p0
    assert back.p == st.p


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_sr_round_trip_bit_exact(re, im):
    state = zero_state(1, 1)
    state.p[MultiIndex((1,))] = complex(re, im)
    pair = state.to_sr()[MultiIndex((1,))]
    assert complex(pair.s, -pair.r * 1.0) == state.p[MultiIndex((1,))]
