import math

import numpy as np
import pytest

from jetflow.dynamics import (
    FreePotential,
    GaussianBarrier,
    HarmonicPotential,
    PolynomialPotential,
    ZeroClosure,
    action_via_quadrature,
    h_sigma,
    h_sigma_map,
    integrate,
    rhs,
)
from jetflow.errors import MissingMomentum, NodeApproach
from jetflow.jetstate import JetState, Physics, from_wavefunction_analytic
from jetflow.multiindex import MultiIndex, all_upto, empty, iter_orders, unit
from jetflow.reference import GaussianComponent


def plain_state(n, order, assign=None):
    p = {s: 0j for s in all_upto(n, order, 1)}
    if assign:
        p.update({MultiIndex(k): v for k, v in assign.items()})
    return JetState(t=0.0, q=np.zeros(n), p=p, p0=0j, order=order)


def gaussian_jet(order=2, a=1.0):
    return from_wavefunction_analytic(GaussianComponent(a=a), 0.0, 0.0, order)


# -- potentials ---------------------------------------------------------------


@pytest.mark.parametrize("pot,n", [
    (HarmonicPotential([1.0, 2.0], mass=[1.0, 3.0]), 2),
    (PolynomialPotential({(3,): 0.2, (1,): -0.4, (0,): 1.0}), 1),
    (PolynomialPotential({(2, 1): 0.3, (0, 2): 0.5, (1, 0): 1.2}), 2),
    (GaussianBarrier(height=2.0, width=[0.7, 1.1], center=[0.2, -0.3]), 2),
])
def test_potential_derivatives_match_finite_differences(pot, n):
    rng = np.random.default_rng(11)
    x0 = rng.normal(size=n) * 0.5
    h = 1e-4
    for sigma in iter_orders(n, 3):
        exact = pot.deriv(x0, sigma)
        # nested central differences
        def fd(sig, x):
            for i, c in enumerate(sig.counts):
                if c:
                    lower = sig - unit(n, i)
                    xp, xm = x.copy(), x.copy()
                    xp[i] += h
                    xm[i] -= h
                    return (fd(lower, xp) - fd(lower, xm)) / (2 * h)
            return pot.value(x)

        approx = fd(sigma, x0.copy())
        assert exact == pytest.approx(approx, rel=1e-5, abs=2e-4)


def test_free_potential_zeroes():
    pot = FreePotential()
    assert pot.value(np.array([1.0, 2.0])) == 0.0
    assert pot.deriv(np.array([1.0]), MultiIndex((2,))) == 0.0


# -- prolonged Hamiltonian -----------------------------------------------------


def test_h_sigma_empty_reproduces_base_hamiltonian():
    st = plain_state(1, 4, {(1,): 0.4 + 0.2j, (2,): 1j * 0.8})
    pot = HarmonicPotential(1.3)
    got = h_sigma(st, pot, empty(1))
    p1, p2 = st.p[MultiIndex((1,))], st.p[MultiIndex((2,))]
    want = p1**2 / 2 + pot.value(st.q) + 1 / 2j * p2
    assert got == pytest.approx(want)


def test_h_sigma_gaussian_second_order():
    st = plain_state(1, 2, {(2,): 1j})
    assert h_sigma(st, FreePotential(), MultiIndex((2,))) == pytest.approx(-1.0)


def test_h_sigma_first_order_form():
    st = plain_state(1, 3, {(1,): 0.3 - 0.1j, (2,): 0.2 + 0.5j, (3,): -0.4j})
    pot = PolynomialPotential({(3,): 0.7})
    got = h_sigma(st, pot, MultiIndex((1,)))
    p1, p2, p3 = (st.p[MultiIndex((k,))] for k in (1, 2, 3))
    want = p1 * p2 + pot.deriv(st.q, MultiIndex((1,))) + 1 / 2j * p3
    assert got == pytest.approx(want)


def test_h_sigma_matches_symbolic_prolongation_quick():
    # exact-arithmetic agreement of the subindex sum with repeated total
    # differentiation; the full |sigma| <= 5 sweep lives in the acceptance suite
    import sympy
    from sympy import I, Rational

    from jetflow import symjet

    rng = np.random.default_rng(5)
    for n in (1, 2):
        H = symjet.hamiltonian_schrodinger(n, hbar=1, mass=1)
        values = {}
        for s in all_upto(n, 5, 1):
            values[symjet.momentum("p", s)] = (
                Rational(int(rng.integers(-9, 10)), int(rng.integers(1, 8)))
                + I * Rational(int(rng.integers(-9, 10)), int(rng.integers(1, 8))))
        for s in all_upto(n, 3, 0):
            values[symjet.potential(s)] = Rational(int(rng.integers(-5, 6)),
                                                   int(rng.integers(1, 5)))
        for sigma in iter_orders(n, 3):
            expr = symjet.prolong(H, sigma).xreplace(values)
            direct = h_sigma_map(
                pm=lambda s: values[symjet.momentum("p", s)],
                u_of=lambda s: values[symjet.potential(s)],
                sigma=sigma, hbar=1, masses=[1] * n, iunit=I)
            assert sympy.expand(expr - direct) == 0


# -- right-hand side ------------------------------------------------------------


def test_rhs_free_gaussian():
    rate = rhs(gaussian_jet(), FreePotential())
    assert rate.qdot == pytest.approx([0.0])
    assert rate.pdot[MultiIndex((1,))] == pytest.approx(0.0)
    assert rate.pdot[MultiIndex((2,))] == pytest.approx(1.0)  # -p_xx^2 / m


def test_rhs_plane_wave():
    k0 = 1.7
    st = plain_state(1, 3, {(1,): k0})
    rate = rhs(st, FreePotential())
    assert rate.qdot == pytest.approx([k0])
    assert all(abs(v) < 1e-15 for v in rate.pdot.values())
    assert rate.p0dot == pytest.approx(k0**2 / 2)


def test_rhs_harmonic_at_origin():
    omega = 1.4
    st = plain_state(1, 2, {(2,): 0.6j})
    rate = rhs(st, HarmonicPotential(omega))
    assert rate.pdot[MultiIndex((1,))] == pytest.approx(0.0)  # -U_x(0)
    p2 = st.p[MultiIndex((2,))]
    assert rate.pdot[MultiIndex((2,))] == pytest.approx(-p2**2 - omega**2)


def random_states(count, n, order, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        st = plain_state(n, order)
        st.q = rng.normal(size=n)
        st.p0 = complex(rng.normal(), rng.normal())
        for s in st.p:
            st.p[s] = complex(rng.normal(), rng.normal())
        yield st


def test_rhs_action_rate_matches_real_pair_formulas():
    # Re(p0dot) and -Im(p0dot)/hbar against the phase/log-amplitude rates
    hbar = 0.7
    physics = Physics(hbar=hbar, masses=(1.3,))
    pot = PolynomialPotential({(2,): 0.4, (1,): -0.2})
    for st in random_states(100, 1, 3, seed=42):
        rate = rhs(st, pot, physics=physics)
        m = 1.3
        s1 = st.p[MultiIndex((1,))].real
        r1 = -st.p[MultiIndex((1,))].imag / hbar
        s2 = st.p[MultiIndex((2,))].real
        r2 = -st.p[MultiIndex((2,))].imag / hbar
        u = pot.value(st.q)
        sdot = s1**2 / (2 * m) - u + hbar**2 / (2 * m) * (r1**2 + r2)
        rdot = -s2 / (2 * m)
        assert rate.p0dot.real == pytest.approx(sdot, rel=1e-12, abs=1e-12)
        assert -rate.p0dot.imag / hbar == pytest.approx(rdot, rel=1e-12, abs=1e-12)


def test_rhs_conjugate_sector_is_mirror():
    # the conjugate momentums evolve by the conjugated equations, which is
    # the same kernel with the sign of hbar flipped
    pot = HarmonicPotential(0.9)
    for st in random_states(100, 1, 4, seed=9):
        rate = rhs(st, pot, physics=Physics(hbar=1.0))
        mirror = st.copy()
        mirror.p = {s: np.conj(v) for s, v in st.p.items()}
        mirror.p0 = np.conj(st.p0)
        mrate = rhs(mirror, pot, physics=Physics(hbar=-1.0))
        assert mrate.p0dot == pytest.approx(np.conj(rate.p0dot))
        for s in rate.pdot:
            assert mrate.pdot[s] == pytest.approx(np.conj(rate.pdot[s]))


def test_rhs_2d_and_masses():
    st = plain_state(2, 2, {(1, 0): 1.0, (0, 1): 2.0})
    rate = rhs(st, FreePotential(), physics=Physics(masses=(1.0, 4.0)))
    assert rate.qdot == pytest.approx([1.0, 0.5])


# -- integration -----------------------------------------------------------------


def test_integrate_riccati_short():
    rec = integrate(gaussian_jet(), FreePotential(), t_final=1.0,
                    tol=1e-10, sample_count=21)
    exact = 1j / (1 + 1j * rec.times)
    assert np.max(np.abs(rec.p[MultiIndex((2,))] - exact)) < 1e-8
    assert rec.p[MultiIndex((2,))][-1] == pytest.approx(0.5 + 0.5j, abs=1e-8)


def test_sample_times_strictly_increasing():
    for method, dt in (("rk45", None), ("rk4", 1e-2)):
        rec = integrate(gaussian_jet(), FreePotential(), t_final=1.0,
                        method=method, dt=dt, sample_count=37)
        assert np.all(np.diff(rec.times) > 0)


def test_integrate_plane_wave():
    k0 = 2.0
    st = plain_state(1, 2, {(1,): k0})
    rec = integrate(st, FreePotential(), t_final=1.0, tol=1e-10)
    assert rec.q[-1, 0] == pytest.approx(k0, abs=1e-9)
    assert rec.s()[-1] - rec.s()[0] == pytest.approx(k0**2 / 2, abs=1e-9)


def test_exact_closure_gaussian_harmonic():
    # log-quadratic state in a quadratic potential: the hierarchy closes and
    # third/fourth momentums stay identically zero
    omega = 1.0
    st = from_wavefunction_analytic(GaussianComponent(a=1.3, k0=0.4), 0.5, 0.0, 4)
    rec = integrate(st, HarmonicPotential(omega), t_final=3.0, tol=1e-10)
    for k in (3, 4):
        assert np.max(np.abs(rec.p[MultiIndex((k,))])) < 1e-12


def test_rk4_deterministic():
    st = gaussian_jet()
    rec1 = integrate(st, FreePotential(), t_final=0.5, method="rk4", dt=1e-3)
    rec2 = integrate(st.copy(), FreePotential(), t_final=0.5, method="rk4", dt=1e-3)
    assert np.array_equal(rec1.p[MultiIndex((2,))], rec2.p[MultiIndex((2,))])
    assert np.array_equal(rec1.q, rec2.q)


def test_node_guard_triggers():
    # spreading lowers the center log-amplitude without bound
    with pytest.raises(NodeApproach):
        integrate(gaussian_jet(), FreePotential(), t_final=40.0, node_bound=0.6)


def test_rk4_requires_dividing_step():
    with pytest.raises(ValueError):
        integrate(gaussian_jet(), FreePotential(), t_final=1.0, method="rk4", dt=0.3)


# -- action quadrature -------------------------------------------------------------


def test_action_plane_wave():
    k0 = 1.2
    st = plain_state(1, 2, {(1,): k0})
    rec = integrate(st, FreePotential(), t_final=2.0, tol=1e-11, sample_count=201)
    got = action_via_quadrature(rec, empty(1), FreePotential())
    assert got == pytest.approx(k0**2 / 2 * 2.0, abs=1e-9)


def test_action_gaussian_consistency_with_ode():
    rec = integrate(gaussian_jet(), FreePotential(), t_final=1.0, tol=1e-11,
                    sample_count=401)
    d1 = action_via_quadrature(rec, MultiIndex((1,)), FreePotential())
    assert abs(d1) < 1e-9  # p_x stays zero by symmetry
    d2 = action_via_quadrature(rec, MultiIndex((2,)), FreePotential())
    ode_diff = rec.p[MultiIndex((2,))][-1] - rec.p[MultiIndex((2,))][0]
    assert d2 == pytest.approx(ode_diff, abs=5e-8)
    assert d2 == pytest.approx(0.5 - 0.5j, abs=1e-6)


def test_action_quadrature_converges_with_cadence():
    errs = []
    for samples in (51, 101, 201):
        rec = integrate(gaussian_jet(), FreePotential(), t_final=1.0, tol=1e-12,
                        sample_count=samples)
        d2 = action_via_quadrature(rec, MultiIndex((2,)), FreePotential())
        ode_diff = rec.p[MultiIndex((2,))][-1] - rec.p[MultiIndex((2,))][0]
        errs.append(abs(d2 - ode_diff))
    assert errs[2] < errs[0]
    assert errs[2] < 1e-8


def test_action_missing_momentum():
    rec = integrate(gaussian_jet(), FreePotential(), t_final=0.5, tol=1e-10,
                    record_sigmas=[(1,)])
    with pytest.raises(MissingMomentum):
        action_via_quadrature(rec, MultiIndex((2,)), FreePotential())


# -- multiparticle flattening --------------------------------------------------------


def test_two_particle_flattened_masses():
    # two free 1D particles as one 2D system; each axis spreads on its own
    # mass scale and the velocities divide by the particle mass
    physics = Physics(masses=(1.0, 100.0))
    g = GaussianComponent(a=[1.0, 1.0], k0=[0.5, 0.5], n=2, physics=physics)
    st = from_wavefunction_analytic(g, [0.0, 0.0], 0.0, 2, physics=physics)
    rec = integrate(st, FreePotential(), t_final=1.0, tol=1e-10, physics=physics)
    assert rec.v[0] == pytest.approx([0.5, 0.005])
    for j, m in enumerate((1.0, 100.0)):
        sig = unit(2, j).extend(j)
        exact = 1j / (1 + 1j * rec.times / m)
        assert np.max(np.abs(rec.p[sig] - exact)) < 1e-8
