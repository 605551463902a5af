"""Equations of motion for the truncated momentum hierarchy.

The closed-form prolonged Hamiltonian drives the coupled ODE system for
(q, p0, {p_sigma}); the tail momentums above the truncation order come from
a closure policy (identically zero, or fetched from a reference oracle).
Time stepping is fixed-step RK4 for determinism and lock-step oracle use, or
adaptive RK45 via scipy for everything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import simpson, solve_ivp

from . import kernels
from .errors import MissingMomentum, NodeApproach, StepFailure
from .jetstate import DEFAULT_PHYSICS, JetState, Physics
from .multiindex import MultiIndex, all_upto, empty, unit

# -- potentials ---------------------------------------------------------------


class Potential:
    """Closed-form scalar potential with exact derivatives of any order."""

    kind = "base"

    def value(self, x, t: float = 0.0):
        """Potential at points with trailing coordinate axis (or scalar, n=1)."""
        raise NotImplementedError

    def deriv(self, x, sigma: MultiIndex, t: float = 0.0) -> float:
        """Exact partial derivative d_sigma U at a single point."""
        raise NotImplementedError

    def value_on_mesh(self, mesh: Sequence[np.ndarray], t: float = 0.0) -> np.ndarray:
        """Potential on a broadcastable coordinate mesh (for grid solvers)."""
        stacked = np.stack(np.broadcast_arrays(*mesh), axis=-1)
        return self.value(stacked, t)

    def derivs_packed(self, q, t, sigmas: Sequence[MultiIndex]) -> np.ndarray:
        return np.array([self.deriv(q, s, t) for s in sigmas], dtype=float)

    def describe(self) -> dict:
        return {"kind": self.kind}


class FreePotential(Potential):
    kind = "free"

    def value(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1] if x.ndim > 1 else (() if x.ndim else ())
        return np.zeros(shape) if shape else 0.0

    def deriv(self, x, sigma, t=0.0):
        return 0.0

    def derivs_packed(self, q, t, sigmas):
        return np.zeros(len(sigmas))


class HarmonicPotential(Potential):
    """U = sum_j m_j omega_j^2 x_j^2 / 2, optionally offset per axis."""

    kind = "harmonic"

    def __init__(self, omega, mass=1.0, center=None, n: int | None = None):
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        if n is not None and omega.size == 1:
            omega = np.full(n, omega[0])
        self.omega = omega
        self.n = omega.size
        mass = np.atleast_1d(np.asarray(mass, dtype=float))
        self.mass = np.full(self.n, mass[0]) if mass.size == 1 else mass
        self.center = np.zeros(self.n) if center is None else np.asarray(center, float)
        self.spring = self.mass * self.omega**2

    def value(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        if self.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        u = x - self.center
        return 0.5 * np.sum(self.spring * u**2, axis=-1)

    def deriv(self, x, sigma, t=0.0):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        order = sigma.order
        if order == 0:
            return float(self.value(x, t))
        if order == 1:
            j = sigma.counts.index(1)
            return float(self.spring[j] * (x[j] - self.center[j]))
        if order == 2 and max(sigma.counts) == 2:
            j = sigma.counts.index(2)
            return float(self.spring[j])
        return 0.0

    def describe(self):
        return {"kind": self.kind, "omega": self.omega.tolist(),
                "mass": self.mass.tolist(), "center": self.center.tolist()}


class PolynomialPotential(Potential):
    """U = sum_mu c_mu x^mu with monomial coefficients keyed by multi-index."""

    kind = "polynomial"

    def __init__(self, coeffs: dict, n: int | None = None):
        items = {}
        for key, c in coeffs.items():
            mu = key if isinstance(key, MultiIndex) else MultiIndex(
                key if isinstance(key, (tuple, list)) else (key,))
            items[mu] = float(c)
        self.coeffs = items
        self.n = n if n is not None else next(iter(items)).n

    def value(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        if self.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        out = np.zeros(x.shape[:-1])
        for mu, c in self.coeffs.items():
            mono = np.ones(x.shape[:-1])
            for i, k in enumerate(mu.counts):
                if k:
                    mono = mono * x[..., i] ** k
            out = out + c * mono
        return float(out) if out.ndim == 0 else out

    def deriv(self, x, sigma, t=0.0):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        total = 0.0
        for mu, c in self.coeffs.items():
            if not mu.contains(sigma):
                continue
            rest = mu - sigma
            factor = c
            for mi, si in zip(mu.counts, sigma.counts):
                factor *= math.factorial(mi) / math.factorial(mi - si)
            mono = 1.0
            for i, k in enumerate(rest.counts):
                if k:
                    mono *= x[i] ** k
            total += factor * mono
        return total

    def describe(self):
        return {"kind": self.kind,
                "coeffs": {mu.name(): c for mu, c in self.coeffs.items()}}


class GaussianBarrier(Potential):
    """Separable bump: height * prod_j exp(-(x_j - c_j)^2 / (2 w_j^2))."""

    kind = "gaussian-barrier"

    def __init__(self, height: float, width, center, n: int | None = None):
        width = np.atleast_1d(np.asarray(width, dtype=float))
        center = np.atleast_1d(np.asarray(center, dtype=float))
        self.n = n or max(width.size, center.size)
        self.width = np.full(self.n, width[0]) if width.size == 1 else width
        self.center = np.full(self.n, center[0]) if center.size == 1 else center
        self.height = float(height)
        self._poly_cache: dict[tuple[int, int], np.polynomial.Polynomial] = {}

    def value(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        if self.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        u = x - self.center
        return self.height * np.exp(-np.sum(u**2 / (2 * self.width**2), axis=-1))

    def _hermite_factor(self, axis: int, k: int) -> np.polynomial.Polynomial:
        # d^k/du^k exp(-u^2/2w^2) = P_k(u) exp(-u^2/2w^2), P_{k+1} = P' - u P / w^2
        key = (axis, k)
        if key not in self._poly_cache:
            w2 = self.width[axis] ** 2
            P = np.polynomial.Polynomial([1.0])
            u = np.polynomial.Polynomial([0.0, 1.0])
            for _ in range(k):
                P = P.deriv() - u * P / w2
            self._poly_cache[key] = P
        return self._poly_cache[key]

    def deriv(self, x, sigma, t=0.0):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = self.height
        for j, k in enumerate(sigma.counts):
            u = x[j] - self.center[j]
            out *= math.exp(-(u**2) / (2 * self.width[j] ** 2))
            if k:
                out *= self._hermite_factor(j, k)(u)
        return out

    def describe(self):
        return {"kind": self.kind, "height": self.height,
                "width": self.width.tolist(), "center": self.center.tolist()}


# -- closure policies ---------------------------------------------------------


class ZeroClosure:
    """Momentums above the truncation order are treated as exactly zero."""

    name = "zero"

    def prepare(self, t0: float, t_final: float, dt: float | None) -> None:
        pass

    def tail(self, q, t, tail_sigmas) -> np.ndarray:
        return np.zeros(len(tail_sigmas), dtype=complex)


class OracleClosure:
    """Tail momentums fetched from a reference solution each evaluation.

    The oracle exposes momenta(q, t, sigmas); grid-backed oracles advance in
    lock-step and therefore require the fixed-step integrator.
    """

    name = "oracle"

    def __init__(self, oracle):
        self.oracle = oracle

    def prepare(self, t0, t_final, dt):
        prep = getattr(self.oracle, "prepare", None)
        if prep is not None:
            prep(t0, t_final, dt)

    def tail(self, q, t, tail_sigmas) -> np.ndarray:
        return np.asarray(self.oracle.momenta(q, t, tail_sigmas), dtype=complex)


# -- packed system ------------------------------------------------------------


class StateRate(NamedTuple):
    qdot: np.ndarray
    p0dot: complex
    pdot: dict


class HierarchySystem:
    """Packed ODE view of the hierarchy for one truncation order."""

    def __init__(self, n: int, order: int, pot: Potential,
                 closure, physics: Physics = DEFAULT_PHYSICS):
        self.n = n
        self.order = order
        self.pot = pot
        self.closure = closure
        self.physics = physics
        self.tables = kernels.build_tables(n, order)
        self.bound = kernels.bind_tables(self.tables, physics.mass_array(n),
                                         physics.hbar)
        self.nfev = 0

    @property
    def size(self) -> int:
        return self.n + 1 + self.tables.n_active

    def pack(self, state: JetState) -> np.ndarray:
        if state.order != self.order or state.n != self.n:
            raise ValueError("state shape does not match the system")
        y = np.empty(self.size, dtype=complex)
        y[:self.n] = state.q
        y[self.n] = state.p0
        y[self.n + 1:] = [state.p[s] for s in self.tables.active_sigmas]
        return y

    def unpack(self, t: float, y: np.ndarray) -> JetState:
        p = {s: y[self.n + 1 + k] for k, s in enumerate(self.tables.active_sigmas)}
        return JetState(t=float(t), q=y[:self.n].real.copy(), p=p,
                        p0=complex(y[self.n]), order=self.order)

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        self.nfev += 1
        tb = self.tables
        q = y[:self.n].real
        p_full = np.zeros(tb.n_full, dtype=complex)
        p_full[:tb.n_active] = y[self.n + 1:]
        p_full[tb.n_active:] = self.closure.tail(q, t, tb.tail_sigmas)
        u_act = self.pot.derivs_packed(q, t, tb.active_sigmas)
        u0 = self.pot.deriv(q, empty(self.n), t)
        v, p0_dot, pdot = kernels.hierarchy_rhs(p_full, u_act, u0, self.bound)
        out = np.empty_like(y)
        out[:self.n] = v
        out[self.n] = p0_dot
        out[self.n + 1:] = pdot
        return out

    def log_amplitude(self, y: np.ndarray) -> float:
        return -complex(y[self.n]).imag / self.physics.hbar


def rhs(state: JetState, pot: Potential, closure=None,
        physics: Physics = DEFAULT_PHYSICS) -> StateRate:
    """Time derivative of a JetState (dictionary view of the packed kernel)."""
    closure = closure or ZeroClosure()
    sys_ = HierarchySystem(state.n, state.order, pot, closure, physics)
    out = sys_.rhs(state.t, sys_.pack(state))
    pdot = {s: out[sys_.n + 1 + k] for k, s in enumerate(sys_.tables.active_sigmas)}
    return StateRate(out[:state.n].real, complex(out[state.n]), pdot)


# -- prolonged Hamiltonian ----------------------------------------------------


def h_sigma_map(pm: Callable[[MultiIndex], object], u_of, sigma: MultiIndex,
                hbar=1.0, masses=None, iunit=1j):
    """Closed-form prolonged Hamiltonian over an arbitrary value ring.

    ``pm`` maps a multi-index to a momentum value, ``u_of`` to a potential
    derivative.  Passing exact (e.g. sympy) values keeps the arithmetic
    exact; the only coefficients are choice counts and 1/(2 m_j).
    """
    n = sigma.n
    masses = [1.0] * n if masses is None else list(masses)
    total = u_of(sigma)
    for j in range(n):
        total = total + hbar / (2 * iunit * masses[j]) * pm(sigma.extend(j).extend(j))
    for nu, comp, count in sigma.subindices():
        for j in range(n):
            total = total + count * pm(nu.extend(j)) * pm(comp.extend(j)) / (2 * masses[j])
    return total


def h_sigma(state: JetState, pot: Potential, sigma: MultiIndex,
            physics: Physics = DEFAULT_PHYSICS, tail: Callable | None = None) -> complex:
    """Prolonged Hamiltonian at a state; missing tail momentums default to zero."""

    def pm(s: MultiIndex) -> complex:
        if s in state.p:
            return state.p[s]
        return tail(s) if tail is not None else 0j

    def u_of(s: MultiIndex) -> float:
        return pot.deriv(state.q, s, state.t)

    masses = physics.mass_array(state.n)
    return complex(h_sigma_map(pm, u_of, sigma, physics.hbar, masses))


# -- trajectory records -------------------------------------------------------


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    q: np.ndarray                       # (samples, n)
    v: np.ndarray                       # (samples, n)
    p0: np.ndarray                      # complex (samples,)
    p: dict                             # MultiIndex -> complex (samples,)
    order: int
    closure: str
    physics: Physics
    diagnostics: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.q.shape[1]

    def s(self) -> np.ndarray:
        return self.p0.real

    def r(self) -> np.ndarray:
        return -self.p0.imag / self.physics.hbar

    def momentum(self, sigma: MultiIndex) -> np.ndarray:
        try:
            return self.p[sigma]
        except KeyError:
            raise MissingMomentum(f"record does not retain p_{sigma.name()}")

    def to_csv(self, path) -> None:
        names = sorted(self.p, key=MultiIndex.sort_key)
        header = (["t"] + [f"q_{i}" for i in range(self.n)]
                  + [f"v_{i}" for i in range(self.n)] + ["S", "R"]
                  + [f"p_{s.name()}_{part}" for s in names for part in ("re", "im")])
        cols = [self.times] + [self.q[:, i] for i in range(self.n)] \
            + [self.v[:, i] for i in range(self.n)] + [self.s(), self.r()]
        for s in names:
            cols += [self.p[s].real, self.p[s].imag]
        data = np.column_stack(cols)
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in data:
                fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def integrate(initial: JetState, pot: Potential, closure=None,
              t_final: float = 1.0, dt: float | None = None, method: str = "rk45",
              physics: Physics = DEFAULT_PHYSICS, tol: float = 1e-9,
              sample_count: int = 201, record_sigmas="all",
              node_bound: float = 30.0) -> TrajectoryRecord:
    """Advance (q, p0, {p_sigma}) jointly and sample along the way.

    Raises NodeApproach when the log-amplitude exceeds ``node_bound`` in
    magnitude (trajectory near a wave-function zero) and StepFailure when
    the adaptive controller gives up.
    """
    closure = closure or ZeroClosure()
    if t_final <= initial.t:
        raise ValueError("t_final must exceed the initial time")
    sys_ = HierarchySystem(initial.n, initial.order, pot, closure, physics)
    closure.prepare(initial.t, t_final, dt)
    y0 = sys_.pack(initial)
    t_eval = np.linspace(initial.t, t_final, sample_count)

    if method == "rk4":
        if dt is None:
            raise ValueError("rk4 requires an explicit dt")
        ts, ys = _rk4_path(sys_, initial.t, y0, t_final, dt, sample_count, node_bound)
    elif method == "rk45":
        def too_deep(t, y):
            return node_bound - abs(sys_.log_amplitude(y))

        too_deep.terminal = True
        sol = solve_ivp(sys_.rhs, (initial.t, t_final), y0, method="RK45",
                        rtol=tol, atol=tol, t_eval=t_eval, events=too_deep)
        if sol.status == -1:
            raise StepFailure(sol.message)
        if sol.status == 1:
            raise NodeApproach(
                f"|R| reached {node_bound} at t={sol.t_events[0][0]:.6g}")
        ts, ys = sol.t, sol.y.T
    else:
        raise ValueError(f"unknown method {method!r}")

    return _make_record(sys_, ts, ys, record_sigmas, closure.name)


def _rk4_path(sys_: HierarchySystem, t0: float, y0: np.ndarray, t_final: float,
              dt: float, sample_count: int, node_bound: float):
    n_steps = int(round((t_final - t0) / dt))
    if abs(t0 + n_steps * dt - t_final) > 1e-9 * max(1.0, abs(t_final)):
        raise ValueError("dt must divide the integration window")
    stride = max(1, round(n_steps / max(1, sample_count - 1)))
    ts, ys = [t0], [y0.copy()]
    t, y = t0, y0.copy()
    for k in range(n_steps):
        y = _rk4_step(sys_.rhs, t, y, dt)
        t = t0 + (k + 1) * dt
        if abs(sys_.log_amplitude(y)) > node_bound:
            raise NodeApproach(f"|R| exceeded {node_bound} at t={t:.6g}")
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            ts.append(t)
            ys.append(y.copy())
    return np.array(ts), np.array(ys)


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _make_record(sys_: HierarchySystem, ts, ys, record_sigmas, closure_name):
    n = sys_.n
    masses = sys_.physics.mass_array(n)
    q = ys[:, :n].real
    pj = ys[:, n + 1 + sys_.tables.unit_idx]
    v = pj.real / masses
    if record_sigmas == "all":
        keep = list(sys_.tables.active_sigmas)
    else:
        keep = [s if isinstance(s, MultiIndex) else MultiIndex(s) for s in record_sigmas]
    p = {s: ys[:, n + 1 + sys_.tables.index[s]].copy() for s in keep}
    return TrajectoryRecord(
        times=ts, q=q, v=v, p0=ys[:, n].copy(), p=p, order=sys_.order,
        closure=closure_name, physics=sys_.physics,
        diagnostics={"nfev": sys_.nfev, "backend": kernels.BACKEND,
                     "samples": len(ts)})


# -- action integrals ---------------------------------------------------------


def action_via_quadrature(record: TrajectoryRecord, sigma: MultiIndex,
                          pot: Potential,
                          physics: Physics | None = None) -> complex:
    """Quadrature of the sector Lagrangian along the recorded trajectory.

    Must reproduce p_sigma(t_final) - p_sigma(t0) from the ODE solution; the
    record has to retain every momentum the Lagrangian touches (tail entries
    above the truncation order count as zero only under zero closure).
    """
    physics = physics or record.physics
    n = record.n
    masses = physics.mass_array(n)

    def series(s: MultiIndex) -> np.ndarray:
        if s in record.p:
            return record.p[s]
        if s.order > record.order and record.closure == "zero":
            return np.zeros_like(record.times, dtype=complex)
        raise MissingMomentum(f"p_{s.name()} not retained in the record")

    samples = len(record.times)
    u_sigma = np.array([pot.deriv(record.q[k], sigma, record.times[k])
                        for k in range(samples)])
    h = u_sigma.astype(complex)
    for j in range(n):
        h += physics.hbar / (2j * masses[j]) * series(sigma.extend(j).extend(j))
    for nu, comp, count in sigma.subindices():
        for j in range(n):
            h += count / (2 * masses[j]) * series(nu.extend(j)) * series(comp.extend(j))

    # Legendre form of the sector Lagrangian; for the empty multi-index this
    # reduces to the action rate p_j conj(p_j)/2m - U - (hbar/2im) p_jj
    lag = -h
    for j in range(n):
        lag = lag + series(sigma.extend(j)) * record.v[:, j]
    return complex(simpson(lag, x=record.times))


# -- stationary action probe --------------------------------------------------


def stationarity_probe(oracle, pot: Potential, q0, t0: float, t_final: float,
                       delta: float, physics: Physics = DEFAULT_PHYSICS,
                       n_steps: int = 1024, axis: int = 0):
    """Action difference under a one-parameter bump of the true trajectory.

    The phase-action integrand m qdot^2/2 - U + (hbar^2/2m)(R_j^2 + R_jj) is
    evaluated along the flow line through q0 and along the same curve bumped
    by delta * sin(pi (t-t0)/T) on one axis, with the amplitude derivatives
    supplied by the oracle's action-function field.  Returns
    (dI(delta), dI(delta/2)); the ratio tends to 4 as delta shrinks.
    """
    q0 = np.atleast_1d(np.asarray(q0, dtype=float))
    n = q0.size
    masses = physics.mass_array(n)
    hbar = physics.hbar
    first = [unit(n, j) for j in range(n)]
    second = [unit(n, j).extend(j) for j in range(n)]
    needed = first + second

    def field_velocity(q, t):
        mom = np.asarray(oracle.momenta(q, t, first))
        return mom.real / masses

    ts = np.linspace(t0, t_final, n_steps + 1)
    h = ts[1] - ts[0]
    path = np.empty((n_steps + 1, n))
    path[0] = q0
    for k in range(n_steps):
        path[k + 1] = _rk4_step(lambda t, q: field_velocity(q, t), ts[k], path[k], h)

    T = t_final - t0
    bump = np.zeros((n_steps + 1, n))
    bump[:, axis] = np.sin(np.pi * (ts - t0) / T)
    bump_rate = np.zeros((n_steps + 1, n))
    bump_rate[:, axis] = (np.pi / T) * np.cos(np.pi * (ts - t0) / T)
    base_rate = np.array([field_velocity(path[k], ts[k]) for k in range(n_steps + 1)])

    def action(eps: float) -> float:
        qs = path + eps * bump
        qdot = base_rate + eps * bump_rate
        integrand = np.empty(n_steps + 1)
        for k in range(n_steps + 1):
            mom = np.asarray(oracle.momenta(qs[k], ts[k], needed))
            r1 = -mom[:n].imag / hbar
            r2 = -mom[n:].imag / hbar
            integrand[k] = (0.5 * np.sum(masses * qdot[k] ** 2)
                            - pot.value(qs[k], ts[k])
                            + np.sum(hbar**2 / (2 * masses) * (r1**2 + r2)))
        return float(simpson(integrand, x=ts))

    base = action(0.0)
    return action(delta) - base, action(delta / 2) - base
