"""Independent oracle: closed-form states, a grid Schrödinger solver, and
spectral extraction of momentums at a point.

The solver advances the wave function by Strang-split Fourier steps; the
extraction routine reads momentums off as derivatives of the log-wave at the
moving point, which is how trajectories can be driven from the PDE side
instead of the ODE hierarchy.
"""

from __future__ import annotations

import cmath
import json
import math
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import FreePotential, HarmonicPotential, Potential
from .errors import GridTooCoarse, NodeError
from .jetstate import DEFAULT_PHYSICS, JetState, Physics, from_wavefunction_analytic
from .multiindex import MultiIndex, all_upto, empty, unit

# -- generalized Leibniz helpers ----------------------------------------------


def exp_derivative_ratios(g: dict, max_order: int, n: int) -> dict:
    """Ratios (d_sigma e^g) / e^g from the derivatives of g.

    Uses h_{sigma i} = sum_{nu subset sigma} C_sigma^nu g_{i nu} h_{sigma-nu},
    built up by increasing order.
    """
    h = {empty(n): 1.0 + 0.0j}
    for target in all_upto(n, max_order, 1):
        i = next(ax for ax, c in enumerate(target.counts) if c)
        sigma = target - unit(n, i)
        total = 0.0 + 0.0j
        for nu, comp, count in sigma.subindices():
            gi = g.get(nu.extend(i), 0.0)
            if gi:
                total += count * gi * h[comp]
        h[target] = total
    return h


def log_derivatives_from_ratios(h: dict, max_order: int, n: int) -> dict:
    """Derivatives of ln(psi) from the ratios d_sigma psi / psi (inverse of
    exp_derivative_ratios); the empty entry is left to the caller."""
    g = {}
    for target in all_upto(n, max_order, 1):
        i = next(ax for ax, c in enumerate(target.counts) if c)
        sigma = target - unit(n, i)
        total = h[target]
        for nu, comp, count in sigma.subindices():
            if comp.order == 0:
                continue  # that term is g[target] itself
            total -= count * g[nu.extend(i)] * h[comp]
        g[target] = total
    return g


# -- closed-form states --------------------------------------------------------


class GaussianComponent:
    """Drifting, spreading free Gaussian; exact for the free Hamiltonian.

    psi(x,0) = prod_j (pi a_j^2)^{-1/4} exp(ik_j(x_j-x0_j) - (x_j-x0_j)^2/(2 a_j^2)).
    """

    def __init__(self, a=1.0, k0=0.0, x0=0.0, n: int = 1,
                 physics: Physics = DEFAULT_PHYSICS):
        self.n = n
        self.a = np.broadcast_to(np.asarray(a, float), (n,)).copy()
        self.k0 = np.broadcast_to(np.asarray(k0, float), (n,)).copy()
        self.x0 = np.broadcast_to(np.asarray(x0, float), (n,)).copy()
        self.physics = physics
        self.masses = physics.mass_array(n)

    def declared_potential(self) -> Potential:
        return FreePotential()

    def _spread(self, t: float) -> np.ndarray:
        return 1.0 + 1j * self.physics.hbar * t / (self.masses * self.a**2)

    def log_value(self, x, t: float):
        """ln psi, vectorized over points with trailing coordinate axis."""
        x = _points(x, self.n)
        hbar = self.physics.hbar
        s = self._spread(t)
        v = hbar * self.k0 / self.masses
        u = x - self.x0 - v * t
        out = np.sum(
            -0.25 * np.log(math.pi * self.a**2) - 0.5 * np.log(s)
            + 1j * self.k0 * (x - self.x0) - 1j * hbar * self.k0**2 * t / (2 * self.masses)
            - u**2 / (2 * self.a**2 * s),
            axis=-1)
        return out

    def value(self, x, t: float):
        return np.exp(self.log_value(x, t))

    def grad_log(self, x, t: float):
        x = _points(x, self.n)
        s = self._spread(t)
        v = self.physics.hbar * self.k0 / self.masses
        u = x - self.x0 - v * t
        return 1j * self.k0 - u / (self.a**2 * s)

    def peak_amplitude(self, t: float) -> float:
        s = self._spread(t)
        return float(np.exp(np.sum(-0.25 * np.log(math.pi * self.a**2)
                                   - 0.5 * np.log(np.abs(s)))))

    def log_derivatives(self, q, t: float, max_order: int) -> dict:
        q = np.atleast_1d(np.asarray(q, float))
        d = {empty(self.n): complex(self.log_value(q, t))}
        grad = self.grad_log(q, t)
        s = self._spread(t)
        for j in range(self.n):
            d[unit(self.n, j)] = complex(grad[j])
            d[unit(self.n, j).extend(j)] = complex(-1.0 / (self.a[j] ** 2 * s[j]))
        for sigma in all_upto(self.n, max_order, 1):
            d.setdefault(sigma, 0.0 + 0.0j)
        return d


class HOCoherent:
    """Coherent state of the 1D harmonic oscillator (exact evolution)."""

    def __init__(self, omega: float, alpha: complex,
                 physics: Physics = DEFAULT_PHYSICS):
        self.omega = float(omega)
        self.alpha0 = complex(alpha)
        self.physics = physics
        self.mass = physics.mass_array(1)[0]

    def declared_potential(self) -> Potential:
        return HarmonicPotential(self.omega, mass=self.mass)

    def alpha(self, t: float) -> complex:
        return self.alpha0 * cmath.exp(-1j * self.omega * t)

    def center(self, t: float) -> float:
        hbar, m, w = self.physics.hbar, self.mass, self.omega
        return math.sqrt(2 * hbar / (m * w)) * self.alpha(t).real

    def classical_momentum(self, t: float) -> float:
        hbar, m, w = self.physics.hbar, self.mass, self.omega
        return math.sqrt(2 * hbar * m * w) * self.alpha(t).imag

    def log_value(self, x, t: float):
        x = _points(x, 1)[..., 0]
        hbar, m, w = self.physics.hbar, self.mass, self.omega
        al = self.alpha(t)
        return (0.25 * math.log(m * w / (math.pi * hbar))
                - m * w * x**2 / (2 * hbar)
                + math.sqrt(2 * m * w / hbar) * al * x
                - al**2 / 2 - abs(self.alpha0) ** 2 / 2 - 1j * w * t / 2)

    def value(self, x, t: float):
        return np.exp(self.log_value(x, t))

    def grad_log(self, x, t: float):
        x = _points(x, 1)
        hbar, m, w = self.physics.hbar, self.mass, self.omega
        return -m * w * x / hbar + math.sqrt(2 * m * w / hbar) * self.alpha(t)

    def peak_amplitude(self, t: float) -> float:
        return float(abs(self.value(self.center(t), t)))

    def log_derivatives(self, q, t: float, max_order: int) -> dict:
        q = np.atleast_1d(np.asarray(q, float))
        hbar, m, w = self.physics.hbar, self.mass, self.omega
        d = {empty(1): complex(self.log_value(q, t))}
        d[MultiIndex((1,))] = complex(self.grad_log(q, t)[0])
        if max_order >= 2:
            d[MultiIndex((2,))] = complex(-m * w / hbar)
        for k in range(3, max_order + 1):
            d[MultiIndex((k,))] = 0.0 + 0.0j
        return d


class Superposition:
    """Weighted sum of Gaussian components (e.g. a two-slit state)."""

    def __init__(self, terms: Sequence[tuple[complex, GaussianComponent]]):
        self.terms = [(complex(w), c) for w, c in terms]
        self.n = self.terms[0][1].n
        self.physics = self.terms[0][1].physics
        if any(c.n != self.n for _, c in self.terms):
            raise ValueError("components must share the dimension")

    def declared_potential(self) -> Potential:
        return FreePotential()

    def value(self, x, t: float):
        return sum(w * c.value(x, t) for w, c in self.terms)

    def grad_log(self, x, t: float):
        vals = [w * c.value(x, t) for w, c in self.terms]
        total = sum(vals)
        num = sum((v[..., None] if np.ndim(v) else v) * c.grad_log(x, t)
                  for v, (_, c) in zip(vals, self.terms))
        return num / (total[..., None] if np.ndim(total) else total)

    def peak_amplitude(self, t: float) -> float:
        return sum(abs(w) * c.peak_amplitude(t) for w, c in self.terms)

    def log_derivatives(self, q, t: float, max_order: int) -> dict:
        q = np.atleast_1d(np.asarray(q, float))
        ratios = {}
        total = 0.0 + 0.0j
        for w, c in self.terms:
            g = c.log_derivatives(q, t, max_order)
            h = exp_derivative_ratios(g, max_order, self.n)
            val = w * np.exp(g[empty(self.n)])
            total += val
            for sigma, hv in h.items():
                ratios[sigma] = ratios.get(sigma, 0.0) + val * hv
        if total == 0:
            raise NodeError(f"superposition vanishes at q={q}")
        ratios = {s: v / total for s, v in ratios.items()}
        out = log_derivatives_from_ratios(ratios, max_order, self.n)
        out[empty(self.n)] = cmath.log(total)
        return out


def _points(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] != n:
        if n == 1:
            x = x[..., None]
        else:
            raise ValueError(f"points must have trailing axis of size {n}")
    return x


# -- grid states ----------------------------------------------------------------


@dataclass
class GridWave:
    """Complex wave function sampled on a uniform periodic grid."""

    lows: np.ndarray
    lengths: np.ndarray
    psi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.lows = np.atleast_1d(np.asarray(self.lows, dtype=float))
        self.lengths = np.atleast_1d(np.asarray(self.lengths, dtype=float))
        self.psi = np.asarray(self.psi, dtype=complex)
        if self.psi.ndim != self.lows.size:
            raise ValueError("grid dimension mismatch")

    @property
    def n(self) -> int:
        return self.psi.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.psi.shape

    def axes(self) -> list[np.ndarray]:
        return [self.lows[i] + self.lengths[i] * np.arange(m) / m
                for i, m in enumerate(self.shape)]

    def mesh(self) -> list[np.ndarray]:
        return list(np.meshgrid(*self.axes(), indexing="ij"))

    def cell_volume(self) -> float:
        return float(np.prod(self.lengths / np.array(self.shape)))

    def wavenumbers(self) -> list[np.ndarray]:
        return [2 * math.pi * np.fft.fftfreq(m, d=self.lengths[i] / m)
                for i, m in enumerate(self.shape)]

    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density()) * self.cell_volume())

    def copy(self) -> "GridWave":
        return GridWave(self.lows.copy(), self.lengths.copy(),
                        self.psi.copy(), self.t)

    # binary snapshot: magic, endianness tag, dims, extents, time, raw doubles
    def save(self, path) -> None:
        path = str(path)
        with open(path, "wb") as fh:
            fh.write(b"JFGW")
            fh.write(b"<")  # little-endian payload
            fh.write(struct.pack("<i", self.n))
            fh.write(struct.pack(f"<{self.n}i", *self.shape))
            fh.write(struct.pack(f"<{self.n}d", *self.lows))
            fh.write(struct.pack(f"<{self.n}d", *self.lengths))
            fh.write(struct.pack("<d", self.t))
            fh.write(self.psi.astype("<c16").tobytes())
        with open(path + ".json", "w") as fh:
            json.dump({"format": "jetflow-gridwave-v1", "dims": list(self.shape),
                       "lows": self.lows.tolist(), "lengths": self.lengths.tolist(),
                       "t": self.t}, fh, indent=1)

    @classmethod
    def load(cls, path) -> "GridWave":
        with open(str(path), "rb") as fh:
            if fh.read(4) != b"JFGW":
                raise ValueError("not a grid snapshot")
            if fh.read(1) != b"<":
                raise ValueError("unsupported endianness tag")
            n = struct.unpack("<i", fh.read(4))[0]
            shape = struct.unpack(f"<{n}i", fh.read(4 * n))
            lows = struct.unpack(f"<{n}d", fh.read(8 * n))
            lengths = struct.unpack(f"<{n}d", fh.read(8 * n))
            t = struct.unpack("<d", fh.read(8))[0]
            psi = np.frombuffer(fh.read(), dtype="<c16").reshape(shape)
        return cls(np.array(lows), np.array(lengths), psi.copy(), t)

    def density_csv(self, path, axis: int = 0) -> None:
        """|psi|^2 along one axis (other axes integrated out)."""
        dens = self.density() * self.cell_volume()
        other = tuple(i for i in range(self.n) if i != axis)
        line = dens.sum(axis=other) / (self.lengths[axis] / self.shape[axis])
        xs = self.axes()[axis]
        with open(path, "w") as fh:
            fh.write("x,density\n")
            for x, d in zip(xs, line):
                fh.write(f"{x:.17g},{d:.17g}\n")


def sample_on_grid(state, lows, lengths, shape, t: float = 0.0) -> GridWave:
    """Sample an analytic state onto a periodic grid."""
    w = GridWave(np.asarray(lows, float), np.asarray(lengths, float),
                 np.zeros(shape, dtype=complex), t)
    pts = np.stack(w.mesh(), axis=-1)
    w.psi = np.asarray(state.value(pts, t), dtype=complex)
    return w


def spectral_tail_fraction(w: GridWave, band: float = 0.9) -> float:
    """Fraction of spectral power carried by modes above ``band`` x Nyquist."""
    power = np.abs(np.fft.fftn(w.psi)) ** 2
    mask = np.zeros(w.shape, dtype=bool)
    for i, k in enumerate(w.wavenumbers()):
        sel = np.abs(k) >= band * np.max(np.abs(k))
        mask |= _axis_mask(sel, w.shape, i)
    return float(power[mask].sum() / power.sum())


def _axis_mask(sel: np.ndarray, shape, axis: int) -> np.ndarray:
    view = [1] * len(shape)
    view[axis] = shape[axis]
    return np.broadcast_to(sel.reshape(view), shape)


class SplitFourierStepper:
    """Strang splitting: half potential kick, full kinetic rotation, half kick."""

    def __init__(self, template: GridWave, pot: Potential, dt: float,
                 physics: Physics = DEFAULT_PHYSICS, tail_budget: float = 1e-10):
        self.dt = float(dt)
        self.physics = physics
        hbar = physics.hbar
        masses = physics.mass_array(template.n)
        vgrid = pot.value_on_mesh(template.mesh())
        self.expV_half = np.exp(-0.5j * self.dt * vgrid / hbar)
        k2 = 0.0
        for i, k in enumerate(template.wavenumbers()):
            k2 = k2 + _axis_mask(k**2, template.shape, i) / masses[i]
        self.expK = np.exp(-0.5j * hbar * self.dt * k2)
        self.tail_budget = tail_budget
        if spectral_tail_fraction(template) > tail_budget:
            raise GridTooCoarse(
                f"spectral tail {spectral_tail_fraction(template):.2e} exceeds "
                f"{tail_budget:.2e}; refine the grid")

    def step(self, w: GridWave, n_steps: int = 1) -> GridWave:
        psi = w.psi
        for _ in range(n_steps):
            psi = self.expV_half * psi
            psi = np.fft.ifftn(self.expK * np.fft.fftn(psi))
            psi = self.expV_half * psi
        return GridWave(w.lows, w.lengths, psi, w.t + n_steps * self.dt)


def step_splitfourier(w: GridWave, pot: Potential, dt: float,
                      physics: Physics = DEFAULT_PHYSICS) -> GridWave:
    """One Strang step (convenience wrapper; reuse the stepper in loops)."""
    return SplitFourierStepper(w, pot, dt, physics).step(w)


# -- momentum extraction (generalized Jacobi) -----------------------------------


def psi_derivatives_grid(w: GridWave, q, max_order: int) -> dict:
    """Exact derivatives of the band-limited interpolant of psi at point q."""
    q = np.atleast_1d(np.asarray(q, float))
    chat = np.fft.fftn(w.psi) / w.psi.size
    ks = w.wavenumbers()
    phases = []
    for i, k in enumerate(ks):
        phases.append(np.exp(1j * k * (q[i] - w.lows[i])))
    out = {}
    for sigma in all_upto(w.n, max_order, 0):
        weight = np.ones((), dtype=complex)
        arr = chat
        for i in range(w.n):
            wvec = phases[i] * (1j * ks[i]) ** sigma.counts[i]
            arr = np.tensordot(arr, wvec, axes=([0], [0]))
        out[sigma] = complex(arr * weight)
    return out


def jacobi_extract(source, q, order: int, physics: Physics = DEFAULT_PHYSICS,
                   node_floor: float = 1e-12, t: float | None = None,
                   return_info: bool = False):
    """Momentum map at a point, read off the reference solution.

    Analytic sources are time-parametric and take ``t`` (default 0); grid
    sources carry their own time stamp.  Grid extraction uses spectral
    differentiation combined into log-derivatives (no branch cuts: only
    ratios d_sigma psi / psi are formed).
    """
    if hasattr(source, "log_derivatives"):
        state = from_wavefunction_analytic(source, q, 0.0 if t is None else t,
                                           order, physics, node_floor)
        if return_info:
            return state, {"source": "analytic"}
        return state

    w: GridWave = source
    q = np.atleast_1d(np.asarray(q, float))
    derivs = psi_derivatives_grid(w, q, order)
    val = derivs[empty(w.n)]
    peak = float(np.max(np.abs(w.psi)))
    if abs(val) < node_floor * peak:
        raise NodeError(f"|psi|={abs(val):.3e} below node floor on grid at q={q}")
    ratios = {s: v / val for s, v in derivs.items()}
    g = log_derivatives_from_ratios(ratios, order, w.n)
    hbar_over_i = physics.hbar / 1j
    p = {s: hbar_over_i * g[s] for s in all_upto(w.n, order, 1)}
    p0 = hbar_over_i * cmath.log(val)
    state = JetState(t=w.t, q=q.copy(), p=p, p0=p0, order=order)
    if return_info:
        return state, {"source": "grid", "amplification": peak / abs(val)}
    return state


# -- momentum oracles (closure and probing) -------------------------------------


class AnalyticMomentumOracle:
    """Momentums from a closed-form state, exact at any time."""

    def __init__(self, state, physics: Physics = DEFAULT_PHYSICS,
                 node_floor: float = 1e-12):
        self.state = state
        self.physics = physics
        self.node_floor = node_floor

    def prepare(self, t0, t_final, dt):
        pass

    def momenta(self, q, t, sigmas) -> np.ndarray:
        if not sigmas:
            return np.zeros(0, dtype=complex)
        max_order = max(s.order for s in sigmas)
        amp = abs(self.state.value(np.atleast_1d(np.asarray(q, float)), t))
        if amp < self.node_floor * self.state.peak_amplitude(t):
            raise NodeError(f"oracle wave below node floor at q={q}, t={t}")
        g = self.state.log_derivatives(q, t, max_order)
        hbar_over_i = self.physics.hbar / 1j
        return np.array([hbar_over_i * g[s] for s in sigmas], dtype=complex)


class GridMomentumOracle:
    """Momentums from a grid solution advanced in lock-step.

    prepare() precomputes snapshots on the half-step lattice of the fixed-dt
    integrator; momenta() only answers at lattice times.
    """

    def __init__(self, w0: GridWave, pot: Potential,
                 physics: Physics = DEFAULT_PHYSICS, micro_dt: float = 1e-3,
                 node_floor: float = 1e-12):
        self.w0 = w0
        self.pot = pot
        self.physics = physics
        self.micro_dt = float(micro_dt)
        self.node_floor = node_floor
        self.snapshots: dict[int, GridWave] = {}
        self.lattice = 0.0

    def prepare(self, t0: float, t_final: float, dt: float | None) -> None:
        if dt is None:
            raise ValueError("grid oracle needs the fixed integrator step")
        if abs(self.w0.t - t0) > 1e-12:
            raise ValueError("grid state must start at the trajectory time")
        half = dt / 2.0
        sub = max(1, math.ceil(half / self.micro_dt - 1e-12))
        stepper = SplitFourierStepper(self.w0, self.pot, half / sub, self.physics)
        n_half = int(round((t_final - t0) / half))
        self.lattice = half
        self.snapshots = {0: self.w0}
        w = self.w0
        for k in range(1, n_half + 1):
            w = stepper.step(w, sub)
            self.snapshots[k] = w

    def wave_at(self, t: float) -> GridWave:
        k = int(round((t - self.w0.t) / self.lattice)) if self.lattice else 0
        if k not in self.snapshots or abs(self.w0.t + k * self.lattice - t) > 1e-9:
            raise ValueError(f"time {t} is off the prepared lattice")
        return self.snapshots[k]

    def momenta(self, q, t, sigmas) -> np.ndarray:
        if not sigmas:
            return np.zeros(0, dtype=complex)
        state = jacobi_extract(self.wave_at(t), q, max(s.order for s in sigmas),
                               self.physics, self.node_floor)
        return np.array([state.p[s] for s in sigmas], dtype=complex)


# -- velocity fields -------------------------------------------------------------


def bohm_velocity_field(w: GridWave, physics: Physics = DEFAULT_PHYSICS,
                        node_floor: float = 1e-10):
    """Velocity (hbar/m) Im(grad psi / psi) on the grid, node cells masked.

    Returns (v, mask) with v of shape (n, *grid); masked cells carry zero.
    """
    hat = np.fft.fftn(w.psi)
    masses = physics.mass_array(w.n)
    v = np.zeros((w.n,) + w.shape)
    abspsi = np.abs(w.psi)
    mask = abspsi < node_floor * abspsi.max()
    safe = np.where(mask, 1.0, w.psi)
    for i, k in enumerate(w.wavenumbers()):
        dpsi = np.fft.ifftn(_axis_mask(1j * k, w.shape, i) * hat)
        v[i] = physics.hbar / masses[i] * np.where(mask, 0.0, (dpsi / safe).imag)
    return v, mask


def probability_current(w: GridWave, physics: Physics = DEFAULT_PHYSICS):
    """Conserved current (hbar/m) Im(conj(psi) grad psi); finite at nodes."""
    hat = np.fft.fftn(w.psi)
    masses = physics.mass_array(w.n)
    cur = np.zeros((w.n,) + w.shape)
    for i, k in enumerate(w.wavenumbers()):
        dpsi = np.fft.ifftn(_axis_mask(1j * k, w.shape, i) * hat)
        cur[i] = physics.hbar / masses[i] * (np.conj(w.psi) * dpsi).imag
    return cur


def continuity_residual(w_prev: GridWave, w_next: GridWave,
                        physics: Physics = DEFAULT_PHYSICS):
    """Residual of d_t |psi|^2 + div(|psi|^2 v) between two snapshots.

    Centered time difference, spectral divergence of the current averaged
    over the two snapshots.  Returns (field, max_norm, l2_norm).
    """
    dt = w_next.t - w_prev.t
    if dt <= 0:
        raise ValueError("snapshots must be time-ordered")
    drho = (w_next.density() - w_prev.density()) / dt
    div = np.zeros(w_prev.shape)
    for w, weight in ((w_prev, 0.5), (w_next, 0.5)):
        cur = probability_current(w, physics)
        for i, k in enumerate(w.wavenumbers()):
            div += weight * np.fft.ifftn(
                _axis_mask(1j * k, w.shape, i) * np.fft.fftn(cur[i])).real
    res = drho + div
    l2 = float(np.sqrt(np.sum(res**2) * w_prev.cell_volume()))
    return res, float(np.max(np.abs(res))), l2


class AnalyticVelocityField:
    """Bohmian velocity from a closed-form state, vectorized over points."""

    def __init__(self, state, physics: Physics = DEFAULT_PHYSICS):
        self.state = state
        self.physics = physics
        n = getattr(state, "n", 1)
        self.masses = physics.mass_array(n)

    def velocity(self, x, t: float):
        g = self.state.grad_log(x, t)
        return self.physics.hbar / self.masses * np.imag(g)

    def amplitude(self, x, t: float):
        return np.abs(self.state.value(x, t))

    def peak_amplitude(self, t: float) -> float:
        return self.state.peak_amplitude(t)


class GridVelocityField:
    """Velocity interpolated from lock-step grid snapshots (rk4 lattice)."""

    def __init__(self, oracle: GridMomentumOracle):
        self.oracle = oracle
        self._cache: dict[int, tuple] = {}

    def prepare(self, t0, t_final, dt):
        self.oracle.prepare(t0, t_final, dt)

    def _interp(self, t: float):
        from scipy.interpolate import RegularGridInterpolator

        key = int(round((t - self.oracle.w0.t) / self.oracle.lattice)) \
            if self.oracle.lattice else 0
        if key not in self._cache:
            w = self.oracle.wave_at(t)
            v, _ = bohm_velocity_field(w, self.oracle.physics)
            axes = w.axes()
            interps = tuple(
                RegularGridInterpolator(axes, v[i], bounds_error=False,
                                        fill_value=0.0) for i in range(w.n))
            amp = RegularGridInterpolator(axes, np.abs(w.psi),
                                          bounds_error=False, fill_value=0.0)
            self._cache[key] = (interps, amp)
        return self._cache[key]

    def velocity(self, x, t: float):
        interps, _ = self._interp(t)
        pts = _points(x, self.oracle.w0.n)
        return np.stack([f(pts) for f in interps], axis=-1)

    def amplitude(self, x, t: float):
        _, amp = self._interp(t)
        return amp(_points(x, self.oracle.w0.n))

    def peak_amplitude(self, t: float) -> float:
        return float(np.abs(self.oracle.wave_at(t).psi).max())
