"""Particle state in truncated infinite phase space.

A JetState is a position plus the dense map of complex momentums p_sigma for
1 <= |sigma| <= N, together with the accumulated action value p0.  The
conjugate momentums are implied (they are plain complex conjugates), and the
real pair (S_sigma, R_sigma) is a view: S = Re p, R = -Im p / hbar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NodeError
from .multiindex import MultiIndex, all_upto, unit


@dataclass(frozen=True)
class Physics:
    """Run-wide unit choices: hbar and one mass per coordinate."""

    hbar: float = 1.0
    masses: tuple[float, ...] = (1.0,)

    def mass_array(self, n: int) -> np.ndarray:
        m = np.asarray(self.masses, dtype=float)
        if m.size == 1:
            return np.full(n, m[0])
        if m.size != n:
            raise ValueError(f"{m.size} masses for {n} coordinates")
        return m


DEFAULT_PHYSICS = Physics()


class ActionPair(NamedTuple):
    s: float  # real action, units of hbar
    r: float  # log-amplitude, dimensionless


@dataclass
class JetState:
    """Position plus truncated momentum map; a point of phase space."""

    t: float
    q: np.ndarray
    p: dict[MultiIndex, complex]
    p0: complex = 0.0 + 0.0j
    order: int = field(default=0)

    def __post_init__(self):
        self.q = np.atleast_1d(np.asarray(self.q, dtype=float))
        n = self.q.size
        if self.order == 0 and self.p:
            self.order = max(s.order for s in self.p)
        expected = all_upto(n, self.order, 1)
        missing = [s for s in expected if s not in self.p]
        extra = [s for s in self.p if s not in set(expected)]
        if missing or extra:
            raise ValueError(f"momentum map must cover 1 <= |sigma| <= {self.order} "
                             f"exactly once (missing {missing}, extra {extra})")
        self.p = {s: complex(self.p[s]) for s in expected}

    @property
    def n(self) -> int:
        return self.q.size

    def copy(self) -> "JetState":
        return JetState(self.t, self.q.copy(), dict(self.p), self.p0, self.order)

    # -- views -----------------------------------------------------------

    def velocity(self, physics: Physics = DEFAULT_PHYSICS) -> np.ndarray:
        """Configuration-space velocity: Re(p_i) over the coordinate mass."""
        if self.order < 1:
            raise ValueError("velocity needs truncation order >= 1")
        masses = physics.mass_array(self.n)
        return np.array([self.p[unit(self.n, i)].real for i in range(self.n)]) / masses

    def to_sr(self, physics: Physics = DEFAULT_PHYSICS) -> dict[MultiIndex, ActionPair]:
        """Real-pair view of every momentum: (Re p, -Im p / hbar)."""
        hbar = physics.hbar
        return {s: ActionPair(v.real, -v.imag / hbar) for s, v in self.p.items()}

    def action_pair(self, physics: Physics = DEFAULT_PHYSICS) -> ActionPair:
        return ActionPair(self.p0.real, -self.p0.imag / physics.hbar)

    # -- wave-function reconstruction -------------------------------------

    def taylor_eval(self, x, physics: Physics = DEFAULT_PHYSICS):
        """Truncated-series wave function at ``x``.

        Sums p_sigma (x-q)^sigma / sigma! including the constant term and
        exponentiates.  Meaningful only near q; no convergence check is made.
        """
        x = np.asarray(x, dtype=float)
        # scalar (n=1) or an (n,)-vector is one point; otherwise a batch
        single = x.ndim == 0 if self.n == 1 else x.ndim == 1
        pts = x.reshape(-1, self.n)
        dx = pts - self.q
        expo = np.full(pts.shape[0], self.p0, dtype=complex)
        for sigma, val in self.p.items():
            mono = np.ones(pts.shape[0])
            for i, c in enumerate(sigma.counts):
                if c:
                    mono = mono * dx[:, i] ** c
            expo += val / sigma.factorial() * mono
        out = np.exp(1j / physics.hbar * expo)
        return complex(out[0]) if single else out

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "t": self.t,
            "q": self.q.tolist(),
            "order": self.order,
            "p": {s.name(): [v.real, v.imag] for s, v in self.p.items()},
            "p0": [self.p0.real, self.p0.imag],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: dict) -> "JetState":
        n = len(d["q"])
        p = {MultiIndex.from_name(name, n): complex(re, im)
             for name, (re, im) in d["p"].items()}
        return cls(t=d["t"], q=np.asarray(d["q"], dtype=float), p=p,
                   p0=complex(*d["p0"]), order=d["order"])

    @classmethod
    def from_json(cls, text: str) -> "JetState":
        return cls.from_json_dict(json.loads(text))


def from_wavefunction_analytic(psi_spec, q, t: float, order: int,
                               physics: Physics = DEFAULT_PHYSICS,
                               node_floor: float = 1e-12) -> JetState:
    """Momentum map read off a closed-form state: p_sigma = (hbar/i) d_sigma ln psi.

    ``psi_spec`` supplies exact log-derivatives (see jetflow.reference).
    Raises NodeError when |psi(q)| falls below ``node_floor`` times the
    state's peak amplitude; momentums diverge at wave-function zeros.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    amp = abs(psi_spec.value(q, t))
    if amp < node_floor * psi_spec.peak_amplitude(t):
        raise NodeError(f"|psi|={amp:.3e} below node floor at q={q}, t={t}")
    logd = psi_spec.log_derivatives(q, t, order)
    hbar_over_i = physics.hbar / 1j
    n = q.size
    p = {s: hbar_over_i * logd[s] for s in all_upto(n, order, 1)}
    from .multiindex import empty

    p0 = hbar_over_i * logd[empty(n)]
    return JetState(t=t, q=q, p=p, p0=p0, order=order)
