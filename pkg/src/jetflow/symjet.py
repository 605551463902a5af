"""Symbolic engine over jet coordinates.

Expressions live in the polynomial fragment the in-scope Hamiltonians need:
rational-complex constants, coordinates, momentum symbols keyed by
multi-index, and opaque potential-derivative symbols.  sympy supplies the
exact arithmetic and canonical polynomial form; total differentiation,
prolongation, and the Hamiltonian-condition checks are implemented here.

This module is the independent oracle for the closed-form prolonged
Hamiltonian in jetflow.dynamics: the same object is produced there by the
subindex sum and here by repeated total differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import sympy
from sympy import I, Rational, S

from .multiindex import AXIS_LETTERS, MultiIndex, empty, unit

#: names of the unknown functions; "pb" is the conjugate partner of "p"
FUNCTION_NAMES = ("p", "pb", "S", "R")
_CONJ_PARTNER = {"p": "pb", "pb": "p", "S": "S", "R": "R"}

t = sympy.Symbol("t")


def coordinate(i: int) -> sympy.Symbol:
    return sympy.Symbol(f"q_{AXIS_LETTERS[i]}")


def momentum(r: str, sigma: MultiIndex) -> sympy.Symbol:
    if r not in FUNCTION_NAMES:
        raise ValueError(f"unknown function name {r!r}")
    return sympy.Symbol(f"{r}_{sigma.name()}")


def potential(sigma: MultiIndex) -> sympy.Symbol:
    return sympy.Symbol("U" if sigma.order == 0 else f"U_{sigma.name()}")


def classify(sym: sympy.Symbol, n: int):
    """Recognize a symbol from its canonical name.

    Returns ('momentum', r, sigma), ('potential', sigma), ('coordinate', i),
    or None for opaque constants like a mass symbol.
    """
    name = sym.name
    if name.startswith("q_") and len(name) == 3:
        i = AXIS_LETTERS.find(name[2])
        return ("coordinate", i) if 0 <= i < n else None
    if name == "U":
        return ("potential", empty(n))
    head, _, tail = name.partition("_")
    if not tail:
        return None
    try:
        sigma = MultiIndex.from_name(tail, n)
    except ValueError:
        return None
    if head == "U":
        return ("potential", sigma)
    if head in FUNCTION_NAMES:
        return ("momentum", head, sigma)
    return None


def total_diff(expr: sympy.Expr, i: int, n: int) -> sympy.Expr:
    """Total derivative along coordinate ``i``: the explicit q-derivative plus
    chain terms through every momentum and potential symbol present."""
    out = sympy.diff(expr, coordinate(i))
    for sym in expr.free_symbols:
        kind = classify(sym, n)
        if kind is None or kind[0] == "coordinate":
            continue
        if kind[0] == "momentum":
            _, r, sigma = kind
            out += momentum(r, sigma.extend(i)) * sympy.diff(expr, sym)
        else:
            _, sigma = kind
            out += potential(sigma.extend(i)) * sympy.diff(expr, sym)
    return sympy.expand(out)


def prolong(expr: sympy.Expr, sigma: MultiIndex) -> sympy.Expr:
    """Repeated total differentiation per the counts in ``sigma``.

    The total derivatives commute, so the application order is immaterial
    (asserted as a test, not here).
    """
    out = expr
    for i, count in enumerate(sigma.counts):
        for _ in range(count):
            out = total_diff(out, i, sigma.n)
    return out


def conjugate_expr(expr: sympy.Expr, n: int) -> sympy.Expr:
    """Formal conjugation: swap p and pb symbols, conjugate constants."""
    mapping = {}
    for sym in expr.free_symbols:
        kind = classify(sym, n)
        if kind and kind[0] == "momentum":
            _, r, sigma = kind
            mapping[sym] = momentum(_CONJ_PARTNER[r], sigma)
    return sympy.expand(expr.xreplace(mapping).subs(I, -I))


@dataclass
class HC1Report:
    passed: bool
    function: str
    swept_order: int
    first_violation: tuple[MultiIndex, int, sympy.Expr] | None = None

    def __str__(self) -> str:
        if self.passed:
            return (f"HC1 holds for H^{self.function} up to swept order "
                    f"{self.swept_order}")
        nu, k, res = self.first_violation
        return (f"HC1 fails for H^{self.function} at nu={nu.name()}, "
                f"k={AXIS_LETTERS[k]}: residual {res}")


@dataclass
class HC2Report:
    passed: bool
    velocity: list[sympy.Expr] = field(default_factory=list)
    mismatch: tuple[int, int, int] | None = None  # (pair a, pair b, coordinate)

    def __str__(self) -> str:
        if self.passed:
            return f"HC2 holds, velocity {self.velocity}"
        a, b, i = self.mismatch
        return f"HC2 fails: velocities of functions {a} and {b} differ in coordinate {i}"


def check_hc1(H: sympy.Expr, r: str, max_order: int, n: int) -> HC1Report:
    """Verify D_k dH/dp^r_{nu k} = 0 for every nonempty nu with |nu k| <= max_order.

    A symbolic sweep can only cover finitely many orders; for Hamiltonians
    linear in second and higher momentums with constant coefficients a bound
    of the polynomial degree plus two suffices, and the report records the
    bound actually swept.
    """
    if max_order < 2:
        raise ValueError("max_order must be at least 2")
    for nu in sorted_orders(n, 1, max_order - 1):
        for k in range(n):
            d = sympy.diff(H, momentum(r, nu.extend(k)))
            if d == 0:
                continue
            residual = total_diff(d, k, n)
            if residual != 0:
                return HC1Report(False, r, max_order, (nu, k, residual))
    return HC1Report(True, r, max_order)


def check_hc2(hamiltonians: Sequence[tuple[sympy.Expr, str]], n: int) -> HC2Report:
    """Verify the velocity dH^r/dp^r_i is the same expression for every r.

    With a single complex Hamiltonian the conjugate system is derived
    internally and the Cauchy-Riemann form of the condition is checked:
    dH/dp_i must equal the formal conjugate of dHbar/dpb_i.
    """
    pairs = list(hamiltonians)
    if len(pairs) == 1:
        H, r = pairs[0]
        pairs.append((conjugate_expr(H, n), _CONJ_PARTNER[r]))
    velocities = []
    for H, r in pairs:
        velocities.append([sympy.expand(sympy.diff(H, momentum(r, unit(n, i))))
                           for i in range(n)])
    ref = velocities[0]
    for a, vel in enumerate(velocities[1:], start=1):
        # compare in a common symbol space: conjugate the pb-system back
        comp = [conjugate_expr(v, n) for v in vel] if pairs[a][1] == "pb" else vel
        for i in range(n):
            if sympy.expand(comp[i] - ref[i]) != 0:
                return HC2Report(False, mismatch=(0, a, i))
    return HC2Report(True, velocity=ref)


def sorted_orders(n: int, lo: int, hi: int):
    from .multiindex import iter_orders

    return list(iter_orders(n, hi, lo))


# -- built-in Hamiltonians ---------------------------------------------------

def hamiltonian_schrodinger(n: int, hbar=1, mass=1) -> sympy.Expr:
    """Complex-formulation Hamiltonian: kinetic square, potential, and the
    imaginary Laplacian term; masses may vary per coordinate."""
    masses = _mass_list(mass, n)
    H = potential(empty(n))
    for j in range(n):
        pj = momentum("p", unit(n, j))
        pjj = momentum("p", unit(n, j).extend(j))
        H += pj**2 / (2 * masses[j]) + Rational(hbar) / (2 * I * masses[j]) * pjj
    return sympy.expand(H)


def hamiltonian_sr(n: int, hbar=1, mass=1) -> tuple[sympy.Expr, sympy.Expr]:
    """Real-pair formulation: Hamiltonians for the phase action and the
    log-amplitude."""
    masses = _mass_list(mass, n)
    hb = Rational(hbar)
    HS = potential(empty(n))
    HR = S.Zero
    for j in range(n):
        Sj = momentum("S", unit(n, j))
        Sjj = momentum("S", unit(n, j).extend(j))
        Rj = momentum("R", unit(n, j))
        Rjj = momentum("R", unit(n, j).extend(j))
        HS += Sj**2 / (2 * masses[j]) - hb**2 / (2 * masses[j]) * (Rj**2 + Rjj)
        HR += (Sj * Rj + Sjj / 2) / masses[j]
    return sympy.expand(HS), sympy.expand(HR)


def _mass_list(mass, n: int) -> list:
    if isinstance(mass, (list, tuple)):
        if len(mass) != n:
            raise ValueError("need one mass per coordinate")
        return [Rational(m) for m in mass]
    return [Rational(mass)] * n


# -- plain-text serialization ------------------------------------------------

def to_prefix(expr: sympy.Expr) -> str:
    """Deterministic prefix-notation rendering for golden-file tests."""
    expr = sympy.expand(expr)
    return _prefix(expr)


def _prefix(e: sympy.Expr) -> str:
    if e.is_Symbol:
        return e.name
    if e is I:
        return "i"
    if e.is_Integer or e.is_Rational:
        return str(e)
    if e.is_Number:  # complex rational constants like 3*I/2 reach here via Mul
        return str(e)
    key = sympy.default_sort_key
    if e.is_Add:
        return "(+ " + " ".join(_prefix(a) for a in sorted(e.args, key=key)) + ")"
    if e.is_Mul:
        return "(* " + " ".join(_prefix(a) for a in sorted(e.args, key=key)) + ")"
    if e.is_Pow and e.exp.is_Integer:
        return f"(^ {_prefix(e.base)} {e.exp})"
    raise ValueError(f"expression outside the supported fragment: {e!r}")
