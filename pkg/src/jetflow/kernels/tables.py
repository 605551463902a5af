"""Precomputed index tables for the hierarchy right-hand side.

The packed momentum vector enumerates every multi-index with
1 <= |sigma| <= order + headroom in graded order; the tables flatten the
subindex double sum of the prolonged Hamiltonian into gather/multiply
arrays so both kernel backends run without touching MultiIndex objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..multiindex import MultiIndex, all_upto, unit

#: momentum orders above the truncation supplied by the closure policy
CLOSURE_HEADROOM = 2


@dataclass(frozen=True)
class HierarchyTables:
    n: int
    order: int
    sigmas: tuple[MultiIndex, ...]      # full packed enumeration
    index: dict                          # MultiIndex -> packed position
    n_active: int                        # entries with |sigma| <= order
    unit_idx: np.ndarray                 # (n,) position of e_j
    unit2_idx: np.ndarray                # (n,) position of 2 e_j
    ext1: np.ndarray                     # (n_active, n) position of sigma + e_j
    ext2: np.ndarray                     # (n_active, n) position of sigma + 2 e_j
    pair_a: np.ndarray                   # flattened product terms: first factor
    pair_b: np.ndarray                   # second factor
    pair_j: np.ndarray                   # coordinate the pair contracts over
    pair_count: np.ndarray               # choice count C_sigma^nu (float64)
    pair_row: np.ndarray                 # owning active sigma of each term

    @property
    def n_full(self) -> int:
        return len(self.sigmas)

    @property
    def tail_sigmas(self) -> tuple[MultiIndex, ...]:
        return self.sigmas[self.n_active:]

    @property
    def active_sigmas(self) -> tuple[MultiIndex, ...]:
        return self.sigmas[:self.n_active]


@lru_cache(maxsize=None)
def build_tables(n: int, order: int) -> HierarchyTables:
    if order < 1:
        raise ValueError("truncation order must be >= 1")
    sigmas = all_upto(n, order + CLOSURE_HEADROOM, 1)
    index = {s: k for k, s in enumerate(sigmas)}
    active = [s for s in sigmas if s.order <= order]
    n_active = len(active)

    unit_idx = np.array([index[unit(n, j)] for j in range(n)], dtype=np.int64)
    unit2_idx = np.array([index[unit(n, j).extend(j)] for j in range(n)],
                         dtype=np.int64)
    ext1 = np.empty((n_active, n), dtype=np.int64)
    ext2 = np.empty((n_active, n), dtype=np.int64)
    pa, pb, pj, pc, pr = [], [], [], [], []
    for row, sigma in enumerate(active):
        for j in range(n):
            ext1[row, j] = index[sigma.extend(j)]
            ext2[row, j] = index[sigma.extend(j).extend(j)]
        for nu, comp, count in sigma.subindices():
            if nu.order == 0 or comp.order == 0:
                continue  # the boundary terms form the velocity drift instead
            for j in range(n):
                pa.append(index[nu.extend(j)])
                pb.append(index[comp.extend(j)])
                pj.append(j)
                pc.append(float(count))
                pr.append(row)
    return HierarchyTables(
        n=n, order=order, sigmas=sigmas, index=index, n_active=n_active,
        unit_idx=unit_idx, unit2_idx=unit2_idx, ext1=ext1, ext2=ext2,
        pair_a=np.array(pa, dtype=np.int64), pair_b=np.array(pb, dtype=np.int64),
        pair_j=np.array(pj, dtype=np.int64), pair_count=np.array(pc, dtype=np.float64),
        pair_row=np.array(pr, dtype=np.int64),
    )


@dataclass(frozen=True)
class BoundTables:
    """Tables specialized to a mass vector and hbar (runtime coefficients)."""

    tables: HierarchyTables
    masses: np.ndarray                   # (n,)
    hbar: float
    pair_coef: np.ndarray                # C_sigma^nu / (2 m_j), float64
    lap_coef: np.ndarray                 # hbar / (2 i m_j), complex128
    inv2m: np.ndarray                    # 1 / (2 m_j)


def bind_tables(tables: HierarchyTables, masses, hbar: float) -> BoundTables:
    masses = np.asarray(masses, dtype=np.float64)
    if masses.shape != (tables.n,):
        raise ValueError("one mass per coordinate required")
    pair_coef = tables.pair_count / (2.0 * masses[tables.pair_j]) \
        if tables.pair_a.size else np.zeros(0)
    lap_coef = hbar / (2.0j * masses)
    return BoundTables(tables=tables, masses=masses, hbar=float(hbar),
                       pair_coef=pair_coef, lap_coef=lap_coef,
                       inv2m=0.5 / masses)
