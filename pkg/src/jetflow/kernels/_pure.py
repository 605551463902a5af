"""Pure-numpy hierarchy kernel; reference implementation and import fallback."""

from __future__ import annotations

import numpy as np

from .tables import BoundTables

BACKEND = "python"


def hierarchy_rhs(p_full: np.ndarray, u_act: np.ndarray, u0: float,
                  bound: BoundTables):
    """Time derivatives of the packed momentum hierarchy.

    ``p_full`` covers all multi-indices up to order + 2 (closure already
    applied to the tail); returns the velocity, the action rate, and the
    momentum rates for the active entries.
    """
    tb = bound.tables
    pj = p_full[tb.unit_idx]
    v = pj.real / bound.masses

    drift_w = (np.conj(pj) - pj) * bound.inv2m
    pdot = p_full[tb.ext1] @ drift_w
    pdot -= p_full[tb.ext2] @ bound.lap_coef
    if tb.pair_a.size:
        prod = p_full[tb.pair_a] * p_full[tb.pair_b] * bound.pair_coef
        np.add.at(pdot, tb.pair_row, -prod)
    pdot -= u_act

    p0_dot = np.sum(pj * np.conj(pj) * bound.inv2m) - u0 \
        - p_full[tb.unit2_idx] @ bound.lap_coef
    return v, p0_dot, pdot


def hierarchy_rhs_batch(p_full: np.ndarray, u_act: np.ndarray, u0: np.ndarray,
                        bound: BoundTables):
    """Batched variant: leading axis runs over independent trajectories."""
    tb = bound.tables
    pj = p_full[:, tb.unit_idx]
    v = pj.real / bound.masses

    drift_w = (np.conj(pj) - pj) * bound.inv2m          # (B, n)
    pdot = np.einsum("bsj,bj->bs", p_full[:, tb.ext1], drift_w)
    pdot -= p_full[:, tb.ext2] @ bound.lap_coef
    if tb.pair_a.size:
        prod = p_full[:, tb.pair_a] * p_full[:, tb.pair_b] * bound.pair_coef
        pair = np.zeros((p_full.shape[0], tb.n_active), dtype=complex)
        np.add.at(pair.T, tb.pair_row, prod.T)
        pdot -= pair
    pdot -= u_act

    p0_dot = np.sum(pj * np.conj(pj) * bound.inv2m, axis=1) - u0 \
        - p_full[:, tb.unit2_idx] @ bound.lap_coef
    return v, p0_dot, pdot
