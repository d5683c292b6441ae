"""Objective kernels for degree-corrected block models.

All kernels consume :class:`~acsbm.core.BlockStats` (never a raw graph), so
every evaluation is O(K^2).  The 0*log(0) = 0 convention applies throughout.

The full log-likelihood of a partition with block parameters Omega is

    L(Omega) = (1/2) sum_rs ( m_rs log(omega_rs) - T_rs omega_rs ),

its unconstrained maximizer is omega_rs = m_rs / T_rs, and the profile form

    P = (1/2) sum_rs m_rs log( m_rs / (kappa_r kappa_s) )

differs from L at the maximizer by the partition-independent constant
``profile_offset`` = m log(2m) - m.
"""

from __future__ import annotations

import math

import numpy as np

from .core import BlockStats

__all__ = [
    "log_likelihood",
    "omega_mle",
    "profile_log_likelihood",
    "profile_offset",
    "modularity",
]


def _as_omega(omega, k: int) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if w.shape != (k, k):
        raise ValueError(f"omega has shape {w.shape}, expected ({k}, {k})")
    if not np.allclose(w, w.T, rtol=0.0, atol=1e-12):
        raise ValueError("omega must be symmetric")
    if np.any(w < 0):
        raise ValueError("omega entries must be nonnegative")
    return w


def log_likelihood(stats: BlockStats, omega) -> float:
    """Log-likelihood (up to the Z-independent factorial terms) at Omega.

    Returns ``-inf`` when some omega_rs is zero while m_rs > 0; pairs with
    m_rs = 0 contribute only their -T_rs omega_rs penalty.
    """
    w = _as_omega(omega, stats.k)
    m = stats.m_matrix().astype(float)
    t = stats.t_block
    pos = m > 0
    if np.any(pos & (w == 0)):
        return float("-inf")
    log_part = np.zeros_like(w)
    log_part[pos] = m[pos] * np.log(w[pos])
    return 0.5 * float(np.sum(log_part) - np.sum(t * w))


def omega_mle(stats: BlockStats) -> np.ndarray:
    """Unconstrained maximum-likelihood block parameters m_rs / T_rs.

    Entries whose T_rs vanishes (a block with zero degree sum) are set to 0;
    they carry no likelihood terms.
    """
    m = stats.m_matrix().astype(float)
    t = stats.t_block
    out = np.zeros_like(m)
    np.divide(m, t, out=out, where=t > 0)
    return out


def profile_log_likelihood(stats: BlockStats) -> float:
    """Profile objective with Omega maximized out analytically.

    Differences of this value between partitions of the same graph equal the
    corresponding differences of ``log_likelihood(stats, omega_mle(stats))``.
    """
    total = 0.0
    kappa = stats.kappa
    for r, row in enumerate(stats.m_block):
        kr = kappa[r]
        for s, mrs in enumerate(row):
            if mrs > 0:
                total += mrs * math.log(mrs / (kr * kappa[s]))
    return 0.5 * total


def profile_offset(two_m: int) -> float:
    """Constant c with  log_likelihood(stats, omega_mle) = profile + c.

    Equals m log(2m) - m; it depends only on the graph, not the partition.
    """
    m = two_m / 2.0
    return m * math.log(two_m) - m


def modularity(stats: BlockStats) -> float:
    """Newman modularity Q = sum_r ( m_rr/2m - (kappa_r/2m)^2 )."""
    two_m = float(stats.two_m)
    q = 0.0
    for r in range(stats.k):
        q += stats.m_block[r][r] / two_m - (stats.kappa[r] / two_m) ** 2
    return q
