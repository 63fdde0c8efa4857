"""Shared quadrature grids and the Laguerre recurrence."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=128)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_legendre(n: int, a: float, b: float):
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return half * (x + 1.0) + a, half * w


def symmetric_gauss_legendre(n_half: int, b_max: float):
    """Nodes/weights on [-b_max, b_max], split at 0.

    The split keeps integrands containing |b| smooth on each half, which
    restores superalgebraic Gauss-Legendre convergence.
    """
    bp, wp = gauss_legendre(n_half, 0.0, b_max)
    return np.concatenate([-bp[::-1], bp]), np.concatenate([wp[::-1], wp])


def panel_gauss_legendre(a: float, b: float, max_width: float, nodes_per_panel: int = 10):
    """Composite Gauss-Legendre grid with panels no wider than max_width."""
    n_panels = max(1, int(np.ceil((b - a) / max_width)))
    edges = np.linspace(a, b, n_panels + 1)
    x0, w0 = _leggauss(nodes_per_panel)
    half = 0.5 * (edges[1] - edges[0])
    centers = 0.5 * (edges[:-1] + edges[1:])
    nodes = (centers[:, None] + half * x0[None, :]).ravel()
    weights = np.broadcast_to(half * w0, (n_panels, nodes_per_panel)).copy().ravel()
    return nodes, weights


def periodic_angles(n: int, period: float):
    """Midpoint grid over one period with uniform weights.

    For smooth periodic integrands the midpoint rule converges spectrally,
    so this is the grid of choice for all angle integrals.
    """
    return (np.arange(n) + 0.5) * (period / n), period / n


def laguerre_all(n_max: int, x: np.ndarray) -> np.ndarray:
    """L_0(x) .. L_{n_max}(x) by the three-term recurrence.

    Stable for x >= 0; returns shape (n_max + 1,) + x.shape.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = np.ones_like(x)
    if n_max >= 1:
        out[1] = 1.0 - x
    for k in range(1, n_max):
        out[k + 1] = ((2.0 * k + 1.0 - x) * out[k] - k * out[k - 1]) / (k + 1.0)
    return out
