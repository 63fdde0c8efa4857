"""Observables for quasiprobability sampling.

The workhorse is the autocorrelation filter: the quartic-exponential
window ``omega(beta) = (2/pi)^(3/4) exp(-|beta|^4)`` correlated with
itself,

    Omega_w(beta) = int omega(beta') omega(beta' + beta/w) d^2 beta',

whose prefactor makes ``Omega_w(0) = 1``.  An observable built from a
radial kernel ``Omega`` and a displacement ``alpha`` has the
characteristic function

    Phi_op(beta) = pi^{-1} Omega(|beta|) exp(|beta|^2 / 2)
                   exp(alpha^* beta - alpha beta^*),

and its Fock-diagonal coefficients are

    F_n = (2/pi) int_0^inf b Omega(b) L_n(b^2) db.

The s-parameterized kernels ``exp(-(1-s) b^2 / 2)`` recover the familiar
special cases: F_n = (2/pi)(-1)^n at s = 0 and F_n = delta_n0 / pi at
s = -1.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from ._numerics import gauss_legendre, laguerre_all, periodic_angles
from .errors import DivergentKernel, QuadratureNonconvergence
from .phasespace import CharFn, displace_cf

__all__ = [
    "FILTER_WINDOW_PREFACTOR",
    "FilterSpec",
    "KernelFn",
    "OperatorSpec",
    "filter_window",
    "autocorr_filter",
    "s_kernel",
    "operator_cf",
    "radial_operator_cf",
    "fock_coefficients",
]

FILTER_WINDOW_PREFACTOR = (2.0 / np.pi) ** 0.75

KernelFn = Callable[[np.ndarray], np.ndarray]


def filter_window(beta) -> np.ndarray:
    """Window ``(2/pi)^(3/4) exp(-|beta|^4)``; radial, real, width-independent."""
    beta = np.asarray(beta, dtype=complex)
    mod2 = (beta * beta.conjugate()).real
    return FILTER_WINDOW_PREFACTOR * np.exp(-mod2 * mod2)


def _autocorrelation_values(d: np.ndarray, n_radial: int, n_angular: int,
                            r_max: float) -> np.ndarray:
    # Unit-width autocorrelation A(d) in the symmetric form
    # int omega(b - d/2) omega(b + d/2) d^2 b, so the support stays centered
    # at the origin for every displacement d.  All terms are positive, so
    # the plain sum keeps relative accuracy down to the underflow floor.
    r, wr = gauss_legendre(n_radial, 0.0, r_max)
    theta, wt = periodic_angles(n_angular, 2.0 * np.pi)
    r2 = (r * r)[None, :, None]
    rcos = r[None, :, None] * np.cos(theta)[None, None, :]
    radial_weight = (r * wr)[None, :, None] * wt
    out = np.empty_like(d)
    for lo in range(0, d.size, 128):
        dd = d[lo:lo + 128][:, None, None]
        plus = r2 + 0.25 * dd * dd + dd * rcos
        minus = r2 + 0.25 * dd * dd - dd * rcos
        vals = np.exp(-(plus * plus) - (minus * minus))
        out[lo:lo + 128] = (vals * radial_weight).sum(axis=(1, 2))
    return FILTER_WINDOW_PREFACTOR ** 2 * out


class FilterSpec:
    """Autocorrelation filter of given width, tabulated once at construction.

    The radial profile is computed on a grid of spacing ``table_step`` in the
    filter argument b (so the tabulated displacement grid has spacing
    ``table_step / w``) and interpolated with a cubic spline of the log
    profile, which keeps relative accuracy through the steep quartic tail.
    Beyond ``8 w`` the profile is below 1e-300 and treated as zero.

    ``b_cutoff`` is the radius where ``Omega_w(b) exp(b^2/2)`` has fallen
    1e-14 below its maximum; every integral against the operator built from
    this filter may be truncated there.
    """

    def __init__(self, w: float, table_step: float = 0.01, d_max: float = 8.0,
                 n_radial: int = 96, n_angular: int = 256):
        w = float(w)
        if not (np.isfinite(w) and w > 0.0):
            raise ValueError(f"filter width must be positive, got {w}")
        self.w = w
        self.d_max = float(d_max)
        d = np.arange(0.0, d_max + 0.5 * table_step / w, table_step / w)
        values = _autocorrelation_values(d, n_radial, n_angular, r_max=3.2)
        self._log_spline = CubicSpline(d, np.log(values), bc_type=((1, 0.0), (1, 0.0)))
        b_grid = d * w
        growth = values * np.exp(0.5 * b_grid * b_grid)
        peak = int(np.argmax(growth))
        below = np.nonzero((growth < 1e-14 * growth[peak]) & (np.arange(d.size) > peak))[0]
        self.b_cutoff = float(b_grid[below[0]]) if below.size else float(b_grid[-1])

    def autocorr(self, b) -> np.ndarray:
        """Omega_w at radial distance b (even in b, zero beyond 8 w)."""
        b = np.abs(np.asarray(b, dtype=float))
        d = b / self.w
        out = np.zeros_like(d)
        inside = d <= self.d_max
        out[inside] = np.exp(self._log_spline(d[inside]))
        return out

    def kernel(self) -> KernelFn:
        """The radial profile as a kernel for :func:`fock_coefficients`."""
        return self.autocorr

    @property
    def cache_key(self) -> str:
        return f"autocorr-filter w={self.w:.12g}"


def autocorr_filter(filt: FilterSpec, b) -> np.ndarray | float:
    """Evaluate the tabulated autocorrelation profile of ``filt`` at b."""
    out = filt.autocorr(b)
    return float(out) if np.isscalar(b) else out


def s_kernel(s: float, b=None):
    """Kernel ``exp(-(1-s) b^2 / 2)`` of the s-parameterized family.

    With one argument returns the kernel as a callable; with two returns
    its value at ``b``.
    """
    s = float(s)

    def kernel(bb):
        bb = np.asarray(bb, dtype=float)
        return np.exp(-0.5 * (1.0 - s) * bb * bb)

    kernel.cache_key = f"s-kernel s={s:.12g}"
    if b is None:
        return kernel
    return float(kernel(b)) if np.isscalar(b) else kernel(b)


@dataclass(frozen=True)
class OperatorSpec:
    """Observable given by a characteristic function and, optionally, its
    Fock-diagonal coefficients.

    ``radial_weight`` is the full radial factor ``pi^{-1} Omega(b) e^{b^2/2}``
    of displaced radial-kernel operators; pattern evaluation uses it for the
    reduced cosine-transform path.  ``alpha`` is the phase-space point the
    operator is displaced to.
    """

    cf: CharFn
    alpha: complex = 0j
    b_cutoff: float = field(default=np.inf)
    fock_coeffs: np.ndarray | None = None
    radial_weight: KernelFn | None = None
    key: str = "operator"

    def displaced(self, gamma: complex) -> "OperatorSpec":
        """Operator displaced by gamma (for Hermitian cores: D(g) F D(-g))."""
        gamma = complex(gamma)
        return OperatorSpec(
            cf=displace_cf(self.cf, gamma),
            alpha=self.alpha + gamma,
            b_cutoff=self.b_cutoff,
            fock_coeffs=self.fock_coeffs,
            radial_weight=self.radial_weight,
            key=f"{self.key} displaced by {gamma:.12g}",
        )

    @property
    def cache_hash(self) -> str:
        payload = f"{self.key} alpha={self.alpha:.12g}"
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def radial_operator_cf(kernel: KernelFn, alpha: complex = 0j,
                       b_cutoff: float | None = None,
                       key: str | None = None) -> OperatorSpec:
    """Observable with CF ``pi^{-1} kernel(|b|) e^{|b|^2/2} e^{a^* b - a b^*}``."""
    alpha = complex(alpha)

    def evaluator(beta):
        beta = np.asarray(beta, dtype=complex)
        mod = np.abs(beta)
        phase = alpha.conjugate() * beta - alpha * beta.conjugate()
        return kernel(mod) * np.exp(0.5 * mod * mod + phase) / np.pi

    def weight(b):
        b = np.asarray(b, dtype=float)
        return kernel(np.abs(b)) * np.exp(0.5 * b * b) / np.pi

    if b_cutoff is None:
        b_cutoff = _radial_decay_cutoff(weight)
    return OperatorSpec(
        cf=CharFn(evaluator, kind="observable", b_cutoff=b_cutoff),
        alpha=alpha,
        b_cutoff=float(b_cutoff),
        radial_weight=weight,
        key=key or getattr(kernel, "cache_key", "radial-kernel"),
    )


def operator_cf(filt: FilterSpec, alpha: complex = 0j) -> OperatorSpec:
    """The displaced filtered observable used for quasiprobability estimates."""
    return radial_operator_cf(filt.autocorr, alpha, b_cutoff=filt.b_cutoff,
                              key=filt.cache_key)


def _radial_decay_cutoff(weight: KernelFn, b_scan_max: float = 60.0,
                         rel: float = 1e-14) -> float:
    b = np.arange(0.0, b_scan_max, 0.01)
    vals = np.abs(weight(b))
    peak = int(np.argmax(vals))
    below = np.nonzero((vals < rel * vals[peak]) & (np.arange(b.size) > peak))[0]
    if not below.size:
        from .errors import NonintegrableOperator

        raise NonintegrableOperator(
            "radial weight does not decay below the truncation threshold"
        )
    return float(b[below[0]])


def fock_coefficients(kernel: KernelFn, n_max: int,
                      tol: float = 1e-10) -> np.ndarray:
    """Fock-diagonal coefficients F_n = (2/pi) int_0^inf b Omega(b) L_n(b^2) db.

    The upper limit is chosen by scanning the exact integrand envelope
    (kernel times b times the largest Laguerre magnitude), so slowly
    decaying kernels get the longer range the Laguerre growth demands.
    Kernels that never fall 14 orders below their peak are rejected.
    The integral itself is evaluated on node-doubling Gauss-Legendre grids
    until every coefficient moves less than ``tol``.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    scan = np.arange(0.0, 60.0, 0.05)
    kv = np.abs(np.asarray(kernel(scan), dtype=float))
    lag = np.abs(laguerre_all(n_max, scan * scan)).max(axis=0)
    envelope = kv * np.maximum(scan, 1e-3) * lag
    peak = int(np.argmax(envelope))
    below = np.nonzero((envelope < 1e-14 * envelope[peak]) & (np.arange(scan.size) > peak))[0]
    if not below.size:
        raise DivergentKernel(
            "kernel tail does not decay against b L_n(b^2); coefficients diverge"
        )
    b_max = float(scan[below[0]])

    previous = None
    for n_nodes in (256, 512, 1024, 2048):
        b, wb = gauss_legendre(n_nodes, 0.0, b_max)
        lag_vals = laguerre_all(n_max, b * b)
        coeffs = (2.0 / np.pi) * lag_vals @ (b * np.asarray(kernel(b), dtype=float) * wb)
        if previous is not None and np.max(np.abs(coeffs - previous)) < tol:
            return coeffs
        previous = coeffs
    raise QuadratureNonconvergence(
        f"Fock coefficients did not settle below {tol} by 2048 nodes"
    )
