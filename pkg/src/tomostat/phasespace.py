"""Phase-space arithmetic for single-mode Gaussian states.

Conventions
-----------
The vacuum quadrature variance is 1.  A state is characterized by its
Wigner characteristic function ``Phi(beta) = Tr{rho D(beta)}`` with the
displacement operator ``D(beta) = exp(beta a^dag - beta^* a)``.

Writing ``beta = i b exp(i phi)`` with real ``b``, ``Phi(i b e^{i phi})``
equals the one-dimensional Fourier transform of the quadrature density at
phase ``phi``, evaluated at ``b``.  For an arbitrary argument this fixes
``b = |beta|`` and ``phi = arg(beta) - pi/2``; the sign ambiguity of ``b``
is immaterial because the Gaussian closed form below is written directly
in the components of ``z = -i beta`` (so ``Re z = b cos phi`` and
``Im z = b sin phi``) and holds for every ``beta`` without branch
bookkeeping.

For the covariance-matrix checks the quadrature components of two modes
are ordered ``(x1, p1, x2, p2)``; the single-mode symplectic block is
``J = [[0, 1], [-1, 0]]``.  This ordering is pinned by the witness
identity tested in the suite: the leading 3x3 principal minor of
``C + i Omega`` for a duplicated-block two-mode matrix equals ``-V_x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "ComplexLike",
    "GaussianStateSpec",
    "CharFn",
    "PhysicalityResult",
    "gaussian_cf",
    "eval_gaussian_cf",
    "displace_cf",
    "beamsplitter_mix_cf",
    "apply_loss_cf",
    "phase_average_cf",
    "bipartite_covariance",
    "symplectic_form",
    "physicality_check",
]

ComplexLike = complex


@dataclass(frozen=True)
class GaussianStateSpec:
    """Single-mode Gaussian state: mean amplitude and quadrature covariance.

    Parameters
    ----------
    mean : complex
        Coherent amplitude ``<a>``.  The mean quadrature at phase ``phi``
        is ``2 Re(mean e^{-i phi})``.
    v_x, v_p : float
        Quadrature variances at phases 0 and pi/2 (vacuum value 1).
    c_xp : float
        Cross covariance.  Physicality requires ``v_x v_p - c_xp^2 >= 1``.
    """

    mean: complex = 0j
    v_x: float = 1.0
    v_p: float = 1.0
    c_xp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mean", complex(self.mean))
        for name in ("v_x", "v_p", "c_xp"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (np.isfinite(self.v_x) and np.isfinite(self.v_p) and np.isfinite(self.c_xp)):
            raise ValueError("covariance entries must be finite")
        if not (np.isfinite(self.mean.real) and np.isfinite(self.mean.imag)):
            raise ValueError("mean amplitude must be finite")
        if self.v_x <= 0.0 or self.v_p <= 0.0:
            raise ValueError("quadrature variances must be positive")
        if self.v_x * self.v_p - self.c_xp ** 2 < 1.0 - 1e-12:
            raise ValueError(
                "unphysical covariance: v_x*v_p - c_xp^2 = "
                f"{self.v_x * self.v_p - self.c_xp ** 2:.6g} < 1"
            )

    def variance_at(self, phi):
        """Quadrature variance V(phi) = v_x cos^2 + v_p sin^2 + 2 c_xp sin cos."""
        c, s = np.cos(phi), np.sin(phi)
        return self.v_x * c * c + self.v_p * s * s + 2.0 * self.c_xp * s * c

    def mean_quadrature_at(self, phi):
        """Mean quadrature 2 Re(mean e^{-i phi})."""
        return 2.0 * (self.mean * np.exp(-1j * np.asarray(phi))).real

    def displaced(self, gamma: complex) -> "GaussianStateSpec":
        """State displaced by gamma (mean shifts, covariance unchanged)."""
        return GaussianStateSpec(self.mean + gamma, self.v_x, self.v_p, self.c_xp)

    def with_loss(self, eta: float) -> "GaussianStateSpec":
        """State after transmission eta: V -> eta V + (1 - eta), mean -> sqrt(eta) mean."""
        if not 0.0 < eta <= 1.0:
            raise ValueError(f"efficiency must lie in (0, 1], got {eta}")
        return GaussianStateSpec(
            np.sqrt(eta) * self.mean,
            eta * self.v_x + (1.0 - eta),
            eta * self.v_p + (1.0 - eta),
            eta * self.c_xp,
        )

    def through_beamsplitter(self, t: float, alpha: complex) -> "GaussianStateSpec":
        """Mix with a coherent beam so the output is displaced by ``t alpha``.

        Equivalent to the characteristic-function transform performed by
        :func:`beamsplitter_mix_cf`: V -> t^2 V + (1 - t^2), mean -> t (mean + alpha).
        """
        if not 0.0 < t <= 1.0:
            raise ValueError(f"transmissivity must lie in (0, 1], got {t}")
        return GaussianStateSpec(
            t * (self.mean + alpha),
            t * t * self.v_x + (1.0 - t * t),
            t * t * self.v_p + (1.0 - t * t),
            t * t * self.c_xp,
        )


@dataclass(frozen=True)
class CharFn:
    """Characteristic-function evaluator.

    ``evaluator`` must accept complex ndarray input and evaluate pointwise
    (all built-in constructors are vectorized; user-supplied callables only
    need to use numpy operations).  ``kind`` is "state" or "observable".
    States satisfy Phi(0) = 1; Hermitian operators satisfy
    Phi(-beta) = Phi(beta)^*.

    ``b_cutoff``, when set, is a radius beyond which |Phi| is negligible
    (below 1e-14 of its peak); integration routines truncate there.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    kind: str = "state"
    b_cutoff: float | None = field(default=None)

    def __post_init__(self):
        if self.kind not in ("state", "observable"):
            raise ValueError(f"kind must be 'state' or 'observable', got {self.kind!r}")

    def __call__(self, beta) -> np.ndarray:
        return self.evaluator(np.asarray(beta, dtype=complex))


def eval_gaussian_cf(state: GaussianStateSpec, beta) -> complex | np.ndarray:
    """Characteristic function of a Gaussian state.

    With ``z = -i beta`` (components ``zx = b cos phi``, ``zp = b sin phi``):

        Phi(beta) = exp(2i (Re(mean) zx + Im(mean) zp)
                        - (v_x zx^2 + v_p zp^2 + 2 c_xp zx zp) / 2)

    which restricts to ``exp(i b <x_phi> - b^2 V(phi) / 2)`` on rays
    ``beta = i b e^{i phi}``.
    """
    beta = np.asarray(beta, dtype=complex)
    z = -1j * beta
    zx, zp = z.real, z.imag
    mean = state.mean
    quad = state.v_x * zx * zx + state.v_p * zp * zp + 2.0 * state.c_xp * zx * zp
    out = np.exp(2j * (mean.real * zx + mean.imag * zp) - 0.5 * quad)
    return out if out.shape else complex(out)


def gaussian_cf(state: GaussianStateSpec) -> CharFn:
    """Wrap :func:`eval_gaussian_cf` as a state-kind :class:`CharFn`."""
    return CharFn(lambda beta: eval_gaussian_cf(state, beta), kind="state")


def displace_cf(cf: CharFn, gamma: complex) -> CharFn:
    """Characteristic function of the displaced state or operator.

    Multiplies by the pure phase ``exp(beta gamma^* - beta^* gamma)``, so
    |Phi| is preserved pointwise and any decay bound carries over.
    """
    gamma = complex(gamma)
    inner = cf.evaluator

    def evaluator(beta):
        return inner(beta) * np.exp(beta * gamma.conjugate() - beta.conjugate() * gamma)

    return CharFn(evaluator, kind=cf.kind, b_cutoff=cf.b_cutoff)


def beamsplitter_mix_cf(cf: CharFn, t: float, alpha: complex = 0j) -> CharFn:
    """Output state of a beamsplitter fed with ``cf`` and a coherent beam.

    The coherent amplitude is chosen so the output is displaced by
    ``t alpha``:

        Phi_out(beta) = Phi(t beta) exp(t alpha^* beta - t alpha beta^*)
                        exp(-(1 - t^2) |beta|^2 / 2)

    ``t = 1`` with ``alpha = 0`` is the identity; the vacuum is a fixed
    point for every ``t``.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError(f"transmissivity must lie in (0, 1], got {t}")
    t = float(t)
    alpha = complex(alpha)
    inner = cf.evaluator

    def evaluator(beta):
        phase = t * (alpha.conjugate() * beta - alpha * beta.conjugate())
        damp = -0.5 * (1.0 - t * t) * (beta * beta.conjugate()).real
        return inner(t * beta) * np.exp(phase + damp)

    return CharFn(evaluator, kind="state")


def apply_loss_cf(cf: CharFn, eta: float) -> CharFn:
    """State after transmission ``eta``; equals a beamsplitter with t = sqrt(eta)."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")
    return beamsplitter_mix_cf(cf, float(np.sqrt(eta)), 0j)


def phase_average_cf(cf: CharFn, n_angles: int = 256) -> CharFn:
    """Characteristic function of the phase-randomized state.

    Averages ``cf`` over a uniform rotation of its argument; the result is
    radial and real for Hermitian input.  The midpoint angle rule converges
    spectrally for smooth characteristic functions.
    """
    inner = cf.evaluator
    angles = (np.arange(n_angles) + 0.5) * (2.0 * np.pi / n_angles)
    ring = np.exp(1j * angles)

    def evaluator(beta):
        flat = np.abs(beta).ravel()
        vals = inner(flat[:, None] * ring[None, :]).mean(axis=1)
        return vals.reshape(beta.shape)

    return CharFn(evaluator, kind=cf.kind, b_cutoff=cf.b_cutoff)


def bipartite_covariance(v_x: float, v_p: float, c_xp: float) -> np.ndarray:
    """4x4 covariance with the single-mode block duplicated in every slot."""
    block = np.array([[v_x, c_xp], [c_xp, v_p]], dtype=float)
    if not np.all(np.isfinite(block)):
        raise ValueError("covariance entries must be finite")
    return np.tile(block, (2, 2))


def symplectic_form(n_modes: int = 2) -> np.ndarray:
    """Block-diagonal symplectic form for (x1, p1, x2, p2, ...) ordering."""
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n_modes), j)


@dataclass(frozen=True)
class PhysicalityResult:
    """Outcome of the covariance nonnegativity test ``C + i Omega >= 0``.

    ``witness`` is None for physical matrices.  For unphysical ones it is
    the leading 3x3 principal minor of ``C + i Omega`` when ``C`` has the
    duplicated-block structure (that minor is analytically ``-V_x``), and
    the most negative eigenvalue otherwise.
    """

    physical: bool
    min_eigenvalue: float
    witness: float | None = None
    witness_kind: str | None = None


def physicality_check(cov: np.ndarray, tol: float = 1e-10) -> PhysicalityResult:
    """Decide whether a two-mode covariance matrix belongs to a quantum state."""
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (4, 4):
        raise ValueError(f"expected a 4x4 covariance matrix, got shape {cov.shape}")
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise ValueError("covariance matrix must be symmetric")
    m = cov + 1j * symplectic_form(2)
    eigvals = np.linalg.eigvalsh(m)
    min_eig = float(eigvals.min())
    if min_eig >= -tol:
        return PhysicalityResult(True, min_eig)
    blocks_equal = (
        np.allclose(cov[:2, :2], cov[2:, 2:], atol=1e-12)
        and np.allclose(cov[:2, :2], cov[:2, 2:], atol=1e-12)
        and np.allclose(cov[:2, :2], cov[2:, :2], atol=1e-12)
    )
    if blocks_equal:
        minor = np.linalg.det(m[:3, :3])
        return PhysicalityResult(False, min_eig, float(minor.real), "principal_minor")
    return PhysicalityResult(False, min_eig, min_eig, "eigenvalue")
