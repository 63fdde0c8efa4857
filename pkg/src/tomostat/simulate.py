"""Synthetic measurement data for Gaussian states.

Quadrature sampling follows the balanced-homodyne model: phases uniform on
[0, pi), quadratures drawn from the Gaussian conditional density at the
drawn phase.  Photon-number distributions of (displaced, lossy) states are
computed by phase-space quadrature against the Fock projector profile
``exp(-|beta|^2/2) L_n(|beta|^2)``.

Random stream contract
----------------------
Sampling is deterministic, chunked, and independent of how work is
scheduled:

* samples are produced in chunks of 8192;
* chunk ``c`` draws from ``Philox(key=[seed, c])``, a counter-based
  generator, as a ``(8192, 2)`` array of doubles in [0, 1);
* sample ``j`` uses row ``j % 8192`` of chunk ``j // 8192``: column 0 is
  mapped to the phase ``phi = pi u``, column 1 (shifted by 2^-54 into
  (0, 1)) through the Gaussian inverse CDF to the quadrature;
* every chunk is generated in full, so the first N samples of a longer
  run coincide with a shorter run at the same seed.

This mapping is part of the file-format contract and is frozen by a
golden-value test; it must not change between releases.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from ._numerics import gauss_legendre, laguerre_all, periodic_angles
from .errors import QuadratureNonconvergence
from .phasespace import CharFn, GaussianStateSpec, gaussian_cf

__all__ = [
    "CHUNK",
    "ExperimentConfig",
    "QuadratureSampleSet",
    "PhotonDistribution",
    "quadrature_pdf",
    "phase_diffused_pdf",
    "sample_quadratures",
    "photon_number_distribution",
    "photon_distribution_from_cf",
    "sample_photon_counts",
]

CHUNK = 8192
_FORMAT = "%.17g"
_U64_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one simulated data-taking run.

    ``scheme`` selects the measured state: "balanced" sends the state
    directly to the homodyne detector; "cascaded" first mixes it with a
    coherent beam (transmissivity ``t``, net displacement ``t * displace``).
    Detection loss ``eta`` is applied to the state before sampling in
    either case.
    """

    state: GaussianStateSpec
    n: int
    seed: int
    eta: float = 1.0
    scheme: str = "balanced"
    t: float = 1.0
    displace: complex = 0j

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one sample")
        if not 0 <= self.seed <= _U64_MASK:
            raise ValueError("seed must fit in 64 bits")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.eta}")
        if self.scheme not in ("balanced", "cascaded"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.scheme == "cascaded" and not 0.0 < self.t <= 1.0:
            raise ValueError(f"transmissivity must lie in (0, 1], got {self.t}")

    def measured_state(self) -> GaussianStateSpec:
        """The state actually seen by the detector."""
        state = self.state
        if self.scheme == "cascaded":
            state = state.through_beamsplitter(self.t, self.displace)
        if self.eta < 1.0:
            state = state.with_loss(self.eta)
        return state


@dataclass(frozen=True)
class QuadratureSampleSet:
    """Phase-tagged quadrature records with their generating seed."""

    x: np.ndarray
    phi: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=float))
        if self.x.shape != self.phi.shape or self.x.ndim != 1:
            raise ValueError("x and phi must be matching 1-d arrays")

    @property
    def n(self) -> int:
        return self.x.size

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# tomostat-quadratures v1 seed={self.seed} N={self.n}\n")
            for xv, pv in zip(self.x, self.phi):
                fh.write((_FORMAT % xv) + "\t" + (_FORMAT % pv) + "\n")

    @classmethod
    def load(cls, path) -> "QuadratureSampleSet":
        with open(path) as fh:
            header = fh.readline().strip()
            m = re.fullmatch(r"# tomostat-quadratures v1 seed=(\d+) N=(\d+)", header)
            if not m:
                raise ValueError(f"not a v1 quadrature file: {header!r}")
            data = np.loadtxt(fh, ndmin=2)
        if data.shape != (int(m.group(2)), 2):
            raise ValueError("quadrature file payload does not match its header")
        return cls(x=data[:, 0].copy(), phi=data[:, 1].copy(), seed=int(m.group(1)))


def quadrature_pdf(state: GaussianStateSpec, x, phi):
    """Gaussian quadrature density p(x; phi) with variance V(phi)."""
    x = np.asarray(x, dtype=float)
    var = state.variance_at(phi)
    mu = state.mean_quadrature_at(phi)
    return np.exp(-0.5 * (x - mu) ** 2 / var) / np.sqrt(2.0 * np.pi * var)


def phase_diffused_pdf(state: GaussianStateSpec, x, n_phi: int = 512):
    """Quadrature density after complete phase diffusion, (1/pi) int p(x; phi) dphi."""
    x = np.asarray(x, dtype=float)
    phis, _ = periodic_angles(n_phi, np.pi)
    acc = np.zeros_like(x, dtype=float)
    for phi in phis:
        acc += quadrature_pdf(state, x, phi)
    return acc / n_phi


def _chunk_uniforms(seed: int, chunk_index: int) -> np.ndarray:
    bits = np.random.Philox(key=np.array([seed, chunk_index], dtype=np.uint64))
    return np.random.Generator(bits).random((CHUNK, 2))


def sample_quadratures(cfg: ExperimentConfig) -> QuadratureSampleSet:
    """Draw N phase-tagged quadrature samples; see the module docstring
    for the deterministic stream contract."""
    state = cfg.measured_state()
    n = cfg.n
    xs = np.empty(n)
    phis = np.empty(n)
    for chunk in range((n + CHUNK - 1) // CHUNK):
        u = _chunk_uniforms(cfg.seed, chunk)
        lo = chunk * CHUNK
        take = min(CHUNK, n - lo)
        phi = np.pi * u[:take, 0]
        gauss = ndtri(u[:take, 1] + 2.0 ** -54)
        phis[lo:lo + take] = phi
        xs[lo:lo + take] = (state.mean_quadrature_at(phi)
                            + np.sqrt(state.variance_at(phi)) * gauss)
    return QuadratureSampleSet(x=xs, phi=phis, seed=cfg.seed)


@dataclass(frozen=True)
class PhotonDistribution:
    """Truncated photon-number distribution with its unaccounted mass."""

    p: np.ndarray
    n_max: int
    truncation_mass: float = field(default=0.0)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "p", p)
        if p.shape != (self.n_max + 1,):
            raise ValueError("need one probability per photon number up to n_max")
        if np.any(p < 0.0):
            raise ValueError("probabilities must be nonnegative")
        if p.sum() > 1.0 + 1e-9:
            raise ValueError(f"probabilities sum to {p.sum():.12g} > 1")

    def save_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("n,p_n\n")
            for n, pn in enumerate(self.p):
                fh.write(f"{n},{_FORMAT % pn}\n")


def _photon_quadrature(cf_eval, n_max: int, n_radial: int, n_angular: int,
                       r_max: float) -> np.ndarray:
    r, wr = gauss_legendre(n_radial, 0.0, r_max)
    theta, wt = periodic_angles(n_angular, 2.0 * np.pi)
    beta = r[:, None] * np.exp(1j * theta)[None, :]
    ring = cf_eval(beta).sum(axis=1) * wt
    if np.max(np.abs(ring.imag)) > 1e-9 * max(1.0, np.max(np.abs(ring.real))):
        raise QuadratureNonconvergence(
            "photon distribution integrand left a complex residue; "
            "the characteristic function is not Hermitian"
        )
    weights = r * np.exp(-0.5 * r * r) * ring.real * wr
    return laguerre_all(n_max, r * r) @ weights / np.pi


def photon_distribution_from_cf(cf: CharFn, n_max: int,
                                n_radial: int | None = None,
                                n_angular: int = 64,
                                tol: float = 1e-9) -> PhotonDistribution:
    """Photon-number distribution of an arbitrary state characteristic function.

    Projects onto ``exp(-|beta|^2/2) L_n(|beta|^2)`` in polar coordinates.
    The radial range covers the Fock profile of every n up to ``n_max``;
    convergence is confirmed by re-evaluating on a finer grid.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    # envelope exp(-r^2/2) r^(2 n_max) falls below 1e-16 of its peak here
    r_grid = np.arange(1.0, 40.0, 0.05)
    envelope = -0.5 * r_grid ** 2 + 2 * max(n_max, 1) * np.log(r_grid)
    peak = int(np.argmax(envelope))
    tail = np.nonzero((envelope < envelope[peak] - 37.0)
                      & (np.arange(r_grid.size) > peak))[0]
    r_max = float(r_grid[tail[0]]) if tail.size else 40.0
    if n_radial is None:
        n_radial = 80 + 10 * n_max
    coarse = _photon_quadrature(cf, n_max, n_radial, n_angular, r_max)
    fine = _photon_quadrature(cf, n_max, 3 * n_radial // 2, 2 * n_angular, r_max)
    if np.max(np.abs(fine - coarse)) > tol:
        raise QuadratureNonconvergence(
            f"photon distribution changed by {np.max(np.abs(fine - coarse)):.3g} "
            "under grid refinement"
        )
    p = fine
    if np.any(p < 0.0):
        floor = p.min()
        if floor < -1e-10:
            raise QuadratureNonconvergence(
                f"photon probability fell to {floor:.3g}, beyond quadrature noise"
            )
        warnings.warn(
            f"clamped photon probabilities as low as {floor:.3g} to zero",
            stacklevel=2,
        )
        p = np.where(p < 0.0, 0.0, p)
    return PhotonDistribution(p=p, n_max=n_max,
                              truncation_mass=float(max(0.0, 1.0 - p.sum())))


def photon_number_distribution(state: GaussianStateSpec, alpha: complex = 0j,
                               n_max: int = 20, **kwargs) -> PhotonDistribution:
    """Photon statistics of ``state`` displaced by ``alpha``."""
    return photon_distribution_from_cf(gaussian_cf(state.displaced(alpha)),
                                       n_max, **kwargs)


def sample_photon_counts(dist: PhotonDistribution, n: int, seed: int) -> np.ndarray:
    """Draw photon counts from a truncated distribution (optional extension;
    the estimation pipeline propagates the distribution analytically).

    The truncated tail mass is reported as n_max + 1 rather than folded
    back into the listed outcomes.
    """
    probs = np.concatenate([dist.p, [dist.truncation_mass]])
    probs = probs / probs.sum()
    bits = np.random.Philox(key=np.array([seed, _U64_MASK], dtype=np.uint64))
    return np.random.Generator(bits).choice(dist.n_max + 2, size=n, p=probs)
