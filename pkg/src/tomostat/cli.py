"""Command-line front end.

Commands: ``simulate``, ``estimate``, ``theory``, ``compare`` and
``reproduce-example``.  Defaults reproduce the worked squeezed-state
comparison (V_x = 0.5, V_p = 2.0, filter width 1.8, N = 100000 samples,
photon cutoff 20).  Configuration comes from an INI-style file selected
with ``--config``; command-line flags override file values.  The
environment variable ``TOMOSTAT_THREADS`` caps grid parallelism; results
are assembled in grid order and are byte-identical for any thread count.

Exit codes: 0 success, 2 invalid configuration, 3 numerical
nonconvergence, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import (
    ConfigError,
    DivergentKernel,
    NonintegrableOperator,
    QuadratureNonconvergence,
    TomostatError,
)
from .estimators import (
    VarianceReport,
    bhd_variance,
    empirical_estimate_bhd,
    expectation_via_cf,
    qm_variance,
    unbalanced_uncertainty,
    write_variance_reports,
)
from .observables import FilterSpec, fock_coefficients, operator_cf
from .pattern import PatternFn
from .phasespace import GaussianStateSpec
from .simulate import (
    ExperimentConfig,
    QuadratureSampleSet,
    photon_number_distribution,
    sample_quadratures,
)

DEFAULT_SEED = 20260810

_SCHEMA = {
    "state": {"v_x": float, "v_p": float, "c_xp": float,
              "mean_re": float, "mean_im": float},
    "filter": {"w": float, "n_max": int},
    "run": {"n": int, "seed": int, "eta": float},
    "grid": {"alpha_min": float, "alpha_max": float, "alpha_step": float,
             "axis": str},
    "output": {"dir": str},
}


@dataclass(frozen=True)
class RunConfig:
    v_x: float = 0.5
    v_p: float = 2.0
    c_xp: float = 0.0
    mean_re: float = 0.0
    mean_im: float = 0.0
    w: float = 1.8
    n_max: int = 20
    n: int = 100000
    seed: int = DEFAULT_SEED
    eta: float = 1.0
    alpha_min: float = -3.0
    alpha_max: float = 3.0
    alpha_step: float = 0.1
    axis: str = "real"
    dir: str = "."

    def validate(self) -> "RunConfig":
        if self.n < 1:
            raise ConfigError("run.n must be at least 1")
        if not 0.0 < self.eta <= 1.0:
            raise ConfigError("run.eta must lie in (0, 1]")
        if self.w <= 0:
            raise ConfigError("filter.w must be positive")
        if self.n_max < 0:
            raise ConfigError("filter.n_max must be nonnegative")
        if self.alpha_step <= 0:
            raise ConfigError("grid.alpha_step must be positive")
        if self.alpha_max < self.alpha_min:
            raise ConfigError("grid.alpha_max must not precede grid.alpha_min")
        if self.axis not in ("real", "imag"):
            raise ConfigError("grid.axis must be 'real' or 'imag'")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("run.seed must fit in 64 bits")
        try:
            self.state()
        except ValueError as exc:
            raise ConfigError(f"state: {exc}") from exc
        return self

    def state(self) -> GaussianStateSpec:
        return GaussianStateSpec(complex(self.mean_re, self.mean_im),
                                 self.v_x, self.v_p, self.c_xp)

    def alphas(self) -> np.ndarray:
        count = int(round((self.alpha_max - self.alpha_min) / self.alpha_step)) + 1
        points = self.alpha_min + self.alpha_step * np.arange(count)
        return points * (1.0 if self.axis == "real" else 1j)


def load_config(path: str | None, overrides: dict) -> RunConfig:
    values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path!r}")
        for section in parser.sections():
            if section not in _SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in _SCHEMA[section]:
                    raise ConfigError(f"unknown config key {section}.{key}")
                try:
                    values[key] = _SCHEMA[section][key](raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values).validate()


def _thread_count() -> int:
    raw = os.environ.get("TOMOSTAT_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return max(1, os.cpu_count() or 1)


def _grid_map(fn, items):
    threads = _thread_count()
    if threads == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _phase_uniformity_pvalue(phi: np.ndarray, bins: int = 32) -> float:
    counts, _ = np.histogram(phi, bins=bins, range=(0.0, np.pi))
    return float(stats.chisquare(counts).pvalue)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_simulate(cfg: RunConfig, output: str) -> int:
    exp = ExperimentConfig(state=cfg.state(), n=cfg.n, seed=cfg.seed, eta=cfg.eta)
    samples = sample_quadratures(exp)
    samples.save(output)
    print(f"wrote {samples.n} samples to {output}")
    print(f"seed={cfg.seed} eta={cfg.eta:g} "
          f"phase-uniformity p-value={_phase_uniformity_pvalue(samples.phi):.4f}")
    return 0


def cmd_estimate(cfg: RunConfig, samples_path: str, alpha: complex) -> int:
    samples = QuadratureSampleSet.load(samples_path)
    filt = FilterSpec(cfg.w)
    pattern = PatternFn(operator_cf(filt, alpha),
                        u_max=_pattern_range(cfg, samples, alpha))
    est = empirical_estimate_bhd(samples, pattern)
    print(f"alpha={alpha:.6g}  estimate={est.mean:.6g}  std_error={est.std_error:.6g}  "
          f"N={est.n}  significance={est.significance:.3g}")
    return 0


def _pattern_range(cfg: RunConfig, samples=None, alpha=None) -> float:
    reach = 2.0 * max(abs(cfg.alpha_min), abs(cfg.alpha_max),
                      abs(alpha) if alpha is not None else 0.0)
    spread = 6.0 * np.sqrt(max(cfg.v_x, cfg.v_p))
    observed = float(np.max(np.abs(samples.x))) if samples is not None else 0.0
    return max(20.0, reach + spread, reach + observed + 1.0)


def _theory_point(state, filt, coeffs, alpha, n, with_qm=False):
    op = operator_cf(filt, alpha)
    value = expectation_via_cf(state, op)
    _, var_b = bhd_variance(state, op)
    dist = photon_number_distribution(state, -alpha, coeffs.size - 1)
    est_u = unbalanced_uncertainty(coeffs, dist, n)
    sigma_qm = est_u.std_error
    if with_qm:
        _, var_qm = qm_variance(state, op)
        sigma_qm = float(np.sqrt(var_qm / n))
    return VarianceReport(alpha=complex(alpha), value=value,
                          sigma_qm=sigma_qm,
                          sigma_bhd=float(np.sqrt(var_b / n)),
                          sigma_unbalanced=est_u.std_error, n=n)


def cmd_theory(cfg: RunConfig, alpha: complex, with_qm: bool) -> int:
    filt = FilterSpec(cfg.w)
    coeffs = fock_coefficients(filt.kernel(), cfg.n_max)
    row = _theory_point(cfg.state().with_loss(cfg.eta), filt, coeffs, alpha,
                        cfg.n, with_qm)
    print(f"alpha={alpha:.6g}  P={row.value:.6g}")
    print(f"sigma_balanced={row.sigma_bhd:.6g}  sigma_unbalanced={row.sigma_unbalanced:.6g}  "
          f"sigma_qm={row.sigma_qm:.6g}  N={row.n}")
    return 0


def cmd_compare(cfg: RunConfig, output: str) -> int:
    filt = FilterSpec(cfg.w)
    coeffs = fock_coefficients(filt.kernel(), cfg.n_max)
    state = cfg.state().with_loss(cfg.eta)
    rows = _grid_map(lambda a: _theory_point(state, filt, coeffs, a, cfg.n),
                     cfg.alphas())
    write_variance_reports(rows, output)
    print(f"wrote {len(rows)} rows to {output}")
    return 0


_GNUPLOT = """set datafile separator ','
set key autotitle columnhead
set xlabel 'alpha'
plot 'fig5_comparison.csv' using 1:3 with lines title 'P', \\
     '' using 1:($3-$5):($3+$5) with filledcurves fs transparent solid 0.2 title 'balanced band', \\
     '' using 1:($3-$6):($3+$6) with filledcurves fs transparent solid 0.4 title 'unbalanced band'
"""


def cmd_reproduce_example(cfg: RunConfig, out_dir: str) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    filt = FilterSpec(cfg.w)
    coeffs = fock_coefficients(filt.kernel(), cfg.n_max)
    state = cfg.state().with_loss(cfg.eta)
    rows = _grid_map(lambda a: _theory_point(state, filt, coeffs, a, cfg.n),
                     cfg.alphas())

    grid = np.array([r.alpha.real if cfg.axis == "real" else r.alpha.imag
                     for r in rows])
    def dump(name, header, columns):
        with open(out / name, "w") as fh:
            fh.write(header + "\n")
            for parts in zip(*columns):
                fh.write(",".join("%.12g" % v for v in parts) + "\n")

    dump("fig2_quasiprobability.csv", "alpha,P",
         (grid, [r.value for r in rows]))
    dump("fig3_sigma_balanced.csv", "alpha,sigma_b",
         (grid, [r.sigma_bhd for r in rows]))
    dump("fig4_sigma_unbalanced.csv", "alpha,sigma_u",
         (grid, [r.sigma_unbalanced for r in rows]))
    dump("fig5_comparison.csv", "alpha,alpha_im,P,sigma_qm,sigma_b,sigma_u",
         (grid, [r.alpha.imag for r in rows], [r.value for r in rows],
          [r.sigma_qm for r in rows], [r.sigma_bhd for r in rows],
          [r.sigma_unbalanced for r in rows]))
    (out / "plots.gp").write_text(_GNUPLOT)

    # Monte Carlo cross-check at the most negative grid point
    best = min(rows, key=lambda r: r.value)
    exp = ExperimentConfig(state=cfg.state(), n=cfg.n, seed=cfg.seed, eta=cfg.eta)
    samples = sample_quadratures(exp)
    samples.save(out / "quadratures.dat")
    pattern = PatternFn(operator_cf(filt, best.alpha),
                        u_max=_pattern_range(cfg, samples))
    emp = empirical_estimate_bhd(samples, pattern)

    checks = [
        ("P at minimum within 0.02 of -0.31", abs(best.value + 0.31) <= 0.02),
        ("minimum located at alpha = 0.6 +/- 0.05",
         abs(abs(best.alpha) - 0.6) <= 0.05 + 1e-9),
        ("sigma_unbalanced within 10% of 0.010",
         abs(best.sigma_unbalanced - 0.010) <= 0.10 * 0.010),
        ("unbalanced significance within 15% of 31",
         abs(abs(best.value) / best.sigma_unbalanced - 31.0) <= 0.15 * 31.0),
        ("sigma_balanced within 10% of 0.191",
         abs(best.sigma_bhd - 0.191) <= 0.10 * 0.191),
        ("balanced significance within 15% of 1.6",
         abs(abs(best.value) / best.sigma_bhd - 1.6) <= 0.15 * 1.6),
        ("balanced/unbalanced ratio exceeds 3 on the whole grid",
         min(r.sigma_bhd / r.sigma_unbalanced for r in rows) > 3.0),
        ("empirical mean within 3 standard errors of the minimum",
         abs(emp.mean - best.value) <= 3.0 * emp.std_error),
        ("empirical per-sample variance within 5% of the integral",
         abs(emp.per_sample_variance / (best.sigma_bhd ** 2 * cfg.n) - 1.0) <= 0.05),
    ]

    lines = [
        f"grid: {cfg.axis} axis, [{cfg.alpha_min:g}, {cfg.alpha_max:g}] "
        f"step {cfg.alpha_step:g}; N={cfg.n}; seed={cfg.seed}; eta={cfg.eta:g}",
        f"minimum: P({best.alpha:.6g}) = {best.value:.6g}",
        f"sigma_balanced = {best.sigma_bhd:.6g}"
        f" (significance {abs(best.value) / best.sigma_bhd:.3g})",
        f"sigma_unbalanced = {best.sigma_unbalanced:.6g}"
        f" (significance {abs(best.value) / best.sigma_unbalanced:.3g})",
        f"empirical estimate = {emp.mean:.6g} +/- {emp.std_error:.6g}",
        "",
    ]
    lines += [f"[{'PASS' if ok else 'FAIL'}] {label}" for label, ok in checks]
    report = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(report)
    print(report, end="")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI-style config file; flags override it")
    parser.add_argument("--vx", type=float, dest="v_x", help="state.v_x: quadrature variance at phase 0")
    parser.add_argument("--vp", type=float, dest="v_p", help="state.v_p: quadrature variance at phase pi/2")
    parser.add_argument("--cxp", type=float, dest="c_xp", help="state.c_xp: cross covariance")
    parser.add_argument("--mean-re", type=float, dest="mean_re", help="state.mean_re: coherent amplitude, real part")
    parser.add_argument("--mean-im", type=float, dest="mean_im", help="state.mean_im: coherent amplitude, imaginary part")
    parser.add_argument("--w", type=float, help="filter.w: filter width")
    parser.add_argument("--n-max", type=int, dest="n_max", help="filter.n_max: photon-number cutoff")
    parser.add_argument("--n", type=int, help="run.n: number of samples")
    parser.add_argument("--seed", type=int, help="run.seed: 64-bit random seed")
    parser.add_argument("--eta", type=float, help="run.eta: detection efficiency in (0, 1]")
    parser.add_argument("--alpha-min", type=float, dest="alpha_min", help="grid.alpha_min")
    parser.add_argument("--alpha-max", type=float, dest="alpha_max", help="grid.alpha_max")
    parser.add_argument("--alpha-step", type=float, dest="alpha_step", help="grid.alpha_step")
    parser.add_argument("--axis", choices=("real", "imag"), help="grid.axis: displacement axis")
    parser.add_argument("--out-dir", dest="dir", help="output.dir: output directory")


_OVERRIDE_KEYS = ("v_x", "v_p", "c_xp", "mean_re", "mean_im", "w", "n_max",
                  "n", "seed", "eta", "alpha_min", "alpha_max", "alpha_step",
                  "axis", "dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tomostat",
        description="Quasiprobability estimates and their uncertainties for "
                    "balanced and unbalanced homodyne tomography.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a quadrature sample file")
    _add_common(p)
    p.add_argument("--output", default="quadratures.dat", help="sample file path")

    p = sub.add_parser("estimate", help="sampling estimate from a quadrature file")
    _add_common(p)
    p.add_argument("--samples", required=True, help="quadrature file to read")
    p.add_argument("--alpha", type=float, default=0.6, help="phase-space point")

    p = sub.add_parser("theory", help="theory uncertainties at one point")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=0.6, help="phase-space point")
    p.add_argument("--with-qm", action="store_true",
                   help="also run the quadruple-integral quantum variance")

    p = sub.add_parser("compare", help="scheme comparison over the grid, as CSV")
    _add_common(p)
    p.add_argument("--output", default="compare.csv", help="CSV path")

    p = sub.add_parser("reproduce-example",
                       help="full worked example: figures data plus report")
    _add_common(p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {k: getattr(args, k, None) for k in _OVERRIDE_KEYS}
        cfg = load_config(args.config, overrides)
        axis_unit = 1j if cfg.axis == "imag" else 1.0
        if args.command == "simulate":
            return cmd_simulate(cfg, args.output)
        if args.command == "estimate":
            return cmd_estimate(cfg, args.samples, args.alpha * axis_unit)
        if args.command == "theory":
            return cmd_theory(cfg, args.alpha * axis_unit, args.with_qm)
        if args.command == "compare":
            return cmd_compare(cfg, args.output)
        if args.command == "reproduce-example":
            return cmd_reproduce_example(cfg, cfg.dir)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureNonconvergence, DivergentKernel, NonintegrableOperator) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 4
    except TomostatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
