import csv, math, os, tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from gapstress.bounds import VerificationError, build_dual_stress, decay_ratio, dual_lower, energy_identity_check, expected_flux, flux_identity_check, m_constant, normalized_energy, primal_upper
from gapstress.kernels import KernelContext, Nucleus, gradient_mismatch, nucleus_field, singular_field
from gapstress.logs import loggers
from gapstress.pipeline.config import ConfigError, RunConfig, load_config, parse_config

logger = loggers["Pipeline"]

CSV_HEADER = ["eps", "j", "upper", "lower", "upper_scaled", "lower_scaled", "fk_constant", "asymmetry_max", "bc_residual", "div_residual", "quad_err"]


class Interval(NamedTuple):
    lower: float
    upper: float

    def scaled(self, factor):
        return Interval(factor * self.lower, factor * self.upper)


class EffectiveModuli(NamedTuple):
    E_star: Interval
    mu_star: Interval


class LeadingTerms(NamedTuple):
    E_star_leading: float
    mu_star_leading: float


def _as_interval(bounds):
    if hasattr(bounds, "lower") and hasattr(bounds, "upper"):
        return Interval(float(bounds.lower), float(bounds.upper))
    lower, upper = bounds
    lower = getattr(lower, "value", lower)
    upper = getattr(upper, "value", upper)
    return Interval(float(lower), float(upper))


def modulus_factor(geom, material, j):
    """(1+ρ)(1−2ρ)/(1−ρ) · L1/L2 for E* (j = 1), L1/L2 for μ* (j = 2)."""
    ratio = geom.L1 / geom.L2
    return material.prefactor * ratio if j == 1 else ratio


def effective_moduli(geom, material, e1_bounds, e2_bounds):
    """
    Maps bounds on ℰ1 and ℰ2 to intervals for E* and μ*.

    Args:
        e1_bounds, e2_bounds: ``(lower, upper)`` pairs of floats or BoundResults, or Intervals.
    """
    return EffectiveModuli(
        E_star=_as_interval(e1_bounds).scaled(modulus_factor(geom, material, 1)),
        mu_star=_as_interval(e2_bounds).scaled(modulus_factor(geom, material, 2)),
    )


def fk_asymptotic(geom, material):
    """
    Leading terms E·(L1/L2)·π/(√κ0·√eps) and μ·(L1/L2)·π/(√κ0·√eps).
    """
    common = (geom.L1 / geom.L2) * math.pi / (math.sqrt(geom.kappa0) * math.sqrt(geom.eps))
    return LeadingTerms(material.E * common, material.mu * common)


@dataclass(frozen=True)
class SweepRow:
    """
    One (eps, j) result; `modulus` is the E* interval for j = 1 and the μ* interval for j = 2.
    """
    eps: float
    j: int
    upper: float
    lower: float
    upper_scaled: float
    lower_scaled: float
    fk_constant: float
    asymmetry_max: float
    bc_residual: float
    div_residual: float
    quad_err: float
    modulus: Interval
    converged: bool = True
    terms: dict = field(default_factory=dict)

    @property
    def sandwiched(self):
        return self.lower - self.quad_err <= self.upper + self.quad_err

    def csv_fields(self):
        return [format_float(self.eps), str(self.j)] + [format_float(getattr(self, name)) for name in CSV_HEADER[2:]]


def format_float(value):
    return "%.17g" % value


def make_row(geom, material, upper, lower):
    root = math.sqrt(geom.eps)
    d = lower.diagnostics
    row = SweepRow(
        eps=geom.eps,
        j=upper.j,
        upper=upper.value,
        lower=lower.value,
        upper_scaled=upper.value * root,
        lower_scaled=lower.value * root,
        fk_constant=m_constant(material, geom.kappa0, upper.j),
        asymmetry_max=d.get("asymmetry_max", 0.0),
        bc_residual=d.get("bc_residual", 0.0),
        div_residual=d.get("div_residual", 0.0),
        quad_err=upper.quadrature_err + lower.quadrature_err,
        modulus=Interval(lower.value, upper.value).scaled(modulus_factor(geom, material, upper.j)),
        converged=upper.converged and lower.converged,
        terms={**{f"upper_{k}": v for k, v in upper.terms.items()}, **{f"lower_{k}": v for k, v in lower.terms.items()}},
    )
    if not row.sandwiched:
        logger.warning("Bounds cross at eps=%g j=%d: lower %.17g > upper %.17g beyond error %.3g" % (row.eps, row.j, row.lower, row.upper, row.quad_err))
    return row


def compute_row(cfg, eps, j):
    """Computes both bounds for one (eps, j) pair."""
    geom = cfg.geometry(eps)
    upper = primal_upper(geom, cfg.material, j, cfg.cell_spec)
    lower = dual_lower(geom, cfg.material, j, cfg.cell_spec, cfg.path_spec, seed=cfg.seed)
    return make_row(geom, cfg.material, upper, lower)


class Fit(NamedTuple):
    """Least-squares fit value ≈ c1/√eps + c0 of one bound series."""
    j: int
    series: str
    c1: float
    c0: float
    residual: float
    target: float

    @property
    def rel_dev(self):
        return abs(self.c1 - self.target) / self.target


def fit_series(eps, values, target=math.nan, j=0, series=""):
    """
    Ordinary least squares on the regressors (1/√eps, 1); the residual is the RMS misfit.

    Raises:
        ValueError: With fewer than two distinct gap widths.
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(np.unique(eps)) < 2:
        raise ValueError(f"A fit needs at least two distinct gap widths, got {sorted(set(eps.tolist()))}")
    design = np.column_stack([1 / np.sqrt(eps), np.ones_like(eps)])
    (c1, c0), *_ = np.linalg.lstsq(design, values, rcond=None)
    misfit = values - design @ np.array([c1, c0])
    return Fit(j, series, float(c1), float(c0), float(np.sqrt(np.mean(misfit ** 2))), float(target))


def _row_job(args):
    return compute_row(*args)


def sweep_and_fit(cfg):
    """
    Computes every (eps, j) row, eps descending then j ascending, and fits both series of
    each j.

    Returns:
        tuple: (rows, fits) with fits keyed by (j, series).
    """
    if len(set(cfg.eps_list)) < 3:
        raise ValueError(f"A sweep needs at least three distinct gap widths, got {list(cfg.eps_list)}")
    jobs = [(cfg, eps, j) for eps in cfg.eps_list for j in (1, 2)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_row_job, jobs))
    else:
        rows = [_row_job(job) for job in jobs]
    for row in rows:
        logger.info("eps=%g j=%d upper=%.10g lower=%.10g scaled=[%.6f, %.6f] target %.6f" % (row.eps, row.j, row.upper, row.lower, row.lower_scaled, row.upper_scaled, row.fk_constant))
    fits = {}
    for j in (1, 2):
        series = [row for row in rows if row.j == j]
        target = series[0].fk_constant
        for name in ("upper", "lower"):
            fits[j, name] = fit_series([r.eps for r in series], [getattr(r, name) for r in series], target, j, name)
    return rows, fits


def write_csv(rows, path):
    """
    Writes the rows with the fixed header. The file appears only once complete.
    """
    directory = os.path.dirname(os.path.abspath(path))
    handle, temp = tempfile.mkstemp(prefix=".gapstress-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(handle, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for row in rows:
                writer.writerow(row.csv_fields())
        os.replace(temp, path)
    except BaseException:
        if os.path.exists(temp):
            os.remove(temp)
        raise
    logger.info("Wrote %d rows to %s" % (len(rows), path))


def csv_text(rows):
    return "\n".join([",".join(CSV_HEADER)] + [",".join(row.csv_fields()) for row in rows]) + "\n"


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    expected: float
    tolerance: float
    passed: bool


@dataclass
class VerificationReport:
    eps: float
    checks: list = field(default_factory=list)

    def add(self, name, value, expected, tolerance):
        passed = abs(value - expected) <= tolerance
        self.checks.append(Check(name, float(value), float(expected), float(tolerance), passed))
        if not passed:
            logger.warning("%s = %.17g, expected %.17g within %.3g" % (name, value, expected, tolerance))
        return passed

    def failures(self):
        return [c for c in self.checks if not c.passed]

    @property
    def passed(self):
        return not self.failures()

    def raise_for_failures(self):
        failures = self.failures()
        if failures:
            raise VerificationError("%d verification checks failed: %s" % (len(failures), ", ".join(c.name for c in failures)))


ENERGY_REFERENCE_EPS = 1e-4


def energy_tolerance(energy_tol, eps):
    """
    Allowed deviation of the normalised energy identity at eps. The identity holds up to an
    O(√eps) correction, so energy_tol applies at eps = 1e-4 and widens as √eps above it.
    """
    return energy_tol * max(1.0, math.sqrt(eps / ENERGY_REFERENCE_EPS))


def verify_suite(cfg, eps=None, points=1000, kernel_points=1000):
    """
    Runs the identity suite at one gap width: all eight flux entries, the energy identity for
    both loadings (within energy_tolerance, and closer to 1 at eps/10), the structural
    residuals of σ_1 and σ_2, and the kernel gradient oracle.
    Reported quantities without a pass/fail meaning (asymmetry) get an infinite tolerance.
    """
    eps = cfg.first_eps() if eps is None else eps
    geom = cfg.geometry(eps)
    m = cfg.material
    report = VerificationReport(eps)
    for i in (1, 2):
        for j in (1, 2):
            for k in (1, 2):
                report.add(f"flux[i={i},j={j},k={k}]", flux_identity_check(geom, m, i, j, k, cfg.path_spec), expected_flux(i, j, k), 1e-6)
    for j in (1, 2):
        raw = energy_identity_check(geom, m, j, cfg.path_spec)
        report.add(f"energy_positive[j={j}]", float(raw > 0), 1.0, 0.0)
        coarse = normalized_energy(geom, m, j, raw)
        report.add(f"energy[j={j}]", coarse, 1.0, energy_tolerance(cfg.energy_tol, eps))
        finer = cfg.geometry(eps / 10)
        fine = normalized_energy(finer, m, j, energy_identity_check(finer, m, j, cfg.path_spec))
        report.add(f"energy_shrinks[j={j}]", max(abs(fine - 1) - abs(coarse - 1), 0.0), 0.0, 0.0)
        d = build_dual_stress(geom, m, j, cfg.path_spec).diagnostics(points=points, seed=cfg.seed)
        report.add(f"div_residual[j={j}]", d["div_residual"], 0.0, 1e-5)
        report.add(f"div_residual_c[j={j}]", d["div_residual_c"], 0.0, 1e-6)
        report.add(f"bc_residual[j={j}]", d["bc_residual"], 0.0, cfg.path_spec.rel_tol)
        report.add(f"asymmetry_max[j={j}]", d["asymmetry_max"], 0.0, math.inf)
        report.add(f"sigma_c_max[j={j}]", d["sigma_c_max"], 0.0, math.inf)
        report.add(f"decay_ratio[j={j}]", decay_ratio(geom, m, j), 0.0, math.inf)

    rng = np.random.default_rng(cfg.seed)
    ctx = KernelContext.from_geometry(geom, m)
    fields = [nucleus_field(which, m) for which in Nucleus] + [singular_field(ctx, 1), singular_field(ctx, 2)]
    worst = 0.0
    for _ in range(kernel_points):
        radius, angle = rng.uniform(0.1, 2.0), rng.uniform(0, 2 * math.pi)
        p = np.array([radius * math.cos(angle), radius * math.sin(angle)])
        worst = max(worst, max(gradient_mismatch(f, p) for f in fields[:4]))
        if min(np.hypot(p[0] - geom.p1[0], p[1]), np.hypot(p[0] - geom.p2[0], p[1])) > 1e-2:
            worst = max(worst, max(gradient_mismatch(f, p) for f in fields[4:]))
    report.add("kernel_gradient_oracle", worst, 0.0, 1e-6)
    logger.info("Verification at eps=%g: %d of %d checks passed" % (eps, len(report.checks) - len(report.failures()), len(report.checks)))
    return report
