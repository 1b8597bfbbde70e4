"""Named pass/fail checks comparing lab output with closed forms and reference tables."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..thresholds import ThresholdInputs, delta_bias_3d, delta_bias_asymptotic, threshold_3d_interval, unit_variance_threshold
from .experiments import ExperimentReport
from .generators import GeneratorSpec, build_structure
from .montecarlo import monte_carlo_bias_variance, variance_difference

# Reference thresholds (n = 500, unit variances), keyed by (sigma, w1, w2).
REFERENCE_THRESHOLDS = {
    (0.5, 0.2, 0.8): 0.997217,
    (1.0, 0.2, 0.8): 0.988867,
    (10.0, 0.2, 0.8): -0.113338,
    (0.5, 0.47, 0.52): 0.599198,
    (1.0, 0.47, 0.52): -0.603206,
}
THRESHOLD_TOL = 5e-7

ARM_SETS = {
    "wide": [(0.5, (0.2, 0.8)), (1.0, (0.2, 0.8)), (10.0, (0.2, 0.8))],
    "narrow": [(0.5, (0.47, 0.52)), (1.0, (0.47, 0.52)), (10.0, (0.47, 0.52))],
}
ARM_SETS["both"] = ARM_SETS["wide"] + ARM_SETS["narrow"]

# Expected theoretical aggregation (True = every rep, False = none) and
# empirical aggregation-fraction bands, keyed by (sigma, w1, w2).
EXPECTED_THEO = {
    (0.5, 0.2, 0.8): False,
    (1.0, 0.2, 0.8): False,
    (10.0, 0.2, 0.8): True,
    (0.5, 0.47, 0.52): True,
    (1.0, 0.47, 0.52): True,
    (10.0, 0.47, 0.52): True,
}
EMP_BANDS = {
    (10.0, 0.2, 0.8): (0.55, 0.80),
    (0.5, 0.47, 0.52): (0.50, 0.85),
    (1.0, 0.47, 0.52): (0.50, 0.85),
    (10.0, 0.47, 0.52): (0.50, 0.85),
}


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _key(sigma, w) -> tuple[float, float, float]:
    return (float(sigma), float(w[0]), float(w[1]))


def threshold_checks(n: int = 500) -> list[Check]:
    out = []
    for (sigma, w1, w2), expected in REFERENCE_THRESHOLDS.items():
        got = unit_variance_threshold(sigma**2, n, w1, w2)
        out.append(
            Check(
                f"threshold sigma={sigma} w=({w1},{w2})",
                abs(got - expected) <= THRESHOLD_TOL,
                f"got {got:.7f}, reference {expected:.6f}",
            )
        )
    return out


def experiment_2d_checks(report: ExperimentReport) -> list[Check]:
    out = []
    for row in report.rows:
        key = _key(row["sigma"], (row["w1"], row["w2"]))
        label = f"sigma={row['sigma']} w=({row['w1']},{row['w2']})"
        reps = row["reps"]
        if key in EXPECTED_THEO:
            want = reps if EXPECTED_THEO[key] else 0
            out.append(Check(f"aggregations(theo) {label}", row["agg_theo"] == want, f"{row['agg_theo']}/{reps}, expected {want}"))
        if key in EMP_BANDS:
            lo, hi = EMP_BANDS[key]
            frac = row["agg_emp"] / reps
            out.append(Check(f"aggregations(emp) {label}", lo <= frac <= hi, f"fraction {frac:.3f} in [{lo}, {hi}]"))
        if row["agg_theo"] == reps:
            upper_full = row["mse_full"] + row["mse_full_ci"]
            lower_aggr = row["mse_aggr"] - row["mse_aggr_ci"]
            out.append(
                Check(
                    f"mse(aggr) not worse {label}",
                    lower_aggr <= upper_full,
                    f"aggr {row['mse_aggr']:.4f}±{row['mse_aggr_ci']:.4f} vs full {row['mse_full']:.4f}±{row['mse_full_ci']:.4f}",
                )
            )
    return out


def closed_form_checks(arms, n: int = 500, reps: int = 1000, seed: int = 0, workers: int = 1, k: float = 3.0):
    """Monte Carlo bias/variance of the full and averaged bivariate models against the closed forms."""
    checks: list[Check] = []
    reports = []
    for arm, (sigma, w) in enumerate(arms):
        spec = GeneratorSpec("bivariate", n=n, sigma=sigma, weights=tuple(w), seed=seed)
        full = monte_carlo_bias_variance(spec, "full", reps, arm=arm, workers=workers)
        aggr = monte_carlo_bias_variance(spec, "aggregated-pair", reps, arm=arm, workers=workers)
        reports += [full, aggr]
        label = f"sigma={sigma} w=({w[0]},{w[1]})"
        rho = float(build_structure(spec).pop_corr[0, 1])
        target_var = sigma**2 / (n - 1)
        target_bias = delta_bias_asymptotic(w[0], w[1], 1.0, 1.0, rho)
        dv = variance_difference(full, aggr)
        checks += [
            Check(f"bias2(full)=0 {label}", full.bias2.within(0.0, k), f"{full.bias2.value:.3e} ± {full.bias2.se:.1e}"),
            Check(
                f"var(full)-var(aggr) {label}",
                dv.within(target_var, k),
                f"{dv.value:.5f} ± {dv.se:.1e} vs {target_var:.5f}",
            ),
            Check(
                f"bias2(aggr) {label}",
                aggr.bias2.within(target_bias, k),
                f"{aggr.bias2.value:.5f} ± {aggr.bias2.se:.1e} vs {target_bias:.5f}",
            ),
            Check(f"decomposition(full) {label}", full.self_check, f"gap {full.decomposition_gap:.2e}"),
            Check(f"decomposition(aggr) {label}", aggr.self_check, f"gap {aggr.decomposition_gap:.2e}"),
        ]
    return checks, reports


def interval_bruteforce_checks(trials: int = 200, grid_points: int = 399, seed: int = 0, band: float = 1e-9) -> list[Check]:
    """Interval membership against the sign of the variance/bias difference on a correlation grid."""
    rng = np.random.default_rng(seed)
    n = 500
    grid = np.linspace(-0.99, 0.99, grid_points)
    mismatches = 0
    tested = 0
    for _ in range(trials):
        a = float(rng.uniform(1e-3, 0.5))
        b = float(rng.uniform(-0.5, 0.5))
        gap = float(rng.uniform(0.1, 1.0)) * (1 if rng.random() < 0.5 else -1)
        w1 = float(rng.uniform(-1, 1))
        w2 = w1 - gap
        rho13 = float(rng.uniform(-0.5, 0.9))
        rho23 = rho13 - float(rng.uniform(0.05, 0.4))
        w3 = b * gap / (rho13 - rho23)
        sigma2 = a * (n - 1) * gap * gap
        dv = sigma2 / (n - 1)
        for rho in grid:
            inputs = ThresholdInputs(sigma2, n, w1, w2, w3=w3, rho13=rho13, rho23=rho23, correlation=float(rho))
            dec = threshold_3d_interval(inputs)
            db = delta_bias_3d(w1, w2, w3, float(rho), rho13, rho23)
            if abs(dv - db) <= band:
                continue
            tested += 1
            mismatches += dec.aggregate != (dv > db)
    out = [Check("3d interval vs brute force", mismatches == 0, f"{mismatches} mismatches over {tested} grid points")]
    # b = 0 gives the two-feature rule.
    same = True
    for _ in range(200):
        sigma2 = float(rng.uniform(0, 5))
        w1, w2 = rng.uniform(-1, 1, 2)
        for rho in grid[::20]:
            d3 = threshold_3d_interval(ThresholdInputs(sigma2, n, w1, w2, w3=0.7, rho13=0.3, rho23=0.3, correlation=float(rho)))
            thr = unit_variance_threshold(sigma2, n, w1, w2)
            same &= d3.aggregate == (rho >= thr if isinstance(thr, float) else True)
    out.append(Check("3d interval with b=0 equals 2d rule", bool(same), "200 random configurations"))
    return out


def experiment_3d_checks(report: ExperimentReport) -> list[Check]:
    row = report.rows[0]
    reps = row["reps"]
    upper_full = row["mse_full"] + row["mse_full_ci"]
    lower_aggr = row["mse_aggr"] - row["mse_aggr_ci"]
    return [
        Check(
            "3d aggregations(theo) in every rep",
            row["agg_theo"] == reps,
            f"{row['agg_theo']}/{reps}; interval [{row['theo_lower']:.6f}, {row['theo_upper']:.6f}], mean rho12 {row['rho12_hat']:.4f}",
        ),
        Check(
            "3d mse(aggr) CI overlaps mse(full)",
            lower_aggr <= upper_full,
            f"aggr {row['mse_aggr']:.4f}±{row['mse_aggr_ci']:.4f} vs full {row['mse_full']:.4f}±{row['mse_full_ci']:.4f}",
        ),
    ]


def experiment_ddim_checks(report: ExperimentReport, n_main: int = 500) -> list[Check]:
    rows = {r["n"]: r for r in report.rows}
    out = []
    if n_main in rows:
        r = rows[n_main]
        out.append(Check(f"median d_theo at n={n_main}", 2 <= r["d_theo"] <= 8, f"{r['d_theo']} in [2, 8]"))
        out.append(Check(f"median d_emp at n={n_main}", 8 <= r["d_emp"] <= 30, f"{r['d_emp']} in [8, 30]"))
        gain = r["r2_emp"] - r["r2_full"]
        out.append(Check(f"R2 gain (emp - full) at n={n_main}", gain >= 0.02, f"{r['r2_emp']:.4f} - {r['r2_full']:.4f} = {gain:.4f} >= 0.02"))
    ns = sorted(rows)
    if len(ns) > 1:
        for tag in ("d_theo", "d_emp"):
            seq = [rows[n][tag] for n in ns]
            out.append(Check(f"{tag} nondecreasing in n", all(x <= y for x, y in zip(seq, seq[1:])), f"{seq}"))
        first = rows[ns[0]]
        out.append(
            Check(
                f"reduced R2 >= full R2 at n={ns[0]}",
                first["r2_emp"] >= first["r2_full"] and first["r2_theo"] >= first["r2_full"],
                f"theo {first['r2_theo']:.4f}, emp {first['r2_emp']:.4f}, full {first['r2_full']:.4f}",
            )
        )
    return out


def coverage_checks(summary: dict) -> list[Check]:
    delta = summary["delta"]
    reps = summary["reps"]
    se = math.sqrt(delta * (1 - delta) / reps)
    floor = 1 - delta - 3 * se
    return [
        Check(
            "empirical CI threshold coverage",
            summary["implication_rate"] >= floor,
            f"implication rate {summary['implication_rate']:.4f} >= {floor:.4f}"
            f" (threshold dominance {summary['dominates_rate']:.4f}, event rate {summary['emp_event_rate']:.4f})",
        ),
        Check(
            "theoretical CI threshold above asymptotic",
            summary["theo_conservative_rate"] == 1.0,
            f"{summary['conf_theoretical_threshold']:.5f} > {summary['asymptotic_threshold']:.5f} in every run",
        ),
        Check(
            "Hoeffding covariance bounds",
            summary["hoeffding_violation_rate"] <= delta + 3 * se,
            f"violation rate {summary['hoeffding_violation_rate']:.4f} <= {delta + 3 * se:.4f}",
        ),
    ]
