"""
Oracle self-test: synthesize a market, analyse it through the CSV path and
check the estimator against the planted ground truth.

``quick`` runs T=2000 with 200 bootstrap replicates; ``full`` runs T=10^4
with 1000. Moment and rescaling tolerances are the acceptance tolerances,
widened by sqrt(T_ref / T) where they are stated for a larger sample.

The vanishing check pools the five null-band coverages. For one run the
fraction of lags inside pointwise 95% bands swings widely when the other
series is persistent; over many healthy runs it averages ~0.94 per curve, so
the pooled floor of 0.75 only trips on genuine dependence.
"""

from __future__ import annotations

import filecmp
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from . import diagnostics as diag
from .corr import cross_correlation, cross_correlation_reference
from .errors import StatisticalError
from .index import SQRT3, build_index_series
from .report import VANISHING, AnalysisConfig, analyze_file, write_report
from .synth import SynthConfig, gen_market, oracle_compare, write_synth

PUBLISHED_SIGMA_MEAN = 0.008388
PUBLISHED_SIGMA_MEAN_SQ = 0.00008583
PUBLISHED_K = 1 / 2.85

MODES = {
    "quick": dict(n_days=2000, n_boot=200, persist_lags=20),
    "full": dict(n_days=10000, n_boot=1000, persist_lags=50),
}


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _k_checks():
    m = diag.MomentSummary(
        PUBLISHED_SIGMA_MEAN,
        PUBLISHED_SIGMA_MEAN_SQ,
        PUBLISHED_SIGMA_MEAN,
        PUBLISHED_SIGMA_MEAN_SQ - PUBLISHED_SIGMA_MEAN**2,
        10000,
    )
    try:
        k = diag.compute_k(m)
    except Exception as exc:  # a broken k formula must fail the check, not crash
        return [Check("k from published moments", False, f"raised {exc!r}")]
    rel = abs(k - PUBLISHED_K) / PUBLISHED_K
    return [
        Check("k in (0, 1)", 0 < k < 1, f"k={k:.6f}"),
        Check("k from published moments", rel <= 0.005, f"k={k:.6f} vs 1/2.85, rel err {rel:.2e}"),
    ]


def run_selftest(mode="quick", seed=20240101, workdir=None):
    """Run every check and return the list of :class:`Check` results."""
    opts = MODES[mode]
    checks = _k_checks()

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(20, 300))
        x = rng.standard_normal(n)
        y = np.abs(x) + rng.standard_normal(n)
        mask = rng.random(n) > 0.1
        fast = cross_correlation(x, y, mask, n // 3).values
        ref = np.asarray(cross_correlation_reference(x, y, mask, n // 3))
        worst = max(worst, float(np.max(np.abs(fast - ref))))
    checks.append(Check("fast estimator == double loop", worst <= 1e-10, f"max diff {worst:.1e}"))

    try:
        checks.extend(_pipeline_checks(opts, seed, workdir))
    except (StatisticalError, ValueError) as exc:  # a broken stage fails the test, not the tool
        checks.append(Check("synthetic pipeline runs", False, f"raised {exc!r}"))
    return checks


def _pipeline_checks(opts, seed, workdir):
    T = opts["n_days"]
    checks = []
    cfg = SynthConfig(n_days=T, seed=seed)
    synth = gen_market(cfg)
    acfg = AnalysisConfig(n_boot=opts["n_boot"], seed=seed)

    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        d1, d2 = os.path.join(tmp, "s1"), os.path.join(tmp, "s2")
        p1, _ = write_synth(synth, d1)
        write_synth(gen_market(cfg), d2)
        same = all(filecmp.cmp(os.path.join(d1, f), os.path.join(d2, f), shallow=False)
                   for f in ("prices.csv", "sigma_true.csv"))
        checks.append(Check("synth output deterministic", same, "two runs, byte compare"))

        report = analyze_file(p1, acfg)
        o1, o2 = os.path.join(tmp, "a1"), os.path.join(tmp, "a2")
        write_report(report, o1)
        write_report(analyze_file(p1, acfg), o2)
        same = all(filecmp.cmp(os.path.join(o1, f), os.path.join(o2, f), shallow=False)
                   for f in os.listdir(o1))
        checks.append(Check("analysis output deterministic", same, "two runs, byte compare"))

    k_direct = diag.compute_k(report.moments["sigma"])
    checks.append(Check("report k == compute_k(moments)", report.k == k_direct, f"k={report.k:.6f}"))

    ix = build_index_series(synth.returns)
    v = ix.valid
    ident = float(np.max(np.abs(ix.r[v] - ix.sigma[v] * ix.omega[v])))
    bound = float(np.max(np.abs(ix.omega[v])))
    sq = abs(float(np.mean(ix.r[v] ** 2) - np.mean(ix.sigma[v] ** 2 * ix.omega[v] ** 2)))
    checks.append(Check("r = sigma * omega", ident <= 1e-12, f"max err {ident:.1e}"))
    checks.append(Check("|omega| <= sqrt(3)", bound <= SQRT3 + 1e-12, f"max |omega| {bound:.6f}"))
    checks.append(Check("<r^2> = <sigma^2 omega^2>", sq <= 1e-12, f"diff {sq:.1e}"))
    rec = float(np.max(np.abs(ix.omega - synth.omega_market)))
    checks.append(Check("omega recovers planted market residual", rec <= 1e-9, f"max err {rec:.1e}"))

    u = report.uniformity
    scale = np.sqrt(10000 / T)
    checks.append(Check("KS below MC 99% null", u.passes, f"D={u.ks_statistic:.4f} thr={u.ks_threshold:.4f}"))
    e_abs = abs(u.mean_abs_omega - SQRT3 / 2) / (SQRT3 / 2)
    e_sq = abs(u.mean_sq_omega - 1.0)
    checks.append(Check("<|omega|> ~ sqrt(3)/2", e_abs <= 0.02 * scale, f"{u.mean_abs_omega:.4f} (rel {e_abs:.3f})"))
    checks.append(Check("<omega^2> ~ 1", e_sq <= 0.03 * scale, f"{u.mean_sq_omega:.4f}"))

    fracs = [report.vanishing_fraction(label) for label in VANISHING]
    mean_frac = float(np.mean(fracs))
    checks.append(Check(
        "cross-correlations vanish (mean coverage of null bands)",
        mean_frac >= 0.75,
        ", ".join(f"{lab}={f:.2f}" for lab, f in zip(VANISHING, fracs)),
    ))

    css = report.curves["sigma,sigma"]
    L = opts["persist_lags"]
    above = bool(np.all(css.values[1 : L + 1] > css.band_high[1 : L + 1]))
    checks.append(Check(f"sigma autocorrelation above null band, lags 1..{L}", above,
                        f"C(1)={css.values[1]:.3f} C({L})={css.values[L]:.3f}"))

    tol = 0.05 * np.sqrt(100000 / T)
    disc = report.rescale.discrepancies
    checks.append(Check("rescaled curves coincide", max(disc.values()) < tol,
                        ", ".join(f"{k}={v:.3f}" for k, v in disc.items()) + f" (tol {tol:.3f})"))

    oc = oracle_compare(ix.sigma, synth.sigma_true)
    checks.append(Check("sigma_hat tracks sigma_true", oc.pearson >= 0.97 and abs(oc.ratio_mean - 0.5) <= 0.015,
                        f"pearson={oc.pearson:.4f} ratio_mean={oc.ratio_mean:.4f}"))
    return checks
