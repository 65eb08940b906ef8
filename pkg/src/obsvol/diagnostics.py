"""
Sample moments, the rescaling constant k, uniformity and rescaling checks.

If |r(t)| = sigma(t) |omega(t)| with omega i.i.d. and independent of sigma,
then for every lag tau >= 1::

    C_|r|,|r|(tau)  = k       C_sigma,sigma(tau)
    C_|r|,sigma(tau) = sqrt(k) C_sigma,sigma(tau)

with::

    k = q (<sigma^2> - <sigma>^2) / (<sigma^2> - q <sigma>^2),   q = <|omega|>^2 / <omega^2>

For omega uniform on [-sqrt(3), sqrt(3)], q = 3/4. Published moments
<sigma^2> = 8.583e-5 and <sigma> = 8.388e-3 give k = 0.3509, about 1/2.85.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .corr import CorrelationCurve
from .errors import StatisticalError
from .index import SQRT3

__all__ = [
    "UNIFORM_ABS_RATIO",
    "MomentSummary",
    "UniformityReport",
    "RescaleReport",
    "sample_moments",
    "compute_k",
    "ks_statistic",
    "ks_null_quantile",
    "uniformity_test",
    "rescale_check",
]

UNIFORM_ABS_RATIO = 0.75


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    mean_sq: float
    mean_abs: float
    variance: float
    count: int

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def sample_moments(x, mask=None):
    """Plain arithmetic moments of ``x`` over the valid entries."""
    x = np.asarray(x, dtype=float)
    if mask is not None:
        x = x[np.asarray(mask, dtype=bool)]
    if len(x) < 2:
        raise StatisticalError(f"need at least 2 valid samples, got {len(x)}")
    mean = float(x.mean())
    mean_sq = float((x * x).mean())
    return MomentSummary(
        mean=mean,
        mean_sq=mean_sq,
        mean_abs=float(np.abs(x).mean()),
        variance=float(((x - mean) ** 2).mean()),
        count=len(x),
    )


def compute_k(sigma_moments, abs_ratio=UNIFORM_ABS_RATIO):
    """Rescaling constant linking |r| and sigma autocorrelations.

    ``abs_ratio`` is <|omega|>^2 / <omega^2>; 3/4 for uniform residuals.
    """
    if not 0 < abs_ratio <= 1:
        raise StatisticalError(f"abs_ratio must be in (0, 1], got {abs_ratio}")
    m1 = sigma_moments.mean
    m2 = sigma_moments.mean_sq
    var = m2 - m1 * m1
    if var <= 0:
        raise StatisticalError("sigma has zero variance; k is undefined")
    den = m2 - abs_ratio * m1 * m1
    if den <= 0:
        raise StatisticalError("non-positive denominator in k")
    return abs_ratio * var / den


def ks_statistic(u):
    """Sup distance between the empirical CDF of ``u`` and U(0, 1).

    Values outside [0, 1] are allowed and compared against the clipped CDF.
    """
    u = np.sort(np.clip(np.asarray(u, dtype=float), 0.0, 1.0))
    n = len(u)
    i = np.arange(1, n + 1)
    return float(max((i / n - u).max(), (u - (i - 1) / n).max()))


@lru_cache(maxsize=64)
def ks_null_quantile(n, q=0.99, n_sim=1000, seed=0):
    """Monte Carlo quantile of the KS statistic for ``n`` i.i.d. uniform draws.

    The statistic is distribution-free under the null, so simulating U(0, 1)
    samples calibrates the test for |omega| / sqrt(3) directly.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(n,))))
    stats = np.empty(n_sim)
    i = np.arange(1, n + 1)
    for j in range(n_sim):
        u = np.sort(rng.random(n))
        stats[j] = max((i / n - u).max(), (u - (i - 1) / n).max())
    return float(np.quantile(stats, q))


@dataclass
class UniformityReport:
    """Distribution of |omega| against the uniform law on [0, sqrt(3)]."""

    ks_statistic: float
    mean_abs_omega: float
    mean_sq_omega: float
    count: int
    bin_edges: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)
    overflow: int = 0
    ks_threshold: float | None = None
    degenerate: bool = False

    @property
    def passes(self):
        return self.ks_threshold is not None and self.ks_statistic < self.ks_threshold

    def to_dict(self):
        d = asdict(self)
        d["bin_edges"] = self.bin_edges.tolist()
        d["density"] = self.density.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["bin_edges"] = np.asarray(d["bin_edges"], dtype=float)
        d["density"] = np.asarray(d["density"], dtype=float)
        return cls(**d)


def uniformity_test(omega, mask=None, bins=20, threshold_q=0.99, n_sim=1000, seed=0):
    """Compare |omega| with the uniform distribution on [0, sqrt(3)].

    The KS threshold is the ``threshold_q`` quantile of the Monte Carlo null
    for the same sample size (pass ``threshold_q=None`` to skip it). The
    histogram has ``bins`` equal bins on [0, sqrt(3)] and is normalised to
    unit area over that interval. Values beyond sqrt(3), which an index
    series cannot produce but a hand-built residual can, are counted in
    ``overflow``. ``degenerate`` flags a sample whose |omega| is
    (numerically) constant, as with a one-stock panel.
    """
    omega = np.asarray(omega, dtype=float)
    if mask is not None:
        omega = omega[np.asarray(mask, dtype=bool)]
    n = len(omega)
    if n < 100:
        raise StatisticalError(f"uniformity test needs at least 100 valid samples, got {n}")
    if bins < 5:
        raise ValueError("bins must be at least 5")
    a = np.abs(omega)
    edges = np.linspace(0.0, SQRT3, bins + 1)
    inside = a <= SQRT3 * (1 + 1e-12)
    counts, _ = np.histogram(np.minimum(a[inside], SQRT3), bins=edges)
    n_in = int(inside.sum())
    density = counts / (n_in * np.diff(edges)) if n_in else np.zeros(bins)
    threshold = None if threshold_q is None else ks_null_quantile(n, threshold_q, n_sim, seed)
    return UniformityReport(
        ks_statistic=ks_statistic(a / SQRT3),
        mean_abs_omega=float(a.mean()),
        mean_sq_omega=float((omega * omega).mean()),
        count=n,
        bin_edges=edges,
        density=density,
        overflow=n - n_in,
        ks_threshold=threshold,
        degenerate=bool(np.ptp(a) <= 1e-9 * SQRT3),
    )


@dataclass
class RescaleReport:
    k: float
    curves: list[CorrelationCurve]
    discrepancies: dict[str, float]

    @property
    def max_discrepancy(self):
        return max(self.discrepancies.values())

    def to_dict(self):
        return {
            "k": self.k,
            "max_discrepancy": self.max_discrepancy,
            "discrepancies": dict(self.discrepancies),
            "curves": [c.to_dict() for c in self.curves],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            d["k"],
            [CorrelationCurve.from_dict(c) for c in d["curves"]],
            dict(d["discrepancies"]),
        )


def rescale_check(c_rr, c_rs, c_sr, c_ss, k):
    """Rescale |r| curves by k (or sqrt(k)) and compare them with C_sigma,sigma.

    Discrepancy is the max absolute difference over lags >= 1; lag 0 is
    excluded because the identities only hold for tau >= 1.
    """
    if not k > 0:
        raise StatisticalError(f"k must be positive, got {k}")
    for c in (c_rr, c_rs, c_sr):
        if not np.array_equal(c.lags, c_ss.lags):
            raise ValueError(f"lag axis of {c.label!r} differs from {c_ss.label!r}")
    root = np.sqrt(k)
    scaled = [
        CorrelationCurve(f"{c_rr.label}/k", c_rr.lags, c_rr.values / k),
        CorrelationCurve(f"{c_rs.label}/sqrt(k)", c_rs.lags, c_rs.values / root),
        CorrelationCurve(f"{c_sr.label}/sqrt(k)", c_sr.lags, c_sr.values / root),
        CorrelationCurve(c_ss.label, c_ss.lags, c_ss.values),
    ]
    ref = c_ss.values[1:]
    disc = {c.label: float(np.max(np.abs(c.values[1:] - ref))) if len(ref) else 0.0 for c in scaled[:3]}
    return RescaleReport(float(k), scaled, disc)
