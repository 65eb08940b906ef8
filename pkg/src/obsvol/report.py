"""
End-to-end analysis: panel -> index series -> verification battery -> report.

Curve labels read ``"a,b"`` and hold C(a(t), b(t + tau)), i.e. the first
series is taken at the earlier time. ``"sigma,sigma"`` is the volatility
autocorrelation, ``"omega,|r|"`` correlates today's residual with future
absolute index returns, and so on.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from . import diagnostics as diag
from .corr import CorrelationCurve, bootstrap_bands, cross_correlation
from .errors import InputError, StatisticalError
from .index import WeightScheme, build_index_series
from .panel import align_panel, compute_returns, parse_price_csv

__all__ = [
    "AnalysisConfig",
    "AnalysisReport",
    "INDEPENDENCE_CURVES",
    "RESCALE_CURVES",
    "analyze_panel",
    "analyze_file",
    "write_report",
    "curve_filename",
]

INDEPENDENCE_CURVES = (
    ("sigma", "sigma"),
    ("|omega|", "|omega|"),
    ("omega", "sigma"),
    ("sigma", "omega"),
    ("omega", "|r|"),
    ("|r|", "omega"),
)
RESCALE_CURVES = (("|r|", "|r|"), ("|r|", "sigma"), ("sigma", "|r|"))
# curves that must vanish at lags >= 1 when omega is i.i.d. and independent of sigma
VANISHING = ("omega,sigma", "sigma,omega", "|omega|,|omega|", "omega,|r|", "|r|,omega")


@dataclass(frozen=True)
class AnalysisConfig:
    weights: str = "equal"
    missing: str = "intersect"
    tau_max: int = 250
    block_len: int = 25
    n_boot: int = 1000
    bins: int = 20
    seed: int = 0
    demean: str = "full"

    def to_dict(self):
        return asdict(self)


@dataclass
class AnalysisReport:
    moments: dict[str, diag.MomentSummary]
    k: float
    curves: dict[str, CorrelationCurve]
    uniformity: diag.UniformityReport
    rescale: diag.RescaleReport
    provenance: dict
    skipped: dict[str, str] = field(default_factory=dict)

    def vanishing_fraction(self, label, start=1):
        return float(self.curves[label].inside_bands(start).mean())

    def to_dict(self):
        return {
            "provenance": self.provenance,
            "moments": {k: m.to_dict() for k, m in self.moments.items()},
            "k": self.k,
            "uniformity": self.uniformity.to_dict(),
            "rescale": self.rescale.to_dict(),
            "curves": {k: c.to_dict() for k, c in self.curves.items()},
            "skipped": dict(self.skipped),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            moments={k: diag.MomentSummary.from_dict(m) for k, m in d["moments"].items()},
            k=d["k"],
            curves={k: CorrelationCurve.from_dict(c) for k, c in d["curves"].items()},
            uniformity=diag.UniformityReport.from_dict(d["uniformity"]),
            rescale=diag.RescaleReport.from_dict(d["rescale"]),
            provenance=d["provenance"],
            skipped=dict(d.get("skipped", {})),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _curve_seed(seed, i):
    ss = np.random.SeedSequence(int(seed), spawn_key=(1000 + i,))
    return int(ss.generate_state(1, np.uint64)[0])


def _series(ix):
    return {
        "sigma": ix.sigma,
        "omega": ix.omega,
        "|omega|": np.abs(ix.omega),
        "|r|": ix.abs_r,
    }


def analyze_panel(rm, cfg=None, weights=None, provenance=None):
    """Run the verification battery on a ReturnMatrix.

    Raises
    ------
    StatisticalError
        If sigma has zero variance, there are too few valid days, or tau_max
        is too large for the sample.
    """
    cfg = cfg or AnalysisConfig()
    ix = build_index_series(rm, weights)
    valid = ix.valid
    T = len(ix)
    if 2 * cfg.tau_max >= T:
        raise StatisticalError(f"tau_max={cfg.tau_max} needs more than {2 * cfg.tau_max} days, have {T}")
    if cfg.block_len >= T:
        raise StatisticalError(f"block_len={cfg.block_len} must be below the sample length {T}")

    moments = {
        "sigma": diag.sample_moments(ix.sigma, valid),
        "omega": diag.sample_moments(ix.omega, valid),
    }
    k = diag.compute_k(moments["sigma"])

    series = _series(ix)
    curves = {}
    skipped = {}
    for i, (a, b) in enumerate(INDEPENDENCE_CURVES + RESCALE_CURVES):
        label = f"{a},{b}"
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", RuntimeWarning)
                c = cross_correlation(series[b], series[a], valid, cfg.tau_max, label, demean=cfg.demean)
        except (StatisticalError, RuntimeWarning) as exc:
            skipped[label] = str(exc)
            continue
        low, high = bootstrap_bands(
            series[b],
            series[a],
            valid,
            cfg.tau_max,
            cfg.block_len,
            cfg.n_boot,
            _curve_seed(cfg.seed, i),
            demean=cfg.demean,
        )
        curves[label] = c.with_bands(low, high)

    needed = ("|r|,|r|", "|r|,sigma", "sigma,|r|", "sigma,sigma")
    missing = [n for n in needed if n not in curves]
    if missing:
        raise StatisticalError(f"cannot run the rescaling check: {skipped.get(missing[0])}")
    rescale = diag.rescale_check(*(curves[n] for n in needed), k)
    uniformity = diag.uniformity_test(ix.omega, valid, cfg.bins, seed=cfg.seed)

    prov = {
        "tool": "obsvol",
        "version": __version__,
        "config": cfg.to_dict(),
        "n_stocks": rm.n_stocks,
        "n_days": rm.n_days,
        "n_valid": ix.n_valid,
        "first_date": rm.dates[0],
        "last_date": rm.dates[-1],
    }
    prov.update(provenance or {})
    return AnalysisReport(moments, k, curves, uniformity, rescale, prov, skipped)


def _read_weights_csv(path, rm):
    """Explicit weights in long format: date,ticker,weight on return dates."""
    d_index = {d: j for j, d in enumerate(rm.dates)}
    t_index = {t: i for i, t in enumerate(rm.tickers)}
    w = np.full((rm.n_stocks, rm.n_days), np.nan)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"date", "ticker", "weight"} <= set(reader.fieldnames):
            raise InputError(f"{path}: weights CSV needs columns date,ticker,weight", 1)
        for row in reader:
            line = reader.line_num
            j = d_index.get(row["date"].strip())
            i = t_index.get(row["ticker"].strip())
            if j is None or i is None:
                continue
            try:
                w[i, j] = float(row["weight"])
            except ValueError:
                raise InputError(f"{path}: unparseable weight {row['weight']!r}", line) from None
    if np.isnan(w).any():
        raise InputError(f"{path}: weights missing for some (date, ticker) of the panel")
    return WeightScheme.explicit(w)


def analyze_file(path, cfg=None, columns=None):
    """Parse, align and analyse a price CSV; provenance records its SHA-256."""
    cfg = cfg or AnalysisConfig()
    with open(path, "rb") as fh:
        data = fh.read()
    raw = parse_price_csv(io.BytesIO(data), **(columns or {}))
    panel = align_panel(raw, cfg.missing)
    rm = compute_returns(panel)
    if cfg.weights == "equal":
        weights = None
    elif cfg.weights == "price":
        weights = WeightScheme.price(panel)
    elif cfg.weights.startswith("explicit:"):
        weights = _read_weights_csv(cfg.weights.split(":", 1)[1], rm)
    else:
        raise InputError(f"unknown weights option {cfg.weights!r}")
    prov = {
        "input": os.path.basename(path),
        "input_sha256": hashlib.sha256(data).hexdigest(),
        "columns": dict(columns or {}),
    }
    return analyze_panel(rm, cfg, weights, prov)


def curve_filename(label):
    """``"|r|,omega"`` -> ``corr_absr_omega.csv``."""
    parts = [f"abs{n.strip('|')}" if n.startswith("|") else n for n in label.split(",")]
    return f"corr_{'_'.join(parts)}.csv"


def _fmt(v):
    return repr(float(v))


def _write_files(report, out_dir):
    files = {"report.json": report.to_json()}
    for label, c in report.curves.items():
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lag", "value", "band_low", "band_high"])
        for row in zip(c.lags, c.values, c.band_low, c.band_high):
            w.writerow([int(row[0])] + [_fmt(v) for v in row[1:]])
        files[curve_filename(label)] = buf.getvalue()

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_left", "bin_right", "density"])
    e = report.uniformity.bin_edges
    for lo, hi, d in zip(e[:-1], e[1:], report.uniformity.density):
        w.writerow([_fmt(lo), _fmt(hi), _fmt(d)])
    files["histogram.csv"] = buf.getvalue()

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    curves = report.rescale.curves
    w.writerow(["lag"] + [c.label for c in curves])
    for j, lag in enumerate(curves[0].lags):
        w.writerow([int(lag)] + [_fmt(c.values[j]) for c in curves])
    files["rescaled.csv"] = buf.getvalue()

    os.makedirs(out_dir, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=out_dir, prefix=".partial-") as tmp:
        for name, text in files.items():
            with open(os.path.join(tmp, name), "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        for name in files:
            os.replace(os.path.join(tmp, name), os.path.join(out_dir, name))
    return sorted(files)


def write_report(report, out_dir):
    """Write report.json, one CSV per curve, histogram.csv and rescaled.csv.

    Everything is rendered in memory first, so a failure leaves no partial
    output behind.
    """
    return _write_files(report, out_dir)
