"""
Lagged correlation estimator and block-bootstrap null bands.

The estimator for lag ``tau >= 0`` is::

    C_xy(tau) = (<x(t+tau) y(t)> - <x><y>) / (std(x) std(y))

where ``<x>``, ``std(x)`` are full-sample statistics over valid days and the
lagged product is averaged over the pairs where both ends are valid. With
``x is y`` this is the usual autocorrelation normalisation.

Lagged sums are evaluated with zero-padded real FFTs, batched over leading
axes so bootstrap replicates run as one array operation.
:func:`cross_correlation_reference` is a plain double loop kept as the
independent check of the fast path.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sp_fft

from .errors import StatisticalError

__all__ = [
    "CorrelationCurve",
    "cross_correlation",
    "cross_correlation_reference",
    "bootstrap_bands",
    "replicate_rng",
]

DEMEAN_MODES = ("full", "lag")


@dataclass
class CorrelationCurve:
    label: str
    lags: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    band_low: np.ndarray | None = field(default=None, repr=False)
    band_high: np.ndarray | None = field(default=None, repr=False)

    @property
    def tau_max(self):
        return int(self.lags[-1])

    def with_bands(self, low, high):
        n = len(self.lags)
        return CorrelationCurve(self.label, self.lags, self.values, low[:n], high[:n])

    def inside_bands(self, start=1):
        """Boolean per lag >= ``start``: value within [band_low, band_high]."""
        if self.band_low is None:
            raise ValueError(f"curve {self.label!r} has no bands")
        sl = slice(start, None)
        return (self.values[sl] >= self.band_low[sl]) & (self.values[sl] <= self.band_high[sl])

    def to_dict(self):
        out = {
            "label": self.label,
            "lags": self.lags.tolist(),
            "values": self.values.tolist(),
        }
        if self.band_low is not None:
            out["band_low"] = self.band_low.tolist()
            out["band_high"] = self.band_high.tolist()
        return out

    @classmethod
    def from_dict(cls, d):
        low = d.get("band_low")
        high = d.get("band_high")
        return cls(
            d["label"],
            np.asarray(d["lags"], dtype=int),
            np.asarray(d["values"], dtype=float),
            None if low is None else np.asarray(low, dtype=float),
            None if high is None else np.asarray(high, dtype=float),
        )


def _lagged_sums(pairs, n_lags):
    """``out[k][..., tau] = sum_t u[..., t + tau] * v[..., t]`` for each (u, v).

    All arrays share the last axis length T; the FFT size is at least
    T + n_lags so no circular wrap reaches the requested lags.
    """
    T = pairs[0][0].shape[-1]
    nfft = sp_fft.next_fast_len(T + n_lags, real=True)
    cache = {}

    def spec(a):
        key = id(a)
        if key not in cache:
            cache[key] = (a, sp_fft.rfft(a, nfft, axis=-1))
        return cache[key][1]

    return [
        sp_fft.irfft(spec(u) * np.conj(spec(v)), nfft, axis=-1)[..., :n_lags]
        for u, v in pairs
    ]


def _moments(x, m):
    n = m.sum(axis=-1, keepdims=True)
    mean = (x * m).sum(axis=-1, keepdims=True) / n
    dev = (x - mean) * m
    var = (dev * dev).sum(axis=-1, keepdims=True) / n
    return mean, var, dev


def _xcorr(x, y, mx, my, n_lags, demean="full"):
    """Batched estimator core; inputs are broadcast-compatible float arrays.

    Returns (values, counts) with the lag on the last axis. ``values`` is NaN
    where fewer than 2 valid pairs exist.
    """
    same_mask = mx.shape == my.shape and np.array_equal(mx, my)
    mx = mx.astype(float)
    my = my.astype(float)
    xbar, vx, dx = _moments(x, mx)
    ybar, vy, dy = _moments(y, my)
    sx = np.sqrt(vx)
    sy = np.sqrt(vy)
    a = dx / sx
    b = dy / sy
    mx, my, a, b = np.broadcast_arrays(mx, my, a, b)

    if demean == "full":
        s_ab, s_a, s_b, cnt = _lagged_sums([(a, b), (a, my), (mx, b), (mx, my)], n_lags)
        cnt = np.rint(cnt)
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = (s_ab + (ybar / sy) * s_a + (xbar / sx) * s_b) / cnt
            # lag 0 evaluated directly; with x == y this is exactly 1
            c0 = cnt[..., 0]
            s0 = (dx * dy).sum(axis=-1)
            if not same_mask:
                # these vanish analytically when both series share a mask
                s0 = s0 + (ybar * dx * my).sum(axis=-1) + (xbar * mx * dy).sum(axis=-1)
            vals[..., 0] = s0 / c0 / np.sqrt(vx * vy)[..., 0]
    elif demean == "lag":
        aa = a * a
        bb = b * b
        s_ab, s_a, s_b, s_aa, s_bb, cnt = _lagged_sums(
            [(a, b), (a, my), (mx, b), (aa, my), (mx, bb), (mx, my)], n_lags
        )
        cnt = np.rint(cnt)
        with np.errstate(invalid="ignore", divide="ignore"):
            ma = s_a / cnt
            mb = s_b / cnt
            cov = s_ab / cnt - ma * mb
            va = s_aa / cnt - ma * ma
            vb = s_bb / cnt - mb * mb
            vals = cov / np.sqrt(va * vb)
    else:
        raise ValueError(f"demean must be one of {DEMEAN_MODES}, got {demean!r}")

    vals = np.where(cnt >= 2, vals, np.nan)
    return vals, cnt


def _validate(x, y, mask, mask_y, tau_max):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"x and y must be 1-D with equal length, got {x.shape} and {y.shape}")
    T = len(x)
    mx = np.ones(T, bool) if mask is None else np.asarray(mask, dtype=bool)
    my = mx if mask_y is None else np.asarray(mask_y, dtype=bool)
    if mx.shape != x.shape or my.shape != x.shape:
        raise ValueError("mask length does not match series length")
    tau_max = int(tau_max)
    if tau_max < 0 or 2 * tau_max >= T:
        raise ValueError(f"tau_max must satisfy 0 <= tau_max < T/2 (T={T}, tau_max={tau_max})")
    for name, v, m in (("x", x, mx), ("y", y, my)):
        vv = v[m]
        if len(vv) < 2:
            raise StatisticalError(f"{name} has fewer than 2 valid samples")
        if not np.isfinite(vv).all():
            raise ValueError(f"{name} has non-finite values on valid days")
        # rounding can leave a constant series (|omega| on a one-stock panel) a few ulps wide
        if np.ptp(vv) <= 1e-12 * np.abs(vv).max():
            raise StatisticalError(f"{name} has zero variance")
    return x, y, mx, my, tau_max


def _truncate(vals, label):
    bad = np.flatnonzero(~np.isfinite(vals))
    if len(bad):
        cut = int(bad[0])
        warnings.warn(
            f"correlation {label!r}: fewer than 2 valid pairs at lag {cut}; "
            f"curve truncated to lags 0..{cut - 1}",
            RuntimeWarning,
            stacklevel=3,
        )
        return vals[:cut]
    return vals


def cross_correlation(x, y, mask=None, tau_max=250, label="", *, mask_y=None, demean="full"):
    """Correlation of ``x[t + tau]`` with ``y[t]`` for ``tau = 0..tau_max``.

    Parameters
    ----------
    x, y : array_like
        Series of equal length T.
    mask : array_like of bool, optional
        Valid days. Applies to both series unless ``mask_y`` is given, in
        which case it applies to ``x`` only.
    tau_max : int
        Largest lag; must be below T/2.
    label : str
        Stored on the returned curve.
    demean : {"full", "lag"}
        ``"full"`` normalises with full-sample means and variances.
        ``"lag"`` computes a Pearson coefficient over each lag's overlapping
        pairs instead (for sensitivity checks).

    Returns
    -------
    CorrelationCurve
        Truncated, with a RuntimeWarning, at the first lag with fewer than
        two valid pairs.

    Raises
    ------
    StatisticalError
        If either series is constant or has fewer than 2 valid samples.
    """
    x, y, mx, my, tau_max = _validate(x, y, mask, mask_y, tau_max)
    vals, _ = _xcorr(x, y, mx, my, tau_max + 1, demean)
    vals = _truncate(vals, label)
    return CorrelationCurve(label, np.arange(len(vals)), vals)


def cross_correlation_reference(x, y, mask=None, tau_max=250, *, mask_y=None, demean="full"):
    """Direct double-loop evaluation of the same estimator. O(T * tau_max).

    Returns a plain list of floats (NaN where fewer than 2 pairs).
    """
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    T = len(x)
    mx = [True] * T if mask is None else [bool(v) for v in mask]
    my = mx if mask_y is None else [bool(v) for v in mask_y]

    def stats(v, m):
        vals = [a for a, ok in zip(v, m) if ok]
        mean = sum(vals) / len(vals)
        var = sum((a - mean) ** 2 for a in vals) / len(vals)
        return mean, var ** 0.5

    xbar, sx = stats(x, mx)
    ybar, sy = stats(y, my)
    out = []
    for tau in range(tau_max + 1):
        pairs = [(x[t + tau], y[t]) for t in range(T - tau) if mx[t + tau] and my[t]]
        n = len(pairs)
        if n < 2:
            out.append(float("nan"))
            continue
        if demean == "full":
            prod = sum(a * b for a, b in pairs) / n
            out.append((prod - xbar * ybar) / (sx * sy))
        else:
            ma = sum(a for a, _ in pairs) / n
            mb = sum(b for _, b in pairs) / n
            cov = sum((a - ma) * (b - mb) for a, b in pairs) / n
            va = sum((a - ma) ** 2 for a, _ in pairs) / n
            vb = sum((b - mb) ** 2 for _, b in pairs) / n
            out.append(cov / (va * vb) ** 0.5)
    return out


def replicate_rng(seed, index):
    """Generator for bootstrap replicate ``index``: a counter-derived substream.

    The stream depends only on (seed, index), so results do not depend on the
    order or grouping in which replicates are evaluated.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _block_indices(T, block_len, seed, replicates):
    n_blocks = -(-T // block_len)
    offs = np.arange(block_len)
    rows = []
    for i in replicates:
        starts = replicate_rng(seed, i).integers(0, T, size=n_blocks)
        rows.append(((starts[:, None] + offs) % T).ravel()[:T])
    return np.stack(rows)


def bootstrap_bands(
    x,
    y,
    mask=None,
    tau_max=250,
    block_len=25,
    n_boot=1000,
    seed=0,
    *,
    levels=(0.025, 0.975),
    demean="full",
    chunk=None,
):
    """Per-lag null bands for ``cross_correlation(x, y)`` under independence.

    ``y`` (with its validity mask) is resampled by a circular block bootstrap
    while ``x`` stays fixed. This keeps each series' own serial dependence
    within blocks and destroys any dependence between them. The estimator is
    recomputed on every replicate and the ``levels`` quantiles are taken
    per lag.

    Returns
    -------
    low, high : ndarray
        Arrays of length ``tau_max + 1``.
    """
    x, y, mx, my, tau_max = _validate(x, y, mask, None, tau_max)
    T = len(x)
    block_len = int(block_len)
    n_boot = int(n_boot)
    if block_len < 1 or block_len >= T:
        raise ValueError(f"block_len must satisfy 1 <= block_len < T (T={T}, block_len={block_len})")
    if n_boot < 100:
        raise ValueError("n_boot must be at least 100")

    n_lags = tau_max + 1
    if chunk is None:
        nfft = sp_fft.next_fast_len(T + n_lags, real=True)
        chunk = max(1, min(256, (1 << 25) // (nfft * 8)))
    reps = np.empty((n_boot, n_lags))
    for start in range(0, n_boot, chunk):
        ids = range(start, min(start + chunk, n_boot))
        idx = _block_indices(T, block_len, seed, ids)
        vals, _ = _xcorr(x[None, :], y[idx], mx[None, :], my[idx], n_lags, demean)
        reps[start : start + len(ids)] = vals
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        low, high = np.nanquantile(reps, levels, axis=0)
    return low, high
