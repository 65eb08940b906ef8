"""
Index return, observable market volatility and residual series.

For a basket of N stocks with daily log returns r_a(t) the equally weighted
index return is the plain cross-sectional mean, and the observable volatility
is the mean absolute constituent return divided by sqrt(3)::

    r(t)     = (1/N) sum_a r_a(t)
    sigma(t) = (1/(sqrt(3) N)) sum_a |r_a(t)|
    omega(t) = r(t) / sigma(t)

The sqrt(3) makes omega(t) uniform on [-sqrt(3), sqrt(3)] (unit variance)
when the market behaves as in the empirical study. Because
|sum r_a| <= sum |r_a|, equal weights always give |omega(t)| <= sqrt(3).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

__all__ = [
    "SQRT3",
    "WeightScheme",
    "IndexSeries",
    "index_return",
    "observable_volatility",
    "residual_series",
    "build_index_series",
]

SQRT3 = float(np.sqrt(3.0))

WEIGHT_KINDS = ("equal", "price", "capitalization", "explicit")


@dataclass(frozen=True)
class WeightScheme:
    """How constituents are averaged into the index.

    ``weights`` is an N x T matrix aligned with a :class:`ReturnMatrix`; it is
    normalised per day on use. It is ``None`` for equal weights.
    """

    kind: str = "equal"
    weights: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise InputError(f"unknown weight scheme {self.kind!r}")
        if self.kind == "equal":
            if self.weights is not None:
                raise InputError("equal weights take no weight matrix")
            return
        if self.weights is None:
            raise InputError(f"{self.kind} weights need a weight matrix")
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2:
            raise InputError("weight matrix must be 2-D (stocks x days)")
        if not np.isfinite(w).all() or (w < 0).any():
            raise InputError("weights must be finite and non-negative")
        if (w.sum(axis=0) <= 0).any():
            raise InputError("weights sum to zero on some day")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def equal(cls):
        return cls("equal")

    @classmethod
    def price(cls, panel):
        """Price weights from the previous close, w_a(t) ~ S_a(t-1).

        Using the close that starts each return interval avoids look-ahead.
        ``panel`` must be the aligned PricePanel the returns were built from.
        """
        if not panel.is_rectangular:
            raise InputError("price weights need an aligned panel")
        return cls("price", panel.prices[:, :-1])

    @classmethod
    def capitalization(cls, weights):
        return cls("capitalization", weights)

    @classmethod
    def explicit(cls, weights):
        return cls("explicit", weights)

    def normalized(self, shape):
        """Per-day normalised weights for a returns matrix of ``shape``.

        Returns None for equal weights.
        """
        if self.weights is None:
            return None
        if self.weights.shape != tuple(shape):
            raise InputError(
                f"weight matrix shape {self.weights.shape} does not match returns {tuple(shape)}"
            )
        return self.weights / self.weights.sum(axis=0)


@dataclass(frozen=True)
class IndexSeries:
    """The three derived daily series on the return date axis.

    Days with ``sigma == 0`` (every constituent flat) have ``valid == False``
    and ``omega == 0``; downstream statistics skip them.
    """

    dates: tuple[str, ...]
    r: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False)

    @property
    def abs_r(self):
        return np.abs(self.r)

    @property
    def n_valid(self):
        return int(self.valid.sum())

    def __len__(self):
        return len(self.r)


def _returns_array(rm):
    return rm.returns if hasattr(rm, "returns") else np.atleast_2d(np.asarray(rm, dtype=float))


def index_return(rm, weights=None):
    """Daily index return, the weighted cross-sectional mean of constituent returns."""
    x = _returns_array(rm)
    w = (weights or WeightScheme.equal()).normalized(x.shape)
    if w is None:
        return x.mean(axis=0)
    return (w * x).sum(axis=0)


def observable_volatility(rm, weights=None):
    """Observable daily volatility: weighted mean absolute return over sqrt(3)."""
    x = np.abs(_returns_array(rm))
    w = (weights or WeightScheme.equal()).normalized(x.shape)
    if w is None:
        return x.mean(axis=0) / SQRT3
    return (w * x).sum(axis=0) / SQRT3


def residual_series(r, sigma):
    """Residual ``omega = r / sigma`` and the mask of days where it is defined.

    Returns
    -------
    omega : ndarray
        0.0 on masked days.
    valid : ndarray of bool
        True where ``sigma > 0``.
    """
    r = np.asarray(r, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if r.shape != sigma.shape:
        raise InputError(f"length mismatch: r {r.shape} vs sigma {sigma.shape}")
    valid = sigma > 0
    omega = np.zeros_like(r)
    np.divide(r, sigma, out=omega, where=valid)
    return omega, valid


def build_index_series(rm, weights=None):
    """Compute r, sigma, omega and the validity mask from a ReturnMatrix."""
    r = index_return(rm, weights)
    sigma = observable_volatility(rm, weights)
    omega, valid = residual_series(r, sigma)
    # |sum w r| <= sum w |r| for non-negative weights, so |omega| <= sqrt(3) is
    # exact; clipping only removes the last-ulp excess of the division
    np.clip(omega, -SQRT3, SQRT3, out=omega)
    dates = tuple(rm.dates) if hasattr(rm, "dates") else tuple(str(i) for i in range(len(r)))
    for a in (r, sigma, omega, valid):
        a.setflags(write=False)
    return IndexSeries(dates, r, sigma, omega, valid)
