"""
Synthetic stock panels with a known common volatility factor.

Each stock's daily return is::

    r_a(t) = sigma_true(t) * (1 + delta_a(t)) * omega_a(t)

``sigma_true`` is a stationary lognormal AR(1) (or a constant), the factor
``1 + delta_a(t)`` is i.i.d. lognormal with mean 1 (identically 1 at
``idio_scale=0``), and ``omega_a(t) = s_a(t) m_a(t)`` where the magnitudes
m_a(t) are i.i.d. draws of |residual|.

Signs are where the stocks interact. With ``coupling="independent"`` they
are fair coin flips, and the index return diversifies away: the index
residual shrinks like 1/sqrt(N). With ``coupling="market"`` (default) a
market residual omega(t) is drawn from the residual law each day and the
signs are set so that the index residual recovers it exactly:

* stocks are visited in a random order and the leading ones get sign +1,
  the trailing ones -1, until the +1 share of sum |r_a| matches
  (1 + omega(t)/sqrt(3)) / 2;
* the one stock straddling that boundary gets a fractional sign c in [-1, 1]
  solved in closed form, so ``sqrt(3) sum r_a / sum |r_a| == omega(t)``.

Under order reversal with omega -> -omega the rule maps a configuration to its
negation, so every stock's residual is symmetric and independent of its own
magnitude. Only the boundary stock (one per day) departs from the residual
law, so E[sigma_hat / sigma_true] = 0.5 (1 - O(1/N)) for uniform residuals.

Random streams are counter-derived from the master seed: substream 0 drives
the volatility path, 1 the market residual and visiting order, and 2 + a
stock a's magnitudes and dispersion. Generation is therefore deterministic
and independent of evaluation order. The bit generator is PCG64 seeded
through ``numpy.random.SeedSequence``.
"""

from __future__ import annotations

import csv
import os
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import InputError
from .index import SQRT3
from .panel import PricePanel, ReturnMatrix, write_price_csv

__all__ = [
    "SynthConfig",
    "SynthPanel",
    "OracleComparison",
    "gen_volatility_path",
    "gen_market",
    "oracle_compare",
    "write_synth",
]

# mu and scale give the observable estimator <sigma> ~ 0.0084 and
# <sigma^2> ~ 8.6e-5 (sigma_hat ~ sigma_true / 2)
DEFAULT_VOL_MU = -4.18
DEFAULT_VOL_SCALE = 0.088


@dataclass(frozen=True)
class SynthConfig:
    n_stocks: int = 65
    n_days: int = 10000
    vol_model: str = "lognormal"
    vol_mu: float = DEFAULT_VOL_MU
    vol_phi: float = 0.98
    vol_scale: float = DEFAULT_VOL_SCALE
    vol_level: float = 0.01
    residual: str = "uniform"
    idio_scale: float = 0.0
    coupling: str = "market"
    seed: int = 0
    start_date: str = "2000-01-03"

    def __post_init__(self):
        if int(self.n_stocks) < 1:
            raise InputError("n_stocks must be >= 1")
        if int(self.n_days) < 2:
            raise InputError("n_days must be >= 2")
        if self.vol_model not in ("lognormal", "constant"):
            raise InputError(f"unknown vol_model {self.vol_model!r}")
        if not 0 <= self.vol_phi < 1:
            raise InputError("vol_phi must be in [0, 1)")
        if self.vol_scale < 0:
            raise InputError("vol_scale must be >= 0")
        if not self.vol_level > 0:
            raise InputError("vol_level must be > 0")
        if self.residual not in ("uniform", "gaussian"):
            raise InputError(f"unknown residual model {self.residual!r}")
        if self.idio_scale < 0:
            raise InputError("idio_scale must be >= 0")
        if self.coupling not in ("market", "independent"):
            raise InputError(f"unknown coupling {self.coupling!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InputError("seed must be an unsigned 64-bit integer")

    def to_dict(self):
        return asdict(self)


@dataclass
class SynthPanel:
    returns: ReturnMatrix
    sigma_true: np.ndarray = field(repr=False)
    omega_market: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    dispersion: np.ndarray = field(repr=False)
    config: SynthConfig = None

    def price_panel(self, s0=100.0):
        """Prices with S_a(0) = s0 whose log returns are ``returns``."""
        r = self.returns.returns
        logp = np.concatenate([np.zeros((r.shape[0], 1)), np.cumsum(r, axis=1)], axis=1)
        dates = (_business_days(self.config.start_date, 1)[0],) + self.returns.dates
        return PricePanel(dates, self.returns.tickers, s0 * np.exp(logp))


def _stream(seed, key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(key,))))


def _business_days(start, n):
    days = np.busday_offset(np.datetime64(start, "D"), np.arange(n), roll="forward")
    return tuple(str(d) for d in days)


def gen_volatility_path(cfg):
    """Common volatility factor of length ``cfg.n_days``.

    lognormal: ln s(t) = mu + phi (ln s(t-1) - mu) + scale * eps(t), started
    from the stationary law N(mu, scale^2 / (1 - phi^2)).
    """
    T = int(cfg.n_days)
    if cfg.vol_model == "constant":
        return np.full(T, float(cfg.vol_level))
    rng = _stream(cfg.seed, 0)
    eps = rng.standard_normal(T)
    phi, s = cfg.vol_phi, cfg.vol_scale
    y0 = eps[0] * s / np.sqrt(1.0 - phi * phi)
    y = np.empty(T)
    y[0] = y0
    if T > 1:
        y[1:] = lfilter([s], [1.0, -phi], eps[1:], zi=[phi * y0])[0]
    return np.exp(cfg.vol_mu + y)


def _draw_residual(rng, law, size):
    if law == "uniform":
        return rng.uniform(-SQRT3, SQRT3, size)
    return rng.standard_normal(size)


def _market_signs(a, u, keys):
    """Signs in [-1, 1] such that sum(s a) / sum(|s| a) == u on every day.

    ``a`` is N x T non-negative magnitudes, ``u`` the T targets in [-1, 1],
    ``keys`` N x T uniforms fixing the visiting order.
    """
    N, T = a.shape
    order = np.argsort(keys, axis=0, kind="stable")
    ao = np.take_along_axis(a, order, axis=0)
    cum = np.cumsum(ao, axis=0)
    total = cum[-1]
    target = 0.5 * (1.0 + u) * total
    k = np.minimum((cum < target).sum(axis=0), N - 1)
    cols = np.arange(T)
    b = ao[k, cols]
    before = cum[k, cols] - b
    after = total - cum[k, cols]
    d = u * (before + after) - (before - after)
    den = np.where(d >= 0, b * (1.0 - u), b * (1.0 + u))
    fallback = np.where(u >= 0, 1.0, -1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where((den > 0) & (before + after > 0), d / den, fallback)
    c = np.clip(c, -1.0, 1.0)

    rank = np.arange(N)[:, None]
    so = np.where(rank < k, 1.0, -1.0)
    so[k, cols] = c
    signs = np.empty_like(so)
    np.put_along_axis(signs, order, so, axis=0)
    return signs


def gen_market(cfg):
    """Generate a SynthPanel; identical configs give bit-identical output."""
    N, T = int(cfg.n_stocks), int(cfg.n_days)
    sigma = gen_volatility_path(cfg)

    mags = np.empty((N, T))
    disp = np.ones((N, T))
    for i in range(N):
        rng = _stream(cfg.seed, 2 + i)
        mags[i] = np.abs(_draw_residual(rng, cfg.residual, T))
        z = rng.standard_normal(T)
        if cfg.idio_scale > 0:
            s = cfg.idio_scale
            disp[i] = np.exp(s * z - 0.5 * s * s)

    mkt = _stream(cfg.seed, 1)
    if cfg.coupling == "market":
        omega_mkt = _draw_residual(mkt, cfg.residual, T)
        u = np.clip(omega_mkt / SQRT3, -1.0, 1.0)
        keys = mkt.random((N, T))
        signs = _market_signs(mags * disp, u, keys)
    else:
        omega_mkt = np.full(T, np.nan)
        signs = np.where(mkt.random((N, T)) < 0.5, 1.0, -1.0)

    residuals = signs * mags
    returns = sigma[None, :] * disp * residuals
    width = len(str(N - 1))
    tickers = tuple(f"S{i:0{width}d}" for i in range(N))
    dates = _business_days(cfg.start_date, T + 1)[1:]
    return SynthPanel(ReturnMatrix(dates, tickers, returns), sigma, omega_mkt, residuals, disp, cfg)


@dataclass(frozen=True)
class OracleComparison:
    pearson: float
    ratio_mean: float
    ratio_cv: float

    def to_dict(self):
        return asdict(self)


def oracle_compare(sigma_hat, sigma_true, mask=None):
    """Compare an estimated volatility path with the true one."""
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    sigma_true = np.asarray(sigma_true, dtype=float)
    if sigma_hat.shape != sigma_true.shape:
        raise InputError(f"length mismatch: {sigma_hat.shape} vs {sigma_true.shape}")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        sigma_hat, sigma_true = sigma_hat[mask], sigma_true[mask]
    if (sigma_true <= 0).any():
        raise InputError("sigma_true must be positive")
    h = sigma_hat - sigma_hat.mean()
    g = sigma_true - sigma_true.mean()
    pearson = float((h * g).sum() / np.sqrt((h * h).sum() * (g * g).sum()))
    ratio = sigma_hat / sigma_true
    mean = float(ratio.mean())
    return OracleComparison(pearson, mean, float(ratio.std() / mean))


def write_synth(panel, out_dir):
    """Write ``prices.csv`` (panel format) and ``sigma_true.csv`` into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    prices_path = os.path.join(out_dir, "prices.csv")
    sigma_path = os.path.join(out_dir, "sigma_true.csv")
    write_price_csv(panel.price_panel(), prices_path)
    tmp = sigma_path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "sigma_true"])
        for day, s in zip(panel.returns.dates, panel.sigma_true):
            w.writerow([day, repr(float(s))])
    os.replace(tmp, sigma_path)
    return prices_path, sigma_path
