"""
Price panel ingestion: parse long-format CSV, align dates, compute log returns.

The CSV layout is one observation per row::

    date,ticker,close
    2001-01-02,AAA,31.25
    2001-01-02,BBB,12.5

Dates are ISO-8601 and treated as ordered labels only; no trading calendar.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import InputError

__all__ = [
    "PricePanel",
    "ReturnMatrix",
    "parse_price_csv",
    "read_price_csv",
    "align_panel",
    "compute_returns",
    "write_price_csv",
]

MISSING_POLICIES = ("intersect", "ffill")


@dataclass(frozen=True)
class PricePanel:
    """Closing prices for N tickers on a shared date axis.

    ``prices[a, t]`` is the close of ``tickers[a]`` on ``dates[t]``. Before
    alignment missing observations are NaN; after :func:`align_panel` the
    matrix is fully populated.
    """

    dates: tuple[str, ...]
    tickers: tuple[str, ...]
    prices: np.ndarray = field(repr=False)

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        if prices.shape != (len(self.tickers), len(self.dates)):
            raise InputError(
                f"prices shape {prices.shape} does not match "
                f"{len(self.tickers)} tickers x {len(self.dates)} dates"
            )
        if len(set(self.tickers)) != len(self.tickers):
            raise InputError("duplicate ticker in panel")
        if any(a >= b for a, b in zip(self.dates, self.dates[1:])):
            raise InputError("dates must be strictly increasing")
        observed = prices[~np.isnan(prices)]
        if np.any(~np.isfinite(observed)) or np.any(observed <= 0):
            raise InputError("all prices must be finite and strictly positive")
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)

    @property
    def n_tickers(self):
        return len(self.tickers)

    @property
    def is_rectangular(self):
        return not np.isnan(self.prices).any()


@dataclass(frozen=True)
class ReturnMatrix:
    """Daily log returns, ``returns[a, t] = ln(S_a(t) / S_a(t-1))``.

    ``dates[t]`` is the date of the closing price that ends return ``t``.
    """

    dates: tuple[str, ...]
    tickers: tuple[str, ...]
    returns: np.ndarray = field(repr=False)

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        if returns.ndim != 2 or returns.shape != (len(self.tickers), len(self.dates)):
            raise InputError(
                f"returns shape {returns.shape} does not match "
                f"{len(self.tickers)} tickers x {len(self.dates)} dates"
            )
        if returns.shape[0] < 1 or returns.shape[1] < 1:
            raise InputError("need at least 1 ticker and 1 return day")
        if not np.isfinite(returns).all():
            raise InputError("returns must be finite")
        returns.setflags(write=False)
        object.__setattr__(self, "returns", returns)

    @property
    def n_stocks(self):
        return self.returns.shape[0]

    @property
    def n_days(self):
        return self.returns.shape[1]


def _parse_date(text, line):
    try:
        return date.fromisoformat(text.strip()).isoformat()
    except ValueError:
        raise InputError(f"unparseable date {text!r}", line) from None


def _parse_price(text, line):
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"unparseable close {text!r}", line) from None
    if not math.isfinite(value) or value <= 0:
        raise InputError(f"non-positive or non-finite close {text!r}", line)
    return value


def parse_price_csv(source, date_col="date", ticker_col="ticker", close_col="close"):
    """Parse a long-format price CSV into a (possibly ragged) PricePanel.

    Parameters
    ----------
    source : bytes, binary file object, or text file object
        UTF-8 CSV with a header row.
    date_col, ticker_col, close_col : str
        Header names of the three required columns.

    Returns
    -------
    PricePanel
        Dates sorted ascending, tickers sorted; gaps are NaN.

    Raises
    ------
    InputError
        On a missing column, a malformed row, an unparseable date or price,
        a non-positive price, or a duplicate (date, ticker) pair. Row errors
        carry the 1-based line number of the offending CSV line.
    """
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    if isinstance(source, io.TextIOBase):
        text = source
    else:
        text = io.TextIOWrapper(source, encoding="utf-8", newline="")
    try:
        reader = csv.reader(text)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError("empty CSV (no header row)") from None
        except UnicodeDecodeError as exc:
            raise InputError(f"input is not UTF-8: {exc}") from None
        try:
            i_date = header.index(date_col)
            i_ticker = header.index(ticker_col)
            i_close = header.index(close_col)
        except ValueError:
            raise InputError(
                f"header {header} lacks one of {date_col!r}, {ticker_col!r}, {close_col!r}",
                1,
            ) from None

        records = {}
        try:
            for row in reader:
                line = reader.line_num
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != len(header):
                    raise InputError(
                        f"expected {len(header)} fields, got {len(row)}", line
                    )
                day = _parse_date(row[i_date], line)
                ticker = row[i_ticker].strip()
                if not ticker:
                    raise InputError("empty ticker", line)
                key = (day, ticker)
                if key in records:
                    raise InputError(f"duplicate record for {ticker} on {day}", line)
                records[key] = _parse_price(row[i_close], line)
        except UnicodeDecodeError as exc:
            raise InputError(f"input is not UTF-8: {exc}") from None
        except csv.Error as exc:
            raise InputError(str(exc), reader.line_num) from None
    finally:
        if text is not source:
            text.detach()

    if not records:
        raise InputError("CSV contains no observations")
    dates = sorted({d for d, _ in records})
    tickers = sorted({t for _, t in records})
    d_index = {d: j for j, d in enumerate(dates)}
    t_index = {t: i for i, t in enumerate(tickers)}
    prices = np.full((len(tickers), len(dates)), np.nan)
    for (day, ticker), value in records.items():
        prices[t_index[ticker], d_index[day]] = value
    return PricePanel(tuple(dates), tuple(tickers), prices)


def read_price_csv(path, **columns):
    with open(path, "rb") as fh:
        return parse_price_csv(fh, **columns)


def align_panel(raw, policy="intersect"):
    """Make a panel rectangular.

    ``intersect`` keeps only dates on which every ticker has a price.
    ``ffill`` carries each ticker's last observed close forward; dates before
    every ticker has been observed at least once are dropped. A forward-filled
    day produces a zero return for that ticker, which biases that day's
    volatility estimate downwards.
    """
    if policy not in MISSING_POLICIES:
        raise InputError(f"unknown missing-data policy {policy!r}")
    if raw.n_tickers < 1 or len(raw.dates) < 2:
        raise InputError("panel needs at least 1 ticker and 2 dates")
    prices = np.array(raw.prices)
    observed = ~np.isnan(prices)
    empty = [t for t, row in zip(raw.tickers, observed) if not row.any()]
    if empty:
        raise InputError(f"tickers with no observations: {', '.join(empty)}")

    if policy == "ffill":
        # index of the last observed column at or before each position
        idx = np.where(observed, np.arange(prices.shape[1]), 0)
        np.maximum.accumulate(idx, axis=1, out=idx)
        filled = np.take_along_axis(prices, idx, axis=1)
        started = np.maximum.accumulate(observed, axis=1)
        prices = np.where(started, filled, np.nan)

    keep = ~np.isnan(prices).any(axis=0)
    if keep.sum() < 2:
        raise InputError(
            f"only {int(keep.sum())} date(s) remain after alignment ({policy}); need 2"
        )
    dates = tuple(d for d, k in zip(raw.dates, keep) if k)
    return PricePanel(dates, raw.tickers, prices[:, keep])


def compute_returns(panel):
    """Per-stock daily log returns of a rectangular panel."""
    if not panel.is_rectangular:
        raise InputError("panel has gaps; call align_panel first")
    if len(panel.dates) < 2:
        raise InputError("need at least 2 dates")
    p = panel.prices
    returns = np.log(p[:, 1:] / p[:, :-1])
    return ReturnMatrix(panel.dates[1:], panel.tickers, returns)


def write_price_csv(panel, path, date_col="date", ticker_col="ticker", close_col="close"):
    """Write a panel in the long CSV format read by :func:`parse_price_csv`.

    Floats are written with ``repr`` so a write/read round trip is exact and
    output bytes depend only on the values.
    """
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([date_col, ticker_col, close_col])
        for j, day in enumerate(panel.dates):
            for i, ticker in enumerate(panel.tickers):
                value = panel.prices[i, j]
                if not np.isnan(value):
                    writer.writerow([day, ticker, repr(float(value))])
    os.replace(tmp, path)
