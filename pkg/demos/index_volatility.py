"""
Reading the market's volatility off a single day
================================================

A walk from a panel of stock returns to the three daily index series:
return r(t), observable volatility sigma(t) and residual omega(t).
We use a synthetic market so the hidden volatility is known.
"""

import numpy as np

from obsvol import SQRT3, SynthConfig, build_index_series, gen_market, oracle_compare

# 65 stocks over 2000 trading days, driven by one lognormal volatility factor
panel = gen_market(SynthConfig(n_stocks=65, n_days=2000, seed=1))
rm = panel.returns
print(f"{rm.n_stocks} stocks x {rm.n_days} days, first day {rm.dates[0]}")

# The index return is the cross-sectional mean. The volatility estimate uses
# the same day's absolute returns and needs no rolling window.
ix = build_index_series(rm)
day = 100
print(f"day {ix.dates[day]}: r = {ix.r[day]:+.5f}  sigma = {ix.sigma[day]:.5f}  omega = {ix.omega[day]:+.3f}")

# The factorisation r = sigma * omega is exact, and omega can never leave
# [-sqrt(3), sqrt(3)]: |mean r| <= mean |r|.
assert np.allclose(ix.r, ix.sigma * ix.omega, atol=1e-15)
print(f"largest |omega| = {np.abs(ix.omega).max():.4f} (bound {SQRT3:.4f})")

# The estimate tracks the hidden factor at half its level, because each
# stock's residual is uniform with E|omega| = sqrt(3)/2.
oc = oracle_compare(ix.sigma, panel.sigma_true)
print(f"corr(sigma_hat, sigma_true) = {oc.pearson:.3f}, sigma_hat/sigma_true = {oc.ratio_mean:.3f} +/- {oc.ratio_cv:.3f}")

# Residual moments should look like a uniform variable on [-sqrt(3), sqrt(3)]
print(f"<|omega|> = {np.abs(ix.omega).mean():.3f} (sqrt(3)/2 = {SQRT3 / 2:.3f}), <omega^2> = {np.mean(ix.omega**2):.3f}")

try:
    import matplotlib.pyplot as plt
except ImportError:
    raise SystemExit(0)

fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
top.plot(panel.sigma_true / 2, lw=0.8, label="sigma_true / 2")
top.plot(ix.sigma, lw=0.5, alpha=0.7, label="observable sigma")
top.legend(loc="upper right")
bottom.plot(ix.omega, ",", color="k")
bottom.axhline(SQRT3, ls="--", lw=0.5)
bottom.axhline(-SQRT3, ls="--", lw=0.5)
bottom.set_ylabel("omega")
bottom.set_xlabel("day")
fig.savefig("index_volatility.png", dpi=120)
