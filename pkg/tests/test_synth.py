import numpy as np
import pytest

from obsvol import (
    SQRT3,
    InputError,
    SynthConfig,
    build_index_series,
    compute_returns,
    cross_correlation,
    gen_market,
    gen_volatility_path,
    oracle_compare,
    read_price_csv,
    rescale_check,
    sample_moments,
    compute_k,
    uniformity_test,
    write_synth,
)


def test_log_volatility_autocorrelation_matches_ar1():
    # closed form: corr(ln s(t), ln s(t + 250)) = 0.99^250 = 0.0811
    target = 0.99**250
    acf = []
    for seed in range(10):
        s = gen_volatility_path(SynthConfig(n_days=100000, vol_phi=0.99, vol_scale=0.1, seed=seed))
        acf.append(cross_correlation(np.log(s), np.log(s), tau_max=250).values[250])
    assert np.mean(acf) == pytest.approx(target, abs=0.03)


def test_volatility_path_is_stationary_from_the_start():
    cfg = SynthConfig(n_days=200, vol_phi=0.95, vol_scale=0.2)
    first = np.array([np.log(gen_volatility_path(SynthConfig(**{**cfg.to_dict(), "seed": s}))[0]) for s in range(2000)])
    assert first.mean() == pytest.approx(cfg.vol_mu, abs=0.05)
    assert first.std() == pytest.approx(0.2 / np.sqrt(1 - 0.95**2), rel=0.06)


def test_constant_volatility():
    s = gen_volatility_path(SynthConfig(n_days=50, vol_model="constant", vol_level=0.02))
    assert np.all(s == 0.02)


def test_index_residual_recovers_market_draw(small_market):
    ix = build_index_series(small_market.returns)
    assert ix.valid.all()
    np.testing.assert_allclose(ix.omega, small_market.omega_market, atol=1e-9)
    assert np.all(np.abs(small_market.residuals) <= SQRT3 + 1e-12)


def test_ratio_spread_matches_concentration_bound():
    # sd of (1/sqrt(3)) mean|U| over 65 uniforms, relative to its mean:
    # Var|U| = 1 - 3/4 = 1/4, E|U| = sqrt(3)/2, so sqrt(1/3)/sqrt(65) = 0.0716
    rng = np.random.default_rng(99)
    mc = np.abs(rng.uniform(-SQRT3, SQRT3, (65, 200000))).mean(axis=0)
    assert mc.std() / mc.mean() == pytest.approx(np.sqrt(1 / 3) / np.sqrt(65), rel=0.02)
    panel = gen_market(SynthConfig(seed=3))
    oc = oracle_compare(build_index_series(panel.returns).sigma, panel.sigma_true)
    assert oc.ratio_cv == pytest.approx(0.0716, rel=0.1)
    assert oc.ratio_mean == pytest.approx(0.5, rel=0.03)


def test_pearson_floor_over_seeds():
    pearson = []
    for seed in range(20):
        panel = gen_market(SynthConfig(seed=seed))
        pearson.append(oracle_compare(build_index_series(panel.returns).sigma, panel.sigma_true).pearson)
    assert min(pearson) >= 0.97


def test_gaussian_residual_is_caught_by_ks():
    panel = gen_market(SynthConfig(n_days=5000, vol_model="constant", residual="gaussian", seed=1))
    ix = build_index_series(panel.returns)
    rep = uniformity_test(ix.omega, n_sim=300)
    assert abs(float(ix.omega.mean())) < 0.05
    # clipped normal: E[min(Z^2, 3)] = 0.857
    assert rep.mean_sq_omega == pytest.approx(0.857, abs=0.04)
    assert not rep.passes


def test_independent_signs_collapse_the_residual():
    panel = gen_market(SynthConfig(n_days=3000, coupling="independent", seed=2))
    ix = build_index_series(panel.returns)
    assert np.isnan(panel.omega_market).all()
    # sqrt(3) * mean(s|U|) / mean(|U|) has variance 3 E[U^2] / (N E|U|^2) = 4 / N
    assert float(np.mean(ix.omega**2)) == pytest.approx(4 / 65, rel=0.1)


def test_idiosyncratic_dispersion_has_unit_mean():
    panel = gen_market(SynthConfig(n_stocks=30, n_days=4000, idio_scale=0.3, seed=4))
    assert panel.dispersion.mean() == pytest.approx(1.0, abs=0.01)
    ix = build_index_series(panel.returns)
    np.testing.assert_allclose(ix.omega, panel.omega_market, atol=1e-9)


def test_generation_is_deterministic():
    cfg = SynthConfig(n_stocks=10, n_days=300, seed=11)
    a, b = gen_market(cfg), gen_market(cfg)
    assert np.array_equal(a.returns.returns, b.returns.returns)
    c = gen_market(SynthConfig(n_stocks=10, n_days=300, seed=12))
    assert not np.array_equal(a.returns.returns, c.returns.returns)
    # the volatility path has its own substream, so it ignores the panel width
    d = gen_market(SynthConfig(n_stocks=11, n_days=300, seed=11))
    assert np.array_equal(a.sigma_true, d.sigma_true)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_stocks=0),
        dict(n_days=1),
        dict(vol_phi=1.0),
        dict(vol_scale=-1.0),
        dict(residual="cauchy"),
        dict(coupling="none"),
        dict(vol_model="garch"),
        dict(seed=-1),
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(InputError):
        SynthConfig(**kwargs)


def test_written_panel_reproduces_returns(tmp_path):
    panel = gen_market(SynthConfig(n_stocks=4, n_days=30, seed=5))
    prices_path, sigma_path = write_synth(panel, tmp_path)
    rm = compute_returns(read_price_csv(prices_path))
    assert rm.dates == panel.returns.dates
    np.testing.assert_allclose(rm.returns, panel.returns.returns, atol=1e-12)
    lines = open(sigma_path).read().splitlines()
    assert lines[0] == "date,sigma_true" and len(lines) == 31


def test_oracle_compare_validation():
    with pytest.raises(InputError):
        oracle_compare(np.ones(3), np.ones(4))
    with pytest.raises(InputError):
        oracle_compare(np.ones(3), np.array([1.0, 0.0, 1.0]))


def test_rescale_discrepancy_shrinks_with_sample_length():
    def disc(T, seed):
        panel = gen_market(SynthConfig(n_days=T, seed=seed))
        ix = build_index_series(panel.returns)
        s, a = ix.sigma, ix.abs_r
        curves = [
            cross_correlation(a, a, tau_max=250),
            cross_correlation(s, a, tau_max=250),
            cross_correlation(a, s, tau_max=250),
            cross_correlation(s, s, tau_max=250),
        ]
        k = compute_k(sample_moments(s))
        return rescale_check(*curves, k).max_discrepancy

    means = [np.mean([disc(T, seed) for seed in range(3)]) for T in (1000, 10000, 100000)]
    assert means[0] > means[1] > means[2]
