import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from obsvol import (
    SQRT3,
    InputError,
    PricePanel,
    ReturnMatrix,
    WeightScheme,
    build_index_series,
    compute_returns,
    index_return,
    observable_volatility,
    residual_series,
)

returns_matrices = arrays(
    float,
    st.tuples(st.integers(1, 12), st.integers(1, 30)),
    elements=st.floats(-0.3, 0.3, allow_subnormal=False),
)


def rm_of(x):
    n, t = x.shape
    return ReturnMatrix(tuple(str(i) for i in range(t)), tuple(f"S{i}" for i in range(n)), x)


def test_two_stock_hand_values():
    x = np.array([[0.02], [-0.02]])
    assert index_return(x)[0] == 0.0
    # 0.02 / sqrt(3) = 0.011547005383792516
    assert observable_volatility(x)[0] == pytest.approx(0.02 / math.sqrt(3), rel=1e-15)
    assert observable_volatility(x)[0] == pytest.approx(0.0115470, abs=5e-8)
    omega, valid = residual_series(index_return(x), observable_volatility(x))
    assert valid[0] and omega[0] == 0.0


def test_all_same_sign_hits_the_bound():
    x = np.array([[0.01, -0.03], [0.02, -0.01], [0.03, -0.02]])
    ix = build_index_series(rm_of(x))
    np.testing.assert_allclose(ix.omega, [SQRT3, -SQRT3], rtol=1e-15)


def test_flat_day_is_masked():
    x = np.array([[0.0, 0.01], [0.0, -0.02]])
    ix = build_index_series(rm_of(x))
    assert ix.valid.tolist() == [False, True]
    assert ix.omega[0] == 0.0 and ix.n_valid == 1


def test_residual_length_mismatch():
    with pytest.raises(InputError):
        residual_series(np.zeros(3), np.ones(4))


def test_price_weights_use_previous_close():
    prices = np.array([[10.0, 11.0, 12.1], [30.0, 27.0, 27.0]])
    panel = PricePanel(("a", "b", "c"), ("A", "B"), prices)
    rm = compute_returns(panel)
    r = index_return(rm, WeightScheme.price(panel))
    w0 = np.array([10.0, 30.0]) / 40.0
    w1 = np.array([11.0, 27.0]) / 38.0
    expected = [w0 @ rm.returns[:, 0], w1 @ rm.returns[:, 1]]
    np.testing.assert_allclose(r, expected, rtol=1e-14)


def test_weight_scheme_validation():
    with pytest.raises(InputError):
        WeightScheme.explicit(np.array([[1.0, -1.0]]))
    with pytest.raises(InputError):
        WeightScheme.explicit(np.zeros((2, 2)))
    with pytest.raises(InputError):
        WeightScheme("cap-ish", np.ones((1, 1)))
    w = WeightScheme.explicit(np.ones((2, 3)))
    with pytest.raises(InputError):
        w.normalized((2, 4))


def test_explicit_uniform_weights_match_equal():
    x = np.random.default_rng(3).normal(0, 0.01, (5, 40))
    a = build_index_series(rm_of(x))
    b = build_index_series(rm_of(x), WeightScheme.explicit(np.full((5, 40), 7.0)))
    np.testing.assert_allclose(a.sigma, b.sigma, rtol=1e-14)
    np.testing.assert_allclose(a.omega, b.omega, rtol=1e-12, atol=1e-14)


@settings(max_examples=200, deadline=None)
@given(returns_matrices)
def test_identities_hold(x):
    ix = build_index_series(rm_of(x))
    v = ix.valid
    np.testing.assert_allclose(ix.r[v], ix.sigma[v] * ix.omega[v], rtol=0, atol=1e-12)
    assert np.all(np.abs(ix.omega) <= SQRT3 * (1 + 1e-12))
    assert np.all(ix.sigma >= 0)
    if v.any():
        lhs = np.mean(ix.r[v] ** 2)
        rhs = np.mean(ix.sigma[v] ** 2 * ix.omega[v] ** 2)
        assert abs(lhs - rhs) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(returns_matrices, st.randoms(use_true_random=False))
def test_permutation_invariance(x, rnd):
    perm = list(range(x.shape[0]))
    rnd.shuffle(perm)
    a = build_index_series(rm_of(x))
    b = build_index_series(rm_of(x[perm]))
    np.testing.assert_allclose(a.r, b.r, atol=1e-15)
    np.testing.assert_allclose(a.sigma, b.sigma, atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(returns_matrices, st.floats(0.01, 100))
def test_scaling_leaves_omega_unchanged(x, c):
    a = build_index_series(rm_of(x))
    b = build_index_series(rm_of(x * c))
    np.testing.assert_allclose(b.sigma, c * a.sigma, rtol=1e-12, atol=1e-300)
    both = a.valid & b.valid
    np.testing.assert_allclose(a.omega[both], b.omega[both], rtol=1e-9, atol=1e-12)
