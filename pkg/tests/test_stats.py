import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special, stats

from tsart import _stats


@given(st.floats(0.5, 50), st.floats(0.5, 200), st.floats(0, 1))
def test_betainc_matches_scipy(a, b, x):
    assert _stats.betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-8)


@given(st.floats(0, 50), st.integers(1, 10), st.integers(1, 400))
def test_f_sf_matches_scipy(f, d1, d2):
    assert _stats.f_sf(f, d1, d2) == pytest.approx(stats.f.sf(f, d1, d2), abs=1e-8)


def test_ols_matches_lstsq():
    rng = np.random.default_rng(0)
    X = np.column_stack([np.ones(30), rng.normal(size=(30, 2))])
    y = rng.normal(size=30)
    beta, resid = _stats.ols(X, y)
    ref = np.linalg.lstsq(X, y, rcond=None)[0]
    assert beta == pytest.approx(ref)
    assert resid == pytest.approx(y - X @ ref)


def test_ols_singular():
    X = np.column_stack([np.ones(10), np.ones(10)])
    with pytest.raises(_stats.SingularDesignError):
        _stats.ols(X, np.arange(10.0))


def test_adf_critical_value_asymptote():
    assert _stats.adf_critical_value(10**9) == pytest.approx(-2.86154, abs=1e-4)
    assert _stats.adf_critical_value(100) < _stats.adf_critical_value(10**6)
