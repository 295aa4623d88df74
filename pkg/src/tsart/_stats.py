"""Small numerical kernels shared by the statistical tools."""

from __future__ import annotations

import math

import numpy as np

# MacKinnon (2010) response-surface coefficients, constant-only ADF regression:
# c(n) = b_inf + b1/n + b2/n^2 + b3/n^3
ADF_CRITICAL_CONSTANT = {
    "1%": (-3.43035, -6.5393, -16.786, -79.433),
    "5%": (-2.86154, -2.8903, -4.234, -40.040),
    "10%": (-2.56677, -1.5384, -2.809, 0.0),
}

# Kwiatkowski et al. (1992) level-stationarity critical values
KPSS_CRITICAL_LEVEL = {"10%": 0.347, "5%": 0.463, "2.5%": 0.574, "1%": 0.739}


def adf_critical_value(nobs: int, level: str = "5%") -> float:
    b_inf, b1, b2, b3 = ADF_CRITICAL_CONSTANT[level]
    n = float(nobs)
    return b_inf + b1 / n + b2 / n**2 + b3 / n**3


class SingularDesignError(ValueError):
    pass


def ols(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least squares via QR; returns (coefficients, residuals)."""
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag.min() <= 1e-10 * max(diag.max(), 1.0):
        raise SingularDesignError("singular design matrix")
    beta = np.linalg.solve(r, q.T @ y)
    return beta, y - X @ beta


def ols_tstat(X: np.ndarray, y: np.ndarray, column: int) -> float:
    beta, resid = ols(X, y)
    n, k = X.shape
    sigma2 = float(resid @ resid) / (n - k)
    _, r = np.linalg.qr(X)
    r_inv = np.linalg.inv(r)
    # (X'X)^-1 = R^-1 R^-T
    var = sigma2 * float(r_inv[column] @ r_inv[column])
    return float(beta[column]) / math.sqrt(var)


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, 1000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a > 0 and b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def f_sf(f: float, d1: float, d2: float) -> float:
    """Upper tail P(F > f) of the F(d1, d2) distribution."""
    if f <= 0.0:
        return 1.0
    return betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
