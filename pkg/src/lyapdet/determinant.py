"""Fredholm-determinant coefficients from traces, and the estimators built on them.

With traces ``t_n = tr L^n`` the determinant ``delta(z) = prod(1 + z lambda_j)``
has Taylor coefficients given by the Newton-type recursion

    alpha_0 = 1,   alpha_n = (1/n) sum_{h<n} (-1)**(n-1-h) alpha_h t_{n-h}.

Differentiating in beta (only ``t_n`` depends on it) gives ``alpha'_n``; the
Lyapunov estimate is the ratio of the alternating partial sums
``sum (-1)**i alpha'_i`` and ``sum (-1)**i i alpha_i``.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

import mpmath as mp

from .errors import DegenerateDenominator, Insufficient, NoRoot
from .traces import TraceSequence, orbit_terms, _sum_terms


@dataclass
class DeterminantCoefficients:
    alpha: list
    alpha_prime: list | None = None
    source: str = ""

    @property
    def N(self) -> int:
        return len(self.alpha) - 1


def alpha_recursion(t, N):
    """Coefficients ``alpha_0..alpha_N`` from traces ``t[1..N]`` (``t[0]`` ignored)."""
    alpha = [mp.mpf(1)]
    for n in range(1, N + 1):
        s = mp.mpf(0)
        for h in range(n):
            term = alpha[h] * t[n - h]
            s += term if (n - 1 - h) % 2 == 0 else -term
        alpha.append(s / n)
    return alpha


def alpha_prime_recursion(t, dt, alpha, N):
    ap = [mp.mpf(0)]
    for n in range(1, N + 1):
        s = mp.mpf(0)
        for h in range(n):
            term = ap[h] * t[n - h] + alpha[h] * dt[n - h]
            s += term if (n - 1 - h) % 2 == 0 else -term
        ap.append(s / n)
    return ap


def alpha_by_determinant(t, n):
    """``alpha_n`` as ``det(M)/n!`` with the Hessenberg trace matrix.

    Row ``i`` holds ``t_{i+1}, ..., t_1`` below/on the diagonal and
    ``n - 1 - i`` on the superdiagonal. Independent of the recursion.
    """
    if n == 0:
        return mp.mpf(1)
    M = mp.zeros(n, n)
    for i in range(n):
        for j in range(i + 1):
            M[i, j] = t[i - j + 1]
        if i + 1 < n:
            M[i, i + 1] = n - 1 - i
    return mp.det(M) / mp.factorial(n)


def _check_len(ts: TraceSequence, N):
    if N > ts.n_max:
        raise ValueError(f"need traces up to n={N}, have {ts.n_max}")


def fredholm_coefficients(ts: TraceSequence, N: int) -> DeterminantCoefficients:
    _check_len(ts, N)
    return DeterminantCoefficients(alpha_recursion(ts.t, N), None, ts.fingerprint)


def fredholm_coefficients_derivative(ts: TraceSequence, N: int) -> DeterminantCoefficients:
    _check_len(ts, N)
    alpha = alpha_recursion(ts.t, N)
    return DeterminantCoefficients(alpha, alpha_prime_recursion(ts.t, ts.dt, alpha, N),
                                   ts.fingerprint)


def partial_sums(coeffs: DeterminantCoefficients, n: int):
    """``(sum (-1)^i alpha'_i, sum (-1)^i i alpha_i)`` for ``i = 0..n``."""
    num = mp.mpf(0)
    den = mp.mpf(0)
    for i in range(n + 1):
        sign = 1 if i % 2 == 0 else -1
        num += sign * coeffs.alpha_prime[i]
        den += sign * i * coeffs.alpha[i]
    return num, den


def lyapunov_estimate(coeffs: DeterminantCoefficients, n: int):
    if coeffs.alpha_prime is None:
        raise ValueError("coefficients carry no beta-derivatives")
    if n > coeffs.N:
        raise ValueError(f"coefficients only go up to n={coeffs.N}")
    num, den = partial_sums(coeffs, n)
    if abs(den) < mp.mpf(10) ** (10 - mp.mp.dps):
        raise DegenerateDenominator(f"denominator {mp.nstr(den, 5)} vanishes at n={n}")
    return num / den


def _truncated_delta(alpha, rho):
    f = mp.mpf(0)
    df = mp.mpf(0)
    for n, a in enumerate(alpha):
        sign = 1 if n % 2 == 0 else -1
        f += sign * a * rho ** (-n)
        df -= sign * n * a * rho ** (-n - 1)
    return f, df


def _newton(alpha, rho, tol, maxiter):
    for _ in range(maxiter):
        f, df = _truncated_delta(alpha, rho)
        if df == 0:
            raise NoRoot("zero derivative in Newton iteration")
        step = f / df
        rho -= step
        if abs(step) <= tol * abs(rho):
            return rho
    raise NoRoot(f"Newton did not converge in {maxiter} iterations")


def spectral_radius_from_alpha(alpha, rho0, maxiter: int = 200):
    """Largest positive ``rho`` with ``sum (-1)^n alpha_n rho^-n = 0``.

    Newton from ``rho0``; afterwards a geometric grid above the root is
    scanned and, if the truncated determinant changes sign there, the larger
    root is bracketed by bisection and polished instead.
    """
    tol = mp.mpf(10) ** (10 - mp.mp.dps)
    rho = _newton(alpha, mp.mpf(rho0), tol, maxiter)
    for _ in range(len(alpha)):
        if not rho > 0:
            raise NoRoot(f"root {mp.nstr(rho, 8)} is not positive")
        f_lo = _truncated_delta(alpha, rho * (1 + mp.mpf(2) ** -20))[0]
        lo = rho * (1 + mp.mpf(2) ** -20)
        bracket = None
        for j in range(1, 81):
            hi = rho * mp.mpf(2) ** (j / mp.mpf(4))
            f_hi = _truncated_delta(alpha, hi)[0]
            if mp.sign(f_hi) != mp.sign(f_lo) and f_hi != 0:
                bracket = (lo, hi)
                break
            lo, f_lo = hi, f_hi
        if bracket is None:
            return rho
        a, b = bracket
        fa = _truncated_delta(alpha, a)[0]
        for _ in range(60):
            m = (a + b) / 2
            fm = _truncated_delta(alpha, m)[0]
            if mp.sign(fm) == mp.sign(fa):
                a, fa = m, fm
            else:
                b = m
        rho = _newton(alpha, (a + b) / 2, tol, maxiter)
    raise NoRoot("root selection did not settle")


def pressure_estimate(T, g, c, beta, N: int, terms=None, executor=None):
    """``P(beta) = log rho`` from the determinant truncated at order ``N``.

    ``terms`` may carry precomputed ``orbit_terms`` for ``n = 1..N`` (a list
    indexed from 0) to avoid re-walking the orbits for several betas.
    """
    beta = mp.mpf(beta)
    if abs(beta) > 1:
        raise ValueError("|beta| must be <= 1")
    if terms is None:
        terms = [orbit_terms(T, g, c, n, executor) for n in range(1, N + 1)]
    t_beta = [None] + [_sum_terms(terms[n - 1], beta) for n in range(1, N + 1)]
    t_zero = _sum_terms(terms[0])[0]
    alpha = alpha_recursion(t_beta, N)
    rho = spectral_radius_from_alpha(alpha, t_beta[1] / t_zero)
    return mp.log(rho)


def decay_diagnostic(coeffs: DeterminantCoefficients, c=None, h_top=None):
    """Fit ``-log|alpha_n| ~ k n log n`` and compare with ``(2c - h)/(4h)``.

    Uses the initial run ``n = 1, 2, ...`` while ``|alpha_n| > 10**(15 - dps)``.
    Returns ``(k_fit, k_predicted)``; ``k_predicted`` is None without ``c``.
    """
    floor = mp.mpf(10) ** (15 - mp.mp.dps)
    xs, ys = [], []
    for n in range(1, coeffs.N + 1):
        a = abs(coeffs.alpha[n])
        if not a > floor:
            break
        xs.append(n * math.log(n))
        ys.append(-float(mp.log(a)))
    if len(xs) < 3:
        raise Insufficient(f"only {len(xs)} coefficients above the precision floor")
    slope, _ = statistics.linear_regression(xs, ys)
    predicted = None
    if c is not None and h_top is not None:
        predicted = (2 * float(c) - float(h_top)) / (4 * float(h_top))
    return slope, predicted


@dataclass
class EstimateReport:
    """Per-period Lyapunov estimates plus the error proxies that go with them."""

    gamma: list
    numerators: list
    denominators: list
    alpha: list
    alpha_prime: list
    tail_alpha: object
    tail_alpha_prime: object
    stable_digits: int | None
    k_fit: float | None
    k_predicted: float | None
    config: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.gamma[-1]

    def to_dict(self, digits: int) -> dict:
        fmt = lambda x: mp.nstr(x, digits)  # noqa: E731
        return {
            "config": self.config,
            "rows": [{"n": n, "gamma_est": fmt(gm), "numerator": fmt(nu),
                      "denominator": fmt(de), "alpha": fmt(a), "alpha_prime": fmt(ap)}
                     for n, (gm, nu, de, a, ap) in enumerate(
                         zip(self.gamma, self.numerators, self.denominators,
                             self.alpha[1:], self.alpha_prime[1:]), start=1)],
            "tail_alpha": fmt(self.tail_alpha),
            "tail_alpha_prime": fmt(self.tail_alpha_prime),
            "stable_digits": self.stable_digits,
            "k_fit": self.k_fit,
            "k_predicted": self.k_predicted,
        }


def stable_digits(a, b):
    """Number of agreeing significant decimal digits of two estimates."""
    if a == b:
        return mp.mp.dps
    rel = abs(a - b) / max(abs(a), abs(b))
    return max(0, int(mp.floor(-mp.log10(rel))))


def estimate_report(ts: TraceSequence, N: int, c=None, h_top=None, config=None) -> EstimateReport:
    coeffs = fredholm_coefficients_derivative(ts, N)
    gam, nums, dens = [], [], []
    for n in range(1, N + 1):
        num, den = partial_sums(coeffs, n)
        nums.append(num)
        dens.append(den)
        gam.append(lyapunov_estimate(coeffs, n))
    try:
        k_fit, k_pred = decay_diagnostic(coeffs, c, h_top)
    except Insufficient:
        k_fit, k_pred = None, None
        if c is not None and h_top is not None:
            k_pred = (2 * float(c) - float(h_top)) / (4 * float(h_top))
    return EstimateReport(
        gamma=gam, numerators=nums, denominators=dens,
        alpha=coeffs.alpha, alpha_prime=coeffs.alpha_prime,
        tail_alpha=abs(coeffs.alpha[N]), tail_alpha_prime=abs(coeffs.alpha_prime[N]),
        stable_digits=stable_digits(gam[-1], gam[-2]) if N >= 2 else None,
        k_fit=k_fit, k_predicted=k_pred, config=dict(config or {}),
    )
