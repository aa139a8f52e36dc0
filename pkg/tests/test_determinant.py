import random

import mpmath as mp
import pytest

from lyapdet.cocycle import ConstantCocycle, ConstantG, TableCocycle, paper_example
from lyapdet.determinant import (
    DeterminantCoefficients,
    alpha_by_determinant,
    alpha_recursion,
    decay_diagnostic,
    estimate_report,
    fredholm_coefficients,
    fredholm_coefficients_derivative,
    lyapunov_estimate,
    pressure_estimate,
)
from lyapdet.errors import DegenerateDenominator, Insufficient
from lyapdet.sft import TransitionMatrix
from lyapdet.traces import TraceSequence, compute_traces, orbit_terms, _sum_terms

FULL2 = TransitionMatrix.full(2)
HALF = ConstantG("1/2")


def seq(t, dt=None):
    n = len(t)
    return TraceSequence(n, [None] + list(t), [None] + list(dt or [mp.mpf(0)] * n), "synthetic")


def product_coefficients(eigs):
    """Coefficients of prod (1 + z lambda) by direct polynomial multiplication."""
    poly = [mp.mpc(1)]
    for lam in eigs:
        poly = [a + (lam * poly[i - 1] if i else 0) for i, a in enumerate(poly + [mp.mpc(0)])]
    return poly


@pytest.fixture(scope="module")
def example_traces():
    with mp.workdps(64):
        T, g, c = paper_example()
        return compute_traces(T, g, c, 12)


def test_diagonal_example():
    t = [mp.mpf(2) ** -n + mp.mpf(4) ** -n for n in range(1, 7)]
    a = fredholm_coefficients(seq(t), 6).alpha
    assert a[0] == 1
    assert abs(a[1] - mp.mpf(3) / 4) < mp.eps * 4
    assert abs(a[2] - mp.mpf(1) / 8) < mp.eps * 4
    assert all(abs(x) < mp.eps * 10 for x in a[3:])


def test_zero_traces():
    coeffs = fredholm_coefficients_derivative(seq([mp.mpf(0)] * 5), 5)
    assert coeffs.alpha == [1, 0, 0, 0, 0, 0]
    assert coeffs.alpha_prime == [0] * 6
    with pytest.raises(DegenerateDenominator):
        lyapunov_estimate(coeffs, 3)


def test_derivative_base_case():
    c = fredholm_coefficients_derivative(seq([mp.mpf("0.7")], [mp.mpf("0.3")]), 1)
    assert c.alpha_prime == [0, mp.mpf("0.3")]


def test_too_short_sequence():
    with pytest.raises(ValueError):
        fredholm_coefficients(seq([mp.mpf(1)] * 3), 4)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_finite_rank_against_product(d):
    rng = random.Random(100 + d)
    M = mp.matrix([[mp.mpf(rng.uniform(-1, 1)) for _ in range(d)] for _ in range(d)])
    N = d + 3
    t, P = [], mp.eye(d)
    for _ in range(N):
        P = P * M
        t.append(sum(P[i, i] for i in range(d)))
    alpha = fredholm_coefficients(seq(t), N).alpha
    expected = product_coefficients(mp.eig(M, left=False, right=False))
    tol = mp.mpf(10) ** (15 - mp.mp.dps)
    for n in range(N + 1):
        ref = expected[n] if n <= d else 0
        assert abs(alpha[n] - ref) <= tol


def test_recursion_matches_determinant_formula(example_traces):
    alpha = fredholm_coefficients(example_traces, 8).alpha
    for n in range(9):
        assert abs(alpha[n] - alpha_by_determinant(example_traces.t, n)) <= mp.mpf(10) ** (15 - mp.mp.dps)


def test_alpha_prime_against_richardson(example_traces):
    # two-step Richardson extrapolation of central differences, computed with guard digits
    coeffs = fredholm_coefficients_derivative(example_traces, 6)
    T, g, c = paper_example()
    h = mp.mpf(10) ** -(mp.mp.dps // 3)
    with mp.workdps(3 * mp.mp.dps):
        terms = [orbit_terms(T, g, c, n) for n in range(1, 7)]

        def alpha_at(beta):
            return alpha_recursion([None] + [_sum_terms(x, beta) for x in terms], 6)

        d1 = [(p - m) / (2 * h) for p, m in zip(alpha_at(h), alpha_at(-h))]
        d2 = [(p - m) / h for p, m in zip(alpha_at(h / 2), alpha_at(-h / 2))]
        rich = [(4 * b - a) / 3 for a, b in zip(d1, d2)]
    # the recursion cancels O(1) terms, so the reference is good to an absolute floor
    tol = mp.mpf(10) ** (10 - mp.mp.dps)
    for n in range(1, 7):
        assert abs(rich[n] - coeffs.alpha_prime[n]) <= tol


def test_example_rows(example_traces):
    coeffs = fredholm_coefficients_derivative(example_traces, 5)
    assert abs(lyapunov_estimate(coeffs, 1) - mp.mpf("1.09308925851915")) < mp.mpf("1e-14")
    assert abs(lyapunov_estimate(coeffs, 3) - mp.mpf("1.11336708955451")) < mp.mpf("1e-14")
    assert abs(lyapunov_estimate(coeffs, 5) - mp.mpf("1.11336692026723")) < mp.mpf("1e-14")
    assert coeffs.alpha[1] == example_traces.t[1] and coeffs.alpha_prime[1] == example_traces.dt[1]


def test_constant_cocycle_converges_to_log_lambda():
    ts = compute_traces(FULL2, HALF, ConstantCocycle([[2, 1], [1, 1]]), 8)
    gamma = lyapunov_estimate(fredholm_coefficients_derivative(ts, 8), 8)
    assert abs(gamma - mp.log((3 + mp.sqrt(5)) / 2)) < mp.mpf("1e-10")


def test_scalar_cocycle_is_bernoulli_average():
    ts = compute_traces(FULL2, HALF, TableCocycle(1, {"0": [[2]], "1": [[3]]}), 8)
    gamma = lyapunov_estimate(fredholm_coefficients_derivative(ts, 8), 8)
    assert abs(gamma - mp.log(6) / 2) < mp.mpf("1e-10")


def test_pressure_examples():
    T, g, c = paper_example()
    terms = [orbit_terms(T, g, c, n) for n in range(1, 9)]
    assert abs(pressure_estimate(T, g, c, 0, 8, terms)) < mp.mpf("1e-40")
    h = mp.mpf("1e-8")
    slope = (pressure_estimate(T, g, c, h, 8, terms) - pressure_estimate(T, g, c, -h, 8, terms)) / (2 * h)
    assert abs(slope - mp.mpf("1.11336692026723")) < mp.mpf("1e-7")
    scalar = TableCocycle(1, {"0": [[2]], "1": [[3]]})
    assert abs(pressure_estimate(FULL2, HALF, scalar, 1, 6) - mp.log(mp.mpf("2.5"))) < mp.mpf("1e-50")
    with pytest.raises(ValueError):
        pressure_estimate(T, g, c, 2, 4, terms)


def test_pressure_is_convex_in_beta():
    T, g, c = paper_example(literal=True)
    terms = [orbit_terms(T, g, c, n) for n in range(1, 9)]
    vals = [pressure_estimate(T, g, c, b, 8, terms) for b in (-1, -0.5, 0, 0.5, 1)]
    assert all(vals[i - 1] + vals[i + 1] - 2 * vals[i] > 0 for i in range(1, 4))


def test_decay_fit_synthetic():
    alpha = [mp.mpf(1)] + [mp.mpf(n) ** (-2 * n) for n in range(1, 13)]
    k_fit, k_pred = decay_diagnostic(DeterminantCoefficients(alpha), c=2.0, h_top=mp.log(2))
    assert abs(k_fit - 2) < 0.05
    assert abs(k_pred - (4 - float(mp.log(2))) / (4 * float(mp.log(2)))) < 1e-12


def test_decay_fit_finite_rank_is_insufficient():
    with pytest.raises(Insufficient):
        decay_diagnostic(DeterminantCoefficients([mp.mpf(1), mp.mpf("0.75"), mp.mpf("0.125"), 0, 0, 0]))


def test_example_decay(example_traces):
    with mp.workdps(160):
        T, g, c = paper_example()
        ts = compute_traces(T, g, c, 12)
        coeffs = fredholm_coefficients(ts, 12)
        mags = [abs(a) for a in coeffs.alpha]
        assert all(mags[n] > mags[n + 1] for n in range(2, 12))
        k_fit, _ = decay_diagnostic(coeffs)
        assert k_fit > 0


def test_report_fields(example_traces):
    rep = estimate_report(example_traces, 8, c=3.0, h_top=mp.log(2), config={"k": 1})
    assert len(rep.gamma) == 8 and rep.final == rep.gamma[-1]
    assert rep.stable_digits >= 15
    assert rep.tail_alpha == abs(rep.alpha[8])
    assert rep.k_predicted is not None and rep.config == {"k": 1}
    d = rep.to_dict(20)
    assert d["rows"][4]["gamma_est"].startswith("1.11336692026722")
