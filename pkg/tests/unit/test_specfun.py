import logging

import mpmath
import numpy as np
import pytest

from csslab.specfun import (
    MatchingError,
    PoleError,
    SelfSimilarODE,
    connection,
    connection_alpha_closed,
    connection_p,
    eval_e1,
    eval_f1,
    eval_f2,
    gamma_complex,
    kummer_m,
    kummer_ray,
    kummer_terms,
    series_coeffs,
)


@pytest.mark.parametrize("z", [0.5, 3.0, 7.25, 1 + 2j, 0.3 - 4j, -2.5 + 0.1j, 12 + 0.5j])
def test_gamma_matches_mpmath(z):
    assert gamma_complex(z) == pytest.approx(complex(mpmath.gamma(z)), rel=1e-12)


@pytest.mark.parametrize("z", [0, -1, -7])
def test_gamma_poles(z):
    with pytest.raises(PoleError):
        gamma_complex(z)


@pytest.mark.parametrize(
    "a, c, z",
    [
        (0.5, 3, 2j),
        (-0.25 + 0.5j, 3, 8j),
        (1.5 - 0.5j, 3, -6 + 1j),
        (-1, 3, 5j),
    ],
)
def test_kummer_series_matches_mpmath(a, c, z):
    assert kummer_m(a, c, z) == pytest.approx(complex(mpmath.hyp1f1(a, c, z)), rel=1e-10)


@pytest.mark.parametrize("a", [0.5, -0.25 + 0.5j])
def test_kummer_continuation_matches_mpmath(a):
    rho = np.array([4.0, 12.0, 20.0, 40.0])
    values, derivs = kummer_ray(a, 3, 1j, rho)
    for r, v, dv in zip(rho, values, derivs):
        z = 1j * r
        assert v == pytest.approx(complex(mpmath.hyp1f1(a, 3, z)), rel=1e-8)
        assert dv == pytest.approx(complex(a / 3 * mpmath.hyp1f1(a + 1, 4, z)), rel=1e-8)


def test_kummer_terms_sum_to_series():
    terms = kummer_terms(0.5, 3, 1.5j, 60)
    assert sum(terms) == pytest.approx(kummer_m(0.5, 3, 1.5j), rel=1e-13)


def test_kummer_rejects_pole_in_c():
    with pytest.raises(PoleError):
        kummer_m(1.0, -2, 1j)


def test_ode_requires_nonzero_index():
    with pytest.raises(ValueError):
        SelfSimilarODE(2.0, 0)


def _residual(ode: SelfSimilarODE, y, value, deriv, d2):
    return np.abs(ode.residual(y, value, deriv, d2)) / np.abs(value)


@pytest.mark.parametrize("nu", [2.0, 1 + 0.5j])
def test_regular_solution_solves_ode(nu):
    ode = SelfSimilarODE(nu)
    y = np.linspace(0.5, 6.0, 12)
    h = 1e-4
    value, deriv = eval_e1(y, nu)
    _, d_plus = eval_e1(y + h, nu)
    _, d_minus = eval_e1(y - h, nu)
    assert np.max(_residual(ode, y, value, deriv, (d_plus - d_minus) / (2 * h))) < 1e-6


@pytest.mark.parametrize("kind", ["f1", "f2"])
def test_asymptotic_series_solve_ode_at_large_argument(kind):
    nu = 1 + 0.5j
    ode = SelfSimilarODE(nu)
    evaluate = eval_f1 if kind == "f1" else eval_f2
    y = np.linspace(12.0, 16.0, 9)
    h = 1e-4
    value, deriv = evaluate(y, nu)
    _, d_plus = evaluate(y + h, nu)
    _, d_minus = evaluate(y - h, nu)
    assert np.max(_residual(ode, y, value, deriv, (d_plus - d_minus) / (2 * h))) < 1e-5


def test_series_coefficients_start_at_one():
    series = series_coeffs("f1", 2.0)
    assert series.coeffs[0] == 1
    # f₁ terminates when ν − 2n + 2 = ±𝔪
    assert series.coeffs[1] == pytest.approx(0)


def test_series_order_must_be_positive():
    with pytest.raises(ValueError):
        series_coeffs("f2", 2.0, order=0)


@pytest.mark.parametrize("kind", ["f1", "f2"])
def test_asymptotic_series_warn_below_validity_radius(kind, caplog):
    evaluate = eval_f1 if kind == "f1" else eval_f2
    edge = series_coeffs(kind, 1 + 0.5j).valid_from()
    assert 1.0 < edge < 10.0
    with caplog.at_level(logging.WARNING, logger="csslab.specfun"):
        evaluate(np.array([12.0, 16.0]), 1 + 0.5j)
    assert "validity radius" not in caplog.text
    with caplog.at_level(logging.WARNING, logger="csslab.specfun"):
        evaluate(np.array([0.5 * edge, 12.0]), 1 + 0.5j)
    assert "validity radius" in caplog.text


def test_terminating_and_regular_series_never_warn(caplog):
    assert series_coeffs("e1", 2.0).valid_from() == 0.0
    with caplog.at_level(logging.WARNING, logger="csslab.specfun"):
        eval_f1(np.array([0.5, 1.0]), 2.0)
        eval_e1(np.array([0.5, 1.0]), 2.0)
    assert "validity radius" not in caplog.text


def test_connection_p():
    assert connection_p(2.0) == pytest.approx(1.0)
    assert connection_p(4.0) == pytest.approx(3.0)


@pytest.mark.parametrize("nu", [1.0, 2.0, 3.0, 1 + 0.5j, 2 - 1j])
def test_connection_fit(nu):
    conn = connection(complex(nu))
    assert conn.residual <= 1e-6
    assert conn.kappa_error <= 1e-6
    closed = connection_alpha_closed(nu)
    assert abs(conn.alpha - closed) <= 1e-5 * max(abs(closed), 1.0)


def test_alpha_vanishes_for_terminating_series():
    assert connection_alpha_closed(2.0) == 0


def test_connection_reports_poor_fit():
    with pytest.raises(MatchingError) as info:
        connection(1 + 0.5j, max_residual=1e-300)
    assert info.value.residual > 0
