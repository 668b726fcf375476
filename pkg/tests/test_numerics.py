"""Quadrature, warping IVP, and gamma function against closed forms.

Expected values come from elementary antiderivatives, math.gamma, and the
frozen high-precision IVP oracles in tests/_oracles.py.
"""

import math

import pytest

from radsob.numerics import (
    DEFAULT_QUADRATURE,
    OdeError,
    QuadratureConfig,
    QuadratureError,
    beta_function,
    gamma,
    integrate_finite,
    integrate_semi_infinite,
    solve_h_ivp,
    with_tail_split,
)

from _oracles import RATIONAL_B1_H, RATIONAL_B1_HP, SINH_1

try:
    from hypothesis import given, settings, strategies as st

    HAS_HYPOTHESIS = True
except ImportError:
    HAS_HYPOTHESIS = False


def test_finite_rational_kernel_exact():
    """integral over [0, 1] of t^3/(1+t^2)^4 equals 1/24."""
    got = integrate_finite(lambda t: t**3 / (1.0 + t * t) ** 4, 0.0, 1.0)
    exact = 1.0 / 24.0
    assert abs(got - exact) / exact < 1e-12, f"got {got!r}, want {exact!r}"


def test_finite_shift_invariance():
    f = lambda t: t**3 / (1.0 + t * t) ** 4
    base = integrate_finite(f, 0.0, 1.0)
    shifted = integrate_finite(lambda x: f(x - 2.0), 2.0, 3.0)
    assert abs(base - shifted) < 1e-13, f"shifted integral drifted: {base!r} vs {shifted!r}"


def test_finite_small_scale_keeps_relative_accuracy():
    """A 1e-9-sized integrand must still come out to ~rel_tol accuracy."""
    c = 1e-9
    got = integrate_finite(lambda t: c * t**3 / (1.0 + t * t) ** 4, 0.0, 1.0)
    exact = c / 24.0
    assert abs(got - exact) / exact < 1e-10, f"relative error {abs(got - exact) / exact:.3e}"


def test_finite_degenerate_and_invalid_intervals():
    assert integrate_finite(math.sin, 2.0, 2.0) == 0.0
    with pytest.raises(ValueError):
        integrate_finite(math.sin, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate_finite(math.sin, 0.0, math.inf)


def test_power_at_zero_sliver():
    """integral over [0, 1] of t^(-1/2) equals 2 via the analytic sliver."""
    got = integrate_finite(lambda t: t**-0.5, 0.0, 1.0, power_at_zero=-0.5)
    assert abs(got - 2.0) < 1e-10, f"got {got!r}"
    with pytest.raises(ValueError):
        integrate_finite(lambda t: t**-1.5, 0.0, 1.0, power_at_zero=-1.5)


def test_semi_infinite_declared_decay():
    """integral over [0, inf) of t^5/(1+t^2)^4 equals 1/6."""
    got = integrate_semi_infinite(
        lambda t: t**5 / (1.0 + t * t) ** 4, decay_power=3.0
    )
    exact = 1.0 / 6.0
    assert abs(got - exact) / exact < 1e-10, f"got {got!r}, want {exact!r}"


def test_semi_infinite_fitted_decay():
    """Without a declared power the tail behaviour is fitted from samples."""
    got = integrate_semi_infinite(lambda t: t**5 / (1.0 + t * t) ** 4)
    exact = 1.0 / 6.0
    assert abs(got - exact) / exact < 1e-8, f"got {got!r}, want {exact!r}"


def test_semi_infinite_start_offset():
    """integral over [1, inf) of t^-3 equals 1/2."""
    got = integrate_semi_infinite(lambda t: t**-3.0, start=1.0, decay_power=3.0)
    assert abs(got - 0.5) < 1e-11, f"got {got!r}"
    with pytest.raises(ValueError):
        integrate_semi_infinite(lambda t: t**-3.0, start=-1.0)


def test_semi_infinite_slow_tail_refused():
    with pytest.raises(QuadratureError):
        integrate_semi_infinite(lambda t: 1.0 / (1.0 + t))


def test_finite_jump_exhausts_depth():
    """A jump off the dyadic grid can never meet the tolerance."""
    with pytest.raises(QuadratureError):
        integrate_finite(lambda t: 0.0 if t < 1.0 / 3.0 else 1.0, 0.0, 1.0)


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=-1e-9)
    with pytest.raises(ValueError):
        QuadratureConfig(max_depth=2)
    with pytest.raises(ValueError):
        QuadratureConfig(tail_split=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(tail_split=math.inf)


def test_with_tail_split_moves_outward_only():
    cfg = with_tail_split(DEFAULT_QUADRATURE, 7.0)
    assert cfg.tail_split == 7.0
    assert with_tail_split(cfg, 2.0) is cfg


def test_gamma_matches_stdlib():
    worst = 0.0
    for i in range(200):
        x = 0.1 * (500.0) ** (i / 199.0)
        rel = abs(gamma(x) - math.gamma(x)) / math.gamma(x)
        worst = max(worst, rel)
    assert worst < 1e-13, f"worst relative error {worst:.3e}"


def test_gamma_rejects_nonpositive_and_nonfinite():
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ValueError):
            gamma(bad)


def test_beta_function_values():
    for a, b, exact in ((2.0, 1.0, 0.5), (2.0, 2.0, 1.0 / 6.0), (0.5, 0.5, math.pi)):
        got = beta_function(a, b)
        assert abs(got - exact) / exact < 1e-13, f"B({a},{b}) = {got!r}, want {exact!r}"


def test_ivp_zero_curvature_is_identity():
    sol = solve_h_ivp(lambda t: 0.0, 10.0, 1e-3)
    for t in (0.5, 1.0, 5.0, 10.0):
        assert abs(sol.value(t) - t) / t < 1e-12, f"h({t}) = {sol.value(t)!r}"
        assert abs(sol.deriv(t) - 1.0) < 1e-12


def test_ivp_constant_curvature_is_sinh():
    sol = solve_h_ivp(lambda t: 1.0, 3.0, 1e-3)
    assert abs(sol.value(1.0) - SINH_1) / SINH_1 < 1e-12
    for t in (0.5, 2.0, 3.0):
        assert abs(sol.value(t) - math.sinh(t)) / math.sinh(t) < 1e-12
        assert abs(sol.deriv(t) - math.cosh(t)) / math.cosh(t) < 1e-12


def test_ivp_rational_curvature_oracles():
    g = lambda t: 2.0 / (1.0 + t * t) ** 2
    sol = solve_h_ivp(g, 12.0, 1e-3)
    for t, ref in RATIONAL_B1_H.items():
        rel = abs(sol.value(t) - ref) / ref
        assert rel < 1e-12, f"h({t}) off by {rel:.3e}"
    for t, ref in RATIONAL_B1_HP.items():
        rel = abs(sol.deriv(t) - ref) / ref
        assert rel < 1e-12, f"h'({t}) off by {rel:.3e}"


def test_ivp_dense_output_between_nodes():
    g = lambda t: 2.0 / (1.0 + t * t) ** 2
    coarse = solve_h_ivp(g, 6.0, 1e-3, with_error_estimate=False)
    fine = solve_h_ivp(g, 6.0, 2.5e-4, with_error_estimate=False)
    for t in (0.31415, 1.23456, 4.99999):
        rel = abs(coarse.value(t) - fine.value(t)) / fine.value(t)
        assert rel < 1e-10, f"dense value at t={t} off by {rel:.3e}"
        rel_d = abs(coarse.deriv(t) - fine.deriv(t)) / abs(fine.deriv(t))
        assert rel_d < 1e-10, f"dense deriv at t={t} off by {rel_d:.3e}"


def test_ivp_error_estimate_behaviour():
    g = lambda t: 0.2 / (1.0 + t * t) ** 2
    with_est = solve_h_ivp(g, 5.0, 1e-2)
    without = solve_h_ivp(g, 5.0, 1e-2, with_error_estimate=False)
    assert without.error_estimate == 0.0
    assert 0.0 < with_est.error_estimate < 1e-9, f"estimate {with_est.error_estimate!r}"


def test_ivp_window_and_argument_guards():
    sol = solve_h_ivp(lambda t: 0.0, 1.0, 1e-3)
    with pytest.raises(ValueError):
        sol.value(1.5)
    with pytest.raises(ValueError):
        solve_h_ivp(lambda t: 0.0, -1.0, 1e-3)
    with pytest.raises(ValueError):
        solve_h_ivp(lambda t: 0.0, 1.0, 0.0)


def test_ivp_runaway_curvature_raises():
    with pytest.raises(OdeError):
        solve_h_ivp(lambda t: math.exp(t), 50.0, 1e-3)


def test_quadrature_and_ivp_determinism():
    f = lambda t: t**3 / (1.0 + t * t) ** 4
    assert integrate_finite(f, 0.0, 1.0) == integrate_finite(f, 0.0, 1.0)
    g = lambda t: 0.2 / (1.0 + t * t) ** 2
    a = solve_h_ivp(g, 5.0, 1e-3)
    b = solve_h_ivp(g, 5.0, 1e-3)
    assert (a.values == b.values).all() and (a.derivs == b.derivs).all()


if HAS_HYPOTHESIS:

    @given(
        a=st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False),
        b=st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False),
        c=st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False),
    )
    @settings(max_examples=100)
    def test_finite_quadratic_closed_form(a, b, c):
        """Adaptive Simpson is exact on quadratics, up to rounding."""
        upper = 1.5
        got = integrate_finite(lambda t: a + b * t + c * t * t, 0.0, upper)
        exact = a * upper + b * upper**2 / 2.0 + c * upper**3 / 3.0
        assert abs(got - exact) <= 1e-9 * (1.0 + abs(exact)), f"got {got!r}, want {exact!r}"

    @given(x=st.floats(min_value=0.2, max_value=40.0, allow_nan=False, allow_infinity=False))
    @settings(max_examples=100)
    def test_gamma_recurrence(x):
        lhs = gamma(x + 1.0)
        rhs = x * gamma(x)
        assert abs(lhs - rhs) / rhs < 5e-13, f"recurrence off at x={x}: {lhs!r} vs {rhs!r}"
