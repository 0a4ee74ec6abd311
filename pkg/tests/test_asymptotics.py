"""Cusp-area integrals and growth estimators against closed forms.

The excursion integral has an elementary closed form for pure exponential
profiles, and the finiteness-criterion integrand collapses to an explicit
power law on polynomial-tail profiles; both serve as frozen oracles that
were derived independently before the implementation.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspgrowth.errors import DomainError
from cuspgrowth.asymptotics import (
    CuspModel,
    area_ratio_check,
    cuspidal_chain_check,
    distance_from_horodistance,
    orbital_validity_floor,
    sample_orbital_parabolic,
    GrowthClass,
    GrowthSeries,
    TrendPolicy,
    WindowPolicy,
    area_ratio_bounds,
    classify_growth,
    critical_exponent_chain_bound,
    log_cuspidal,
    estimate_exponents,
    log_horo_area,
    log_orbital_parabolic,
    series_log_integrand,
    series_convergence_at,
    poincare_abscissa,
    sample_cuspidal,
)
from cuspgrowth.profiles import (
    CatalogParams,
    CurvatureBounds,
    assemble_profile,
    catalog_companions,
    catalog_profile,
    pure_piece,
)

INF = float("inf")


def _pure_cusp(rate: float = 1.0, n: int = 2, c_norm: float = 1.0) -> CuspModel:
    prof = assemble_profile(CurvatureBounds(a=rate, b=rate, n=n),
                            [pure_piece(0.0, INF, rate)])
    return CuspModel(profile=prof, c_norm=c_norm)


class TestHoroArea:
    def test_area_law(self):
        cusp = _pure_cusp(rate=2.0, n=3, c_norm=5.0)
        # ln A(t) = ln 5 + 2 * (-2t)
        assert log_horo_area(cusp, 1.5) == pytest.approx(math.log(5.0) - 6.0, rel=1e-14)

    def test_ratio_bounds_tight_for_constant_curvature(self):
        cusp = _pure_cusp(rate=2.0, n=2)
        lo, hi = area_ratio_bounds(cusp, 1.0, 3.0)
        actual = log_horo_area(cusp, 3.0) - log_horo_area(cusp, 1.0)
        assert lo == pytest.approx(-4.0)
        assert hi == pytest.approx(-4.0)
        assert lo - 1e-12 <= actual <= hi + 1e-12

    def test_ratio_bounds_contain_catalog_profile(self):
        prof = catalog_profile("sparse-5.2", CatalogParams(m=701, windows=1))
        cusp = CuspModel(profile=prof)
        for t1, t2 in [(1.0, 50.0), (100.0, 5e5), (1e7, 5e10), (2e11, 1e12)]:
            lo, hi = area_ratio_bounds(cusp, t1, t2)
            actual = log_horo_area(cusp, t2) - log_horo_area(cusp, t1)
            assert lo - 1e-9 <= actual <= hi + 1e-9, (t1, t2)

    def test_ordering_enforced(self):
        with pytest.raises(DomainError):
            area_ratio_bounds(_pure_cusp(), 3.0, 1.0)


class TestCuspidalFunction:
    def test_pure_exponential_closed_form(self):
        # For T = e^{-a t}, n = 2:  F(R) = (2/a) (e^{a R / 2} - 1).
        cusp = _pure_cusp(rate=1.0)
        got = log_cuspidal(cusp, 10.0)
        assert got == pytest.approx(math.log(2.0 * (math.exp(5.0) - 1.0)), abs=1e-8)

    def test_pure_exponential_other_rate(self):
        cusp = _pure_cusp(rate=2.0)
        got = log_cuspidal(cusp, 6.0)
        assert got == pytest.approx(math.log(math.exp(6.0) - 1.0), abs=1e-8)

    def test_higher_dimension(self):
        # T = e^{-t}, n = 3: integrand is e^{R - t}, total e^R (1 - e^{-R}).
        cusp = _pure_cusp(rate=1.0, n=3)
        got = log_cuspidal(cusp, 8.0)
        assert got == pytest.approx(8.0 + math.log(1.0 - math.exp(-8.0)), abs=1e-8)

    def test_normalization_cancels(self):
        a = log_cuspidal(_pure_cusp(c_norm=1.0), 7.0)
        b = log_cuspidal(_pure_cusp(c_norm=50.0), 7.0)
        assert a == pytest.approx(b, abs=1e-12)

    def test_below_start_is_empty(self):
        assert log_cuspidal(_pure_cusp(), 0.0) == -math.inf

    def test_piecewise_against_brute_force(self):
        # Independent trapezoid evaluation on a dense linear grid,
        # stabilized by factoring out the max; checks the breakpoint
        # handling on a genuinely piecewise profile.
        prof = catalog_profile("exotic-div-5.3b")
        cusp = CuspModel(profile=prof)
        r = 30.0

        t = np.linspace(prof.t_start, r, (1 << 17) + 1)
        y = (prof.log_value(t) - prof.log_value((r + t) / 2.0))
        m = float(np.max(y))
        brute = m + math.log(np.trapezoid(np.exp(y - m), t))

        got = log_cuspidal(cusp, r)
        assert got == pytest.approx(brute, abs=5e-5)

    def test_sample_series(self):
        cusp = _pure_cusp()
        series = sample_cuspidal(cusp, [2.0, 4.0, 8.0], label="demo")
        assert series.label == "demo"
        assert len(series) == 3
        assert series.log_values[2] == pytest.approx(
            math.log(2.0 * (math.exp(4.0) - 1.0)), abs=1e-5)


class TestParabolicGrowth:
    def test_pure_profile_growth(self):
        cusp = _pure_cusp(rate=1.0)
        assert log_orbital_parabolic(cusp, 10.0) == pytest.approx(5.0, rel=1e-14)

    def test_vectorized(self):
        cusp = _pure_cusp(rate=2.0, n=3)
        r = np.array([2.0, 4.0])
        np.testing.assert_allclose(log_orbital_parabolic(cusp, r), 2.0 * r, rtol=1e-14)

    def test_critical_exponent_pure(self):
        # For rate c in dimension n the parabolic exponent is (n-1) c / 2.
        got = poincare_abscissa(_pure_cusp(rate=1.0), tol=1e-4)
        assert got == pytest.approx(0.5, abs=5e-4)

    def test_critical_exponent_dimension_scaling(self):
        got = poincare_abscissa(_pure_cusp(rate=2.0, n=3), tol=1e-4)
        assert got == pytest.approx(2.0, abs=5e-4)


class TestMeasureCriterion:
    def test_divergence_critical_integrand_is_inverse_square(self):
        # Tail T = t^3 e^{-3t} at s = 3/2, n = 2: the integrand collapses
        # to 8 / t^2 exactly once t/2 is inside the tail piece.
        cusp = CuspModel(profile=catalog_profile("exotic-div-5.3b"))
        f = series_log_integrand(cusp, 1.5)
        for t in (50.0, 123.0, 4096.0):
            assert float(f(t)) == pytest.approx(math.log(8.0 / t ** 2), rel=1e-12)

    def test_divergence_critical_tail_mass(self):
        # Integral of 8/t^2 over [40, inf) = 0.2; the window ratio is
        # exactly 1/2 so the geometric closure is exact.
        cusp = CuspModel(profile=catalog_profile("exotic-div-5.3b"))
        res = series_convergence_at(cusp, 1.5)
        assert res.converges
        assert res.log_tail == pytest.approx(math.log(8.0 / 40.0), abs=1e-6)

    def test_convergent_critical_family(self):
        # Tail t^{2+gamma} e^{-bt}: integrand ~ t^{-(1+gamma)}, finite.
        cusp = CuspModel(profile=catalog_profile("critical-finite-5.4a"))
        res = series_convergence_at(cusp, 1.5)
        assert res.converges

    def test_divergent_companion(self):
        # Companion tail t^{1+gamma} e^{-bt}: integrand ~ t^{-gamma},
        # infinite mass for gamma in (0, 1).
        comp = catalog_companions("critical-infinite-5.4b")[0]
        res = series_convergence_at(CuspModel(profile=comp), 1.5)
        assert res.diverges


class TestGrowthSeries:
    def test_text_round_trip(self):
        s = GrowthSeries(np.array([1.0, 2.5, 4.0]),
                         np.array([0.1, -3.7, 12.0]), label="orbit count")
        back = GrowthSeries.from_text(s.to_text())
        assert back.label == "orbit count"
        assert np.array_equal(back.radii, s.radii)
        assert np.array_equal(back.log_values, s.log_values)

    def test_validation(self):
        with pytest.raises(DomainError):
            GrowthSeries(np.array([1.0, 1.0]), np.array([0.0, 0.0]))
        with pytest.raises(DomainError):
            GrowthSeries(np.array([1.0, 2.0]), np.array([0.0, math.nan]))

    def test_restriction(self):
        s = GrowthSeries(np.arange(1.0, 11.0), np.zeros(10))
        r = s.restricted(3.0, 7.0)
        assert r.radii[0] == 3.0 and r.radii[-1] == 7.0


def _series(fn, r_max=64.0, n=513) -> GrowthSeries:
    radii = np.linspace(r_max / n, r_max, n)
    return GrowthSeries(radii, fn(radii))


class TestEstimateExponents:
    def test_exact_exponential(self):
        est = estimate_exponents(_series(lambda r: 2.0 * r))
        assert est.omega_plus == pytest.approx(2.0, abs=1e-12)
        assert est.omega_minus == pytest.approx(2.0, abs=1e-12)
        assert est.converged_plus and est.converged_minus

    def test_distinct_envelopes(self):
        # ln f oscillates between slopes 1 and 2 with doubling period:
        # the windows see both envelopes.
        def fn(r):
            phase = np.sin(2.0 * math.pi * np.log2(np.maximum(r, 1e-9)))
            return 1.5 * r + 0.5 * r * phase

        est = estimate_exponents(_series(fn))
        assert est.omega_plus == pytest.approx(2.0, abs=0.05)
        assert est.omega_minus == pytest.approx(1.0, abs=0.05)

    @settings(max_examples=20, deadline=None)
    @given(log_scale=st.floats(min_value=-5.0, max_value=5.0))
    def test_rescaling_sensitivity_is_exactly_bounded(self, log_scale):
        base = _series(lambda r: 2.0 * r)
        scaled = GrowthSeries(base.radii, base.log_values + log_scale)
        e0 = estimate_exponents(base)
        e1 = estimate_exponents(scaled)
        bound = abs(log_scale) / e0.r_tail_min + 1e-12
        assert abs(e1.omega_plus - e0.omega_plus) <= bound
        assert abs(e1.omega_minus - e0.omega_minus) <= bound

    def test_sparse_sampling_rejected(self):
        s = GrowthSeries(np.array([1.0, 2.0, 60.0, 64.0]), np.zeros(4))
        with pytest.raises(DomainError):
            estimate_exponents(s)


class TestClassifyGrowth:
    def test_pure(self):
        s = _series(lambda r: 2.0 * r + 0.4 * np.cos(r))
        got = classify_growth(s, 2.0)
        assert got.kind is GrowthClass.PURE
        assert got.oscillation <= 1.0

    def test_lower(self):
        s = _series(lambda r: 2.0 * r - 1.2 * np.log(np.maximum(r, 1e-9)))
        got = classify_growth(s, 2.0)
        assert got.kind is GrowthClass.LOWER
        assert got.trend_peak < -0.4

    def test_upper(self):
        s = _series(lambda r: 2.0 * r + 0.5 * np.sqrt(r))
        got = classify_growth(s, 2.0)
        assert got.kind is GrowthClass.UPPER

    def test_indeterminate(self):
        # Doubling-periodic residual with amplitude above the band but no
        # window-to-window trend.
        def fn(r):
            return 2.0 * r + 2.0 * np.sin(2.0 * math.pi * np.log2(np.maximum(r, 1e-9)))

        got = classify_growth(_series(fn), 2.0)
        assert got.kind is GrowthClass.INDETERMINATE


class TestChainBound:
    def test_sparse_values(self):
        # omega+ = 3/2, omega- = 1/2: the doubled gap dominates.
        assert critical_exponent_chain_bound(1.5, 0.5) == pytest.approx(2.0)

    def test_tight_gap(self):
        assert critical_exponent_chain_bound(3.0, 2.9) == pytest.approx(3.0)

    def test_order_enforced(self):
        with pytest.raises(DomainError):
            critical_exponent_chain_bound(1.0, 2.0)


class TestAreaRatioCheck:
    def test_constant_curvature_exact(self):
        cusp = _pure_cusp(rate=1.0)
        rep = area_ratio_check(cusp, 1.0, np.linspace(0.0, 40.0, 41))
        assert rep.passed
        assert rep.worst_margin == pytest.approx(0.0, abs=1e-12)

    def test_catalog_profile_within_declared_slack(self):
        cusp = CuspModel(profile=catalog_profile("sparse-5.2"))
        rep = area_ratio_check(cusp, 1.0, np.linspace(1.0, 900.0, 120))
        assert rep.passed

    def test_increasing_profile_fails(self):
        # t^2 e^{-t} increases until t=2, so the drop turns positive and
        # escapes the (negative) admissible band.
        from cuspgrowth.profiles import poly_piece

        prof = assemble_profile(CurvatureBounds(a=1.0, b=1.0, eps=0.0),
                                [poly_piece(0.5, INF, 2.0, 1.0)])
        rep = area_ratio_check(CuspModel(profile=prof), 0.5, [0.6, 1.0, 1.4])
        assert not rep.passed
        assert rep.worst_margin < 0

    def test_bad_step(self):
        with pytest.raises(DomainError):
            area_ratio_check(_pure_cusp(), 0.0, [1.0])


class TestOrbitalParabolic:
    def test_target_offset_shifts_argument(self):
        # (R + h_y)/2 = 6 for R=10, h_y=2.
        assert log_orbital_parabolic(_pure_cusp(), 10.0, h_y=2.0) == pytest.approx(6.0)

    def test_normalization_divides(self):
        got = log_orbital_parabolic(_pure_cusp(c_norm=math.exp(2.0)), 10.0)
        assert got == pytest.approx(3.0, rel=1e-12)

    def test_validity_floor(self):
        assert orbital_validity_floor(_pure_cusp()) == pytest.approx(10.0)
        assert orbital_validity_floor(_pure_cusp(rate=2.0), h_y=3.0) == pytest.approx(8.0)

    def test_sampled_series(self):
        s = sample_orbital_parabolic(_pure_cusp(), [2.0, 4.0, 8.0])
        np.testing.assert_allclose(s.log_values, [1.0, 2.0, 4.0], rtol=1e-14)


class TestSeriesWeight:
    def test_bare_series_converges_above_abscissa(self):
        # e^{-st} / A(t/2) with s=1 > 1/2 decays like e^{-t/2}.
        res = series_convergence_at(_pure_cusp(), 1.0, weight="none")
        assert res.converges

    def test_bare_series_diverges_below_abscissa(self):
        res = series_convergence_at(_pure_cusp(), 0.4, weight="none")
        assert res.diverges

    def test_unknown_weight_rejected(self):
        with pytest.raises(DomainError):
            series_log_integrand(_pure_cusp(), 1.0, weight="quadratic")


class TestDistanceFromHorodistance:
    def test_pure_exponential(self):
        prof = _pure_cusp().profile
        assert distance_from_horodistance(prof, math.exp(5.0)) == pytest.approx(10.0, abs=1e-9)

    def test_unit_distance_is_start(self):
        prof = _pure_cusp().profile
        assert distance_from_horodistance(prof, 1.0) == 0.0

    def test_self_consistency_on_catalog_tail(self):
        prof = catalog_profile("exotic-div-5.3b")
        for d_xi in (10.0, 1e4, 1e9):
            r = distance_from_horodistance(prof, d_xi)
            target = prof.log_value(prof.t_start) - math.log(d_xi)
            assert prof.log_value(r / 2.0) == pytest.approx(target, abs=1e-8)

    def test_too_small_rejected(self):
        with pytest.raises(DomainError):
            distance_from_horodistance(_pure_cusp().profile, 0.5)


class TestChainCheck:
    def test_hyperbolic_chain_tight(self):
        rep = cuspidal_chain_check(_pure_cusp(), 200.0)
        assert rep.passed
        assert rep.delta_plus == pytest.approx(0.5, abs=1e-6)
        assert rep.delta_minus == pytest.approx(0.5, abs=1e-6)
        # The excursion integral's ln 2 prefactor inflates the windowed
        # upper rate by at most ln(2 e)/R on the innermost window.
        assert rep.omega_plus_f == pytest.approx(0.5, abs=0.06)
        assert rep.upper_margin > -0.06

    def test_sparse_catalog_chain(self):
        rep = cuspidal_chain_check(CuspModel(profile=catalog_profile("sparse-5.2")), 500.0)
        assert rep.passed
        assert rep.delta_plus == pytest.approx(1.5, abs=0.01)
        assert rep.delta_minus == pytest.approx(0.5, abs=0.01)
        assert rep.chain_bound == pytest.approx(2.0, abs=0.02)
        assert rep.omega_plus_f <= 2.0
