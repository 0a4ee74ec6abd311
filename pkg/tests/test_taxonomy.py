"""Tests for the lattice taxonomy, the quarter-pinch gate, and the
catalog example driver."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspgrowth import (
    PINCH_EXACT,
    PINCH_NONE,
    PINCH_STRICT,
    CATALOG_IDS,
    ConfigError,
    ConstantFactor,
    CurvatureBounds,
    CuspModel,
    DomainError,
    ExampleReport,
    GrowthClass,
    GrowthSeries,
    LatticeSpec,
    PowerDecayFactor,
    SampledFactor,
    VGammaModel,
    assemble_profile,
    catalog_companions,
    catalog_profile,
    classify_lattice,
    default_catalog_params,
    pure_piece,
    quarter_pinch_gate,
    run_example,
)
from cuspgrowth.taxonomy import _family_model, _group_divergent

INF = float("inf")


def _pure_cusp(rate: float = 1.0, n: int = 2) -> CuspModel:
    prof = assemble_profile(CurvatureBounds(a=rate, b=rate, n=n),
                            [pure_piece(0.0, INF, rate)])
    return CuspModel(profile=prof)


def _catalog_spec(name: str) -> LatticeSpec:
    params = default_catalog_params(name)
    main = catalog_profile(name, params)
    companions = catalog_companions(name, params)
    delta, factor, flags = _family_model(name, params)
    return LatticeSpec(cusps=tuple(CuspModel(p) for p in (main, *companions)),
                       vgamma=VGammaModel(delta, factor),
                       bounds=main.bounds,
                       dominant_flags=flags)


_REPORTS: dict = {}


def _classified(name: str):
    if name not in _REPORTS:
        _REPORTS[name] = classify_lattice(_catalog_spec(name))
    return _REPORTS[name]


_EXAMPLES: dict = {}


def _example(name: str) -> ExampleReport:
    if name not in _EXAMPLES:
        _EXAMPLES[name] = run_example(name)
    return _EXAMPLES[name]


class TestQuarterPinchGate:
    def test_applies_with_critical_gap(self):
        rep = quarter_pinch_gate(CurvatureBounds(a=1.0, b=2.0), 1.2)
        assert rep.applies
        assert rep.delta_floor == pytest.approx(0.5)
        assert rep.delta_plus_cap == pytest.approx(1.0)
        assert rep.entropy_floor == pytest.approx(1.0)
        assert rep.entropy_floor_ok
        assert rep.critical_gap

    def test_entropy_floor_violation(self):
        rep = quarter_pinch_gate(CurvatureBounds(a=1.0, b=2.0), 0.9)
        assert rep.applies
        assert not rep.entropy_floor_ok
        assert not rep.critical_gap
        assert "VIOLATED" in rep.summary()

    def test_not_applicable(self):
        rep = quarter_pinch_gate(CurvatureBounds(a=1.0, b=3.0), 1.5)
        assert not rep.applies
        assert not rep.critical_gap
        # no inconsistency can be flagged by a gate that does not apply
        assert rep.entropy_floor_ok
        assert "not applicable" in rep.summary()

    def test_slack_widens_the_window(self):
        bounds = CurvatureBounds(a=1.0, b=3.0)
        assert not quarter_pinch_gate(bounds, 1.5).applies
        assert quarter_pinch_gate(bounds, 1.5, slack=5.0).applies

    def test_exact_quarter_pinch_boundary(self):
        rep = quarter_pinch_gate(CurvatureBounds(a=1.5, b=3.0), 1.5)
        assert rep.applies
        # the gap needs delta strictly above the floor
        assert rep.entropy_floor == pytest.approx(1.5)
        assert not rep.critical_gap

    def test_higher_dimension_scales_caps(self):
        rep = quarter_pinch_gate(CurvatureBounds(a=1.0, b=2.0, n=3), 2.5)
        assert rep.delta_floor == pytest.approx(1.0)
        assert rep.delta_plus_cap == pytest.approx(2.0)
        assert rep.entropy_floor == pytest.approx(2.0)
        assert rep.critical_gap

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            quarter_pinch_gate(CurvatureBounds(a=1.0, b=2.0), 0.0)
        with pytest.raises(DomainError):
            quarter_pinch_gate(CurvatureBounds(a=1.0, b=2.0), 1.0, slack=-0.1)

    @given(a=st.floats(0.05, 10.0), ratio=st.floats(0.1, 2.0),
           delta=st.floats(0.01, 50.0))
    @settings(deadline=None, max_examples=60)
    def test_pinched_window_always_applies(self, a, ratio, delta):
        rep = quarter_pinch_gate(CurvatureBounds(a=a, b=a * max(ratio, 1.0)),
                                 delta)
        assert rep.applies
        assert rep.delta_floor <= rep.delta_plus_cap + 1e-12
        assert rep.critical_gap == (rep.applies and delta > rep.entropy_floor)

    @given(a=st.floats(0.05, 10.0), ratio=st.floats(2.1, 8.0))
    @settings(deadline=None, max_examples=40)
    def test_wide_window_never_applies(self, a, ratio):
        rep = quarter_pinch_gate(CurvatureBounds(a=a, b=a * ratio), 1.0)
        assert not rep.applies


class TestLatticeSpec:
    def test_needs_a_cusp(self):
        with pytest.raises(DomainError):
            LatticeSpec(cusps=(), vgamma=VGammaModel(1.0, ConstantFactor()),
                        bounds=CurvatureBounds(a=1.0, b=1.0),
                        dominant_flags=())

    def test_flag_count_must_match(self):
        with pytest.raises(DomainError):
            LatticeSpec(cusps=(_pure_cusp(),),
                        vgamma=VGammaModel(1.0, ConstantFactor()),
                        bounds=CurvatureBounds(a=1.0, b=1.0),
                        dominant_flags=(True, False))

    def test_sequences_become_tuples(self):
        spec = LatticeSpec(cusps=[_pure_cusp()],
                           vgamma=VGammaModel(1.0, ConstantFactor()),
                           bounds=CurvatureBounds(a=1.0, b=1.0),
                           dominant_flags=[False])
        assert isinstance(spec.cusps, tuple)
        assert isinstance(spec.dominant_flags, tuple)


class TestGroupDivergent:
    def test_constant_factor_diverges(self):
        assert _group_divergent(VGammaModel(1.0, ConstantFactor())) is True

    def test_power_decay_boundary(self):
        assert _group_divergent(VGammaModel(1.0, PowerDecayFactor(0.5))) is True
        assert _group_divergent(VGammaModel(1.0, PowerDecayFactor(1.0))) is True
        assert _group_divergent(VGammaModel(1.0, PowerDecayFactor(1.2))) is False

    def _sampled(self, slope: float) -> VGammaModel:
        radii = np.linspace(10.0, 1000.0, 200)
        series = GrowthSeries(radii, slope * np.log(radii), label="fit")
        return VGammaModel(1.0, SampledFactor(series))

    def test_sampled_slope_fit(self):
        assert _group_divergent(self._sampled(-0.5)) is True
        assert _group_divergent(self._sampled(-2.0)) is False
        # within the dead band around the borderline exponent
        assert _group_divergent(self._sampled(-1.0)) is None

    def test_sampled_too_short(self):
        radii = np.array([1.0, 10.0, 400.0, 1000.0])
        series = GrowthSeries(radii, -0.5 * np.log(radii), label="fit")
        assert _group_divergent(VGammaModel(1.0, SampledFactor(series))) is None


class TestClassifyLattice:
    def test_regular_lattice_gets_margulis_prediction(self):
        spec = LatticeSpec(
            cusps=(_pure_cusp(1.0), _pure_cusp(1.0)),
            vgamma=VGammaModel(1.0, ConstantFactor()),
            bounds=CurvatureBounds(a=1.0, b=1.0),
            dominant_flags=(False, False))
        rep = classify_lattice(spec, r_max=200.0, n_points=257)
        assert not rep.sparse
        assert not rep.exotic
        assert rep.pinch_class == PINCH_STRICT
        assert rep.quarter_pinched
        assert rep.predictions.vgamma_class is GrowthClass.PURE
        assert rep.predictions.vx_class is GrowthClass.PURE
        assert rep.predictions.bm_finite is True
        assert rep.predictions.margulis is True
        assert rep.series_verdicts == (None, None)
        assert rep.bm_finite is True

    def test_dominant_flag_must_match_ambient_exponent(self):
        spec = LatticeSpec(
            cusps=(_pure_cusp(1.0),),
            vgamma=VGammaModel(1.0, ConstantFactor()),
            bounds=CurvatureBounds(a=1.0, b=1.0),
            dominant_flags=(True,))
        with pytest.raises(ConfigError, match="flagged dominant"):
            classify_lattice(spec, r_max=200.0, n_points=257)

    def test_ambient_exponent_cannot_undercut_cusps(self):
        spec = LatticeSpec(
            cusps=(_pure_cusp(2.0),),
            vgamma=VGammaModel(0.3, ConstantFactor()),
            bounds=CurvatureBounds(a=1.0, b=2.0),
            dominant_flags=(False,))
        with pytest.raises(ConfigError, match="outgrow"):
            classify_lattice(spec, r_max=200.0, n_points=257)

    def test_critical_gap_rejects_dominant_flags(self):
        spec = LatticeSpec(
            cusps=(_pure_cusp(2.4),),
            vgamma=VGammaModel(1.2, ConstantFactor()),
            bounds=CurvatureBounds(a=1.0, b=2.0),
            dominant_flags=(True,))
        with pytest.raises(ConfigError, match="quarter-pinch"):
            classify_lattice(spec, r_max=200.0, n_points=257)

    def test_sparse_family_decision(self):
        rep = _classified("sparse-5.2")
        assert rep.sparse
        assert not rep.exotic
        assert rep.pinch_class == PINCH_NONE
        assert not rep.quarter_pinched
        assert rep.predictions.vgamma_class is None
        assert rep.predictions.vx_class is None
        assert rep.predictions.bm_finite is None
        assert rep.predictions.margulis is None
        assert rep.predictions.notes
        est = rep.estimates[0]
        assert abs(est.omega_plus - 1.5) <= 0.01
        assert abs(est.omega_minus - 0.5) <= 0.01
        assert rep.series_verdicts == (None,)

    def test_convergent_exotic_family_decision(self):
        rep = _classified("exotic-conv-5.3a")
        assert not rep.sparse
        assert rep.exotic
        assert rep.pinch_class == PINCH_STRICT
        assert rep.predictions.vgamma_class is GrowthClass.LOWER
        assert rep.predictions.vx_class is GrowthClass.LOWER
        assert rep.predictions.bm_finite is False
        assert rep.predictions.margulis is None
        assert rep.group_divergent is False
        assert rep.series_verdicts == (True,)
        assert rep.bm_finite is False

    def test_divergent_exotic_family_decision(self):
        rep = _classified("exotic-div-5.3b")
        assert not rep.sparse
        assert rep.exotic
        assert rep.pinch_class == PINCH_STRICT
        assert rep.predictions.vgamma_class is GrowthClass.PURE
        assert rep.predictions.vx_class is GrowthClass.PURE
        assert rep.predictions.bm_finite is True
        assert rep.predictions.margulis is None
        assert rep.group_divergent is True
        assert rep.series_verdicts == (True,)
        assert rep.bm_finite is True

    def test_critical_finite_family_decision(self):
        rep = _classified("critical-finite-5.4a")
        assert not rep.sparse
        assert rep.exotic
        assert rep.pinch_class == PINCH_EXACT
        assert rep.predictions.vgamma_class is GrowthClass.PURE
        assert rep.predictions.vx_class is GrowthClass.UPPER
        assert rep.predictions.bm_finite is True
        assert rep.predictions.margulis is False
        assert rep.series_verdicts == (True,)
        assert rep.bm_finite is True
        est = rep.estimates[0]
        assert abs(est.omega_plus - 2.0 * est.omega_minus) <= rep.tol

    def test_critical_infinite_family_decision(self):
        rep = _classified("critical-infinite-5.4b")
        assert not rep.sparse
        assert rep.exotic
        assert rep.pinch_class == PINCH_EXACT
        assert rep.predictions.vgamma_class is GrowthClass.LOWER
        assert rep.predictions.vx_class is GrowthClass.UPPER
        assert rep.predictions.bm_finite is False
        assert rep.predictions.margulis is False
        assert rep.group_divergent is True
        # the companion's weighted series diverges and flips the verdict
        assert rep.series_verdicts == (True, False)
        assert rep.bm_finite is False

    @pytest.mark.parametrize("name", CATALOG_IDS)
    def test_taxonomy_invariants(self, name):
        rep = _classified(name)
        # sparse and strictly-half-pinched exclude each other
        assert not (rep.sparse and rep.pinch_class == PINCH_STRICT)
        if rep.sparse:
            assert rep.predictions.margulis is None
        assert len(rep.series_verdicts) == len(rep.dominant_flags)
        assert len(rep.estimates) == len(rep.dominant_flags)
        assert rep.delta_gamma >= max(e.omega_plus for e in rep.estimates) - rep.tol
        assert any("modelling assumption" in n for n in rep.notes)
        text = rep.summary()
        assert "pinch class" in text
        assert "cusp 0" in text


class TestRunExample:
    def test_divergent_exotic_example_passes(self):
        rep = _example("exotic-div-5.3b")
        assert rep.passed
        assert all(c.passed for c in rep.claims)
        names = [c.name for c in rep.claims]
        assert names == [
            "sparse", "exotic", "pinch-class",
            "predicted-ambient-class", "predicted-volume-class",
            "predicted-invariant-measure", "margulis-prediction",
            "computed-ambient-class", "computed-volume-class",
        ]
        assert rep.vgamma_class is GrowthClass.PURE
        assert rep.vx_class is GrowthClass.PURE
        assert rep.delta_gamma == pytest.approx(1.5)
        assert rep.notes == ()

    def test_sparse_example_realizes_the_rate_gap(self):
        rep = _example("sparse-5.2")
        assert rep.passed
        names = [c.name for c in rep.claims]
        assert "upper-volume-rate-gap" in names
        assert "computed-volume-class" not in names
        assert rep.delta_gamma == pytest.approx(19.0 / 12.0)
        gap = rep.vx_upper_rate - rep.delta_gamma
        assert gap == pytest.approx(0.22155227161381097, abs=1e-9)
        assert gap >= 0.05
        # at desk radii the sparse construction already outgrows the
        # ambient rate, landing in the upper regime
        assert rep.vx_class is GrowthClass.UPPER
        margulis = next(c for c in rep.claims if c.name == "margulis-prediction")
        assert margulis.computed == "no prediction"

    def test_report_text_sections(self):
        rep = _example("exotic-div-5.3b")
        text = rep.to_text()
        for section in ("== taxonomy ==", "== exponents ==",
                        "== invariant measure ==", "== growth classes ==",
                        "== claims =="):
            assert section in text
        assert "overall: PASS" in text
        assert "PASS  computed-volume-class" in text

    def test_report_csv_shape(self):
        rep = _example("exotic-div-5.3b")
        rows = rep.csv_rows()
        assert len(rows) == len(rep.radii)
        assert rows[0][0] == pytest.approx(1.0)
        assert rows[-1][0] == pytest.approx(500.0)
        lines = rep.csv_text().strip().split("\n")
        assert lines[0] == "R,log_v_gamma,log_v_x_lower,log_v_x_upper"
        assert len(lines) == len(rows) + 1
        # log-domain envelope ordering survives the round trip
        for _, _, lo, hi in rows:
            assert lo <= hi + 1e-9

    def test_unknown_family_rejected(self):
        from cuspgrowth import CatalogError
        with pytest.raises(CatalogError):
            run_example("no-such-family")
