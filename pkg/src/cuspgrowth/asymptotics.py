"""Horospherical areas, cusp excursion integrals, and growth estimation.

A cusp is modelled by a decay profile T together with a normalization: the
horospherical cross-section area at depth t into the cusp is
A(t) = c_norm * T(t)^{n-1}.  Everything downstream of that identity lives
here: the excursion integral that controls how much orbit mass a cusp
contributes near radius R, parabolic orbit growth and its critical
exponent, the finiteness-criterion tail integral, and estimators that read
growth exponents and growth type off sampled log data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, ProfileError
from .numerics import TailAnalysis, bisect_increasing, log_integral, log_tail_integral
from .profiles import Profile

__all__ = [
    "CuspModel",
    "log_horo_area",
    "area_ratio_bounds",
    "AreaRatioReport",
    "area_ratio_check",
    "log_cuspidal",
    "sample_cuspidal",
    "log_orbital_parabolic",
    "orbital_validity_floor",
    "sample_orbital_parabolic",
    "poincare_abscissa",
    "series_log_integrand",
    "series_convergence_at",
    "distance_from_horodistance",
    "GrowthSeries",
    "WindowPolicy",
    "ExponentEstimate",
    "estimate_exponents",
    "TrendPolicy",
    "GrowthClass",
    "GrowthClassification",
    "classify_growth",
    "critical_exponent_chain_bound",
    "ChainCheckReport",
    "cuspidal_chain_check",
]


@dataclass(frozen=True)
class CuspModel:
    """A cusp: decay profile plus area normalization and basepoint offset.

    ``c_norm`` scales the horospherical area; ``h`` is the distance from
    the reference basepoint to the cusp's horoball, entering distance
    bookkeeping but not the area law itself.
    """
    profile: Profile
    c_norm: float = 1.0
    h: float = 0.0

    def __post_init__(self) -> None:
        if self.c_norm <= 0:
            raise DomainError("area normalization must be positive")
        if self.h < 0:
            raise DomainError("basepoint offset must be nonnegative")

    @property
    def dim(self) -> int:
        return self.profile.bounds.n


def log_horo_area(cusp: CuspModel, t):
    """ln A(t) = ln c_norm + (n-1) ln T(t)."""
    n1 = cusp.dim - 1
    return math.log(cusp.c_norm) + n1 * cusp.profile.log_value(t)


def area_ratio_bounds(cusp: CuspModel, t1: float, t2: float) -> tuple[float, float]:
    """Two-sided bounds on ln(A(t2)/A(t1)) for t2 >= t1, from the pinching
    data alone.

    The log-slope of T on a certified profile stays in
    [-sqrt(b^2+eps), -sqrt(max(a^2-eps, 0))]: a steeper slope would force
    the curvature proxy above b^2+eps somewhere ahead of it (the slope
    obeys a Riccati inequality, so an excursion below -sqrt(b^2+eps) blows
    down in finite time), and a shallower one would push the proxy below
    a^2-eps while T still has to keep decreasing.
    """
    if t2 < t1:
        raise DomainError("area_ratio_bounds needs t1 <= t2")
    b = cusp.profile.bounds
    n1 = cusp.dim - 1
    dt = t2 - t1
    steep = math.sqrt(b.b ** 2 + b.eps)
    shallow = math.sqrt(max(b.a ** 2 - b.eps, 0.0))
    return (-n1 * steep * dt, -n1 * shallow * dt)


@dataclass(frozen=True)
class AreaRatioReport:
    """Grid verification of the pinching bounds on area decay.

    For each grid radius the drop ln A(R+delta) - ln A(R) must land inside
    the band that ``area_ratio_bounds`` derives from the certified rate
    window; ``worst_margin`` is the smallest slack observed (negative
    means a violation at some grid point)."""
    passed: bool
    worst_margin: float
    delta: float
    grid: tuple[float, ...]

    def summary(self) -> str:
        state = "pass" if self.passed else "FAIL"
        return (f"area-ratio check ({len(self.grid)} radii, step {self.delta}): "
                f"{state}, worst margin {self.worst_margin:.3e}")


def area_ratio_check(cusp: CuspModel, delta: float,
                     grid: Sequence[float], *, tol: float = 1e-9) -> AreaRatioReport:
    """Check ln A(R+delta) - ln A(R) against the two-sided rate band at
    every grid radius."""
    if delta <= 0:
        raise DomainError("area ratio step must be positive")
    worst = math.inf
    for r in grid:
        r = float(r)
        drop = log_horo_area(cusp, r + delta) - log_horo_area(cusp, r)
        lo, hi = area_ratio_bounds(cusp, r, r + delta)
        worst = min(worst, drop - lo, hi - drop)
    return AreaRatioReport(passed=worst >= -tol, worst_margin=worst,
                           delta=delta, grid=tuple(float(r) for r in grid))


def _midpoint_breaks(profile: Profile, r: float, t_lo: float) -> list[float]:
    # Non-smooth abscissae of t -> ln T((r+t)/2) pulled back to t.
    pts = []
    for j in profile.piece_breaks():
        t = 2.0 * j - r
        if t_lo < t < r:
            pts.append(t)
    return pts


def log_cuspidal(cusp: CuspModel, r: float, *, rel_tol: float = 1e-8) -> float:
    """ln of the cusp excursion integral

        F(R) = integral over [t_start, R] of A(t) / A((R+t)/2) dt.

    The integrand compares the horoball area where an excursion enters the
    cusp with the area at the depth it must reach to close up by radius R;
    its mass measures how many distinct excursions of length about R the
    cusp supports.  Returns -inf for R <= t_start.
    """
    prof = cusp.profile
    t0 = prof.t_start
    if r <= t0:
        return -math.inf
    n1 = cusp.dim - 1

    def f_log(t):
        return n1 * (prof.log_value(t) - prof.log_value((r + t) / 2.0))

    breaks = [b for b in prof.piece_breaks() if t0 < b < r]
    breaks += _midpoint_breaks(prof, r, t0)
    return log_integral(f_log, t0, r, rel_tol=rel_tol, breakpoints=breaks)


def sample_cuspidal(cusp: CuspModel, radii: Sequence[float],
                    *, rel_tol: float = 1e-6,
                    label: str = "cusp-excursion") -> "GrowthSeries":
    """Sample ln F over a radius grid into a GrowthSeries."""
    radii = np.asarray(radii, dtype=float)
    vals = np.array([log_cuspidal(cusp, float(r), rel_tol=rel_tol)
                     for r in radii])
    return GrowthSeries(radii=radii, log_values=vals, label=label)


def log_orbital_parabolic(cusp: CuspModel, r, h_y: float = 0.0) -> float | np.ndarray:
    """ln of the modelled parabolic orbit count through radius R.

    A parabolic translation moving distance R along the horosphere exits
    through depth about (R + h_y)/2, where h_y is the target point's
    signed horoball depth, so the orbit count inverts the area law:
    v_P(R) = 1 / A((R + h_y)/2).  Scalar or vectorized in ``r``.  Values
    below ``orbital_validity_floor`` are extrapolations of the same
    formula, not errors.
    """
    prof = cusp.profile
    half = np.maximum((np.asarray(r, dtype=float) + h_y) / 2.0, prof.t_start)
    out = -math.log(cusp.c_norm) - (cusp.dim - 1) * prof.log_value(half)
    return float(out) if np.ndim(r) == 0 else out


def orbital_validity_floor(cusp: CuspModel, h_y: float = 0.0) -> float:
    """Radius below which the parabolic orbit formula is an extrapolation
    (the excursion geometry behind it needs about 10 decay lengths)."""
    return 10.0 / cusp.profile.bounds.a + max(h_y, 0.0)


def sample_orbital_parabolic(cusp: CuspModel, radii: Sequence[float],
                             h_y: float = 0.0,
                             *, label: str = "parabolic-orbit") -> "GrowthSeries":
    """Sample ln v_P over a radius grid into a GrowthSeries."""
    radii = np.asarray(radii, dtype=float)
    vals = np.asarray(log_orbital_parabolic(cusp, radii, h_y), dtype=float)
    return GrowthSeries(radii=radii, log_values=vals, label=label)


def poincare_abscissa(cusp: CuspModel, *, tol: float = 1e-6,
                      r_start: float = 8.0) -> float:
    """Abscissa of convergence of the parabolic orbit series
    sum over p of exp(-s d(x, p x)), located by bisection on s.

    The series converges iff the tail integral of e^{-s R} / A(R/2) dR
    does; an undetermined tail scan is treated as divergence, which biases
    the boundary upward by less than the scan's resolution.  For a pure
    exponential profile with rate c the answer is (n-1) c / 2.
    """
    prof = cusp.profile
    n1 = cusp.dim - 1

    def converges(s: float) -> bool:
        def f_log(rr):
            return -s * rr + log_orbital_parabolic(cusp, rr)
        return log_tail_integral(f_log, r_start).verdict is True

    hi = n1 * math.sqrt(prof.bounds.b ** 2 + prof.bounds.eps) / 2.0 + 1.0
    lo = tol / 4.0
    if converges(lo):
        return 0.0
    return bisect_increasing(converges, lo, hi, tol=tol)


def series_log_integrand(cusp: CuspModel, s: float,
                         weight: str = "linear") -> Callable:
    """Log integrand w(t) * e^{-s t} / A(t/2) of the orbit-series
    criteria; ``weight`` picks w(t) = t ("linear", the measure-finiteness
    form) or w(t) = 1 ("none", the bare series form).

    Summing w(d) exp(-s d) over distinct cusp excursions pairs each
    excursion of length t with the horoball area at its turning depth t/2,
    which is where the integrand comes from.
    """
    if weight not in ("linear", "none"):
        raise DomainError(f"unknown series weight {weight!r}")
    prof = cusp.profile
    n1 = cusp.dim - 1
    lc = math.log(cusp.c_norm)

    def f_log(t):
        t = np.asarray(t, dtype=float)
        out = -s * t - n1 * prof.log_value(t / 2.0) - lc
        if weight == "linear":
            out = out + np.log(t)
        return out

    return f_log


def series_convergence_at(cusp: CuspModel, s: float,
                          *, weight: str = "linear",
                          t_min: Optional[float] = None,
                          max_windows: int = 40) -> TailAnalysis:
    """Tail scan of the orbit-series integral from ``t_min`` (default:
    twice the start of the profile's final piece, so the integrand sees
    only the asymptotic tail law)."""
    if t_min is None:
        t_min = 2.0 * cusp.profile.pieces[-1].t0
        if t_min <= 0:
            t_min = 2.0
    return log_tail_integral(series_log_integrand(cusp, s, weight),
                             t_min, max_windows=max_windows)


def distance_from_horodistance(profile: Profile, d_xi: float,
                               *, tol: float = 1e-12) -> float:
    """Ambient distance between two points on the reference horosphere at
    horospherical distance d_xi apart: the connecting geodesic dives to
    the depth where the profile has shrunk by 1/d_xi, and back, giving
    2 T^{-1}(T(t_start) / d_xi).  Inverted by bisection on ln T.
    """
    if d_xi <= 0:
        raise DomainError("horospherical distance must be positive")
    t0 = profile.t_start
    target = profile.log_value(t0) - math.log(d_xi)
    if target > profile.log_value(t0):
        raise DomainError("horospherical distance below the profile's range")
    if d_xi == 1.0:
        return 2.0 * t0
    hi = max(t0 + 1.0, 2.0 * t0)
    while profile.log_value(hi) > target:
        hi = 2.0 * hi + 1.0
        if hi > 1e12:
            raise DomainError("profile never reaches the target decay")
    lo = t0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if profile.log_value(mid) > target:
            lo = mid
        else:
            hi = mid
    return lo + hi


# -- sampled growth data ------------------------------------------------------

@dataclass(frozen=True)
class GrowthSeries:
    """A sampled log-growth function: strictly increasing radii paired
    with ln f(R) values."""
    radii: np.ndarray
    log_values: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        radii = np.asarray(self.radii, dtype=float)
        vals = np.asarray(self.log_values, dtype=float)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "log_values", vals)
        if radii.ndim != 1 or radii.shape != vals.shape:
            raise DomainError("radii and log_values must be matching 1-d arrays")
        if radii.size and np.any(np.diff(radii) <= 0):
            raise DomainError("radii must be strictly increasing")
        if np.any(np.isnan(vals)):
            raise DomainError("log values must not be NaN")

    def __len__(self) -> int:
        return int(self.radii.size)

    def to_text(self) -> str:
        lines = [f"# {self.label}"]
        lines += [f"{float(r)!r} {float(v)!r}"
                  for r, v in zip(self.radii, self.log_values)]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "GrowthSeries":
        label = ""
        radii: list[float] = []
        vals: list[float] = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                label = line[1:].strip()
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DomainError(f"malformed growth series line: {line!r}")
            radii.append(float(parts[0]))
            vals.append(float(parts[1]))
        return GrowthSeries(radii=np.asarray(radii), log_values=np.asarray(vals),
                            label=label)

    def restricted(self, lo: float, hi: float) -> "GrowthSeries":
        mask = (self.radii >= lo) & (self.radii <= hi)
        return GrowthSeries(self.radii[mask], self.log_values[mask], self.label)


@dataclass(frozen=True)
class WindowPolicy:
    """Tail-window layout for exponent estimation: the outermost
    ``n_windows`` radius-halving windows (R_max/2^{j+1}, R_max/2^j],
    each required to hold at least ``min_points`` samples.  ``tol`` is the
    window-to-window agreement defining convergence."""
    n_windows: int = 4
    tol: float = 0.02
    min_points: int = 8


def _window_masks(radii: np.ndarray, policy: WindowPolicy) -> list[np.ndarray]:
    r_max = float(radii[-1])
    masks = []
    for j in range(policy.n_windows):
        hi = r_max / (2.0 ** j)
        lo = r_max / (2.0 ** (j + 1))
        mask = (radii > lo) & (radii <= hi)
        if int(np.sum(mask)) < policy.min_points:
            raise DomainError(
                f"window ({lo:.6g}, {hi:.6g}] holds {int(np.sum(mask))} samples, "
                f"needs {policy.min_points}")
        masks.append(mask)
    return masks


@dataclass(frozen=True)
class ExponentEstimate:
    """Upper/lower growth exponents read from tail windows.

    ``omega_plus`` is the largest, ``omega_minus`` the smallest value of
    ln f(R) / R seen across the tail windows; the ``converged`` flags
    report whether the two outermost windows agree to the policy
    tolerance.  For multiplicatively rescaled data the estimates shift by
    at most ln(scale) / R_tail_min, the exact sensitivity of a ratio
    statistic; no tighter invariance is possible.
    """
    omega_plus: float
    omega_minus: float
    converged_plus: bool
    converged_minus: bool
    window_peaks: tuple[float, ...]
    window_floors: tuple[float, ...]
    r_tail_min: float
    policy: WindowPolicy


def estimate_exponents(series: GrowthSeries,
                       policy: WindowPolicy = WindowPolicy()) -> ExponentEstimate:
    """Estimate limsup/liminf of ln f(R)/R from a sampled series."""
    radii = series.radii
    if radii.size == 0 or radii[-1] <= 0:
        raise DomainError("exponent estimation needs positive radii")
    if radii[0] <= 0:
        keep = radii > 0
        series = GrowthSeries(radii[keep], series.log_values[keep], series.label)
        radii = series.radii
    masks = _window_masks(radii, policy)
    ratios = series.log_values / radii
    peaks = tuple(float(np.max(ratios[m])) for m in masks)
    floors = tuple(float(np.min(ratios[m])) for m in masks)
    return ExponentEstimate(
        omega_plus=max(peaks),
        omega_minus=min(floors),
        converged_plus=abs(peaks[0] - peaks[1]) <= policy.tol,
        converged_minus=abs(floors[0] - floors[1]) <= policy.tol,
        window_peaks=peaks,
        window_floors=floors,
        r_tail_min=float(radii[-1]) / (2.0 ** policy.n_windows),
        policy=policy,
    )


# -- growth-type classification ------------------------------------------------

class GrowthClass(Enum):
    PURE = "pure"
    LOWER = "lower"
    UPPER = "upper"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class TrendPolicy:
    """Thresholds for growth-type classification of the normalized
    residual ln f(R) - delta R over the tail windows.

    ``tau`` is the drift (in nats across the window span) that counts as a
    genuine one-sided trend; ``band`` the total oscillation still accepted
    as purely exponential behavior.  Defaults are tuned so the catalog
    families at desk scale land in their analytically known classes.
    """
    tau: float = 0.4
    band: float = 1.0
    windows: WindowPolicy = field(default_factory=WindowPolicy)


@dataclass(frozen=True)
class GrowthClassification:
    kind: GrowthClass
    trend_peak: float
    trend_floor: float
    oscillation: float
    delta: float
    policy: TrendPolicy


def classify_growth(series: GrowthSeries, delta: float,
                    policy: TrendPolicy = TrendPolicy()) -> GrowthClassification:
    """Classify f against the pure law e^{delta R}.

    LOWER: even the residual's window peaks fall by at least tau from the
    innermost to the outermost tail window (f is an asymptotically
    vanishing fraction of e^{delta R}).
    UPPER: the window floors rise by at least tau (f outgrows e^{delta R}).
    PURE: neither trend fires and the residual's total excursion across
    the tail windows stays within ``band``.
    INDETERMINATE: anything else.
    """
    radii = series.radii
    resid = series.log_values - delta * radii
    masks = _window_masks(radii, policy.windows)
    peaks = [float(np.max(resid[m])) for m in masks]
    floors = [float(np.min(resid[m])) for m in masks]
    trend_peak = peaks[0] - peaks[-1]
    trend_floor = floors[0] - floors[-1]
    oscillation = max(peaks) - min(floors)
    if trend_peak <= -policy.tau:
        kind = GrowthClass.LOWER
    elif trend_floor >= policy.tau:
        kind = GrowthClass.UPPER
    elif oscillation <= policy.band:
        kind = GrowthClass.PURE
    else:
        kind = GrowthClass.INDETERMINATE
    return GrowthClassification(kind=kind, trend_peak=trend_peak,
                                trend_floor=trend_floor,
                                oscillation=oscillation, delta=delta,
                                policy=policy)


def critical_exponent_chain_bound(omega_plus: float, omega_minus: float) -> float:
    """Upper bound on the excursion-integral growth rate from one cusp's
    upper/lower parabolic exponents: max(omega_plus,
    2 (omega_plus - omega_minus))."""
    if omega_plus < omega_minus:
        raise DomainError("need omega_plus >= omega_minus")
    return max(omega_plus, 2.0 * (omega_plus - omega_minus))


@dataclass(frozen=True)
class ChainCheckReport:
    """Estimated link of parabolic exponents to excursion-integral growth.

    The chain asserts delta_minus <= omega_minus(F) <= omega_plus(F) <=
    max(delta_plus, 2 (delta_plus - delta_minus)), all four read off
    sampled series, so ``tol`` absorbs the finite-radius estimator error.
    """
    delta_plus: float
    delta_minus: float
    omega_plus_f: float
    omega_minus_f: float
    chain_bound: float
    lower_margin: float
    upper_margin: float
    tol: float
    passed: bool

    def summary(self) -> str:
        state = "pass" if self.passed else "FAIL"
        return (f"exponent chain: {self.delta_minus:.4f} <= "
                f"{self.omega_minus_f:.4f} <= {self.omega_plus_f:.4f} <= "
                f"{self.chain_bound:.4f} (tol {self.tol}): {state}")


def cuspidal_chain_check(cusp: CuspModel, r_max: float,
                         *, n_points: int = 129,
                         r_min: float = 1.0,
                         tol: float = 0.25,
                         policy: WindowPolicy = WindowPolicy(),
                         rel_tol: float = 1e-6) -> ChainCheckReport:
    """Sample the parabolic orbit count and the excursion integral on
    [r_min, r_max] and check the exponent chain between them.

    All four exponents are windowed estimates from the same grid (a
    truncated profile's analytic tail would otherwise hide the upper rate
    that its oscillation bands realize at finite radius), so the chain is
    asserted with slack ``tol``.
    """
    radii = np.linspace(r_min, r_max, n_points)
    orbital = sample_orbital_parabolic(cusp, radii)
    excursion = sample_cuspidal(cusp, radii, rel_tol=rel_tol)
    est_p = estimate_exponents(orbital, policy)
    est_f = estimate_exponents(excursion, policy)
    delta_plus = est_p.omega_plus
    delta_minus = est_p.omega_minus
    bound = critical_exponent_chain_bound(delta_plus, delta_minus)
    lower_margin = est_f.omega_minus - delta_minus
    upper_margin = bound - est_f.omega_plus
    mid_ok = est_f.omega_minus <= est_f.omega_plus + 1e-12
    passed = (lower_margin >= -tol) and (upper_margin >= -tol) and mid_ok
    return ChainCheckReport(
        delta_plus=delta_plus,
        delta_minus=delta_minus,
        omega_plus_f=est_f.omega_plus,
        omega_minus_f=est_f.omega_minus,
        chain_bound=bound,
        lower_margin=lower_margin,
        upper_margin=upper_margin,
        tol=tol,
        passed=passed,
    )
