"""Log-domain numerical kernels.

Every quantity of interest in this package is a positive number that can
span thousands of e-folds across a single evaluation window, so all sums,
integrals and tail estimates are carried out on natural logarithms.  The
kernels here are deliberately small: a stable log-sum-exp, an adaptive
composite-Simpson rule that integrates ``exp(f)`` given only ``f``, a
doubling-window tail analyser, and a monotone bisection helper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, QuadratureError

__all__ = [
    "logsumexp",
    "log_add",
    "log_sub",
    "log_integral",
    "TailAnalysis",
    "log_tail_integral",
    "bisect_increasing",
    "FittedConstant",
    "fit_bound_constant",
]

NEG_INF = float("-inf")


def logsumexp(values: np.ndarray | Sequence[float]) -> float:
    """ln(sum(exp(values))) computed without overflow.

    Accepts -inf entries (zero summands); returns -inf for an empty or
    all-(-inf) input.  NaN anywhere is a hard error since it silently
    poisons every downstream bound.
    """
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        return NEG_INF
    if np.isnan(arr).any():
        raise DomainError("NaN summand in logsumexp")
    m = float(np.max(arr))
    if m == NEG_INF:
        return NEG_INF
    if math.isinf(m):
        raise DomainError("+inf summand in logsumexp")
    return m + math.log(float(np.sum(np.exp(arr - m))))


def log_add(a: float, b: float) -> float:
    """ln(e^a + e^b)."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def log_sub(a: float, b: float) -> float:
    """ln(e^a - e^b); requires a >= b."""
    if b == NEG_INF:
        return a
    if b > a:
        raise DomainError(f"log_sub needs a >= b, got a={a!r} b={b!r}")
    if a == b:
        return NEG_INF
    return a + math.log1p(-math.exp(b - a))


def _simpson_log(f_log: Callable[[np.ndarray], np.ndarray],
                 lo: float, hi: float, panels: int) -> float:
    """Composite Simpson value of ln(integral of exp(f_log)) on [lo, hi]."""
    t = np.linspace(lo, hi, 2 * panels + 1)
    y = np.asarray(f_log(t), dtype=float)
    if y.shape != t.shape:
        raise DomainError("log integrand must be vectorized over its input")
    if np.isnan(y).any():
        raise DomainError(f"log integrand returned NaN on [{lo}, {hi}]")
    w = np.full(t.size, 2.0)
    w[0] = w[-1] = 1.0
    w[1::2] = 4.0
    h = (hi - lo) / (2 * panels)
    return logsumexp(y + np.log(w)) + math.log(h / 3.0)


# Segments whose coarse estimate sits this many nats below the running
# maximum cannot move a 1e-8 relative target and are left unrefined.
_NEGLIGIBLE_NATS = 46.0


def log_integral(f_log: Callable[[np.ndarray], np.ndarray],
                 lo: float,
                 hi: float,
                 *,
                 rel_tol: float = 1e-8,
                 breakpoints: Sequence[float] = (),
                 max_panels: int = 1 << 20,
                 min_panels: int = 8) -> float:
    """ln of the integral of exp(f_log) over [lo, hi].

    The interval is split at the supplied breakpoints (points where the
    integrand is continuous but not smooth, e.g. profile piece joins) and
    each smooth segment is refined by panel doubling until two successive
    Simpson values agree to ``rel_tol`` in the linear domain.  Raises
    QuadratureError, carrying the partial estimate, if any single segment
    still disagrees at ``max_panels`` panels.
    """
    if not (hi >= lo):
        raise DomainError(f"bad integration interval [{lo}, {hi}]")
    if hi == lo:
        return NEG_INF
    cuts = sorted({lo, hi, *(float(b) for b in breakpoints if lo < b < hi)})
    segments = list(zip(cuts[:-1], cuts[1:]))

    estimates = [_simpson_log(f_log, a, b, min_panels) for a, b in segments]
    total = logsumexp(estimates)

    for i, (a, b) in enumerate(segments):
        if estimates[i] < total - _NEGLIGIBLE_NATS:
            continue
        panels = min_panels
        prev = estimates[i]
        while True:
            panels *= 2
            if panels > max_panels:
                estimates[i] = prev
                raise QuadratureError(
                    f"panel budget {max_panels} exhausted on [{a}, {b}]",
                    log_partial=logsumexp(estimates))
            cur = _simpson_log(f_log, a, b, panels)
            if prev == NEG_INF and cur == NEG_INF:
                break
            if prev > NEG_INF and abs(1.0 - math.exp(min(cur - prev, 700.0))) <= rel_tol:
                prev = cur
                break
            prev = cur
        estimates[i] = prev
        total = logsumexp(estimates)
    return total


@dataclass(frozen=True)
class TailAnalysis:
    """Outcome of a doubling-window scan of an improper integral.

    ``verdict`` is True when the window ratios certify convergence, False
    when they certify divergence, and None when the scan budget ended
    without either run completing.  ``log_tail`` is the log of the full
    tail integral (scanned mass plus a geometric-remainder estimate) when
    convergent, and the log of the scanned partial mass otherwise.
    """
    verdict: Optional[bool]
    log_tail: float
    log_segments: tuple[float, ...]
    ratios: tuple[float, ...]

    @property
    def converges(self) -> bool:
        return self.verdict is True

    @property
    def diverges(self) -> bool:
        return self.verdict is False


def log_tail_integral(f_log: Callable[[np.ndarray], np.ndarray],
                      t0: float,
                      *,
                      ratio_conv: float = 0.9,
                      ratio_div: float = 1.0,
                      run_length: int = 4,
                      max_windows: int = 40,
                      rel_tol: float = 1e-8,
                      remainder_cut: float = 1e-9,
                      hard_ratio: Optional[float] = None) -> TailAnalysis:
    """Analyse the integral of exp(f_log) over [t0, infinity).

    The tail is scanned over the doubling windows [t0*2^k, t0*2^{k+1}].
    ``run_length`` consecutive window ratios at or below ``ratio_conv``
    certify convergence; after that verdict the scan keeps extending until
    the geometric remainder bound drops below ``remainder_cut`` of the
    accumulated mass, and the bound is folded into ``log_tail``.

    Divergence is never declared from early windows alone: because the
    window width doubles, the first ratios of a slowly convergent tail
    routinely sit above 1 before the decay catches up.  The scan therefore
    runs to ``max_windows`` and reports divergence only when the final
    ``run_length`` ratios all sit at or above ``ratio_div`` (less a small
    allowance for quadrature noise).  The one exception is a run of ratios
    at or above ``hard_ratio`` (default e^10), far beyond what that
    transient can produce, which ends the scan immediately and keeps
    refinement costs bounded for strongly divergent integrands.  A
    divergence run observed after a convergence verdict is conflicting
    evidence and yields verdict None.
    """
    if t0 <= 0:
        raise DomainError("tail scan needs a positive starting point")
    if hard_ratio is None:
        hard_ratio = math.exp(10.0)
    div_floor = ratio_div * (1.0 - 8.0 * rel_tol)
    segs: list[float] = []
    ratios: list[float] = []
    conv_run = 0
    div_run = 0
    hard_run = 0
    verdict: Optional[bool] = None
    conflicted = False
    total = NEG_INF
    for k in range(max_windows):
        a = t0 * (2.0 ** k)
        b = t0 * (2.0 ** (k + 1))
        coarse = _simpson_log(f_log, a, b, 8)
        if segs and coarse <= total - _NEGLIGIBLE_NATS:
            # Cannot move the accumulated mass, and is as decisive for the
            # ratio tests as a refined value would be.
            seg = coarse
        else:
            try:
                seg = log_integral(f_log, a, b, rel_tol=rel_tol)
            except QuadratureError as exc:
                # Deep windows evaluate the integrand as a difference of
                # huge terms, whose rounding noise puts rel_tol out of
                # reach; the partial estimate is still far more accurate
                # than the ratio thresholds require.
                seg = exc.log_partial
        segs.append(seg)
        total = logsumexp(segs)
        if k >= 1:
            if seg == NEG_INF:
                r = 0.0
            else:
                d = seg - segs[-2]
                r = math.exp(d) if d < 700.0 else math.inf
            ratios.append(r)
            if r <= ratio_conv:
                conv_run += 1
                div_run = hard_run = 0
            elif r >= div_floor:
                div_run += 1
                conv_run = 0
                hard_run = hard_run + 1 if r >= hard_ratio else 0
            else:
                conv_run = div_run = hard_run = 0
            if verdict is None:
                if conv_run >= run_length:
                    verdict = True
                elif hard_run >= run_length:
                    verdict = False
                    break
            elif verdict is True and div_run >= run_length:
                verdict = None
                conflicted = True
                break
            if verdict is True:
                # Remainder after the last window is at most a geometric
                # series with the observed (capped) ratio.
                rho = min(max(r, 1e-300), ratio_conv)
                rem = segs[-1] + math.log(rho / (1.0 - rho))
                if rem <= total + math.log(remainder_cut):
                    break
    if (verdict is None and not conflicted and len(ratios) >= run_length
            and all(r >= div_floor for r in ratios[-run_length:])):
        verdict = False
    mass = total
    if verdict is True:
        rho = min(max(ratios[-1], 1e-300), ratio_conv)
        mass = log_add(mass, segs[-1] + math.log(rho / (1.0 - rho)))
    return TailAnalysis(verdict=verdict, log_tail=mass,
                        log_segments=tuple(segs), ratios=tuple(ratios))


def bisect_increasing(pred: Callable[[float], bool],
                      lo: float,
                      hi: float,
                      *,
                      tol: float = 1e-6,
                      max_iter: int = 200) -> float:
    """Boundary of a monotone predicate: False on [lo, x), True on (x, hi].

    Returns the midpoint of the final bracket.  The predicate must already
    differ at the endpoints; widening the bracket is the caller's job.
    """
    if not (hi > lo):
        raise DomainError("bisection needs lo < hi")
    if pred(lo):
        raise DomainError("predicate already true at the lower endpoint")
    if not pred(hi):
        raise DomainError("predicate still false at the upper endpoint")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class FittedConstant:
    """A multiplicative constant calibrated on one radius range and then
    frozen, so later assertions on a disjoint range are honest.

    ``log_value`` is the natural log of the constant; ``fit_range`` records
    the calibration interval; ``safety`` the multiplier applied to the
    worst calibration residual.
    """
    log_value: float
    fit_range: tuple[float, float]
    safety: float

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


def fit_bound_constant(log_residuals: Sequence[float],
                       fit_range: tuple[float, float],
                       *,
                       safety: float = 1.25,
                       floor: float = 0.02) -> FittedConstant:
    """Freeze a two-sided envelope constant from calibration residuals.

    ``log_residuals`` are observed values of ln(measured / model); the
    returned constant C satisfies 1/C <= measured/model <= C on the
    calibration range with margin ``safety`` (applied in the log domain).
    """
    resid = np.asarray(list(log_residuals), dtype=float)
    if resid.size == 0:
        raise DomainError("cannot fit a constant from zero residuals")
    if np.isnan(resid).any() or np.isinf(resid).any():
        raise DomainError("non-finite calibration residual")
    worst = float(np.max(np.abs(resid)))
    return FittedConstant(log_value=max(safety * worst, floor),
                          fit_range=(float(fit_range[0]), float(fit_range[1])),
                          safety=safety)
