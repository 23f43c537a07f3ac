"""Bayesian FDR of fixed-threshold rules: evaluation, inversion, asymptotics.

For the two-group scale mixture, the BFDR of "reject when X^2/sigma^2 >= c^2"
is

    BFDR(c) = (1-p) t1 / ((1-p) t1 + p (1-t2)),

a strictly decreasing function of c that starts at 1-p and vanishes as
c -> inf, so every level alpha in (0, 1-p) has a unique threshold.
Inversion is done by plain bisection on the |Z| scale: the map is provably
monotone, bisection cannot be fooled, and fifty halvings cost nothing.

The threshold matched to the false-discovery-rate procedure ("GW" here,
after the fixed-point equation it solves) is computed by an independent
bisection on its own defining equation; that it coincides with the BFDR
threshold at level alpha(1-p) is a theorem, and the test suite checks the
two solvers against each other rather than wiring the identity in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special

from .errors import LevelError, ParameterError
from .model import (
    AsymptoticConstants,
    DerivedParams,
    MixtureModel,
    ThresholdSq,
    type1_exact,
    type2_exact,
)

__all__ = [
    "BfdrLevel",
    "BfdrDiagnostics",
    "bfdr_of_threshold",
    "bfdr_threshold",
    "gw_threshold",
    "bfdr_threshold_asymptotic",
    "oracle_bfdr_asymptotic",
    "oracle_bfdr_asymptotic_finite",
    "bfdr_optimality_diagnostics",
    "bfdr_identity_residual",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BfdrLevel:
    """A target level alpha together with the odds r_alpha = alpha/(1-alpha)."""

    alpha: float
    r_alpha: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and 0.0 < self.alpha < 1.0):
            raise ParameterError(f"alpha must lie in (0,1), got {self.alpha!r}")
        expected = self.alpha / (1.0 - self.alpha)
        if self.r_alpha is None:
            object.__setattr__(self, "r_alpha", expected)
        elif abs(self.r_alpha - expected) > 1e-12 * expected:
            raise ParameterError("r_alpha must equal alpha/(1-alpha)")


@dataclass(frozen=True)
class BfdrDiagnostics:
    """Per-point values of the BFDR-rule optimality conditions.

    s_t measures how far the level sits from the scale-matched choice
    r_alpha ~ 1/(delta sqrt(u)); optimality along a regime needs s_t -> 0
    and cond_w2 -> -inf.  t_uvd = delta sqrt(u log v) is the rate scale of
    the oracle's own BFDR.
    """

    s_t: float
    cond_w2: float
    t_uvd: float


def _tail_half(x: float) -> float:
    """1 - Phi(x) for x >= 0, full relative accuracy."""
    return 0.5 * special.erfc(x / _SQRT2)


def bfdr_of_threshold(model: MixtureModel, c_sq) -> float:
    """BFDR of the fixed-threshold rule at c^2; 1-p at c^2 = 0, -> 0 as c^2 -> inf."""
    c_sq_f = float(c_sq)
    if math.isnan(c_sq_f) or c_sq_f < 0.0:
        raise ParameterError("c_sq must be >= 0")
    p = model.p
    if math.isinf(c_sq_f):
        return 0.0
    c = math.sqrt(c_sq_f)
    s = math.sqrt(model.u + 1.0)
    t1 = 2.0 * _tail_half(c)
    alt_tail = 2.0 * _tail_half(c / s)  # = 1 - t2
    if t1 > 0.0:
        num = (1.0 - p) * t1
        return num / (num + p * alt_tail)
    # Deep tail: both tails underflow; work with the log of the tail ratio
    # h = (1 - Phi(c/s)) / (1 - Phi(c)), so BFDR = 1 / (1 + (p/(1-p)) h).
    log_ratio = math.log(p / (1.0 - p)) + special.log_ndtr(-c / s) - special.log_ndtr(-c)
    if log_ratio > 36.0:
        # 1/(1+e^x) = e^{-x} to double precision; underflows harmlessly to 0.
        return math.exp(-log_ratio)
    return 1.0 / (1.0 + math.exp(log_ratio))


def _bisect_decreasing(fn, target: float, hi_start: float) -> float:
    """Root of fn(c) = target for strictly decreasing fn with fn(0) > target.

    Grows the bracket geometrically from hi_start until fn(hi) < target,
    then bisects the |Z|-scale bracket down to ~1e-13 width.
    """
    hi = max(hi_start, 1.0)
    for _ in range(200):
        if fn(hi) < target:
            break
        hi *= 2.0
    else:
        raise ParameterError("failed to bracket the threshold")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if fn(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def bfdr_threshold(model: MixtureModel, level: BfdrLevel) -> ThresholdSq:
    """The unique c^2 with BFDR(c^2) = alpha, for alpha in (0, 1-p).

    Bisection on the monotone map; the returned threshold satisfies
    |BFDR(c^2) - alpha| <= 1e-11.
    """
    supremum = 1.0 - model.p
    if level.alpha >= supremum:
        raise LevelError(
            f"alpha={level.alpha!r} is not attainable; BFDR ranges in (0, 1-p] "
            f"with supremum 1-p = {supremum!r} at c^2 = 0",
            supremum=supremum,
        )
    u = model.u
    # Initial bracket sized from the delta-free composite u f^2; generous by
    # construction, then grown geometrically if even that is too small.
    log_v1 = math.log(u) + 2.0 * math.log(model.f)
    hi_sq = 4.0 * (max(log_v1, 0.0) + math.log(u + 2.0) + 50.0)
    c = _bisect_decreasing(lambda z: bfdr_of_threshold(model, z * z), level.alpha, math.sqrt(hi_sq))
    c_sq = ThresholdSq(c * c)
    if abs(bfdr_of_threshold(model, c_sq) - level.alpha) > 1e-11:
        raise ParameterError("bisection failed to reach the 1e-11 level tolerance")
    return c_sq


def _gw_value(model: MixtureModel, c: float) -> float:
    """Left side of the fixed-point equation the GW threshold solves:
    (1-Phi(c)) / ((1-p)(1-Phi(c)) + p(1-Phi(c/sqrt(u+1))))."""
    p = model.p
    s = math.sqrt(model.u + 1.0)
    t0 = _tail_half(c)
    ta = _tail_half(c / s)
    den = (1.0 - p) * t0 + p * ta
    if den > 0.0 and t0 > 0.0:
        return t0 / den
    log_ratio = math.log(p) + special.log_ndtr(-c / s) - special.log_ndtr(-c)
    if log_ratio > 36.0:
        # (1-p) is negligible next to e^{log_ratio}.
        return math.exp(-log_ratio)
    return 1.0 / ((1.0 - p) + math.exp(log_ratio))


def gw_threshold(model: MixtureModel, level: BfdrLevel) -> ThresholdSq:
    """Nonrandom stand-in for the BH threshold: solves the GW equation at alpha.

    Solved by direct bisection on its own equation — not routed through
    bfdr_threshold — so the alpha' = alpha(1-p) equivalence stays a testable
    fact rather than an implementation artifact.
    """
    u = model.u
    log_v1 = math.log(u) + 2.0 * math.log(model.f)
    hi_sq = 4.0 * (max(log_v1, 0.0) + math.log(u + 2.0) + 50.0)
    c = _bisect_decreasing(lambda z: _gw_value(model, z), level.alpha, math.sqrt(hi_sq))
    c_sq = ThresholdSq(c * c)
    if abs(_gw_value(model, c) - level.alpha) > 1e-11:
        raise ParameterError("bisection failed to reach the 1e-11 level tolerance")
    return c_sq


def bfdr_threshold_asymptotic(f: float, level: BfdrLevel, consts: AsymptoticConstants) -> ThresholdSq:
    """Expansion of the BFDR threshold for f/r_alpha -> inf:
    2 log(f/r_alpha) - log(2 log(f/r_alpha)) + log(2/(pi D^2))."""
    if not (math.isfinite(f) and f > 0.0):
        raise ParameterError("f must be a finite positive real")
    big_l = math.log(f) - math.log(level.r_alpha)
    if big_l <= 1.0:
        raise ParameterError("asymptotic BFDR threshold requires f/r_alpha > e")
    c_sq = 2.0 * big_l - math.log(2.0 * big_l) + math.log(2.0 / (math.pi * consts.D * consts.D))
    return ThresholdSq(c_sq)


def oracle_bfdr_asymptotic(derived: DerivedParams, consts: AsymptoticConstants) -> float:
    """Leading term of the Bayes oracle's own BFDR along a regime where
    t_uvd = delta sqrt(u log v) diverges: sqrt(2/pi) e^{-C/2} / (D t_uvd)."""
    if derived.log_v <= 0.0:
        raise ParameterError("oracle_bfdr_asymptotic requires v > 1")
    return math.sqrt(2.0 / math.pi) * math.exp(-consts.C / 2.0) / (consts.D * derived.t_uvd)


def oracle_bfdr_asymptotic_finite(consts: AsymptoticConstants, c1: float) -> float:
    """Limit of the oracle's BFDR when t_uvd -> C1 finite:
    1 / (1 + sqrt(pi/2) e^{C/2} D C1).  The regime (diverging vs finite
    t_uvd) is the caller's knowledge, hence the explicit C1 argument."""
    if not (math.isfinite(c1) and c1 >= 0.0):
        raise ParameterError("C1 must be finite and >= 0")
    return 1.0 / (1.0 + math.sqrt(math.pi / 2.0) * math.exp(consts.C / 2.0) * consts.D * c1)


def bfdr_optimality_diagnostics(derived: DerivedParams, level: BfdrLevel) -> BfdrDiagnostics:
    """s_t, the mixed condition value, and t_uvd at one regime point."""
    log_f = math.log(derived.f)
    big_l = log_f - math.log(level.r_alpha)
    if big_l <= 0.0:
        raise ParameterError("diagnostics require f/r_alpha > 1")
    num = log_f + math.log(derived.delta) + 0.5 * math.log(derived.u)
    if num <= 0.0:
        raise ParameterError("diagnostics require f * delta * sqrt(u) > 1")
    s_t = num / big_l - 1.0
    return BfdrDiagnostics(
        s_t=s_t,
        cond_w2=2.0 * s_t * big_l - math.log(big_l),
        t_uvd=derived.t_uvd,
    )


def bfdr_identity_residual(model: MixtureModel, c_sq) -> float:
    """Residual of the defining identity (1-alpha)(1-p) t1 + alpha p t2 - alpha p
    at alpha = BFDR(c^2); zero up to rounding for every (model, c^2)."""
    alpha = bfdr_of_threshold(model, c_sq)
    p = model.p
    t1 = type1_exact(c_sq)
    t2 = type2_exact(c_sq, model.u)
    return (1.0 - alpha) * (1.0 - p) * t1 + alpha * p * t2 - alpha * p
