"""Bayes risk of fixed-threshold rules and threshold-optimality diagnostics.

Risk here is the expected additive loss over all m tests,

    R = m [ (1-p) t1 delta0  +  p t2 deltaA ],

split into its type I component r1 and type II component r2.  A rule is
judged by its ratio R / R_opt against the oracle; whether that ratio can
tend to 1 along a regime is characterized by two conditions on the
centred threshold z_t = c^2 - log v: z_t / log v -> 0 and
z_t + 2 log log v -> +inf.  The module reports those quantities per point
and never a boolean verdict — finitely many grid points cannot decide an
asymptotic statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError
from .model import (
    AsymptoticConstants,
    TestingSetting,
    ThresholdSq,
    derive,
    oracle_threshold_sq,
    type1_exact,
    type2_exact,
    type2_asymptotic,
)

__all__ = [
    "RiskBreakdown",
    "OptimalityDiagnostics",
    "fixed_threshold_risk",
    "optimal_risk_exact",
    "optimal_risk_asymptotic",
    "risk_ratio",
    "optimality_diagnostics",
]


@dataclass(frozen=True)
class RiskBreakdown:
    r1: float
    r2: float
    total: float

    def __post_init__(self):
        if self.r1 < 0.0 or self.r2 < 0.0:
            raise ParameterError("risk components must be >= 0")
        if abs(self.total - (self.r1 + self.r2)) > 1e-12 * max(1.0, self.total):
            raise ParameterError("total must equal r1 + r2")


@dataclass(frozen=True)
class OptimalityDiagnostics:
    """Per-point values of the two optimality conditions; crit2 is -inf when
    v <= e, where log log v is not usable."""

    z_t: float
    ratio1: float
    crit2: float


def fixed_threshold_risk(setting: TestingSetting, c_sq) -> RiskBreakdown:
    """Exact risk of "reject when X^2/sigma^2 >= c^2" under the setting."""
    p = setting.model.p
    u = setting.model.u
    m = float(setting.m)
    r1 = m * (1.0 - p) * type1_exact(c_sq) * setting.losses.delta0
    r2 = m * p * type2_exact(c_sq, u) * setting.losses.deltaA
    return RiskBreakdown(r1=r1, r2=r2, total=r1 + r2)


def optimal_risk_exact(setting: TestingSetting) -> RiskBreakdown:
    """Risk of the Bayes oracle: fixed_threshold_risk at the oracle threshold.

    In the degenerate case the threshold is 0 (reject everything) and the
    risk is m (1-p) delta0 by construction.
    """
    d = derive(setting)
    c_sq = oracle_threshold_sq(d.u, log_v=d.log_v)
    return fixed_threshold_risk(setting, c_sq)


def optimal_risk_asymptotic(setting: TestingSetting, consts: AsymptoticConstants) -> float:
    """Leading form of the optimal risk: m p deltaA (2 Phi(sqrt(C)) - 1) on the
    verge (C > 0), m p deltaA sqrt(2 log v / (pi u)) when C = 0.  Needs v > 1."""
    d = derive(setting)
    if d.log_v <= 0.0:
        raise ParameterError("optimal_risk_asymptotic requires v > 1")
    if consts.C > 0.0:
        t2 = type2_asymptotic(d.u, d.v, consts)  # constant in v; v unused
    else:
        t2 = math.sqrt(2.0 * d.log_v / (math.pi * d.u))
    return float(setting.m) * setting.model.p * setting.losses.deltaA * t2


def risk_ratio(rule_risk: RiskBreakdown, opt: RiskBreakdown) -> float:
    """R / R_opt.  >= 1 up to ~1e-12 noise whenever opt is the exact oracle risk."""
    if opt.total == 0.0:
        raise ParameterError("optimal risk is zero; ratio undefined")
    return rule_risk.total / opt.total


def optimality_diagnostics(c_sq, v: float | None = None, *, log_v: float | None = None) -> OptimalityDiagnostics:
    """Centred threshold z_t = c^2 - log v and the two condition values.

    Accepts log_v directly for regimes where v overflows.  Requires v > 1;
    crit2 is reported as -inf for v <= e.
    """
    if (v is None) == (log_v is None):
        raise ParameterError("supply exactly one of v or log_v")
    if log_v is None:
        if not (math.isfinite(float(v)) and float(v) > 1.0):
            raise ParameterError("optimality_diagnostics requires v > 1")
        lv = math.log(float(v))
    else:
        lv = float(log_v)
        if not (math.isfinite(lv) and lv > 0.0):
            raise ParameterError("optimality_diagnostics requires log v > 0")
    c = float(c_sq)
    if math.isnan(c) or c < 0.0:
        raise ParameterError("c_sq must be >= 0")
    z_t = c - lv
    crit2 = z_t + 2.0 * math.log(lv) if lv > 1.0 else -math.inf
    return OptimalityDiagnostics(z_t=z_t, ratio1=z_t / lv, crit2=crit2)
