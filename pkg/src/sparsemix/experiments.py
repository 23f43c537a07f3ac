"""Regimes on the verge of detectability and preset convergence studies.

A regime is a path t -> (m, p, u, delta, ...) along which u and v diverge
with log v / u -> C finite.  The generators here all take u = beta log m and
one of two sparsity families — power (p = a m^{-kappa}) or extreme
(p = z_m / m with log z_m = o(log m)) — optionally with a decaying loss
ratio delta_m = (log m)^{-g} and a level schedule alpha_m.  The declared
limit C follows from the family: 2 kappa / beta for power sparsity,
2 / beta for extreme.

run_convergence turns (regime, rule) into one row per grid point: the
rule's risk (closed form, or Monte-Carlo for the step-up procedure), the
exact optimal risk, their ratio, and the threshold/level diagnostics whose
trends the optimality conditions are stated in.  Exact mode defaults to a
wide geometric grid m = 1e2 ... 1e16 — closed forms make it free, and the
log-rate convergence would be invisible on anything narrower.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .bfdr import BfdrLevel, bfdr_optimality_diagnostics
from .errors import ParameterError
from .model import (
    AsymptoticConstants,
    DerivedParams,
    Losses,
    MixtureModel,
    TestingSetting,
    derive,
    error_rates,
)
from .montecarlo import mc_run
from .risk import (
    fixed_threshold_risk,
    optimal_risk_exact,
    optimality_diagnostics,
)
from .rules import (
    BfdrRule,
    BhRule,
    BonferroniRule,
    GwRule,
    LogVRule,
    ReplicateRule,
    Rule,
    UniversalRule,
    fill_rule,
    is_fixed_threshold,
    threshold_sq,
)

__all__ = [
    "PowerSparsity",
    "ExtremeSparsity",
    "ConstantDelta",
    "DecayingDelta",
    "RegimePoint",
    "Regime",
    "ConvergenceRow",
    "McOptions",
    "DEFAULT_EXACT_GRID",
    "DEFAULT_MC_GRID",
    "PRESET_NAMES",
    "regime_verge",
    "preset",
    "point_setting",
    "run_convergence",
    "CONVERGENCE_COLUMNS",
]

DEFAULT_EXACT_GRID: tuple[float, ...] = tuple(10.0**k for k in range(2, 17))
DEFAULT_MC_GRID: tuple[float, ...] = (1e3, 1e4, 1e5, 1e6)

_P_FLOOR = 1e-300
_P_CAP = 1.0 - 1e-12


@dataclass(frozen=True)
class PowerSparsity:
    """p_m = a m^{-kappa} with kappa in (0, 1]."""

    kappa: float
    a: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and 0.0 < self.kappa <= 1.0):
            raise ParameterError("kappa must lie in (0, 1]")
        if not (np.isfinite(self.a) and self.a > 0.0):
            raise ParameterError("a must be a finite positive real")

    def p(self, m: float) -> float:
        return self.a * m**-self.kappa

    @property
    def c_numerator(self) -> float:
        return 2.0 * self.kappa


@dataclass(frozen=True)
class ExtremeSparsity:
    """p_m = s (log m)^log_exponent / m — on the 1/m scale up to slowly
    varying factors, so log z_m = o(log m) automatically."""

    s: float = 1.0
    log_exponent: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.s) and self.s > 0.0):
            raise ParameterError("s must be a finite positive real")
        if not (np.isfinite(self.log_exponent) and self.log_exponent >= 0.0):
            raise ParameterError("log_exponent must be >= 0")

    def p(self, m: float) -> float:
        return self.s * math.log(m) ** self.log_exponent / m

    @property
    def c_numerator(self) -> float:
        return 2.0


@dataclass(frozen=True)
class ConstantDelta:
    value: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.value) and self.value > 0.0):
            raise ParameterError("delta must be a finite positive real")

    def delta(self, m: float) -> float:
        return self.value


@dataclass(frozen=True)
class DecayingDelta:
    """delta_m = (log m)^{-g}, g > 0: vanishing, but log delta_m = o(log m)."""

    g: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.g) and self.g > 0.0):
            raise ParameterError("g must be a finite positive real")

    def delta(self, m: float) -> float:
        return math.log(m) ** -self.g


_SPARSITIES = (PowerSparsity, ExtremeSparsity)
_DELTA_RULES = (ConstantDelta, DecayingDelta)


@dataclass(frozen=True)
class RegimePoint:
    """One grid point of a regime, with everything derived once.

    c_finite is log v / u at this point — the finite-m value of the
    quantity whose declared limit is consts.C.
    """

    t: float
    m: float
    p: float
    u: float
    delta: float
    derived: DerivedParams
    consts: AsymptoticConstants
    c_finite: float
    alpha: float | None = None
    n: float | None = None

    def __post_init__(self):
        d = self.derived
        f = (1.0 - self.p) / self.p
        for got, want, name in ((d.u, self.u, "u"), (d.f, f, "f"), (d.delta, self.delta, "delta")):
            if abs(got - want) > 1e-12 * max(abs(want), 1.0):
                raise ParameterError(f"derived parameters inconsistent with the point ({name})")
        if self.alpha is not None and not (0.0 < self.alpha < 1.0):
            raise ParameterError("alpha must lie in (0,1)")


@dataclass(frozen=True)
class Regime:
    name: str
    generator: Callable[[float], RegimePoint]
    t_grid: tuple[float, ...]

    def points(self) -> list[RegimePoint]:
        return [self.generator(t) for t in self.t_grid]


def _schedule(rule, name: str) -> Callable[[float], float] | None:
    """Normalize a constant-or-callable per-m schedule."""
    if rule is None:
        return None
    if callable(rule):
        return rule
    value = float(rule)
    if not np.isfinite(value):
        raise ParameterError(f"{name} must be finite")
    return lambda m: value


def regime_verge(
    beta: float,
    sparsity,
    delta_rule,
    *,
    alpha_rule=None,
    n_rule=None,
    t_grid: Sequence[float] | None = None,
    name: str | None = None,
) -> Regime:
    """Verge-of-detectability regime: u = beta log m over a sparsity family.

    alpha_rule / n_rule may be constants or callables of m; their values are
    attached to each point for rules that take their level or replicate
    count from the regime.
    """
    if not (np.isfinite(beta) and beta > 0.0):
        raise ParameterError("beta must be a finite positive real")
    if not isinstance(sparsity, _SPARSITIES):
        raise ParameterError(
            "sparsity must be PowerSparsity or ExtremeSparsity, "
            f"got {type(sparsity).__name__}"
        )
    if not isinstance(delta_rule, _DELTA_RULES):
        raise ParameterError(
            "delta_rule must be ConstantDelta or DecayingDelta, "
            f"got {type(delta_rule).__name__}"
        )
    alpha_fn = _schedule(alpha_rule, "alpha_rule")
    n_fn = _schedule(n_rule, "n_rule")
    consts = AsymptoticConstants.from_limit(sparsity.c_numerator / beta)
    grid = DEFAULT_EXACT_GRID if t_grid is None else tuple(float(t) for t in t_grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParameterError("t_grid must be strictly increasing")

    def generator(t: float) -> RegimePoint:
        m = float(t)
        if not (np.isfinite(m) and m > 1.0):
            raise ParameterError("regime points need m > 1")
        p = min(max(sparsity.p(m), _P_FLOOR), _P_CAP)
        u = beta * math.log(m)
        delta = delta_rule.delta(m)
        f = (1.0 - p) / p
        derived = DerivedParams(u=u, f=f, delta=delta, v=u * f * f * delta * delta)
        return RegimePoint(
            t=m,
            m=m,
            p=p,
            u=u,
            delta=delta,
            derived=derived,
            consts=consts,
            c_finite=derived.log_v / u,
            alpha=alpha_fn(m) if alpha_fn is not None else None,
            n=n_fn(m) if n_fn is not None else None,
        )

    return Regime(name=name or "verge", generator=generator, t_grid=grid)


def point_setting(point: RegimePoint) -> TestingSetting:
    """Materialize a regime point as a concrete testing setting (sigma = 1,
    deltaA = 1, so tau^2 = u and delta0 = delta)."""
    return TestingSetting(
        model=MixtureModel(p=point.p, sigma_sq=1.0, tau_sq=point.u),
        losses=Losses(delta0=point.delta, deltaA=1.0),
        m=point.m,
    )


# ---------------------------------------------------------------------------
# Presets: one named (regime, rule) pair per optimality statement family.


def _preset_universal(s=1.0, beta=2.0, d=0.0):
    regime = regime_verge(
        beta, ExtremeSparsity(s=s), ConstantDelta(), name="lemma_universal"
    )
    return regime, UniversalRule(d=d)


def _preset_replicate(s=1.0, beta=1.0, d=0.0):
    # Replicate designs: n observations averaged per test, scaled so u = n.
    regime = regime_verge(
        beta,
        ExtremeSparsity(s=s),
        ConstantDelta(),
        n_rule=lambda m: beta * math.log(m),
        name="replicate_verge",
    )
    return regime, ReplicateRule(d=d)


def _preset_bfdr_sqrt_level(s=1.0, beta=1.0, s1=1.0):
    # Level schedule alpha = s1/sqrt(n) with n = log(m)/s replicates.
    def n_of(m):
        return math.log(m) / s

    regime = regime_verge(
        beta,
        ExtremeSparsity(s=s),
        ConstantDelta(),
        alpha_rule=lambda m: min(s1 / math.sqrt(n_of(m)), 0.5),
        n_rule=n_of,
        name="bfdr_sqrt_level",
    )
    return regime, BfdrRule()


def _preset_bfdr_fixed_alpha(alpha=0.1, kappa=0.5, beta=2.0, g=1.0):
    regime = regime_verge(
        beta,
        PowerSparsity(kappa=kappa),
        DecayingDelta(g=g),
        alpha_rule=alpha,
        name="bfdr_fixed_alpha",
    )
    return regime, BfdrRule()


def _preset_bfdr_fixed_delta(s1=1.0, kappa=0.5, beta=2.0):
    regime = regime_verge(
        beta,
        PowerSparsity(kappa=kappa),
        ConstantDelta(),
        alpha_rule=lambda m: min(s1 / math.log(m), 0.5),
        name="bfdr_fixed_delta",
    )
    return regime, BfdrRule()


def _preset_gw_fixed_alpha(alpha=0.1, kappa=0.5, beta=2.0, g=1.0):
    regime, _ = _preset_bfdr_fixed_alpha(alpha=alpha, kappa=kappa, beta=beta, g=g)
    return replace(regime, name="gw_fixed_alpha"), GwRule()


def _preset_bonferroni_extreme(s=1.0, beta=2.0, s1=1.0):
    regime = regime_verge(
        beta,
        ExtremeSparsity(s=s),
        ConstantDelta(),
        alpha_rule=lambda m: min(s1 / math.log(m), 0.5),
        name="bonferroni_extreme",
    )
    return regime, BonferroniRule()


def _preset_bh_fixed_alpha(alpha=0.1, kappa=0.5, beta=2.0, g=1.0):
    regime = regime_verge(
        beta,
        PowerSparsity(kappa=kappa),
        DecayingDelta(g=g),
        alpha_rule=alpha,
        t_grid=DEFAULT_MC_GRID,
        name="bh_fixed_alpha",
    )
    return regime, BhRule()


def _preset_bh_fixed_delta(s1=1.0, kappa=0.5, beta=2.0):
    regime = regime_verge(
        beta,
        PowerSparsity(kappa=kappa),
        ConstantDelta(),
        alpha_rule=lambda m: min(s1 / math.log(m), 0.5),
        t_grid=DEFAULT_MC_GRID,
        name="bh_fixed_delta",
    )
    return regime, BhRule()


def _preset_nonconforming_sublog(s=1.0, beta=2.0, coeff=-3.0):
    # Threshold c^2 = log v - 3 log log v: violates the second optimality
    # condition, so the ratio must stay bounded away from 1.
    regime = regime_verge(
        beta, ExtremeSparsity(s=s), ConstantDelta(), name="nonconforming_sublog"
    )
    return regime, LogVRule(loglog_coeff=coeff)


_PRESETS: dict[str, Callable[..., tuple[Regime, Rule]]] = {
    "lemma_universal": _preset_universal,
    "replicate_verge": _preset_replicate,
    "bfdr_sqrt_level": _preset_bfdr_sqrt_level,
    "bfdr_fixed_alpha": _preset_bfdr_fixed_alpha,
    "bfdr_fixed_delta": _preset_bfdr_fixed_delta,
    "gw_fixed_alpha": _preset_gw_fixed_alpha,
    "bonferroni_extreme": _preset_bonferroni_extreme,
    "bh_fixed_alpha": _preset_bh_fixed_alpha,
    "bh_fixed_delta": _preset_bh_fixed_delta,
    "nonconforming_sublog": _preset_nonconforming_sublog,
}

PRESET_NAMES: tuple[str, ...] = tuple(sorted(_PRESETS))


def preset(name: str, **overrides) -> tuple[Regime, Rule]:
    """Named (regime, rule) pair; overrides tune the family parameters."""
    factory = _PRESETS.get(name)
    if factory is None:
        raise ParameterError(f"unknown preset {name!r}; expected one of {list(PRESET_NAMES)}")
    try:
        return factory(**overrides)
    except TypeError as exc:
        raise ParameterError(f"bad overrides for preset {name!r}: {exc}") from None


# ---------------------------------------------------------------------------
# Convergence studies.


@dataclass(frozen=True)
class McOptions:
    reps: int = 400
    seed: int = 0
    workers: int | None = None


@dataclass(frozen=True)
class ConvergenceRow:
    """One grid point of a convergence study; nan marks a diagnostic that is
    undefined for the rule or regime at hand (e.g. z_t for the data-dependent
    step-up threshold, or bfdr diagnostics without a level)."""

    t: float
    m: float
    p: float
    u: float
    v: float
    c_sq: float
    risk: float
    risk_opt: float
    ratio: float
    z_t: float
    crit2: float
    ratio1: float
    s_t: float
    cond_w2: float
    t_uvd: float
    etr: float
    efr: float
    bo_bh_gap: float
    risk_se: float


CONVERGENCE_COLUMNS: tuple[str, ...] = (
    "m",
    "p",
    "u",
    "v",
    "c_sq",
    "risk",
    "risk_opt",
    "ratio",
    "z_t",
    "crit2",
    "ratio1",
    "s_t",
    "cond_w2",
    "t_uvd",
    "etr",
    "efr",
    "bo_bh_gap",
    "risk_se",
)


def _bfdr_diag(point: RegimePoint):
    if point.alpha is None:
        return math.nan, math.nan, math.nan
    try:
        diag = bfdr_optimality_diagnostics(point.derived, BfdrLevel(point.alpha))
    except ParameterError:
        return math.nan, math.nan, math.nan
    return diag.s_t, diag.cond_w2, diag.t_uvd


def _bo_bh_gap(point: RegimePoint) -> float:
    """Trend of c^2_oracle - c^2_BH up to an m-independent constant:
    2 log log(1/p) + 2 log alpha.  Sign analysis only; the constant depends
    on the regime."""
    if point.alpha is None or point.p >= math.exp(-1.0):
        return math.nan
    return 2.0 * math.log(math.log(1.0 / point.p)) + 2.0 * math.log(point.alpha)


def run_convergence(
    regime: Regime,
    rule: Rule,
    mode: str = "exact",
    mc_opts: McOptions | None = None,
) -> list[ConvergenceRow]:
    """Evaluate a rule along a regime; one row per grid point, grid order.

    Exact mode covers every fixed-threshold rule via closed forms; the
    step-up procedure has no fixed threshold and requires mc mode, where
    risk is estimated with McOptions replication (per-point streams derived
    from (seed, grid index)).
    """
    if mode not in ("exact", "mc"):
        raise ParameterError(f"mode must be 'exact' or 'mc', got {mode!r}")
    opts = mc_opts or McOptions()
    rows: list[ConvergenceRow] = []
    for index, point in enumerate(regime.points()):
        concrete = fill_rule(rule, alpha=point.alpha, n=point.n)
        setting = point_setting(point)
        if mode == "exact":
            if not is_fixed_threshold(concrete):
                raise ParameterError(
                    "exact mode requires a fixed-threshold rule; "
                    "the step-up procedure needs mode='mc'"
                )
            c_sq = float(threshold_sq(concrete, setting))
            risk = fixed_threshold_risk(setting, c_sq).total
            risk_se = math.nan
        else:
            setting = TestingSetting(setting.model, setting.losses, setting.int_m())
            report = mc_run(
                setting,
                concrete,
                opts.reps,
                seed=(int(opts.seed), index),
                workers=opts.workers,
            )
            risk = report.risk.mean
            risk_se = report.risk.std_error
            c_sq = (
                float(threshold_sq(concrete, setting))
                if is_fixed_threshold(concrete)
                else math.nan
            )
        opt = optimal_risk_exact(setting).total
        d = point.derived
        if math.isfinite(c_sq) and d.log_v > 0.0:
            diag = optimality_diagnostics(c_sq, log_v=d.log_v)
            z_t, ratio1, crit2 = diag.z_t, diag.ratio1, diag.crit2
            rates = error_rates(c_sq, d.u)
            etr = point.m * point.p * (1.0 - rates.t2)
            efr = point.m * (1.0 - point.p) * rates.t1
        else:
            z_t = ratio1 = crit2 = etr = efr = math.nan
        s_t, cond_w2, t_uvd = _bfdr_diag(point)
        rows.append(
            ConvergenceRow(
                t=point.t,
                m=point.m,
                p=point.p,
                u=point.u,
                v=d.v,
                c_sq=c_sq,
                risk=risk,
                risk_opt=opt,
                ratio=risk / opt,
                z_t=z_t,
                crit2=crit2,
                ratio1=ratio1,
                s_t=s_t,
                cond_w2=cond_w2,
                t_uvd=t_uvd,
                etr=etr,
                efr=efr,
                bo_bh_gap=_bo_bh_gap(point),
                risk_se=risk_se,
            )
        )
    return rows
