"""Reproducible Monte-Carlo verification of procedures under the mixture.

Determinism contract: every replicate i draws from its own generator seeded
by SeedSequence(master_seed, spawn_key=(i,)), writes its statistics into
preallocated slot i, and the final reduction runs over the arrays in index
order.  Worker threads only choose *which* slots they fill, never the
stream or the order of the reduction, so reports are bit-identical for any
worker count.  The default worker count comes from the SPARSEMIX_WORKERS
environment variable (fallback 1); numpy releases the GIL inside the large
per-replicate kernels, so threads give real speedup at large m.

Statistic conventions: FDP is V/R with 0/0 := 0; power is the discovered
proportion S/K among the K true signals (0 when the sample has none); loss
is delta0 * V + deltaA * FN.  Standard errors are sample standard
deviations divided by sqrt(reps) — no variance reduction, by design.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bfdr import BfdrLevel, gw_threshold
from .errors import ParameterError
from .model import TestingSetting, sample
from .procedures import bh_reject, bonferroni_threshold, confusion, pvalues
from .rules import (
    BhRule,
    FixedThresholdRule,
    Rule,
    apply_rule,
    is_fixed_threshold,
    threshold_sq,
)

__all__ = [
    "McEstimate",
    "McReport",
    "GapStudy",
    "mc_run",
    "mc_conditional_k",
    "threshold_gap_study",
    "bh_conditional_ev_bound",
    "bh_ev_constant",
    "default_workers",
]


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    reps: int

    def __post_init__(self):
        if not (isinstance(self.reps, (int, np.integer)) and self.reps >= 1):
            raise ParameterError("reps must be a positive integer")
        if not (np.isfinite(self.std_error) and self.std_error >= 0.0):
            raise ParameterError("std_error must be >= 0")

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "McEstimate":
        n = samples.size
        if n < 2:
            raise ParameterError("need at least 2 samples for a standard error")
        return cls(
            mean=float(np.mean(samples)),
            std_error=float(np.std(samples, ddof=1) / math.sqrt(n)),
            reps=n,
        )


@dataclass(frozen=True)
class McReport:
    """Estimates sharing one replicate stream; threshold_gap only for rules
    with a realized data-dependent threshold (the step-up procedure)."""

    risk: McEstimate
    fdr: McEstimate
    fwer: McEstimate
    ev: McEstimate
    power: McEstimate
    threshold_gap: McEstimate | None = None


@dataclass(frozen=True)
class GapStudy:
    """Distribution summary of |c_BH - c_GW| on the |Z| scale."""

    gap: McEstimate
    exceed_frac: float
    median_gap: float


def default_workers() -> int:
    raw = os.environ.get("SPARSEMIX_WORKERS", "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ParameterError(f"SPARSEMIX_WORKERS must be an integer, got {raw!r}") from None
    if workers < 1:
        raise ParameterError("worker count must be >= 1")
    return workers


def _check_reps(reps) -> int:
    if not (isinstance(reps, (int, np.integer)) and reps >= 2):
        raise ParameterError("reps must be an integer >= 2")
    return int(reps)


def _replicate_rng(seed, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _parallel_fill(fill, reps: int, workers: int | None) -> None:
    w = default_workers() if workers is None else int(workers)
    if w < 1:
        raise ParameterError("worker count must be >= 1")
    if w == 1 or reps < 2 * w:
        fill(0, reps)
        return
    step = -(-reps // w)
    spans = [(lo, min(lo + step, reps)) for lo in range(0, reps, step)]
    with ThreadPoolExecutor(max_workers=w) as pool:
        for future in [pool.submit(fill, lo, hi) for lo, hi in spans]:
            future.result()


def _gap_reference(setting: TestingSetting, rule: Rule) -> float | None:
    """|Z|-scale GW threshold to compare realized step-up thresholds against."""
    if isinstance(rule, BhRule) and rule.alpha is not None:
        return math.sqrt(float(gw_threshold(setting.model, BfdrLevel(rule.alpha))))
    return None


def _run_stream(setting: TestingSetting, rule: Rule, reps: int, seed, workers, draw):
    """Shared replicate loop; `draw(rng)` yields (truth, x) for one replicate."""
    reps = _check_reps(reps)
    m = setting.int_m()
    losses = setting.losses
    gw_z = _gap_reference(setting, rule)
    bon_z = math.sqrt(float(bonferroni_threshold(m, rule.alpha))) if gw_z is not None else None
    if is_fixed_threshold(rule):
        # Resolve once: the threshold is the same for every replicate, and
        # resolving may itself be expensive (bisection).
        rule = FixedThresholdRule(float(threshold_sq(rule, setting)))
    loss = np.empty(reps)
    fdp = np.empty(reps)
    any_false = np.empty(reps)
    v_count = np.empty(reps)
    tdp = np.empty(reps)
    gaps = np.empty(reps) if gw_z is not None else None

    def fill(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            rng = _replicate_rng(seed, i)
            truth, x = draw(rng)
            result = apply_rule(rule, x, setting)
            counts = confusion(result, truth)
            rejected = counts.num_rejected
            loss[i] = counts.loss(losses)
            fdp[i] = counts.V / rejected if rejected > 0 else 0.0
            any_false[i] = 1.0 if counts.V > 0 else 0.0
            v_count[i] = counts.V
            tdp[i] = counts.S / counts.K if counts.K > 0 else 0.0
            if gaps is not None:
                bh_z = min(bon_z, math.sqrt(float(result.realized_threshold_sq)))
                gaps[i] = abs(bh_z - gw_z)

    _parallel_fill(fill, reps, workers)
    return McReport(
        risk=McEstimate.from_samples(loss),
        fdr=McEstimate.from_samples(fdp),
        fwer=McEstimate.from_samples(any_false),
        ev=McEstimate.from_samples(v_count),
        power=McEstimate.from_samples(tdp),
        threshold_gap=McEstimate.from_samples(gaps) if gaps is not None else None,
    )


def mc_run(setting: TestingSetting, rule: Rule, reps, seed, workers: int | None = None) -> McReport:
    """Estimate risk, FDR, FWER, E(V) and the true-discovery proportion of a
    rule by simulation from the mixture."""

    def draw(rng):
        return sample(setting, rng)

    return _run_stream(setting, rule, reps, seed, workers, draw)


def mc_conditional_k(
    setting: TestingSetting, rule: Rule, k, reps, seed, workers: int | None = None
) -> McReport:
    """Same report, conditioned on exactly k signals per replicate.

    Each replicate places k signals at uniformly chosen positions (drawn
    first, then one block of normals), so ev.mean estimates E(V | K = k).
    """
    m = setting.int_m()
    if not (isinstance(k, (int, np.integer)) and 0 <= k):
        raise ParameterError("k must be a nonnegative integer")
    if k > m:
        raise ParameterError(f"k={k} exceeds m={m}")
    k = int(k)
    model = setting.model
    alt_scale = math.sqrt(model.sigma_sq + model.tau_sq)

    def draw(rng):
        truth = np.zeros(m, dtype=bool)
        if k:
            truth[rng.choice(m, size=k, replace=False)] = True
        x = rng.standard_normal(m) * np.where(truth, alt_scale, model.sigma)
        return truth, x

    return _run_stream(setting, rule, reps, seed, workers, draw)


def threshold_gap_study(
    setting: TestingSetting,
    alpha: float,
    reps,
    seed,
    epsilon: float,
    workers: int | None = None,
) -> GapStudy:
    """Concentration of the realized step-up threshold c_BH around the fixed
    c_GW at the same level: mean/median gap and P(gap > epsilon).

    epsilon = +inf is an allowed marker and forces exceed_frac = 0.
    """
    reps = _check_reps(reps)
    if not (epsilon > 0.0) or math.isnan(epsilon):
        raise ParameterError("epsilon must be a positive real (inf allowed)")
    m = setting.int_m()
    model = setting.model
    gw_z = math.sqrt(float(gw_threshold(model, BfdrLevel(alpha))))
    bon_z = math.sqrt(float(bonferroni_threshold(m, alpha)))
    gaps = np.empty(reps)

    def fill(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            rng = _replicate_rng(seed, i)
            _, x = sample(setting, rng)
            result = bh_reject(pvalues(x, model.sigma), alpha)
            bh_z = min(bon_z, math.sqrt(float(result.realized_threshold_sq)))
            gaps[i] = abs(bh_z - gw_z)

    _parallel_fill(fill, reps, workers)
    return GapStudy(
        gap=McEstimate.from_samples(gaps),
        exceed_frac=float(np.mean(gaps > epsilon)),
        median_gap=float(np.median(gaps)),
    )


def bh_conditional_ev_bound(alpha: float, k) -> float:
    """Upper bound alpha (k/(1-alpha) + 1/(1-alpha)^2) on E(V | K = k) for the
    step-up procedure under independence; valid for k < m (1/alpha_0 - 1)."""
    if not (0.0 < alpha < 1.0):
        raise ParameterError("alpha must lie in (0,1)")
    if not (isinstance(k, (int, np.integer)) and k >= 0):
        raise ParameterError("k must be a nonnegative integer")
    return alpha * (k / (1.0 - alpha) + 1.0 / (1.0 - alpha) ** 2)


def bh_ev_constant(s: float, alpha_inf: float) -> float:
    """Infimum of constants C1 with E(V) < C1 alpha m p along regimes where
    m p -> s and the level converges to alpha_inf; any strictly larger
    constant eventually bounds E(V).  s = +inf drops the additive term."""
    if not (0.0 <= alpha_inf < 1.0):
        raise ParameterError("alpha_inf must lie in [0,1)")
    if math.isnan(s) or s <= 0.0:
        raise ParameterError("s must be positive (inf allowed)")
    base = (2.0 - alpha_inf) / (1.0 - alpha_inf) ** 2
    if math.isinf(s):
        return base
    return base + math.exp(-s) / (s * (1.0 - alpha_inf))
