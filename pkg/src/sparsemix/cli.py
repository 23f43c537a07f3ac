"""Command-line front door: thresholds, risks, simulations, convergence tables.

Output discipline: CSV with one header row, every float printed with 17
significant digits (round-trippable), and a JSON sidecar next to each CSV
carrying the effective configuration, seed and toolkit version.  With no
--out the CSV goes to stdout, so runs can be piped or diffed directly.
Identical invocations produce byte-identical CSV regardless of worker
count — parallelism never touches streams or reduction order.

Exit codes: 0 success; 1 domain errors (module messages surfaced verbatim)
and unwritable outputs; 2 flag or config-schema errors (with field path).

Config files are single JSON documents mirroring the flags; flags override
config fields.  See the README for the schema and the documented CSV
column orders.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .bfdr import BfdrLevel, bfdr_threshold, gw_threshold
from .errors import ParameterError
from .experiments import (
    CONVERGENCE_COLUMNS,
    ConstantDelta,
    DecayingDelta,
    ExtremeSparsity,
    McOptions,
    PowerSparsity,
    PRESET_NAMES,
    Regime,
    point_setting,
    preset,
    regime_verge,
    run_convergence,
)
from .model import Losses, MixtureModel, TestingSetting, ThresholdSq, oracle_threshold_sq_raw
from .montecarlo import mc_run
from .procedures import replicate_threshold, universal_threshold, bonferroni_threshold
from .risk import fixed_threshold_risk
from .rules import BhRule, fill_rule, rule_from_config, rule_to_config

__all__ = ["main", "build_parser", "ExperimentConfig", "ConfigError"]

_RULE_KINDS = ("fixed", "oracle", "universal", "replicate", "bonferroni", "bfdr", "gw", "logv", "bh")
_SIMULATE_COLUMNS = ("stat", "mean", "std_error", "reps")
_RISK_COLUMNS = ("m", "p", "u", "delta0", "deltaA", "c_sq", "r1", "r2", "total")


class ConfigError(Exception):
    """Config-schema violation; message carries the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# ---------------------------------------------------------------------------
# Formatting and emission.


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _show(value) -> str:
    """Shortest round-trip form for stdout echo lines (CSV keeps .17g)."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([cell if isinstance(cell, str) else _fmt(cell) for cell in row])
    return buf.getvalue()


def _emit(out, command: str, columns, rows, echo: dict, seed=None) -> None:
    text = _csv_text(columns, rows)
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text)
    sidecar = {
        "version": __version__,
        "command": command,
        "columns": list(columns),
        "config": echo,
    }
    if seed is not None:
        sidecar["seed"] = seed
    side = path.with_suffix(".json")
    if side == path:
        side = path.with_name(path.name + ".meta.json")
    side.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path} and {side}")


# ---------------------------------------------------------------------------
# Config ingestion.


def _load_config(path: str) -> dict:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<config>", f"cannot read {path!r}: {exc}") from None
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError("<config>", f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("<config>", "top level must be a JSON object")
    return data


def _reject_unknown(cfg: dict, allowed, prefix: str = "") -> None:
    extra = sorted(set(cfg) - set(allowed))
    if extra:
        raise ConfigError(f"{prefix}{extra[0]}", "unknown field")


def _number(cfg: dict, key: str, prefix: str = "", default=None):
    value = cfg.get(key, None)
    if value is None:
        return default
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{prefix}{key}", "must be a number")
    return float(value)


def _integer(cfg: dict, key: str, prefix: str = "", default=None):
    value = cfg.get(key, None)
    if value is None:
        return default
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{prefix}{key}", "must be an integer")
    return value


def _string(cfg: dict, key: str, prefix: str = "", default=None):
    value = cfg.get(key, None)
    if value is None:
        return default
    if not isinstance(value, str):
        raise ConfigError(f"{prefix}{key}", "must be a string")
    return value


def _object(cfg: dict, key: str, prefix: str = "") -> dict:
    value = cfg.get(key, None)
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{prefix}{key}", "must be an object")
    return dict(value)


_SETTING_KEYS = ("p", "u", "tau_sq", "sigma_sq", "delta", "delta0", "deltaA", "m")
_SETTING_FLAGS = {
    "p": "p",
    "u": "u",
    "tau_sq": "tau_sq",
    "sigma_sq": "sigma_sq",
    "delta": "delta",
    "delta0": "delta0",
    "deltaA": "deltaA",
    "m": "m",
}


def _overlay_flags(cfg: dict, args, mapping: dict[str, str]) -> dict:
    merged = dict(cfg)
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            merged[key] = value
    return merged


def _build_setting(src: dict, prefix: str = "setting.") -> TestingSetting:
    _reject_unknown(src, _SETTING_KEYS, prefix)
    p = _number(src, "p", prefix)
    if p is None:
        raise ConfigError(prefix + "p", "required")
    sigma_sq = _number(src, "sigma_sq", prefix, default=1.0)
    tau_sq = _number(src, "tau_sq", prefix)
    u = _number(src, "u", prefix)
    if tau_sq is None:
        if u is None:
            raise ConfigError(prefix + "u", "required (or tau_sq)")
        tau_sq = u * sigma_sq
    elif u is not None:
        raise ConfigError(prefix + "u", "give either u or tau_sq, not both")
    delta = _number(src, "delta", prefix)
    delta0 = _number(src, "delta0", prefix)
    delta_a = _number(src, "deltaA", prefix)
    if delta is not None and (delta0 is not None or delta_a is not None):
        raise ConfigError(prefix + "delta", "give either delta or delta0/deltaA, not both")
    if delta is None:
        delta0 = 1.0 if delta0 is None else delta0
        delta_a = 1.0 if delta_a is None else delta_a
    else:
        delta0, delta_a = delta, 1.0
    m = _number(src, "m", prefix, default=1.0)
    return TestingSetting(
        model=MixtureModel(p=p, sigma_sq=sigma_sq, tau_sq=tau_sq),
        losses=Losses(delta0=delta0, deltaA=delta_a),
        m=m,
    )


def _setting_echo(setting: TestingSetting) -> dict:
    return {
        "p": setting.model.p,
        "sigma_sq": setting.model.sigma_sq,
        "tau_sq": setting.model.tau_sq,
        "delta0": setting.losses.delta0,
        "deltaA": setting.losses.deltaA,
        "m": setting.m,
    }


_RULE_FLAG_KEYS = {"alpha": "alpha", "c_sq": "c_sq", "d": "d", "n": "n"}


def _build_rule(src: dict, args, prefix: str = "rule."):
    """Rule from a config object and/or flags; flags override fields."""
    merged = dict(src)
    if getattr(args, "rule", None) is not None:
        merged["kind"] = args.rule
    if "kind" not in merged:
        return None
    if not isinstance(merged.get("kind"), str):
        raise ConfigError(prefix + "kind", "must be a string")
    merged = _overlay_flags(merged, args, _RULE_FLAG_KEYS)
    return rule_from_config(merged)


def _overlay_rule(rule, args):
    """Apply --alpha/--c-sq/--d/--n on top of an already-built rule."""
    merged = _overlay_flags(rule_to_config(rule), args, _RULE_FLAG_KEYS)
    return rule_from_config(merged)


def _build_regime_from_config(src: dict, prefix: str = "regime.") -> Regime:
    _reject_unknown(src, ("beta", "sparsity", "delta", "alpha", "n", "grid", "name"), prefix)
    beta = _number(src, "beta", prefix)
    if beta is None:
        raise ConfigError(prefix + "beta", "required")
    sp = _object(src, "sparsity", prefix)
    family = _string(sp, "family", prefix + "sparsity.")
    if family == "power":
        _reject_unknown(sp, ("family", "kappa", "a"), prefix + "sparsity.")
        kappa = _number(sp, "kappa", prefix + "sparsity.")
        if kappa is None:
            raise ConfigError(prefix + "sparsity.kappa", "required")
        sparsity = PowerSparsity(kappa=kappa, a=_number(sp, "a", prefix + "sparsity.", 1.0))
    elif family == "extreme":
        _reject_unknown(sp, ("family", "s", "log_exponent"), prefix + "sparsity.")
        sparsity = ExtremeSparsity(
            s=_number(sp, "s", prefix + "sparsity.", 1.0),
            log_exponent=_number(sp, "log_exponent", prefix + "sparsity.", 0.0),
        )
    else:
        raise ConfigError(prefix + "sparsity.family", "must be 'power' or 'extreme'")
    dl = _object(src, "delta", prefix)
    dfamily = _string(dl, "family", prefix + "delta.", "constant")
    if dfamily == "constant":
        _reject_unknown(dl, ("family", "value"), prefix + "delta.")
        delta_rule = ConstantDelta(value=_number(dl, "value", prefix + "delta.", 1.0))
    elif dfamily == "decaying":
        _reject_unknown(dl, ("family", "g"), prefix + "delta.")
        delta_rule = DecayingDelta(g=_number(dl, "g", prefix + "delta.", 1.0))
    else:
        raise ConfigError(prefix + "delta.family", "must be 'constant' or 'decaying'")
    grid = src.get("grid")
    if grid is not None:
        if not isinstance(grid, list) or not grid:
            raise ConfigError(prefix + "grid", "must be a nonempty array of numbers")
        for value in grid:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(prefix + "grid", "must be a nonempty array of numbers")
    return regime_verge(
        beta,
        sparsity,
        delta_rule,
        alpha_rule=_number(src, "alpha", prefix),
        n_rule=_number(src, "n", prefix),
        t_grid=grid,
        name=_string(src, "name", prefix, "config_regime"),
    )


class ExperimentConfig:
    """Resolved inputs of a table-emitting command: what to run, how, where.

    Built from a JSON document and/or flags (flags win field by field), and
    validated against the same admissibility rules the library enforces.
    echo is the JSON-serializable effective configuration that goes into the
    sidecar — sufficient to reproduce the CSV.
    """

    def __init__(self, *, setting=None, regime=None, rule=None, mode=None,
                 mc=None, out=None, echo=None):
        self.setting = setting
        self.regime = regime
        self.rule = rule
        self.mode = mode
        self.mc = mc if mc is not None else McOptions()
        self.out = out
        self.echo = echo if echo is not None else {}


# ---------------------------------------------------------------------------
# Subcommands.


def _threshold_model(args, par) -> MixtureModel:
    if args.p is None:
        par.error("--p is required for this rule")
    sigma_sq = 1.0 if args.sigma_sq is None else args.sigma_sq
    if args.tau_sq is not None:
        tau_sq = args.tau_sq
    elif args.u is not None:
        tau_sq = args.u * sigma_sq
    else:
        par.error("--u or --tau-sq is required for this rule")
    return MixtureModel(p=args.p, sigma_sq=sigma_sq, tau_sq=tau_sq)


def _threshold_losses(args) -> Losses:
    if args.delta0 is not None or args.deltaA is not None:
        return Losses(
            delta0=1.0 if args.delta0 is None else args.delta0,
            deltaA=1.0 if args.deltaA is None else args.deltaA,
        )
    return Losses(delta0=1.0 if args.delta is None else args.delta, deltaA=1.0)


def cmd_threshold(args) -> int:
    par = args.parser
    selected = [name for name in ("oracle", "bfdr", "gw", "bonferroni", "universal", "replicate")
                if getattr(args, name)]
    if not selected:
        par.error("select at least one rule "
                  "(--oracle/--bfdr/--gw/--bonferroni/--universal/--replicate)")
    echo = []
    for attr in ("p", "u", "tau_sq", "sigma_sq", "delta", "delta0", "deltaA", "m", "alpha", "n", "d"):
        value = getattr(args, attr)
        if value is not None:
            echo.append(f"{attr}={_show(value)}")
    print(" ".join(echo) if echo else "(defaults)")
    m = 1.0 if args.m is None else args.m
    d = 0.0 if args.d is None else args.d

    def need_alpha() -> BfdrLevel:
        if args.alpha is None:
            par.error("--alpha is required for this rule")
        return BfdrLevel(args.alpha)

    results = []
    for name in selected:
        if name == "oracle":
            c_sq = oracle_threshold_sq_raw(_threshold_model(args, par), _threshold_losses(args))
        elif name == "bfdr":
            c_sq = bfdr_threshold(_threshold_model(args, par), need_alpha())
        elif name == "gw":
            c_sq = gw_threshold(_threshold_model(args, par), need_alpha())
        elif name == "bonferroni":
            if args.alpha is None:
                par.error("--alpha is required for this rule")
            c_sq = bonferroni_threshold(m, args.alpha)
        elif name == "universal":
            c_sq = universal_threshold(m, d)
        else:
            if args.n is None:
                par.error("--n is required for the replicate rule")
            c_sq = replicate_threshold(m, args.n, d)
        results.append((name, c_sq))
    for name, c_sq in results:
        print(f"{name:<11} c_sq={_show(float(c_sq))}  z={_show(c_sq.z)}")
    return 0


def cmd_risk(args) -> int:
    cfg = _load_config(args.config) if args.config else {}
    _reject_unknown(cfg, ("setting", "c_sq", "out"))
    setting_cfg = _overlay_flags(_object(cfg, "setting"), args, _SETTING_FLAGS)
    setting = _build_setting(setting_cfg)
    c_sq_value = args.c_sq if args.c_sq is not None else _number(cfg, "c_sq")
    if c_sq_value is None:
        c_sq = oracle_threshold_sq_raw(setting.model, setting.losses)
    else:
        c_sq = ThresholdSq(float(c_sq_value))
    breakdown = fixed_threshold_risk(setting, c_sq)
    print(f"c_sq={_show(float(c_sq))} z={_show(c_sq.z)}")
    print(f"r1={_show(breakdown.r1)} r2={_show(breakdown.r2)} total={_show(breakdown.total)}")
    out = args.out if args.out is not None else _string(cfg, "out")
    if out is not None:
        row = (
            setting.m,
            setting.model.p,
            setting.model.u,
            setting.losses.delta0,
            setting.losses.deltaA,
            float(c_sq),
            breakdown.r1,
            breakdown.r2,
            breakdown.total,
        )
        echo = {"setting": _setting_echo(setting), "c_sq": float(c_sq), "out": out}
        _emit(out, "risk", _RISK_COLUMNS, [row], echo)
    return 0


def _simulate_config(args) -> ExperimentConfig:
    cfg = _load_config(args.config) if args.config else {}
    _reject_unknown(cfg, ("preset", "overrides", "setting", "rule", "m",
                          "reps", "seed", "workers", "out"))
    preset_name = args.preset if args.preset is not None else _string(cfg, "preset")
    overrides = _object(cfg, "overrides")
    m = args.m if args.m is not None else _number(cfg, "m")
    echo: dict = {}
    if preset_name is not None:
        if m is None:
            raise ConfigError("m", "required with a preset")
        regime, rule = preset(preset_name, **overrides)
        point = regime.generator(m)
        setting = point_setting(point)
        flag_rule = _build_rule(_object(cfg, "rule"), args)
        rule = flag_rule if flag_rule is not None else _overlay_rule(rule, args)
        rule = fill_rule(rule, alpha=point.alpha, n=point.n)
        echo["preset"] = preset_name
        if overrides:
            echo["overrides"] = overrides
    else:
        setting_cfg = _overlay_flags(_object(cfg, "setting"), args, _SETTING_FLAGS)
        if m is not None:
            setting_cfg["m"] = m
        setting = _build_setting(setting_cfg)
        rule = _build_rule(_object(cfg, "rule"), args)
        if rule is None:
            raise ConfigError("rule.kind", "required without a preset")
    reps = args.reps if args.reps is not None else _integer(cfg, "reps", default=1000)
    seed = args.seed if args.seed is not None else _integer(cfg, "seed", default=0)
    workers = args.workers if args.workers is not None else _integer(cfg, "workers")
    out = args.out if args.out is not None else _string(cfg, "out")
    echo.update({
        "setting": _setting_echo(setting),
        "rule": rule_to_config(rule),
        "reps": reps,
        "seed": seed,
    })
    if workers is not None:
        echo["workers"] = workers
    if out is not None:
        echo["out"] = out
    return ExperimentConfig(
        setting=setting,
        rule=rule,
        mode="mc",
        mc=McOptions(reps=reps, seed=seed, workers=workers),
        out=out,
        echo=echo,
    )


def cmd_simulate(args) -> int:
    config = _simulate_config(args)
    opts = config.mc
    report = mc_run(config.setting, config.rule, opts.reps, opts.seed, workers=opts.workers)
    rows = [
        ("risk", report.risk.mean, report.risk.std_error, report.risk.reps),
        ("fdr", report.fdr.mean, report.fdr.std_error, report.fdr.reps),
        ("fwer", report.fwer.mean, report.fwer.std_error, report.fwer.reps),
        ("ev", report.ev.mean, report.ev.std_error, report.ev.reps),
        ("power", report.power.mean, report.power.std_error, report.power.reps),
    ]
    if report.threshold_gap is not None:
        gap = report.threshold_gap
        rows.append(("threshold_gap", gap.mean, gap.std_error, gap.reps))
    _emit(config.out, "simulate", _SIMULATE_COLUMNS, rows, config.echo, seed=opts.seed)
    return 0


def _convergence_config(args) -> ExperimentConfig:
    cfg = _load_config(args.config) if args.config else {}
    _reject_unknown(cfg, ("preset", "overrides", "regime", "rule", "mode",
                          "grid", "reps", "seed", "workers", "out"))
    preset_name = args.preset if args.preset is not None else _string(cfg, "preset")
    overrides = _object(cfg, "overrides")
    echo: dict = {}
    if preset_name is not None:
        regime, rule = preset(preset_name, **overrides)
        echo["preset"] = preset_name
        if overrides:
            echo["overrides"] = overrides
        flag_rule = _build_rule(_object(cfg, "rule"), args)
        rule = flag_rule if flag_rule is not None else _overlay_rule(rule, args)
    elif "regime" in cfg:
        regime = _build_regime_from_config(_object(cfg, "regime"))
        rule = _build_rule(_object(cfg, "rule"), args)
        if rule is None:
            raise ConfigError("rule.kind", "required with a config regime")
        echo["regime"] = cfg["regime"]
    else:
        raise ConfigError("preset", "required (or a 'regime' object in the config)")
    grid = args.grid if args.grid is not None else cfg.get("grid")
    if grid is not None:
        if not isinstance(grid, (list, tuple)) or not grid:
            raise ConfigError("grid", "must be a nonempty array of numbers")
        regime = replace(regime, t_grid=tuple(float(g) for g in grid))
        echo["grid"] = [float(g) for g in grid]
    mode = args.mode if args.mode is not None else _string(cfg, "mode")
    if mode is None:
        mode = "mc" if isinstance(rule, BhRule) else "exact"
    reps = args.reps if args.reps is not None else _integer(cfg, "reps", default=400)
    seed = args.seed if args.seed is not None else _integer(cfg, "seed", default=0)
    workers = args.workers if args.workers is not None else _integer(cfg, "workers")
    out = args.out if args.out is not None else _string(cfg, "out")
    echo.update({"rule": rule_to_config(rule), "mode": mode, "seed": seed, "reps": reps})
    if workers is not None:
        echo["workers"] = workers
    if out is not None:
        echo["out"] = out
    return ExperimentConfig(
        regime=regime,
        rule=rule,
        mode=mode,
        mc=McOptions(reps=reps, seed=seed, workers=workers),
        out=out,
        echo=echo,
    )


def cmd_convergence(args) -> int:
    config = _convergence_config(args)
    rows = run_convergence(config.regime, config.rule, config.mode, config.mc)
    table = [[getattr(row, col) for col in CONVERGENCE_COLUMNS] for row in rows]
    _emit(
        config.out,
        "convergence",
        CONVERGENCE_COLUMNS,
        table,
        config.echo,
        seed=config.mc.seed if config.mode == "mc" else None,
    )
    return 0


# ---------------------------------------------------------------------------
# Parser assembly.


def _add_setting_flags(par) -> None:
    par.add_argument("--p", type=float, help="alternative-component weight")
    par.add_argument("--u", type=float, help="tau^2/sigma^2")
    par.add_argument("--tau-sq", dest="tau_sq", type=float, help="alternative variance excess")
    par.add_argument("--sigma-sq", dest="sigma_sq", type=float, help="null variance (default 1)")
    par.add_argument("--delta", type=float, help="loss ratio delta0/deltaA (deltaA=1)")
    par.add_argument("--delta0", type=float, help="false-rejection loss")
    par.add_argument("--deltaA", dest="deltaA", type=float, help="missed-signal loss")


def _add_mc_flags(par, default_reps: int) -> None:
    par.add_argument("--reps", type=int, help=f"replicates (default {default_reps})")
    par.add_argument("--seed", type=int, help="master seed (default 0)")
    par.add_argument("--workers", type=int,
                     help="worker threads (default $SPARSEMIX_WORKERS or 1)")


def _grid_arg(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected comma-separated numbers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsemix",
        description="Decision-theoretic multiple testing under the sparse "
                    "normal scale mixture: thresholds, risks, simulations, "
                    "convergence studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    par = sub.add_parser("threshold", help="print c^2 and |Z|-scale thresholds")
    for flag, help_text in (
        ("--oracle", "Bayes-oracle threshold"),
        ("--bfdr", "threshold with Bayesian FDR equal to --alpha"),
        ("--gw", "fixed-point threshold tracking the step-up rule"),
        ("--bonferroni", "Bonferroni threshold at --alpha"),
        ("--universal", "2 log m + d"),
        ("--replicate", "log n + 2 log m + d"),
    ):
        par.add_argument(flag, action="store_true", help=help_text)
    _add_setting_flags(par)
    par.add_argument("--m", type=float, help="number of tests (default 1)")
    par.add_argument("--alpha", type=float, help="level for --bfdr/--gw/--bonferroni")
    par.add_argument("--n", type=float, help="replicates per test for --replicate")
    par.add_argument("--d", type=float, help="additive offset for --universal/--replicate")
    par.set_defaults(func=cmd_threshold, parser=par)

    par = sub.add_parser("risk", help="exact risk of a fixed threshold (default: oracle)")
    _add_setting_flags(par)
    par.add_argument("--m", type=float, help="number of tests (default 1)")
    par.add_argument("--c-sq", dest="c_sq", type=float, help="squared threshold (default oracle)")
    par.add_argument("--config", help="JSON config file")
    par.add_argument("--out", help="write a one-row CSV (plus JSON sidecar) here")
    par.set_defaults(func=cmd_risk, parser=par)

    par = sub.add_parser("simulate", help="Monte-Carlo report for one setting and rule")
    par.add_argument("--preset", choices=PRESET_NAMES, help="named (regime, rule) pair")
    _add_setting_flags(par)
    par.add_argument("--m", type=float, help="number of tests (integer)")
    par.add_argument("--rule", choices=_RULE_KINDS, help="rule kind (when not using a preset)")
    par.add_argument("--alpha", type=float, help="level for level-based rules")
    par.add_argument("--c-sq", dest="c_sq", type=float, help="threshold for --rule fixed")
    par.add_argument("--d", type=float, help="offset for universal/replicate rules")
    par.add_argument("--n", type=float, help="replicates per test for the replicate rule")
    _add_mc_flags(par, 1000)
    par.add_argument("--config", help="JSON config file")
    par.add_argument("--out", help="CSV output path (default: stdout)")
    par.set_defaults(func=cmd_simulate, parser=par)

    par = sub.add_parser("convergence", help="risk-ratio table along a regime")
    par.add_argument("--preset", choices=PRESET_NAMES, help="named (regime, rule) pair")
    par.add_argument("--rule", choices=_RULE_KINDS, help="override the preset's rule")
    par.add_argument("--alpha", type=float, help="level override for level-based rules")
    par.add_argument("--c-sq", dest="c_sq", type=float, help="threshold for --rule fixed")
    par.add_argument("--d", type=float, help="offset for universal/replicate rules")
    par.add_argument("--n", type=float, help="replicates per test for the replicate rule")
    par.add_argument("--mode", choices=("exact", "mc"), help="risk engine (default by rule)")
    par.add_argument("--grid", type=_grid_arg, help="comma-separated m grid, e.g. 1e2,1e4,1e6")
    _add_mc_flags(par, 400)
    par.add_argument("--config", help="JSON config file")
    par.add_argument("--out", help="CSV output path (default: stdout)")
    par.set_defaults(func=cmd_convergence, parser=par)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
