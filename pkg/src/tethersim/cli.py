"""Command-line entry point.

Subcommands:

* run      simulate one scenario -> run.csv + metrics.txt
* compare  run several estimators on the identical scenario and seed
* batch    repeat a scenario N times with per-run seeds, report
           mean/std statistics per estimator
* check    parse and validate a config without simulating

Configs are YAML files mirroring ScenarioConfig; bundled presets live
in tethersim/configs.  `--set a.b=value` overrides nested fields and
values are parsed as YAML scalars.  Exit codes: 0 success, 2 config or
usage error, 3 numerical failure.
"""

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np
import yaml

from .controller import AllocationError, ControllerGains
from .metrics import (RunMetrics, batch_csv, batch_stats, batch_table,
                      comparison_csv, comparison_table)
from .model import TetherConfig, VehicleParams
from .observers import DobConfig, EsoConfig, RdoConfig
from .simengine import (BlowUpError, DisturbanceSchedule, NoiseConfig,
                        ReferenceConfig, ScenarioConfig, reference, run)


class ConfigError(Exception):
    """Malformed config file, bad override, or invalid usage."""


_SECTIONS = {
    "vehicle": VehicleParams,
    "tether": TetherConfig,
    "gains": ControllerGains,
    "rdo": RdoConfig,
    "dob": DobConfig,
    "eso": EsoConfig,
    "disturbance": DisturbanceSchedule,
    "noise": NoiseConfig,
    "reference": ReferenceConfig,
}
_TOP_FIELDS = ("kind", "duration", "dt_plant", "dt_ctrl", "seed",
               "estimator", "tau_att", "psi_d")
_REQUIRED = ("kind", "duration", "estimator", "vehicle.m", "tether.K_true",
             "tether.l0", "gains.k_p", "gains.k_d")


def _get(raw, dotted):
    node = raw
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            return None
        node = node[part]
    return node


def _numify(value):
    """Undo YAML 1.1's reading of '1e-6' (no dot) as a string."""
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    if isinstance(value, list):
        return [_numify(v) for v in value]
    return value


def config_from_dict(raw) -> ScenarioConfig:
    """Build and validate a ScenarioConfig from a parsed mapping."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    for dotted in _REQUIRED:
        if _get(raw, dotted) is None:
            raise ConfigError(f"missing field {dotted}")
    for key in raw:
        if key not in _TOP_FIELDS and key not in _SECTIONS:
            raise ConfigError(f"unknown field {key}")
    kwargs = {k: _numify(raw[k]) if k not in ("kind", "estimator") else raw[k]
              for k in _TOP_FIELDS if k in raw}
    for name, cls in _SECTIONS.items():
        section = raw.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"section {name} must be a mapping")
        known = {f.name for f in dataclasses.fields(cls)}
        for key in section:
            if key not in known:
                raise ConfigError(f"unknown field {name}.{key}")
        try:
            kwargs[name] = cls(**{k: _numify(v) for k, v in section.items()})
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"in section {name}: {exc}") from exc
    try:
        cfg = ScenarioConfig(**kwargs)
        cfg.validate()
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Full mapping that round-trips through config_from_dict."""
    out = {k: getattr(cfg, k) for k in _TOP_FIELDS}
    for name, cls in _SECTIONS.items():
        section = {}
        for f in dataclasses.fields(cls):
            value = getattr(getattr(cfg, name), f.name)
            if isinstance(value, np.ndarray):
                value = [float(np.real(x)) for x in value]
            section[f.name] = value
        out[name] = section
    return out


def resolve_config_path(text) -> Path:
    """Literal path, or a bundled preset name (circle, helix, extraction)."""
    p = Path(text)
    if p.exists():
        return p
    name = text if str(text).endswith(".cfg") else f"{text}.cfg"
    bundled = Path(__file__).parent / "configs" / name
    if "/" not in str(text) and bundled.exists():
        return bundled
    raise ConfigError(f"no such config file or preset: {text}")


def load_config(path, overrides=()) -> ScenarioConfig:
    """Read a YAML config file and apply dotted key=value overrides."""
    path = resolve_config_path(path)
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if raw is None:
        raise ConfigError(f"config {path} is empty")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        dotted, _, text = item.partition("=")
        try:
            value = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse override value {text!r}: {exc}") from exc
        node = raw
        parts = dotted.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {dotted} crosses a non-mapping field")
        node[parts[-1]] = value
    return config_from_dict(raw)


def dump_config(cfg: ScenarioConfig, path):
    with open(path, "w") as fh:
        yaml.safe_dump(config_to_dict(cfg), fh, sort_keys=False)


def _prepare_out(path, names, force) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    if not force:
        for name in names:
            if (out / name).exists():
                raise ConfigError(f"{out / name} exists (use --force to overwrite)")
    return out


def _estimator_list(text) -> list:
    names = [n.strip() for n in text.split(",") if n.strip()]
    if not names:
        raise ConfigError("estimator list is empty")
    for n in names:
        if n not in ("rdo", "dob", "eso", "oracle"):
            raise ConfigError(f"unknown estimator {n!r}")
    return names


def run_cmd(args) -> int:
    cfg = load_config(args.config, args.set or ())
    if args.seed is not None:
        cfg.seed = args.seed
    out = _prepare_out(args.out, ("run.csv", "metrics.txt"), args.force)
    log = run(cfg)
    log.to_csv(out / "run.csv")
    rows = {cfg.estimator: RunMetrics.from_log(log)}
    (out / "metrics.txt").write_text(comparison_table(rows))
    print(f"wrote {out / 'run.csv'} ({log.t.shape[0]} records)")
    print(comparison_table(rows), end="")
    return 0


def compare_cmd(args) -> int:
    cfg = load_config(args.config, args.set or ())
    if args.seed is not None:
        cfg.seed = args.seed
    names = _estimator_list(args.estimators)
    out = _prepare_out(args.out, [f"{n}.csv" for n in names]
                       + ["compare.txt", "compare.csv"], args.force)
    rows = {}
    for name in names:
        one = dataclasses.replace(cfg, estimator=name)
        log = run(one)
        log.to_csv(out / f"{name}.csv")
        rows[name] = RunMetrics.from_log(log)
    (out / "compare.txt").write_text(comparison_table(rows))
    (out / "compare.csv").write_text(comparison_csv(rows))
    print(comparison_table(rows), end="")
    return 0


def batch_cmd(args) -> int:
    if args.runs < 2:
        raise ConfigError("batch needs --runs >= 2")
    cfg = load_config(args.config, args.set or ())
    if args.seed is not None:
        cfg.seed = args.seed
    names = _estimator_list(args.estimators)
    files = [f"{n}_run{i}.csv" for n in names for i in range(args.runs)]
    out = _prepare_out(args.out, files + ["batch.txt", "batch.csv"], args.force)
    rows = {}
    for name in names:
        metrics = []
        for i in range(args.runs):
            one = dataclasses.replace(cfg, estimator=name, seed=cfg.seed + i)
            log = run(one)
            log.to_csv(out / f"{name}_run{i}.csv")
            metrics.append(RunMetrics.from_log(log))
        rows[name] = batch_stats(metrics)
    (out / "batch.txt").write_text(batch_table(rows))
    (out / "batch.csv").write_text(batch_csv(rows))
    print(batch_table(rows), end="")
    return 0


def check_cmd(args) -> int:
    cfg = load_config(args.config, args.set or ())
    reference(cfg.kind, 0.0, cfg.reference)
    reference(cfg.kind, cfg.duration, cfg.reference)
    print(f"config ok: kind={cfg.kind} duration={cfg.duration:g}s "
          f"estimator={cfg.estimator} steps={cfg.n_steps()}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tethersim",
        description="Tethered-quadrotor disturbance-observer simulation suite")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out=True):
        p.add_argument("--config", required=True, help="YAML scenario config")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config field (dotted path)")
        if with_out:
            p.add_argument("--out", default="out", help="output directory")
            p.add_argument("--seed", type=int, default=None,
                           help="override the config RNG seed")
            p.add_argument("--force", action="store_true",
                           help="overwrite existing outputs")

    p_run = sub.add_parser("run", help="simulate one scenario")
    common(p_run)
    p_run.set_defaults(func=run_cmd)

    p_cmp = sub.add_parser("compare", help="run several estimators on one scenario")
    common(p_cmp)
    p_cmp.add_argument("--estimators", default="rdo,dob,eso",
                       help="comma-separated estimator names")
    p_cmp.set_defaults(func=compare_cmd)

    p_bat = sub.add_parser("batch", help="repeat a scenario with per-run seeds")
    common(p_bat)
    p_bat.add_argument("--estimators", default="rdo,dob,eso")
    p_bat.add_argument("--runs", type=int, default=9, help="runs per estimator")
    p_bat.set_defaults(func=batch_cmd)

    p_chk = sub.add_parser("check", help="validate a config file")
    common(p_chk, with_out=False)
    p_chk.set_defaults(func=check_cmd)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (AllocationError, BlowUpError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
