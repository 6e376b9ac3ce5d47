"""Experiment configuration: defaults, INI loading and validation."""

from __future__ import annotations

import configparser
import dataclasses
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

EXPERIMENTS = ("energy", "energy-error", "paths", "order", "oracle-check")
METHODS = ("I", "II", "both")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class ExperimentConfig:
    experiment: str = "energy"
    method: str = "both"
    bounds: tuple[float, float] = (0.0, 0.5)
    counts: tuple[int, int, int] = (25, 25, 25)
    tau: float = 1 / 32
    taus: list[float] = field(default_factory=lambda: [2.0**-k for k in range(3, 7)])
    T: float = 10.0
    eps: float = 1.0
    mu: float = 1.0
    lambdas: list[float] = field(default_factory=lambda: [0.0, 0.1, 1.0, 10.0])
    M: int = 10
    seed: int = 0
    n_paths: int = 3
    tau_ref: float = 2.0**-9
    out: str = "results"
    threads: int = 1
    energy_tol: float = 1e-10
    order_min: float = 0.75
    order_max: float = 1.35
    oracle_sizes: list[int] = field(default_factory=lambda: [3, 5, 7, 25])
    full_scale: bool = False

    @property
    def n_steps(self) -> int:
        return _steps(self.T, self.tau, "tau")

    @property
    def methods(self) -> list[str]:
        return ["I", "II"] if self.method == "both" else [self.method]

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)


# Defaults that differ from the energy runs, per experiment.
EXPERIMENT_DEFAULTS = {
    "energy": {},
    "energy-error": {},
    "paths": {"lambdas": [1.0], "n_paths": 3},
    "order": {
        "counts": (11, 11, 11),
        "T": 0.25,
        "lambdas": [0.1],
        "n_paths": 10,
        "taus": [2.0**-k for k in range(3, 7)],
        "tau_ref": 2.0**-9,
    },
    "oracle-check": {},
}

# Larger grid and finer steps for the full-scale order run
FULL_SCALE_ORDER = {"counts": (25, 25, 25), "taus": [2.0**-k for k in range(4, 9)]}


def _steps(T: float, tau: float, name: str) -> int:
    ratio = Fraction(T).limit_denominator(1 << 40) / Fraction(tau).limit_denominator(1 << 40)
    if ratio.denominator != 1 or not math.isclose(float(ratio) * tau, T, rel_tol=1e-12):
        raise ConfigError(f"{name}: T / {name} = {T}/{tau} is not an integer number of steps")
    return int(ratio)


def _floats(text: str) -> list[float]:
    out = []
    for tok in text.replace(",", " ").split():
        if "/" in tok:
            out.append(float(Fraction(tok)))
        elif tok.startswith("2^"):
            out.append(2.0 ** float(tok[2:]))
        else:
            out.append(float(tok))
    return out


_PARSERS = {
    "experiment": str,
    "method": str,
    "bounds": lambda s: tuple(_floats(s)),
    "counts": lambda s: tuple(int(v) for v in _floats(s)),
    "tau": lambda s: _floats(s)[0],
    "taus": _floats,
    "T": lambda s: _floats(s)[0],
    "eps": float,
    "mu": float,
    "lambda": _floats,
    "lambdas": _floats,
    "M": int,
    "seed": int,
    "n_paths": int,
    "tau_ref": lambda s: _floats(s)[0],
    "out": str,
    "threads": int,
    "energy_tol": float,
    "order_min": float,
    "order_max": float,
    "oracle_sizes": lambda s: [int(v) for v in _floats(s)],
    "full_scale": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}


def _apply(cfg: ExperimentConfig, key: str, raw) -> None:
    if key not in _PARSERS:
        raise ConfigError(f"unknown configuration key {key!r}")
    try:
        value = _PARSERS[key](raw) if isinstance(raw, str) else raw
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} ({exc})") from None
    if key == "lambda":
        key = "lambdas"
    if key == "counts" and len(value) == 1:
        value = (value[0],) * 3
    setattr(cfg, key, value)


def read_ini(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep key case (T, M)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"config: {path}: {exc}") from None
    return parser


def resolve(
    experiment: Optional[str] = None,
    ini: Optional[configparser.ConfigParser] = None,
    overrides: Optional[dict] = None,
) -> ExperimentConfig:
    """Layer defaults, the ``[common]`` section, the experiment's section and overrides."""
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    if experiment is None and ini is not None and ini.has_option("common", "experiment"):
        experiment = ini.get("common", "experiment")
    experiment = experiment or "energy"
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: {experiment!r} is not one of {', '.join(EXPERIMENTS)}")

    cfg = ExperimentConfig(experiment=experiment)
    for key, value in EXPERIMENT_DEFAULTS[experiment].items():
        setattr(cfg, key, value)
    full_scale = overrides.get("full_scale")
    if ini is not None:
        for section in ("common", experiment):
            if ini.has_section(section):
                for key, raw in ini.items(section):
                    if key != "experiment":
                        _apply(cfg, key, raw)
    if full_scale or (full_scale is None and cfg.full_scale):
        cfg.full_scale = True
        if experiment == "order":
            for key, value in FULL_SCALE_ORDER.items():
                setattr(cfg, key, value)
    for key, value in overrides.items():
        if key != "full_scale":
            _apply(cfg, key, value)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.method not in METHODS:
        raise ConfigError(f"method: {cfg.method!r} is not one of {', '.join(METHODS)}")
    if len(cfg.bounds) != 2 or not cfg.bounds[1] > cfg.bounds[0]:
        raise ConfigError(f"bounds: expected an ordered pair (lo, hi), got {cfg.bounds}")
    if len(cfg.counts) != 3 or any(n < 3 or n % 2 == 0 for n in cfg.counts):
        raise ConfigError(f"counts: every count must be odd and >= 3, got {cfg.counts}")
    for name in ("eps", "mu"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name}: must be positive")
    if not cfg.lambdas:
        raise ConfigError("lambda: list must be non-empty")
    if cfg.M < 1:
        raise ConfigError("M: must be >= 1")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed: must be an unsigned 64-bit integer")
    if cfg.n_paths < 1:
        raise ConfigError("n_paths: must be >= 1")
    if cfg.threads < 1:
        raise ConfigError("threads: must be >= 1")
    if not cfg.T > 0:
        raise ConfigError("T: must be positive")
    if cfg.experiment == "order":
        if len(cfg.taus) < 2:
            raise ConfigError("taus: the order experiment needs at least two time steps")
        taus = sorted(cfg.taus, reverse=True)
        for a, b in zip(taus, taus[1:]):
            if not math.isclose(a / b, 2.0, rel_tol=1e-12):
                raise ConfigError(f"taus: consecutive time steps must halve, got {cfg.taus}")
        cfg.taus = taus
        for t in taus:
            ratio = t / cfg.tau_ref
            r = round(ratio)
            if r < 1 or not math.isclose(ratio, r, rel_tol=1e-12) or r & (r - 1):
                raise ConfigError(f"taus: {t} is not tau_ref={cfg.tau_ref} times a power of 2")
            _steps(cfg.T, t, "taus")
        _steps(cfg.T, cfg.tau_ref, "tau_ref")
    elif cfg.experiment != "oracle-check":
        if not cfg.tau > 0:
            raise ConfigError("tau: must be positive")
        _steps(cfg.T, cfg.tau, "tau")
