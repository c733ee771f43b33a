"""
Run configuration with figure presets.
Maps figure tags and subcommands to the technical parameters of a run and
merges presets, config files and command-line flags into one RunConfig.
"""

import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from dotenv import dotenv_values

from config import DYNAMICS_CONFIG, OUTPUT_CONFIG, QUENCH_CONFIG, SPECTRAL_CONFIG
from errors import ConfigurationError
from spectral import TrapConfig


def _geometric(start: float, stop: float, count: int) -> Tuple[float, ...]:
    return tuple(float(v) for v in np.geomspace(start, stop, count))


# Figure presets: one per subcommand
FIGURE_PRESETS = {
    "fig1b": {
        "name": "Entropy change vs L / lambda_T",
        "subcommand": "entropy-sweep",
        "description": "Free-expansion and isothermal entropy changes across the quantum-classical crossover",
        "technical_mapping": {
            "T": 1.0,
            "ratios": _geometric(OUTPUT_CONFIG["ratio_start"], OUTPUT_CONFIG["ratio_stop"],
                                 OUTPUT_CONFIG["ratio_count"]),
        },
    },
    "fig2": {
        "name": "Post-quench occupation distributions",
        "subcommand": "distribution",
        "description": "Occupations of the full-trap levels against the thermal reference",
        "technical_mapping": {
            "L": 1.0,
            "temps": tuple(OUTPUT_CONFIG["distribution_temps"]),
        },
    },
    "fig3": {
        "name": "Density-profile dynamics",
        "subcommand": "dynamics",
        "description": "Position density during uniform dephasing, with steady and equilibrium profiles",
        "technical_mapping": {
            "L": 1.0,
            "temps": tuple(OUTPUT_CONFIG["dynamics_temps"]),
            "gamma": DYNAMICS_CONFIG["gamma"],
            "windows": tuple(tuple(w) for w in DYNAMICS_CONFIG["windows"]),
            "nx": DYNAMICS_CONFIG["nx"],
            "nt": DYNAMICS_CONFIG["nt"],
            "n_max": QUENCH_CONFIG["dynamics_n_max"],
        },
    },
    "fig4": {
        "name": "Entropy-energy curves",
        "subcommand": "se-curve",
        "description": "Free-expansion and equilibrium entropy against energy at fixed L",
        "technical_mapping": {
            "L": 1.0,
            "temps": (0.0,) + _geometric(OUTPUT_CONFIG["se_temp_start"], OUTPUT_CONFIG["se_temp_stop"],
                                         OUTPUT_CONFIG["se_temp_count"]),
        },
    },
}

SUBCOMMAND_FIGURES = {preset["subcommand"]: tag for tag, preset in FIGURE_PRESETS.items()}

DEPHASING_MODELS = ("uniform", "wall")

# Keys that determine the numbers written, per subcommand
_TRAP_KEYS = ("M", "hbar", "kB", "n_max")
ECHO_KEYS = {
    "entropy-sweep": ("T", "ratios") + _TRAP_KEYS,
    "distribution": ("L", "temps") + _TRAP_KEYS,
    "dynamics": ("L", "temps", "gamma", "model", "windows", "nx", "nt") + _TRAP_KEYS,
    "se-curve": ("L", "temps") + _TRAP_KEYS,
}


def get_figure_preset(tag: str) -> Dict:
    """Get the preset for a figure tag."""
    if tag not in FIGURE_PRESETS:
        raise ConfigurationError(f"unknown figure tag {tag!r}; choose from {sorted(FIGURE_PRESETS)}")
    return FIGURE_PRESETS[tag]


def parse_float_list(text: str) -> Tuple[float, ...]:
    """'a,b,c' or 'geom:start:stop:count'."""
    text = text.strip()
    try:
        if text.startswith("geom:"):
            start, stop, count = text[len("geom:"):].split(":")
            return _geometric(float(start), float(stop), int(count))
        return tuple(float(item) for item in text.split(",") if item.strip())
    except ValueError as e:
        raise ConfigurationError(f"cannot parse number list {text!r}: {e}")


def parse_windows(text: str) -> Tuple[Tuple[float, float], ...]:
    """'0:5,35:40' -> ((0, 5), (35, 40))."""
    try:
        windows = []
        for item in text.split(","):
            if item.strip():
                start, end = item.split(":")
                windows.append((float(start), float(end)))
        return tuple(windows)
    except ValueError as e:
        raise ConfigurationError(f"cannot parse windows {text!r}: {e}")


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"cannot parse boolean {text!r}")


def _parse_n_max(text: str) -> Optional[int]:
    if text.strip().lower() in ("auto", "none", ""):
        return None
    return int(text)


_PARSERS = {
    "L": float,
    "M": float,
    "T": float,
    "hbar": float,
    "kB": float,
    "gamma": float,
    "n_max": _parse_n_max,
    "nx": int,
    "nt": int,
    "workers": int,
    "ratios": parse_float_list,
    "temps": parse_float_list,
    "windows": parse_windows,
    "model": str,
    "emit_plots": _parse_bool,
    "output_dir": str,
}


def normalize_key(key: str) -> str:
    normalized = key.strip().replace("-", "_")
    if normalized not in _PARSERS:
        raise ConfigurationError(f"unknown config key {key!r}; known keys: {sorted(_PARSERS)}")
    return normalized


def parse_setting(key: str, value: Any) -> Any:
    """Convert a raw string setting to its typed value; typed values pass through."""
    key = normalize_key(key)
    if not isinstance(value, str):
        return value
    try:
        return _PARSERS[key](value.strip())
    except ValueError as e:
        raise ConfigurationError(f"invalid value for {key}: {value!r} ({e})")


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Read flat key = value settings.

    A CSV written by boxgas is accepted too: its '# config:' provenance lines
    are the settings it was produced with.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    if path.suffix == ".csv":
        raw = {}
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.startswith("# config:"):
                key, _, value = line[len("# config:"):].partition("=")
                raw[key.strip()] = value.strip()
    else:
        raw = dotenv_values(path, encoding="utf-8")
    settings = {}
    for key, value in raw.items():
        if value is None:
            raise ConfigurationError(f"config key {key!r} has no value")
        settings[normalize_key(key)] = parse_setting(key, value)
    return settings


def _format_float(value: float) -> str:
    return repr(float(value))


def format_setting(key: str, value: Any) -> str:
    """Canonical text of a setting; parse_setting(key, format_setting(key, v)) == v."""
    if value is None:
        return "auto"
    if key in ("ratios", "temps"):
        return ",".join(_format_float(v) for v in value)
    if key == "windows":
        return ",".join(f"{_format_float(a)}:{_format_float(b)}" for a, b in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _format_float(value)
    return str(value)


@dataclass
class RunConfig:
    """Validated settings of one subcommand run."""

    subcommand: str
    L: float = SPECTRAL_CONFIG["trap_size"]
    M: float = SPECTRAL_CONFIG["mass"]
    T: float = SPECTRAL_CONFIG["temperature"]
    hbar: float = SPECTRAL_CONFIG["hbar"]
    kB: float = SPECTRAL_CONFIG["kB"]
    n_max: Optional[int] = None
    gamma: float = DYNAMICS_CONFIG["gamma"]
    model: str = "uniform"
    ratios: Tuple[float, ...] = ()
    temps: Tuple[float, ...] = ()
    windows: Tuple[Tuple[float, float], ...] = tuple(tuple(w) for w in DYNAMICS_CONFIG["windows"])
    nx: int = DYNAMICS_CONFIG["nx"]
    nt: int = DYNAMICS_CONFIG["nt"]
    output_dir: str = OUTPUT_CONFIG["default_output_dir"]
    emit_plots: bool = False
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMAND_FIGURES:
            raise ConfigurationError(f"unknown subcommand {self.subcommand!r}")
        self.ratios = tuple(float(v) for v in self.ratios)
        self.temps = tuple(float(v) for v in self.temps)
        self.windows = tuple((float(a), float(b)) for a, b in self.windows)

        for name in ("L", "M", "hbar", "kB"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be positive, got {value}")
        if not (math.isfinite(self.T) and self.T >= 0):
            raise ConfigurationError(f"T must be non-negative, got {self.T}")
        if self.subcommand == "entropy-sweep" and self.T == 0:
            raise ConfigurationError("entropy-sweep needs T > 0 to define L / lambda_T")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ConfigurationError(f"gamma must be non-negative, got {self.gamma}")
        if self.model not in DEPHASING_MODELS:
            raise ConfigurationError(f"model must be one of {DEPHASING_MODELS}, got {self.model!r}")
        if self.n_max is not None and self.n_max < QUENCH_CONFIG["min_n_max"]:
            raise ConfigurationError(f"n_max must be >= {QUENCH_CONFIG['min_n_max']}, got {self.n_max}")
        if self.nx < 3 or self.nt < 2:
            raise ConfigurationError(f"need nx >= 3 and nt >= 2, got nx={self.nx}, nt={self.nt}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")

        self._check_axis("ratios", self.ratios, allow_zero=False)
        self._check_axis("temps", self.temps, allow_zero=True)
        previous_end = -math.inf
        for start, end in self.windows:
            if start < 0 or end <= start or start < previous_end:
                raise ConfigurationError(f"invalid time windows {self.windows}")
            previous_end = end

    @staticmethod
    def _check_axis(name: str, values: Tuple[float, ...], allow_zero: bool) -> None:
        if not values:
            return
        lowest_ok = min(values) >= 0 if allow_zero else min(values) > 0
        if not lowest_ok or not all(math.isfinite(v) for v in values):
            raise ConfigurationError(f"{name} must be {'non-negative' if allow_zero else 'positive'}")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigurationError(f"{name} must be strictly increasing")

    @property
    def figure_tag(self) -> str:
        return SUBCOMMAND_FIGURES[self.subcommand]

    def trap(self, T: Optional[float] = None) -> TrapConfig:
        return TrapConfig(L=self.L, M=self.M, T=self.T if T is None else T, hbar=self.hbar, kB=self.kB)

    def echo(self) -> List[Tuple[str, str]]:
        """Sorted (key, text) pairs of every setting that determines the output numbers."""
        return sorted((key, format_setting(key, getattr(self, key))) for key in ECHO_KEYS[self.subcommand])


def apply_run_settings(
    subcommand: str,
    file_settings: Optional[Dict[str, Any]] = None,
    flag_settings: Optional[Dict[str, Any]] = None,
    environ: Optional[Dict[str, str]] = None,
) -> RunConfig:
    """
    Merge settings into a RunConfig.
    Precedence: flags > config file > environment > figure preset > built-in defaults.
    """
    if subcommand not in SUBCOMMAND_FIGURES:
        raise ConfigurationError(f"unknown subcommand {subcommand!r}")
    environ = os.environ if environ is None else environ

    merged: Dict[str, Any] = dict(get_figure_preset(SUBCOMMAND_FIGURES[subcommand])["technical_mapping"])
    if environ.get(OUTPUT_CONFIG["output_env_var"]):
        merged["output_dir"] = environ[OUTPUT_CONFIG["output_env_var"]]
    if environ.get(OUTPUT_CONFIG["workers_env_var"]):
        merged["workers"] = parse_setting("workers", environ[OUTPUT_CONFIG["workers_env_var"]])
    for source in (file_settings or {}, flag_settings or {}):
        for key, value in source.items():
            if value is not None:
                merged[normalize_key(key)] = parse_setting(key, value)

    known = {f.name for f in fields(RunConfig)}
    return RunConfig(subcommand=subcommand, **{k: v for k, v in merged.items() if k in known})
