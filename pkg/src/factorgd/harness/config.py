"""Experiment configuration and its text format.

A config file is INI-style: one ``[section]`` per experiment, one
``key = value`` per line, ``#`` or ``;`` starting a comment line. Any value
may be a comma-separated list; lists in one section must have equal length
and are zipped into runs, while single values apply to every run::

    [fig2-asym]
    mode = asymmetric
    n = 50
    r = 2
    k = 4
    m = 700
    eta = 0.2
    alpha = 0.5, 0.2, 0.05
    t_max = 4000, 10000, 20000

``none`` stands for an unset optional value. Run ``i`` of an experiment
shares the measurement operator built from ``seed`` with the other runs and
draws its initialization from ``seed + i``.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, fields

import numpy as np

from ..diagnostics import TRACE_FIELDS
from ..linalg import SEED_MAX

MODES = ("symmetric", "asymmetric", "accel", "toy")
FIT_KINDS = ("linear", "power")


class ConfigError(ValueError):
    """Validation failure; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class RunConfig:
    """One fully specified run."""

    mode: str
    eta: float
    alpha: float
    t_max: int
    n: int = 50
    r: int = 2
    k: int = 4
    m: int = 0
    ratio: float = 1.0 / 3.0
    log_stride: int = 1
    seed: int = 0
    init_seed: int = 0
    sigma_1: float = 1.0
    sigma_r: float = 1.0
    gamma: float | None = None
    t_fire: int | None = None
    beta: float | None = None
    stop_loss: float | None = None
    fit_kind: str = "linear"
    fit_field: str = "loss_fro2"
    fit_window: str | None = None
    fit_floor: float | None = 1e-24
    rip_trials: int = 20

    @property
    def singulars(self) -> tuple[float, ...]:
        """``r`` values spaced evenly from sigma_1 down to sigma_r."""
        if self.r == 1:
            return (self.sigma_1,)
        return tuple(float(s) for s in np.linspace(self.sigma_1, self.sigma_r, self.r))

    @property
    def accel_beta(self) -> float:
        return self.beta if self.beta is not None else 0.5 * self.sigma_r

    @property
    def window(self) -> tuple[int | None, int | None]:
        return parse_window(self.fit_window)


# Keys accepted in a config section and their annotated types. ``init_seed``
# is derived, never read from a file.
_TYPES = {f.name: f.type for f in fields(RunConfig) if f.name != "init_seed"}
KEYS = tuple(_TYPES)
_REQUIRED = ("mode", "eta", "alpha", "t_max")


def parse_window(text: str | None) -> tuple[int | None, int | None]:
    if text is None:
        return None, None
    if ":" not in text:
        raise ValueError(f"window must look like 'start:end', got {text!r}")
    a, b = text.split(":", 1)
    lo = int(a) if a.strip() else None
    hi = int(b) if b.strip() else None
    if lo is not None and hi is not None and lo >= hi:
        raise ValueError(f"window start must be below its end, got {text!r}")
    return lo, hi


def _parse_scalar(key: str, text: str):
    kind = _TYPES[key]
    text = text.strip()
    optional = "None" in kind
    if text.lower() in ("none", ""):
        if optional:
            return None
        raise ConfigError(key, "a value is required")
    try:
        if kind.startswith("int"):
            f = float(text)
            if not f.is_integer():
                raise ValueError
            return int(f) if "e" in text.lower() else int(text)
        if kind.startswith("float"):
            return float(text)
    except ValueError:
        raise ConfigError(key, f"cannot parse {text!r} as {kind.split()[0]}") from None
    return text


def _format_scalar(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """A named experiment: each key maps to a tuple of values (length 1 = shared)."""

    name: str
    params: dict

    @classmethod
    def from_mapping(cls, name: str, mapping: dict) -> "ExperimentConfig":
        params = {}
        for key, value in mapping.items():
            if key not in _TYPES:
                raise ConfigError(key, f"unknown key (known keys: {', '.join(KEYS)})")
            values = value if isinstance(value, (list, tuple)) else (value,)
            if not values:
                raise ConfigError(key, "empty list")
            params[key] = tuple(values)
        return cls(name, params)

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        merged = dict(self.params)
        merged.update(ExperimentConfig.from_mapping(self.name, overrides).params)
        return ExperimentConfig(self.name, merged)

    def size(self) -> int:
        lengths = {len(v) for v in self.params.values() if len(v) > 1}
        if len(lengths) > 1:
            detail = ", ".join(f"{k}={len(v)}" for k, v in self.params.items() if len(v) > 1)
            raise ConfigError("sweep", f"list lengths differ ({detail})")
        return lengths.pop() if lengths else 1

    def swept_keys(self) -> list[str]:
        return [k for k, v in self.params.items() if len(v) > 1]

    def runs(self) -> list[RunConfig]:
        """Expand and validate every run before anything is allocated."""
        for key in _REQUIRED:
            if key not in self.params:
                raise ConfigError(key, f"missing required key in [{self.name}]")
        out = []
        for i in range(self.size()):
            values = {k: (v[i] if len(v) > 1 else v[0]) for k, v in self.params.items()}
            seed = values.get("seed", 0)
            run = RunConfig(**values, init_seed=seed + i if isinstance(seed, int) else seed)
            try:
                validate(run)
            except ConfigError as exc:
                label = f"[{self.name}] run {i}" if self.size() > 1 else f"[{self.name}]"
                raise ConfigError(exc.field, f"{label}: {str(exc).split(': ', 1)[1]}") from None
            out.append(run)
        return out


def validate(run: RunConfig) -> None:
    def need(cond, key, msg):
        if not cond:
            raise ConfigError(key, msg)

    for key, kind in _TYPES.items():
        value = getattr(run, key)
        if value is None:
            need("None" in kind, key, "a value is required")
            continue
        if kind.startswith("int"):
            need(isinstance(value, (int, np.integer)) and not isinstance(value, bool), key, f"expected an integer, got {value!r}")
        elif kind.startswith("float"):
            need(isinstance(value, (int, float)) and not isinstance(value, bool) and np.isfinite(value), key, f"expected a finite number, got {value!r}")

    need(run.mode in MODES, "mode", f"must be one of {', '.join(MODES)}, got {run.mode!r}")
    need(run.n >= 1, "n", f"must be positive, got {run.n}")
    need(1 <= run.r <= run.n, "r", f"must satisfy 1 <= r <= n, got r={run.r}, n={run.n}")
    need(1 <= run.k <= run.n, "k", f"must satisfy 1 <= k <= n, got k={run.k}, n={run.n}")
    need(run.m >= 0, "m", f"must be nonnegative (0 = identity operator), got {run.m}")
    need(run.eta >= 0, "eta", f"must be nonnegative, got {run.eta}")
    need(run.alpha > 0, "alpha", f"must be positive, got {run.alpha}")
    need(0 < run.ratio <= 1, "ratio", f"must lie in (0, 1], got {run.ratio}")
    need(run.t_max >= 0, "t_max", f"must be nonnegative, got {run.t_max}")
    need(run.log_stride >= 1, "log_stride", f"must be at least 1, got {run.log_stride}")
    need(0 <= run.seed and run.init_seed <= SEED_MAX, "seed", f"must fit in an unsigned 64-bit integer, got {run.seed}")
    need(run.sigma_r > 0, "sigma_r", f"must be positive, got {run.sigma_r}")
    need(run.sigma_1 >= run.sigma_r, "sigma_1", f"must be at least sigma_r, got {run.sigma_1} < {run.sigma_r}")
    need(run.r > 1 or run.sigma_1 == run.sigma_r, "sigma_r", "must equal sigma_1 when r = 1")
    need(run.stop_loss is None or run.stop_loss > 0, "stop_loss", f"must be positive, got {run.stop_loss}")
    need(run.rip_trials >= 0, "rip_trials", f"must be nonnegative, got {run.rip_trials}")
    need(run.fit_kind in FIT_KINDS, "fit_kind", f"must be one of {', '.join(FIT_KINDS)}, got {run.fit_kind!r}")
    need(run.fit_field in TRACE_FIELDS and run.fit_field != "t", "fit_field", f"unknown trace field {run.fit_field!r}")
    need(run.fit_floor is None or run.fit_floor >= 0, "fit_floor", f"must be nonnegative, got {run.fit_floor}")
    try:
        parse_window(run.fit_window)
    except ValueError as exc:
        raise ConfigError("fit_window", str(exc)) from None

    if run.mode == "toy":
        need(run.k == run.r + 1, "k", f"toy mode needs k = r + 1, got r={run.r}, k={run.k}")
        need(run.m == 0, "m", "toy mode uses the identity operator (m = 0)")
        need(run.sigma_1 == 1.0 and run.sigma_r == 1.0, "sigma_r", "toy mode fixes all singular values to 1")
    if run.mode == "accel":
        need((run.gamma is None) != (run.t_fire is None), "t_fire", "accel mode needs exactly one of gamma or t_fire")
        need(run.gamma is None or run.gamma > 0, "gamma", f"must be positive, got {run.gamma}")
        need(run.t_fire is None or run.t_fire >= 0, "t_fire", f"must be nonnegative, got {run.t_fire}")
        need(run.beta is None or run.beta > 0, "beta", f"must be positive, got {run.beta}")
    else:
        need(run.gamma is None and run.t_fire is None, "t_fire", f"rebalancing fields only apply to accel mode, not {run.mode}")


def parse_config(text: str) -> list[ExperimentConfig]:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("file", str(exc).splitlines()[0]) from None
    out = []
    for section in parser.sections():
        mapping = {}
        for key, raw in parser.items(section):
            if key not in _TYPES:
                raise ConfigError(key, f"unknown key in [{section}] (known keys: {', '.join(KEYS)})")
            mapping[key] = [_parse_scalar(key, part) for part in raw.split(",")]
        out.append(ExperimentConfig.from_mapping(section, mapping))
    if not out:
        raise ConfigError("file", "no [section] found")
    return out


def serialize_config(configs) -> str:
    if isinstance(configs, ExperimentConfig):
        configs = [configs]
    buf = io.StringIO()
    for j, cfg in enumerate(configs):
        if j:
            buf.write("\n")
        buf.write(f"[{cfg.name}]\n")
        for key in KEYS:
            if key in cfg.params:
                buf.write(f"{key} = {', '.join(_format_scalar(v) for v in cfg.params[key])}\n")
    return buf.getvalue()


def parse_override(text: str) -> dict:
    """``key=value[,value...]`` from the command line."""
    if "=" not in text:
        raise ConfigError("--set", f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    if key not in _TYPES:
        raise ConfigError(key, f"unknown key (known keys: {', '.join(KEYS)})")
    return {key: [_parse_scalar(key, part) for part in raw.split(",")]}


def run_to_dict(run: RunConfig) -> dict:
    return asdict(run)
