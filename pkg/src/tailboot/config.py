"""Study configuration: an INI file, overridable key by key.

Example::

    [study]
    profile = desk          ; full: R=B=1000, desk: R=B=200
    n = 1000
    level = 0.90
    cat = 2749
    master_seed = 20131
    output_dir = results/desk

    [setups]
    models = PL, PL-Mix, GPD
    modes = given, est
    x_min = 10
    alpha = 2.4
    body_file = src/tailboot/data/substitute_body.txt

Precedence is flag > environment (TAILBOOT_OUTPUT_DIR, output_dir only) >
file > profile > built-in default.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

PROFILES = {"full": dict(R=1000, B=1000), "desk": dict(R=200, B=200)}
MODELS = ("PL", "PL-Mix", "GPD")
MODES = ("given", "est")
OUTPUT_ENV = "TAILBOOT_OUTPUT_DIR"

# keys that change where or how fast a study runs but not what it computes
_UNHASHED = {"output_dir", "workers"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StudyConfig:
    profile: str = "full"
    R: int = 1000
    B: int = 1000
    n: int = 1000
    level: float = 0.90
    cat: float = 2749.0
    master_seed: int = 20131
    output_dir: str = "results"
    workers: int = 1
    ci_method: str = "percentile"
    tail_floor: int = 10
    min_distinct: int = 10
    models: tuple[str, ...] = MODELS
    modes: tuple[str, ...] = MODES
    x_min: float = 10.0
    alpha: float = 2.4
    body_file: str | None = None
    gpd_truth: str = "published"

    def validate(self) -> "StudyConfig":
        if self.profile not in PROFILES:
            raise ConfigError(f"profile must be one of {sorted(PROFILES)}, got {self.profile!r}")
        for k in ("R", "B", "n", "workers", "tail_floor", "min_distinct"):
            if getattr(self, k) < 1:
                raise ConfigError(f"{k} must be positive, got {getattr(self, k)}")
        if self.B < 2:
            raise ConfigError("B must be at least 2")
        if not 0 < self.level < 1:
            raise ConfigError(f"level must lie in (0, 1), got {self.level}")
        if not self.cat > 0:
            raise ConfigError(f"cat must be positive, got {self.cat}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        if not self.x_min > 0 or not self.alpha > 1:
            raise ConfigError("x_min must be positive and alpha must exceed 1")
        if self.ci_method not in ("percentile", "basic"):
            raise ConfigError(f"unknown ci_method {self.ci_method!r}")
        if self.gpd_truth not in ("published", "matcher"):
            raise ConfigError(f"gpd_truth must be 'published' or 'matcher', got {self.gpd_truth!r}")
        bad = [m for m in self.models if m not in MODELS]
        if bad or not self.models:
            raise ConfigError(f"models must be drawn from {MODELS}, got {list(self.models)}")
        bad = [m for m in self.modes if m not in MODES]
        if bad or not self.modes:
            raise ConfigError(f"modes must be drawn from {MODES}, got {list(self.modes)}")
        if "PL-Mix" in self.models:
            if not self.body_file:
                raise ConfigError("PL-Mix requires body_file")
            if not Path(self.body_file).is_file():
                raise ConfigError(f"body_file not found: {self.body_file}")
        return self

    def hashed_dict(self) -> dict[str, Any]:
        d = {k: v for k, v in asdict(self).items() if k not in _UNHASHED}
        d["models"], d["modes"] = list(self.models), list(self.modes)
        if self.body_file:
            # hash the body's content, not its location
            d["body_file"] = hashlib.sha256(Path(self.body_file).read_bytes()).hexdigest()
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.hashed_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_TYPES = {f.name: f.type for f in fields(StudyConfig)}


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    kind = _TYPES[key]
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind.startswith("tuple"):
            if isinstance(value, str):
                value = [v.strip() for v in value.split(",")]
            return tuple(v for v in value if v)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {value!r}") from None


def read_config_file(path: str | Path) -> dict[str, Any]:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keep R and B upper-case
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out: dict[str, Any] = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            if key not in _TYPES:
                raise ConfigError(f"unknown config key [{section}] {key}")
            out[key] = value
    if out.get("body_file") and not Path(out["body_file"]).is_absolute():
        # relative body paths are relative to the config file
        out["body_file"] = str(Path(path).parent / out["body_file"])
    return out


def resolve(path: str | Path | None = None, overrides: dict[str, Any] | None = None,
            environ=os.environ) -> StudyConfig:
    file_values = read_config_file(path) if path else {}
    flag_values = {k: v for k, v in (overrides or {}).items() if v is not None}
    profile = flag_values.get("profile", file_values.get("profile", StudyConfig.profile))
    if profile not in PROFILES:
        raise ConfigError(f"profile must be one of {sorted(PROFILES)}, got {profile!r}")
    values: dict[str, Any] = dict(PROFILES[profile])
    values.update(file_values)
    if environ.get(OUTPUT_ENV):
        values["output_dir"] = environ[OUTPUT_ENV]
    values.update(flag_values)
    unknown = set(values) - set(_TYPES)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = replace(StudyConfig(), **{k: _coerce(k, v) for k, v in values.items()})
    return cfg.validate()


def dump_config(cfg: StudyConfig) -> dict[str, Any]:
    d = asdict(cfg)
    d["models"], d["modes"] = list(cfg.models), list(cfg.modes)
    return d
