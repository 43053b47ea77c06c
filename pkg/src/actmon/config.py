"""Run configuration: flat key=value files, presets, and flag overrides.

Precedence, lowest to highest: built-in defaults, preset, config file,
command-line flags. Every command prints the resolved configuration so a
run can be reproduced from its output alone.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

STRATEGIES = ("quantitative", "box", "softmax", "random")


@dataclass
class RunConfig:
    # dataset
    dataset_kind: str = "synthetic"  # synthetic | idx | csv
    train_images: str = ""
    train_labels: str = ""
    test_images: str = ""
    test_labels: str = ""
    train_csv: str = ""
    test_csv: str = ""
    synth_classes: int = 4
    synth_dim: int = 8
    synth_per_class: int = 400
    synth_spread: float = 0.04
    known_classes: tuple[int, ...] = (0, 1)
    init_per_class: int = 0  # 0 = use all known-class training samples
    # stream
    seed: int = 0
    batch_size: int = 128
    stream_mode: str = "uniform"  # uniform | phased
    stream_limit: int = 0  # 0 = full dataset
    # model
    hidden_layers: tuple[int, ...] = (16, 16)
    feature_layer: int = -1  # -1 = last hidden layer
    epochs_init: int = 40
    epochs_run: int = 40
    learning_rate: float = 0.3
    train_batch_size: int = 32
    # monitor
    strategy: str = "quantitative"
    p: float = 0.05  # budget fraction and random warning rate
    kappa_star: float = 0.9
    n_star_fraction: float = 0.05
    variance_target: float = 0.99
    k_max: int = 5
    use_pca: bool = True
    threshold_mode: str = "dynamic"  # dynamic | static
    softmax_threshold: float = 0.9
    random_rate: float = -1.0  # -1 = follow p
    # service
    host: str = "127.0.0.1"
    port: int = 8000
    authority_timeout: float = 0.0  # seconds; 0 = wait forever
    # output
    out_dir: str = "runs/out"

    def resolved_random_rate(self) -> float:
        return self.p if self.random_rate < 0 else self.random_rate

    def feature_layer_index(self) -> int:
        idx = self.feature_layer
        return len(self.hidden_layers) - 1 if idx < 0 else idx

    def validate(self) -> None:
        if self.dataset_kind not in ("synthetic", "idx", "csv"):
            raise ConfigError(f"unknown dataset_kind {self.dataset_kind!r}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError("p must lie in [0, 1]")
        if not 0.0 < self.kappa_star <= 1.0:
            raise ConfigError("kappa_star must lie in (0, 1]")
        if self.threshold_mode not in ("dynamic", "static"):
            raise ConfigError(f"unknown threshold_mode {self.threshold_mode!r}")
        if self.stream_mode not in ("uniform", "phased"):
            raise ConfigError(f"unknown stream_mode {self.stream_mode!r}")
        if not self.known_classes:
            raise ConfigError("known_classes must be non-empty")
        if self.dataset_kind == "idx" and not (self.train_images and self.train_labels):
            raise ConfigError("idx datasets need train_images and train_labels")
        if self.dataset_kind == "csv" and not self.train_csv:
            raise ConfigError("csv datasets need train_csv")
        if not 0 <= self.feature_layer_index() < len(self.hidden_layers):
            raise ConfigError("feature_layer out of range")


PRESETS: dict[str, dict] = {
    # 4 synthetic classes, 2 known; desk-scale comparison run
    "blob4": dict(
        dataset_kind="synthetic",
        synth_classes=4,
        synth_dim=8,
        synth_per_class=400,
        synth_spread=0.04,
        known_classes=(0, 1),
        hidden_layers=(48, 16),
        feature_layer=0,
        epochs_init=40,
        epochs_run=40,
        learning_rate=0.3,
        batch_size=128,
        p=0.05,
        kappa_star=0.9,
        n_star_fraction=0.075,
        variance_target=0.985,
    ),
    # MNIST with classes 0-4 known, desk-scale subsample; IDX paths must
    # point at the standard MNIST files. The monitored layer has 40 neurons;
    # the hidden layer above it stays trainable for transfer surgery.
    "mnist-half": dict(
        dataset_kind="idx",
        known_classes=(0, 1, 2, 3, 4),
        init_per_class=2000,
        stream_limit=10000,
        hidden_layers=(40, 20),
        feature_layer=0,
        epochs_init=3,
        epochs_run=3,
        learning_rate=0.1,
        train_batch_size=64,
        batch_size=128,
        p=0.05,
        kappa_star=0.9,
    ),
}

_TUPLE_INT_FIELDS = {"known_classes", "hidden_layers"}
_BOOL_FIELDS = {"use_pca"}


def _parse_value(name: str, text: str, target_type):
    text = text.strip()
    if name in _TUPLE_INT_FIELDS:
        if not text:
            return ()
        return tuple(int(v) for v in text.replace(" ", "").split(","))
    if name in _BOOL_FIELDS:
        lowered = text.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"bad boolean for {name}: {text!r}")
    if target_type is int:
        return int(text)
    if target_type is float:
        return float(text)
    return text


def _field_types() -> dict[str, type]:
    out = {}
    for f in fields(RunConfig):
        if f.name in _TUPLE_INT_FIELDS:
            out[f.name] = tuple
        elif f.name in _BOOL_FIELDS:
            out[f.name] = bool
        else:
            out[f.name] = type(getattr(RunConfig(), f.name))
    return out


def apply_preset(config: RunConfig, preset: str) -> RunConfig:
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; available: {sorted(PRESETS)}")
    for key, value in PRESETS[preset].items():
        setattr(config, key, value)
    return config


def load_config_file(config: RunConfig, path) -> RunConfig:
    """Apply ``key=value`` lines from a flat text file; # starts a comment."""
    types = _field_types()
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, found {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "preset":
            apply_preset(config, value)
            continue
        if key not in types:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        setattr(config, key, _parse_value(key, value, types[key]))
    return config


def set_override(config: RunConfig, key: str, value: str) -> RunConfig:
    types = _field_types()
    if key not in types:
        raise ConfigError(f"unknown config key {key!r}")
    setattr(config, key, _parse_value(key, value, types[key]))
    return config


def format_resolved(config: RunConfig) -> str:
    lines = ["# resolved configuration"]
    for f in sorted(fields(RunConfig), key=lambda f: f.name):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"{f.name}={value}")
    return "\n".join(lines)


def config_to_dict(config: RunConfig) -> dict:
    out = {}
    for f in fields(RunConfig):
        value = getattr(config, f.name)
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


def config_from_dict(data: dict) -> RunConfig:
    config = RunConfig()
    types = _field_types()
    for key, value in data.items():
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        if key in _TUPLE_INT_FIELDS:
            value = tuple(int(v) for v in value)
        setattr(config, key, value)
    return config
