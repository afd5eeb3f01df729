"""Pipeline configuration and its flat key=value text form.

The same serialization embeds the config in saved model files, so parse
and format round-trip exactly. The ``QF_SEED`` environment variable, when
set, overrides the configured training seed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .mlp import TrainConfig
from .quotient import FUSION_VARIANTS, QuotientConfig


@dataclass
class PipelineConfig:
    height: int = 80
    width: int = 100
    crop: tuple[int, int, int, int] | None = None   # top, left, h, w
    method: int = 2
    epsilon_rel: float = 1e-3
    fusion_variant: str = "none"
    k_max: int = 40
    hidden_sizes: tuple[int, ...] = (100,)
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.height < 2 or self.width < 2:
            raise ValueError(f"target size must be at least 2x2, got {self.height}x{self.width}")
        if self.height % 2 or self.width % 2:
            raise ValueError(f"target size must be even, got {self.height}x{self.width}")
        if self.method not in (1, 2):
            raise ValueError(f"method must be 1 or 2, got {self.method}")
        if self.method == 2 and (self.height % 4 or self.width % 4):
            raise ValueError(
                f"method 2 needs dimensions divisible by 4, got {self.height}x{self.width}"
            )
        if self.fusion_variant not in FUSION_VARIANTS:
            raise ValueError(
                f"fusion_variant must be one of {FUSION_VARIANTS}, got {self.fusion_variant!r}"
            )
        if self.k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {self.k_max}")
        if self.crop is not None and len(self.crop) != 4:
            raise ValueError(f"crop must be (top, left, h, w), got {self.crop!r}")
        if any(s < 1 for s in self.hidden_sizes):
            raise ValueError(f"hidden sizes must be positive, got {self.hidden_sizes}")

    @property
    def quotient(self) -> QuotientConfig:
        return QuotientConfig(method=self.method, epsilon_rel=self.epsilon_rel)

    @property
    def feature_shape(self) -> tuple[int, int]:
        if self.method == 1:
            return (self.height, self.width)
        return (self.height // 2, self.width // 2)


_BOOL_TEXT = {"true": True, "false": False, "1": True, "0": False}


def format_config(cfg: PipelineConfig) -> str:
    """Render the config as flat key=value text."""
    lines = [
        f"height={cfg.height}",
        f"width={cfg.width}",
        "crop=" + (",".join(str(v) for v in cfg.crop) if cfg.crop else ""),
        f"method={cfg.method}",
        f"epsilon_rel={cfg.epsilon_rel!r}",
        f"fusion_variant={cfg.fusion_variant}",
        f"k_max={cfg.k_max}",
        "hidden=" + ",".join(str(v) for v in cfg.hidden_sizes),
        f"learning_rate={cfg.train.learning_rate!r}",
        f"momentum={cfg.train.momentum!r}",
        f"max_epochs={cfg.train.max_epochs}",
        f"target_mse={cfg.train.target_mse!r}",
        f"seed={cfg.train.seed}",
        f"shuffle={'true' if cfg.train.shuffle else 'false'}",
    ]
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> PipelineConfig:
    """Parse key=value text; unknown keys are errors."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()

    def pop_int(key, default):
        return int(values.pop(key)) if key in values else default

    def pop_float(key, default):
        return float(values.pop(key)) if key in values else default

    crop = None
    if values.get("crop"):
        parts = values.pop("crop").split(",")
        if len(parts) != 4:
            raise ValueError(f"crop must be four comma-separated integers, got {parts}")
        crop = tuple(int(p) for p in parts)
    else:
        values.pop("crop", None)

    hidden = (100,)
    if values.get("hidden"):
        hidden = tuple(int(p) for p in values.pop("hidden").split(","))
    else:
        values.pop("hidden", None)

    shuffle = False
    if "shuffle" in values:
        text_value = values.pop("shuffle").lower()
        if text_value not in _BOOL_TEXT:
            raise ValueError(f"shuffle must be true or false, got {text_value!r}")
        shuffle = _BOOL_TEXT[text_value]

    train = TrainConfig(
        learning_rate=pop_float("learning_rate", 0.1),
        momentum=pop_float("momentum", 0.9),
        max_epochs=pop_int("max_epochs", 2000),
        target_mse=pop_float("target_mse", 1e-3),
        seed=pop_int("seed", 0),
        shuffle=shuffle,
    )
    cfg = PipelineConfig(
        height=pop_int("height", 80),
        width=pop_int("width", 100),
        crop=crop,
        method=pop_int("method", 2),
        epsilon_rel=pop_float("epsilon_rel", 1e-3),
        fusion_variant=values.pop("fusion_variant", "none"),
        k_max=pop_int("k_max", 40),
        hidden_sizes=hidden,
        train=train,
    )
    if values:
        raise ValueError(f"unknown config keys: {sorted(values)}")
    return cfg


def load_config(path) -> PipelineConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def apply_env_overrides(cfg: PipelineConfig) -> PipelineConfig:
    """Apply QF_SEED when present; returns a new config."""
    seed_text = os.environ.get("QF_SEED")
    if seed_text is None:
        return cfg
    try:
        seed = int(seed_text)
    except ValueError:
        raise ValueError(f"QF_SEED must be an integer, got {seed_text!r}") from None
    new_train = replace(cfg.train, seed=seed)
    return replace(cfg, train=new_train)
