"""Flat key=value configuration with typed defaults.

Every tunable of the pipeline lives here so runs are reproducible from a
single small file.  Values are coerced to the type of their default; unknown
keys are rejected rather than silently ignored.
"""

from __future__ import annotations

from pathlib import Path

DEFAULTS: dict[str, object] = {
    "seed": 0,
    # embeddings
    "dims": 32,
    "glove_window": 8,
    "glove_epochs": 20,
    # repair models
    "hidden": 48,
    "epochs": 8,
    "ttl_epochs": 0,     # 0: same as epochs
    "lr": 5e-3,
    "alpha": 10.0,
    "adversarial": True,
    "attention": True,
    "weight_mode": "hadamard",
    "identity_per_bug": 2,
    # hunk pair scorer / buggy-statement classifier
    "scorer_hidden": 32,
    "scorer_epochs": 150,
    "classifier_hidden": 32,
    "classifier_epochs": 90,
    # localization and grouping
    "threshold": 0.0,
    "cap": 50,
    "group_threshold": 0.5,
    # expansion and generation
    "window": 5,
    "seed_attempts": 5,
    "beam_width": 100,
    "top_tokens": 5,
    # validation
    "budget_s": 60.0,
    "top_k": 5,
}


class ConfigError(ValueError):
    pass


def _coerce(key: str, raw: str) -> object:
    default = DEFAULTS[key]
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as err:
        raise ConfigError(f"{key}: {err}") from None
    return raw.strip()


def load_config(path: Path | str | None = None,
                overrides: dict[str, object] | None = None) -> dict[str, object]:
    config = dict(DEFAULTS)
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
            key, _, value = stripped.partition("=")
            key = key.strip()
            if key not in DEFAULTS:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            config[key] = _coerce(key, value)
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown key {key!r}")
        config[key] = _coerce(key, str(value)) if isinstance(value, str) else value
    return config


def save_config(config: dict[str, object], path: Path | str) -> None:
    lines = [f"{k} = {config[k]}" for k in sorted(config)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
