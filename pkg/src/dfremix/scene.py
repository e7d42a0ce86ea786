"""JSON scene files describing one remix-and-enhance job.

Relative paths inside a scene resolve against the scene file's directory.
Unknown keys are rejected. ``to_dict`` emits the canonical form with
every default filled in, so ``parse(to_dict(scene))`` round-trips.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import jsonschema

from .estimator import EstimatorConfig
from .exceptions import InvalidInputError
from .filtering import FilterOrder
from .nalr import AUDIOGRAM_FREQUENCIES, ListenerProfile
from .pipeline import STEM_NAMES, DegradationSpec, RemixGains

_AUDIOGRAM = {
    "type": "object",
    "properties": {
        "frequencies": {
            "type": "array",
            "items": {"type": "number"},
            "minItems": len(AUDIOGRAM_FREQUENCIES),
            "maxItems": len(AUDIOGRAM_FREQUENCIES),
        },
        "levels": {
            "type": "array",
            "items": {"type": "number", "minimum": -10, "maximum": 120},
            "minItems": len(AUDIOGRAM_FREQUENCIES),
            "maxItems": len(AUDIOGRAM_FREQUENCIES),
        },
    },
    "required": ["levels"],
    "additionalProperties": False,
}

LISTENER_SCHEMA = {
    "type": "object",
    "properties": {"id": {"type": "string"}, "left": _AUDIOGRAM, "right": _AUDIOGRAM},
    "required": ["left", "right"],
    "additionalProperties": False,
}

SCENE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "RemixScene",
    "type": "object",
    "properties": {
        "stems": {
            "type": "object",
            "properties": {name: {"type": "string"} for name in STEM_NAMES},
            "required": list(STEM_NAMES),
            "additionalProperties": False,
        },
        "gains_db": {
            "type": "object",
            "properties": {name: {"type": "number", "minimum": -60, "maximum": 60} for name in STEM_NAMES},
            "additionalProperties": False,
        },
        "listener": LISTENER_SCHEMA,
        "degradation": {
            "type": "object",
            "properties": {
                "fir_length": {"type": "integer", "minimum": 0},
                "shift": {"type": "integer"},
                "magnitude_jitter_db": {"type": "number", "minimum": 0},
                "phase_jitter_rad": {"type": "number", "minimum": 0},
                "jitter_smoothing": {"type": "number", "minimum": 0},
                "snr_db": {"type": ["number", "null"]},
            },
            "additionalProperties": False,
        },
        "estimator": {
            "type": "object",
            "properties": {
                "mode": {"enum": ["crm", "df"]},
                "order": {"type": "integer", "minimum": 1, "maximum": 64},
                "lookahead": {"type": "integer", "minimum": 0},
                "ridge": {"type": "number", "minimum": 0},
                "block_len": {"type": ["integer", "null"], "minimum": 1},
            },
            "additionalProperties": False,
        },
        "outputs": {
            "type": "object",
            "properties": {"dir": {"type": "string"}},
            "additionalProperties": False,
        },
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["stems", "listener"],
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "type": "object",
    "properties": {
        "sdr_variant": {"type": "string"},
        "sdr_before": {"type": "array", "items": {"type": "number"}},
        "sdr_before_mean": {"type": "number"},
        "sdr_after": {"type": "array", "items": {"type": "number"}},
        "sdr_after_mean": {"type": "number"},
        "sdr_improvement": {"type": "number"},
        "mae_before": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "mae_after": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "mae": {"type": "number", "minimum": 0},
        "stft_relative_residual_before": {"type": "number", "minimum": 0},
        "stft_relative_residual_after": {"type": "number", "minimum": 0},
        "per_frequency_residual_before": {"type": "array"},
        "per_frequency_residual_after": {"type": "array"},
        "degenerate_systems": {"type": "integer", "minimum": 0},
        "listener_gains_db": {"type": "object"},
        "config": SCENE_SCHEMA,
    },
    "required": ["sdr_before", "sdr_after", "mae", "config"],
}


@dataclass(frozen=True)
class RemixScene:
    stems: dict
    listener: ListenerProfile
    gains: RemixGains = field(default_factory=RemixGains)
    degradation: DegradationSpec = field(default_factory=DegradationSpec)
    mode: str = "df"
    order: int = 5
    lookahead: int = 0
    ridge: float = 1e-8
    block_len: Optional[int] = None
    output_dir: str = "out"
    seed: int = 0
    base_dir: Path = field(default=Path("."), compare=False)

    def stem_paths(self) -> dict:
        return {name: self.resolve(self.stems[name]) for name in STEM_NAMES}

    def resolve(self, path) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.base_dir / path

    @property
    def out_dir(self) -> Path:
        return self.resolve(self.output_dir)

    def estimator_config(self) -> EstimatorConfig:
        return EstimatorConfig(
            order=FilterOrder(self.order, lookahead=self.lookahead),
            ridge=self.ridge,
            block_len=self.block_len,
        )

    def with_overrides(self, mode=None, order=None, seed=None, output_dir=None) -> "RemixScene":
        changes = {}
        if mode is not None:
            changes["mode"] = mode
        if order is not None:
            changes["order"] = order
        if seed is not None:
            changes["seed"] = seed
            changes["degradation"] = replace(self.degradation, seed=seed)
        if output_dir is not None:
            changes["output_dir"] = str(output_dir)
        scene = replace(self, **changes)
        scene.estimator_config()
        return scene

    def to_dict(self) -> dict:
        degradation = self.degradation.to_dict()
        degradation.pop("seed")
        return {
            "stems": {name: str(self.stems[name]) for name in STEM_NAMES},
            "gains_db": self.gains.to_dict(),
            "listener": self.listener.to_dict(),
            "degradation": degradation,
            "estimator": {
                "mode": self.mode,
                "order": self.order,
                "lookahead": self.lookahead,
                "ridge": self.ridge,
                "block_len": self.block_len,
            },
            "outputs": {"dir": self.output_dir},
            "seed": self.seed,
        }


def parse_scene(data: dict, base_dir=".") -> RemixScene:
    try:
        jsonschema.validate(data, SCENE_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidInputError(f"invalid scene at {where}: {exc.message}") from None
    seed = data.get("seed", 0)
    est = data.get("estimator", {})
    scene = RemixScene(
        stems=dict(data["stems"]),
        listener=ListenerProfile.from_dict(data["listener"]),
        gains=RemixGains(**data.get("gains_db", {})),
        degradation=DegradationSpec(**data.get("degradation", {}), seed=seed),
        mode=est.get("mode", "df"),
        order=est.get("order", 5),
        lookahead=est.get("lookahead", 0),
        ridge=float(est.get("ridge", 1e-8)),
        block_len=est.get("block_len"),
        output_dir=data.get("outputs", {}).get("dir", "out"),
        seed=seed,
        base_dir=Path(base_dir),
    )
    scene.estimator_config()
    return scene


def load_scene(path) -> RemixScene:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"scene file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: not valid JSON ({exc})") from None
    return parse_scene(data, base_dir=path.parent)


def dump_json(data: dict) -> str:
    """Canonical JSON text: sorted keys, fixed float precision."""
    return json.dumps(_round_floats(data), indent=2, sort_keys=True) + "\n"


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def save_scene(scene: RemixScene, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json(scene.to_dict()))
    return path
