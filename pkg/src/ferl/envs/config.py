"""Environment config JSON: ``{"kind": "ts1d" | "awake", ...constants}``."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .awake import AwakeSteering10D, load_response_matrix
from .ts1d import TargetSteering1D

ENV_SCHEMA = "ferl.env/1"
BINARY_BITS = 5


def make_env(name: str, overrides: dict | None = None):
    """Build an environment by CLI name: ``ts1d``, ``ts1d-binary`` or ``awake``."""
    overrides = dict(overrides or {})
    overrides.pop("kind", None)
    overrides.pop("schema", None)
    if name == "ts1d":
        return TargetSteering1D(**overrides)
    if name == "ts1d-binary":
        overrides.setdefault("bits", BINARY_BITS)
        return TargetSteering1D(variant="binary", **overrides)
    if name == "awake":
        if "response_file" in overrides:
            overrides["response"] = load_response_matrix(overrides.pop("response_file"))
        if "response" in overrides:
            overrides["response"] = np.asarray(overrides["response"], dtype=np.float64)
        if "init_rms_range" in overrides:
            overrides["init_rms_range"] = tuple(overrides["init_rms_range"])
        return AwakeSteering10D(**overrides)
    raise ValueError(f"unknown environment {name!r}")


def env_from_config(doc: dict):
    kind = doc.get("kind")
    if kind == "ts1d":
        name = "ts1d-binary" if doc.get("variant") == "binary" else "ts1d"
        return make_env(name, {k: v for k, v in doc.items() if k != "variant"})
    if kind == "awake":
        return make_env("awake", doc)
    raise ValueError(f"unknown environment kind {kind!r}")


def env_name(env) -> str:
    if isinstance(env, AwakeSteering10D):
        return "awake"
    return "ts1d-binary" if env.variant == "binary" else "ts1d"


def save_env_config(env, path) -> None:
    Path(path).write_text(json.dumps({"schema": ENV_SCHEMA, **env.config()}, indent=1))


def load_env_config(path):
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != ENV_SCHEMA:
        raise ValueError(f"unsupported environment schema {doc.get('schema')!r}")
    return env_from_config(doc)
