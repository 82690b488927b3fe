"""Shared checkpoint format for every trainable model.

A checkpoint is a pair of files:
  <stem>.json  manifest: hyperparameters plus the ordered parameter table
               (name, shape, offset into the binary blob);
  <stem>.bin   the parameter values, flat little-endian float32.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .tensor import Tensor


class CheckpointError(ValueError):
    pass


def save_checkpoint(stem: Path, params: dict[str, Tensor], hyper: dict) -> None:
    stem = Path(stem)
    table = []
    chunks = []
    offset = 0
    for name, tensor in params.items():
        flat = np.ascontiguousarray(tensor.data, dtype="<f4").ravel()
        table.append({"name": name, "shape": list(tensor.data.shape),
                      "offset": offset, "size": int(flat.size)})
        chunks.append(flat.tobytes())
        offset += flat.size
    manifest = {"format": "flat-f4le", "hyper": hyper, "params": table}
    stem.with_suffix(".json").write_text(json.dumps(manifest, indent=2) + "\n",
                                         encoding="utf-8")
    stem.with_suffix(".bin").write_bytes(b"".join(chunks))


def load_checkpoint(stem: Path) -> tuple[dict[str, Tensor], dict]:
    stem = Path(stem)
    manifest_path = stem.with_suffix(".json")
    blob_path = stem.with_suffix(".bin")
    if not manifest_path.exists() or not blob_path.exists():
        raise CheckpointError(f"missing checkpoint files for {stem}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("format") != "flat-f4le":
        raise CheckpointError(f"unknown checkpoint format in {manifest_path}")
    blob = np.frombuffer(blob_path.read_bytes(), dtype="<f4")
    params: dict[str, Tensor] = {}
    for entry in manifest["params"]:
        size = int(entry["size"])
        offset = int(entry["offset"])
        if offset + size > blob.size:
            raise CheckpointError(f"truncated checkpoint blob {blob_path}")
        values = blob[offset:offset + size].reshape(entry["shape"]).astype(np.float32)
        params[entry["name"]] = Tensor(values.copy(), requires_grad=True)
    return params, manifest.get("hyper", {})
