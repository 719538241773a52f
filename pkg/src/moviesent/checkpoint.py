"""Checkpoint container: JSON header plus concatenated little-endian float32 arrays.

Layout:  a magic line, a line carrying the decimal byte length of the JSON
header, the header itself (config fields and the ordered array manifest), a
newline, then every array's raw bytes in manifest order. Round-trips are
bit-exact for float32 parameter stores.
"""

from __future__ import annotations

import json

import numpy as np

from .encoder import ParameterStore, set_freeze
from .errors import DataError
from .model import ModelConfig

MAGIC = b"MOVIESENT-CKPT-1\n"


def save_checkpoint(path, config: ModelConfig, params: ParameterStore) -> None:
    names = params.names()
    header = {
        "config": config.to_dict(),
        "arrays": [[name, list(params[name].shape)] for name in names],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(f"{len(header_bytes)}\n".encode("ascii"))
        handle.write(header_bytes)
        handle.write(b"\n")
        for name in names:
            handle.write(np.ascontiguousarray(params[name], dtype="<f4").tobytes())


def load_checkpoint(path) -> tuple[ModelConfig, ParameterStore]:
    try:
        with open(path, "rb") as handle:
            blob = handle.read()
    except OSError as exc:
        raise DataError(f"missing file: cannot read checkpoint {path!r}: {exc}") from exc
    if not blob.startswith(MAGIC):
        raise DataError(f"{path!r} is not a checkpoint file (bad magic)")
    offset = len(MAGIC)
    newline = blob.index(b"\n", offset)
    try:
        header_len = int(blob[offset:newline])
    except ValueError as exc:
        raise DataError(f"corrupt checkpoint header length in {path!r}") from exc
    header_start = newline + 1
    header_end = header_start + header_len
    try:
        header = json.loads(blob[header_start:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"corrupt checkpoint header in {path!r}: {exc}") from exc
    config = ModelConfig.from_dict(header.get("config", {}))

    params = ParameterStore()
    cursor = header_end + 1  # skip the newline after the header
    for entry in header.get("arrays", []):
        name, shape = entry[0], tuple(entry[1])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 4
        if cursor + nbytes > len(blob):
            raise DataError(f"truncated checkpoint {path!r} at array {name!r}")
        array = np.frombuffer(blob[cursor : cursor + nbytes], dtype="<f4").reshape(shape)
        params.add(name, array.copy())
        cursor += nbytes
    if cursor != len(blob):
        raise DataError(f"trailing bytes in checkpoint {path!r}")
    set_freeze(params, config.encoder.num_frozen_layers)
    return config, params
