"""Binary checkpoint format.

Layout (all integers little-endian)::

    8 bytes   magic  b"ECGDAE\\x00\\x01"
    2 bytes   format version (uint16)
    4 bytes   length L of the config block (uint32)
    L bytes   AutoencoderConfig as UTF-8 JSON
    ...       float64 tensors, kernel 0, bias 0, kernel 1, ... (shapes from config)
    32 bytes  SHA-256 of everything above
"""
from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .model import ArchitectureError, AutoencoderConfig, ModelWeights

MAGIC = b"ECGDAE\x00\x01"
VERSION = 1
_HEADER = struct.Struct("<HI")


class CheckpointError(ValueError):
    pass


def save_weights(weights: ModelWeights, path, config: AutoencoderConfig) -> None:
    weights.check(config)
    cfg = json.dumps(config.to_dict(), sort_keys=True).encode("utf-8")
    body = bytearray(MAGIC)
    body += _HEADER.pack(VERSION, len(cfg))
    body += cfg
    for a in weights.arrays():
        body += np.ascontiguousarray(a, dtype="<f8").tobytes()
    body += hashlib.sha256(body).digest()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(bytes(body))


def read_checkpoint(path) -> tuple[AutoencoderConfig, ModelWeights]:
    raw = Path(path).read_bytes()
    if raw[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint (bad magic)")
    if len(raw) < len(MAGIC) + _HEADER.size + 32:
        raise CheckpointError(f"{path}: checksum error (file truncated)")
    body, digest = raw[:-32], raw[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError(f"{path}: checksum error")
    version, cfg_len = _HEADER.unpack_from(body, len(MAGIC))
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    pos = len(MAGIC) + _HEADER.size
    config = AutoencoderConfig.from_dict(json.loads(body[pos:pos + cfg_len].decode("utf-8")))
    pos += cfg_len
    weights = ModelWeights()
    for c_in, c_out, k, _ in config.layer_shapes():
        for shape, dest in (((c_out, c_in, k), weights.kernels), ((c_out,), weights.biases)):
            count = int(np.prod(shape))
            chunk = body[pos:pos + 8 * count]
            if len(chunk) != 8 * count:
                raise CheckpointError(f"{path}: tensor data shorter than the config implies")
            dest.append(np.frombuffer(chunk, dtype="<f8").astype(np.float64).reshape(shape))
            pos += 8 * count
    if pos != len(body):
        raise CheckpointError(f"{path}: {len(body) - pos} trailing bytes after tensors")
    weights.check(config)
    return config, weights


def load_weights(path, config: AutoencoderConfig | None = None) -> ModelWeights:
    """Load weights; if ``config`` is given it must equal the stored one."""
    stored, weights = read_checkpoint(path)
    if config is not None and stored != config:
        diff = {k: (v, config.to_dict()[k]) for k, v in stored.to_dict().items()
                if config.to_dict()[k] != v}
        raise ArchitectureError(f"architecture mismatch: stored vs requested {diff}")
    return weights
