"""
Flat binary field snapshots: an 8-byte little-endian header (n as uint32,
a reserved uint32 set to 0) followed by n^2 float64 values in row-major
order, row i holding the nodes with x1 = x1[i].
"""
import math
import struct

import numpy as np
from path import Path

from utils.errors import ConfigError
from utils.validators import ScalarField

HEADER = struct.Struct('<II')


def encode_snapshot(field: ScalarField) -> bytes:
    values = np.ascontiguousarray(field.values, dtype='<f8')
    return HEADER.pack(field.n, 0) + values.tobytes()


def decode_snapshot(payload: bytes, box_length: float = 2 * math.pi, time: float = 0.0) -> ScalarField:
    if len(payload) < HEADER.size:
        raise ConfigError("snapshot shorter than its header")
    n, _ = HEADER.unpack_from(payload)
    expected = HEADER.size + 8 * n * n
    if len(payload) != expected:
        raise ConfigError(f"snapshot holds {len(payload)} bytes, expected {expected} for n = {n}")
    values = np.frombuffer(payload, dtype='<f8', offset=HEADER.size).reshape(n, n).astype(float)
    return ScalarField(n=n, box_length=box_length, values=values, time=time)


def write_snapshot(path: Path, field: ScalarField) -> Path:
    path = Path(path)
    path.parent.makedirs_p()
    path.write_bytes(encode_snapshot(field))
    return path


def read_snapshot(path: Path, box_length: float = 2 * math.pi) -> ScalarField:
    return decode_snapshot(Path(path).read_bytes(), box_length)
