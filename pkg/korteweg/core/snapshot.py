"""Бинарные снимки полей.

Формат: 8 байт b"KORTFLD1", длина JSON-заголовка (uint32 little-endian), заголовок UTF-8
с ключами {dim, n_points, kind, representation, time}, затем float64 little-endian
в порядке row-major (для спектральных полей — чередование re/im).
"""

import json
import logging
import struct
from pathlib import Path

import numpy as np

from korteweg.core.fields import FIELD_KINDS, Field, Representation
from korteweg.core.grid import Grid
from korteweg.errors import OutOfRangeError

logger = logging.getLogger(__name__)

MAGIC = b"KORTFLD1"
_LENGTH = struct.Struct("<I")


def encode_snapshot(field: Field, time: float = 0.0) -> bytes:
    header = {
        "dim": field.grid.dim,
        "n_points": field.grid.n_points,
        "kind": field.kind,
        "representation": field.representation.value,
        "time": float(time),
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    if field.representation is Representation.SPECTRAL:
        payload = np.ascontiguousarray(field.data, dtype="<c16").view("<f8")
    else:
        payload = np.ascontiguousarray(field.data, dtype="<f8")
    return MAGIC + _LENGTH.pack(len(header_bytes)) + header_bytes + payload.tobytes()


def decode_snapshot(blob: bytes) -> tuple[Field, float]:
    if blob[:8] != MAGIC:
        raise OutOfRangeError("not a field snapshot: bad magic")
    start = 8 + _LENGTH.size
    if len(blob) < start:
        raise OutOfRangeError(f"snapshot truncated: {len(blob)} bytes")
    (length,) = _LENGTH.unpack_from(blob, 8)
    try:
        header = json.loads(blob[start : start + length].decode("utf-8"))
        if not isinstance(header, dict):
            raise TypeError(f"header is {type(header).__name__}, not an object")
        grid = Grid(n_points=header["n_points"], dim=header["dim"])
        cls = FIELD_KINDS[header["kind"]]
        representation = Representation(header["representation"])
        time = float(header["time"])
        raw = np.frombuffer(blob, dtype="<f8", offset=start + length)
    except (KeyError, TypeError, ValueError, struct.error) as e:
        raise OutOfRangeError(f"malformed snapshot: {e}") from e

    shape = (grid.dim,) * cls.rank + grid.shape
    expected = int(np.prod(shape)) * (2 if representation is Representation.SPECTRAL else 1)
    if raw.size != expected:
        raise OutOfRangeError(f"snapshot payload has {raw.size} floats, expected {expected}")
    if representation is Representation.SPECTRAL:
        data = raw.view("<c16").reshape(shape)
    else:
        data = raw.reshape(shape)
    return cls(grid, data.astype(data.dtype.newbyteorder("=")), representation), time


def write_snapshot(path: Path, field: Field, time: float = 0.0) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_snapshot(field, time))
    logger.info("Snapshot written: %s (%s, t=%.6g)", path, field.kind, time)
    return path


def read_snapshot(path: Path) -> tuple[Field, float]:
    return decode_snapshot(Path(path).read_bytes())
