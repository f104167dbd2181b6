"""Binary instance files.

Layout (little endian)::

    magic    4s   b"FRRL"
    version  u16  currently 1
    N        u32
    k        u32
    eps      f64
    count    u32  number of instances
    then per instance:
        label  i8   -1 yes, +1 no, 0 outside the promise
        bits   ceil(2kN/8) bytes, one bit per coordinate (1 means -1), LSB first,
               zero padded
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from forrlab.params import ForrelationParams

MAGIC = b"FRRL"
VERSION = 1
_HEADER = struct.Struct("<4sHIIdI")


class InstanceFormatError(ValueError):
    pass


def pack_signs(z) -> bytes:
    z = np.asarray(z)
    if not np.all(np.abs(z) == 1):
        raise InstanceFormatError("only +-1 vectors can be stored")
    return np.packbits(z < 0, bitorder="little").tobytes()


def unpack_signs(data: bytes, length: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")[:length]
    return (1 - 2 * bits.astype(np.int8)).astype(np.int8)


def dumps(params: ForrelationParams, instances, labels) -> bytes:
    instances = np.atleast_2d(np.asarray(instances))
    labels = np.asarray(labels, dtype=np.int8).reshape(-1)
    if instances.shape != (labels.size, params.length):
        raise InstanceFormatError(f"instances shape {instances.shape} does not match {labels.size} x {params.length}")
    out = [_HEADER.pack(MAGIC, VERSION, params.N, params.k, params.eps, labels.size)]
    for z, lab in zip(instances, labels):
        out.append(struct.pack("<b", int(lab)))
        out.append(pack_signs(z))
    return b"".join(out)


def loads(data: bytes):
    """Parse instance bytes into ``(params, instances, labels)``."""
    if len(data) < _HEADER.size:
        raise InstanceFormatError("truncated header")
    magic, version, N, k, eps, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise InstanceFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise InstanceFormatError(f"unsupported version {version}")
    params = ForrelationParams(N=N, k=k, eps=eps)
    nbytes = (params.length + 7) // 8
    pos = _HEADER.size
    if len(data) != pos + count * (1 + nbytes):
        raise InstanceFormatError("payload size does not match header")
    zs = np.empty((count, params.length), dtype=np.int8)
    labels = np.empty(count, dtype=np.int8)
    for i in range(count):
        labels[i] = struct.unpack_from("<b", data, pos)[0]
        zs[i] = unpack_signs(data[pos + 1: pos + 1 + nbytes], params.length)
        pos += 1 + nbytes
    return params, zs, labels


def save(path, params, instances, labels):
    Path(path).write_bytes(dumps(params, instances, labels))


def load(path):
    return loads(Path(path).read_bytes())
