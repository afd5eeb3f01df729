"""Binary persistence of trained models (.qf files).

Layout (all integers and floats little-endian):

    magic        4 bytes  b"QFMF"
    version      1 byte
    config       u32 length + UTF-8 key=value text (the pipeline config echo)
    eigen block  u32 height, u32 width, u32 d, u32 k,
                 f64[d] mean, f64[k] eigenvalues, f64[d*k] basis column-major
    mlp block    u32 n_layers, u32[n_layers] layer sizes,
                 u32 n_classes, i64[n_classes] class ids,
                 then per layer f64 weights row-major and f64 biases
    checksum     u32 CRC-32 of everything above

Round trips are bitwise: raw float64 bytes are written and read unchanged.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .eigenspace import EigenModel
from .mlp import MlpModel

MAGIC = b"QFMF"
VERSION = 1


class ModelFormatError(ValueError):
    """Not a model file, or an unsupported version."""


class ModelCorruptionError(ValueError):
    """Truncated payload or checksum mismatch."""


def _f64_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def save_model(path, eigen: EigenModel, mlp: MlpModel,
               class_ids, config_text: str) -> None:
    if eigen.image_shape is None:
        raise ValueError("eigen model must carry its image shape for persistence")
    class_ids = [int(c) for c in class_ids]
    if len(class_ids) != mlp.n_outputs:
        raise ValueError(
            f"{len(class_ids)} class ids for {mlp.n_outputs} output units"
        )
    out = bytearray()
    out += MAGIC
    out += struct.pack("<B", VERSION)
    config_bytes = config_text.encode("utf-8")
    out += struct.pack("<I", len(config_bytes))
    out += config_bytes

    height, width = eigen.image_shape
    out += struct.pack("<IIII", height, width, eigen.d, eigen.k)
    out += _f64_bytes(eigen.mean)
    out += _f64_bytes(eigen.eigenvalues)
    out += _f64_bytes(eigen.basis.T)  # column-major: one eigenvector after another

    sizes = mlp.layer_sizes
    out += struct.pack("<I", len(sizes))
    out += struct.pack(f"<{len(sizes)}I", *sizes)
    out += struct.pack("<I", len(class_ids))
    out += struct.pack(f"<{len(class_ids)}q", *class_ids)
    for W, b in zip(mlp.weights, mlp.biases):
        out += _f64_bytes(W)
        out += _f64_bytes(b)

    out += struct.pack("<I", zlib.crc32(bytes(out)) & 0xFFFFFFFF)
    Path(path).write_bytes(bytes(out))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelCorruptionError("model file truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def f64(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").copy()


def load_model(path):
    """Read a .qf file; returns (eigen, mlp, class_ids, config_text)."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ModelFormatError(f"not a qfaces model file: {path}")
    if len(data) < 9:
        raise ModelCorruptionError("model file truncated")
    stored = struct.unpack("<I", data[-4:])[0]
    actual = zlib.crc32(data[:-4]) & 0xFFFFFFFF
    if stored != actual:
        raise ModelCorruptionError(
            f"checksum mismatch: stored {stored:#010x}, computed {actual:#010x}"
        )

    r = _Reader(data[:-4])
    r.take(4)  # magic
    (version,) = r.unpack("<B")
    if version != VERSION:
        raise ModelFormatError(f"unsupported model version {version}")
    (config_len,) = r.unpack("<I")
    config_text = r.take(config_len).decode("utf-8")

    height, width, d, k = r.unpack("<IIII")
    mean = r.f64(d)
    eigenvalues = r.f64(k)
    basis = r.f64(d * k).reshape(k, d).T.copy()
    eigen = EigenModel(mean=mean, basis=basis, eigenvalues=eigenvalues,
                       image_shape=(height, width))

    (n_layers,) = r.unpack("<I")
    sizes = list(r.unpack(f"<{n_layers}I"))
    (n_classes,) = r.unpack("<I")
    class_ids = list(r.unpack(f"<{n_classes}q"))
    weights, biases, vw, vb = [], [], [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(r.f64(fan_out * fan_in).reshape(fan_out, fan_in))
        biases.append(r.f64(fan_out))
        vw.append(np.zeros((fan_out, fan_in)))
        vb.append(np.zeros(fan_out))
    mlp = MlpModel(sizes, weights, biases, vw, vb)

    if r.pos != len(r.data):
        raise ModelCorruptionError(
            f"{len(r.data) - r.pos} unexpected trailing bytes in model file"
        )
    return eigen, mlp, class_ids, config_text
