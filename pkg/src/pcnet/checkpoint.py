"""Deterministic binary checkpoints with bit-exact round-tripping.

Layout (all integers little-endian uint32, floats little-endian float64):

    magic             4 bytes, b"PCN1"
    format_version    u32 (currently 1)
    L                 u32, number of generative layers
    dims              u32 x (L + 1)
    output_dim        u32
    activation tags   u32 x L      (0 = relu, 1 = identity, 2 = tanh)
    latent_init_scale f64
    matrices          W(0) .. W(L-1), then the readout; each as
                      rows u32, cols u32, rows * cols f64 row-major

The file is self-describing: loading needs no external configuration.
"""

from __future__ import annotations

import struct
from typing import Tuple

import numpy as np

from .errors import PcnError
from .kernels.common import TAG_NAMES
from .model import ACTIVATIONS, GenerativeStack, ModelConfig

MAGIC = b"PCN1"
FORMAT_VERSION = 1


class CheckpointError(PcnError):
    """Base class for unreadable checkpoints (CLI exit code 1)."""


class BadMagicError(CheckpointError):
    pass


class VersionMismatchError(CheckpointError):
    pass


class TruncatedCheckpointError(CheckpointError):
    pass


class ShapeContradictionError(CheckpointError):
    pass


def save(stack: GenerativeStack, config: ModelConfig, path) -> None:
    """Write the stack; identical inputs produce byte-identical files."""
    L = stack.num_layers
    expected = [(config.dims[l], config.dims[l + 1]) for l in range(config.num_layers)]
    expected.append((config.output_dim, config.dims[-1]))
    actual = [w.shape for w in stack.weights] + [stack.readout.shape]
    if L != config.num_layers or actual != expected:
        raise ShapeContradictionError(
            f"stack shapes {actual} do not match config {expected}")
    parts = [MAGIC, struct.pack("<I", FORMAT_VERSION), struct.pack("<I", L)]
    parts += [struct.pack("<I", d) for d in config.dims]
    parts.append(struct.pack("<I", config.output_dim))
    parts += [struct.pack("<I", act.tag) for act in stack.activations]
    parts.append(struct.pack("<d", config.latent_init_scale))
    for w in stack.weights + [stack.readout]:
        parts.append(struct.pack("<II", w.shape[0], w.shape[1]))
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


class _Reader:
    def __init__(self, blob):
        self.blob = blob
        self.pos = 0

    def take(self, n, what):
        if self.pos + n > len(self.blob):
            raise TruncatedCheckpointError(
                f"file ends inside {what} (need {n} bytes at offset {self.pos}, "
                f"have {len(self.blob) - self.pos})")
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self, what):
        return struct.unpack("<I", self.take(4, what))[0]

    def f64(self, what):
        return struct.unpack("<d", self.take(8, what))[0]


def load(path) -> Tuple[GenerativeStack, ModelConfig]:
    """Reconstruct (stack, config); rejects malformed files with a
    distinct error per defect class."""
    with open(path, "rb") as fh:
        blob = fh.read()
    r = _Reader(blob)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    version = r.u32("format version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"format version {version}, this build reads {FORMAT_VERSION}")
    L = r.u32("layer count")
    if L < 1:
        raise ShapeContradictionError("layer count must be >= 1")
    dims = tuple(r.u32(f"dims[{i}]") for i in range(L + 1))
    output_dim = r.u32("output_dim")
    tags = [r.u32(f"activation tag {i}") for i in range(L)]
    for t in tags:
        if t not in TAG_NAMES:
            raise ShapeContradictionError(f"unknown activation tag {t}")
    scale = r.f64("latent_init_scale")
    names = [TAG_NAMES[t] for t in tags]
    config = ModelConfig(dims=dims, output_dim=output_dim,
                         activation=names if len(set(names)) > 1 else names[0],
                         latent_init_scale=scale)
    expected = [(dims[l], dims[l + 1]) for l in range(L)]
    expected.append((output_dim, dims[-1]))
    mats = []
    for idx, shape in enumerate(expected):
        what = "readout" if idx == L else f"W({idx})"
        rows = r.u32(f"{what} rows")
        cols = r.u32(f"{what} cols")
        if (rows, cols) != shape:
            raise ShapeContradictionError(
                f"{what} declares {rows}x{cols}, header implies {shape[0]}x{shape[1]}")
        raw = r.take(rows * cols * 8, f"{what} payload")
        mats.append(np.frombuffer(raw, dtype="<f8").reshape(rows, cols).copy())
    if r.pos != len(blob):
        raise TruncatedCheckpointError(
            f"{len(blob) - r.pos} trailing bytes after the last matrix")
    stack = GenerativeStack(mats[:L], mats[L], [ACTIVATIONS[n] for n in names])
    return stack, config
