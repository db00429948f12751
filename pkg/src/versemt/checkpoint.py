"""Binary checkpoint format.

Layout (all integers little-endian)::

    magic       8 bytes   b"VERSEMT\\0"
    version     u32
    src_vocab   u32       tgt_vocab u32   embed_dim u32   hidden_dim u32
    attention   u8
    specials    4 x u32   (PAD, UNK, BOS, EOS)
    step        u64
    arrays      float64, row-major, in seq2seq.PARAM_NAMES order
    src tokens  u32 byte length + UTF-8, one token per line
    tgt tokens  u32 byte length + UTF-8, one token per line
    crc32       u32 over every preceding byte

The array block size is fixed by the header, which lets a short file be
reported as truncated before the checksum is looked at.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import (CheckpointChecksumError, CheckpointError, CheckpointTruncatedError,
                     CheckpointVersionError)
from .seq2seq import PARAM_NAMES, ModelDims, ModelParams
from .vocab import BOS, EOS, PAD, UNK, Vocabulary

MAGIC = b"VERSEMT\0"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sI4IB4IQ")


def to_bytes(params: ModelParams, src_vocab: Vocabulary, tgt_vocab: Vocabulary,
             step: int = 0) -> bytes:
    dims = params.dims
    if len(src_vocab) != dims.src_vocab or len(tgt_vocab) != dims.tgt_vocab:
        raise CheckpointError("vocabulary sizes do not match the parameter shapes")
    parts = [_HEADER.pack(MAGIC, FORMAT_VERSION, dims.src_vocab, dims.tgt_vocab,
                          dims.embed_dim, dims.hidden_dim, int(dims.attention),
                          PAD, UNK, BOS, EOS, step)]
    for name in PARAM_NAMES:
        parts.append(np.ascontiguousarray(getattr(params, name), dtype="<f8").tobytes())
    for v in (src_vocab, tgt_vocab):
        blob = "".join(t + "\n" for t in v.tokens).encode("utf-8")
        parts.append(struct.pack("<I", len(blob)))
        parts.append(blob)
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def from_bytes(data: bytes):
    """Return ``(params, src_vocab, tgt_vocab, step)``."""
    if len(data) < _HEADER.size:
        raise CheckpointTruncatedError(f"checkpoint is {len(data)} bytes, shorter than its header")
    (magic, version, sv, tv, emb, hid, att, *specials, step) = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError("not a versemt checkpoint")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint format version {version}, this build reads {FORMAT_VERSION}")
    if tuple(specials) != (PAD, UNK, BOS, EOS):
        raise CheckpointError(f"unexpected special-token indices {specials}")
    try:
        dims = ModelDims(sv, tv, emb, hid, bool(att))
    except ValueError as exc:
        raise CheckpointError(str(exc)) from None
    shapes = dims.shapes()
    array_bytes = 8 * sum(int(np.prod(s)) for s in shapes.values())
    if len(data) < _HEADER.size + array_bytes + 4 + 4 + 4:
        raise CheckpointTruncatedError("checkpoint ends inside the parameter block")
    pos = _HEADER.size
    arrays = {}
    for name in PARAM_NAMES:
        size = int(np.prod(shapes[name]))
        arrays[name] = np.frombuffer(data, "<f8", size, pos).astype(np.float64).reshape(shapes[name])
        pos += 8 * size
    vocabs = []
    for _ in range(2):
        if pos + 4 > len(data):
            raise CheckpointTruncatedError("checkpoint ends inside the vocabulary block")
        (n,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if pos + n > len(data):
            raise CheckpointTruncatedError("checkpoint ends inside the vocabulary block")
        vocabs.append(data[pos:pos + n])
        pos += n
    if pos + 4 > len(data):
        raise CheckpointTruncatedError("checkpoint is missing its checksum")
    if pos + 4 < len(data):
        raise CheckpointError("trailing bytes after checksum")
    (crc,) = struct.unpack_from("<I", data, pos)
    if crc != zlib.crc32(data[:pos]):
        raise CheckpointChecksumError("checkpoint checksum mismatch")
    src_vocab, tgt_vocab = (Vocabulary(b.decode("utf-8").splitlines()) for b in vocabs)
    if len(src_vocab) != sv or len(tgt_vocab) != tv:
        raise CheckpointError("vocabulary block does not match header sizes")
    return ModelParams(**arrays, attention=dims.attention), src_vocab, tgt_vocab, step


def save_checkpoint(params, src_vocab, tgt_vocab, step, path) -> None:
    Path(path).write_bytes(to_bytes(params, src_vocab, tgt_vocab, step))


def load_checkpoint(path):
    return from_bytes(Path(path).read_bytes())
