"""Binary container formats for corpora and model checkpoints.

Corpus file: 8-byte magic, u32 version, u64 item count, u64 record count,
then one length-prefixed sorted id list per record (u32 length, u32 ids).
The vocabulary travels in a text sidecar, one ``token<TAB>count`` line per
id.

Checkpoint file: 8-byte magic, u32 version, a model-kind tag, the shape
header, all parameter tensors as little-endian float64 in row-major order,
and a trailing CRC32 over everything after the magic. Loading verifies
magic, version and checksum and rejects mismatches.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .corpus import Corpus, Vocabulary
from .scoring import BiasParams, DemParams, LblParams

CORPUS_MAGIC = b"COOCORP1"
CHECKPOINT_MAGIC = b"COOCCKP1"
FORMAT_VERSION = 1

_KIND_CODES = {"l1": 1, "fvbm": 2, "lbl": 3, "dem": 4}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}


class FormatError(ValueError):
    """File does not match the expected container layout."""


def save_corpus(corpus: Corpus, path) -> None:
    path = Path(path)
    with open(path, "wb") as f:
        f.write(CORPUS_MAGIC)
        f.write(struct.pack("<IQQ", FORMAT_VERSION, corpus.n_items, len(corpus)))
        for rec in corpus.records:
            f.write(struct.pack("<I", rec.size))
            f.write(rec.astype("<u4").tobytes())
    if corpus.vocabulary is not None:
        save_vocabulary(corpus.vocabulary, vocabulary_path(path))


def load_corpus(path) -> Corpus:
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != CORPUS_MAGIC:
            raise FormatError(f"{path}: not a corpus file (bad magic)")
        version, n_items, n_records = struct.unpack("<IQQ", f.read(20))
        if version != FORMAT_VERSION:
            raise FormatError(f"{path}: unsupported corpus version {version}")
        records = []
        for _ in range(n_records):
            (size,) = struct.unpack("<I", f.read(4))
            ids = np.frombuffer(f.read(4 * size), dtype="<u4").astype(np.int64)
            records.append(ids)
    vocab = None
    sidecar = vocabulary_path(path)
    if sidecar.exists():
        vocab = load_vocabulary(sidecar)
        if len(vocab) != n_items:
            raise FormatError(f"{sidecar}: vocabulary size mismatches corpus")
    return Corpus(n_items, records, vocab)


def vocabulary_path(corpus_path) -> Path:
    return Path(str(corpus_path) + ".vocab.tsv")


def save_vocabulary(vocab: Vocabulary, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for tok, count in zip(vocab.id_to_token, vocab.occurrence_count):
            f.write(f"{tok}\t{int(count)}\n")


def load_vocabulary(path) -> Vocabulary:
    tokens: list[str] = []
    counts: list[int] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            tok, count = line.split("\t")
            tokens.append(tok)
            counts.append(int(count))
    return Vocabulary(
        {t: i for i, t in enumerate(tokens)}, tokens, np.array(counts, dtype=np.int64)
    )


def _tensor_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def save_checkpoint(params, path, kind: str | None = None) -> None:
    """Write model parameters with a self-describing header and checksum.

    ``kind`` tags zero-layer deep models that were trained as pairwise
    models; it defaults to the natural kind of the parameter type.
    """
    if isinstance(params, BiasParams):
        kind = kind or "l1"
        body = [struct.pack("<Q", params.n_items), _tensor_bytes(params.bias)]
    elif isinstance(params, LblParams):
        kind = kind or "lbl"
        body = [
            struct.pack("<QIB", params.n_items, params.dim, int(params.use_bias)),
            _tensor_bytes(params.bias),
            _tensor_bytes(params.embed),
        ]
    elif isinstance(params, DemParams):
        kind = kind or ("dem" if params.layer_weights else "fvbm")
        sizes = params.layer_sizes
        body = [struct.pack("<QI", params.n_items, len(sizes))]
        body.append(struct.pack(f"<{len(sizes)}I", *sizes) if sizes else b"")
        body.append(_tensor_bytes(params.bias))
        body.append(_tensor_bytes(params.pair_readout))
        for W, B, R in zip(params.layer_weights, params.layer_biases, params.readouts):
            body.extend([_tensor_bytes(W), _tensor_bytes(B), _tensor_bytes(R)])
    else:
        raise TypeError(f"unsupported parameter type {type(params).__name__}")
    if kind not in _KIND_CODES:
        raise ValueError(f"unknown model kind {kind!r}")

    payload = struct.pack("<IB", FORMAT_VERSION, _KIND_CODES[kind]) + b"".join(body)
    checksum = zlib.crc32(payload) & 0xFFFFFFFF
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(payload)
        f.write(struct.pack("<I", checksum))


def load_checkpoint(path):
    """Read a checkpoint back; returns ``(kind, params)``."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 17 or raw[:8] != CHECKPOINT_MAGIC:
        raise FormatError(f"{path}: not a checkpoint file (bad magic)")
    payload, (stored,) = raw[8:-4], struct.unpack("<I", raw[-4:])
    if zlib.crc32(payload) & 0xFFFFFFFF != stored:
        raise FormatError(f"{path}: checksum mismatch, file corrupted")
    version, code = struct.unpack_from("<IB", payload, 0)
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {version}")
    kind = _KIND_NAMES.get(code)
    if kind is None:
        raise FormatError(f"{path}: unknown model kind code {code}")
    off = 5

    def take(n_bytes):
        nonlocal off
        chunk = payload[off : off + n_bytes]
        if len(chunk) != n_bytes:
            raise FormatError(f"{path}: truncated checkpoint")
        off += n_bytes
        return chunk

    def tensor(*shape):
        n = int(np.prod(shape)) if shape else 1
        return (
            np.frombuffer(take(8 * n), dtype="<f8").astype(np.float64).reshape(shape)
        )

    if kind == "l1":
        (n,) = struct.unpack("<Q", take(8))
        params = BiasParams(bias=tensor(n))
    elif kind == "lbl":
        n, dim, use_bias = struct.unpack("<QIB", take(13))
        params = LblParams(bias=tensor(n), embed=tensor(n, dim), use_bias=bool(use_bias))
    else:
        n, k = struct.unpack("<QI", take(12))
        sizes = struct.unpack(f"<{k}I", take(4 * k)) if k else ()
        bias = tensor(n)
        pair_readout = tensor(n, n)
        weights, biases, readouts = [], [], []
        prev = n
        for width in sizes:
            weights.append(tensor(width, prev))
            biases.append(tensor(width))
            readouts.append(tensor(n, width))
            prev = width
        params = DemParams(
            bias=bias,
            pair_readout=pair_readout,
            layer_weights=weights,
            layer_biases=biases,
            readouts=readouts,
        )
    if off != len(payload):
        raise FormatError(f"{path}: trailing bytes in checkpoint")
    return kind, params


def export_embeddings(params: DemParams, path, tokens=None) -> None:
    """Write per-item semantic vectors as TSV: token, then the item's
    readout rows concatenated across layers, full precision."""
    if not isinstance(params, DemParams) or not params.readouts:
        raise ValueError("embedding export needs a deep model with hidden layers")
    table = np.concatenate(params.readouts, axis=1)
    if tokens is None:
        tokens = [str(i) for i in range(params.n_items)]
    if len(tokens) != params.n_items:
        raise ValueError("token list length mismatches item count")
    with open(path, "w", encoding="utf-8") as f:
        for tok, row in zip(tokens, table):
            values = "\t".join(repr(float(v)) for v in row)
            f.write(f"{tok}\t{values}\n")
