"""On-disk embedding container (EMBV1) and sense-label files.

EMBV1 layout, bit-exact:

    magic   6 bytes   b"EMBV1\\n"
    hlen    4 bytes   little-endian uint32, byte length of the JSON header
    header  hlen      UTF-8 JSON: {"word","dim","count","dtype":"f32le","context_ids"}
    payload count*dim IEEE-754 float32, little-endian, row-major

Vectors are stored as float32; all downstream math promotes to float64.
Label files are JSONL with keys context_id, target, source, label.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .errors import (
    EmptyDatasetError,
    FormatError,
    TruncationError,
    ValidationError,
)

MAGIC = b"EMBV1\n"
RESERVED_LABEL = "other"


@dataclass
class EmbeddingSet:
    """All contextual embeddings of one target word, one row per context."""

    word: str
    context_ids: list[str]
    vectors: np.ndarray  # (count, dim) float32

    def __post_init__(self) -> None:
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2 or self.vectors.shape[0] < 1 or self.vectors.shape[1] < 1:
            raise ValidationError(
                f"vectors must be a non-empty 2-d matrix, got shape {self.vectors.shape}"
            )
        if len(self.context_ids) != self.vectors.shape[0]:
            raise ValidationError(
                f"{len(self.context_ids)} context_ids for {self.vectors.shape[0]} rows"
            )
        if len(set(self.context_ids)) != len(self.context_ids):
            raise ValidationError(f"duplicate context_ids in set for {self.word!r}")
        if not np.all(np.isfinite(self.vectors)):
            raise ValidationError(f"non-finite values in embedding set for {self.word!r}")

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass
class SenseLabeling:
    """Per-context sense labels from one source (auto-translation or a rater)."""

    target: str
    source: str
    entries: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for context_id, label in self.entries.items():
            if not label:
                raise ValidationError(f"empty label for context {context_id!r}")


@dataclass
class LabeledEmbeddingSet:
    """An embedding set with one sense label per retained row."""

    set: EmbeddingSet
    labels: list[str]

    def __post_init__(self) -> None:
        if len(self.labels) != self.set.count:
            raise ValidationError(
                f"{len(self.labels)} labels for {self.set.count} rows"
            )
        if any(not label for label in self.labels):
            raise ValidationError("labels must be non-empty")

    @property
    def distinct_labels(self) -> list[str]:
        return sorted(set(self.labels))


def write_embv1(emb: EmbeddingSet, sink: IO[bytes]) -> int:
    """Serialize to the EMBV1 layout; returns total bytes written."""
    if not np.all(np.isfinite(emb.vectors)):  # re-check: arrays are mutable
        raise ValidationError(f"non-finite values in embedding set for {emb.word!r}")
    header = json.dumps(
        {
            "word": emb.word,
            "dim": emb.dim,
            "count": emb.count,
            "dtype": "f32le",
            "context_ids": emb.context_ids,
        },
        ensure_ascii=False,
    ).encode("utf-8")
    payload = np.ascontiguousarray(emb.vectors, dtype="<f4").tobytes()
    sink.write(MAGIC)
    sink.write(struct.pack("<I", len(header)))
    sink.write(header)
    sink.write(payload)
    return len(MAGIC) + 4 + len(header) + len(payload)


def read_embv1(source: IO[bytes]) -> EmbeddingSet:
    """Parse an EMBV1 stream, validating magic, header, and payload size."""
    magic = source.read(len(MAGIC))
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    raw_len = source.read(4)
    if len(raw_len) != 4:
        raise TruncationError("stream ends inside header length")
    (header_len,) = struct.unpack("<I", raw_len)
    raw_header = source.read(header_len)
    if len(raw_header) != header_len:
        raise TruncationError("stream ends inside header")
    try:
        header = json.loads(raw_header.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"header is not valid JSON: {exc}") from exc

    for key in ("word", "dim", "count", "dtype", "context_ids"):
        if key not in header:
            raise FormatError(f"header missing key {key!r}")
    if header["dtype"] != "f32le":
        raise FormatError(f"unsupported dtype {header['dtype']!r}")
    count, dim = int(header["count"]), int(header["dim"])
    if count < 1 or dim < 1:
        raise FormatError(f"bad dimensions count={count} dim={dim}")
    if len(header["context_ids"]) != count:
        raise FormatError(
            f"{len(header['context_ids'])} context_ids but count={count}"
        )

    expected = 4 * count * dim
    payload = source.read(expected)
    if len(payload) != expected:
        raise TruncationError(
            f"payload has {len(payload)} bytes, declared count*dim needs {expected}"
        )
    if source.read(1):
        raise FormatError("trailing bytes after declared payload")
    vectors = np.frombuffer(payload, dtype="<f4").reshape(count, dim)
    if not np.all(np.isfinite(vectors)):
        raise ValidationError(f"non-finite values in payload for {header['word']!r}")
    return EmbeddingSet(
        word=header["word"],
        context_ids=[str(c) for c in header["context_ids"]],
        vectors=vectors.copy(),
    )


def write_embv1_file(emb: EmbeddingSet, path) -> int:
    with open(path, "wb") as sink:
        return write_embv1(emb, sink)


def read_embv1_file(path) -> EmbeddingSet:
    with open(path, "rb") as source:
        return read_embv1(source)


def attach_labels(emb: EmbeddingSet, labeling: SenseLabeling) -> LabeledEmbeddingSet:
    """Keep rows whose context_id is labeled; drop the rest, order preserved."""
    keep = [i for i, cid in enumerate(emb.context_ids) if cid in labeling.entries]
    if not keep:
        raise EmptyDatasetError(
            f"no context_ids shared between embeddings of {emb.word!r} "
            f"and labels from {labeling.source!r}"
        )
    subset = EmbeddingSet(
        word=emb.word,
        context_ids=[emb.context_ids[i] for i in keep],
        vectors=emb.vectors[keep],
    )
    labels = [labeling.entries[emb.context_ids[i]] for i in keep]
    return LabeledEmbeddingSet(subset, labels)


def write_labels_jsonl(labeling: SenseLabeling, sink: IO[str]) -> int:
    count = 0
    for context_id, label in labeling.entries.items():
        row = {
            "context_id": context_id,
            "target": labeling.target,
            "source": labeling.source,
            "label": label,
        }
        sink.write(json.dumps(row, ensure_ascii=False))
        sink.write("\n")
        count += 1
    return count


def read_labels_jsonl(source: IO[str]) -> SenseLabeling:
    """Read one label file; target and source must be uniform within it."""
    target: str | None = None
    label_source: str | None = None
    entries: dict[str, str] = {}
    for line_no, line in enumerate(source, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            row = json.loads(line)
            context_id, label = row["context_id"], row["label"]
            row_target, row_source = row["target"], row["source"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValidationError(f"labels line {line_no}: {exc}") from exc
        if target is None:
            target, label_source = row_target, row_source
        elif (row_target, row_source) != (target, label_source):
            raise ValidationError(
                f"labels line {line_no}: mixed target/source in one file"
            )
        if context_id in entries:
            raise ValidationError(f"labels line {line_no}: duplicate {context_id!r}")
        entries[context_id] = label
    if target is None:
        raise EmptyDatasetError("label file has no rows")
    return SenseLabeling(target=target, source=label_source, entries=entries)


def read_labels_file(path) -> SenseLabeling:
    with open(path, "r", encoding="utf-8") as source:
        return read_labels_jsonl(source)


def write_labels_file(labeling: SenseLabeling, path) -> int:
    with open(path, "w", encoding="utf-8", newline="\n") as sink:
        return write_labels_jsonl(labeling, sink)


def iter_label_rows(labelings: Iterable[SenseLabeling]):
    for labeling in labelings:
        for context_id, label in labeling.entries.items():
            yield labeling.source, context_id, label
