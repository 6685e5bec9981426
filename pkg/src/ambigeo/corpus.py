"""Sentence segmentation, target-word lookup, and context-window building.

Context windows grow symmetrically, one sentence on each side per step,
for as long as that brings the total word count strictly closer to the
target size (100 words by default).  Sentences stay intact so windows keep
natural linguistic structure.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

from .errors import ValidationError

# Only '.' can be an abbreviation dot; '!' and '?' always end a token.
_ABBREVIATIONS = frozenset({"mr.", "dr.", "e.g.", "i.e.", "etc."})

_TOKEN_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class Sentence:
    """One sentence; word_count is the number of whitespace-separated tokens."""

    text: str

    @property
    def word_count(self) -> int:
        return len(self.text.split())


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[Sentence, ...]

    def __post_init__(self) -> None:
        if not self.sentences:
            raise ValidationError(f"document {self.doc_id!r} has no sentences")


@dataclass(frozen=True)
class Occurrence:
    """A single token position matching a target word."""

    doc_id: str
    sentence_index: int
    token_index: int
    surface_form: str


@dataclass(frozen=True)
class ContextWindow:
    """A run of consecutive sentences around one target occurrence."""

    context_id: str
    target: str
    doc_id: str
    sentence_span: tuple[int, int]
    text: str
    word_count: int
    target_char_offset: int  # byte offset into UTF-8 encoded text


def _strip_token(token: str) -> str:
    """Case-fold and strip leading/trailing punctuation (Unicode P*)."""
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end].casefold()


def _is_abbreviation(text: str, dot_index: int) -> bool:
    start = dot_index
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start : dot_index + 1].casefold() in _ABBREVIATIONS


def segment_sentences(raw_text: str) -> list[Sentence]:
    """Split text into sentences with a light terminal-punctuation heuristic.

    A boundary is placed after '.', '!' or '?' when followed by whitespace
    and an uppercase letter, or by end of text.  Dots ending a known
    abbreviation (Mr., Dr., e.g., i.e., etc.) never split.  Any trailing
    text without terminal punctuation becomes a final sentence, so the
    sentence texts always reconstruct the input up to inter-sentence
    whitespace.
    """
    sentences: list[Sentence] = []
    n = len(raw_text)
    start = 0
    i = 0
    while i < n:
        ch = raw_text[i]
        if ch in ".!?" and not (ch == "." and _is_abbreviation(raw_text, i)):
            j = i + 1
            while j < n and raw_text[j].isspace():
                j += 1
            if j >= n or (j > i + 1 and raw_text[j].isupper()):
                chunk = raw_text[start : i + 1].strip()
                if chunk:
                    sentences.append(Sentence(chunk))
                start = i + 1
                i = j
                continue
        i += 1
    tail = raw_text[start:].strip()
    if tail:
        sentences.append(Sentence(tail))
    return sentences


def document_from_text(doc_id: str, raw_text: str) -> Document:
    return Document(doc_id, tuple(segment_sentences(raw_text)))


def document_from_lines(doc_id: str, lines: Iterable[str]) -> Document:
    """Build a document from pre-segmented input, one sentence per line."""
    sentences = tuple(Sentence(line.strip()) for line in lines if line.strip())
    return Document(doc_id, sentences)


def find_occurrences(doc: Document, target: str) -> list[Occurrence]:
    """Every token whose case-folded, punctuation-stripped form equals target.

    Exact word-form matching only: inflected forms do not match.
    """
    if len(target.split()) != 1:
        raise ValidationError(f"target must be a single word form, got {target!r}")
    wanted = _strip_token(target)
    if not wanted:
        raise ValidationError(f"target {target!r} is empty after normalisation")
    found = []
    for s_idx, sentence in enumerate(doc.sentences):
        for t_idx, token in enumerate(sentence.text.split()):
            if _strip_token(token) == wanted:
                found.append(Occurrence(doc.doc_id, s_idx, t_idx, token))
    return found


def build_window(doc: Document, occ: Occurrence, target_size: int = 100) -> ContextWindow:
    """Expand around the occurrence sentence until no broader span is closer.

    Each expansion step adds one sentence before and one after (edges
    clamp to whichever sides exist); the broader span is adopted only when
    its word count is strictly closer to ``target_size``, so ties keep the
    smaller window.
    """
    if target_size < 1:
        raise ValidationError("target_size must be positive")
    _check_occurrence(doc, occ)
    lengths = [s.word_count for s in doc.sentences]
    last = len(lengths) - 1

    start = end = occ.sentence_index
    current_len = lengths[start]
    while True:
        b_start = max(0, start - 1)
        b_end = min(last, end + 1)
        if (b_start, b_end) == (start, end):
            break
        broader_len = current_len
        if b_start < start:
            broader_len += lengths[b_start]
        if b_end > end:
            broader_len += lengths[b_end]
        if abs(broader_len - target_size) < abs(current_len - target_size):
            start, end, current_len = b_start, b_end, broader_len
        else:
            break

    target = _strip_token(occ.surface_form)
    ordinal = _occurrence_ordinal(doc, occ, target)
    text = " ".join(doc.sentences[i].text for i in range(start, end + 1))
    char_offset = _char_offset_in_span(doc, start, occ)
    byte_offset = len(text[:char_offset].encode("utf-8"))
    return ContextWindow(
        context_id=f"{doc.doc_id}#{ordinal}",
        target=target,
        doc_id=doc.doc_id,
        sentence_span=(start, end),
        text=text,
        word_count=sum(lengths[start : end + 1]),
        target_char_offset=byte_offset,
    )


def build_windows(doc: Document, target: str, target_size: int = 100) -> list[ContextWindow]:
    """One window per occurrence of target in doc, in document order."""
    return [build_window(doc, occ, target_size) for occ in find_occurrences(doc, target)]


def _check_occurrence(doc: Document, occ: Occurrence) -> None:
    if occ.doc_id != doc.doc_id:
        raise ValidationError(f"occurrence doc {occ.doc_id!r} is not {doc.doc_id!r}")
    if not 0 <= occ.sentence_index < len(doc.sentences):
        raise ValidationError(f"sentence index {occ.sentence_index} out of range")
    tokens = doc.sentences[occ.sentence_index].text.split()
    if not 0 <= occ.token_index < len(tokens):
        raise ValidationError(f"token index {occ.token_index} out of range")
    if tokens[occ.token_index] != occ.surface_form:
        raise ValidationError(
            f"token at {occ.sentence_index}:{occ.token_index} is "
            f"{tokens[occ.token_index]!r}, not {occ.surface_form!r}"
        )


def _occurrence_ordinal(doc: Document, occ: Occurrence, target: str) -> int:
    for ordinal, candidate in enumerate(find_occurrences(doc, target)):
        if (candidate.sentence_index, candidate.token_index) == (
            occ.sentence_index,
            occ.token_index,
        ):
            return ordinal
    raise ValidationError(f"occurrence {occ} not found for target {target!r}")


def _char_offset_in_span(doc: Document, span_start: int, occ: Occurrence) -> int:
    # Sentences are joined with a single space; account for it per sentence.
    offset = sum(
        len(doc.sentences[i].text) + 1 for i in range(span_start, occ.sentence_index)
    )
    matches = list(_TOKEN_RE.finditer(doc.sentences[occ.sentence_index].text))
    return offset + matches[occ.token_index].start()


def window_to_dict(window: ContextWindow) -> dict:
    return {
        "context_id": window.context_id,
        "target": window.target,
        "doc_id": window.doc_id,
        "sentence_span": list(window.sentence_span),
        "text": window.text,
        "word_count": window.word_count,
        "target_char_offset": window.target_char_offset,
    }


def window_from_dict(record: dict) -> ContextWindow:
    try:
        span = record["sentence_span"]
        return ContextWindow(
            context_id=record["context_id"],
            target=record["target"],
            doc_id=record["doc_id"],
            sentence_span=(int(span[0]), int(span[1])),
            text=record["text"],
            word_count=int(record["word_count"]),
            target_char_offset=int(record["target_char_offset"]),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"malformed window record: {exc}") from exc


def write_windows_jsonl(windows: Iterable[ContextWindow], sink: IO[str]) -> int:
    """Write windows as JSONL (UTF-8 text sink, LF endings); returns row count."""
    count = 0
    for window in windows:
        sink.write(json.dumps(window_to_dict(window), ensure_ascii=False))
        sink.write("\n")
        count += 1
    return count


def read_windows_jsonl(source: IO[str]) -> Iterator[ContextWindow]:
    for line_no, line in enumerate(source, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"windows line {line_no}: invalid JSON") from exc
        yield window_from_dict(record)
