"""Translation-based auto sense labels for context windows.

The label for an occurrence is the translation of the target word in its
sentence.  Online backends translate the sentence and the label is aligned
through a per-word lexicon of candidate translations; the offline cassette
backend short-circuits all of that and replays labels keyed by context_id,
so runs are deterministic and network-free.
"""

from __future__ import annotations

import json
import logging
import re
import time
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from ambigeo.corpus import ContextWindow, read_windows_jsonl, segment_sentences
from ambigeo.embedstore import RESERVED_LABEL, SenseLabeling, write_labels_file

log = logging.getLogger(__name__)

AUTO_SOURCE = "auto-translation"

_TOKEN_RE = re.compile(r"\S+")


class TranslationBackend(Protocol):
    def translate(self, text: str, target_language: str) -> str: ...


class CassetteBackend:
    """Replayable fixture: labels come straight from a JSON file.

    Cassette format: {"labels": {context_id: label, ...}}.  Contexts absent
    from the cassette are treated like failed translations (left
    unlabeled).
    """

    def __init__(self, path):
        with open(path, "r", encoding="utf-8") as source:
            data = json.load(source)
        self.labels: dict[str, str] = dict(data["labels"])

    def label_for(self, context_id: str) -> str | None:
        return self.labels.get(context_id)


class DeepTranslatorBackend:
    """Online sentence translation via the deep-translator package."""

    def __init__(self):
        try:
            from deep_translator import GoogleTranslator
        except ImportError as exc:  # pragma: no cover - depends on environment
            raise RuntimeError(
                "deep-translator is not installed; use --stub for offline runs"
            ) from exc
        self._factory = GoogleTranslator

    def translate(self, text: str, target_language: str) -> str:  # pragma: no cover
        return self._factory(source="auto", target=target_language).translate(text)


@dataclass
class TranslationReport:
    files: dict[str, Path] = field(default_factory=dict)
    labeled: int = 0
    unlabeled: list[str] = field(default_factory=list)


def _strip(token: str) -> str:
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end].casefold()


def _sentence_of_target(window: ContextWindow) -> str:
    """The sentence inside the window text that contains the occurrence."""
    raw = window.text.encode("utf-8")
    char_offset = len(raw[: window.target_char_offset].decode("utf-8"))
    position = 0
    for sentence in segment_sentences(window.text):
        found = window.text.find(sentence.text, position)
        if found <= char_offset < found + len(sentence.text):
            return sentence.text
        position = found + len(sentence.text)
    return window.text


def align_label(translated_sentence: str, candidates: set[str]) -> str:
    """First candidate translation found in the sentence, else 'other'."""
    wanted = {c.casefold() for c in candidates}
    for match in _TOKEN_RE.finditer(translated_sentence):
        token = _strip(match.group())
        if token in wanted:
            return token
    return RESERVED_LABEL


def _translate_with_retry(
    backend: TranslationBackend,
    text: str,
    language: str,
    attempts: int = 3,
    base_delay: float = 0.2,
) -> str | None:
    for attempt in range(attempts):
        try:
            return backend.translate(text, language)
        except Exception as exc:
            log.warning("translation attempt %d failed: %s", attempt + 1, exc)
            if attempt + 1 < attempts:
                time.sleep(min(base_delay * 2**attempt, 2.0))
    return None


def translate_contexts(
    windows_path,
    out_dir,
    target_language: str,
    backend,
    lexicon: dict[str, set[str]] | None = None,
) -> TranslationReport:
    """Label every window; one label JSONL file per target word.

    ``backend`` is either a CassetteBackend (labels by context_id) or a
    sentence-translation backend, in which case ``lexicon`` maps each
    target word to its candidate translations for alignment.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(windows_path, "r", encoding="utf-8") as source:
        windows = list(read_windows_jsonl(source))

    report = TranslationReport()
    per_word: dict[str, dict[str, str]] = {}
    for window in windows:
        label = _label_window(window, target_language, backend, lexicon)
        if label is None:
            report.unlabeled.append(window.context_id)
            continue
        per_word.setdefault(window.target, {})[window.context_id] = label
        report.labeled += 1

    for word, entries in per_word.items():
        labeling = SenseLabeling(target=word, source=AUTO_SOURCE, entries=entries)
        path = out_dir / f"{word}.labels.jsonl"
        write_labels_file(labeling, path)
        report.files[word] = path
    return report


def _label_window(
    window: ContextWindow,
    language: str,
    backend,
    lexicon: dict[str, set[str]] | None,
) -> str | None:
    if isinstance(backend, CassetteBackend):
        label = backend.label_for(window.context_id)
        if label is None:
            log.warning("no cassette entry for %s; leaving unlabeled", window.context_id)
        return label

    sentence = _sentence_of_target(window)
    translated = _translate_with_retry(backend, sentence, language)
    if translated is None:
        return None
    candidates = (lexicon or {}).get(window.target, set())
    return align_label(translated, candidates)
