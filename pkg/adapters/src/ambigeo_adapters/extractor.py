"""Final-layer contextual-embedding extraction for target occurrences.

Each context window is tokenized with character offsets; the subtokens
covering the seeding occurrence (located via the window's byte offset) are
pooled from the model's final hidden layer.  Output is one EMBV1 file per
target word with rows in input-window order, regardless of batch size.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from ambigeo.corpus import ContextWindow, read_windows_jsonl
from ambigeo.embedstore import EmbeddingSet, write_embv1_file

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"\S+")

POOLING_MODES = ("mean", "first")


@dataclass(frozen=True)
class ExtractorConfig:
    model: str = "bert-large-uncased"
    layer: str = "final"
    pooling: str = "mean"
    batch_size: int = 8
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.layer != "final":
            raise ValueError(f"only the final layer is supported, got {self.layer!r}")
        if self.pooling not in POOLING_MODES:
            raise ValueError(f"pooling must be one of {POOLING_MODES}, got {self.pooling!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


@dataclass
class ExtractionReport:
    files: dict[str, Path] = field(default_factory=dict)
    rows: dict[str, int] = field(default_factory=dict)
    skipped: list[tuple[str, str]] = field(default_factory=list)
    truncated: list[str] = field(default_factory=list)


@dataclass
class _Prepared:
    window: ContextWindow
    input_ids: list[int]
    target_positions: list[int]
    truncated: bool = False


def _target_char_span(window: ContextWindow) -> tuple[int, int]:
    """Char span of the seeding occurrence, converted from the byte offset."""
    raw = window.text.encode("utf-8")
    char_start = len(raw[: window.target_char_offset].decode("utf-8"))
    match = _TOKEN_RE.match(window.text, char_start)
    if match is None:
        raise ValueError(f"{window.context_id}: no token at target offset")
    return char_start, match.end()


def _edge_special_counts(mask: list[int]) -> tuple[int, int]:
    leading = 0
    while leading < len(mask) and mask[leading]:
        leading += 1
    trailing = 0
    while trailing < len(mask) - leading and mask[-1 - trailing]:
        trailing += 1
    return leading, trailing


def _prepare(window: ContextWindow, tokenizer, max_length: int) -> _Prepared | None:
    """Tokenize one window and locate the target subtokens; None if unalignable."""
    char_start, char_end = _target_char_span(window)
    encoding = tokenizer(
        window.text,
        return_offsets_mapping=True,
        return_special_tokens_mask=True,
        truncation=False,
    )
    ids = list(encoding["input_ids"])
    offsets = encoding["offset_mapping"]
    specials = list(encoding["special_tokens_mask"])

    positions = [
        i
        for i, (start, end) in enumerate(offsets)
        if not specials[i] and start < char_end and end > char_start
    ]
    if not positions:
        return None

    truncated = len(ids) > max_length
    if truncated:
        ids, positions = _truncate_around_target(ids, specials, positions, max_length)
        if not positions:  # target fell outside the kept span
            return None
    return _Prepared(
        window=window, input_ids=ids, target_positions=positions, truncated=truncated
    )


def _truncate_around_target(
    ids: list[int], specials: list[int], positions: list[int], max_length: int
) -> tuple[list[int], list[int]]:
    """Keep a max_length window of content tokens centred on the target."""
    leading, trailing = _edge_special_counts(specials)
    content = ids[leading : len(ids) - trailing]
    budget = max_length - leading - trailing
    centre = (positions[0] + positions[-1]) // 2 - leading
    start = min(max(0, centre - budget // 2), len(content) - budget)
    kept = content[start : start + budget]
    new_ids = ids[:leading] + kept + ids[len(ids) - trailing :]
    new_positions = [p - start for p in positions if 0 <= p - leading - start < budget]
    return new_ids, new_positions


def _run_batch(prepared: list[_Prepared], model, pad_id: int, device: str, pooling: str):
    width = max(len(p.input_ids) for p in prepared)
    input_ids = torch.full((len(prepared), width), pad_id, dtype=torch.long)
    attention = torch.zeros((len(prepared), width), dtype=torch.long)
    for row, item in enumerate(prepared):
        input_ids[row, : len(item.input_ids)] = torch.tensor(item.input_ids)
        attention[row, : len(item.input_ids)] = 1
    with torch.no_grad():
        output = model(
            input_ids=input_ids.to(device), attention_mask=attention.to(device)
        )
    hidden = output.last_hidden_state.cpu()
    vectors = []
    for row, item in enumerate(prepared):
        states = hidden[row, item.target_positions]
        pooled = states[0] if pooling == "first" else states.mean(dim=0)
        vectors.append(pooled.numpy().astype(np.float32))
    return vectors


def load_model(config: ExtractorConfig):
    from transformers import AutoModel, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(config.model)
    model = AutoModel.from_pretrained(config.model)
    model.eval()
    model.to(config.device)
    return tokenizer, model


def extract_embeddings(
    windows_path, out_dir, config: ExtractorConfig = ExtractorConfig()
) -> ExtractionReport:
    """Run all windows through the model; write one EMBV1 file per word."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tokenizer, model = load_model(config)
    max_length = int(
        min(
            getattr(tokenizer, "model_max_length", 1 << 30) or (1 << 30),
            getattr(model.config, "max_position_embeddings", 1 << 30),
        )
    )

    report = ExtractionReport()
    per_word_ids: dict[str, list[str]] = {}
    per_word_vectors: dict[str, list[np.ndarray]] = {}

    with open(windows_path, "r", encoding="utf-8") as source:
        windows = list(read_windows_jsonl(source))

    batch: list[_Prepared] = []

    def flush():
        if not batch:
            return
        vectors = _run_batch(
            batch, model, tokenizer.pad_token_id or 0, config.device, config.pooling
        )
        for item, vector in zip(batch, vectors):
            word = item.window.target
            per_word_ids.setdefault(word, []).append(item.window.context_id)
            per_word_vectors.setdefault(word, []).append(vector)
        batch.clear()

    for window in windows:
        try:
            prepared = _prepare(window, tokenizer, max_length)
        except ValueError as exc:
            log.warning("skipping %s: %s", window.context_id, exc)
            report.skipped.append((window.context_id, str(exc)))
            continue
        if prepared is None:
            log.warning("skipping %s: target not alignable to subtokens", window.context_id)
            report.skipped.append((window.context_id, "target not alignable to subtokens"))
            continue
        if prepared.truncated:
            report.truncated.append(window.context_id)
            log.warning("truncated %s to %d tokens", window.context_id, max_length)
        batch.append(prepared)
        if len(batch) >= config.batch_size:
            flush()
    flush()

    for word, ids in per_word_ids.items():
        emb = EmbeddingSet(
            word=word, context_ids=ids, vectors=np.vstack(per_word_vectors[word])
        )
        path = out_dir / f"{word}.emb"
        write_embv1_file(emb, path)
        report.files[word] = path
        report.rows[word] = emb.count
    return report
