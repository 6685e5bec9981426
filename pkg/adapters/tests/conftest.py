"""Shared fixtures: a tiny local BERT-style model and window files.

The model follows the reference architecture family (uncased WordPiece,
1024-d final layer) but with two layers, a toy vocabulary, and random
seeded weights, so extraction runs offline in seconds.
"""

import os

import pytest
import torch

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_VERBOSITY", "error")

from ambigeo import corpus

WORDS = [
    "the", "a", "dog", "dogs", "bark", "tree", "river", "##bank", "was",
    "rough", "loud", "at", "night", "in", "park", "old", "covered", "with",
    "moss", "it", "and", "to", "of", "we", "heard", "stood", "tall", "again",
    "then", "fell", "quiet", ".", ",",
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
]
SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
HIDDEN_SIZE = 1024
MAX_POSITIONS = 64


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    from tokenizers import Tokenizer
    from tokenizers.models import WordPiece
    from tokenizers.normalizers import BertNormalizer
    from tokenizers.pre_tokenizers import BertPreTokenizer
    from tokenizers.processors import TemplateProcessing
    from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

    vocab = {token: i for i, token in enumerate(SPECIALS + WORDS)}
    backend = Tokenizer(WordPiece(vocab, unk_token="[UNK]"))
    backend.normalizer = BertNormalizer(lowercase=True)
    backend.pre_tokenizer = BertPreTokenizer()
    backend.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
        model_max_length=MAX_POSITIONS,
    )

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=HIDDEN_SIZE,
        num_hidden_layers=2,
        num_attention_heads=8,
        intermediate_size=256,
        max_position_embeddings=MAX_POSITIONS,
    )
    torch.manual_seed(0)
    model = BertModel(config)
    model.eval()

    path = tmp_path_factory.mktemp("tiny-bert")
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)
    return str(path)


def _bark_documents():
    # Distinct number words keep every window textually unique, so the
    # extracted embeddings carry no exact duplicates.
    numbers = ["one", "two", "three", "four", "five",
               "six", "seven", "eight", "nine", "ten"]
    docs = []
    for i, number in enumerate(numbers):
        text = (
            f"The dog bark was loud in the park and {number} dogs stood tall. "
            f"It fell quiet at night. "
            f"We heard the {number} bark again and the old tree was covered with moss."
        )
        docs.append(corpus.document_from_text(f"doc{i}", text))
    return docs


@pytest.fixture(scope="session")
def bark_windows_path(tmp_path_factory):
    """Exactly 20 windows for the target word 'bark'."""
    path = tmp_path_factory.mktemp("windows") / "bark.windows.jsonl"
    windows = []
    for doc in _bark_documents():
        windows.extend(corpus.build_windows(doc, "bark", target_size=12))
    assert len(windows) == 20
    with open(path, "w", encoding="utf-8", newline="\n") as sink:
        corpus.write_windows_jsonl(windows, sink)
    return path


@pytest.fixture(scope="session")
def riverbank_windows_path(tmp_path_factory):
    """One window whose target splits into two wordpieces (river + ##bank)."""
    path = tmp_path_factory.mktemp("windows") / "riverbank.windows.jsonl"
    doc = corpus.document_from_text(
        "rdoc", "The riverbank was rough. We stood at night."
    )
    windows = corpus.build_windows(doc, "riverbank", target_size=8)
    assert len(windows) == 1
    with open(path, "w", encoding="utf-8", newline="\n") as sink:
        corpus.write_windows_jsonl(windows, sink)
    return path
