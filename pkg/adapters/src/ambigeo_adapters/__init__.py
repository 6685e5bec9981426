"""Bridges that feed the ambigeo toolkit from the wider NLP ecosystem.

Two producers live here: an embedding extractor that runs context windows
through a pretrained masked language model and writes per-word EMBV1
files, and a translation-based labeler that turns each window's target
occurrence into an auto sense label (with an offline cassette mode for
deterministic, network-free runs).
"""

__version__ = "0.1.0"
