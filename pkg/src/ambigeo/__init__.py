"""Embedding-geometry analytics for lexically ambiguous words.

The package measures how the contextual embeddings of a word spread out in
vector space: it builds ~100-word context windows around target-word
occurrences, stores per-word embedding matrices in a bit-exact binary
container, computes pairwise-cosine diversity and within/between-sense
similarity, projects embeddings to 2-D with an exact t-SNE, renders
nearest-neighbour overlay graphs, and classifies senses with a Gaussian
Naive Bayes model.  A synthetic-cluster generator supplies desk-scale
fixtures so the whole analysis chain can be exercised without a corpus or
a language model.
"""

__version__ = "0.1.0"
