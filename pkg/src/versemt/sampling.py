"""Train/validation/test split and training-set oversampling.

Randomness comes from numpy's PCG64 generator (``numpy.random.default_rng``)
keyed by the split seed.  One permutation of ``range(len(corpus))`` is drawn;
its first ``n_test`` entries form the test set, the next ``n_val`` the
validation set, and the rest the training set.  Each part keeps the original
corpus order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import ParallelCorpus
from .errors import SplitSizeError


@dataclass(frozen=True)
class SplitSpec:
    n_test: int = 610
    n_val: int = 610
    seed: int = 0
    oversample_factor: int = 10

    def __post_init__(self):
        if self.n_test < 0 or self.n_val < 0:
            raise ValueError("split sizes must be >= 0")
        if self.oversample_factor < 1:
            raise ValueError("oversample_factor must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def split_corpus(corpus: ParallelCorpus, spec: SplitSpec):
    """Return ``(train, val, test)``."""
    n = len(corpus)
    held_out = spec.n_test + spec.n_val
    if held_out >= n:
        raise SplitSizeError(held_out, n)
    perm = np.random.default_rng(spec.seed).permutation(n)
    test_idx = np.sort(perm[:spec.n_test])
    val_idx = np.sort(perm[spec.n_test:held_out])
    train_idx = np.sort(perm[held_out:])

    def take(idx):
        return corpus.with_pairs(corpus.pairs[i] for i in idx)

    return take(train_idx), take(val_idx), take(test_idx)


def oversample(corpus: ParallelCorpus, factor: int) -> ParallelCorpus:
    if factor < 1:
        raise ValueError("factor must be >= 1")
    return corpus.with_pairs(corpus.pairs * factor)
