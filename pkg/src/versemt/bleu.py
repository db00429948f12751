"""BLEU with clipped n-gram precision and brevity penalty, on a 0-100 scale.

One reference per hypothesis.  Orders for which the hypotheses contain no
n-grams at all (every hypothesis shorter than ``n``) are left out of the
geometric mean, so a short sentence scored against itself still gets 100.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import DataError

NONE = "none"
ADD_ONE = "add_one_high_order"
SMOOTHING = (NONE, ADD_ONE)


@dataclass(frozen=True)
class BleuReport:
    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    hyp_length: int
    ref_length: int
    smoothing: str
    matched: tuple[int, ...] = ()
    totals: tuple[int, ...] = ()

    def __str__(self):
        return f"{self.score:.2f}"

    def as_dict(self) -> dict:
        return {
            "score": round(self.score, 2),
            "score_full": self.score,
            "precisions": list(self.precisions),
            "brevity_penalty": self.brevity_penalty,
            "hyp_length": self.hyp_length,
            "ref_length": self.ref_length,
            "smoothing": self.smoothing,
            "matched": list(self.matched),
            "totals": list(self.totals),
        }


def ngram_multiset(tokens: Sequence[str], n: int) -> Counter:
    if n < 1:
        raise ValueError("n must be >= 1")
    tokens = tuple(tokens)
    return Counter(tokens[i:i + n] for i in range(len(tokens) - n + 1))


def _check_pairing(hyps, refs):
    if len(hyps) != len(refs):
        raise DataError(f"{len(hyps)} hypotheses but {len(refs)} references")
    if not hyps:
        raise DataError("need at least one hypothesis/reference pair")


def modified_precision(hyps, refs, n: int) -> tuple[int, int]:
    """Clipped matches and total hypothesis n-grams, summed over the corpus."""
    _check_pairing(hyps, refs)
    matched = total = 0
    for hyp, ref in zip(hyps, refs):
        h = ngram_multiset(hyp, n)
        r = ngram_multiset(ref, n)
        matched += sum(min(c, r[g]) for g, c in h.items())
        total += sum(h.values())
    return matched, total


def brevity_penalty(hyp_len: int, ref_len: int) -> float:
    if hyp_len >= ref_len or ref_len == 0:
        return 1.0
    if hyp_len == 0:
        return 0.0
    return math.exp(1.0 - ref_len / hyp_len)


def corpus_bleu(hyps, refs, max_n: int = 4, smoothing: str = NONE) -> BleuReport:
    if smoothing not in SMOOTHING:
        raise ValueError(f"unknown smoothing {smoothing!r}")
    _check_pairing(hyps, refs)
    hyp_len = sum(len(h) for h in hyps)
    ref_len = sum(len(r) for r in refs)
    bp = brevity_penalty(hyp_len, ref_len)
    counts = [modified_precision(hyps, refs, n) for n in range(1, max_n + 1)]
    matched = tuple(m for m, _ in counts)
    totals = tuple(t for _, t in counts)
    precisions = []
    log_sum = 0.0
    used = 0
    zero = False
    for n, (m, t) in enumerate(counts, 1):
        if t == 0:
            precisions.append(0.0)
            continue
        if m == 0 and n > 1 and smoothing == ADD_ONE:
            m, t = 1, t + 1
        p = m / t
        precisions.append(p)
        used += 1
        if m == 0:
            zero = True
        else:
            log_sum += math.log(p)
    if used == 0 or zero or bp == 0.0:
        score = 0.0
    else:
        score = 100.0 * bp * math.exp(log_sum / used)
    return BleuReport(min(score, 100.0), tuple(precisions), bp, hyp_len, ref_len,
                      smoothing, matched, totals)


def sentence_bleu(hyp, ref, max_n: int = 4, smoothing: str = ADD_ONE) -> BleuReport:
    return corpus_bleu([hyp], [ref], max_n, smoothing)
