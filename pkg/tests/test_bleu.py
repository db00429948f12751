import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_bleu
from versemt.bleu import (ADD_ONE, NONE, brevity_penalty, corpus_bleu, modified_precision,
                          ngram_multiset, sentence_bleu)
from versemt.errors import DataError


def test_ngram_multiset():
    assert ngram_multiset("a b a b".split(), 2) == {("a", "b"): 2, ("b", "a"): 1}
    assert ngram_multiset(["a"], 2) == {}
    with pytest.raises(ValueError):
        ngram_multiset(["a"], 0)


def test_clipped_unigram_precision():
    assert modified_precision([["the", "the", "the"]], [["the", "cat"]], 1) == (1, 3)


def test_brevity_penalty_values():
    assert brevity_penalty(5, 10) == pytest.approx(math.exp(-1), abs=1e-6)
    assert brevity_penalty(0, 7) == 0.0
    assert brevity_penalty(12, 10) == 1.0
    assert brevity_penalty(0, 0) == 1.0


@pytest.mark.parametrize("smoothing", [NONE, ADD_ONE])
def test_identity_scores_100(smoothing):
    refs = [["ang", "dios"], ["ug", "miingon", "ang", "dios", "."], ["x"]]
    assert corpus_bleu(refs, refs, smoothing=smoothing).score == pytest.approx(100.0, abs=1e-9)
    assert str(corpus_bleu(refs, refs)) == "100.00"


def test_no_four_gram_match_is_zero_unsmoothed():
    hyp = [["a", "b", "c", "x", "b", "c", "d"]]
    ref = [["a", "b", "c", "d", "e"]]
    assert corpus_bleu(hyp, ref).score == 0.0
    assert corpus_bleu(hyp, ref, smoothing=ADD_ONE).score > 0.0
    assert corpus_bleu([["z"]], [["y"]], smoothing=ADD_ONE).score == 0.0


def test_pairing_errors():
    with pytest.raises(DataError):
        corpus_bleu([["a"]], [])
    with pytest.raises(DataError):
        corpus_bleu([], [])
    with pytest.raises(ValueError):
        corpus_bleu([["a"]], [["a"]], smoothing="exp")


def test_sentence_bleu_defaults_to_smoothing():
    assert sentence_bleu(["a", "b"], ["a", "c"]).smoothing == ADD_ONE


def test_report_dict():
    d = corpus_bleu([["a", "b", "c"]], [["a", "b", "c", "d"]]).as_dict()
    assert d["score"] == round(d["score_full"], 2)
    assert d["hyp_length"] == 3 and d["ref_length"] == 4


def random_pair(rng, vocab="abcde"):
    h = [rng.choice(vocab) for _ in range(rng.randint(0, 9))]
    r = [rng.choice(vocab) for _ in range(rng.randint(1, 9))]
    return h, r


def test_matches_brute_force():
    rng = random.Random(42)
    for _ in range(500):
        pairs = [random_pair(rng) for _ in range(rng.randint(1, 4))]
        hyps, refs = [p[0] for p in pairs], [p[1] for p in pairs]
        for sm in (NONE, ADD_ONE):
            assert corpus_bleu(hyps, refs, smoothing=sm).score == pytest.approx(
                brute_bleu(hyps, refs, 4, sm), abs=1e-9)


corpora = st.lists(
    st.tuples(st.lists(st.sampled_from("abcd"), max_size=8),
              st.lists(st.sampled_from("abcd"), min_size=1, max_size=8)),
    min_size=1, max_size=5)


@settings(max_examples=150, deadline=None)
@given(corpora, st.sampled_from([NONE, ADD_ONE]), st.randoms(use_true_random=False))
def test_order_invariance_and_range(pairs, smoothing, rnd):
    hyps, refs = [p[0] for p in pairs], [p[1] for p in pairs]
    score = corpus_bleu(hyps, refs, smoothing=smoothing).score
    assert 0.0 <= score <= 100.0
    order = list(range(len(pairs)))
    rnd.shuffle(order)
    shuffled = corpus_bleu([hyps[i] for i in order], [refs[i] for i in order], smoothing=smoothing)
    assert shuffled.score == pytest.approx(score, abs=1e-9)


@given(st.lists(st.sampled_from("abc"), max_size=10), st.lists(st.sampled_from("abc"), max_size=10),
       st.integers(1, 4))
def test_clipping_bound(hyp, ref, n):
    m, t = modified_precision([hyp], [ref], n)
    assert 0 <= m <= t
    assert m <= max(len(ref) - n + 1, 0)
