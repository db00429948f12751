"""End-to-end acceptance checks, one marker per criterion.

A summary line ``ACCEPTANCE <n> <name>: PASS|FAIL`` is printed for each
criterion at the end of the run (see conftest.py).
"""

import json
import random
import time
from collections import Counter

import numpy as np
import pytest

from fixtures import pipeline_config
from oracles import brute_bleu, finite_difference
from versemt import seq2seq as s2s
from versemt.bleu import ADD_ONE, NONE, corpus_bleu
from versemt.cli import main
from versemt.corpus import ParallelCorpus, SentencePair, VerseRef, read_parallel
from versemt.lexicon import (NAME_COPY, VERB_CANONICAL, CandidateSet, SubstitutionRule,
                             SubstitutionTable, apply_rule, apply_table, mine_candidates,
                             read_table, review_candidates)
from versemt.sampling import SplitSpec, oversample, split_corpus
from versemt.seq2seq import ModelDims
from versemt.trainer import TrainConfig, TrainingLog, run_training, should_stop, translate_corpus
from versemt.vocab import build_vocab, encode


def acceptance(number, name):
    return pytest.mark.acceptance(number, name)


def corpus_of(items):
    return ParallelCorpus(tuple(
        SentencePair(VerseRef("GEN", 1 + i // 100, 1 + i % 100), tuple(s), tuple(t))
        for i, (s, t) in enumerate(items)))


@acceptance(1, "split arithmetic")
def test_split_arithmetic():
    t0 = time.perf_counter()
    c = corpus_of(((f"s{i}",), (f"t{i}",)) for i in range(6510))
    train, val, test = split_corpus(c, SplitSpec(610, 610, seed=0))
    assert (len(train), len(val), len(test)) == (5290, 610, 610)
    assert len(oversample(train, 10)) == 52900
    assert time.perf_counter() - t0 < 1.0


@acceptance(2, "BLEU identity")
def test_bleu_identity():
    t0 = time.perf_counter()
    refs = [s.split() for s in ("at nagkahapon at nagkaumaga ang ikatlong araw .",
                                "at sinabi ng dios", "amen")]
    for smoothing in (NONE, ADD_ONE):
        report = corpus_bleu(refs, refs, smoothing=smoothing)
        assert report.score == 100.0 and str(report) == "100.00"
    assert time.perf_counter() - t0 < 1.0


@acceptance(3, "BLEU oracle equivalence")
def test_bleu_oracle_equivalence():
    t0 = time.perf_counter()
    rng = random.Random(20240)
    vocab = "abcde"
    for case in range(10_000):
        n = rng.randint(1, 4)
        size = rng.randint(1, 5)
        hyps = [[rng.choice(vocab[:size]) for _ in range(rng.randint(0, 8))] for _ in range(n)]
        refs = [[rng.choice(vocab[:size]) for _ in range(rng.randint(0, 8))] for _ in range(n)]
        smoothing = (NONE, ADD_ONE)[case % 2]
        got = corpus_bleu(hyps, refs, smoothing=smoothing).score
        want = brute_bleu(hyps, refs, 4, smoothing)
        assert abs(got - want) <= 1e-9, (hyps, refs, smoothing)
    assert time.perf_counter() - t0 < 60.0


def _random_problem(seed, attention):
    rng = np.random.default_rng(seed)
    V = int(rng.integers(5, 21))
    E, H = int(rng.integers(2, 7)), int(rng.integers(2, 9))
    dims = ModelDims(V, int(rng.integers(5, 21)), E, H, attention)
    p = s2s.init_params(dims, seed, scale=0.6)
    p = p.map(lambda n, a: rng.uniform(-0.4, 0.4, a.shape)
              if n.endswith("_b") or n == "out_c" else a)
    src = rng.integers(0, dims.src_vocab, int(rng.integers(1, 6)))
    tgt = rng.integers(0, dims.tgt_vocab, int(rng.integers(2, 6)))
    return p, src, tgt


@acceptance(4, "gradient correctness")
@pytest.mark.parametrize("attention", [False, True])
def test_gradient_correctness(attention):
    t0 = time.perf_counter()
    for seed in range(20):
        p, src, tgt = _random_problem(seed, attention)
        assert p.out_V.dtype == np.float64
        _, analytic = s2s.loss_and_gradients(src, tgt, p)
        work = p.copy()
        numeric = finite_difference(lambda: s2s.forward(src, tgt, work).loss, work.arrays(), 1e-5)
        for name in s2s.PARAM_NAMES:
            a, n = getattr(analytic, name), numeric[name]
            err = np.abs(a - n)
            rel = err / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-300)
            bad = ~((rel < 1e-4) | (err < 1e-8))
            assert not bad.any(), (seed, name, float(err.max()))
    assert time.perf_counter() - t0 < 60.0


@acceptance(5, "memorization")
def test_memorization():
    t0 = time.perf_counter()
    rng = random.Random(5)
    src_words = [f"s{i}" for i in range(48)]
    tgt_words = [f"t{i}" for i in range(48)]
    items = [([rng.choice(src_words) for _ in range(rng.randint(3, 6))],
              [rng.choice(tgt_words) for _ in range(rng.randint(3, 6))]) for _ in range(32)]
    c = corpus_of(items)
    sv, tv = build_vocab(c.sources()), build_vocab(c.targets())
    assert 40 <= len(sv) <= 60 and 40 <= len(tv) <= 60
    dims = ModelDims(len(sv), len(tv), 32, 64, attention=True)
    cfg = TrainConfig(lr=0.1, clip_norm=5.0, max_steps=20_000, report_every=320,
                      stop_threshold=0.1, stop_patience=1, validation_bleu_every=0,
                      init_scale=0.1, seed=0)
    params, log = run_training(c, None, sv, tv, dims, cfg)
    losses = [s2s.forward(encode(sv, p.source), encode(tv, p.target), params).loss for p in c]
    mean_loss = sum(losses) / len(losses)
    hyps = translate_corpus(params, sv, tv, c.sources(), 20)
    exact = sum(h == list(p.target) for h, p in zip(hyps, c)) / len(c)
    print(f"\nmemorization: {log.step} steps, mean loss {mean_loss:.4f}, exact {exact:.0%}")
    assert mean_loss < 0.1
    assert exact >= 0.95
    assert time.perf_counter() - t0 < 300.0


@acceptance(6, "stopping rule")
def test_stopping_rule():
    cfg = TrainConfig(stop_threshold=2.0, stop_patience=5)

    def log_of(losses):
        return TrainingLog([(1000 * (i + 1), v) for i, v in enumerate(losses)])

    assert should_stop(log_of([3.0, 2.5, 1.9, 1.8, 1.7, 1.6, 1.5]), cfg)
    assert not should_stop(log_of([1.9, 1.8, 2.1, 1.7, 1.6]), cfg)
    assert not should_stop(log_of([1.5, 1.4, 1.3, 1.2]), cfg)
    assert not should_stop(log_of([1.9, 1.9, 1.9, 1.9, 2.0]), cfg)
    assert should_stop(log_of([2.5]), TrainConfig(max_steps=1000))


def _pair(src, tgt):
    return SentencePair(VerseRef("GEN", 1, 1), tuple(src.split()), tuple(tgt.split()))


@acceptance(7, "substitution semantics")
def test_substitution_semantics():
    t0 = time.perf_counter()
    dios = SubstitutionRule("dios", "dios", frozenset({"panginoon", "jehova"}), NAME_COPY)
    out = apply_rule(_pair("ug miingon ang dios", "at sinabi ng panginoon"), dios)
    assert " ".join(out.target) == "at sinabi ng dios"
    out = apply_rule(_pair("ug miingon ang dios", "at sinabi niya"), dios)
    assert " ".join(out.target) == "at sinabi dios niya"

    c = corpus_of([("ngadto x".split(), "paroon y".split()), ("ngadto z".split(), "paroon w".split()),
                   (["q"], ["r"])])
    cs = mine_candidates(c, "ngadto", top_k=1)
    assert cs.candidates == (("paroon", 2),) and cs.none_count == 0
    table = review_candidates(
        [CandidateSet("ngadto", (("paroon", 341), ("pumaroon", 80)), 5)], interactive=False)
    assert table.rules == (SubstitutionRule(
        "ngadto", "paroon", frozenset({"paroon", "pumaroon"}), VERB_CANONICAL),)

    rng = random.Random(7)
    words = ["a", "b", "c", "d", "e", "f"]
    for _ in range(1000):
        items = [([rng.choice(words) for _ in range(rng.randint(1, 6))],
                  [rng.choice(words) for _ in range(rng.randint(1, 6))])
                 for _ in range(rng.randint(1, 8))]
        corpus = corpus_of(items)
        mode = rng.choice([NAME_COPY, VERB_CANONICAL])
        rule = SubstitutionRule(rng.choice(words), rng.choice(words),
                                frozenset(rng.sample(words, rng.randint(1, 3))), mode)
        after = apply_table(corpus, SubstitutionTable((rule,)))
        for before, new in zip(corpus, after):
            if rule.source_token not in before.source:
                assert new == before
                continue
            residual = rule.candidates - {rule.canonical}
            assert not set(new.target) & residual
            had = any(t in rule.candidates or t == rule.canonical for t in before.target)
            if mode == NAME_COPY or had:
                assert rule.canonical in new.target
            else:
                assert new == before
    assert time.perf_counter() - t0 < 10.0


ARTIFACTS = ["train.src", "train.tgt", "train.idx", "val.src", "val.tgt", "val.idx",
             "test.src", "test.tgt", "test.idx", "training_log.json", "model.ckpt", "test.hyp"]


@pytest.fixture(scope="module")
def pipeline_runs(tmp_path_factory):
    runs = []
    for k in range(2):
        root = tmp_path_factory.mktemp(f"run{k}")
        ini = pipeline_config(root)
        t0 = time.perf_counter()
        code = main(["pipeline", "--config", str(ini)])
        runs.append((root / "work", code, time.perf_counter() - t0))
    return runs


@acceptance(8, "determinism")
def test_pipeline_determinism(pipeline_runs):
    (a, code_a, ta), (b, code_b, tb) = pipeline_runs
    assert code_a == 0 and code_b == 0
    for name in ARTIFACTS:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    assert ta + tb < 600.0


@acceptance(9, "smoke run")
def test_smoke_validation_bleu_rises(pipeline_runs):
    work, code, _ = pipeline_runs[0]
    assert code == 0
    assert len(read_parallel(work / "corpus")) in range(400, 600)
    log = json.loads((work / "training_log.json").read_text())
    scores = [r["bleu"] for r in log["bleu"]]
    print(f"\nvalidation BLEU by step: {[(r['step'], round(r['bleu'], 2)) for r in log['bleu']]}")
    print(f"test BLEU: {json.loads((work / 'eval.json').read_text())['score']}")
    assert len(scores) >= 2
    assert max(scores) > scores[0]


@acceptance(9, "smoke run")
def test_smoke_substitution_counts(pipeline_runs):
    work, code, _ = pipeline_runs[0]
    assert code == 0
    before = read_parallel(work / "corpus")
    after = read_parallel(work / "corpus.sub")
    table = read_table(work / "substitution_table.tsv")
    assert len(table) == 2
    changed = 0
    for rule in table:
        hit_before = [p for p in before if rule.source_token in p.source]
        hit_after = [p for p in after if rule.source_token in p.source]
        assert [p.ref for p in hit_before] == [p.ref for p in hit_after]
        old = Counter(t for p in hit_before for t in p.target)
        new = Counter(t for p in hit_after for t in p.target)
        inserted = 0
        if rule.mode == NAME_COPY:
            inserted = sum(1 for p in hit_before
                           if not any(t in rule.candidates or t == rule.canonical for t in p.target))
        for cand in rule.candidates - {rule.canonical}:
            assert new[cand] == 0
        expected = sum(old[t] for t in rule.candidates | {rule.canonical}) + inserted
        assert new[rule.canonical] == expected
        changed += expected - old[rule.canonical]
    tokens = {r.source_token for r in table}
    for old_pair, new_pair in zip(before, after):
        if not tokens & set(old_pair.source):
            assert new_pair == old_pair
    assert changed > 0
