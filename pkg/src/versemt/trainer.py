"""Per-pair SGD training loop with loss-threshold stopping."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import seq2seq
from .bleu import NONE, SMOOTHING, corpus_bleu
from .checkpoint import load_checkpoint, save_checkpoint  # noqa: F401  (re-exported)
from .corpus import ParallelCorpus
from .errors import DataError, NumericError
from .seq2seq import ModelDims, ModelParams
from .vocab import Vocabulary, decode, encode

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_STEPS = "max_steps"
NUMERIC_ERROR = "numeric_error"


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.05
    clip_norm: float = 5.0
    max_steps: int = 25000
    report_every: int = 1000
    stop_threshold: float = 2.0
    stop_patience: int = 5
    seed: int = 0
    validation_bleu_every: int = 1000
    init_scale: float = 0.08
    bleu_smoothing: str = NONE
    bleu_max_n: int = 4
    max_decode_len: int = 100

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError("lr must be > 0")
        if not self.clip_norm > 0:
            raise ValueError("clip_norm must be > 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.report_every < 1:
            raise ValueError("report_every must be >= 1")
        if self.stop_patience < 1:
            raise ValueError("stop_patience must be >= 1")
        if self.validation_bleu_every < 0:
            raise ValueError("validation_bleu_every must be >= 0 (0 disables it)")
        if not self.init_scale > 0:
            raise ValueError("init_scale must be > 0")
        if self.bleu_smoothing not in SMOOTHING:
            raise ValueError(f"bleu_smoothing must be one of {SMOOTHING}")
        if self.bleu_max_n < 1 or self.max_decode_len < 1:
            raise ValueError("bleu_max_n and max_decode_len must be >= 1")


@dataclass
class TrainingLog:
    records: list[tuple[int, float]] = field(default_factory=list)
    bleu_records: list[tuple[int, float]] = field(default_factory=list)
    status: str = ""
    step: int = 0
    error: str = ""

    @property
    def losses(self) -> list[float]:
        return [loss for _, loss in self.records]

    def to_json(self) -> str:
        doc = {
            "loss": [{"step": s, "loss": v} for s, v in self.records],
            "bleu": [{"step": s, "bleu": v} for s, v in self.bleu_records],
            "status": self.status,
            "step": self.step,
        }
        if self.error:
            doc["error"] = self.error
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TrainingLog":
        doc = json.loads(text)
        return cls([(r["step"], r["loss"]) for r in doc["loss"]],
                   [(r["step"], r["bleu"]) for r in doc["bleu"]],
                   doc.get("status", ""), doc.get("step", 0), doc.get("error", ""))


def should_stop(log: TrainingLog, config: TrainConfig, step: int | None = None) -> bool:
    """True once the last ``stop_patience`` reported losses are all under the threshold."""
    if step is None:
        step = log.records[-1][0] if log.records else 0
    if step >= config.max_steps:
        return True
    recent = log.losses[-config.stop_patience:]
    return len(recent) == config.stop_patience and all(v < config.stop_threshold for v in recent)


def translate_corpus(params: ModelParams, src_vocab: Vocabulary, tgt_vocab: Vocabulary,
                     sentences, max_len: int = 100) -> list[list[str]]:
    return [decode(tgt_vocab, seq2seq.greedy_decode(encode(src_vocab, s), params, max_len))
            for s in sentences]


def validation_bleu(params, src_vocab, tgt_vocab, val: ParallelCorpus, config: TrainConfig) -> float:
    hyps = translate_corpus(params, src_vocab, tgt_vocab, val.sources(), config.max_decode_len)
    return corpus_bleu(hyps, val.targets(), config.bleu_max_n, config.bleu_smoothing).score


def run_training(train: ParallelCorpus, val: ParallelCorpus | None,
                 src_vocab: Vocabulary, tgt_vocab: Vocabulary,
                 dims: ModelDims, config: TrainConfig,
                 params: ModelParams | None = None):
    """Train and return ``(params, log)``.

    One update per pair, pairs visited in an order reshuffled every epoch by
    a generator keyed on ``config.seed``.  A non-finite gradient stops the
    run with ``log.status == "numeric_error"``; the params returned are the
    last finite ones.
    """
    if not len(train):
        raise DataError("training corpus is empty")
    if dims.src_vocab != len(src_vocab) or dims.tgt_vocab != len(tgt_vocab):
        raise DataError("model dims do not match vocabulary sizes")
    if params is None:
        params = seq2seq.init_params(dims, config.seed, config.init_scale)
    data = [(np.asarray(encode(src_vocab, p.source)), np.asarray(encode(tgt_vocab, p.target)))
            for p in train]
    rng = np.random.default_rng([config.seed, 1])
    out = TrainingLog()
    step = 0
    window = 0.0
    window_n = 0
    bleu_every = config.validation_bleu_every if val is not None and len(val) else 0

    def report():
        nonlocal window, window_n
        if window_n:
            out.records.append((step, window / window_n))
            log.info("step %d loss %.4f", step, window / window_n)
            window, window_n = 0.0, 0

    def score_validation():
        b = validation_bleu(params, src_vocab, tgt_vocab, val, config)
        out.bleu_records.append((step, b))
        log.info("step %d validation BLEU %.2f", step, b)

    status = MAX_STEPS
    try:
        while step < config.max_steps and status == MAX_STEPS:
            for i in rng.permutation(len(data)):
                src, tgt = data[i]
                trace = seq2seq.forward(src, tgt, params)
                if not np.isfinite(trace.loss):
                    raise NumericError(f"non-finite loss at step {step + 1}")
                grads = seq2seq.backward(trace, params)
                params = seq2seq.sgd_step(params, grads, config.lr, config.clip_norm)
                step += 1
                window += trace.loss
                window_n += 1
                if step % config.report_every == 0:
                    report()
                    if should_stop(out, config, step) and step < config.max_steps:
                        status = CONVERGED
                if bleu_every and step % bleu_every == 0:
                    score_validation()
                if status != MAX_STEPS or step >= config.max_steps:
                    break
    except NumericError as exc:
        status = NUMERIC_ERROR
        out.error = str(exc)
        log.error("training halted at step %d: %s", step, exc)
    report()
    if bleu_every and status != NUMERIC_ERROR and (not out.bleu_records or out.bleu_records[-1][0] != step):
        score_validation()
    out.status = status
    out.step = step
    return params, out


def config_dict(config: TrainConfig) -> dict:
    return asdict(config)
