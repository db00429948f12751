"""Pipeline configuration: an INI file with one section per stage.

Every key has a default except the two corpus paths, which ``pipeline``
needs.  Relative paths are resolved against the directory holding the
config file.  Example::

    [paths]
    source_xml = data/Cebuano.xml
    target_xml = data/Tagalog.xml
    workdir = runs/baseline

    [lexicon]
    table = rules.tsv

    [train]
    max_steps = 25000
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .bleu import SMOOTHING
from .errors import ConfigError, ConfigPathError
from .sampling import SplitSpec
from .seq2seq import ModelDims
from .trainer import TrainConfig


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _ge1(v):
    return v >= 1


def _gt1(v):
    return v > 1


def _gt4(v):
    return v > 4


def _u64(v):
    return 0 <= v < 2**64


def _smoothing(v):
    return v in SMOOTHING


# section -> key -> (type, default, check, help)
SCHEMA = {
    "paths": {
        "source_xml": ("path", None, None, "source-language Bible XML"),
        "target_xml": ("path", None, None, "target-language Bible XML"),
        "workdir": ("path", "work", None, "directory for every pipeline artifact"),
    },
    "corpus": {
        "books": ("list", ["GEN"], None, "comma-separated book codes to keep (empty keeps all)"),
        "source_language": ("str", "", None, "override the language tag read from the XML"),
        "target_language": ("str", "", None, "override the language tag read from the XML"),
        "ratio_limit": ("float", 3.0, _gt1, "length ratio above which a pair is flagged for review"),
        "dedup": ("bool", True, None, "drop pairs repeating an earlier (source, target)"),
    },
    "split": {
        "test_size": ("int", 610, _nonneg, "pairs held out for test"),
        "val_size": ("int", 610, _nonneg, "pairs held out for validation"),
        "seed": ("int", 0, _u64, "split seed"),
        "oversample": ("int", 10, _ge1, "copies of the training split"),
    },
    "lexicon": {
        "table": ("path", None, None, "substitution table to apply before splitting"),
        "tokens": ("list", [], None, "source tokens to mine and accept with default rules"),
        "top_k": ("int", 10, _ge1, "candidates kept per source token"),
        "stopwords": ("path", None, None, "file of target stopwords, one per line"),
        "stopword_count": ("int", 20, _nonneg, "most frequent target tokens used as stopwords when no file is given"),
    },
    "vocab": {
        "max_size": ("int", 50000, _gt4, "vocabulary cap including the 4 specials"),
        "min_count": ("int", 1, _ge1, "minimum token count"),
    },
    "model": {
        "embed_dim": ("int", 64, _ge1, "embedding size"),
        "hidden_dim": ("int", 128, _ge1, "recurrent state size"),
        "attention": ("bool", False, None, "dot-product attention over encoder states"),
        "init_scale": ("float", 0.08, _pos, "uniform init range"),
    },
    "train": {
        "lr": ("float", 0.05, _pos, "SGD learning rate"),
        "clip_norm": ("float", 5.0, _pos, "global gradient-norm clip"),
        "max_steps": ("int", 25000, _ge1, "hard step limit"),
        "report_every": ("int", 1000, _ge1, "steps per loss record"),
        "stop_threshold": ("float", 2.0, None, "loss threshold for stopping"),
        "stop_patience": ("int", 5, _ge1, "consecutive sub-threshold reports needed to stop"),
        "seed": ("int", 0, _u64, "init and shuffling seed"),
        "validation_bleu_every": ("int", 1000, _nonneg, "steps per validation BLEU (0 disables)"),
    },
    "bleu": {
        "max_n": ("int", 4, _ge1, "highest n-gram order"),
        "smoothing": ("str", "none", _smoothing, "corpus BLEU smoothing: none or add_one_high_order"),
        "sentence_smoothing": ("str", "add_one_high_order", _smoothing, "smoothing for per-sentence scores"),
    },
    "translate": {
        "max_len": ("int", 100, _ge1, "maximum generated tokens per sentence"),
    },
}


def _convert(kind, raw: str, where: str):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "list":
            return [x.strip() for x in raw.split(",") if x.strip()]
        if kind == "path":
            return raw or None
        return raw
    except ValueError:
        raise ConfigError(f"{where}: expected {kind}, got {raw!r}") from None


def _format(kind, value) -> str:
    if value is None:
        return ""
    if kind == "list":
        return ",".join(value)
    if kind == "bool":
        return "true" if value else "false"
    return str(value)


@dataclass
class PipelineConfig:
    values: dict = field(default_factory=lambda: {
        s: {k: spec[1] for k, spec in keys.items()} for s, keys in SCHEMA.items()})
    base_dir: Path = field(default_factory=Path.cwd)

    def __getitem__(self, dotted: str):
        section, key = dotted.split(".", 1)
        return self.values[section][key]

    def set(self, dotted: str, raw, *, converted: bool = False, base: Path | None = None) -> None:
        section, _, key = dotted.partition(".")
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown config key {dotted!r}")
        kind = SCHEMA[section][key][0]
        value = raw if converted else _convert(kind, raw, dotted)
        if kind == "path" and value is not None:
            value = Path(value)
            if not value.is_absolute():
                value = (base or self.base_dir) / value
        self.values[section][key] = value

    def path(self, dotted) -> Path | None:
        return self[dotted]

    def validate(self, require_corpus: bool = False) -> "PipelineConfig":
        for section, keys in SCHEMA.items():
            for key, (kind, _, check, _) in keys.items():
                value = self.values[section][key]
                if check is not None and value is not None and not check(value):
                    raise ConfigError(f"{section}.{key}: invalid value {value!r}")
        if require_corpus:
            for key in ("source_xml", "target_xml"):
                p = self.values["paths"][key]
                if p is None:
                    raise ConfigPathError(f"paths.{key} is required")
                if not Path(p).is_file():
                    raise ConfigPathError(f"paths.{key}: no such file {p}")
        for key in ("table", "stopwords"):
            p = self.values["lexicon"][key]
            if p is not None and require_corpus and not Path(p).is_file():
                raise ConfigPathError(f"lexicon.{key}: no such file {p}")
        return self

    def split_spec(self) -> SplitSpec:
        s = self.values["split"]
        return SplitSpec(s["test_size"], s["val_size"], s["seed"], s["oversample"])

    def train_config(self) -> TrainConfig:
        t, m, b = self.values["train"], self.values["model"], self.values["bleu"]
        try:
            return TrainConfig(
                lr=t["lr"], clip_norm=t["clip_norm"], max_steps=t["max_steps"],
                report_every=t["report_every"], stop_threshold=t["stop_threshold"],
                stop_patience=t["stop_patience"], seed=t["seed"],
                validation_bleu_every=t["validation_bleu_every"], init_scale=m["init_scale"],
                bleu_smoothing=b["smoothing"], bleu_max_n=b["max_n"],
                max_decode_len=self.values["translate"]["max_len"])
        except ValueError as exc:
            raise ConfigError(f"train: {exc}") from None

    def model_dims(self, src_vocab: int, tgt_vocab: int) -> ModelDims:
        m = self.values["model"]
        return ModelDims(src_vocab, tgt_vocab, m["embed_dim"], m["hidden_dim"], m["attention"])

    def to_ini(self) -> str:
        lines = ["# effective configuration", ""]
        for section, keys in SCHEMA.items():
            lines.append(f"[{section}]")
            for key, (kind, _, _, _) in keys.items():
                lines.append(f"{key} = {_format(kind, self.values[section][key])}")
            lines.append("")
        return "\n".join(lines)


def load_config(path=None, *, require_corpus: bool = False, overrides=()) -> PipelineConfig:
    """Read ``path`` (if given) over the defaults, then apply ``section.key=value`` overrides."""
    cfg = PipelineConfig()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigPathError(f"config file not found: {path}")
        cfg.base_dir = path.resolve().parent
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"{path}: unknown section [{section}]")
            for key, raw in parser.items(section):
                cfg.set(f"{section}.{key}", raw)
    for section, keys in SCHEMA.items():
        for key, spec in keys.items():
            # defaults given as plain strings resolve like file values
            if spec[0] == "path" and isinstance(cfg.values[section][key], str):
                cfg.set(f"{section}.{key}", cfg.values[section][key])
    for item in overrides:
        dotted, eq, raw = item.partition("=")
        if not eq:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        cfg.set(dotted.strip(), raw, base=Path.cwd())
    return cfg.validate(require_corpus=require_corpus)
