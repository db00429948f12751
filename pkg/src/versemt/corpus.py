"""Bible XML ingestion, text normalization and verse alignment.

The input files follow the layout of the multilingual Bible corpus
(``<seg type="verse" id="b.GEN.1.1">...</seg>`` inside book and chapter
``<div>`` elements).  Everything downstream works on :class:`ParallelCorpus`.
"""

from __future__ import annotations

import re
import xml.parsers.expat
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CorpusParseError, DuplicateVerseError, EmptyCorpusError

SEG_ID_RE = re.compile(r"^b\.([A-Za-z0-9]+)\.(\d+)\.(\d+)$")
TAG_RE = re.compile(r"<[^<>]*>")
SPACE_RE = re.compile(r" +")


@dataclass(frozen=True, order=True)
class VerseRef:
    book: str
    chapter: int
    verse: int

    def __post_init__(self):
        if not self.book:
            raise ValueError("book code must be nonempty")
        if self.chapter < 1 or self.verse < 1:
            raise ValueError(f"chapter and verse must be >= 1, got {self.chapter}.{self.verse}")

    def __str__(self):
        return f"{self.book}.{self.chapter}.{self.verse}"

    @property
    def seg_id(self) -> str:
        return f"b.{self}"

    @classmethod
    def parse(cls, text: str) -> "VerseRef":
        """Accept either ``b.GEN.1.1`` or ``GEN.1.1``."""
        m = SEG_ID_RE.match(text if text.startswith("b.") else "b." + text)
        if not m:
            raise ValueError(f"not a verse id: {text!r}")
        return cls(m.group(1), int(m.group(2)), int(m.group(3)))


@dataclass
class MonolingualDocument:
    language: str
    entries: dict[VerseRef, str] = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class SentencePair:
    ref: VerseRef
    source: tuple[str, ...]
    target: tuple[str, ...]


@dataclass(frozen=True)
class ParallelCorpus:
    """Aligned pairs in a fixed order.

    Reference uniqueness is checked by :func:`build_parallel` and
    :func:`check_unique_refs`, not here, because an oversampled training set
    legitimately repeats refs.
    """

    pairs: tuple[SentencePair, ...]
    source_language: str = "src"
    target_language: str = "tgt"

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    def with_pairs(self, pairs: Iterable[SentencePair]) -> "ParallelCorpus":
        return ParallelCorpus(tuple(pairs), self.source_language, self.target_language)

    def sources(self) -> list[tuple[str, ...]]:
        return [p.source for p in self.pairs]

    def targets(self) -> list[tuple[str, ...]]:
        return [p.target for p in self.pairs]


def check_unique_refs(corpus: ParallelCorpus) -> None:
    seen = set()
    for p in corpus:
        if p.ref in seen:
            raise DuplicateVerseError(p.ref)
        seen.add(p.ref)


def parse_bible_xml(raw: bytes, language: str | None = None) -> MonolingualDocument:
    """Collect the text of every verse ``<seg>``, verbatim.

    Text inside nested elements of a segment is kept; markup tags themselves
    are not (expat has already consumed them).  The language tag comes from
    the ``lang`` attribute of ``<body>`` or ``<language id=...>`` unless given.
    """
    entries: dict[VerseRef, str] = {}
    found_lang: list[str] = []
    current: list[str] | None = None
    current_ref: VerseRef | None = None
    depth = 0

    parser = xml.parsers.expat.ParserCreate()

    def start(name, attrs):
        nonlocal current, current_ref, depth
        if current is not None:
            depth += 1
            return
        if name == "body" and "lang" in attrs:
            found_lang.append(attrs["lang"])
        elif name == "language" and "id" in attrs:
            found_lang.append(attrs["id"])
        elif name == "seg" and "id" in attrs:
            try:
                ref = VerseRef.parse(attrs["id"])
            except ValueError as exc:
                raise CorpusParseError(str(exc), parser.CurrentByteIndex) from None
            if ref in entries:
                raise DuplicateVerseError(ref)
            current, current_ref, depth = [], ref, 0

    def end(name):
        nonlocal current, current_ref, depth
        if current is None:
            return
        if depth:
            depth -= 1
            return
        entries[current_ref] = "".join(current)
        current, current_ref = None, None

    def chars(data):
        if current is not None:
            current.append(data)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(raw, True)
    except xml.parsers.expat.ExpatError as exc:
        raise CorpusParseError(
            f"malformed XML: {xml.parsers.expat.ErrorString(exc.code)}",
            parser.ErrorByteIndex) from None
    lang = language or (found_lang[0] if found_lang else "und")
    return MonolingualDocument(lang, entries)


def read_bible_xml(path, language=None) -> MonolingualDocument:
    return parse_bible_xml(Path(path).read_bytes(), language)


def normalize_text(raw: str) -> str:
    # Order matters for idempotence: dropping a control character can expose
    # a tag, and removing one tag can expose another.
    text = "".join(" " if ch.isspace() else ch for ch in raw)
    text = "".join(ch for ch in text if " " <= ch <= "~")
    while True:
        stripped = TAG_RE.sub("", text)
        if stripped == text:
            break
        text = stripped
    return SPACE_RE.sub(" ", text.lower()).strip()


def tokenize(text: str) -> tuple[str, ...]:
    return tuple(text.split())


def build_parallel(src: MonolingualDocument, tgt: MonolingualDocument,
                   books: Iterable[str] | None = None) -> ParallelCorpus:
    """Pair verses present in both documents (and in ``books``, if given)."""
    if not src.entries or not tgt.entries:
        raise EmptyCorpusError("both documents must contain verses")
    keep = set(books) if books is not None else None
    refs = sorted(r for r in src.entries
                  if r in tgt.entries and (keep is None or r.book in keep))
    if not refs:
        raise EmptyCorpusError(
            f"no verse shared by {src.language} and {tgt.language}"
            + (f" in books {sorted(keep)}" if keep is not None else ""))
    pairs = []
    for ref in refs:
        s = tokenize(normalize_text(src.entries[ref]))
        t = tokenize(normalize_text(tgt.entries[ref]))
        if s and t:
            pairs.append(SentencePair(ref, s, t))
    return ParallelCorpus(tuple(pairs), src.language, tgt.language)


def dedup_pairs(corpus: ParallelCorpus) -> ParallelCorpus:
    seen = set()
    kept = []
    for p in corpus:
        key = (p.source, p.target)
        if key not in seen:
            seen.add(key)
            kept.append(p)
    return corpus.with_pairs(kept)


def alignment_report(corpus: ParallelCorpus, ratio_limit: float = 2.0):
    """Pairs whose length ratio exceeds ``ratio_limit``, worst first."""
    if ratio_limit <= 1:
        raise ValueError("ratio_limit must be > 1")
    rows = []
    for p in corpus:
        ls, lt = len(p.source), len(p.target)
        ratio = max(ls, lt) / min(ls, lt)
        if ratio > ratio_limit:
            rows.append((ratio, p.ref, ls, lt))
    rows.sort(key=lambda r: (-r[0], r[1]))
    return [(ref, ls, lt) for _, ref, ls, lt in rows]


# Line-aligned text: PREFIX.src, PREFIX.tgt and PREFIX.idx (line -> ref).

def write_parallel(corpus: ParallelCorpus, prefix) -> None:
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    src_lines = "".join(" ".join(p.source) + "\n" for p in corpus)
    tgt_lines = "".join(" ".join(p.target) + "\n" for p in corpus)
    idx_lines = "".join(f"{i}\t{p.ref}\n" for i, p in enumerate(corpus, 1))
    header = f"# {corpus.source_language}\t{corpus.target_language}\n"
    _write(prefix.with_name(prefix.name + ".src"), src_lines)
    _write(prefix.with_name(prefix.name + ".tgt"), tgt_lines)
    _write(prefix.with_name(prefix.name + ".idx"), header + idx_lines)


def read_parallel(prefix) -> ParallelCorpus:
    prefix = Path(prefix)
    src = _read_lines(prefix.with_name(prefix.name + ".src"))
    tgt = _read_lines(prefix.with_name(prefix.name + ".tgt"))
    idx_path = prefix.with_name(prefix.name + ".idx")
    langs = ("src", "tgt")
    refs: list[VerseRef] = []
    if idx_path.exists():
        for line in _read_lines(idx_path):
            if line.startswith("#"):
                langs = tuple(line[1:].strip().split("\t"))
                continue
            _, ref = line.split("\t")
            refs.append(VerseRef.parse(ref))
    else:
        refs = [VerseRef("LINE", 1, i) for i in range(1, len(src) + 1)]
    if not (len(src) == len(tgt) == len(refs)):
        raise CorpusParseError(
            f"{prefix}: line counts differ (src {len(src)}, tgt {len(tgt)}, idx {len(refs)})")
    pairs = tuple(SentencePair(r, tokenize(s), tokenize(t)) for r, s, t in zip(refs, src, tgt))
    return ParallelCorpus(pairs, *langs)


def write_lines(path, lines: Sequence[str]) -> None:
    _write(Path(path), "".join(line + "\n" for line in lines))


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]
