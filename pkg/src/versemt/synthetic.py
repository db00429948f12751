"""Synthetic verse-aligned corpora for tests and demos.

The generated "languages" are toys: the target side is a word-by-word
rendering of the source with a few one-to-two expansions, names that are
sometimes replaced by a pronoun, and a verb with several competing
renderings.  That is enough structure for the lexicon rules to have work to
do and for a small model to learn something.  The XML mimics the layout of
the multilingual Bible corpus, and some verses carry markup, capitals,
non-ASCII characters or are missing from one side, so that cleaning and
alignment get exercised.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .corpus import ParallelCorpus, SentencePair, VerseRef

NAMES = ("dios", "abraham", "jose", "jacob", "isaac", "sara", "faraon", "ismael")
# source word -> target rendering (tuple for multi-word renderings)
LEXICON = {
    "ug": ("at",), "ang": ("ang",), "sa": ("sa",), "mga": ("mga",),
    "miingon": ("sinabi",), "mitubag": ("sumagot",), "nakita": ("nakita",),
    "yuta": ("lupa",), "kahoy": ("kahoy",), "bunga": ("bunga",), "binhi": ("binhi",),
    "adlaw": ("araw",), "tubig": ("tubig",), "langit": ("langit",), "balay": ("bahay",),
    "anak": ("anak",), "babaye": ("babae",), "lalake": ("lalake",), "igsoon": ("kapatid",),
    "maayo": ("mabuti",), "dako": ("malaki",), "gamay": ("maliit",), "daghan": ("marami",),
    "karon": ("ngayon",), "usab": ("rin",), "kaniya": ("kaniya",), "kanila": ("kanila",),
    "sumala": ("ayon", "sa"), "tuig": ("taon",), "pito": ("pito",), "tulo": ("tatlo",),
    "damgo": ("panaginip",), "hari": ("hari",), "kayutaan": ("lupain",), "halad": ("handog",),
    "dihay": ("may",), "gabii": ("gabi",), "buntag": ("umaga",), ",": (",",), ":": (":",),
}
VERB = "ngadto"
VERB_RENDERINGS = ("paroon", "pumaroon", "yumaon")
VERB_WEIGHTS = (0.6, 0.25, 0.15)
PRONOUNS = ("siya", "kaniya")


def _sentence(rng):
    content = [w for w in LEXICON if w not in (",", ":", "ug")]
    n = int(rng.integers(4, 10))
    words = ["ug"] if rng.random() < 0.5 else []
    for _ in range(n):
        r = rng.random()
        if r < 0.15:
            words.append(str(rng.choice(NAMES)))
        elif r < 0.22:
            words.append(VERB)
        elif r < 0.28:
            words.append(",")
        else:
            words.append(str(rng.choice(content)))
    words.append(".")
    return words


def _render(words, rng):
    out = []
    for w in words:
        if w in NAMES:
            out.append(str(rng.choice(PRONOUNS)) if rng.random() < 0.25 else w)
        elif w == VERB:
            out.append(str(rng.choice(VERB_RENDERINGS, p=VERB_WEIGHTS)))
        elif w == ".":
            out.append(".")
        else:
            out.extend(LEXICON[w])
    return out


def make_corpus(n_pairs: int = 500, seed: int = 0) -> ParallelCorpus:
    """A clean ParallelCorpus, skipping the XML round trip."""
    rng = np.random.default_rng(seed)
    pairs = []
    for k in range(n_pairs):
        words = _sentence(rng)
        ref = VerseRef("GEN", k // 30 + 1, k % 30 + 1)
        pairs.append(SentencePair(ref, tuple(words), tuple(_render(words, rng))))
    return ParallelCorpus(tuple(pairs), "ceb", "tgl")


def _decorate(text, rng):
    r = rng.random()
    if r < 0.05:
        return text.capitalize()
    if r < 0.08:
        parts = text.split(" ")
        i = int(rng.integers(len(parts)))
        parts[i] = f"<i>{parts[i]}</i>"
        return " ".join(parts)
    if r < 0.10:
        return text + " ¶"
    return text


def make_documents(n_verses: int = 520, seed: int = 0, extra_books: bool = True):
    """Return ``(source_xml, target_xml)`` bytes.

    A few verses are dropped from the target side and a few repeated
    verbatim.  With ``extra_books`` a short Exodus section is appended,
    which a ``books={"GEN"}`` filter should discard.
    """
    rng = np.random.default_rng(seed)
    src_segs, tgt_segs = [], []
    previous = None
    for k in range(n_verses):
        ref = VerseRef("GEN", k // 30 + 1, k % 30 + 1)
        if previous is not None and rng.random() < 0.02:
            words, rendered = previous
        else:
            words = _sentence(rng)
            rendered = _render(words, rng)
        previous = (words, rendered)
        src_segs.append((ref, _decorate(" ".join(words), rng)))
        if rng.random() >= 0.01:
            tgt_segs.append((ref, _decorate(" ".join(rendered), rng)))
    if extra_books:
        for v in range(1, 6):
            words = _sentence(rng)
            ref = VerseRef("EXO", 1, v)
            src_segs.append((ref, " ".join(words)))
            tgt_segs.append((ref, " ".join(_render(words, rng))))
    return _xml("ceb", "Cebuano", src_segs), _xml("tgl", "Tagalog", tgt_segs)


def _xml(code, name, segs) -> bytes:
    lines = ['<?xml version="1.0" encoding="utf-8"?>',
             '<cesDoc version="4">',
             f'<cesHeader version="4.3"><profileDesc><langUsage>'
             f'<language id="{code}">{name}</language></langUsage></profileDesc></cesHeader>',
             f'<text><body lang="{code}" id="synthetic-{code}">']
    book = chapter = None
    for ref, text in segs:
        if ref.book != book:
            if book is not None:
                lines.append("</div></div>")
            book, chapter = ref.book, None
            lines.append(f'<div type="book" id="b.{book}">')
        if ref.chapter != chapter:
            if chapter is not None:
                lines.append("</div>")
            chapter = ref.chapter
            lines.append(f'<div type="chapter" id="b.{book}.{chapter}">')
        # markup in the text is meant to survive as literal tags in the
        # segment content, so escape it once
        lines.append(f'<seg type="verse" id="{ref.seg_id}">{escape(text)}</seg>')
    if book is not None:
        lines.append("</div></div>")
    lines.append("</body></text></cesDoc>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_fixture(directory, n_verses: int = 520, seed: int = 0):
    """Write ``source.xml`` and ``target.xml`` and return their paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    src, tgt = make_documents(n_verses, seed)
    paths = directory / "source.xml", directory / "target.xml"
    paths[0].write_bytes(src)
    paths[1].write_bytes(tgt)
    return paths
