"""Frequency mining and token-level substitution rules.

Two kinds of rule are supported:

``name_copy``
    For names.  Wherever the source contains the name, target tokens in the
    rule's candidate set are rewritten to the canonical form, and if the
    target has neither a candidate nor the canonical token, the canonical
    token is inserted at the position proportional to the name's first
    position in the source.

``verb_canonical``
    For frequent verbs with many renderings.  Candidates are rewritten to
    the canonical form; nothing is ever inserted.

Rules apply in table order, each one seeing the edits of those before it.
"""

from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from .corpus import ParallelCorpus, SentencePair
from .errors import DataError, UnknownTokenError

NAME_COPY = "name_copy"
VERB_CANONICAL = "verb_canonical"
MODES = (NAME_COPY, VERB_CANONICAL)


@dataclass(frozen=True)
class TokenFrequencyTable:
    side: str
    entries: Counter

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    def ranked(self, n: int | None = None) -> list[tuple[str, int]]:
        """Highest counts first, ties broken alphabetically."""
        rows = sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))
        return rows if n is None else rows[:n]


@dataclass(frozen=True)
class CandidateSet:
    source_token: str
    candidates: tuple[tuple[str, int], ...]
    none_count: int
    pair_count: int = 0


@dataclass(frozen=True)
class SubstitutionRule:
    source_token: str
    canonical: str
    candidates: frozenset[str] = frozenset()
    mode: str = VERB_CANONICAL

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown rule mode {self.mode!r}")
        if not self.canonical:
            raise ValueError("canonical token must be nonempty")
        if not self.candidates and self.mode != NAME_COPY:
            raise ValueError(f"{self.source_token}: only name_copy rules may have no candidates")
        object.__setattr__(self, "candidates", frozenset(self.candidates))


@dataclass(frozen=True)
class SubstitutionTable:
    rules: tuple[SubstitutionRule, ...] = ()
    aborted: bool = False

    def __post_init__(self):
        seen = set()
        for r in self.rules:
            key = (r.source_token, r.mode)
            if key in seen:
                raise ValueError(f"more than one {r.mode} rule for {r.source_token!r}")
            seen.add(key)

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)


def _side(pair: SentencePair, side: str):
    if side == "source":
        return pair.source
    if side == "target":
        return pair.target
    raise ValueError(f"side must be 'source' or 'target', not {side!r}")


def count_tokens(corpus: ParallelCorpus, side: str = "source") -> TokenFrequencyTable:
    if side not in ("source", "target"):
        raise ValueError(f"side must be 'source' or 'target', not {side!r}")
    counts = Counter()
    for pair in corpus:
        counts.update(_side(pair, side))
    return TokenFrequencyTable(side, counts)


def default_stopwords(corpus: ParallelCorpus, n: int = 20) -> set[str]:
    """The ``n`` most frequent target tokens: the seed stopword list."""
    return {tok for tok, _ in count_tokens(corpus, "target").ranked(n)}


def mine_candidates(corpus: ParallelCorpus, source_token: str, top_k: int = 10,
                    stopwords: Iterable[str] = ()) -> CandidateSet:
    """Rank target tokens by the number of pairs they share with ``source_token``.

    The source token itself is never treated as a stopword, so copyable
    names survive filtering even when they are frequent.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    stop = set(stopwords) - {source_token}
    cooc = Counter()
    targets = []
    for pair in corpus:
        if source_token in pair.source:
            tgt = set(pair.target)
            targets.append(tgt)
            cooc.update(tgt - stop)
    if not targets:
        raise UnknownTokenError(f"source token {source_token!r} does not occur in the corpus")
    ranked = sorted(cooc.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    chosen = {tok for tok, _ in ranked}
    none_count = sum(1 for tgt in targets if not tgt & chosen)
    return CandidateSet(source_token, tuple(ranked), none_count, len(targets))


def default_rule(cs: CandidateSet) -> SubstitutionRule:
    """Top candidate becomes canonical and the rule covers every candidate.

    A set whose top candidate is the source token itself (or which has no
    candidates at all) is a copyable name.
    """
    if not cs.candidates:
        return SubstitutionRule(cs.source_token, cs.source_token, frozenset(), NAME_COPY)
    canonical = cs.candidates[0][0]
    mode = NAME_COPY if canonical == cs.source_token else VERB_CANONICAL
    return SubstitutionRule(cs.source_token, canonical,
                            frozenset(tok for tok, _ in cs.candidates), mode)


class _Abort(Exception):
    pass


def review_candidates(sets: Sequence[CandidateSet], input: TextIO | None = None,
                      output: TextIO | None = None, interactive: bool = True) -> SubstitutionTable:
    """Walk an operator through each candidate set and collect rules.

    Each prompt shows its default in brackets; an empty answer accepts it.
    ``q`` or end of input aborts, returning the rules gathered so far with
    ``aborted=True``.  With ``interactive=False`` every default is accepted.
    """
    if not interactive:
        return SubstitutionTable(_dedup_rules(default_rule(cs) for cs in sets))
    input = input or sys.stdin
    output = output or sys.stderr

    def ask(prompt):
        output.write(prompt)
        output.flush()
        line = input.readline()
        if not line:
            raise _Abort
        line = line.strip()
        if line.lower() in ("q", "quit"):
            raise _Abort
        return line

    rules = []
    try:
        for i, cs in enumerate(sets, 1):
            default = default_rule(cs)
            output.write(f"\n[{i}/{len(sets)}] {cs.source_token}  "
                         f"(pairs {cs.pair_count}, none {cs.none_count})\n")
            for j, (tok, count) in enumerate(cs.candidates, 1):
                output.write(f"  {j:2d}. {tok}\t{count}\n")
            names = [tok for tok, _ in cs.candidates]
            while True:
                ans = ask(f"canonical [{default.canonical}]: ")
                canonical = _pick(ans, names) if ans else default.canonical
                if canonical:
                    break
                output.write("  pick a listed number or type a token\n")
            default_mode = "n" if default.mode == NAME_COPY else "v"
            while True:
                ans = ask(f"mode n=name_copy v=verb_canonical s=skip [{default_mode}]: ") or default_mode
                if ans in ("n", "v", "s"):
                    break
            if ans == "s":
                continue
            mode = NAME_COPY if ans == "n" else VERB_CANONICAL
            while True:
                ans = ask("covered candidates, numbers or tokens separated by commas [all]: ")
                if not ans:
                    covered = set(names)
                    break
                picked = [_pick(a.strip(), names) for a in ans.split(",") if a.strip()]
                if all(picked):
                    covered = set(picked)
                    break
                output.write("  unrecognized entry\n")
            if mode == VERB_CANONICAL and not covered:
                covered = {canonical}
            rules.append(SubstitutionRule(cs.source_token, canonical, frozenset(covered), mode))
    except _Abort:
        output.write("\naborted; keeping rules accepted so far\n")
        return SubstitutionTable(_dedup_rules(rules), aborted=True)
    return SubstitutionTable(_dedup_rules(rules))


def _pick(answer: str, names: Sequence[str]) -> str | None:
    if answer.isdigit():
        k = int(answer)
        return names[k - 1] if 1 <= k <= len(names) else None
    return answer if answer and not any(ch.isspace() for ch in answer) else None


def _dedup_rules(rules: Iterable[SubstitutionRule]) -> tuple[SubstitutionRule, ...]:
    out = {}
    for r in rules:
        out.setdefault((r.source_token, r.mode), r)
    return tuple(out.values())


def apply_rule(pair: SentencePair, rule: SubstitutionRule) -> SentencePair:
    if rule.source_token not in pair.source:
        return pair
    hit = False
    target = []
    for tok in pair.target:
        if tok in rule.candidates:
            target.append(rule.canonical)
            hit = True
        else:
            if tok == rule.canonical:
                hit = True
            target.append(tok)
    if rule.mode == NAME_COPY and not hit:
        i = pair.source.index(rule.source_token)
        pos = (i * len(target)) // len(pair.source)
        target.insert(pos, rule.canonical)
    target = tuple(target)
    if target == pair.target:
        return pair
    return SentencePair(pair.ref, pair.source, target)


def apply_table(corpus: ParallelCorpus, table: SubstitutionTable) -> ParallelCorpus:
    pairs = corpus.pairs
    for rule in table:
        pairs = tuple(apply_rule(p, rule) for p in pairs)
    return corpus.with_pairs(pairs)


# File formats.  Tokens never contain whitespace but may contain commas, so
# candidate lists escape "\" and "," with a backslash.

def _escape(tok: str) -> str:
    return tok.replace("\\", "\\\\").replace(",", "\\,")


def _split_escaped(text: str) -> list[str]:
    if not text:
        return []
    out, cur, i = [], [], 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            cur.append(text[i + 1])
            i += 2
            continue
        if ch == ",":
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
        i += 1
    out.append("".join(cur))
    return out


def format_table(table: SubstitutionTable) -> str:
    lines = []
    for r in table:
        cands = ",".join(_escape(t) for t in sorted(r.candidates))
        lines.append(f"{r.source_token}\t{r.mode}\t{r.canonical}\t{cands}\n")
    return "".join(lines)


def parse_table(text: str) -> SubstitutionTable:
    rules = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) == 3:
            fields.append("")
        if len(fields) != 4:
            raise DataError(f"substitution table line {lineno}: expected 4 tab-separated fields")
        source, mode, canonical, cands = fields
        try:
            rules.append(SubstitutionRule(source, canonical, frozenset(_split_escaped(cands)), mode))
        except ValueError as exc:
            raise DataError(f"substitution table line {lineno}: {exc}") from None
    try:
        return SubstitutionTable(tuple(rules))
    except ValueError as exc:
        raise DataError(f"substitution table: {exc}") from None


def write_table(table: SubstitutionTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_table(table))


def read_table(path) -> SubstitutionTable:
    with open(path, encoding="utf-8") as fh:
        return parse_table(fh.read())


def format_candidate_report(sets: Iterable[CandidateSet]) -> str:
    """Rows of (source_token, candidate, count, none_count).

    A set without candidates gets one row with an empty candidate and count 0
    so that it survives a round trip.
    """
    lines = ["# source_token\tcandidate\tcount\tnone_count\n"]
    for cs in sets:
        if not cs.candidates:
            lines.append(f"{cs.source_token}\t\t0\t{cs.none_count}\n")
        for tok, count in cs.candidates:
            lines.append(f"{cs.source_token}\t{tok}\t{count}\t{cs.none_count}\n")
    return "".join(lines)


def parse_candidate_report(text: str) -> list[CandidateSet]:
    order: list[str] = []
    rows: dict[str, list[tuple[str, int]]] = {}
    nones: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise DataError(f"candidate report line {lineno}: expected 4 tab-separated fields")
        src, cand, count, none = fields
        try:
            count, none = int(count), int(none)
        except ValueError:
            raise DataError(f"candidate report line {lineno}: counts must be integers") from None
        if src not in rows:
            order.append(src)
            rows[src] = []
        nones[src] = none
        if cand:
            rows[src].append((cand, count))
    return [CandidateSet(s, tuple(sorted(rows[s], key=lambda kv: (-kv[1], kv[0]))), nones[s])
            for s in order]
