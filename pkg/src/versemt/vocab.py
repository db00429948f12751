"""Token vocabularies with four reserved indices."""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Iterable, Sequence

PAD, UNK, BOS, EOS = 0, 1, 2, 3
SPECIALS = ("<pad>", "<unk>", "<s>", "</s>")
N_SPECIALS = len(SPECIALS)


class Vocabulary:
    def __init__(self, tokens: Sequence[str] = (), max_size: int | None = None, min_count: int = 1):
        self.itos = list(SPECIALS) + list(tokens)
        self.stoi = {tok: i for i, tok in enumerate(self.itos)}
        if len(self.stoi) != len(self.itos):
            raise ValueError("vocabulary tokens must be unique and distinct from specials")
        self.max_size = max_size if max_size is not None else len(self.itos)
        self.min_count = min_count

    def __len__(self):
        return len(self.itos)

    def __contains__(self, tok):
        return tok in self.stoi and self.stoi[tok] >= N_SPECIALS

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.itos == other.itos

    def __repr__(self):
        return f"Vocabulary(size={len(self)})"

    @property
    def tokens(self) -> list[str]:
        return self.itos[N_SPECIALS:]

    def index(self, tok: str) -> int:
        i = self.stoi.get(tok, UNK)
        return i if i >= N_SPECIALS else UNK

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(tok + "\n" for tok in self.tokens)

    @classmethod
    def load(cls, path) -> "Vocabulary":
        return cls(Path(path).read_text(encoding="utf-8").splitlines())


def build_vocab(sentences: Iterable[Sequence[str]], max_size: int = 50000,
                min_count: int = 1) -> Vocabulary:
    if max_size <= N_SPECIALS:
        raise ValueError(f"max_size must exceed {N_SPECIALS}")
    counts = Counter()
    for sent in sentences:
        counts.update(sent)
    for special in SPECIALS:
        counts.pop(special, None)
    ranked = sorted((kv for kv in counts.items() if kv[1] >= min_count),
                    key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary([tok for tok, _ in ranked[:max_size - N_SPECIALS]], max_size, min_count)


def encode(v: Vocabulary, tokens: Sequence[str]) -> list[int]:
    return [BOS] + [v.index(t) for t in tokens] + [EOS]


def decode(v: Vocabulary, indices: Sequence[int]) -> list[str]:
    """Strip BOS, stop at the first EOS, drop padding.  UNK renders as ``<unk>``."""
    indices = [int(i) for i in indices]
    for i in indices:
        if not 0 <= i < len(v):
            raise IndexError(f"index {i} out of range for vocabulary of size {len(v)}")
    out = []
    for k, i in enumerate(indices):
        if i == EOS:
            break
        if i == PAD or (i == BOS and k == 0):
            continue
        out.append(v.itos[i])
    return out
