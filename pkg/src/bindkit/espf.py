"""Substructure-partition tokenization for the transformer encoders.

A byte-pair-style vocabulary is learned from a corpus of SMILES or protein
strings: starting from single symbols, the most frequent adjacent pair is
merged until the vocabulary reaches its target size or no pair repeats.
SMILES are pre-split so the two-letter atoms Cl and Br stay atomic.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

PAD_ID = 0
UNK_ID = 1

DEFAULT_VOCAB_SIZE = {"drug": 2048, "protein": 4096}
DEFAULT_MAX_TOKENS = {"drug": 50, "protein": 545}

_SMILES_SPLIT = re.compile(r"Cl|Br|.")


class EmptyCorpus(ValueError):
    pass


class VocabError(ValueError):
    pass


@dataclass
class SubwordVocab:
    alphabet: str  # "drug" | "protein"
    base_symbols: list[str]
    merges: list[tuple[str, str]] = field(default_factory=list)
    max_tokens: int = 50
    tokens: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.tokens:
            self.tokens = {"<pad>": PAD_ID, "<unk>": UNK_ID}
            for sym in self.base_symbols:
                self.tokens[sym] = len(self.tokens)
            for left, right in self.merges:
                merged = left + right
                if merged not in self.tokens:
                    self.tokens[merged] = len(self.tokens)

    def __len__(self):
        return len(self.tokens)


@dataclass
class TokenSeq:
    ids: np.ndarray  # (max_tokens,) int64, padded with PAD_ID at the tail
    mask: np.ndarray  # (max_tokens,) bool, True at real tokens


def _split_symbols(s: str, alphabet: str) -> list[str]:
    if alphabet == "drug":
        return _SMILES_SPLIT.findall(s)
    return list(s)


def train_vocab(corpus: list[str], target_size: int, alphabet: str = "protein",
                max_tokens: int | None = None) -> SubwordVocab:
    """Learn merge rules from a corpus.

    Merging stops once `target_size` content tokens exist (base symbols plus
    merge outputs) or when no adjacent pair occurs at least twice. Ties on
    frequency break toward the lexicographically smallest pair.
    """
    if not corpus or all(not s for s in corpus):
        raise EmptyCorpus("cannot train a vocabulary on an empty corpus")
    if alphabet not in ("drug", "protein"):
        raise VocabError(f"alphabet must be drug or protein, got {alphabet!r}")
    if max_tokens is None:
        max_tokens = DEFAULT_MAX_TOKENS[alphabet]

    words = [_split_symbols(s, alphabet) for s in corpus if s]
    base = sorted({sym for word in words for sym in word})
    if target_size < len(base):
        raise VocabError(f"target size {target_size} below alphabet size {len(base)}")

    merges: list[tuple[str, str]] = []
    vocab_count = len(base)
    while vocab_count < target_size:
        pairs = Counter()
        for word in words:
            for a, b in zip(word, word[1:]):
                pairs[(a, b)] += 1
        if not pairs:
            break
        best = min(pairs.items(), key=lambda kv: (-kv[1], kv[0]))
        if best[1] < 2:
            break
        left, right = best[0]
        merges.append((left, right))
        merged = left + right
        vocab_count += 1
        for wi, word in enumerate(words):
            words[wi] = _apply_merge(word, left, right, merged)

    return SubwordVocab(alphabet=alphabet, base_symbols=base, merges=merges,
                        max_tokens=max_tokens)


def _apply_merge(word: list[str], left: str, right: str, merged: str) -> list[str]:
    out = []
    i = 0
    while i < len(word):
        if i + 1 < len(word) and word[i] == left and word[i + 1] == right:
            out.append(merged)
            i += 2
        else:
            out.append(word[i])
            i += 1
    return out


def segment(vocab: SubwordVocab, s: str) -> list[str]:
    """Token strings for `s` with merges applied in training order.

    Concatenating the result reproduces the input exactly (the partition
    property the fingerprint name refers to).
    """
    word = _split_symbols(s, vocab.alphabet)
    for left, right in vocab.merges:
        word = _apply_merge(word, left, right, left + right)
    return word


def tokenize(vocab: SubwordVocab, s: str) -> TokenSeq:
    """Fixed-length id sequence: segmented tokens, truncated to max_tokens,
    padded at the tail; unknown symbols map to the unknown id."""
    pieces = segment(vocab, s)[:vocab.max_tokens]
    ids = np.full(vocab.max_tokens, PAD_ID, dtype=np.int64)
    mask = np.zeros(vocab.max_tokens, dtype=bool)
    for i, piece in enumerate(pieces):
        ids[i] = vocab.tokens.get(piece, UNK_ID)
        mask[i] = True
    return TokenSeq(ids=ids, mask=mask)


def save_vocab(vocab: SubwordVocab, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#espf\t{vocab.alphabet}\t{len(vocab)}\t{vocab.max_tokens}\n")
        fh.write("\t".join(vocab.base_symbols) + "\n")
        for left, right in vocab.merges:
            fh.write(f"{left}\t{right}\n")


def load_vocab(path) -> SubwordVocab:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if len(header) != 4 or header[0] != "#espf":
            raise VocabError(f"{path}: not an espf vocabulary file")
        alphabet, _, max_tokens = header[1], header[2], int(header[3])
        base_line = fh.readline().rstrip("\n")
        base = base_line.split("\t") if base_line else []
        merges = []
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            left, right = line.split("\t")
            merges.append((left, right))
    return SubwordVocab(alphabet=alphabet, base_symbols=base, merges=merges,
                        max_tokens=max_tokens)
