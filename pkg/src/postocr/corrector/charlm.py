"""Character n-gram language model with add-k smoothing."""

from __future__ import annotations

import numpy as np

from postocr import _kernels
from postocr.errors import EmptyTraining
from postocr.textcodes import alphabet_codes, to_ids

END = None  # pass as ``symbol`` to :meth:`CharLM.logprob` for the end-of-text symbol


class CharLM:
    """Order-``n`` character model over the training alphabet.

    Output symbols are the training characters (sorted by code point), an
    unknown-character bucket and an end symbol; contexts are the previous
    ``n - 1`` symbols padded with a begin symbol. Every context, seen or not,
    gives ``P(s | ctx) = (c(ctx, s) + k) / (c(ctx) + k * V)``.
    """

    def __init__(self, chars, order: int, k: float, ngram_keys, ngram_counts):
        if order < 1:
            raise ValueError("order must be >= 1")
        if not k > 0:
            raise ValueError("smoothing constant k must be positive")
        self.chars = tuple(sorted(chars))
        self.order = int(order)
        self.k = float(k)
        self.unk = len(self.chars)
        self.end = self.unk + 1
        self.bos = self.unk + 2
        self.vocab_size = self.unk + 2
        self.base = self.unk + 3
        if float(self.base) ** (self.order - 1) * self.vocab_size >= 2.0 ** 62:
            raise ValueError(f"order {order} too large for an alphabet of {len(self.chars)}")
        self._codes = alphabet_codes(self.chars)
        self._index = {c: i for i, c in enumerate(self.chars)}

        self.ngram_keys = np.asarray(ngram_keys, dtype=np.int64)
        self.ngram_counts = np.asarray(ngram_counts, dtype=np.int64)
        ctx = self.ngram_keys // self.vocab_size
        sym = self.ngram_keys % self.vocab_size
        self.context_keys, inv = np.unique(ctx, return_inverse=True)
        counts = np.zeros((self.context_keys.shape[0] + 1, self.vocab_size))
        np.add.at(counts, (inv, sym), self.ngram_counts)
        totals = counts.sum(axis=1, keepdims=True)
        self.table = np.log((counts + self.k) / (totals + self.k * self.vocab_size))

    def ids(self, text: str) -> np.ndarray:
        return to_ids(text, self._codes, self.unk)

    def symbol_id(self, ch: str) -> int:
        return self._index.get(ch, self.unk)

    def context_key(self, context: str) -> int:
        """Key of the context formed by the last ``n - 1`` characters of ``context``."""
        if self.order == 1:
            return 0
        syms = [self.bos] * (self.order - 1) + [self.symbol_id(c) for c in context]
        key = 0
        for s in syms[-(self.order - 1):]:
            key = key * self.base + s
        return key

    def logprob(self, symbol, context: str = "") -> float:
        """``log P(symbol | context)``; ``symbol=None`` means the end symbol."""
        sym = self.end if symbol is END else self.symbol_id(symbol)
        row = _kernels._lm_row(self.context_keys, self.context_key(context))
        return float(self.table[row, sym])

    def score(self, text: str) -> float:
        return float(
            _kernels.lm_score_ids(
                self.ids(text), self.context_keys, self.table,
                self.order, self.base, self.bos, self.end,
            )
        )

    def to_dict(self) -> dict:
        return {
            "chars": "".join(self.chars),
            "order": self.order,
            "k": self.k,
            "ngram_keys": self.ngram_keys.tolist(),
            "ngram_counts": self.ngram_counts.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CharLM":
        return cls(d["chars"], d["order"], d["k"], d["ngram_keys"], d["ngram_counts"])


def train_char_lm(texts, n_lm: int = 5, k: float = 0.1) -> CharLM:
    texts = list(texts)
    if not texts:
        raise EmptyTraining("no texts to train the language model on")
    if n_lm < 1:
        raise ValueError("n_lm must be >= 1")
    chars = sorted(set().union(*map(set, texts)))
    vocab = len(chars) + 2
    base = len(chars) + 3
    bos, end = len(chars) + 2, len(chars) + 1
    codes_ = alphabet_codes(chars)

    keys = []
    for text in texts:
        ids = to_ids(text, codes_, len(chars))
        padded = np.concatenate(
            [np.full(n_lm - 1, bos, dtype=np.int64), ids, np.array([end], dtype=np.int64)]
        )
        n = ids.shape[0] + 1
        ctx = np.zeros(n, dtype=np.int64)
        for j in range(n_lm - 1):
            ctx = ctx * base + padded[j:j + n]
        keys.append(ctx * vocab + padded[n_lm - 1:])
    uniq, counts = np.unique(np.concatenate(keys), return_counts=True)
    return CharLM(chars, n_lm, k, uniq, counts)


def lm_score(lm: CharLM, s: str) -> float:
    return lm.score(s)
