"""Character confusion model: how true text turns into OCR output."""

from __future__ import annotations

import numpy as np

from postocr import _kernels
from postocr.errors import EmptyTraining
from postocr.textcodes import alphabet_codes, to_ids


class ConfusionModel:
    """Add-k smoothed substitution, deletion and insertion probabilities.

    Symbols are the alphabet characters (sorted by code point) followed by an
    unknown-character bucket at index ``unk``. For each true symbol ``t`` the
    row ``sub[t, :]`` together with ``dele[t]`` is a distribution; ``ins``
    together with ``no_insertion`` is the distribution over what an observed
    character is: a specific spurious character, or a genuine emission.
    """

    def __init__(self, chars, k: float, sub_counts, del_counts, ins_counts, kept_count: int):
        if not k > 0:
            raise ValueError("smoothing constant k must be positive")
        self.chars = tuple(sorted(chars))
        self.k = float(k)
        self.unk = len(self.chars)
        n = self.unk + 1
        self._codes = alphabet_codes(self.chars)
        self._index = {c: i for i, c in enumerate(self.chars)}

        self.sub_counts = np.asarray(sub_counts, dtype=np.int64).reshape(n, n)
        self.del_counts = np.asarray(del_counts, dtype=np.int64).reshape(n)
        self.ins_counts = np.asarray(ins_counts, dtype=np.int64).reshape(n)
        self.kept_count = int(kept_count)

        row_total = self.sub_counts.sum(axis=1) + self.del_counts + self.k * (n + 1)
        self.sub = np.log((self.sub_counts + self.k) / row_total[:, None])
        self.dele = np.log((self.del_counts + self.k) / row_total)
        ins_total = self.ins_counts.sum() + self.kept_count + self.k * (n + 1)
        self.ins = np.log((self.ins_counts + self.k) / ins_total)
        self.no_insertion = float(np.log((self.kept_count + self.k) / ins_total))

    @property
    def n_symbols(self) -> int:
        return self.unk + 1

    def ids(self, text: str) -> np.ndarray:
        return to_ids(text, self._codes, self.unk)

    def symbol_id(self, ch: str) -> int:
        return self._index.get(ch, self.unk)

    def sub_logprob(self, true_char: str, observed_char: str) -> float:
        return float(self.sub[self.symbol_id(true_char), self.symbol_id(observed_char)])

    def del_logprob(self, true_char: str) -> float:
        return float(self.dele[self.symbol_id(true_char)])

    def ins_logprob(self, observed_char: str) -> float:
        return float(self.ins[self.symbol_id(observed_char)])

    def to_dict(self) -> dict:
        return {
            "chars": "".join(self.chars),
            "k": self.k,
            "sub_counts": self.sub_counts.tolist(),
            "del_counts": self.del_counts.tolist(),
            "ins_counts": self.ins_counts.tolist(),
            "kept_count": self.kept_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConfusionModel":
        return cls(d["chars"], d["k"], d["sub_counts"], d["del_counts"], d["ins_counts"],
                   d["kept_count"])


def _flatten(texts, model_codes, unk):
    ids = [to_ids(t, model_codes, unk) for t in texts]
    off = np.zeros(len(ids) + 1, dtype=np.int64)
    np.cumsum([a.shape[0] for a in ids], out=off[1:])
    flat = np.concatenate(ids) if ids else np.zeros(0, dtype=np.int64)
    return flat, off


def train_confusion_model(pairs, k: float = 0.1) -> ConfusionModel:
    """Count channel events over minimal edit alignments of (source, target) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyTraining("no training pairs")
    chars = sorted(set().union(*(set(p.source) | set(p.target) for p in pairs)))
    model_codes = alphabet_codes(chars)
    unk = len(chars)
    src, src_off = _flatten([p.source for p in pairs], model_codes, unk)
    tgt, tgt_off = _flatten([p.target for p in pairs], model_codes, unk)
    sub, dele, ins, kept = _kernels.channel_counts(src, src_off, tgt, tgt_off, unk + 1)
    return ConfusionModel(chars, k, sub, dele, ins, int(kept))
