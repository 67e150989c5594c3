"""Noisy-channel window corrector: confusion model plus character LM."""

from __future__ import annotations

import numpy as np

from postocr import _kernels
from postocr.corrector.base import CorrectedWindow, DecodingConfig, as_slice
from postocr.corrector.channel import ConfusionModel, train_confusion_model
from postocr.corrector.charlm import CharLM, train_char_lm
from postocr.textcodes import codes, from_codes

DEFAULT_LM_WEIGHT = 1.0
DEFAULT_MAX_DELETIONS = 2


class NoisyChannelCorrector:
    """Decodes the true string ``t`` maximizing ``log P(obs | t) + lm_weight * log P(t)``.

    ``P(obs | t)`` is taken over the single best derivation: every observed
    character is either emitted by one true character (substitution, possibly
    the identity) or spurious (insertion), and up to ``max_deletions`` true
    characters may be emitted as nothing before each observed character and at
    the end.
    """

    def __init__(
        self,
        channel: ConfusionModel,
        lm: CharLM,
        lm_weight: float = DEFAULT_LM_WEIGHT,
        max_deletions: int = DEFAULT_MAX_DELETIONS,
    ):
        if max_deletions < 0:
            raise ValueError("max_deletions must be >= 0")
        self.channel = channel
        self.lm = lm
        self.lm_weight = float(lm_weight)
        self.max_deletions = int(max_deletions)
        self._chan2lm = np.array([lm.symbol_id(c) for c in channel.chars], dtype=np.int64)
        self._chan_chars = np.array([ord(c) for c in channel.chars], dtype=np.int64)

    def correct(self, window, cfg: DecodingConfig | None = None) -> CorrectedWindow:
        window = as_slice(window)
        cfg = cfg or DecodingConfig()
        if not window.text:
            return CorrectedWindow(window, "", 0.0)
        lm = self.lm
        out_codes, score = _kernels.decode_window(
            self.channel.ids(window.text), codes(window.text), self._chan_chars,
            self.channel.sub, self.channel.dele, self.channel.ins,
            np.concatenate([self._chan2lm, lm.ids(window.text)]),
            lm.context_keys, lm.table, lm.order, lm.base, lm.bos, lm.end,
            self.lm_weight, cfg.effective_beam, cfg.max_output_len(len(window.text)),
            self.max_deletions,
        )
        return CorrectedWindow(window, from_codes(out_codes), float(score))

    def channel_score(self, observed: str, output: str) -> float:
        return float(
            _kernels.channel_viterbi(
                self.channel.ids(observed), codes(observed),
                self.channel.ids(output), codes(output),
                self.channel.sub, self.channel.dele, self.channel.ins, self.max_deletions,
            )
        )

    def score(self, observed: str, output: str) -> float:
        """Log-score of ``output`` as the correction of ``observed``."""
        return self.channel_score(observed, output) + self.lm_weight * self.lm.score(output)


def correct_window(model: NoisyChannelCorrector, window_text, cfg: DecodingConfig) -> CorrectedWindow:
    return model.correct(window_text, cfg)


def train_noisy_channel(
    pairs,
    n_lm: int = 5,
    k: float = 0.1,
    lm_weight: float = DEFAULT_LM_WEIGHT,
    max_deletions: int = DEFAULT_MAX_DELETIONS,
) -> NoisyChannelCorrector:
    """Fit both models on training pairs; the language model sees the targets only."""
    pairs = list(pairs)
    return NoisyChannelCorrector(
        train_confusion_model(pairs, k),
        train_char_lm([p.target for p in pairs], n_lm, k),
        lm_weight=lm_weight,
        max_deletions=max_deletions,
    )
