"""Per-window sequence correctors."""

from postocr.corrector.base import (
    CorrectedWindow,
    DecodingConfig,
    DecodingMethod,
    IdentityCorrector,
    OracleCorrector,
    SequenceCorrector,
    identity_corrector,
    oracle_corrector,
)
from postocr.corrector.channel import ConfusionModel, train_confusion_model
from postocr.corrector.charlm import END, CharLM, lm_score, train_char_lm
from postocr.corrector.noisy import NoisyChannelCorrector, correct_window, train_noisy_channel
from postocr.corrector.persist import load_model, save_model

__all__ = [
    "END",
    "CharLM",
    "ConfusionModel",
    "CorrectedWindow",
    "DecodingConfig",
    "DecodingMethod",
    "IdentityCorrector",
    "NoisyChannelCorrector",
    "OracleCorrector",
    "SequenceCorrector",
    "correct_window",
    "identity_corrector",
    "lm_score",
    "load_model",
    "oracle_corrector",
    "save_model",
    "train_char_lm",
    "train_confusion_model",
    "train_noisy_channel",
]
