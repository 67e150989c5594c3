"""Post-OCR document correction with overlapping character windows.

A document is split into disjoint windows or character n-grams, every window
is corrected by a :class:`~postocr.corrector.SequenceCorrector`, and the
partial corrections are concatenated (disjoint) or merged by weighted voting
(n-grams).
"""

from postocr.corrector import (
    CorrectedWindow,
    DecodingConfig,
    IdentityCorrector,
    NoisyChannelCorrector,
    OracleCorrector,
    SequenceCorrector,
)
from postocr.ensemble import WeightingKind, correct_document, vote_merge, weight
from postocr.metrics import cer, improvement, levenshtein, summarize
from postocr.textdata import AlignedTriple, Corpus, TrainingPair, load_corpus
from postocr.windowing import WindowKind, WindowSlice, WindowSpec

__version__ = "0.1.0"

__all__ = [
    "AlignedTriple",
    "CorrectedWindow",
    "Corpus",
    "DecodingConfig",
    "IdentityCorrector",
    "NoisyChannelCorrector",
    "OracleCorrector",
    "SequenceCorrector",
    "TrainingPair",
    "WeightingKind",
    "WindowKind",
    "WindowSlice",
    "WindowSpec",
    "cer",
    "correct_document",
    "improvement",
    "levenshtein",
    "load_corpus",
    "summarize",
    "vote_merge",
    "weight",
]
