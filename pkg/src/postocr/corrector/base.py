"""Window corrector interface, decoding configuration and test fixtures."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from postocr import _kernels
from postocr.textcodes import codes
from postocr.windowing import WindowSlice


class DecodingMethod(str, enum.Enum):
    GREEDY = "greedy"
    BEAM = "beam"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class DecodingConfig:
    method: DecodingMethod = DecodingMethod.BEAM
    beam_width: int = 5
    max_len_factor: float = 1.5

    def __post_init__(self):
        object.__setattr__(self, "method", DecodingMethod(self.method))
        if self.beam_width < 1:
            raise ValueError(f"beam_width must be >= 1, got {self.beam_width}")
        if not self.max_len_factor > 0:
            raise ValueError(f"max_len_factor must be positive, got {self.max_len_factor}")

    @property
    def effective_beam(self) -> int:
        return 1 if self.method is DecodingMethod.GREEDY else self.beam_width

    def max_output_len(self, n: int) -> int:
        # round() guards against 1.5 * 10 = 15.000000000000002
        return math.ceil(round(self.max_len_factor * n, 9))


@dataclass(frozen=True)
class CorrectedWindow:
    slice: WindowSlice
    output: str
    score: float = 0.0


def as_slice(window) -> WindowSlice:
    return window if isinstance(window, WindowSlice) else WindowSlice(str(window), 0)


@runtime_checkable
class SequenceCorrector(Protocol):
    """Anything that turns one window into its correction, deterministically."""

    def correct(self, window: WindowSlice, cfg: DecodingConfig) -> CorrectedWindow: ...


class IdentityCorrector:
    def correct(self, window, cfg: DecodingConfig | None = None) -> CorrectedWindow:
        window = as_slice(window)
        return CorrectedWindow(window, window.text, 0.0)


def identity_corrector() -> IdentityCorrector:
    return IdentityCorrector()


class OracleCorrector:
    """Returns the ground truth aligned to each window's span.

    The noisy document is aligned once to the ground truth. A window gets the
    truth characters of its source positions plus whatever the truth inserts
    in the slots before, between and after them, so every window that touches
    an inserted run reproduces it.
    """

    def __init__(self, ground_truth: str, document: str):
        self.document = document
        ops = _kernels.align_ops(codes(document), codes(ground_truth))
        mapped = [""] * len(document)
        inserted = [""] * (len(document) + 1)
        i = j = 0
        for op in ops:
            if op == _kernels.INSERT:
                inserted[i] += ground_truth[j]
                j += 1
            elif op == _kernels.DELETE:
                i += 1
            else:
                mapped[i] = ground_truth[j]
                i += 1
                j += 1
        self._mapped = mapped
        self._inserted = inserted

    def correct(self, window, cfg: DecodingConfig | None = None) -> CorrectedWindow:
        window = as_slice(window)
        s, e = window.start, window.end
        if self.document[s:e] != window.text:
            raise ValueError(f"window at offset {s} does not match the oracle's document")
        parts = [self._inserted[s]]
        for i in range(s, e):
            parts.append(self._mapped[i])
            parts.append(self._inserted[i + 1])
        return CorrectedWindow(window, "".join(parts), 0.0)


def oracle_corrector(ground_truth: str, document: str) -> OracleCorrector:
    return OracleCorrector(ground_truth, document)
