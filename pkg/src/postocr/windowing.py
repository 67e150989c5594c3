"""Splitting documents into character windows and reassembling them."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class WindowKind(str, enum.Enum):
    DISJOINT = "disjoint"
    NGRAMS = "ngrams"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class WindowSpec:
    kind: WindowKind
    size: int

    def __post_init__(self):
        object.__setattr__(self, "kind", WindowKind(self.kind))
        if self.size < 1:
            raise ValueError(f"window size must be positive, got {self.size}")

    def split(self, text: str) -> list["WindowSlice"]:
        if self.kind is WindowKind.DISJOINT:
            return split_disjoint(text, self.size)
        return split_ngrams(text, self.size)


@dataclass(frozen=True)
class WindowSlice:
    text: str
    start: int

    @property
    def length(self) -> int:
        return len(self.text)

    @property
    def end(self) -> int:
        return self.start + len(self.text)


def split_disjoint(text: str, w: int) -> list[WindowSlice]:
    if w < 1:
        raise ValueError("w must be positive")
    return [WindowSlice(text[s:s + w], s) for s in range(0, len(text), w)]


def split_ngrams(text: str, w: int) -> list[WindowSlice]:
    """All length-``w`` substrings at stride 1; one short slice if ``len(text) < w``."""
    if w < 1:
        raise ValueError("w must be positive")
    if not text:
        return []
    if len(text) < w:
        return [WindowSlice(text, 0)]
    return [WindowSlice(text[s:s + w], s) for s in range(len(text) - w + 1)]


def concat_disjoint(corrections) -> str:
    return "".join(corrections)
