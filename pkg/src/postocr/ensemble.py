"""Merging overlapping window corrections by weighted voting.

Every corrected window is aligned back to its source span. Each source
position then receives one vote per covering window (the character the
window turned it into, or a deletion) and each gap between source positions
receives one vote per covering window (the string the window inserted there,
or nothing). Votes are weighted by where the voting character sits in its
window; the heaviest candidate wins each position and each gap.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import Executor
from typing import NamedTuple, Sequence

import numpy as np

from postocr import _kernels
from postocr.corrector.base import CorrectedWindow, DecodingConfig, SequenceCorrector
from postocr.errors import DomainError, NoCoverage, WindowFailure
from postocr.textcodes import codes, from_codes
from postocr.windowing import WindowKind, WindowSlice, WindowSpec, concat_disjoint

# tallies closer than this are ties
TIE_EPS = 1e-9

_CODE_SPAN = 0x110001


class WeightingKind(str, enum.Enum):
    BELL = "bell"
    TRIANGLE = "triangle"
    UNIFORM = "uniform"

    def __str__(self) -> str:
        return self.value


def weight(kind: WeightingKind | str, p: int, w: int) -> float:
    """Vote weight of the character at 1-based position ``p`` of a length-``w`` window."""
    kind = WeightingKind(kind)
    if not 1 <= p <= w:
        raise DomainError(f"position {p} outside window of length {w}")
    m = (w + 1) // 2
    if kind is WeightingKind.BELL:
        return math.exp(-((1 - p / m) ** 2))
    if kind is WeightingKind.TRIANGLE:
        return 1 - abs(m - p) / (2 * m)
    return 1.0


def weights(kind: WeightingKind | str, p: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Vectorized :func:`weight`; ``p`` and ``w`` broadcast together."""
    kind = WeightingKind(kind)
    p = np.asarray(p, dtype=np.float64)
    w = np.asarray(w)
    if np.any(p < 1) or np.any(p > w):
        raise DomainError("position outside its window")
    m = (w + 1) // 2
    if kind is WeightingKind.BELL:
        return np.exp(-((1 - p / m) ** 2))
    if kind is WeightingKind.TRIANGLE:
        return 1 - np.abs(m - p) / (2 * m)
    return np.ones(np.broadcast(p, w).shape)


class AlignmentEvent(NamedTuple):
    """One step of a window-to-output alignment.

    ``op`` is KEEP, SUBST, DELETE or INSERT. ``pos`` is the 1-based source
    position; for INSERT it is the position the insertion follows (0 = before
    the first character). ``char`` is the output character ('' for DELETE).
    """

    op: str
    pos: int
    char: str


def align_to_source(window_text: str, output: str) -> list[AlignmentEvent]:
    ops = _kernels.align_ops(codes(window_text), codes(output))
    events = []
    i = j = 0
    for op in ops:
        if op == _kernels.MATCH:
            events.append(AlignmentEvent("KEEP", i + 1, output[j]))
            i += 1
            j += 1
        elif op == _kernels.SUBST:
            events.append(AlignmentEvent("SUBST", i + 1, output[j]))
            i += 1
            j += 1
        elif op == _kernels.DELETE:
            events.append(AlignmentEvent("DELETE", i + 1, ""))
            i += 1
        else:
            events.append(AlignmentEvent("INSERT", i, output[j]))
            j += 1
    return events


def _position_winners(pos, cand, w, dist, doc_len):
    """Winning candidate code (-1 = delete) for every source position."""
    key = pos * _CODE_SPAN + (cand + 1)
    uniq, inv = np.unique(key, return_inverse=True)
    total = np.bincount(inv, weights=w, minlength=uniq.shape[0])
    nearest = np.full(uniq.shape[0], np.iinfo(np.int64).max)
    np.minimum.at(nearest, inv, dist)
    gpos = uniq // _CODE_SPAN
    gcand = uniq % _CODE_SPAN - 1

    first = np.flatnonzero(np.r_[True, gpos[1:] != gpos[:-1]])
    covered = gpos[first]
    if covered.shape[0] != doc_len:
        missing = np.setdiff1d(np.arange(doc_len), covered)
        raise NoCoverage(int(missing[0]))
    size = np.diff(np.r_[first, uniq.shape[0]])
    tied = total >= np.repeat(np.maximum.reduceat(total, first), size) - TIE_EPS
    order = np.lexsort((gcand, nearest, ~tied, gpos))
    return gcand[order[first]]


def vote_merge(
    corrections: Sequence[CorrectedWindow],
    weighting: WeightingKind | str,
    doc_len: int,
) -> str:
    """Merge window corrections of one document into a single string.

    Ties between equally heavy candidates go to the candidate backed by the
    window whose center is nearest, then to the smallest code point, with
    deletion and no-insertion ranking first.
    """
    weighting = WeightingKind(weighting)
    wins = sorted(
        (c for c in corrections if c.slice.length > 0),
        key=lambda c: (c.slice.start, c.slice.length, c.output),
    )
    if doc_len == 0:
        return ""
    if not wins:
        raise NoCoverage(0)
    n = len(wins)
    starts = np.array([c.slice.start for c in wins], dtype=np.int64)
    lens = np.array([c.slice.length for c in wins], dtype=np.int64)
    src_off = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(lens, out=src_off[1:])
    out_off = np.zeros(n + 1, dtype=np.int64)
    np.cumsum([len(c.output) for c in wins], out=out_off[1:])
    out = codes("".join(c.output for c in wins))
    pos_out, slot_lo, slot_hi = _kernels.align_batch(
        codes("".join(c.slice.text for c in wins)), src_off, out, out_off
    )

    win = np.repeat(np.arange(n), lens)
    local = np.arange(src_off[-1]) - src_off[:-1][win]
    pos = starts[win] + local
    if pos.max() >= doc_len or starts.min() < 0:
        raise ValueError("a window extends beyond the document")
    center2 = 2 * starts + lens - 1
    w = weights(weighting, local + 1, lens[win])
    winners = _position_winners(pos, pos_out, w, np.abs(2 * pos - center2[win]), doc_len)

    # insertion slots: sparse, resolved in Python
    slot_base = src_off[:-1] + np.arange(n)
    inserted: dict[int, dict[int, str]] = {}
    for s in np.flatnonzero(slot_hi > slot_lo):
        wi = int(np.searchsorted(slot_base, s, side="right") - 1)
        g = int(starts[wi] + s - slot_base[wi])
        inserted.setdefault(g, {})[wi] = from_codes(out[slot_lo[s]:slot_hi[s]])
    slot_winner: dict[int, str] = {}
    for g in sorted(inserted):
        tally: dict[str, list] = {}
        for wi in np.flatnonzero((starts <= g) & (starts + lens >= g)):
            q = g - starts[wi]
            vote = inserted[g].get(int(wi), "")
            wt = weight(weighting, max(int(q), 1), int(lens[wi]))
            d = abs(2 * g - 1 - int(center2[wi]))
            entry = tally.setdefault(vote, [0.0, d])
            entry[0] += wt
            entry[1] = min(entry[1], d)
        top = max(v[0] for v in tally.values())
        best = min(
            (d, cand) for cand, (t, d) in tally.items() if t >= top - TIE_EPS
        )[1]
        if best:
            slot_winner[g] = best

    pieces = []
    prev = 0
    for g in sorted(slot_winner):
        seg = winners[prev:g]
        pieces.append(from_codes(seg[seg >= 0]))
        pieces.append(slot_winner[g])
        prev = g
    seg = winners[prev:]
    pieces.append(from_codes(seg[seg >= 0]))
    return "".join(pieces)


def correct_windows(
    slices: Sequence[WindowSlice],
    corrector: SequenceCorrector,
    cfg: DecodingConfig,
    executor: Executor | None = None,
) -> list[CorrectedWindow]:
    """Correct every slice; results come back in slice order."""

    def run(sl: WindowSlice) -> CorrectedWindow:
        try:
            return corrector.correct(sl, cfg)
        except Exception as exc:
            raise WindowFailure(sl.start, exc) from exc

    if executor is None:
        return [run(sl) for sl in slices]
    return list(executor.map(run, slices, chunksize=64))


def merge_corrections(
    corrections: Sequence[CorrectedWindow],
    kind: WindowKind | str,
    weighting: WeightingKind | str,
    doc_len: int,
) -> str:
    if WindowKind(kind) is WindowKind.DISJOINT:
        ordered = sorted(corrections, key=lambda c: c.slice.start)
        return concat_disjoint(c.output for c in ordered)
    return vote_merge(corrections, weighting, doc_len)


def correct_document(
    text: str,
    corrector: SequenceCorrector,
    spec: WindowSpec,
    cfg: DecodingConfig | None = None,
    weighting: WeightingKind | str = WeightingKind.UNIFORM,
    executor: Executor | None = None,
) -> str:
    cfg = cfg or DecodingConfig()
    corrections = correct_windows(spec.split(text), corrector, cfg, executor)
    return merge_corrections(corrections, spec.kind, weighting, len(text))
