"""Grid search over window kind, window size, decoding and weighting."""

from __future__ import annotations

import copy
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from postocr.corrector.base import DecodingConfig, DecodingMethod, SequenceCorrector
from postocr.ensemble import WeightingKind, correct_windows, merge_corrections
from postocr.metrics import CerReport, SummaryStats, cer_report, summarize
from postocr.textdata import AlignedTriple, Corpus
from postocr.windowing import WindowKind, WindowSpec

DEFAULT_SIZES = tuple(range(10, 101, 10))

# weighting label of disjoint cells, which never vote
NO_WEIGHTING = "none"

_KIND_ORDER = {WindowKind.DISJOINT: 0, WindowKind.NGRAMS: 1}


@dataclass(frozen=True)
class ExperimentConfig:
    kinds: tuple[WindowKind, ...] = (WindowKind.DISJOINT, WindowKind.NGRAMS)
    sizes: tuple[int, ...] = DEFAULT_SIZES
    decodings: tuple[DecodingMethod, ...] = (DecodingMethod.GREEDY, DecodingMethod.BEAM)
    weightings: tuple[WeightingKind, ...] = (
        WeightingKind.BELL, WeightingKind.TRIANGLE, WeightingKind.UNIFORM,
    )
    beam_width: int = 5
    # overrides the language-model weight of a noisy-channel corrector when set
    lm_weight: float | None = None
    max_len_factor: float = 1.5
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        def norm(values, cast):
            return tuple(sorted({cast(v) for v in values}, key=_sort_key(cast)))

        object.__setattr__(self, "kinds", norm(self.kinds, WindowKind))
        object.__setattr__(self, "sizes", norm(self.sizes, int))
        object.__setattr__(self, "decodings", norm(self.decodings, DecodingMethod))
        object.__setattr__(self, "weightings", norm(self.weightings, WeightingKind))
        for name in ("kinds", "sizes", "decodings", "weightings"):
            if not getattr(self, name):
                raise ValueError(f"ExperimentConfig.{name} must not be empty")
        if min(self.sizes) < 1:
            raise ValueError("window sizes must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def decoding_config(self, method: DecodingMethod) -> DecodingConfig:
        return DecodingConfig(method, self.beam_width, self.max_len_factor)

    def cells(self) -> list["GridCell"]:
        out = []
        for kind in self.kinds:
            for size in self.sizes:
                for dec in self.decodings:
                    if kind is WindowKind.DISJOINT:
                        out.append(GridCell(kind, size, dec, NO_WEIGHTING))
                    else:
                        out.extend(GridCell(kind, size, dec, str(wt)) for wt in self.weightings)
        return out


def _sort_key(cast):
    if cast is WindowKind:
        return _KIND_ORDER.__getitem__
    if cast is int:
        return None
    return lambda v: v.value


@dataclass(frozen=True)
class GridCell:
    kind: WindowKind
    size: int
    decoding: DecodingMethod
    weighting: str

    def __post_init__(self):
        object.__setattr__(self, "kind", WindowKind(self.kind))
        object.__setattr__(self, "decoding", DecodingMethod(self.decoding))
        object.__setattr__(self, "weighting", str(self.weighting))

    @property
    def key(self) -> tuple:
        return (_KIND_ORDER[self.kind], self.size, self.decoding.value, self.weighting)

    def label(self) -> str:
        return f"{self.kind}/{self.size}/{self.decoding}/{self.weighting}"


@dataclass
class GridResult:
    cell: GridCell
    corpus: str
    reports: list[CerReport] = field(default_factory=list)
    outputs: dict[str, str] = field(default_factory=dict)
    failures: list[tuple[str, str]] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def improvements(self) -> list[float]:
        return [r.improvement_pct for r in self.reports]

    @property
    def defined_improvements(self) -> list[float]:
        return [v for v in self.improvements if not math.isinf(v)]

    @property
    def excluded(self) -> int:
        return len(self.reports) - len(self.defined_improvements)

    @property
    def stats(self) -> SummaryStats | None:
        vals = self.defined_improvements
        return summarize(vals) if vals else None

    @property
    def mean_improvement(self) -> float:
        vals = self.defined_improvements
        return math.fsum(vals) / len(vals) if vals else math.nan


CorrectorSource = SequenceCorrector | Callable[[AlignedTriple], SequenceCorrector]


def _corrector_for(source, doc: AlignedTriple) -> SequenceCorrector:
    if hasattr(source, "correct"):
        return source
    return source(doc)


def run_grid(
    corpus: Corpus,
    corrector: CorrectorSource,
    config: ExperimentConfig,
) -> list[GridResult]:
    """Evaluate every grid cell on every document of ``corpus``.

    ``corrector`` is either one shared corrector or a factory called per
    document (used for the oracle). Each (document, kind, size, decoding) is
    corrected once and merged under every weighting. Work units run on
    ``config.workers`` threads; results are keyed and sorted, so the output
    does not depend on scheduling. A failing document is recorded in
    ``GridResult.failures`` and the cell goes on.
    """
    if config.lm_weight is not None and hasattr(corrector, "lm_weight"):
        corrector = copy.copy(corrector)
        corrector.lm_weight = float(config.lm_weight)
    cells = config.cells()
    results = {c: GridResult(c, corpus.language_tag) for c in cells}
    units = [
        (doc, kind, size, dec)
        for doc in corpus
        for kind in config.kinds
        for size in config.sizes
        for dec in config.decodings
    ]

    def run(unit):
        doc, kind, size, dec = unit
        t0 = time.perf_counter()
        spec = WindowSpec(kind, size)
        if kind is WindowKind.DISJOINT:
            targets = [NO_WEIGHTING]
        else:
            targets = [str(w) for w in config.weightings]
        try:
            corr = _corrector_for(corrector, doc)
            windows = correct_windows(spec.split(doc.ocr_raw), corr, config.decoding_config(dec))
            t_corr = time.perf_counter() - t0
            out = {}
            for wt in targets:
                t1 = time.perf_counter()
                merged = merge_corrections(
                    windows, kind, WeightingKind.UNIFORM if wt == NO_WEIGHTING else wt,
                    len(doc.ocr_raw),
                )
                out[wt] = (merged, t_corr + time.perf_counter() - t1)
            return unit, out, None
        except Exception as exc:  # recorded per document, the cell continues
            return unit, None, f"{type(exc).__name__}: {exc}"

    if config.workers == 1:
        finished = [run(u) for u in units]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            finished = list(pool.map(run, units))

    for (doc, kind, size, dec), out, err in finished:
        for wt in ([NO_WEIGHTING] if kind is WindowKind.DISJOINT else
                   [str(w) for w in config.weightings]):
            res = results[GridCell(kind, size, dec, wt)]
            if err is not None:
                res.failures.append((doc.doc_id, err))
                continue
            merged, secs = out[wt]
            res.outputs[doc.doc_id] = merged
            res.reports.append(cer_report(doc.doc_id, doc.ocr_raw, merged, doc.ground_truth))
            res.seconds += secs

    ordered = sorted(results.values(), key=lambda r: r.cell.key)
    for r in ordered:
        r.reports.sort(key=lambda rep: rep.doc_id)
        r.failures.sort()
    return ordered


def best_cell(results: Sequence[GridResult]) -> GridResult:
    """Highest mean improvement; ties go to the smaller window, then disjoint."""
    scored = [r for r in results if not math.isnan(r.mean_improvement)]
    if not scored:
        raise ValueError("no cell has a defined mean improvement")
    return min(
        scored,
        key=lambda r: (-r.mean_improvement, r.cell.size, _KIND_ORDER[r.cell.kind],
                       r.cell.decoding.value, r.cell.weighting),
    )
