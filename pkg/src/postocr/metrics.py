"""Character error rate, relative improvement and descriptive statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from postocr import _kernels
from postocr.errors import EmptyInput
from postocr.textcodes import codes

# improvement() of a document that was perfect and got worse
UNDEFINED_WORSE = float("-inf")


def levenshtein(a: str, b: str) -> int:
    return int(_kernels.levenshtein_codes(codes(a), codes(b)))


def cer(hypothesis: str, reference: str) -> float:
    """Character error rate in percent."""
    return 100.0 * levenshtein(hypothesis, reference) / max(1, len(reference))


def improvement(cer_before: float, cer_after: float) -> float:
    """Relative CER reduction in percent.

    Returns 0 when both rates are 0 and :data:`UNDEFINED_WORSE` when a perfect
    document got worse.
    """
    if cer_before < 0:
        raise ValueError("cer_before must be non-negative")
    if cer_before == 0:
        return 0.0 if cer_after == 0 else UNDEFINED_WORSE
    return 100.0 * (cer_before - cer_after) / cer_before


@dataclass(frozen=True)
class CerReport:
    doc_id: str
    cer_before: float
    cer_after: float

    @property
    def improvement_pct(self) -> float:
        return improvement(self.cer_before, self.cer_after)


def cer_report(doc_id: str, noisy: str, corrected: str, reference: str) -> CerReport:
    return CerReport(doc_id, cer(noisy, reference), cer(corrected, reference))


@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    std: float
    min: float
    p25: float
    p50: float
    p75: float
    max: float

    FIELDS = ("count", "mean", "std", "min", "p25", "p50", "p75", "max")

    def as_row(self) -> list:
        return [getattr(self, f) for f in self.FIELDS]


def summarize(values: Iterable[float]) -> SummaryStats:
    """Sample statistics; quartiles interpolate linearly between closest ranks."""
    x = np.asarray(list(values), dtype=np.float64)
    if x.size == 0:
        raise EmptyInput("cannot summarize an empty list")
    p25, p50, p75 = np.percentile(x, [25, 50, 75])
    return SummaryStats(
        count=int(x.size),
        mean=float(x.mean()),
        std=float(x.std(ddof=1)) if x.size > 1 else 0.0,
        min=float(x.min()),
        p25=float(p25),
        p50=float(p50),
        p75=float(p75),
        max=float(x.max()),
    )


@dataclass(frozen=True)
class Aggregate:
    """Corpus-level view of per-document reports.

    ``mean_improvement`` averages per-document improvements (documents with
    an undefined improvement are left out and counted in ``excluded``);
    ``ratio_of_means`` is the improvement of the mean CERs.
    """

    n_documents: int
    mean_cer_before: float
    mean_cer_after: float
    mean_improvement: float
    ratio_of_means: float
    excluded: int


def aggregate(reports: Sequence[CerReport]) -> Aggregate:
    if not reports:
        raise EmptyInput("no reports to aggregate")
    before = float(np.mean([r.cer_before for r in reports]))
    after = float(np.mean([r.cer_after for r in reports]))
    imps = [r.improvement_pct for r in reports]
    defined = [v for v in imps if not math.isinf(v)]
    return Aggregate(
        n_documents=len(reports),
        mean_cer_before=before,
        mean_cer_after=after,
        mean_improvement=float(np.mean(defined)) if defined else math.nan,
        ratio_of_means=improvement(before, after),
        excluded=len(imps) - len(defined),
    )
