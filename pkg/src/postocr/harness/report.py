"""Writing grid results to CSV, markdown and corrected text files.

Layout under ``out_dir``::

    <corpus>/per_document.csv
    <corpus>/summary.csv
    <corpus>/corrected/<kind>-<size>-<decoding>-<weighting>/<doc_id>.txt
    grouped_by_kind.csv, grouped_by_decoding.csv,
    grouped_by_weighting.csv, grouped_by_size.csv
    best.md
    timings.json

Everything except ``timings.json`` is a pure function of the results, so two
runs of the same grid produce byte-identical files. Floats are written with
``repr``; an undefined improvement (a perfect document made worse) is ``-inf``.
"""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

from postocr.harness.grid import GridResult, best_cell
from postocr.metrics import SummaryStats, aggregate, summarize
from postocr.windowing import WindowKind

PER_DOCUMENT_HEADER = (
    "doc_id", "kind", "size", "decoding", "weighting", "cer_before", "cer_after", "improvement",
)
CELL_COLUMNS = ("kind", "size", "decoding", "weighting")
SUMMARY_EXTRA = ("excluded", "failures", "mean_cer_before", "mean_cer_after", "ratio_of_means")
GROUP_AXES = ("kind", "decoding", "weighting", "size")


def _num(x) -> str:
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _cell_row(r: GridResult) -> list[str]:
    c = r.cell
    return [str(c.kind), str(c.size), str(c.decoding), c.weighting]


def _stats_row(stats: SummaryStats | None) -> list[str]:
    if stats is None:
        return ["0"] + [""] * (len(SummaryStats.FIELDS) - 1)
    return [_num(v) for v in stats.as_row()]


def cell_dirname(r: GridResult) -> str:
    c = r.cell
    return f"{c.kind}-{c.size}-{c.decoding}-{c.weighting}"


def _by_corpus(results: Sequence[GridResult]) -> dict[str, list[GridResult]]:
    groups: dict[str, list[GridResult]] = defaultdict(list)
    for r in results:
        groups[r.corpus].append(r)
    return {k: sorted(v, key=lambda r: r.cell.key) for k, v in sorted(groups.items())}


def write_corpus_report(results: Sequence[GridResult], out_dir: Path) -> None:
    rows = []
    summary = []
    for r in results:
        cell = _cell_row(r)
        for rep in r.reports:
            rows.append([rep.doc_id, *cell, _num(rep.cer_before), _num(rep.cer_after),
                         _num(rep.improvement_pct)])
        extra = [str(r.excluded), str(len(r.failures))]
        if r.reports:
            agg = aggregate(r.reports)
            extra += [_num(agg.mean_cer_before), _num(agg.mean_cer_after),
                      _num(agg.ratio_of_means)]
        else:
            extra += ["", "", ""]
        summary.append([*cell, *_stats_row(r.stats), *extra])
        for doc_id, text in sorted(r.outputs.items()):
            _write_text(out_dir / "corrected" / cell_dirname(r) / f"{doc_id}.txt", text)
    _write_csv(out_dir / "per_document.csv", PER_DOCUMENT_HEADER, rows)
    _write_csv(out_dir / "summary.csv", CELL_COLUMNS + SummaryStats.FIELDS + SUMMARY_EXTRA,
               summary)


def grouped_stats(results: Sequence[GridResult], axis: str) -> list[tuple[str, SummaryStats]]:
    """Statistics of per-document improvements pooled by one grid axis.

    The weighting axis only pools n-gram cells, since disjoint windows do not vote.
    """
    pools: dict = defaultdict(list)
    for r in results:
        if axis == "weighting" and r.cell.kind is not WindowKind.NGRAMS:
            continue
        pools[getattr(r.cell, axis)].extend(r.defined_improvements)

    def order(key):
        if axis == "kind":
            return 0 if key is WindowKind.DISJOINT else 1
        return key if axis == "size" else str(key)

    return [(str(k), summarize(v)) for k, v in sorted(pools.items(), key=lambda kv: order(kv[0]))
            if v]


def best_table(results: Sequence[GridResult]) -> str:
    lines = [
        "| corpus | best approach | mean CER before | mean CER after | % improvement "
        "| mean per-document improvement |",
        "|---|---|---|---|---|---|",
    ]
    for corpus, rs in _by_corpus(results).items():
        try:
            best = best_cell(rs)
        except ValueError:
            lines.append(f"| {corpus} | n/a | | | | |")
            continue
        agg = aggregate(best.reports)
        c = best.cell
        approach = f"{c.kind} w={c.size} {c.decoding}"
        if c.kind is WindowKind.NGRAMS:
            approach += f" {c.weighting}"
        lines.append(
            f"| {corpus} | {approach} | {agg.mean_cer_before:.2f} | {agg.mean_cer_after:.2f} "
            f"| {agg.ratio_of_means:.2f} | {agg.mean_improvement:.2f} |"
        )
    return "\n".join(lines) + "\n"


def emit_report(results: Sequence[GridResult], out_dir) -> Path:
    if not results:
        raise ValueError("no results to report")
    out = Path(out_dir)
    per_corpus = _by_corpus(results)
    for corpus, rs in per_corpus.items():
        write_corpus_report(rs, out / (corpus or "corpus"))
    ordered = [r for rs in per_corpus.values() for r in rs]
    for axis in GROUP_AXES:
        _write_csv(
            out / f"grouped_by_{axis}.csv",
            (axis,) + SummaryStats.FIELDS,
            ([key, *_stats_row(st)] for key, st in grouped_stats(ordered, axis)),
        )
    _write_text(out / "best.md", best_table(ordered))
    timings = {
        corpus: {cell_dirname(r): r.seconds for r in rs} for corpus, rs in per_corpus.items()
    }
    _write_text(out / "timings.json", json.dumps(timings, indent=1, sort_keys=True) + "\n")
    return out


def read_per_document(path) -> list[dict]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def mean_of_column(rows: Sequence[dict], column: str) -> float:
    vals = [float(r[column]) for r in rows]
    vals = [v for v in vals if not math.isinf(v)]
    return math.fsum(vals) / len(vals) if vals else math.nan
