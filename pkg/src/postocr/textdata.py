"""Aligned OCR corpora: parsing, padding removal, training pairs and splits.

A corpus document holds three lines, as distributed for the ICDAR 2019
post-OCR competition::

    [OCR_toInput] raw OCR output
    [OCR_aligned] OCR output with '@' padding
    [GS_aligned] gold standard with '@' padding

The two aligned lines have equal length; ``@`` marks a character that exists
on the other side only and ``#`` marks gold-standard regions that are
unreadable.
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from postocr.errors import LengthMismatch, MissingTag, ParseError, TooFewDocuments

log = logging.getLogger(__name__)

PAD = "@"
UNCERTAIN = "#"
TAGS = ("OCR_toInput", "OCR_aligned", "GS_aligned")

_TAG_RE = re.compile(r"^\[\s*(OCR_toInput|OCR_aligned|GS_aligned)\s*\]")


@dataclass(frozen=True)
class AlignedTriple:
    ocr_raw: str
    ocr_aligned: str
    gs_aligned: str
    doc_id: str = ""

    def __post_init__(self):
        if len(self.ocr_aligned) != len(self.gs_aligned):
            raise LengthMismatch(len(self.ocr_aligned), len(self.gs_aligned))

    @property
    def ground_truth(self) -> str:
        """Gold standard with padding removed."""
        return strip_padding(self.gs_aligned)

    def serialize(self) -> str:
        return serialize_icdar_document(self)


@dataclass(frozen=True)
class TrainingPair:
    source: str
    target: str
    origin: tuple[str, int]


@dataclass(frozen=True)
class Corpus:
    documents: tuple[AlignedTriple, ...] = ()
    language_tag: str = ""
    load_errors: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "documents", tuple(self.documents))
        seen = set()
        for doc in self.documents:
            if doc.doc_id in seen:
                raise ValueError(f"duplicate doc_id {doc.doc_id!r}")
            seen.add(doc.doc_id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[AlignedTriple]:
        return iter(self.documents)


def strip_padding(aligned: str) -> str:
    return aligned.replace(PAD, "")


def _normalize_ws(text: str) -> str:
    return " ".join(text.split())


def parse_icdar_document(raw_file_text: str, doc_id: str = "") -> AlignedTriple:
    """Parse one three-line corpus file.

    Tags must appear in the order ``OCR_toInput``, ``OCR_aligned``,
    ``GS_aligned``; whitespace inside the brackets is tolerated. One space
    after the closing bracket is consumed as separator, the rest of the line is
    the payload, verbatim.
    """
    payloads: dict[str, str] = {}
    wanted = iter(TAGS)
    tag = next(wanted)
    for line in raw_file_text.split("\n"):
        if line.endswith("\r"):
            line = line[:-1]
        m = _TAG_RE.match(line)
        if m is None or m.group(1) != tag:
            continue
        rest = line[m.end():]
        payloads[tag] = rest[1:] if rest.startswith(" ") else rest
        tag = next(wanted, None)
        if tag is None:
            break
    for name in TAGS:
        if name not in payloads:
            raise MissingTag(name)

    triple = AlignedTriple(
        ocr_raw=payloads["OCR_toInput"],
        ocr_aligned=payloads["OCR_aligned"],
        gs_aligned=payloads["GS_aligned"],
        doc_id=doc_id,
    )
    if _normalize_ws(strip_padding(triple.ocr_aligned)) != _normalize_ws(triple.ocr_raw):
        log.warning(
            "%s: OCR_aligned without padding differs from OCR_toInput; keeping OCR_toInput",
            doc_id or "<document>",
        )
    return triple


def serialize_icdar_document(triple: AlignedTriple) -> str:
    return (
        f"[OCR_toInput] {triple.ocr_raw}\n"
        f"[OCR_aligned] {triple.ocr_aligned}\n"
        f"[GS_aligned] {triple.gs_aligned}\n"
    )


def extract_training_pairs(
    triple: AlignedTriple, w_train: int, stride: int = 1
) -> list[TrainingPair]:
    """Cut the aligned document into ``w_train``-long (source, target) pairs.

    Windows are taken over aligned offsets ``0, stride, 2*stride, ...`` that fit
    entirely in the document; padding is removed from both sides afterwards.
    Windows whose gold standard contains the uncertainty marker are skipped.
    """
    if w_train < 1 or stride < 1:
        raise ValueError("w_train and stride must be positive")
    ocr, gs = triple.ocr_aligned, triple.gs_aligned
    pairs = []
    for s in range(0, len(gs) - w_train + 1, stride):
        target = gs[s:s + w_train]
        if UNCERTAIN in target:
            continue
        pairs.append(
            TrainingPair(
                source=strip_padding(ocr[s:s + w_train]),
                target=strip_padding(target),
                origin=(triple.doc_id, s),
            )
        )
    return pairs


def corpus_training_pairs(corpus: Corpus, w_train: int, stride: int = 1) -> list[TrainingPair]:
    pairs: list[TrainingPair] = []
    for doc in corpus:
        pairs.extend(extract_training_pairs(doc, w_train, stride))
    return pairs


def _name_key(path: Path) -> bytes:
    return path.name.encode("utf-8", "surrogateescape")


def load_corpus(directory_path, language_tag: str | None = None) -> Corpus:
    """Load every ``*.txt`` file of a directory, ordered by byte-wise file name.

    Files that fail to parse are skipped and listed in ``Corpus.load_errors``.
    """
    root = Path(directory_path)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    documents, errors = [], []
    for path in sorted(root.glob("*.txt"), key=_name_key):
        try:
            text = path.read_text(encoding="utf-8")
            documents.append(parse_icdar_document(text, doc_id=path.stem))
        except (ParseError, UnicodeDecodeError) as exc:
            log.warning("%s: %s", path, exc)
            errors.append((str(path), str(exc)))
    return Corpus(
        documents=tuple(documents),
        language_tag=root.name if language_tag is None else language_tag,
        load_errors=tuple(errors),
    )


def write_corpus(corpus: Corpus, directory_path) -> Path:
    root = Path(directory_path)
    root.mkdir(parents=True, exist_ok=True)
    for doc in corpus:
        (root / f"{doc.doc_id}.txt").write_text(doc.serialize(), encoding="utf-8")
    return root


def split_train_dev(corpus: Corpus, n_dev: int, seed: int) -> tuple[Corpus, Corpus]:
    """Draw ``n_dev`` development documents uniformly without replacement."""
    if n_dev < 0 or n_dev > len(corpus):
        raise TooFewDocuments(
            f"cannot draw {n_dev} dev documents from a corpus of {len(corpus)}"
        )
    dev_idx = set(random.Random(seed).sample(range(len(corpus)), n_dev))
    train = [d for i, d in enumerate(corpus.documents) if i not in dev_idx]
    dev = [d for i, d in enumerate(corpus.documents) if i in dev_idx]
    return (
        Corpus(tuple(train), corpus.language_tag),
        Corpus(tuple(dev), corpus.language_tag),
    )
