"""Synthetic aligned corpora: clean text pushed through a random OCR-like channel."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from postocr.textdata import PAD, AlignedTriple, Corpus

# Visually confusable characters, in the spirit of common OCR errors.
OCR_CONFUSIONS: dict[str, str] = {
    "a": "oe", "b": "hd", "c": "eo", "d": "bcl", "e": "co", "f": "tl",
    "g": "q", "h": "bn", "i": "lj", "l": "it", "m": "n", "n": "mu",
    "o": "ac", "q": "g", "r": "n", "s": "e", "t": "fl", "u": "nv",
    "v": "uy", "w": "v", "y": "v", ",": ".", ".": ",",
}

_WORDS = """
the of and to in a is that for it as was with be by on not he this are or his
from at which but have an they you were her she there been one all we their has
would when if so no will more can out up into do time some could them other than
then now only its over also after first two new may any these like our way made
many before must through back years where much your well down should because each
just those how too little state good very make world still own see men work long
here both between life being under never day same another know while last might
great old year off come since against go came right used take three himself few
house use during without again place around however home small found thought went
say part once general high upon school every does got united left number course
war until always away something fact though water less public put think almost
hand enough far took head yet government system better set told nothing night end
why called didn eyes find going look asked later knew point next city give group
toward young let room side social present given several order national second
possible rather per face among form important often things looked early white
case john become large big need four within felt along children saw best church
ever least power development light thing seemed family interest want members mind
country area others done turned although open god service certain kind problem
began different door thus help means sense whole matter perhaps itself york times
letter river market harbour merchant parish council printed evening morning
""".split()


def clean_texts(n_docs: int, doc_len: int, seed: int) -> list[str]:
    """English-like documents of at least ``doc_len`` characters.

    Words follow a Zipf distribution over a fixed vocabulary; sentences start
    with a capital and end with a period.
    """
    rng = random.Random(seed)
    cum = []
    total = 0.0
    for rank in range(len(_WORDS)):
        total += 1.0 / (rank + 1)
        cum.append(total)
    docs = []
    for _ in range(n_docs):
        sentences = []
        length = 0
        while length < doc_len:
            words = rng.choices(_WORDS, cum_weights=cum, k=rng.randint(5, 14))
            if len(words) > 6 and rng.random() < 0.3:
                words[rng.randrange(2, len(words) - 2)] += ","
            sentence = " ".join(words)
            sentence = sentence[0].upper() + sentence[1:] + "."
            sentences.append(sentence)
            length += len(sentence) + 1
        docs.append(" ".join(sentences))
    return docs


@dataclass(frozen=True)
class NoiseChannelSpec:
    substitution_rate: float = 0.10
    deletion_rate: float = 0.02
    insertion_rate: float = 0.02
    confusions: dict[str, str] | None = field(default_factory=lambda: dict(OCR_CONFUSIONS))
    seed: int = 0
    # share of substitutions drawn from ``confusions`` when the character has an entry
    bias: float = 0.8

    def __post_init__(self):
        rates = (self.substitution_rate, self.deletion_rate, self.insertion_rate)
        if any(not 0 <= r <= 1 for r in rates) or sum(rates) > 1:
            raise ValueError(f"channel rates must lie in [0, 1] and sum to at most 1: {rates}")


def corrupt(text: str, spec: NoiseChannelSpec, rng: random.Random, alphabet: str):
    """Return ``(ocr_aligned, gs_aligned)`` for one clean text."""
    ocr, gs = [], []
    sub, dele, ins = spec.substitution_rate, spec.deletion_rate, spec.insertion_rate
    for ch in text:
        u = rng.random()
        if u < sub:
            table = (spec.confusions or {}).get(ch)
            if table and (spec.bias >= 1 or rng.random() < spec.bias):
                new = rng.choice(table)
            else:
                others = [c for c in alphabet if c != ch]
                new = rng.choice(others) if others else ch
            ocr.append(new)
            gs.append(ch)
        elif u < sub + dele:
            ocr.append(PAD)
            gs.append(ch)
        elif u < sub + dele + ins:
            ocr.append(ch)
            gs.append(ch)
            ocr.append(rng.choice(alphabet))
            gs.append(PAD)
        else:
            ocr.append(ch)
            gs.append(ch)
    return "".join(ocr), "".join(gs)


def synth_corpus(
    clean: list[str], spec: NoiseChannelSpec, language_tag: str = "synthetic"
) -> Corpus:
    alphabet = "".join(sorted(set("".join(clean)) - {PAD}))
    rng = random.Random(spec.seed)
    width = max(3, len(str(len(clean) - 1)))
    docs = []
    for i, text in enumerate(clean):
        ocr_aligned, gs_aligned = corrupt(text, spec, rng, alphabet)
        docs.append(
            AlignedTriple(
                ocr_raw=ocr_aligned.replace(PAD, ""),
                ocr_aligned=ocr_aligned,
                gs_aligned=gs_aligned,
                doc_id=f"doc{i:0{width}d}",
            )
        )
    return Corpus(tuple(docs), language_tag)
