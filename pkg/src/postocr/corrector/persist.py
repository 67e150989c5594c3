"""Model files.

Layout (UTF-8 text)::

    POCRM1
    sha256=<hex digest of the body>
    <body: one JSON object>

The body holds ``version``, ``lm_weight``, ``max_deletions`` and the raw
counts of both models (``channel``, ``lm``). Log-probabilities are rebuilt from
the counts on load with the same arithmetic, so a loaded model scores exactly
like the saved one.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path

from postocr.corrector.channel import ConfusionModel
from postocr.corrector.charlm import CharLM
from postocr.corrector.noisy import NoisyChannelCorrector
from postocr.errors import CorruptFile, VersionMismatch

MAGIC = "POCRM"
FORMAT_VERSION = 1

_MAGIC_RE = re.compile(r"^POCRM(\d+)$")


def dumps_model(model: NoisyChannelCorrector) -> str:
    body = json.dumps(
        {
            "version": FORMAT_VERSION,
            "lm_weight": model.lm_weight,
            "max_deletions": model.max_deletions,
            "channel": model.channel.to_dict(),
            "lm": model.lm.to_dict(),
        },
        ensure_ascii=False,
        sort_keys=True,
        separators=(",", ":"),
    )
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return f"{MAGIC}{FORMAT_VERSION}\nsha256={digest}\n{body}\n"


def loads_model(text: str, source: str = "<model>") -> NoisyChannelCorrector:
    lines = text.split("\n", 2)
    if len(lines) < 3:
        raise CorruptFile(f"{source}: truncated model file")
    magic, checksum, body = lines
    m = _MAGIC_RE.match(magic)
    if m is None:
        raise CorruptFile(f"{source}: not a model file (bad magic {magic[:16]!r})")
    if int(m.group(1)) > FORMAT_VERSION:
        raise VersionMismatch(
            f"{source}: format version {m.group(1)} is newer than supported {FORMAT_VERSION}"
        )
    body = body.rstrip("\n")
    if checksum != "sha256=" + hashlib.sha256(body.encode("utf-8")).hexdigest():
        raise CorruptFile(f"{source}: checksum mismatch")
    try:
        data = json.loads(body)
        if data["version"] > FORMAT_VERSION:
            raise VersionMismatch(
                f"{source}: format version {data['version']} is newer than supported"
            )
        return NoisyChannelCorrector(
            ConfusionModel.from_dict(data["channel"]),
            CharLM.from_dict(data["lm"]),
            lm_weight=data["lm_weight"],
            max_deletions=data["max_deletions"],
        )
    except VersionMismatch:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"{source}: {exc}") from exc


def save_model(model: NoisyChannelCorrector, path) -> Path:
    path = Path(path)
    path.write_text(dumps_model(model), encoding="utf-8")
    return path


def load_model(path) -> NoisyChannelCorrector:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise CorruptFile(f"{path}: {exc}") from exc
    return loads_model(text, source=str(path))
