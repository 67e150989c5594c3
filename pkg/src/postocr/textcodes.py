"""Conversions between strings and integer arrays for the compiled kernels."""

import numpy as np


def codes(text: str) -> np.ndarray:
    """Unicode code points of ``text`` as an int64 array."""
    return np.frombuffer(text.encode("utf-32-le", "surrogatepass"), dtype="<u4").astype(np.int64)


def from_codes(arr) -> str:
    return np.asarray(arr, dtype="<u4").tobytes().decode("utf-32-le", "surrogatepass")


def to_ids(text: str, alphabet_codes: np.ndarray, unk: int) -> np.ndarray:
    """Map characters to their index in the sorted ``alphabet_codes``; others to ``unk``."""
    cp = codes(text)
    if alphabet_codes.shape[0] == 0:
        return np.full(cp.shape[0], unk, dtype=np.int64)
    idx = np.searchsorted(alphabet_codes, cp)
    idx[idx >= alphabet_codes.shape[0]] = 0
    return np.where(alphabet_codes[idx] == cp, idx, unk).astype(np.int64)


def alphabet_codes(chars) -> np.ndarray:
    return np.array(sorted(ord(c) for c in chars), dtype=np.int64)
