"""Slow, obviously-correct reference implementations used by the tests."""

from __future__ import annotations

import itertools
import math
from collections import Counter


# ---------------------------------------------------------------- weights

def weight_direct(kind: str, p: int, w: int) -> float:
    m = math.ceil(w / 2)
    if kind == "bell":
        return math.exp(-((1 - p / m) ** 2))
    if kind == "triangle":
        return 1 - abs(m - p) / (2 * m)
    return 1.0


# ---------------------------------------------------------------- edit distance

def edit_distance(a: str, b: str) -> int:
    d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        d[i][0] = i
    for j in range(len(b) + 1):
        d[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
    return d[len(a)][len(b)]


def all_alignments(a: str, b: str):
    """Every edit script turning ``a`` into ``b`` as a tuple of (op, i, j)."""
    if not a and not b:
        yield ()
        return
    if a and b:
        op = "M" if a[0] == b[0] else "S"
        for rest in all_alignments(a[1:], b[1:]):
            yield ((op, a[0], b[0]),) + rest
    if a:
        for rest in all_alignments(a[1:], b):
            yield (("D", a[0], ""),) + rest
    if b:
        for rest in all_alignments(a, b[1:]):
            yield (("I", "", b[0]),) + rest


def _cost(script) -> int:
    return sum(op != "M" for op, _, _ in script)


def preferred_alignment(a: str, b: str):
    """Minimal script, ties broken at the last step first: M > S > D > I.

    Equivalent to comparing scripts read backwards with that operation order.
    """
    rank = {"M": 0, "S": 1, "D": 2, "I": 3}
    best = min(_cost(s) for s in all_alignments(a, b))
    optimal = [s for s in all_alignments(a, b) if _cost(s) == best]
    return min(optimal, key=lambda s: [rank[op] for op, _, _ in reversed(s)])


# ---------------------------------------------------------------- voting

def brute_vote(doc_len: int, windows, kind: str) -> str:
    """Per-position weighted vote for equal-length substitution-only outputs.

    ``windows`` is a list of (start, output). Ties go to the candidate with
    the nearest-centered supporting window, then to the smallest character.
    """
    out = []
    for i in range(doc_len):
        tally: dict[str, float] = {}
        near: dict[str, float] = {}
        for start, text in windows:
            w = len(text)
            if not start <= i < start + w:
                continue
            p = i - start + 1
            ch = text[p - 1]
            tally[ch] = tally.get(ch, 0.0) + weight_direct(kind, p, w)
            d = abs(i - (start + (w - 1) / 2))
            near[ch] = min(near.get(ch, math.inf), d)
        top = max(tally.values())
        tied = [c for c in tally if tally[c] >= top - 1e-9]
        out.append(min(tied, key=lambda c: (near[c], c)))
    return "".join(out)


# ---------------------------------------------------------------- language model

class CountLM:
    """Add-k character n-gram model computed straight from counts."""

    BOS = object()
    END = object()

    def __init__(self, texts, order: int, k: float):
        self.order = order
        self.k = k
        self.chars = sorted(set("".join(texts)))
        self.vocab = len(self.chars) + 2  # characters, unknown, end
        self.joint = Counter()
        self.ctx = Counter()
        for t in texts:
            syms = [self.BOS] * (order - 1) + [self._sym(c) for c in t] + [self.END]
            for i in range(order - 1, len(syms)):
                c = tuple(syms[i - order + 1:i])
                self.joint[c, syms[i]] += 1
                self.ctx[c] += 1

    def _sym(self, c):
        return c if c in self.chars else "<unk>"

    def logprob(self, sym, history) -> float:
        syms = [self.BOS] * (self.order - 1) + [self._sym(c) for c in history]
        c = tuple(syms[len(syms) - self.order + 1:]) if self.order > 1 else ()
        s = self.END if sym is None else self._sym(sym)
        return math.log((self.joint[c, s] + self.k) / (self.ctx[c] + self.k * self.vocab))

    def score(self, text: str) -> float:
        return sum(self.logprob(ch, text[:i]) for i, ch in enumerate(text)) + \
            self.logprob(None, text)


# ---------------------------------------------------------------- exhaustive decoding

def exhaustive_decode(model, observed: str, max_out: int, lm_logprob):
    """Best score over every output of length <= ``max_out``, and the outputs reaching it.

    The channel score of an output is the best derivation: each observed
    character is a substitution for one output character or a spurious
    insertion, and at most ``model.max_deletions`` output characters are
    emitted as nothing in a row. An output character outside the channel
    alphabet can only stand for the same observed character. The search walks
    a trie of outputs, extending the channel table one character at a time.
    """
    ch = model.channel
    known = list(ch.chars)
    unk = len(known)
    obs_ids = [ch.symbol_id(c) for c in observed]
    cands = known + sorted(set(c for c in observed if c not in known))
    L = len(observed)
    D = model.max_deletions
    lam = model.lm_weight
    NEG = -math.inf

    def close(V):
        # spurious observed characters
        for i in range(L):
            best = max(V[i])
            if best > NEG:
                V[i + 1][0] = max(V[i + 1][0], best + ch.ins[obs_ids[i]])
        return V

    def extend(V, c):
        W = [[NEG] * (D + 1) for _ in range(L + 1)]
        cid = ch.symbol_id(c)
        is_known = c in known
        for i in range(1, L + 1):
            o = observed[i - 1]
            if is_known:
                s = ch.sub[cid, obs_ids[i - 1]]
            elif o == c:
                s = ch.sub[unk, unk]
            else:
                continue
            best = max(V[i - 1])
            if best > NEG:
                W[i][0] = max(W[i][0], best + s)
        if is_known:
            for i in range(L + 1):
                for d in range(D):
                    if V[i][d] > NEG:
                        W[i][d + 1] = max(W[i][d + 1], V[i][d] + ch.dele[cid])
        return close(W)

    start = [[NEG] * (D + 1) for _ in range(L + 1)]
    start[0][0] = 0.0
    best_score = NEG
    winners: list[str] = []
    scored: dict[str, float] = {}
    stack = [("", close(start), 0.0)]
    while stack:
        out, V, lm = stack.pop()
        final = max(V[L])
        if final > NEG:
            total = final + lam * (lm + lm_logprob(None, out))
            scored[out] = total
            if total > best_score + 1e-9:
                best_score, winners = total, [out]
            elif total >= best_score - 1e-9:
                winners.append(out)
        if len(out) < max_out:
            for c in cands:
                stack.append((out + c, extend(V, c), lm + lm_logprob(c, out)))
    winners = [w for w in winners if scored[w] >= best_score - 1e-9]
    return best_score, winners


def enumerate_pairs(ocr_aligned: str, gs_aligned: str, w: int):
    """Training pairs by the textbook definition: every full window, padding dropped."""
    pairs = []
    for s in itertools.count():
        if s + w > len(gs_aligned):
            break
        tgt = gs_aligned[s:s + w]
        if "#" in tgt:
            continue
        pairs.append((ocr_aligned[s:s + w].replace("@", ""), tgt.replace("@", ""), s))
    return pairs
