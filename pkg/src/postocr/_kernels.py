"""Compiled inner loops: edit alignment, beam decoding and rescoring.

Strings enter as integer arrays (code points or model symbol ids). All kernels
release the GIL so thread pools can run them concurrently.
"""

import numpy as np
from numba import njit

MATCH, SUBST, DELETE, INSERT = 0, 1, 2, 3

_FNV_PRIME = np.uint64(1099511628211)
_FNV_OFFSET = np.uint64(14695981039346656037)


# --------------------------------------------------------------------------
# edit distance and alignment


@njit(cache=True, nogil=True)
def levenshtein_codes(a, b):
    n, m = a.shape[0], b.shape[0]
    if n < m:
        a, b = b, a
        n, m = m, n
    prev = np.arange(m + 1)
    cur = np.empty(m + 1, dtype=prev.dtype)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            best = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True, nogil=True)
def align_ops(a, b):
    """Minimal unit-cost edit script turning ``a`` into ``b``.

    The backtrace starts at the end of both strings and, among the moves that
    stay on an optimal path, takes match, then substitute, then delete (drop a
    character of ``a``), then insert (add a character of ``b``).
    """
    n, m = a.shape[0], b.shape[0]
    d = np.empty((n + 1, m + 1), dtype=np.int32)
    for i in range(n + 1):
        d[i, 0] = i
    for j in range(m + 1):
        d[0, j] = j
    for i in range(1, n + 1):
        ai = a[i - 1]
        for j in range(1, m + 1):
            best = d[i - 1, j - 1] + (0 if ai == b[j - 1] else 1)
            if d[i - 1, j] + 1 < best:
                best = d[i - 1, j] + 1
            if d[i, j - 1] + 1 < best:
                best = d[i, j - 1] + 1
            d[i, j] = best
    ops = np.empty(n + m, dtype=np.int8)
    k = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and a[i - 1] == b[j - 1] and d[i - 1, j - 1] == d[i, j]:
            ops[k] = MATCH
            i -= 1
            j -= 1
        elif i > 0 and j > 0 and d[i - 1, j - 1] + 1 == d[i, j]:
            ops[k] = SUBST
            i -= 1
            j -= 1
        elif i > 0 and d[i - 1, j] + 1 == d[i, j]:
            ops[k] = DELETE
            i -= 1
        else:
            ops[k] = INSERT
            j -= 1
        k += 1
    return ops[:k][::-1].copy()


@njit(cache=True, nogil=True)
def align_batch(src, src_off, out, out_off):
    """Align many (window, output) pairs at once.

    Returns ``pos_out`` (one entry per source character: the output code it
    maps to, or -1 when deleted) and ``slot_lo``/``slot_hi``: for each window
    the ``len + 1`` insertion slots, as half-open ranges into ``out``.
    """
    nwin = src_off.shape[0] - 1
    pos_out = np.full(src.shape[0], -1, dtype=np.int64)
    nslots = src.shape[0] + nwin
    slot_lo = np.zeros(nslots, dtype=np.int64)
    slot_hi = np.zeros(nslots, dtype=np.int64)
    slot_base = 0
    for w in range(nwin):
        a = src[src_off[w]:src_off[w + 1]]
        b = out[out_off[w]:out_off[w + 1]]
        ops = align_ops(a, b)
        i = 0
        j = 0
        for op in ops:
            if op == MATCH or op == SUBST:
                pos_out[src_off[w] + i] = b[j]
                i += 1
                j += 1
            elif op == DELETE:
                i += 1
            else:
                s = slot_base + i
                if slot_hi[s] == slot_lo[s]:
                    slot_lo[s] = out_off[w] + j
                slot_hi[s] = out_off[w] + j + 1
                j += 1
        slot_base += a.shape[0] + 1
    return pos_out, slot_lo, slot_hi


# --------------------------------------------------------------------------
# character language model


@njit(cache=True, nogil=True)
def _lm_row(keys, ctx):
    i = np.searchsorted(keys, ctx)
    if i < keys.shape[0] and keys[i] == ctx:
        return i
    return keys.shape[0]


@njit(cache=True, nogil=True)
def _ctx_start(order, base, bos):
    ctx = 0
    for _ in range(order - 1):
        ctx = ctx * base + bos
    return ctx


@njit(cache=True, nogil=True)
def _ctx_push(ctx, sym, order, base):
    if order == 1:
        return 0
    return (ctx % (base ** (order - 2))) * base + sym


@njit(cache=True, nogil=True)
def lm_score_ids(ids, keys, table, order, base, bos, end):
    ctx = _ctx_start(order, base, bos)
    total = 0.0
    for s in ids:
        total += table[_lm_row(keys, ctx), s]
        ctx = _ctx_push(ctx, s, order, base)
    total += table[_lm_row(keys, ctx), end]
    return total


# --------------------------------------------------------------------------
# noisy-channel decoding


@njit(cache=True, nogil=True)
def _tok_hash(h, t):
    return (h ^ np.uint64(t + 1)) * _FNV_PRIME


@njit(cache=True, nogil=True)
def _worse(s1, q1, s2, q2):
    return s1 < s2 or (s1 == s2 and q1 > q2)


@njit(cache=True, nogil=True)
def _heap_push(hs, hq, hp, ht, count, s, q, p, t):
    """Keep the ``len(hs)`` best (score, -generation) candidates; root is the worst."""
    cap = hs.shape[0]
    if count < cap:
        i = count
        count += 1
        hs[i] = s
        hq[i] = q
        hp[i] = p
        ht[i] = t
        while i > 0:
            par = (i - 1) // 2
            if not _worse(hs[i], hq[i], hs[par], hq[par]):
                break
            hs[i], hs[par] = hs[par], hs[i]
            hq[i], hq[par] = hq[par], hq[i]
            hp[i], hp[par] = hp[par], hp[i]
            ht[i], ht[par] = ht[par], ht[i]
            i = par
        return count
    if not _worse(hs[0], hq[0], s, q):
        return count
    hs[0] = s
    hq[0] = q
    hp[0] = p
    ht[0] = t
    i = 0
    while True:
        lo = 2 * i + 1
        worst = i
        if lo < count and _worse(hs[lo], hq[lo], hs[worst], hq[worst]):
            worst = lo
        if lo + 1 < count and _worse(hs[lo + 1], hq[lo + 1], hs[worst], hq[worst]):
            worst = lo + 1
        if worst == i:
            break
        hs[i], hs[worst] = hs[worst], hs[i]
        hq[i], hq[worst] = hq[worst], hq[i]
        hp[i], hp[worst] = hp[worst], hp[i]
        ht[i], ht[worst] = ht[worst], ht[i]
        i = worst
    return count


@njit(cache=True, nogil=True)
def _same_output(out, olen, p1, t1, p2, t2):
    n1 = olen[p1] + (1 if t1 >= 0 else 0)
    n2 = olen[p2] + (1 if t2 >= 0 else 0)
    if n1 != n2:
        return False
    m1 = olen[p1]
    m2 = olen[p2]
    for k in range(n1):
        c1 = out[p1, k] if k < m1 else t1
        c2 = out[p2, k] if k < m2 else t2
        if c1 != c2:
            return False
    return True


@njit(cache=True, nogil=True)
def _rank(hs, hq, count):
    """Heap slots ordered best-first: score descending, generation ascending."""
    if count > 48:
        order = np.argsort(hq[:count])
        return order[np.argsort(-hs[order], kind="mergesort")]
    order = np.empty(count, dtype=np.int64)
    for i in range(count):
        k = i
        while k > 0 and _worse(hs[order[k - 1]], hq[order[k - 1]], hs[i], hq[i]):
            order[k] = order[k - 1]
            k -= 1
        order[k] = i
    return order


@njit(cache=True, nogil=True)
def _distinct_best(hs, hq, hp, ht, count, limit, hsh, out, olen):
    """The ``limit`` best heap entries, keeping only the first of equal outputs."""
    order = _rank(hs, hq, count)
    ch = np.empty(count, dtype=np.uint64)
    for i in range(count):
        c = order[i]
        ch[i] = _tok_hash(hsh[hp[c]], ht[c]) if ht[c] >= 0 else hsh[hp[c]]
    keep = np.ones(count, dtype=np.bool_)
    if count <= 48:
        n_kept = 0
        for x in range(count):
            if n_kept >= limit:
                keep[x] = False
                continue
            cx = order[x]
            for y in range(x):
                if keep[y] and ch[y] == ch[x] and _same_output(
                        out, olen, hp[cx], ht[cx], hp[order[y]], ht[order[y]]):
                    keep[x] = False
                    break
            if keep[x]:
                n_kept += 1
    else:
        by_hash = np.argsort(ch, kind="mergesort")
        g = 0
        while g < count:
            e = g + 1
            while e < count and ch[by_hash[e]] == ch[by_hash[g]]:
                e += 1
            for x in range(g + 1, e):
                cx = order[by_hash[x]]
                for y in range(g, x):
                    if not keep[by_hash[y]]:
                        continue
                    cy = order[by_hash[y]]
                    if _same_output(out, olen, hp[cx], ht[cx], hp[cy], ht[cy]):
                        keep[by_hash[x]] = False
                        break
            g = e
    return order[keep][:limit], ch[keep][:limit]


@njit(cache=True, nogil=True)
def _materialize(kept, khash, hs, hp, ht, sym_of, ctx, olen, out, order, base):
    k = kept.shape[0]
    n_score = np.empty(k)
    n_ctx = np.empty(k, dtype=np.int64)
    n_olen = np.empty(k, dtype=np.int64)
    n_out = np.empty((k, out.shape[1]), dtype=np.int64)
    for i in range(k):
        c = kept[i]
        p = hp[c]
        t = ht[c]
        n_score[i] = hs[c]
        L = olen[p]
        n_out[i, :L] = out[p, :L]
        if t >= 0:
            n_out[i, L] = t
            n_olen[i] = L + 1
            n_ctx[i] = _ctx_push(ctx[p], sym_of[t], order, base)
        else:
            n_olen[i] = L
            n_ctx[i] = ctx[p]
    return n_score, n_ctx, n_olen, n_out, khash.copy()


@njit(cache=True, nogil=True)
def _new_heap(cap):
    return (np.empty(cap), np.empty(cap, dtype=np.int64), np.empty(cap, dtype=np.int64),
            np.empty(cap, dtype=np.int64))


@njit(cache=True, nogil=True)
def _deletion_layer(beam, floor, score, ctx, olen, out, hsh, dele, lam, keys, table, sym_of,
                    n_known, max_out, order, base):
    """Best ``beam`` distinct one-deletion extensions scoring at least ``floor``."""
    cap = min(beam * 4 + 8, score.shape[0] * n_known)
    while True:
        hs, hq, hp, ht = _new_heap(cap)
        count = 0
        q = 0
        for h in range(score.shape[0]):
            if olen[h] >= max_out:
                continue
            row = _lm_row(keys, ctx[h])
            s0 = score[h]
            for t in range(n_known):
                s = s0 + dele[t] + lam * table[row, sym_of[t]]
                if s < floor:
                    continue
                count = _heap_push(hs, hq, hp, ht, count, s, q, h, t)
                q += 1
        kept, khash = _distinct_best(hs, hq, hp, ht, count, beam, hsh, out, olen)
        if kept.shape[0] >= beam or q <= cap:
            return _materialize(kept, khash, hs, hp, ht, sym_of, ctx, olen, out, order, base)
        cap = min(q, cap * 4)


@njit(cache=True, nogil=True)
def _consume_into(hs, hq, hp, ht, count, q, off, j, o, score, ctx, olen, sub, ins, lam, keys,
                  table, sym_of, n_known, max_out):
    for h in range(score.shape[0]):
        s0 = score[h]
        # observed character is spurious
        count = _heap_push(hs, hq, hp, ht, count, s0 + ins[o], q, off + h, -1)
        q += 1
        if olen[h] >= max_out:
            continue
        row = _lm_row(keys, ctx[h])
        for t in range(n_known):
            count = _heap_push(hs, hq, hp, ht, count,
                               s0 + sub[t, o] + lam * table[row, sym_of[t]], q, off + h, t)
            q += 1
        if o == n_known:
            t = n_known + j
            count = _heap_push(hs, hq, hp, ht, count,
                               s0 + sub[n_known, n_known] + lam * table[row, sym_of[t]],
                               q, off + h, t)
            q += 1
    return count, q


@njit(cache=True, nogil=True)
def beam_decode(obs, sub, dele, ins, sym_of, keys, table, order, base, bos, end,
                lam, beam, max_out, max_dels):
    """Left-to-right beam search over true strings for an observed window.

    ``obs`` holds channel ids (``n_known`` = unknown). Output tokens below
    ``n_known`` are known characters; token ``n_known + j`` copies the unknown
    observed character at position ``j``. ``sym_of`` maps every token to its
    language-model symbol.

    Before each observed character up to ``max_dels`` layers of recovered
    deletions are expanded (each layer keeping its ``beam`` best distinct
    states); every state of this pool then consumes the observed character,
    and the ``beam`` best distinct outputs survive. Deletion states that
    cannot reach the surviving set are skipped, which does not change the
    result. Returns the tokens and the path score (end symbol included).
    """
    n_known = sub.shape[0] - 1
    L = obs.shape[0]
    width = max_out if max_out > 0 else 1
    score = np.zeros(1)
    ctx = np.full(1, _ctx_start(order, base, bos), dtype=np.int64)
    olen = np.zeros(1, dtype=np.int64)
    out = np.zeros((1, width), dtype=np.int64)
    hsh = np.full(1, _FNV_OFFSET, dtype=np.uint64)

    for j in range(L):
        o = obs[j]
        # best gain any state can get from consuming o
        gain = ins[o]
        for t in range(n_known):
            if sub[t, o] > gain:
                gain = sub[t, o]
        if o == n_known and sub[n_known, n_known] > gain:
            gain = sub[n_known, n_known]

        # candidate count bound, for sizing the heap
        size = score.shape[0]
        layer = size
        for _ in range(max_dels):
            layer = min(beam, layer * n_known)
            size += layer
        cap = min(beam * 4 + 8, size * (n_known + 2))
        while True:
            hs, hq, hp, ht = _new_heap(cap)
            count, q = _consume_into(hs, hq, hp, ht, 0, 0, 0, j, o, score, ctx, olen, sub,
                                     ins, lam, keys, table, sym_of, n_known, max_out)
            floor = -np.inf
            if max_dels > 0:
                k0, _ = _distinct_best(hs, hq, hp, ht, count, beam, hsh, out, olen)
                if k0.shape[0] >= beam:
                    floor = hs[k0[beam - 1]] - gain
            p_score, p_ctx, p_olen, p_out, p_hash = score, ctx, olen, out, hsh
            l_score, l_ctx, l_olen, l_out, l_hash = score, ctx, olen, out, hsh
            for _ in range(max_dels):
                l_score, l_ctx, l_olen, l_out, l_hash = _deletion_layer(
                    beam, floor, l_score, l_ctx, l_olen, l_out, l_hash, dele, lam, keys,
                    table, sym_of, n_known, max_out, order, base)
                if l_score.shape[0] == 0:
                    break
                off = p_score.shape[0]
                p_score = np.concatenate((p_score, l_score))
                p_ctx = np.concatenate((p_ctx, l_ctx))
                p_olen = np.concatenate((p_olen, l_olen))
                p_out = np.concatenate((p_out, l_out))
                p_hash = np.concatenate((p_hash, l_hash))
                count, q = _consume_into(hs, hq, hp, ht, count, q, off, j, o, l_score, l_ctx,
                                         l_olen, sub, ins, lam, keys, table, sym_of, n_known,
                                         max_out)
            kept, khash = _distinct_best(hs, hq, hp, ht, count, beam, p_hash, p_out, p_olen)
            if kept.shape[0] >= beam or q <= cap:
                break
            cap = min(q, cap * 4)
        score, ctx, olen, out, hsh = _materialize(
            kept, khash, hs, hp, ht, sym_of, p_ctx, p_olen, p_out, order, base)

    # trailing deletions, then the end symbol
    best_score = -np.inf
    best_out = out[0, :0].copy()
    l_score, l_ctx, l_olen, l_out, l_hash = score, ctx, olen, out, hsh
    for d in range(max_dels + 1):
        if d > 0:
            l_score, l_ctx, l_olen, l_out, l_hash = _deletion_layer(
                beam, best_score, l_score, l_ctx, l_olen, l_out, l_hash, dele, lam, keys,
                table, sym_of, n_known, max_out, order, base)
        for h in range(l_score.shape[0]):
            s = l_score[h] + lam * table[_lm_row(keys, l_ctx[h]), end]
            if s > best_score:
                best_score = s
                best_out = l_out[h, :l_olen[h]].copy()
        if l_score.shape[0] == 0:
            break
    return best_out, best_score


@njit(cache=True, nogil=True)
def decode_window(obs, obs_codes, chan_codes, sub, dele, ins, sym_of, keys, table, order,
                  base, bos, end, lam, beam, max_out, max_dels):
    """Beam-decode a window and rescore the winner exactly.

    Returns the output code points and ``channel_viterbi + lam * lm_score`` of
    the output.
    """
    tokens, _ = beam_decode(obs, sub, dele, ins, sym_of, keys, table, order, base, bos, end,
                            lam, beam, max_out, max_dels)
    n_known = sub.shape[0] - 1
    m = tokens.shape[0]
    out_row = np.empty(m, dtype=np.int64)
    out_code = np.empty(m, dtype=np.int64)
    out_sym = np.empty(m, dtype=np.int64)
    for i in range(m):
        t = tokens[i]
        out_sym[i] = sym_of[t]
        if t < n_known:
            out_row[i] = t
            out_code[i] = chan_codes[t]
        else:
            out_row[i] = n_known
            out_code[i] = obs_codes[t - n_known]
    score = channel_viterbi(obs, obs_codes, out_row, out_code, sub, dele, ins, max_dels)
    score += lam * lm_score_ids(out_sym, keys, table, order, base, bos, end)
    return out_code, score


@njit(cache=True, nogil=True)
def channel_viterbi(obs_row, obs_code, out_row, out_code, sub, dele, ins, max_dels):
    """Best channel log-probability of emitting ``obs`` from a fixed output.

    Same derivations as :func:`beam_decode`: at most ``max_dels`` recovered
    deletions before each observed character and at the end; characters
    unknown to the channel may only be copied from an identical observed one.
    """
    unk = sub.shape[0] - 1
    L = obs_row.shape[0]
    m = out_row.shape[0]
    v = np.full((L + 1, m + 1, max_dels + 1), -np.inf)
    v[0, 0, 0] = 0.0
    for j in range(L + 1):
        for k in range(m + 1):
            for d in range(max_dels + 1):
                cur = v[j, k, d]
                if cur == -np.inf:
                    continue
                if d < max_dels and k < m and out_row[k] != unk:
                    s = cur + dele[out_row[k]]
                    if s > v[j, k + 1, d + 1]:
                        v[j, k + 1, d + 1] = s
                if j < L:
                    s = cur + ins[obs_row[j]]
                    if s > v[j + 1, k, 0]:
                        v[j + 1, k, 0] = s
                    if k < m and (out_row[k] != unk or out_code[k] == obs_code[j]):
                        s = cur + sub[out_row[k], obs_row[j]]
                        if s > v[j + 1, k + 1, 0]:
                            v[j + 1, k + 1, 0] = s
    best = -np.inf
    for d in range(max_dels + 1):
        if v[L, m, d] > best:
            best = v[L, m, d]
    return best


# --------------------------------------------------------------------------
# channel training


@njit(cache=True, nogil=True)
def channel_counts(src, src_off, tgt, tgt_off, n_sym):
    """Accumulate channel events over aligned (noisy, true) pairs of symbol ids.

    Returns ``sub[true, observed]``, ``dele[true]`` (true character with no
    observed counterpart), ``ins[observed]`` (spurious observed character) and
    the number of observed characters that were not spurious.
    """
    sub = np.zeros((n_sym, n_sym), dtype=np.int64)
    dele = np.zeros(n_sym, dtype=np.int64)
    ins = np.zeros(n_sym, dtype=np.int64)
    kept = 0
    for p in range(src_off.shape[0] - 1):
        a = src[src_off[p]:src_off[p + 1]]
        b = tgt[tgt_off[p]:tgt_off[p + 1]]
        ops = align_ops(a, b)
        i = 0
        j = 0
        for op in ops:
            if op == MATCH or op == SUBST:
                sub[b[j], a[i]] += 1
                kept += 1
                i += 1
                j += 1
            elif op == DELETE:
                ins[a[i]] += 1
                i += 1
            else:
                dele[b[j]] += 1
                j += 1
    return sub, dele, ins, kept
