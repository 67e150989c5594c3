import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import CountLM, preferred_alignment
from postocr.corrector import (
    DecodingConfig,
    IdentityCorrector,
    NoisyChannelCorrector,
    OracleCorrector,
    load_model,
    save_model,
    train_char_lm,
    train_confusion_model,
    train_noisy_channel,
)
from postocr.corrector.persist import dumps_model, loads_model
from postocr.errors import CorruptFile, EmptyTraining, VersionMismatch
from postocr.textdata import TrainingPair
from postocr.windowing import WindowSlice


def pair(src, tgt):
    return TrainingPair(src, tgt, ("t", 0))


def _noisy_pairs(rng, alphabet, n=60, max_len=10):
    out = []
    for _ in range(n):
        tgt = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, max_len)))
        src = []
        for c in tgt:
            u = rng.random()
            if u < 0.12:
                src.append(rng.choice(alphabet))
            elif u < 0.17:
                pass
            elif u < 0.22:
                src += [c, rng.choice(alphabet)]
            else:
                src.append(c)
        out.append(pair("".join(src), tgt))
    return out


@pytest.fixture(scope="module")
def small_model():
    rng = random.Random(5)
    return train_noisy_channel(_noisy_pairs(rng, "abcde ", 200, 12), n_lm=3, k=0.1)


# ------------------------------------------------------------- confusion model

def test_deleted_character_counts_as_deletion():
    m = train_confusion_model([pair("abde", "abcde")], k=0.1)
    c = m.symbol_id("c")
    assert m.del_counts[c] == 1
    assert m.del_counts.sum() == 1
    assert m.ins_counts.sum() == 0


def test_clean_channel_limit():
    m = train_confusion_model([pair("abc", "abc")] * 50, k=1e-9)
    for ch in "abc":
        t = m.symbol_id(ch)
        assert math.exp(m.sub[t, t]) == pytest.approx(1.0, abs=1e-6)
        assert math.exp(m.dele[t]) == pytest.approx(0.0, abs=1e-6)


def test_counts_match_exhaustive_alignment():
    rng = random.Random(11)
    for _ in range(150):
        src = "".join(rng.choice("abc") for _ in range(rng.randint(0, 6)))
        tgt = "".join(rng.choice("abc") for _ in range(rng.randint(1, 6)))
        m = train_confusion_model([pair(src, tgt)], k=0.1)
        sub = np.zeros_like(m.sub_counts)
        dele = np.zeros_like(m.del_counts)
        ins = np.zeros_like(m.ins_counts)
        for op, a, b in preferred_alignment(src, tgt):
            if op in "MS":
                sub[m.symbol_id(b), m.symbol_id(a)] += 1
            elif op == "D":
                ins[m.symbol_id(a)] += 1
            else:
                dele[m.symbol_id(b)] += 1
        assert (m.sub_counts == sub).all(), (src, tgt)
        assert (m.del_counts == dele).all(), (src, tgt)
        assert (m.ins_counts == ins).all(), (src, tgt)


def test_channel_rows_normalize(small_model):
    ch = small_model.channel
    rows = np.exp(ch.sub).sum(axis=1) + np.exp(ch.dele)
    assert np.allclose(rows, 1.0, atol=1e-9, rtol=0)
    assert np.exp(ch.ins).sum() + math.exp(ch.no_insertion) == pytest.approx(1.0, abs=1e-9)


def test_empty_training():
    with pytest.raises(EmptyTraining):
        train_confusion_model([])
    with pytest.raises(EmptyTraining):
        train_char_lm([])


# ------------------------------------------------------------- language model

def test_lm_unigram_limit():
    lm = train_char_lm(["aaaa"], n_lm=1, k=1e-9)
    assert math.exp(lm.logprob("a")) == pytest.approx(0.8, abs=1e-6)  # 4 a's, 1 end


def test_lm_bigram_alternation():
    lm = train_char_lm(["abab"], n_lm=2, k=1e-9)
    assert math.exp(lm.logprob("b", "a")) == pytest.approx(1.0, abs=1e-6)
    # the final 'b' is followed by the end symbol, so only half of the 'b'
    # contexts continue with 'a'
    assert math.exp(lm.logprob("a", "ab")) == pytest.approx(0.5, abs=1e-6)
    assert math.exp(lm.logprob("a", "")) == pytest.approx(1.0, abs=1e-6)


def test_lm_empty_string_scores_end_symbol():
    lm = train_char_lm(["abc", "b"], n_lm=3, k=0.1)
    assert lm.score("") == pytest.approx(lm.logprob(None, ""), abs=1e-12)


def test_lm_uniform_closed_form():
    # a huge k drowns the counts: every symbol has probability 1 / (A + 1),
    # A counting the characters and the unknown bucket
    lm = train_char_lm(["abcabd", "dd"], n_lm=2, k=1e12)
    A = len(lm.chars) + 1
    for s in ["", "a", "dcba", "zz"]:
        assert lm.score(s) == pytest.approx((len(s) + 1) * math.log(1 / (A + 1)), rel=1e-9)


def test_lm_prefers_training_order_over_reversal():
    text = "the cat sat on the mat and the rat ran"
    lm = train_char_lm([text], n_lm=3, k=0.1)
    assert lm.score(text) > lm.score(text[::-1])


@settings(max_examples=40, deadline=None)
@given(
    texts=st.lists(st.text(alphabet="abc d", min_size=0, max_size=12), min_size=1, max_size=5),
    order=st.integers(1, 4),
    ctx=st.text(alphabet="abcdz", max_size=5),
)
def test_lm_normalizes_and_matches_counts(texts, order, ctx):
    lm = train_char_lm(texts, n_lm=order, k=0.3)
    ref = CountLM(texts, order, 0.3)
    syms = list(lm.chars) + ["\x00unk", None]
    total = sum(math.exp(lm.logprob(s, ctx)) for s in syms)
    assert total == pytest.approx(1.0, abs=1e-9)
    for s in syms:
        assert lm.logprob(s, ctx) == pytest.approx(ref.logprob(s, ctx), abs=1e-12)


# ------------------------------------------------------------- decoding

def test_identity_channel_copies_input():
    text = "the quick brown fox"
    m = train_noisy_channel([pair(text, text)] * 20, n_lm=2, k=1e-6)
    assert m.correct(text, DecodingConfig()).output == text


def test_dominant_substitution_is_undone():
    pairs = [pair("abe", "abc")] * 30 + [pair("ab", "ab")] * 10
    m = train_noisy_channel(pairs, n_lm=3, k=0.01)
    assert m.correct("abe", DecodingConfig()).output == "abc"


def test_empty_window():
    m = train_noisy_channel([pair("ab", "ab")])
    got = m.correct("", DecodingConfig())
    assert got.output == "" and got.score == 0.0


def reference_beam(model, observed, beam, max_out):
    """Plain-Python beam search with the same expansion order and tie rules."""
    ch, lm = model.channel, model.lm
    known = list(ch.chars)
    lam = model.lm_weight

    def select(cands):
        ranked = sorted(enumerate(cands), key=lambda qc: (-qc[1][0], qc[0]))
        seen, out = set(), []
        for _, (s, o) in ranked:
            if o not in seen:
                seen.add(o)
                out.append((s, o))
            if len(out) == beam:
                break
        return out

    def deletions(layer):
        return select([(s + ch.dele[ch.symbol_id(t)] + lam * lm.logprob(t, o), o + t)
                       for s, o in layer if len(o) < max_out for t in known])

    states = [(0.0, "")]
    for c in observed:
        oid = ch.symbol_id(c)
        pool, layer = list(states), states
        for _ in range(model.max_deletions):
            layer = deletions(layer)
            if not layer:
                break
            pool += layer
        cands = []
        for s, o in pool:
            cands.append((s + ch.ins[oid], o))
            if len(o) >= max_out:
                continue
            for t in known:
                cands.append((s + ch.sub[ch.symbol_id(t), oid] + lam * lm.logprob(t, o), o + t))
            if oid == ch.unk:
                cands.append((s + ch.sub[ch.unk, ch.unk] + lam * lm.logprob(c, o), o + c))
        states = select(cands)
    best, best_out = -math.inf, ""
    layer = states
    for d in range(model.max_deletions + 1):
        if d:
            layer = deletions(layer)
        for s, o in layer:
            total = s + lam * lm.logprob(None, o)
            if total > best:
                best, best_out = total, o
        if not layer:
            break
    return best_out


@pytest.mark.parametrize("beam", [1, 2, 3, 5, 8])
def test_beam_matches_plain_reference(small_model, beam):
    rng = random.Random(beam)
    cfg = DecodingConfig("beam", beam_width=beam)
    for _ in range(40):
        window = "".join(rng.choice("abcde xy") for _ in range(rng.randint(1, 10)))
        got = small_model.correct(window, cfg)
        assert got.output == reference_beam(small_model, window, beam,
                                            cfg.max_output_len(len(window))), window


def test_greedy_is_beam_of_one(small_model):
    rng = random.Random(3)
    for _ in range(100):
        window = "".join(rng.choice("abcde ") for _ in range(rng.randint(1, 12)))
        g = small_model.correct(window, DecodingConfig("greedy", beam_width=7))
        b = small_model.correct(window, DecodingConfig("beam", beam_width=1))
        assert g == b


def test_score_is_rescoring_of_output(small_model):
    rng = random.Random(4)
    for _ in range(50):
        window = "".join(rng.choice("abcde q") for _ in range(rng.randint(1, 12)))
        got = small_model.correct(window, DecodingConfig())
        assert got.score <= 0
        assert got.score == pytest.approx(small_model.score(window, got.output), abs=1e-9)
        assert len(got.output) <= math.ceil(1.5 * len(window))


def test_correction_is_deterministic(small_model):
    w = WindowSlice("abd ce ab", 3)
    cfg = DecodingConfig()
    assert len({small_model.correct(w, cfg) for _ in range(5)}) == 1


# ------------------------------------------------------------- fixtures

def test_identity_corrector():
    c = IdentityCorrector()
    for s in ["abc", "", "x y"]:
        assert c.correct(s).output == s


def test_oracle_hand_alignment():
    noisy, truth = "Tbe cnt sat", "The cat sat"
    o = OracleCorrector(truth, noisy)
    assert o.correct(WindowSlice(noisy, 0)).output == truth
    assert o.correct(WindowSlice(noisy[4:7], 4)).output == "cat"
    clean = OracleCorrector("abc", "abc")
    assert clean.correct(WindowSlice("bc", 1)).output == "bc"


# ------------------------------------------------------------- persistence

def test_save_load_round_trip(small_model, tmp_path):
    path = save_model(small_model, tmp_path / "m.pocrm")
    loaded = load_model(path)
    assert np.array_equal(loaded.channel.sub, small_model.channel.sub)
    assert np.array_equal(loaded.lm.table, small_model.lm.table)
    rng = random.Random(8)
    cfg = DecodingConfig()
    for _ in range(50):
        window = "".join(rng.choice("abcde ") for _ in range(rng.randint(1, 10)))
        assert loaded.correct(window, cfg) == small_model.correct(window, cfg)
    assert dumps_model(loaded) == dumps_model(small_model)


def test_corrupt_model_files(small_model):
    text = dumps_model(small_model)
    with pytest.raises(CorruptFile):
        loads_model(text.replace("POCRM1", "XXXXX1", 1))
    with pytest.raises(CorruptFile):
        loads_model(text[:-20])
    with pytest.raises(CorruptFile):
        loads_model("POCRM1\n")
    body = text.split("\n", 2)[2]
    tampered = body.replace('"lm_weight":1.0', '"lm_weight":2.0')
    with pytest.raises(CorruptFile):
        loads_model("POCRM1\n" + text.split("\n")[1] + "\n" + tampered)


def test_newer_version_is_refused(small_model):
    text = dumps_model(small_model)
    with pytest.raises(VersionMismatch):
        loads_model(text.replace("POCRM1", "POCRM2", 1))
