import math

import numpy as np
import pytest

import subprompt as sp


def test_srt_round_trip():
    text = "1\n00:00:01,000 --> 00:00:02,500\nhallo wereld\n\n"
    cues = sp.parse_srt(text)
    assert len(cues) == 1
    assert cues[0].text == "hallo wereld"
    assert sp.render_srt(cues) == text


def test_gini_weights():
    rows = np.array([[0.25, 0.25, 0.25, 0.25], [1.0, 0.0, 0.0, 0.0]])
    g = sp.gini_weights(rows)
    assert g[0] == pytest.approx(0.0, abs=1e-12)
    assert g[1] == pytest.approx(0.75)


def test_wer():
    rep = sp.corpus_wer([("a", "a"), ("b c", "x c")])
    assert rep["wer"] == pytest.approx(100.0 / 3.0)
    ops = sp.align_ops(["a", "b"], ["a", "x"])
    assert [k for k, _, _ in ops] == ["match", "sub"]


def test_vocab_and_decoder_input():
    v = sp.build_vocab(["aa bb cc"], 1)
    ids, mask = sp.assemble_decoder_input(v, "aa", "bb cc")
    assert len(ids) == len(mask) == 1 + 1 + 4 + 2 + 1
    assert sum(mask) == 3  # targets + end token
    assert v.decode(v.encode("bb cc")) == "bb cc"
    assert not sp.hallucination_filter(" ".join(["ja"] * 60))


def test_synth_decode_round_trip(tmp_path):
    train, heldout, vocab_path = sp.synth_corpus(
        n_train=4, n_heldout=2, seed=3, out_dir=str(tmp_path)
    )
    rows = sp.load_manifest(train)
    assert len(rows) == 4
    feats = rows[0]["features"]
    assert feats.ndim == 2 and feats.shape[1] == 16

    v = sp.Vocab.from_json(open(vocab_path).read())
    model = sp.make_model(len(v), d_model=16, n_heads=2, n_layers=1, max_seq=64, seed=1)
    text, score = sp.greedy_decode(model, feats, v, rows[0]["subtitle"], "gini")
    assert isinstance(text, str)
    assert math.isfinite(score)

    ckpt = tmp_path / "model.ckpt"
    sp.save_checkpoint(model, str(ckpt))
    loaded = sp.load_checkpoint(str(ckpt))
    text2, _ = sp.greedy_decode(loaded, feats, v, rows[0]["subtitle"], "gini")
    assert text2 == text
