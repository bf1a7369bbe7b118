"""Smoke tests for the python bindings."""

import math

import pytest

import probeforge as pf


@pytest.fixture(scope="module")
def toy_checkpoint():
    cfg = pf.ModelConfig()
    cfg.n_layers = 2
    cfg.n_heads = 2
    cfg.d_head = 4
    cfg.d_model = 8
    cfg.d_ffn = 12
    cfg.vocab_size = 32
    cfg.max_seq_len = 64
    return pf.random_checkpoint(cfg, 7)


def test_version_and_tokenizer():
    assert pf.__version__
    ids = pf.encode("hello")
    assert ids == [104, 101, 108, 108, 111]
    assert pf.decode(ids) == "hello"


def test_forward_shapes(toy_checkpoint):
    logits = pf.forward_logits(toy_checkpoint, [1, 2, 3])
    assert len(logits) == 3
    assert len(logits[0]) == toy_checkpoint.config.vocab_size


def test_generate_is_deterministic(toy_checkpoint):
    a = pf.generate(toy_checkpoint, [1, 2, 3], 8)
    b = pf.generate(toy_checkpoint, [1, 2, 3], 8)
    assert a["generated_tokens"] == b["generated_tokens"]
    assert len(a["generated_tokens"]) == 8


def test_save_load_roundtrip(toy_checkpoint, tmp_path):
    path = str(tmp_path / "model.ckpt")
    pf.save_checkpoint(toy_checkpoint, path)
    loaded = pf.load_checkpoint(path)
    diff = pf.diff_checkpoints(toy_checkpoint, loaded)
    assert all(v == 0.0 for v in diff.values())


def test_self_swap_identity(toy_checkpoint):
    swapped = pf.swap_module(toy_checkpoint, toy_checkpoint, "mha")
    diff = pf.diff_checkpoints(toy_checkpoint, swapped)
    assert all(v == 0.0 for v in diff.values())


def test_swap_footprint(toy_checkpoint):
    cfg = toy_checkpoint.config
    other = pf.random_checkpoint(cfg, 8)
    diff = pf.diff_checkpoints(toy_checkpoint, pf.swap_module(toy_checkpoint, other, "ffn"))
    for name, value in diff.items():
        if ".ffn." in name:
            assert value > 0.0
        else:
            assert value == 0.0


def test_confidence_interval_identity():
    stats = pf.confidence_interval([92.1, 92.5, 92.9])
    assert stats["n"] == 3
    assert math.isclose(stats["ci95"], 1.96 * stats["std"] / math.sqrt(3), rel_tol=1e-12)


def test_relative_difference_raises_on_zero_baseline():
    assert pf.relative_difference(2.0, 1.0) == 1.0
    with pytest.raises(pf.WorkbenchError):
        pf.relative_difference(1.0, 0.0)


def test_corpus_stats_and_mix():
    import json

    long_jsonl = "".join(
        json.dumps({"text": "x" * 300}) + "\n" for _ in range(50)
    )
    short_jsonl = "".join(
        json.dumps({"text": "y" * 60}) + "\n" for _ in range(200)
    )
    stats = pf.corpus_stats(short_jsonl)
    assert stats["sample_count"] == 200
    assert stats["avg_length"] == 60

    mixed = pf.mix_corpora(long_jsonl, short_jsonl, 5, 5, 5000, seed=3)
    share = mixed["achieved"]["long_share"]
    assert 0.4 < share < 0.6
    assert not mixed["shortfall"]


def test_entropy_profile(toy_checkpoint):
    profile = pf.entropy_profile(toy_checkpoint, [1, 2, 3, 4], 6)
    assert profile["steps"] == 6
    phase = profile.get("reasoning") or profile.get("answering")
    assert phase is not None
    matrix = phase["matrix"]
    assert matrix["layers"] == 2
    assert matrix["heads"] == 2
    bound = math.log(4 + 6)
    assert all(0.0 <= v <= bound for v in matrix["data"])


def test_activation_stats(toy_checkpoint):
    stats = pf.collect_activation_stats(toy_checkpoint, [[1, 2, 3], [4, 5]], tau=1e-3)
    assert len(stats["per_layer"]) == 2
    assert stats["sample_count"] == 5 * toy_checkpoint.config.d_ffn
    for layer in stats["per_layer"]:
        assert layer["variance"] >= 0.0
        assert 0.0 <= layer["sparsity"] <= 1.0


def test_conflict_suite():
    import json

    facts = "\n".join(
        json.dumps(
            {
                "subject": s,
                "true_value": t,
                "conflict_value": "KL",
                "domain": "custom",
            }
        )
        for s, t in [("A", "uv"), ("B", "wx")]
    )
    cfg = pf.ModelConfig()
    cfg.n_layers = 1
    cfg.n_heads = 1
    cfg.d_head = 8
    cfg.d_model = 8
    cfg.d_ffn = 8
    cfg.max_seq_len = 256
    ckpt = pf.zero_checkpoint(cfg)
    result = pf.run_conflict_suite(ckpt, facts, max_new=4)
    assert result["counts"]["other"] == 2  # zero model answers nothing useful
    rates = result["rates"]
    assert math.isclose(rates["parametric"] + rates["contextual"] + rates["other"], 1.0)


def test_render_heatmap():
    svg = pf.render_heatmap(2, 2, [0.1, 0.2, -0.3, 0.4], title="demo")
    assert svg.startswith("<svg")
    assert "scale=diverging" in svg
    csv = pf.render_heatmap(2, 2, [1.0, 2.0, 3.0, 4.0], format="csv")
    assert "scale=sequential" in csv
