"""Desk-scale transformer interpretability workbench.

Thin pythonic layer over the C++ core: structured results come back as
dicts (decoded from the core's JSON payloads).
"""

import json as _json

from probeforge._core import (  # noqa: F401
    Checkpoint,
    ModelConfig,
    WorkbenchError,
    __version__,
    decode,
    diff_checkpoints,
    encode,
    forward_logits,
    load_checkpoint,
    random_checkpoint,
    relative_difference,
    render_heatmap,
    save_checkpoint,
    swap_module,
    zero_checkpoint,
)
from probeforge import _core


def generate(ckpt, prompt, max_new, marker=()):
    return _json.loads(_core.generate_json(ckpt, list(prompt), max_new, list(marker)))


def run_needle_suite(ckpt, config):
    return _json.loads(_core.run_needle_suite_json(ckpt, _json.dumps(config)))


def entropy_profile(ckpt, prompt, max_new, marker=()):
    return _json.loads(_core.entropy_profile_json(ckpt, list(prompt), max_new, list(marker)))


def collect_activation_stats(ckpt, prompts, tau=1e-3):
    return _json.loads(
        _core.collect_activation_stats_json(ckpt, [list(p) for p in prompts], tau)
    )


def run_conflict_suite(ckpt, facts_jsonl, templates_json="", max_new=16, injected=True):
    return _json.loads(
        _core.run_conflict_suite_json(ckpt, facts_jsonl, templates_json, max_new, injected)
    )


def mix_corpora(long_jsonl, short_jsonl, long_parts, short_parts, budget, seed=0):
    return _json.loads(
        _core.mix_corpora_json(long_jsonl, short_jsonl, long_parts, short_parts, budget, seed)
    )


def corpus_stats(jsonl):
    return _json.loads(_core.corpus_stats_json(jsonl))


def confidence_interval(values, use_t=False):
    return _json.loads(_core.confidence_interval_json(list(values), use_t))
