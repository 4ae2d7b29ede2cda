import math
import random
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from retrokit.chem import bind_atom_maps, canonical_smiles, parse_rxn, parse_smiles
from retrokit.rlvr import (
    ClipConfig,
    RewardGroup,
    TemplateForwardModel,
    TokenScores,
    VerifierCache,
    clipped_objective,
    exact_reward,
    group_advantages,
    group_objective,
    roundtrip_reward,
    sft_loss,
    templates_from_corpus,
)

from conftest import ACYL_SMILES, MAPPED_RXN, PRODUCT_SMILES, THIOL_SMILES


@pytest.fixture(scope="module")
def oracle():
    return TemplateForwardModel(templates_from_corpus([MAPPED_RXN]))


LABELED = f"{THIOL_SMILES}.{ACYL_SMILES}"


def test_advantages_mixed_group():
    assert group_advantages([1, 0, 0, 1]) == [1.0, -1.0, -1.0, 1.0]


def test_advantages_degenerate_group():
    assert group_advantages([1, 1, 1, 1]) == [0.0, 0.0, 0.0, 0.0]


def test_advantages_pair():
    assert group_advantages([1, 0]) == [1.0, -1.0]


@given(
    st.lists(
        st.integers(min_value=0, max_value=16).map(lambda v: v / 16),
        min_size=2,
        max_size=32,
    )
)
@settings(max_examples=200, deadline=None)
def test_advantage_normalization_property(rewards):
    advantages = group_advantages(rewards)
    if all(r == rewards[0] for r in rewards):
        assert advantages == [0.0] * len(rewards)
        return
    g = len(advantages)
    mean = sum(advantages) / g
    std = math.sqrt(sum((a - mean) ** 2 for a in advantages) / g)
    assert abs(mean) < 1e-9
    assert abs(std - 1.0) < 1e-9


def scores_for_ratio(ratio: float, tokens: int = 1) -> TokenScores:
    return TokenScores(
        logp_new=(math.log(ratio),) * tokens,
        logp_old=(0.0,) * tokens,
        mask=(True,) * tokens,
    )


def test_clipped_identity_ratio():
    assert abs(clipped_objective(scores_for_ratio(1.0, 3), 0.7, ClipConfig()) - 2.1) < 1e-12


def test_clipped_high_ratio_clamped():
    assert abs(clipped_objective(scores_for_ratio(1.5), 1.0, ClipConfig()) - 1.2) < 1e-12


def test_clipped_low_ratio_negative_advantage():
    # min(r*A, clip(r)*A) with r=0.5, A=-1: min(-0.5, -0.8) = -0.8
    value = clipped_objective(scores_for_ratio(0.5), -1.0, ClipConfig())
    assert abs(value - (-0.8)) < 1e-12


@given(
    st.floats(min_value=0.81, max_value=1.19),
    st.floats(min_value=-3, max_value=3),
)
@settings(max_examples=200, deadline=None)
def test_clip_inactive_inside_band(ratio, advantage):
    value = clipped_objective(scores_for_ratio(ratio), advantage, ClipConfig())
    assert abs(value - ratio * advantage) < 1e-9


def test_ratio_definition():
    scores = TokenScores(logp_new=(-1.0, -0.5), logp_old=(-1.5, -0.5), mask=(True, True))
    assert abs(scores.ratios[0] - math.exp(0.5)) < 1e-9
    assert abs(scores.ratios[1] - 1.0) < 1e-9


def test_group_objective_averages():
    members = [
        (scores_for_ratio(1.0, 2), 1.0),
        (scores_for_ratio(1.0, 2), -1.0),
    ]
    assert abs(group_objective(members, ClipConfig())) < 1e-12


def test_mask_must_select_tokens():
    empty = TokenScores(logp_new=(0.0,), logp_old=(0.0,), mask=(False,))
    with pytest.raises(ValueError):
        clipped_objective(empty, 1.0, ClipConfig())
    with pytest.raises(ValueError):
        sft_loss(empty)


def test_sft_all_certain():
    scores = TokenScores(logp_new=(0.0, 0.0), logp_old=(0.0, 0.0), mask=(True, True))
    assert sft_loss(scores) == 0.0


def test_sft_mean():
    scores = TokenScores(logp_new=(-1.0, -2.0), logp_old=(0.0, 0.0), mask=(True, True))
    assert abs(sft_loss(scores) - 1.5) < 1e-12


def test_sft_masking():
    scores = TokenScores(logp_new=(-1.0, -2.0), logp_old=(0.0, 0.0), mask=(True, False))
    assert abs(sft_loss(scores) - 1.0) < 1e-12


def test_reward_group_autofills_advantages():
    group = RewardGroup(
        query="q", outputs=("a", "b"), rewards=(1.0, 0.0)
    )
    assert group.advantages == (1.0, -1.0)


def test_clip_config_validation():
    with pytest.raises(ValueError):
        ClipConfig(eps_low=0.0)
    with pytest.raises(ValueError):
        ClipConfig(eps_high=1.0)


def test_roundtrip_reward_labeled_reactants(oracle):
    cache = VerifierCache()
    assert roundtrip_reward(parse_smiles(PRODUCT_SMILES), LABELED, oracle, cache) == 1


def test_roundtrip_reward_invalid_input(oracle):
    assert roundtrip_reward(parse_smiles(PRODUCT_SMILES), "not smiles", oracle) == 0


def test_roundtrip_reward_wrong_reactants(oracle):
    assert roundtrip_reward(parse_smiles(PRODUCT_SMILES), "CCO.CC", oracle) == 0


def test_cache_prevents_repeat_forward_calls():
    oracle = TemplateForwardModel(templates_from_corpus([MAPPED_RXN]))
    cache = VerifierCache()
    product = parse_smiles(PRODUCT_SMILES)
    first = roundtrip_reward(product, LABELED, oracle, cache)
    calls_after_first = oracle.calls
    second = roundtrip_reward(product, LABELED, oracle, cache)
    assert first == second == 1
    assert oracle.calls == calls_after_first


def test_cache_transparency_and_call_bound(corpus_lines):
    """Same reward sequence with and without cache; calls <= distinct keys."""
    rng = random.Random(0)
    lines = rng.sample(corpus_lines, 12)
    templates = templates_from_corpus(lines)
    workload = []
    for line in lines:
        mapped = bind_atom_maps(parse_rxn(line))
        labeled = ".".join(canonical_smiles(m) for m in mapped.base.precursors)
        workload.append((mapped.base.product, labeled))
    # each query twice, to exercise cache hits
    workload = workload + workload

    plain_oracle = TemplateForwardModel(templates)
    plain = [roundtrip_reward(p, y, plain_oracle) for p, y in workload]

    cached_oracle = TemplateForwardModel(templates)
    cache = VerifierCache()
    cached = [roundtrip_reward(p, y, cached_oracle, cache) for p, y in workload]

    assert plain == cached
    distinct_keys = len({y for _, y in workload})
    assert cached_oracle.calls <= distinct_keys
    assert sum(cached) == len(workload)  # corpus is self-consistent


def test_cache_persistence(tmp_path, oracle):
    path = str(tmp_path / "cache.jsonl")
    cache = VerifierCache(path)
    product = parse_smiles(PRODUCT_SMILES)
    roundtrip_reward(product, LABELED, oracle, cache)
    assert len(cache) == 1

    reloaded = VerifierCache(path)
    assert len(reloaded) == 1
    fresh_oracle = TemplateForwardModel(templates_from_corpus([MAPPED_RXN]))
    calls_before = fresh_oracle.calls
    assert roundtrip_reward(product, LABELED, fresh_oracle, reloaded) == 1
    assert fresh_oracle.calls == calls_before


def test_cache_concurrent_access(oracle):
    cache = VerifierCache()
    product = parse_smiles(PRODUCT_SMILES)
    results = []

    def worker():
        results.append(roundtrip_reward(product, LABELED, oracle, cache))

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results == [1] * 8


def test_roundtrip_invariant_to_component_order_and_rewriting(oracle):
    product = parse_smiles(PRODUCT_SMILES)
    cache = VerifierCache()
    flipped = f"{ACYL_SMILES}.{THIOL_SMILES}"
    rewritten = canonical_smiles(parse_smiles(THIOL_SMILES)) + "." + ACYL_SMILES
    assert roundtrip_reward(product, LABELED, oracle, cache) == 1
    assert roundtrip_reward(product, flipped, oracle, cache) == 1
    assert roundtrip_reward(product, rewritten, oracle, cache) == 1
    # all three used one cache key
    assert len(cache) == 1


def test_exact_reward_cases():
    assert exact_reward("CC.O", "CC.O") == 1
    assert exact_reward("CC.O", "O.CC") == 1
    assert exact_reward(LABELED, f"{ACYL_SMILES}.{THIOL_SMILES}") == 1
    assert exact_reward(LABELED, ACYL_SMILES) == 0
    assert exact_reward("CC", "not smiles") == 0
