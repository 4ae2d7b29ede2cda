import csv
import math

import pytest

from retrokit.errors import InsufficientPoolError
from retrokit.rarity import (
    build_hardsets,
    build_rarity_model,
    emit_histograms,
    frequency_table,
    ngrams,
    score_instance,
    top_bottom,
)


def test_score_from_counts():
    model = build_rarity_model(["CCC", "CO"], 2)
    # counts: CC x2, CO x1, total 3... build over both strings: CCC -> CC,CC; CO -> CO
    assert model.counts == {"CC": 2, "CO": 1}
    assert abs(model.score("CO") - (-math.log(1 / 3))) < 1e-12


def test_documented_example_quarter():
    model = build_rarity_model(["CCCC", "CO"], 2)
    # CC appears three times, CO once
    assert model.counts == {"CC": 3, "CO": 1}
    assert abs(model.score("CO") - 1.3862943611198906) < 1e-9


def test_uniform_counts_equal_scores():
    model = build_rarity_model(["AB", "CD", "EF"], 2)
    scores = {model.score(t) for t in model.counts}
    assert len(scores) == 1


def test_most_frequent_token_scores_minimum():
    model = build_rarity_model(["CCCCCC", "CN"], 2)
    assert model.score("CC") == min(model.score(t) for t in model.counts)


def test_unseen_token_scores_above_rarest():
    model = build_rarity_model(["CCCCCC", "CN"], 2)
    rarest = max(model.score(t) for t in model.counts)
    assert model.score("ZZ") > rarest


def test_instance_score_is_mean():
    model = build_rarity_model(["ABAB", "CD"], 2)
    # "ABC" has tokens AB, BC(unseen): mean of the two scores
    expected = (model.score("AB") + model.score("BC")) / 2
    assert abs(score_instance("ABC", model) - expected) < 1e-12


def test_single_token_instance():
    model = build_rarity_model(["ABAB"], 2)
    assert score_instance("AB", model) == model.score("AB")


def test_common_only_instance_scores_below_rare_bearing():
    corpus = ["CCCCCCCC"] * 9 + ["CSe"]
    model = build_rarity_model(corpus, 2)
    assert score_instance("CCCC", model) < score_instance("CCSe", model)


def test_too_short_instance_scores_zero():
    model = build_rarity_model(["CCCC"], 3)
    assert score_instance("C", model) == 0.0


def make_pool():
    frequencies = {"T_common": 10, "T_rare": 2, "T_mid": 5}
    pool_templates = []
    pool_products = []
    for i in range(30):
        if i < 10:
            template = "T_rare" if i < 5 else "T_mid"
        else:
            template = "T_common"
        rare_mark = "Se" if i < 6 else ""
        pool_templates.append((f"p{i:02d}", template))
        pool_products.append((f"p{i:02d}", f"CCCC{rare_mark}CC{'O' * (i % 3)}"))
    return frequencies, pool_templates, pool_products


def test_bucket_membership_respected():
    frequencies, pool_templates, pool_products = make_pool()
    sets = build_hardsets(frequencies, pool_templates, pool_products, size=8, seed=3)
    by_id = dict(pool_templates)
    low = sets.rare_template_ids[:4]
    high = sets.rare_template_ids[4:]
    assert all(frequencies[by_id[i]] in (1, 2, 3) for i in low)
    assert all(frequencies[by_id[i]] in (4, 5, 6) for i in high)
    # frequency-10 instances appear in neither bucket
    assert all(frequencies[by_id[i]] != 10 for i in sets.rare_template_ids)


def test_default_sizes_give_100(corpus_lines):
    # synthetic pool large enough for the paper-sized selection
    frequencies = {f"T{i}": (i % 6) + 1 for i in range(400)}
    pool_templates = [(f"x{i:03d}", f"T{i % 400}") for i in range(400)]
    pool_products = [(f"x{i:03d}", f"C{'N' * (i % 7)}CCO{'S' * (i % 3)}") for i in range(400)]
    sets = build_hardsets(frequencies, pool_templates, pool_products, size=100, seed=1)
    assert len(sets.rare_template_ids) == 100
    assert len(sets.rare_token_ids) == 100
    # deduplicated
    assert len(set(sets.rare_token_ids)) == 100


def test_seeded_determinism():
    frequencies, pool_templates, pool_products = make_pool()
    a = build_hardsets(frequencies, pool_templates, pool_products, size=8, seed=11)
    b = build_hardsets(frequencies, pool_templates, pool_products, size=8, seed=11)
    c = build_hardsets(frequencies, pool_templates, pool_products, size=8, seed=12)
    assert a == b
    assert a != c


def test_rare_token_top_matches_bruteforce_sort():
    frequencies, pool_templates, pool_products = make_pool()
    sets = build_hardsets(frequencies, pool_templates, pool_products, size=8, seed=3)
    products = [p for _, p in pool_products]
    model2 = build_rarity_model(products, 2)
    ranked = sorted(
        pool_products, key=lambda item: (-score_instance(item[1], model2), item[0])
    )
    assert list(sets.rare_token_ids[:4]) == [i for i, _ in ranked[:4]]


def test_insufficient_pool_raises():
    frequencies, pool_templates, pool_products = make_pool()
    with pytest.raises(InsufficientPoolError):
        build_hardsets(frequencies, pool_templates, pool_products, size=40, seed=0)


def test_tiny_table_top_bottom():
    table = frequency_table(["a", "b", "a", "c"])
    assert table == [("a", 2), ("b", 1), ("c", 1)]
    assert top_bottom(table, 15) == table


def test_histograms_csv_conservation(tmp_path):
    templates = ["T_amide"] * 6 + ["T_ester"] * 3 + ["T_rare"]
    products = ["CCO", "CCN", "CCOC"]
    paths = emit_histograms(templates, products, tmp_path)
    with open(paths["template"]) as handle:
        rows = list(csv.DictReader(handle))
    assert sum(int(r["count"]) for r in rows) == len(templates)
    assert rows[0]["token"] == "T_amide"
    total_2grams = sum(len(ngrams(p, 2)) for p in products)
    with open(paths["2gram"]) as handle:
        rows2 = list(csv.DictReader(handle))
    assert sum(int(r["count"]) for r in rows2) == total_2grams
    assert paths["template_chart"].exists()


def test_amide_dominated_corpus_ranks_first(corpus_lines):
    from retrokit.chem import bind_atom_maps, parse_rxn
    from retrokit.retro import extract_template

    templates = [
        extract_template(bind_atom_maps(parse_rxn(line))).canonical_form
        for line in corpus_lines
    ]
    table = frequency_table(templates)
    assert table[0][0] == "[N:1].[C:2](=O)-O>>[N:1]-[C:2]=O"
