"""N-gram rarity scoring, hard-set construction, and frequency histograms.

Tokens are sliding character n-grams of the product SMILES.  A token's
score is the negative log of its occurrence ratio, an instance's score
is the mean over its tokens, and hard sets draw from rare-template
frequency buckets and from the top of the rarity ranking.
"""

from __future__ import annotations

import csv
import math
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from retrokit.errors import InsufficientPoolError


@dataclass(frozen=True)
class RarityModel:
    """Character n-gram counts with -log occurrence-ratio scores."""

    n: int
    counts: dict[str, int]
    total: int

    def score(self, token: str) -> float:
        count = self.counts.get(token)
        if count is None:
            # unseen token: add-one against the enlarged table
            return -math.log(1.0 / (self.total + 1))
        return -math.log(count / self.total)


def ngrams(text: str, n: int) -> list[str]:
    return [text[i : i + n] for i in range(len(text) - n + 1)]


def build_rarity_model(products: list[str], n: int) -> RarityModel:
    """Count sliding n-grams over all product strings."""
    if not products:
        raise ValueError("empty corpus")
    counts: Counter[str] = Counter()
    for text in products:
        counts.update(ngrams(text, n))
    return RarityModel(n=n, counts=dict(counts), total=sum(counts.values()))


def score_instance(product: str, model: RarityModel) -> float:
    """Mean token score over the instance's n-grams (0.0 if too short)."""
    tokens = ngrams(product, model.n)
    if not tokens:
        return 0.0
    return sum(model.score(t) for t in tokens) / len(tokens)


@dataclass(frozen=True)
class HardSets:
    rare_template_ids: tuple[str, ...]
    rare_token_ids: tuple[str, ...]


def _frequency_bucket(
    pool: list[tuple[str, str]],
    frequencies: dict[str, int],
    lo: int,
    hi: int,
) -> list[str]:
    return [
        instance_id
        for instance_id, template in pool
        if template in frequencies and lo <= frequencies[template] <= hi
    ]


def build_hardsets(
    template_frequencies: dict[str, int],
    pool_templates: list[tuple[str, str]],
    pool_products: list[tuple[str, str]],
    size: int = 100,
    seed: int = 0,
) -> HardSets:
    """Construct the two hard evaluation subsets.

    ``pool_templates`` pairs instance ids with their canonical template;
    ``pool_products`` pairs ids with product SMILES.  The rare-template
    set samples size/2 instances whose template frequency lies in [1, 3]
    and size/2 in [4, 6].  The rare-token set takes the top size/2 ids by
    2-gram score and the top size/2 by 3-gram score, deduplicated with
    next-ranked backfill.  Raises InsufficientPoolError when any bucket
    runs short.
    """
    rng = random.Random(seed)
    half = size // 2

    chosen_template: list[str] = []
    for lo, hi in ((1, 3), (4, 6)):
        bucket = _frequency_bucket(pool_templates, template_frequencies, lo, hi)
        if len(bucket) < half:
            raise InsufficientPoolError(
                f"template bucket [{lo}, {hi}] has {len(bucket)} < {half} instances"
            )
        picked = rng.sample(sorted(bucket), half)
        chosen_template.extend(picked)

    products = [p for _, p in pool_products]
    chosen_token: list[str] = []
    taken: set[str] = set()
    for n in (2, 3):
        model = build_rarity_model(products, n)
        ranked = sorted(
            pool_products,
            key=lambda item: (-score_instance(item[1], model), item[0]),
        )
        added = 0
        for instance_id, _ in ranked:
            if added == half:
                break
            if instance_id in taken:
                continue
            taken.add(instance_id)
            chosen_token.append(instance_id)
            added += 1
        if added < half:
            raise InsufficientPoolError(
                f"rare-token pool exhausted for {n}-grams ({added} < {half})"
            )

    return HardSets(
        rare_template_ids=tuple(chosen_template),
        rare_token_ids=tuple(chosen_token),
    )


def frequency_table(items: list[str]) -> list[tuple[str, int]]:
    """(token, count) rows sorted by descending count then token."""
    counts = Counter(items)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def top_bottom(table: list[tuple[str, int]], k: int = 15) -> list[tuple[str, int]]:
    """Top-k plus bottom-k rows (entire table when shorter than 2k)."""
    if len(table) <= 2 * k:
        return list(table)
    return list(table[:k]) + list(table[-k:])


def emit_histograms(
    templates: list[str],
    products: list[str],
    out_dir: str | Path,
    k: int = 15,
) -> dict[str, Path]:
    """Write template/2-gram/3-gram frequency CSVs and bar charts.

    Full tables go to ``*_frequencies.csv``; the charts show the top-k
    and bottom-k entries.  Returns the paths keyed by table name.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables = {
        "template": frequency_table(templates),
        "2gram": frequency_table(
            [t for p in products for t in ngrams(p, 2)]
        ),
        "3gram": frequency_table(
            [t for p in products for t in ngrams(p, 3)]
        ),
    }
    paths: dict[str, Path] = {}
    for name, table in tables.items():
        csv_path = out / f"{name}_frequencies.csv"
        with open(csv_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["token", "count"])
            writer.writerows(table)
        paths[name] = csv_path

        shown = top_bottom(table, k)
        fig, ax = plt.subplots(figsize=(max(6, len(shown) * 0.4), 4))
        ax.bar(range(len(shown)), [c for _, c in shown])
        ax.set_xticks(range(len(shown)))
        ax.set_xticklabels(
            [t if len(t) <= 24 else t[:21] + "..." for t, _ in shown],
            rotation=90, fontsize=6,
        )
        ax.set_ylabel("count")
        ax.set_title(f"{name} frequencies (top/bottom {k})")
        fig.tight_layout()
        svg_path = out / f"{name}_frequencies.svg"
        fig.savefig(svg_path)
        plt.close(fig)
        paths[f"{name}_chart"] = svg_path
    return paths
