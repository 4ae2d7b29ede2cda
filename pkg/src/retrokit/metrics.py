"""Evaluation metrics over greedy and sampled reactant predictions.

Seven aggregates, each averaged over instances: exact and round-trip
accuracy at 1 and at K, feasible ratio (fraction of the K samples that
round-trip), template diversity (distinct canonical templates among the
feasible samples), and invalid ratio (samples that fail to parse).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from retrokit.chem import bind_atom_maps, parse_rxn
from retrokit.retro import extract_template
from retrokit.chem import canonical_smiles, parse_smiles, strip_maps
from retrokit.rlvr import (
    ForwardModel,
    VerifierCache,
    exact_reward,
    forward_predictions,
    parse_reactants,
)


@dataclass(frozen=True)
class SampleSet:
    """Predictions for one instance: a greedy answer plus K samples."""

    id: str
    product: str
    label_reactants: str
    greedy: str
    samples: tuple[str, ...]

    @staticmethod
    def from_json(line: str) -> "SampleSet":
        row = json.loads(line)
        return SampleSet(
            id=row["id"],
            product=row["product"],
            label_reactants=row["label_reactants"],
            greedy=row["greedy"],
            samples=tuple(row["samples"]),
        )


@dataclass(frozen=True)
class InstanceMetrics:
    id: str
    exact_at_1: int
    roundtrip_at_1: int
    exact_at_k: int
    roundtrip_at_k: int
    feasible_fraction: float
    template_count: int
    invalid_fraction: float


@dataclass(frozen=True)
class MetricsReport:
    exact_at_1: float
    roundtrip_at_1: float
    exact_at_k: float
    roundtrip_at_k: float
    feasible_ratio: float
    template_diversity: float
    invalid_ratio: float
    k: int
    per_instance: tuple[InstanceMetrics, ...] = field(compare=False)

    def as_dict(self) -> dict:
        return {
            "exact_at_1": self.exact_at_1,
            "roundtrip_at_1": self.roundtrip_at_1,
            "exact_at_k": self.exact_at_k,
            "roundtrip_at_k": self.roundtrip_at_k,
            "feasible_ratio": self.feasible_ratio,
            "template_diversity": self.template_diversity,
            "invalid_ratio": self.invalid_ratio,
            "k": self.k,
        }


def _roundtrip_hit(
    product_canon: str,
    candidate: str,
    fwd: ForwardModel,
    cache: VerifierCache | None,
) -> tuple[bool, str | None]:
    """Whether the candidate round-trips, and the matching mapped reaction."""
    reactants = parse_reactants(candidate)
    if not reactants:
        return False, None
    try:
        predictions = forward_predictions(reactants, fwd, cache)
    except Exception:
        return False, None
    for prediction in predictions:
        if prediction.product_smiles == product_canon:
            return True, prediction.mapped_rxn
    return False, None


def candidate_template(mapped_rxn: str | None) -> str | None:
    """Canonical template of a feasible (reactants, product) pair."""
    if mapped_rxn is None:
        return None
    try:
        mapped = bind_atom_maps(parse_rxn(mapped_rxn))
        return extract_template(mapped).canonical_form
    except Exception:
        return None


def _is_valid(candidate: str) -> bool:
    return parse_reactants(candidate) is not None


def _instance_metrics(
    instance: SampleSet,
    fwd: ForwardModel,
    cache: VerifierCache | None,
    K: int,
) -> InstanceMetrics:
    product_canon = canonical_smiles(strip_maps(parse_smiles(instance.product)))
    e1 = exact_reward(instance.label_reactants, instance.greedy)
    rt1_hit, _ = _roundtrip_hit(product_canon, instance.greedy, fwd, cache)

    considered = list(instance.samples[:K])
    exact_k = 0
    roundtrip_k = 0
    feasible = 0
    invalid = K - len(considered)
    templates: set[str] = set()
    for candidate in considered:
        if not _is_valid(candidate):
            invalid += 1
            continue
        if exact_reward(instance.label_reactants, candidate):
            exact_k = 1
        hit, mapped_rxn = _roundtrip_hit(product_canon, candidate, fwd, cache)
        if hit:
            roundtrip_k = 1
            feasible += 1
            template = candidate_template(mapped_rxn)
            if template is not None:
                templates.add(template)
    return InstanceMetrics(
        id=instance.id,
        exact_at_1=e1,
        roundtrip_at_1=int(rt1_hit),
        exact_at_k=exact_k,
        roundtrip_at_k=roundtrip_k,
        feasible_fraction=feasible / K,
        template_count=len(templates),
        invalid_fraction=invalid / K,
    )


def compute_metrics(
    samples: list[SampleSet],
    fwd: ForwardModel,
    cache: VerifierCache | None = None,
    k: int | None = None,
    workers: int = 1,
) -> MetricsReport:
    """Evaluate all metric formulas over the sample sets.

    ``k`` defaults to the stored sample count; shorter sample lists are
    padded conceptually with invalid (hence infeasible) candidates.
    Unparseable candidates count toward the invalid ratio and never
    round-trip.  With ``workers > 1`` instances are scored in parallel
    (the cache is shared and thread-safe); aggregation stays a
    single-threaded reduce.
    """
    if not samples:
        raise ValueError("no samples to evaluate")
    K = k or max(len(s.samples) for s in samples)
    if K < 1:
        raise ValueError("K must be >= 1")

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(
                pool.map(lambda s: _instance_metrics(s, fwd, cache, K), samples)
            )
    else:
        rows = [_instance_metrics(s, fwd, cache, K) for s in samples]

    n = len(rows)
    return MetricsReport(
        exact_at_1=sum(r.exact_at_1 for r in rows) / n,
        roundtrip_at_1=sum(r.roundtrip_at_1 for r in rows) / n,
        exact_at_k=sum(r.exact_at_k for r in rows) / n,
        roundtrip_at_k=sum(r.roundtrip_at_k for r in rows) / n,
        feasible_ratio=sum(r.feasible_fraction for r in rows) / n,
        template_diversity=sum(r.template_count for r in rows) / n,
        invalid_ratio=sum(r.invalid_fraction for r in rows) / n,
        k=K,
        per_instance=tuple(rows),
    )
