"""Round-trip and exact-match rewards, plus the policy-objective math.

Rewards are verifiable indicators: the round-trip reward is 1 iff a
forward model maps the predicted reactants back to the query product
(identity = equality of map-stripped canonical SMILES).  A shared cache
keyed by canonical reactant text removes repeated forward calls.  The
objective functions compute values only; no parameters are updated here.
"""

from __future__ import annotations

import json
import logging
import math
import os
import threading
from dataclasses import dataclass, field
from typing import Protocol

import httpx

from retrokit.chem import canonical_smiles, parse_smiles, strip_maps
from retrokit.chem.model import Molecule
from retrokit.chem.reaction import bind_atom_maps, parse_rxn
from retrokit.retro import ReactionTemplate, apply_template, extract_template

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ForwardPrediction:
    """One forward-model candidate; mapped_rxn carries atom provenance
    when the prediction came from the template oracle."""

    product_smiles: str
    mapped_rxn: str | None = None


class ForwardModel(Protocol):
    def predict(self, reactants: list[Molecule]) -> list[ForwardPrediction]: ...


class TemplateForwardModel:
    """Deterministic forward model backed by a reaction-template library."""

    def __init__(self, templates: list[ReactionTemplate]):
        unique: dict[str, ReactionTemplate] = {}
        for t in templates:
            unique.setdefault(t.canonical_form, t)
        self.templates = [unique[k] for k in sorted(unique)]
        self.calls = 0

    def predict(self, reactants: list[Molecule]) -> list[ForwardPrediction]:
        self.calls += 1
        seen: set[str] = set()
        out: list[ForwardPrediction] = []
        for template in self.templates:
            for outcome in apply_template(template, reactants):
                key = canonical_smiles(outcome.product)
                if key not in seen:
                    seen.add(key)
                    out.append(
                        ForwardPrediction(
                            product_smiles=key, mapped_rxn=outcome.mapped_rxn
                        )
                    )
        return out


class HttpForwardModel:
    """Forward-model client speaking the chat-completion protocol.

    The reactant SMILES is sent as the user message; the reply content is
    read as the predicted product SMILES.
    """

    def __init__(self, endpoint: str, model: str = "forward", api_key: str | None = None, timeout: float = 60.0):
        self.endpoint = endpoint
        self.model = model
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(timeout=timeout, headers=headers)
        self.calls = 0

    def predict(self, reactants: list[Molecule]) -> list[ForwardPrediction]:
        self.calls += 1
        text = ".".join(canonical_smiles(m) for m in reactants)
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": text}],
            "temperature": 0.0,
        }
        try:
            response = self._client.post(self.endpoint, json=payload)
            response.raise_for_status()
            content = response.json()["choices"][0]["message"]["content"].strip()
            product = canonical_smiles(strip_maps(parse_smiles(content)))
            return [ForwardPrediction(product_smiles=product)]
        except Exception:
            logger.warning("forward model call failed", exc_info=True)
            return []


class VerifierCache:
    """Thread-safe key-value store from canonical reactants to predictions.

    Entries persist as append-only JSONL ``{key, value}`` rows and are
    reloaded at startup; a hit returns exactly what the miss computed.
    Concurrent duplicate misses may both compute, but they store the same
    deterministic value.
    """

    def __init__(self, path: str | None = None):
        self.path = path
        self._data: dict[str, list[ForwardPrediction]] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        if path and os.path.exists(path):
            with open(path, encoding="utf-8") as handle:
                for line in handle:
                    try:
                        row = json.loads(line)
                    except json.JSONDecodeError:
                        continue
                    self._data[row["key"]] = [
                        ForwardPrediction(p["product"], p.get("mapped_rxn"))
                        for p in row["value"]
                    ]

    def __len__(self) -> int:
        return len(self._data)

    def lookup(self, key: str) -> list[ForwardPrediction] | None:
        with self._lock:
            value = self._data.get(key)
        if value is None:
            self.misses += 1
        else:
            self.hits += 1
        return value

    def store(self, key: str, value: list[ForwardPrediction]) -> None:
        with self._lock:
            self._data[key] = value
            if self.path:
                row = {
                    "key": key,
                    "value": [
                        {"product": p.product_smiles, "mapped_rxn": p.mapped_rxn}
                        for p in value
                    ],
                }
                with open(self.path, "a", encoding="utf-8") as handle:
                    handle.write(json.dumps(row) + "\n")


def reactant_key(reactants: list[Molecule]) -> str:
    """Canonical cache key: map-stripped components in sorted order."""
    return ".".join(
        sorted(canonical_smiles(strip_maps(m)) for m in reactants)
    )


def parse_reactants(text: str) -> list[Molecule] | None:
    """Split a dot-joined reactant string into molecules; None when invalid."""
    try:
        mol = parse_smiles(text.strip())
    except Exception:
        return None
    comps = mol.components()
    return [mol.subgraph(c) for c in comps]


def forward_predictions(
    reactants: list[Molecule],
    fwd: ForwardModel,
    cache: VerifierCache | None = None,
) -> list[ForwardPrediction]:
    """Cache-aware forward call."""
    if cache is None:
        return fwd.predict(reactants)
    key = reactant_key(reactants)
    cached = cache.lookup(key)
    if cached is not None:
        return cached
    value = fwd.predict(reactants)
    cache.store(key, value)
    return value


def roundtrip_reward(
    product: Molecule | str,
    predicted_reactants: str | list[Molecule],
    fwd: ForwardModel,
    cache: VerifierCache | None = None,
) -> int:
    """1 iff any forward candidate equals the product canonically.

    Unparseable reactants score 0; forward-model failures score 0 with a
    logged warning.
    """
    if isinstance(predicted_reactants, str):
        reactants = parse_reactants(predicted_reactants)
        if reactants is None:
            return 0
    else:
        reactants = predicted_reactants
    if not reactants:
        return 0
    target = (
        canonical_smiles(strip_maps(parse_smiles(product)))
        if isinstance(product, str)
        else canonical_smiles(strip_maps(product))
    )
    try:
        predictions = forward_predictions(reactants, fwd, cache)
    except Exception:
        logger.warning("forward model failed; reward 0", exc_info=True)
        return 0
    return int(any(p.product_smiles == target for p in predictions))


def exact_reward(labeled: str | list[str], predicted: str | list[str]) -> int:
    """1 iff the canonical reactant multisets are equal (order-free)."""

    def multiset(value: str | list[str]) -> tuple[str, ...] | None:
        parts = value.split(".") if isinstance(value, str) else list(value)
        try:
            return tuple(
                sorted(
                    canonical_smiles(strip_maps(parse_smiles(p))) for p in parts
                )
            )
        except Exception:
            return None

    left = multiset(labeled)
    right = multiset(predicted)
    return int(left is not None and left == right)


def group_advantages(rewards: list[float]) -> list[float]:
    """Group-normalized advantages: (R_i - mean) / population std.

    An all-equal group has zero spread and yields zero advantages.
    """
    if not rewards:
        raise ValueError("empty reward group")
    g = len(rewards)
    mean = sum(rewards) / g
    variance = sum((r - mean) ** 2 for r in rewards) / g
    std = math.sqrt(variance)
    if std == 0.0:
        return [0.0] * g
    return [(r - mean) / std for r in rewards]


@dataclass(frozen=True)
class ClipConfig:
    eps_low: float = 0.2
    eps_high: float = 0.2

    def __post_init__(self) -> None:
        for eps in (self.eps_low, self.eps_high):
            if not 0.0 < eps < 1.0:
                raise ValueError("clip epsilons must lie in (0, 1)")


@dataclass(frozen=True)
class TokenScores:
    """Per-token log-probabilities under the current and behavior policies."""

    logp_new: tuple[float, ...]
    logp_old: tuple[float, ...]
    mask: tuple[bool, ...]

    def __post_init__(self) -> None:
        if not (len(self.logp_new) == len(self.logp_old) == len(self.mask)):
            raise ValueError("token arrays must share a length")

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(
            math.exp(n - o) for n, o in zip(self.logp_new, self.logp_old)
        )


@dataclass(frozen=True)
class RewardGroup:
    """G sampled outputs for one query with their rewards and advantages."""

    query: str
    outputs: tuple[str, ...]
    rewards: tuple[float, ...]
    advantages: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if len(self.outputs) != len(self.rewards):
            raise ValueError("outputs and rewards must align")
        if not self.advantages:
            object.__setattr__(
                self, "advantages", tuple(group_advantages(list(self.rewards)))
            )


def clipped_objective(
    scores: TokenScores, advantage: float, clip: ClipConfig
) -> float:
    """Masked sum of min(r*A, clip(r, 1-eps_low, 1+eps_high)*A) over tokens."""
    if not any(scores.mask):
        raise ValueError("mask selects no tokens")
    total = 0.0
    for ratio, keep in zip(scores.ratios, scores.mask):
        if not keep:
            continue
        clipped = min(max(ratio, 1.0 - clip.eps_low), 1.0 + clip.eps_high)
        total += min(ratio * advantage, clipped * advantage)
    return total


def group_objective(
    members: list[tuple[TokenScores, float]], clip: ClipConfig
) -> float:
    """Group-level value: mean over the G per-sequence clipped sums."""
    if not members:
        raise ValueError("empty group")
    return sum(
        clipped_objective(scores, adv, clip) for scores, adv in members
    ) / len(members)


def sft_loss(scores: TokenScores) -> float:
    """Mean negative log-probability over masked (assistant) tokens."""
    values = [
        -logp for logp, keep in zip(scores.logp_new, scores.mask) if keep
    ]
    if not values:
        raise ValueError("mask selects no tokens")
    return sum(values) / len(values)


def templates_from_corpus(lines: list[str]) -> list[ReactionTemplate]:
    """Extract a template library from mapped RXN lines, skipping failures."""
    templates = []
    for line in lines:
        try:
            mapped = bind_atom_maps(parse_rxn(line))
            templates.append(extract_template(mapped))
        except Exception:
            continue
    return templates
