"""Structured disconnection rationales and their tagged text form.

A complete rationale has four structured steps: product analysis,
candidate substructure, strategic bond disconnection with synthons, and
synthon-to-equivalent mapping, each serialized inside its own tag block,
with optional linking prose between consecutive blocks and the reactant
answer on the final line.  ``parse_output`` is the lenient inverse used
on model text: missing or malformed blocks come back as None.
"""

from __future__ import annotations

import hashlib
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from retrokit.chem import parse_smiles
from retrokit.chem.model import BondOrder
from retrokit.chem.reaction import MappedReaction
from retrokit.chem.writer import WriteOptions, write_smiles
from retrokit.errors import GenerationError
from retrokit.patterns import PatternDef
from retrokit.perception import FunctionalGroupHit, ProductStats, analyze_product
from retrokit.retro import (
    diff_bonds,
    extract_template,
    identify_disconnections,
    make_synthons,
    map_equivalents,
    equivalent_smiles,
    synthon_from_smiles,
)
from retrokit.retro.template import _template_atoms

TAG_PRODUCT_INFO = "PRODUCT_INFO"
TAG_CANDIDATE = "CANDIDATE_STRUCTURE"
TAG_DISCONNECTION = "STRATEGIC_BOND_DISCONNECTION"
TAG_EQUIVALENT = "SYNTHETIC_EQUIVALENT"
TAG_ORDER = (TAG_PRODUCT_INFO, TAG_CANDIDATE, TAG_DISCONNECTION, TAG_EQUIVALENT)

ANSWER_PREFIX = "Reactants: "


@dataclass(frozen=True)
class ProductInfo:
    mapped_smiles: str
    groups: tuple[FunctionalGroupHit, ...]
    stats: ProductStats


@dataclass(frozen=True)
class CandidateStructure:
    fragment_smiles: str
    atom_maps: tuple[int, ...]


@dataclass(frozen=True)
class DisconnectionStep:
    bond: tuple[int, int]
    order: BondOrder
    synthons: tuple[str, ...]


@dataclass(frozen=True)
class EquivalentStep:
    pairs: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Links:
    l12: str | None = None
    l23: str | None = None
    l34: str | None = None


@dataclass(frozen=True)
class Rationale:
    r1: ProductInfo | None = None
    r2: CandidateStructure | None = None
    r3: DisconnectionStep | None = None
    r4: EquivalentStep | None = None
    links: Links = Links()
    answer: tuple[str, ...] = ()

    def is_complete(self) -> bool:
        return None not in (self.r1, self.r2, self.r3, self.r4)


@dataclass(frozen=True)
class StepScore:
    """Per-field correctness of a predicted rationale against gold."""

    atom_mapping: bool = False
    functional_groups: bool = False
    smiles_stats: bool = False
    candidate_structure: bool = False
    disconnection: bool = False
    synthons: bool = False
    equivalents: bool = False


@dataclass(frozen=True)
class GenResult:
    text: str
    finish_reason: str  # stop | length | error


def candidate_substructure(mapped: MappedReaction) -> CandidateStructure:
    """Product substructure around the reaction core (changed + pi context)."""
    diff = diff_bonds(mapped)
    core = diff.changed_maps()
    product = mapped.base.product
    picks = _template_atoms(product, core, set(mapped.map_index), product_side=True)
    indices = [i for i, _ in picks]
    sub = product.subgraph(indices)
    maps = tuple(
        sorted(a.map_number for a in sub.atoms if a.map_number is not None)
    )
    return CandidateStructure(
        fragment_smiles=write_smiles(sub), atom_maps=maps
    )


def build_rationale(
    mapped: MappedReaction, patterns: list[PatternDef]
) -> Rationale:
    """Gold rationale of a mapped reaction; links are left empty.

    Propagates NoChangeError for identity reactions and AmbiguityError
    when a synthon has no unique precursor.
    """
    mapped_smiles, groups, stats = analyze_product(mapped, patterns)
    r1 = ProductInfo(
        mapped_smiles=mapped_smiles, groups=tuple(groups), stats=stats
    )
    diff = diff_bonds(mapped)
    r2 = candidate_substructure(mapped)
    disconnections = identify_disconnections(mapped, diff)
    if disconnections:
        chosen = disconnections[0]
        synthons = make_synthons(mapped.base.product, chosen)
        r3 = DisconnectionStep(
            bond=chosen.bond,
            order=chosen.order,
            synthons=tuple(s.to_smiles() for s in synthons),
        )
        equivalents = map_equivalents(mapped, synthons)
        r4 = EquivalentStep(
            pairs=tuple(
                (s.to_smiles(), equivalent_smiles(mol))
                for s, mol in equivalents.pairs
            )
        )
    else:
        # no newly formed bond: force the NoChange check, then degrade
        extract_template(mapped, diff)
        r3 = DisconnectionStep(bond=(0, 0), order=BondOrder.SINGLE, synthons=())
        r4 = EquivalentStep(pairs=())
    answer = tuple(
        sorted(equivalent_smiles(mol) for mol in mapped.base.precursors)
    )
    return Rationale(r1=r1, r2=r2, r3=r3, r4=r4, answer=answer)


def _render_r1(r1: ProductInfo) -> str:
    lines = [f"Atom-mapped SMILES: {r1.mapped_smiles}"]
    if r1.groups:
        lines.append("Functional groups:")
        for hit in r1.groups:
            maps = ",".join(str(m) for m in hit.matched_atom_maps)
            lines.append(f"- {hit.name} | {hit.fragment_smiles} | maps: {maps}")
    else:
        lines.append("Functional groups: none")
    lines.append(f"Rings: {r1.stats.ring_count}")
    lines.append(f"Carbons: {r1.stats.carbon_count}")
    lines.append(f"Stereo characters: {r1.stats.stereo_char_count}")
    return "\n".join(lines)


def _render_r2(r2: CandidateStructure) -> str:
    maps = ",".join(str(m) for m in r2.atom_maps)
    return f"Substructure: {r2.fragment_smiles}\nAtoms: {maps}"


def _render_r3(r3: DisconnectionStep) -> str:
    lines = [
        f"Disconnect: {r3.order.value} bond ({r3.bond[0]}, {r3.bond[1]})"
    ]
    lines.extend(f"Synthon: {s}" for s in r3.synthons)
    return "\n".join(lines)


def _render_r4(r4: EquivalentStep) -> str:
    return "\n".join(f"{syn} => {eq}" for syn, eq in r4.pairs)


def render(r: Rationale) -> str:
    """Serialize a complete rationale to tagged text; inverse of parse_output."""
    blocks = [
        (TAG_PRODUCT_INFO, _render_r1(r.r1)),
        (TAG_CANDIDATE, _render_r2(r.r2)),
        (TAG_DISCONNECTION, _render_r3(r.r3)),
        (TAG_EQUIVALENT, _render_r4(r.r4)),
    ]
    link_for = {TAG_CANDIDATE: r.links.l12, TAG_DISCONNECTION: r.links.l23, TAG_EQUIVALENT: r.links.l34}
    parts: list[str] = []
    for tag, body in blocks:
        link = link_for.get(tag)
        if link:
            parts.append(link)
        parts.append(f"<{tag}>\n{body}\n</{tag}>")
    parts.append(ANSWER_PREFIX + ".".join(r.answer))
    return "\n".join(parts)


_GROUP_LINE = re.compile(r"^- (?P<name>[^|]+) \| (?P<frag>[^|]+) \| maps: (?P<maps>[\d,]*)$")
_DISCONNECT_LINE = re.compile(
    r"^Disconnect: (?P<order>\w+) bond \((?P<a>\d+), (?P<b>\d+)\)$"
)


def _parse_r1(body: str) -> ProductInfo | None:
    lines = body.splitlines()
    try:
        mapped = lines[0].split("Atom-mapped SMILES: ", 1)[1]
        groups: list[FunctionalGroupHit] = []
        stats_values: dict[str, int] = {}
        for line in lines[1:]:
            m = _GROUP_LINE.match(line)
            if m:
                maps = tuple(
                    int(x) for x in m.group("maps").split(",") if x
                )
                groups.append(
                    FunctionalGroupHit(
                        name=m.group("name").strip(),
                        matched_atom_maps=maps,
                        fragment_smiles=m.group("frag").strip(),
                    )
                )
            else:
                for label, key in (
                    ("Rings: ", "rings"),
                    ("Carbons: ", "carbons"),
                    ("Stereo characters: ", "stereo"),
                ):
                    if line.startswith(label):
                        stats_values[key] = int(line[len(label):])
        stats = ProductStats(
            ring_count=stats_values["rings"],
            carbon_count=stats_values["carbons"],
            stereo_char_count=stats_values["stereo"],
        )
        return ProductInfo(mapped_smiles=mapped, groups=tuple(groups), stats=stats)
    except (IndexError, KeyError, ValueError):
        return None


def _parse_r2(body: str) -> CandidateStructure | None:
    lines = body.splitlines()
    try:
        frag = lines[0].split("Substructure: ", 1)[1]
        maps = tuple(
            int(x) for x in lines[1].split("Atoms: ", 1)[1].split(",") if x
        )
        return CandidateStructure(fragment_smiles=frag, atom_maps=maps)
    except (IndexError, ValueError):
        return None


def _parse_r3(body: str) -> DisconnectionStep | None:
    lines = body.splitlines()
    if not lines:
        return None
    m = _DISCONNECT_LINE.match(lines[0])
    if not m:
        return None
    try:
        order = BondOrder(m.group("order"))
    except ValueError:
        return None
    synthons = tuple(
        line.split("Synthon: ", 1)[1]
        for line in lines[1:]
        if line.startswith("Synthon: ")
    )
    return DisconnectionStep(
        bond=(int(m.group("a")), int(m.group("b"))), order=order, synthons=synthons
    )


def _parse_r4(body: str) -> EquivalentStep | None:
    pairs = []
    for line in body.splitlines():
        if " => " not in line:
            return None
        syn, eq = line.split(" => ", 1)
        pairs.append((syn.strip(), eq.strip()))
    return EquivalentStep(pairs=tuple(pairs))


def parse_output(text: str) -> Rationale:
    """Best-effort extraction of rationale parts from arbitrary model text."""
    bodies: dict[str, str] = {}
    gaps: dict[str, str] = {}
    cursor = 0
    previous_end = 0
    for tag in TAG_ORDER:
        match = re.search(rf"<{tag}>\n?(.*?)\n?</{tag}>", text[cursor:], re.DOTALL)
        if match is None:
            continue
        start = cursor + match.start()
        bodies[tag] = match.group(1)
        gaps[tag] = text[previous_end:start].strip()
        previous_end = cursor + match.end()
        cursor = previous_end

    r1 = _parse_r1(bodies[TAG_PRODUCT_INFO]) if TAG_PRODUCT_INFO in bodies else None
    r2 = _parse_r2(bodies[TAG_CANDIDATE]) if TAG_CANDIDATE in bodies else None
    r3 = _parse_r3(bodies[TAG_DISCONNECTION]) if TAG_DISCONNECTION in bodies else None
    r4 = _parse_r4(bodies[TAG_EQUIVALENT]) if TAG_EQUIVALENT in bodies else None

    links = Links(
        l12=gaps.get(TAG_CANDIDATE) or None,
        l23=gaps.get(TAG_DISCONNECTION) or None,
        l34=gaps.get(TAG_EQUIVALENT) or None,
    )

    answer: tuple[str, ...] = ()
    for line in reversed(text.splitlines()):
        if line.startswith(ANSWER_PREFIX):
            payload = line[len(ANSWER_PREFIX):].strip()
            answer = tuple(p for p in payload.split(".") if p) if payload else ()
            break
    return Rationale(r1=r1, r2=r2, r3=r3, r4=r4, links=links, answer=answer)


def _canon_mapped(text: str) -> str | None:
    try:
        mol = parse_smiles(text)
        return write_smiles(mol, canonical=True, options=WriteOptions(keep_maps=True))
    except Exception:
        return None


def _canon_synthon(text: str) -> str | None:
    try:
        return synthon_from_smiles(text).to_smiles()
    except Exception:
        return None


def _canon_plain(text: str) -> str | None:
    try:
        return write_smiles(parse_smiles(text), canonical=True)
    except Exception:
        return None


def score_steps(pred: Rationale, gold: Rationale) -> StepScore:
    """Field-by-field comparison of a predicted rationale against gold.

    Comparisons are structural: canonical graph equality for SMILES
    payloads, set semantics for groups, synthons and equivalent pairs.
    Absent blocks score False.
    """
    score = {}

    score["atom_mapping"] = bool(
        pred.r1
        and _canon_mapped(pred.r1.mapped_smiles) is not None
        and _canon_mapped(pred.r1.mapped_smiles) == _canon_mapped(gold.r1.mapped_smiles)
    )
    score["functional_groups"] = bool(
        pred.r1
        and {(h.name, frozenset(h.matched_atom_maps)) for h in pred.r1.groups}
        == {(h.name, frozenset(h.matched_atom_maps)) for h in gold.r1.groups}
    )
    score["smiles_stats"] = bool(pred.r1 and pred.r1.stats == gold.r1.stats)
    score["candidate_structure"] = bool(
        pred.r2
        and _canon_mapped(pred.r2.fragment_smiles) is not None
        and _canon_mapped(pred.r2.fragment_smiles) == _canon_mapped(gold.r2.fragment_smiles)
        and tuple(sorted(pred.r2.atom_maps)) == tuple(sorted(gold.r2.atom_maps))
    )
    score["disconnection"] = bool(
        pred.r3
        and tuple(sorted(pred.r3.bond)) == tuple(sorted(gold.r3.bond))
        and pred.r3.order == gold.r3.order
    )
    score["synthons"] = bool(
        pred.r3
        and {_canon_synthon(s) for s in pred.r3.synthons}
        == {_canon_synthon(s) for s in gold.r3.synthons}
        and None not in {_canon_synthon(s) for s in pred.r3.synthons}
    )
    score["equivalents"] = bool(
        pred.r4
        and {
            (_canon_synthon(s), _canon_plain(e)) for s, e in pred.r4.pairs
        }
        == {(_canon_synthon(s), _canon_plain(e)) for s, e in gold.r4.pairs}
        and all(
            _canon_synthon(s) is not None and _canon_plain(e) is not None
            for s, e in pred.r4.pairs
        )
    )
    return StepScore(**score)


def to_dict(r: Rationale) -> dict:
    """JSON-ready form of a rationale (inverse of from_dict)."""
    return {
        "r1": None
        if r.r1 is None
        else {
            "mapped_smiles": r.r1.mapped_smiles,
            "groups": [
                {
                    "name": h.name,
                    "maps": list(h.matched_atom_maps),
                    "fragment": h.fragment_smiles,
                }
                for h in r.r1.groups
            ],
            "rings": r.r1.stats.ring_count,
            "carbons": r.r1.stats.carbon_count,
            "stereo_chars": r.r1.stats.stereo_char_count,
        },
        "r2": None
        if r.r2 is None
        else {"fragment": r.r2.fragment_smiles, "maps": list(r.r2.atom_maps)},
        "r3": None
        if r.r3 is None
        else {
            "bond": list(r.r3.bond),
            "order": r.r3.order.value,
            "synthons": list(r.r3.synthons),
        },
        "r4": None
        if r.r4 is None
        else {"pairs": [[s, e] for s, e in r.r4.pairs]},
        "links": {"l12": r.links.l12, "l23": r.links.l23, "l34": r.links.l34},
        "answer": list(r.answer),
    }


def from_dict(data: dict) -> Rationale:
    r1 = None
    if data.get("r1"):
        d = data["r1"]
        r1 = ProductInfo(
            mapped_smiles=d["mapped_smiles"],
            groups=tuple(
                FunctionalGroupHit(
                    name=g["name"],
                    matched_atom_maps=tuple(g["maps"]),
                    fragment_smiles=g["fragment"],
                )
                for g in d["groups"]
            ),
            stats=ProductStats(
                ring_count=d["rings"],
                carbon_count=d["carbons"],
                stereo_char_count=d["stereo_chars"],
            ),
        )
    r2 = None
    if data.get("r2"):
        r2 = CandidateStructure(
            fragment_smiles=data["r2"]["fragment"],
            atom_maps=tuple(data["r2"]["maps"]),
        )
    r3 = None
    if data.get("r3"):
        r3 = DisconnectionStep(
            bond=tuple(data["r3"]["bond"]),
            order=BondOrder(data["r3"]["order"]),
            synthons=tuple(data["r3"]["synthons"]),
        )
    r4 = None
    if data.get("r4"):
        r4 = EquivalentStep(
            pairs=tuple((s, e) for s, e in data["r4"]["pairs"])
        )
    links = data.get("links") or {}
    return Rationale(
        r1=r1,
        r2=r2,
        r3=r3,
        r4=r4,
        links=Links(
            l12=links.get("l12"), l23=links.get("l23"), l34=links.get("l34")
        ),
        answer=tuple(data.get("answer", ())),
    )


def _stable_seed(*parts) -> int:
    digest = hashlib.sha256("||".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def build_link_prompt(r: Rationale, slot: str) -> str:
    """Prompt for one linking text, carrying all content up to the gap."""
    sections = {
        "l12": (TAG_ORDER[0], TAG_ORDER[1], _render_r1(r.r1), _render_r2(r.r2)),
        "l23": (TAG_ORDER[1], TAG_ORDER[2], _render_r2(r.r2), _render_r3(r.r3)),
        "l34": (TAG_ORDER[2], TAG_ORDER[3], _render_r3(r.r3), _render_r4(r.r4)),
    }
    first_tag, second_tag, first_body, second_body = sections[slot]
    prior = {
        "l12": "",
        "l23": (r.links.l12 or ""),
        "l34": "\n".join(filter(None, (r.links.l12, r.links.l23))),
    }[slot]
    parts = [
        "Connect the two reasoning steps below with a short natural-language bridge.",
        f"Earlier linking text:\n{prior}" if prior else "",
        f"<{first_tag}>\n{first_body}\n</{first_tag}>",
        f"<{second_tag}>\n{second_body}\n</{second_tag}>",
    ]
    return "\n\n".join(p for p in parts if p)


class DeterministicFiller:
    """Offline linking-text generator: seeded template prose over the prompt.

    Byte-identical output for identical (prompt, seed) pairs, so desk
    runs and CI need no external service.
    """

    OPENERS = {
        "l12": [
            "The analysis highlights {focus}; this points toward the part of the product assembled last.",
            "Given {focus}, the bond most plausibly formed in the final step sits inside this motif.",
            "Among the detected features, {focus} narrows where a new bond was made.",
        ],
        "l23": [
            "Within the candidate substructure, one bond stands out as the strategic cut.",
            "The candidate atoms admit a single disconnection consistent with the bond changes.",
            "Cleaving inside this substructure splits the target into tractable pieces.",
        ],
        "l34": [
            "Each synthon now needs a stable reagent that delivers the same reactivity.",
            "The fragments map onto purchasable precursors with matching polarity.",
            "To realize the synthons, standard building blocks supply the cut ends.",
        ],
    }

    def __init__(self, base_seed: int = 0):
        self.base_seed = base_seed

    def generate(self, prompt: str, config=None, seed: int | None = None) -> GenResult:
        rng = random.Random(_stable_seed(self.base_seed, seed, prompt))
        slot = "l12"
        if f"<{TAG_DISCONNECTION}>" in prompt and f"<{TAG_EQUIVALENT}>" in prompt:
            slot = "l34"
        elif f"<{TAG_DISCONNECTION}>" in prompt:
            slot = "l23"
        focus_match = re.search(r"^- ([^|]+) \|", prompt, re.MULTILINE)
        focus = f"the {focus_match.group(1).strip()} group" if focus_match else "the skeleton"
        text = rng.choice(self.OPENERS[slot]).format(focus=focus)
        tail = rng.choice(
            [
                "This sets up the next step.",
                "That reasoning leads directly onward.",
                "The following step makes this concrete.",
                "",
            ]
        )
        out = f"{text} {tail}".strip()
        max_tokens = getattr(config, "max_tokens", None) if config else None
        if max_tokens is not None and len(out.split()) > max_tokens:
            return GenResult(text=out, finish_reason="length")
        return GenResult(text=out, finish_reason="stop")


def orchestrate_links(
    r: Rationale,
    gen,
    n: int,
    seed: int = 0,
    config=None,
    max_workers: int = 8,
) -> list[Rationale]:
    """Generate n linked variants of a rationale.

    Variants run concurrently; within one variant the three links are
    generated strictly in order, each prompt including all earlier
    content.  A truncated or failed generation drops that variant.
    """
    if not r.is_complete():
        raise GenerationError("rationale must be complete before linking")

    def one_variant(variant: int) -> Rationale:
        current = replace(r, links=Links())
        filled = {}
        for slot in ("l12", "l23", "l34"):
            prompt = build_link_prompt(current, slot)
            result = gen.generate(
                prompt, config, seed=_stable_seed(seed, variant, slot)
            )
            if result.finish_reason != "stop":
                raise GenerationError(
                    f"variant {variant} {slot}: finish_reason={result.finish_reason}"
                )
            filled[slot] = result.text.strip()
            current = replace(current, links=Links(**filled))
        return current

    variants: list[Rationale] = []
    with ThreadPoolExecutor(max_workers=min(max_workers, max(n, 1))) as pool:
        futures = [pool.submit(one_variant, v) for v in range(n)]
        for future in futures:
            try:
                variants.append(future.result())
            except GenerationError:
                continue
    return variants
