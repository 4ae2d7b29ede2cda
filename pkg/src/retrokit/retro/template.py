"""Reaction template extraction and canonicalization.

A template keeps the changed atoms (with their map numbers), the unmapped
leaving-group atoms bonded to them, and pi-context neighbors attached by
double, triple or aromatic bonds (emitted without maps).  The instance
form wraps each fragment in parentheses with original map numbers; the
canonical form renumbers maps 1..k by canonical emission order of the
product side and is invariant under input renumbering and atom order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from retrokit.chem.model import BondOrder, Molecule
from retrokit.chem.parser import parse_pattern_graph
from retrokit.chem.reaction import MappedReaction
from retrokit.chem.writer import WriteOptions, canonical_component, write_smiles
from retrokit.errors import NoChangeError, SmilesSyntaxError
from retrokit.retro.diff import ReactionDiff, diff_bonds

_PI_ORDERS = (BondOrder.DOUBLE, BondOrder.TRIPLE, BondOrder.AROMATIC)
_TEMPLATE_OPTS = WriteOptions(keep_maps=True, template_style=True)


@dataclass(frozen=True)
class ReactionTemplate:
    """Minimal bond-change rewrite extracted from one reaction.

    ``h_requirements`` records, per lhs fragment and parsed atom index,
    the hydrogen count an atom must still carry for the rewrite to apply
    (derived from hydrogen losses); it is extraction metadata and absent
    on templates parsed back from strings.
    """

    lhs_fragments: tuple[str, ...]
    rhs_fragments: tuple[str, ...]
    instance_form: str
    canonical_form: str
    h_requirements: tuple[tuple[tuple[int, int], ...], ...] = ()

    def lhs_graphs(self) -> list[Molecule]:
        return [parse_template_fragment(f) for f in self.lhs_fragments]

    def rhs_graphs(self) -> list[Molecule]:
        return [parse_template_fragment(f) for f in self.rhs_fragments]


def parse_template_fragment(text: str) -> Molecule:
    """Parse one template fragment; outer parentheses are optional."""
    body = text.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    graph, _ = parse_pattern_graph(body)
    return graph


def _strip_outer_parens(text: str) -> str:
    if not (text.startswith("(") and text.endswith(")")):
        return text
    depth = 0
    for pos, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0 and pos != len(text) - 1:
                return text
    return text[1:-1]


def _split_fragments(side: str) -> list[str]:
    """Split on top-level dots, respecting parentheses."""
    parts: list[str] = []
    depth = 0
    current: list[str] = []
    for ch in side.strip():
        if ch == "." and depth == 0:
            parts.append("".join(current))
            current = []
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        current.append(ch)
    parts.append("".join(current))
    return [_strip_outer_parens(p) for p in parts if p]


def parse_template(form: str) -> ReactionTemplate:
    """Rebuild a template from its instance or canonical form."""
    if ">>" not in form:
        raise SmilesSyntaxError("template form needs '>>'")
    left, right = form.split(">>", 1)
    lhs = tuple(_split_fragments(left))
    rhs = tuple(_split_fragments(right))
    for frag in lhs + rhs:
        parse_template_fragment(frag)
    instance = (
        ".".join(f"({f})" for f in lhs) + ">>" + ".".join(f"({f})" for f in rhs)
    )
    template = ReactionTemplate(
        lhs_fragments=lhs,
        rhs_fragments=rhs,
        instance_form=instance,
        canonical_form="",
    )
    return replace(template, canonical_form=canonicalize_template(template))


def _template_atoms(
    mol: Molecule, core_maps: set[int], product_maps: set[int], product_side: bool
) -> list[tuple[int, bool]]:
    """Atom indices entering the template, flagged keep-map.

    Core atoms keep maps; leaving-group neighbors (precursor side only)
    and pi-context neighbors enter without maps.  A precursor map absent
    from the product counts as unmapped.
    """
    core = [
        i for i, a in enumerate(mol.atoms) if a.map_number in core_maps
    ]
    chosen: dict[int, bool] = {i: True for i in core}
    for i in core:
        for nbr, bond in mol.neighbors(i):
            if nbr in chosen:
                continue
            nbr_map = mol.atoms[nbr].map_number
            if nbr_map not in product_maps:
                nbr_map = None
            if not product_side and nbr_map is None:
                chosen[nbr] = False
            elif bond.order in _PI_ORDERS:
                chosen.setdefault(nbr, False)
    return sorted(chosen.items())


def _fragment_molecules(
    mol: Molecule, picks: list[tuple[int, bool]]
) -> list[Molecule]:
    """Connected components of the induced template subgraph."""
    indices = [i for i, _ in picks]
    keep_map = dict(picks)
    sub = mol.subgraph(indices)
    atoms = tuple(
        atom if keep_map[orig] else replace(atom, map_number=None)
        for atom, orig in zip(sub.atoms, indices)
    )
    sub = Molecule(atoms=atoms, bonds=sub.bonds)
    return [sub.subgraph(comp) for comp in sub.components()]


def _instance_fragment_text(fragment: Molecule) -> str:
    return write_smiles(fragment, options=_TEMPLATE_OPTS)


def extract_template(
    mapped: MappedReaction, diff: ReactionDiff | None = None
) -> ReactionTemplate:
    """Extract the minimum-change template of a mapped reaction.

    Raises NoChangeError when the reaction has no bond, hydrogen or
    charge changes (identity reactions).
    """
    diff = diff or diff_bonds(mapped)
    core = diff.changed_maps()
    if not core:
        raise NoChangeError("reaction has no bond or atom changes")

    rec = mapped.base
    product_maps = set(mapped.map_index)
    lhs_fragments: list[Molecule] = []
    for mol in rec.precursors:
        picks = _template_atoms(mol, core, product_maps, product_side=False)
        if any(keep for _, keep in picks):
            lhs_fragments.extend(_fragment_molecules(mol, picks))
    rhs_fragments = _fragment_molecules(
        rec.product, _template_atoms(rec.product, core, product_maps, product_side=True)
    )

    lhs_texts = tuple(_instance_fragment_text(f) for f in lhs_fragments)
    rhs_texts = tuple(_instance_fragment_text(f) for f in rhs_fragments)
    instance = (
        ".".join(f"({t})" for t in lhs_texts)
        + ">>"
        + ".".join(f"({t})" for t in rhs_texts)
    )

    h_requirements = []
    for text in lhs_texts:
        graph = parse_template_fragment(text)
        requirement = []
        for idx, atom in enumerate(graph.atoms):
            m = atom.map_number
            if m in diff.hydrogen_changes:
                before, after = diff.hydrogen_changes[m]
                if before > after:
                    requirement.append((idx, before - after))
        h_requirements.append(tuple(requirement))

    template = ReactionTemplate(
        lhs_fragments=lhs_texts,
        rhs_fragments=rhs_texts,
        instance_form=instance,
        canonical_form="",
        h_requirements=tuple(h_requirements),
    )
    return replace(template, canonical_form=canonicalize_template(template))


def _renumber(fragment: Molecule, mapping: dict[int, int]) -> Molecule:
    atoms = tuple(
        replace(a, map_number=mapping.get(a.map_number))
        if a.map_number is not None
        else a
        for a in fragment.atoms
    )
    return Molecule(atoms=atoms, bonds=fragment.bonds)


def canonicalize_template(t: ReactionTemplate) -> str:
    """Canonical string form of a template.

    Map numbers are renumbered 1..k following canonical emission order of
    the product-side fragments; fragments are then re-emitted canonically
    (maps as final tie-break) and sorted by size then text on each side.
    The result is a pure function of the template's isomorphism class.
    """
    lhs = [parse_template_fragment(f) for f in t.lhs_fragments]
    rhs = [parse_template_fragment(f) for f in t.rhs_fragments]

    mapless = WriteOptions(keep_maps=False, template_style=True)
    keyed = []
    for fragment in rhs:
        indices = tuple(range(len(fragment.atoms)))
        text, order = canonical_component(fragment, indices, mapless)
        keyed.append((len(fragment.atoms), text, order, fragment))
    keyed.sort(key=lambda item: (item[0], item[1]))

    renumber: dict[int, int] = {}
    for _, _, order, fragment in keyed:
        for idx in order:
            m = fragment.atoms[idx].map_number
            if m is not None and m not in renumber:
                renumber[m] = len(renumber) + 1

    def side_text(fragments: list[Molecule]) -> str:
        texts = []
        for fragment in fragments:
            renumbered = _renumber(fragment, renumber)
            indices = tuple(range(len(renumbered.atoms)))
            text, _ = canonical_component(renumbered, indices, _TEMPLATE_OPTS)
            texts.append((len(renumbered.atoms), text))
        return ".".join(text for _, text in sorted(texts))

    return f"{side_text(lhs)}>>{side_text(rhs)}"
