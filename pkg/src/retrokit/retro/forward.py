"""Forward application of reaction templates to reactant sets.

Matches the left-hand fragments injectively onto the reactants, replays
the template's bond edits, and collects every product obtainable that
way.  Unmapped template atoms present on both sides with the same local
attachment (pi context) are carried over from the matched reactant;
left-only unmapped atoms leave with their subtrees; right-only unmapped
atoms are created fresh.  Atom provenance is tracked so each candidate
can be reported as a fully mapped reaction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

from retrokit.chem import canon
from retrokit.chem.model import (
    VALENCE_TABLE,
    Atom,
    Bond,
    BondOrder,
    Molecule,
    merge,
    strip_maps,
)
from retrokit.chem.writer import write_smiles
from retrokit.errors import ValenceError
from retrokit.patterns import CompiledPattern, find_matches
from retrokit.retro.template import ReactionTemplate

_MAX_MATCH_COMBINATIONS = 4096


@dataclass(frozen=True)
class AppliedOutcome:
    """One candidate product with its provenance-mapped reaction."""

    product: Molecule
    mapped_rxn: str


def _compiled(fragment: Molecule) -> CompiledPattern:
    return CompiledPattern(source="", graph=fragment, default_bonds=frozenset())


def _signature(fragment: Molecule, idx: int) -> tuple:
    """Local attachment signature of an unmapped template atom."""
    atom = fragment.atoms[idx]
    anchors = []
    loose = []
    for nbr, bond in fragment.neighbors(idx):
        m = fragment.atoms[nbr].map_number
        if m is not None:
            anchors.append((canon.bond_rank(bond.order), m))
        else:
            loose.append(canon.bond_rank(bond.order))
    return (
        atom.element,
        atom.aromatic,
        atom.formal_charge,
        tuple(sorted(anchors)),
        tuple(sorted(loose)),
    )


def _classify_unmapped(
    lhs: list[Molecule], rhs: list[Molecule]
) -> tuple[set[tuple[int, int]], list[tuple[int, int]]]:
    """Split lhs unmapped atoms into context (kept) and leaving (deleted).

    Returns the set of context (fragment, atom) slots and the list of
    rhs-only atoms to create, as (fragment, atom) into rhs.
    """
    lhs_slots: dict[tuple, list[tuple[int, int]]] = {}
    for f_idx, fragment in enumerate(lhs):
        for a_idx, atom in enumerate(fragment.atoms):
            if atom.map_number is None:
                sig = _signature(fragment, a_idx)
                lhs_slots.setdefault(sig, []).append((f_idx, a_idx))

    context: set[tuple[int, int]] = set()
    created: list[tuple[int, int]] = []
    for f_idx, fragment in enumerate(rhs):
        for a_idx, atom in enumerate(fragment.atoms):
            if atom.map_number is None:
                sig = _signature(fragment, a_idx)
                pool = lhs_slots.get(sig)
                if pool:
                    context.add(pool.pop())
                else:
                    created.append((f_idx, a_idx))
    return context, created


def _h_fixed(atom: Atom, delta_valence: int) -> Atom:
    """Reset hydrogens on an atom whose bonding changed."""
    if atom.formal_charge == 0 and atom.element in VALENCE_TABLE:
        return replace(atom, explicit_h=None)
    if atom.explicit_h is not None:
        return replace(atom, explicit_h=max(0, atom.explicit_h - delta_valence))
    return atom


def apply_template(
    template: ReactionTemplate, reactants: list[Molecule]
) -> list[AppliedOutcome]:
    """All distinct products of applying the template to the reactants."""
    lhs = template.lhs_graphs()
    rhs = template.rhs_graphs()
    requirements = template.h_requirements or tuple(() for _ in lhs)
    context_slots, created_atoms = _classify_unmapped(lhs, rhs)

    union = merge(list(reactants))
    offsets = []
    total = 0
    for mol in reactants:
        offsets.append(total)
        total += len(mol.atoms)

    per_fragment: list[list[tuple[int, ...]]] = []
    for f_idx, fragment in enumerate(lhs):
        pattern = _compiled(fragment)
        min_h = dict(requirements[f_idx]) if f_idx < len(requirements) else {}
        matches: list[tuple[int, ...]] = []
        for mol_idx, mol in enumerate(reactants):
            for match in find_matches(
                mol, pattern, exact_charge=True, min_h=min_h or None
            ):
                matches.append(tuple(offsets[mol_idx] + m for m in match))
        if not matches:
            return []
        per_fragment.append(matches)

    rhs_bonds: dict[tuple[int, int], BondOrder] = {}
    for fragment in rhs:
        for bond in fragment.bonds:
            ma = fragment.atoms[bond.a].map_number
            mb = fragment.atoms[bond.b].map_number
            if ma is not None and mb is not None:
                rhs_bonds[(min(ma, mb), max(ma, mb))] = bond.order

    outcomes: list[AppliedOutcome] = []
    seen: set[str] = set()
    combos = itertools.islice(
        itertools.product(*per_fragment), _MAX_MATCH_COMBINATIONS
    )
    for combo in combos:
        flat = [a for match in combo for a in match]
        if len(set(flat)) != len(flat):
            continue
        outcome = _apply_once(
            lhs, rhs, combo, context_slots, created_atoms, rhs_bonds,
            union, reactants, offsets,
        )
        if outcome is None:
            continue
        key = write_smiles(strip_maps(outcome.product), canonical=True)
        if key not in seen:
            seen.add(key)
            outcomes.append(outcome)
    return outcomes


def _apply_once(
    lhs: list[Molecule],
    rhs: list[Molecule],
    combo: tuple[tuple[int, ...], ...],
    context_slots: set[tuple[int, int]],
    created_atoms: list[tuple[int, int]],
    rhs_bonds: dict[tuple[int, int], BondOrder],
    union: Molecule,
    reactants: list[Molecule],
    offsets: list[int],
) -> AppliedOutcome | None:
    image_of_map: dict[int, int] = {}
    deletions: set[int] = set()
    for f_idx, (fragment, match) in enumerate(zip(lhs, combo)):
        for a_idx, atom in enumerate(fragment.atoms):
            if atom.map_number is not None:
                image_of_map[atom.map_number] = match[a_idx]
            elif (f_idx, a_idx) not in context_slots:
                deletions.add(match[a_idx])

    atoms: list[Atom | None] = list(union.atoms)
    bonds: dict[tuple[int, int], Bond] = {b.key: b for b in union.bonds}
    edited: set[int] = set()
    delta: dict[int, int] = {}

    def remove_bond(key: tuple[int, int]) -> None:
        bond = bonds.pop(key, None)
        if bond is not None:
            for end in key:
                edited.add(end)
                delta[end] = delta.get(end, 0) - _order_valence(bond.order)

    def set_bond(a: int, b: int, order: BondOrder) -> None:
        key = (a, b) if a < b else (b, a)
        old = bonds.get(key)
        if old is not None and old.order is order:
            return
        if old is not None:
            remove_bond(key)
        bonds[key] = Bond(a=key[0], b=key[1], order=order)
        for end in key:
            edited.add(end)
            delta[end] = delta.get(end, 0) + _order_valence(order)

    # drop lhs bonds between mapped template atoms that the rhs lacks
    for fragment, match in zip(lhs, combo):
        for bond in fragment.bonds:
            ma = fragment.atoms[bond.a].map_number
            mb = fragment.atoms[bond.b].map_number
            if ma is None or mb is None:
                continue
            if (min(ma, mb), max(ma, mb)) not in rhs_bonds:
                a, b = match[bond.a], match[bond.b]
                remove_bond((a, b) if a < b else (b, a))

    # delete leaving atoms with their incident bonds
    for target in deletions:
        for key in [k for k in bonds if target in k]:
            remove_bond(key)
        atoms[target] = None

    # rhs bonds between mapped atoms
    for (ma, mb), order in rhs_bonds.items():
        if ma not in image_of_map or mb not in image_of_map:
            return None
        set_bond(image_of_map[ma], image_of_map[mb], order)

    # atoms the template creates, bonded into the mapped core
    created_index: dict[tuple[int, int], int] = {}
    for f_idx, a_idx in created_atoms:
        atom = rhs[f_idx].atoms[a_idx]
        fresh = Atom(
            element=atom.element,
            aromatic=atom.aromatic,
            formal_charge=atom.formal_charge,
            explicit_h=None if atom.element in VALENCE_TABLE else 0,
        )
        atoms.append(fresh)
        created_index[(f_idx, a_idx)] = len(atoms) - 1
    for f_idx, fragment in enumerate(rhs):
        for bond in fragment.bonds:
            ends = []
            for a_idx in (bond.a, bond.b):
                atom = fragment.atoms[a_idx]
                if atom.map_number is not None:
                    ends.append(image_of_map[atom.map_number])
                elif (f_idx, a_idx) in created_index:
                    ends.append(created_index[(f_idx, a_idx)])
                else:
                    ends.append(None)
            if None in ends:
                continue
            a, b = ends
            key = (a, b) if a < b else (b, a)
            if key not in bonds:
                set_bond(a, b, bond.order)

    for idx in edited:
        if atoms[idx] is not None:
            atoms[idx] = _h_fixed(atoms[idx], delta.get(idx, 0))

    return _collect(atoms, bonds, image_of_map, reactants, offsets)


def _order_valence(order: BondOrder) -> int:
    return {"single": 1, "double": 2, "triple": 3, "aromatic": 1}[order.value]


def _collect(
    atoms: list[Atom | None],
    bonds: dict[tuple[int, int], Bond],
    image_of_map: dict[int, int],
    reactants: list[Molecule],
    offsets: list[int],
) -> AppliedOutcome | None:
    alive = [i for i, a in enumerate(atoms) if a is not None]
    local = {old: new for new, old in enumerate(alive)}
    try:
        graph = Molecule(
            atoms=tuple(atoms[i] for i in alive),
            bonds=tuple(
                replace(b, a=local[b.a], b=local[b.b]) for b in bonds.values()
            ),
        )
    except ValueError:
        return None

    keep: set[int] = set()
    core = {local[i] for i in image_of_map.values() if atoms[i] is not None}
    for comp in graph.components():
        if core & set(comp):
            keep.update(comp)
    if not keep:
        return None
    kept = sorted(keep)
    product = graph.subgraph(kept)

    try:
        for idx in range(len(product.atoms)):
            product.implicit_hydrogens(idx)
    except ValenceError:
        return None

    # provenance: product position -> original union atom index
    union_of_product = [alive[local_idx] for local_idx in kept]
    product_map_of_union = {
        u: pos + 1 for pos, u in enumerate(union_of_product)
    }
    mapped_product = Molecule(
        atoms=tuple(
            replace(a, map_number=i + 1) for i, a in enumerate(product.atoms)
        ),
        bonds=product.bonds,
    )
    mapped_reactants = []
    for mol_idx, mol in enumerate(reactants):
        out_atoms = []
        for a_idx, atom in enumerate(mol.atoms):
            union_idx = offsets[mol_idx] + a_idx
            out_atoms.append(
                replace(atom, map_number=product_map_of_union.get(union_idx))
            )
        mapped_reactants.append(Molecule(atoms=tuple(out_atoms), bonds=mol.bonds))

    left = ".".join(write_smiles(m) for m in mapped_reactants)
    rxn = f"{left}>>{write_smiles(mapped_product)}"
    return AppliedOutcome(
        product=strip_maps(product), mapped_rxn=rxn
    )


def apply_template_forward(
    template: ReactionTemplate, reactants: list[Molecule]
) -> list[Molecule]:
    """Candidate products of the template on the reactants, deduplicated."""
    return [outcome.product for outcome in apply_template(template, reactants)]
