"""Bond-set comparison between the two sides of a mapped reaction."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from retrokit.chem.model import BondOrder
from retrokit.chem.reaction import MappedReaction


class ChangeKind(enum.Enum):
    FORMED = "formed"
    BROKEN = "broken"
    ORDER_CHANGED = "order_changed"


@dataclass(frozen=True)
class UnmappedAtom:
    """Handle for a precursor atom without a product map (leaving group)."""

    mol_index: int
    atom_index: int


@dataclass(frozen=True)
class BondChange:
    kind: ChangeKind
    endpoints: tuple[int | UnmappedAtom, int | UnmappedAtom]
    before: BondOrder | None
    after: BondOrder | None


@dataclass(frozen=True)
class ReactionDiff:
    """Bond changes plus per-atom hydrogen and charge changes (by map)."""

    bond_changes: tuple[BondChange, ...]
    hydrogen_changes: dict[int, tuple[int, int]]
    charge_changes: dict[int, tuple[int, int]]

    def changed_maps(self) -> set[int]:
        maps = set(self.hydrogen_changes) | set(self.charge_changes)
        for change in self.bond_changes:
            for end in change.endpoints:
                if isinstance(end, int):
                    maps.add(end)
        return maps

    def formed_bonds(self) -> list[BondChange]:
        return [c for c in self.bond_changes if c.kind is ChangeKind.FORMED]


def _sort_key(change: BondChange) -> tuple:
    def end_key(end):
        if isinstance(end, int):
            return (0, end, 0)
        return (1, end.mol_index, end.atom_index)

    return (change.kind.value, tuple(end_key(e) for e in change.endpoints))


def diff_bonds(mapped: MappedReaction) -> ReactionDiff:
    """Symmetric difference of the mapped bond sets.

    Formed bonds are present only on the product side; broken bonds only
    on the precursor side (including bonds to unmapped leaving atoms).
    Bonds between two unmapped precursor atoms stay inside the leaving
    group and are not reported.
    """
    rec = mapped.base
    in_product = set(mapped.map_index)

    reactant_bonds: dict[tuple[int, int], BondOrder] = {}
    leaving_bonds: list[tuple[int, UnmappedAtom, BondOrder]] = []
    for mol_idx, mol in enumerate(rec.precursors):
        for bond in mol.bonds:
            ma = mol.atoms[bond.a].map_number
            mb = mol.atoms[bond.b].map_number
            if ma not in in_product:
                ma = None
            if mb not in in_product:
                mb = None
            if ma is not None and mb is not None:
                key = (min(ma, mb), max(ma, mb))
                reactant_bonds[key] = bond.order
            elif ma is not None or mb is not None:
                mapped_end = ma if ma is not None else mb
                loose = bond.b if ma is not None else bond.a
                leaving_bonds.append(
                    (mapped_end, UnmappedAtom(mol_idx, loose), bond.order)
                )

    product_bonds: dict[tuple[int, int], BondOrder] = {}
    product = rec.product
    for bond in product.bonds:
        ma = product.atoms[bond.a].map_number
        mb = product.atoms[bond.b].map_number
        product_bonds[(min(ma, mb), max(ma, mb))] = bond.order

    changes: list[BondChange] = []
    for key, order in product_bonds.items():
        if key not in reactant_bonds:
            changes.append(BondChange(ChangeKind.FORMED, key, None, order))
        elif reactant_bonds[key] != order:
            changes.append(
                BondChange(ChangeKind.ORDER_CHANGED, key, reactant_bonds[key], order)
            )
    for key, order in reactant_bonds.items():
        if key not in product_bonds:
            changes.append(BondChange(ChangeKind.BROKEN, key, order, None))
    for mapped_end, handle, order in leaving_bonds:
        changes.append(BondChange(ChangeKind.BROKEN, (mapped_end, handle), order, None))

    hydrogen_changes: dict[int, tuple[int, int]] = {}
    charge_changes: dict[int, tuple[int, int]] = {}
    for m in sorted(in_product):
        mol_idx, atom_idx = mapped.precursor_atom(m)
        prod_idx = mapped.product_atom(m)
        before_h = rec.precursors[mol_idx].total_h(atom_idx)
        after_h = product.total_h(prod_idx)
        if before_h != after_h:
            hydrogen_changes[m] = (before_h, after_h)
        before_c = rec.precursors[mol_idx].atoms[atom_idx].formal_charge
        after_c = product.atoms[prod_idx].formal_charge
        if before_c != after_c:
            charge_changes[m] = (before_c, after_c)

    return ReactionDiff(
        bond_changes=tuple(sorted(changes, key=_sort_key)),
        hydrogen_changes=hydrogen_changes,
        charge_changes=charge_changes,
    )
