"""Strategic bond disconnection, synthons, and synthetic equivalents.

A synthon is a product fragment carrying a ``[n*]`` placeholder whose
number is the atom-map index of its former bond partner.  Cutting a ring
bond leaves the graph connected and yields a single open-chain synthon
with two placeholders.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from retrokit.chem.model import Atom, Bond, BondOrder, Molecule, strip_maps
from retrokit.chem.reaction import MappedReaction
from retrokit.chem.writer import WriteOptions, write_smiles
from retrokit.errors import AmbiguityError, MappingError
from retrokit.retro.diff import ReactionDiff, diff_bonds

_SYNTHON_OPTS = WriteOptions(keep_maps=False, synthon_style=True)


@dataclass(frozen=True)
class Disconnection:
    """A formed bond chosen for formal cleavage, as (min map, max map)."""

    bond: tuple[int, int]
    order: BondOrder


@dataclass(frozen=True)
class Synthon:
    fragment: Molecule

    @property
    def placeholder_maps(self) -> tuple[int, ...]:
        return tuple(
            a.map_number for a in self.fragment.atoms if a.is_wildcard
        )

    def mapped_atoms(self) -> set[int]:
        return {
            a.map_number
            for a in self.fragment.atoms
            if not a.is_wildcard and a.map_number is not None
        }

    def to_smiles(self) -> str:
        """Canonical fragment text with the placeholder written ``[n*]``."""
        return write_smiles(self.fragment, canonical=True, options=_SYNTHON_OPTS)


@dataclass(frozen=True)
class EquivalentMapping:
    """Synthons paired with the precursor molecules realizing them."""

    pairs: tuple[tuple[Synthon, Molecule], ...]


def synthon_from_smiles(text: str) -> Synthon:
    """Read a synthon written in ``[n*]`` notation.

    The bracket-isotope slot of a wildcard is reinterpreted as the partner
    atom-map index.
    """
    from retrokit.chem.parser import parse_smiles

    mol = parse_smiles(text)
    atoms = tuple(
        replace(a, isotope=None, map_number=a.isotope)
        if a.is_wildcard and a.isotope is not None and a.map_number is None
        else a
        for a in mol.atoms
    )
    return Synthon(fragment=Molecule(atoms=atoms, bonds=mol.bonds))


def identify_disconnections(
    mapped: MappedReaction, diff: ReactionDiff | None = None
) -> list[Disconnection]:
    """One disconnection per formed bond, sorted by (min map, max map)."""
    diff = diff or diff_bonds(mapped)
    out = [
        Disconnection(bond=change.endpoints, order=change.after)
        for change in diff.formed_bonds()
    ]
    return sorted(out, key=lambda d: d.bond)


def make_synthons(product: Molecule, d: Disconnection) -> tuple[Synthon, ...]:
    """Cut the disconnection bond and attach placeholders at the stumps.

    Returns two synthons, or a single two-placeholder synthon when the
    bond lies on a ring and its removal keeps the graph connected.
    """
    map_a, map_b = d.bond
    idx_a = product.atom_by_map(map_a)
    idx_b = product.atom_by_map(map_b)
    if idx_a is None or idx_b is None:
        raise MappingError(f"maps {d.bond} not found on the product")
    bond = product.bond_between(idx_a, idx_b)
    if bond is None:
        raise MappingError(f"no bond between maps {d.bond}")

    remaining = tuple(b for b in product.bonds if b is not bond)
    cut = Molecule(atoms=product.atoms, bonds=remaining)

    def attach(fragment_atoms: tuple[int, ...]) -> Synthon:
        sub = cut.subgraph(fragment_atoms)
        local = {orig: i for i, orig in enumerate(fragment_atoms)}
        atoms = list(sub.atoms)
        bonds = list(sub.bonds)
        for stump, partner in ((idx_a, map_b), (idx_b, map_a)):
            if stump not in local:
                continue
            atoms.append(Atom(is_wildcard=True, map_number=partner))
            bonds.append(
                Bond(a=local[stump], b=len(atoms) - 1, order=bond.order)
            )
        return Synthon(fragment=Molecule(atoms=tuple(atoms), bonds=tuple(bonds)))

    components = cut.components()
    pieces = [comp for comp in components if idx_a in comp or idx_b in comp]
    return tuple(attach(comp) for comp in pieces)


def map_equivalents(
    mapped: MappedReaction, synthons: tuple[Synthon, ...]
) -> EquivalentMapping:
    """Pair each synthon with the unique precursor holding its atoms.

    Raises AmbiguityError when no precursor, or more than one, contains
    all of a synthon's mapped atoms.
    """
    precursor_maps = [mol.map_numbers() for mol in mapped.base.precursors]
    pairs = []
    for synthon in synthons:
        needed = synthon.mapped_atoms()
        owners = [
            idx for idx, maps in enumerate(precursor_maps) if needed <= maps
        ]
        if len(owners) != 1:
            raise AmbiguityError(
                f"synthon atoms {sorted(needed)} match {len(owners)} precursors"
            )
        pairs.append((synthon, mapped.base.precursors[owners[0]]))
    return EquivalentMapping(pairs=tuple(pairs))


def equivalent_smiles(mol: Molecule) -> str:
    """Canonical, map-free text of a synthetic equivalent."""
    return write_smiles(strip_maps(mol), canonical=True)
