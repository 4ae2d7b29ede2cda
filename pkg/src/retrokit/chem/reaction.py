"""Reaction SMILES parsing and atom-map bookkeeping.

Reactions follow the ``{precursor}>>{product}`` convention; a middle
reagent field (``a>b>c``) is tolerated and folded into the precursors.
Everything left of ``>>`` is treated as a precursor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from retrokit.chem.model import Molecule, strip_maps
from retrokit.chem.parser import parse_smiles
from retrokit.chem.writer import write_smiles
from retrokit.errors import MappingError, SmilesSyntaxError

PRODUCT = "product"
PRECURSOR = "precursor"


@dataclass(frozen=True)
class ReactionRecord:
    """One ``precursors>>product`` reaction instance."""

    id: str
    precursors: tuple[Molecule, ...]
    product: Molecule
    raw: str

    def rxn_smiles(self) -> str:
        left = ".".join(write_smiles(m) for m in self.precursors)
        return f"{left}>>{write_smiles(self.product)}"


@dataclass(frozen=True)
class MappedReaction:
    """Reaction whose product atoms carry map numbers 1..n.

    ``map_index`` resolves a map number to ``(side, molecule index, atom
    index)`` entries; precursor atoms without maps are listed in
    ``unmapped_precursor_atoms``.
    """

    base: ReactionRecord
    n: int
    map_index: dict[int, dict[str, tuple[int, int]]] = field(compare=False)
    unmapped_precursor_atoms: tuple[tuple[int, int], ...] = ()

    def product_atom(self, map_number: int) -> int:
        return self.map_index[map_number][PRODUCT][1]

    def precursor_atom(self, map_number: int) -> tuple[int, int]:
        return self.map_index[map_number][PRECURSOR]


def _split_components(text: str) -> list[str]:
    parts = [p for p in text.split(".") if p != ""]
    if not parts:
        raise SmilesSyntaxError("empty reaction side")
    return parts


def parse_rxn(text: str, id: str = "") -> ReactionRecord:
    """Parse RXN SMILES into a ReactionRecord.

    Raises SmilesSyntaxError unless the text has exactly one ``>>``
    separator (or a tolerated ``a>b>c`` reagent form) and both sides parse.
    """
    stripped = text.strip()
    if not stripped:
        raise SmilesSyntaxError("empty RXN SMILES")
    fields = stripped.split(">")
    if len(fields) != 3:
        raise SmilesSyntaxError("expected exactly one '>>' separator")
    left, middle, right = fields
    precursor_text = left if not middle else f"{left}.{middle}"
    precursors = tuple(parse_smiles(p) for p in _split_components(precursor_text))
    product = parse_smiles(right)
    return ReactionRecord(id=id, precursors=precursors, product=product, raw=stripped)


def bind_atom_maps(rec: ReactionRecord) -> MappedReaction:
    """Index a fully mapped reaction by atom-map number.

    The product must carry map numbers exactly 1..n with no gaps or
    repeats, and every product map must also appear on a precursor atom;
    otherwise MappingError is raised.
    """
    product_maps: dict[int, int] = {}
    for idx, atom in enumerate(rec.product.atoms):
        if atom.map_number is None:
            raise MappingError(f"product atom {idx} has no map number")
        if atom.map_number in product_maps:
            raise MappingError(f"duplicate map {atom.map_number}")
        product_maps[atom.map_number] = idx

    n = len(rec.product.atoms)
    expected = set(range(1, n + 1))
    if set(product_maps) != expected:
        missing = sorted(expected - set(product_maps))
        raise MappingError(f"product maps are gapped; missing {missing}")

    map_index: dict[int, dict[str, tuple[int, int]]] = {
        m: {PRODUCT: (0, idx)} for m, idx in product_maps.items()
    }
    unmapped: list[tuple[int, int]] = []
    seen_precursor_maps: set[int] = set()
    for mol_idx, mol in enumerate(rec.precursors):
        for atom_idx, atom in enumerate(mol.atoms):
            m = atom.map_number
            if m is None:
                unmapped.append((mol_idx, atom_idx))
                continue
            if m in seen_precursor_maps:
                raise MappingError(f"map {m} appears on two precursor atoms")
            seen_precursor_maps.add(m)
            if m in map_index:
                map_index[m][PRECURSOR] = (mol_idx, atom_idx)

    absent = sorted(m for m in map_index if PRECURSOR not in map_index[m])
    if absent:
        raise MappingError(f"product maps {absent} missing from precursors")

    return MappedReaction(
        base=rec,
        n=n,
        map_index=map_index,
        unmapped_precursor_atoms=tuple(unmapped),
    )


def strip_reaction_maps(rec: ReactionRecord) -> ReactionRecord:
    """Map-free copy of the reaction."""
    return ReactionRecord(
        id=rec.id,
        precursors=tuple(strip_maps(m) for m in rec.precursors),
        product=strip_maps(rec.product),
        raw=rec.raw,
    )
