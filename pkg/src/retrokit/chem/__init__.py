"""Molecular graphs, SMILES/RXN parsing, and canonical writing."""

from retrokit.chem.model import (
    Atom,
    Bond,
    BondOrder,
    Direction,
    Molecule,
    Stereo,
    merge,
    strip_maps,
)
from retrokit.chem.parser import parse_pattern_graph, parse_smiles
from retrokit.chem.reaction import (
    MappedReaction,
    ReactionRecord,
    bind_atom_maps,
    parse_rxn,
    strip_reaction_maps,
)
from retrokit.chem.writer import WriteOptions, canonical_smiles, write_smiles

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "Direction",
    "Molecule",
    "Stereo",
    "MappedReaction",
    "ReactionRecord",
    "WriteOptions",
    "bind_atom_maps",
    "canonical_smiles",
    "merge",
    "parse_pattern_graph",
    "parse_rxn",
    "parse_smiles",
    "strip_maps",
    "strip_reaction_maps",
    "write_smiles",
]
