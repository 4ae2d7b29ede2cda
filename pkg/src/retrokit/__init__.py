"""Retrosynthesis toolkit: templates, rationales, rewards, and metrics."""

__version__ = "0.1.0"

from retrokit.chem import (
    Molecule,
    bind_atom_maps,
    canonical_smiles,
    parse_rxn,
    parse_smiles,
    strip_maps,
    write_smiles,
)
from retrokit.retro import (
    apply_template_forward,
    canonicalize_template,
    diff_bonds,
    extract_template,
    identify_disconnections,
    make_synthons,
    map_equivalents,
)

__all__ = [
    "Molecule",
    "__version__",
    "apply_template_forward",
    "bind_atom_maps",
    "canonical_smiles",
    "canonicalize_template",
    "diff_bonds",
    "extract_template",
    "identify_disconnections",
    "make_synthons",
    "map_equivalents",
    "parse_rxn",
    "parse_smiles",
    "strip_maps",
    "write_smiles",
]
