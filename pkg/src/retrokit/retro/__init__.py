"""Rule-derived retrosynthesis: diffs, templates, synthons, forward application."""

from retrokit.retro.diff import (
    BondChange,
    ChangeKind,
    ReactionDiff,
    UnmappedAtom,
    diff_bonds,
)
from retrokit.retro.forward import (
    AppliedOutcome,
    apply_template,
    apply_template_forward,
)
from retrokit.retro.synthons import (
    Disconnection,
    EquivalentMapping,
    Synthon,
    equivalent_smiles,
    identify_disconnections,
    make_synthons,
    map_equivalents,
    synthon_from_smiles,
)
from retrokit.retro.template import (
    ReactionTemplate,
    canonicalize_template,
    extract_template,
    parse_template,
    parse_template_fragment,
)

__all__ = [
    "AppliedOutcome",
    "BondChange",
    "ChangeKind",
    "Disconnection",
    "EquivalentMapping",
    "ReactionDiff",
    "ReactionTemplate",
    "Synthon",
    "UnmappedAtom",
    "apply_template",
    "apply_template_forward",
    "canonicalize_template",
    "diff_bonds",
    "equivalent_smiles",
    "extract_template",
    "identify_disconnections",
    "make_synthons",
    "map_equivalents",
    "parse_template",
    "parse_template_fragment",
    "synthon_from_smiles",
]
