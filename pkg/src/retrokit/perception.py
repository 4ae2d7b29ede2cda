"""Product analysis: functional groups and SMILES statistics.

Produces the three payloads of the product-analysis reasoning block:
the atom-mapped product SMILES, functional-group hits from a pattern
table, and string/graph statistics (rings, carbons, stereo characters).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources

from retrokit.chem.model import Molecule
from retrokit.chem.reaction import MappedReaction
from retrokit.chem.writer import canonical_smiles, write_smiles
from retrokit.errors import PatternSyntaxError
from retrokit.patterns import PatternDef, compile_pattern, find_matches

STEREO_CHARS = "@/\\"


@dataclass(frozen=True)
class FunctionalGroupHit:
    """One pattern hit on the product, reported by atom-map numbers."""

    name: str
    matched_atom_maps: tuple[int, ...]
    fragment_smiles: str


@dataclass(frozen=True)
class ProductStats:
    ring_count: int
    carbon_count: int
    stereo_char_count: int


def load_pattern_table(path=None) -> list[PatternDef]:
    """Read a ``name<TAB>pattern`` table; ``#`` starts a comment line.

    Without a path the bundled functional-group table is used.  Every
    pattern is compiled eagerly so a broken table fails at load time.
    """
    if path is None:
        text = (
            resources.files("retrokit.data")
            .joinpath("functional_groups.tsv")
            .read_text(encoding="utf-8")
        )
    else:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    table: list[PatternDef] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" not in line:
            raise PatternSyntaxError(f"line {lineno}: expected name<TAB>pattern")
        name, pattern = line.split("\t", 1)
        compile_pattern(pattern.strip())
        table.append(PatternDef(name=name.strip(), pattern=pattern.strip()))
    return table


def fragment_smiles(mol: Molecule, atom_indices: tuple[int, ...]) -> str:
    """Canonical SMILES of the induced substructure with hydrogens frozen.

    Freezing each atom's total hydrogen count makes the fragment re-match
    H-constrained patterns after reparsing.
    """
    sub = mol.subgraph(sorted(atom_indices))
    frozen = tuple(
        replace(atom, explicit_h=mol.total_h(orig), map_number=None)
        for atom, orig in zip(sub.atoms, sorted(atom_indices))
    )
    return canonical_smiles(Molecule(atoms=frozen, bonds=sub.bonds))


def detect_groups(
    product: Molecule, patterns: list[PatternDef]
) -> list[FunctionalGroupHit]:
    hits: list[FunctionalGroupHit] = []
    for pat in patterns:
        compiled = compile_pattern(pat.pattern)
        for match in find_matches(product, compiled):
            maps = tuple(
                product.atoms[m].map_number or (m + 1) for m in match
            )
            hits.append(
                FunctionalGroupHit(
                    name=pat.name,
                    matched_atom_maps=maps,
                    fragment_smiles=fragment_smiles(product, match),
                )
            )
    return hits


def product_stats(product: Molecule) -> ProductStats:
    text = product.source_text or write_smiles(product)
    return ProductStats(
        ring_count=product.ring_count(),
        carbon_count=sum(1 for a in product.atoms if a.element == "C"),
        stereo_char_count=sum(text.count(c) for c in STEREO_CHARS),
    )


def analyze_product(
    mapped: MappedReaction, patterns: list[PatternDef]
) -> tuple[str, list[FunctionalGroupHit], ProductStats]:
    """The product-analysis triple: mapped SMILES, group hits, statistics."""
    product = mapped.base.product
    return (
        write_smiles(product),
        detect_groups(product, patterns),
        product_stats(product),
    )
