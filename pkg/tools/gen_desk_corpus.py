"""Generate the bundled desk corpus of 200 mapped reactions.

Each line is a fully atom-mapped RXN SMILES built by graph surgery:
a product is assembled from two fragments by forming one bond (dropping
the leaving atoms), then the reactants are emitted with the product's
map numbers and the leaving atoms unmapped.  Every generated line is
checked for template self-consistency before it is written.

Run from the repository root:  python tools/gen_desk_corpus.py
"""

from __future__ import annotations

import random
import sys
from dataclasses import replace
from pathlib import Path

from retrokit.chem import (
    BondOrder,
    Molecule,
    bind_atom_maps,
    canonical_smiles,
    parse_rxn,
    parse_smiles,
    write_smiles,
)
from retrokit.chem.model import Atom, Bond
from retrokit.patterns import compile_pattern, find_matches
from retrokit.retro import apply_template_forward, extract_template

OUT_PATH = Path(__file__).resolve().parents[1] / "src" / "retrokit" / "data" / "desk_corpus.rxn"

WORKED_EXAMPLE = (
    "[O:13]=[C:12]([CH:14]1[CH2:15][CH2:16]1)[CH:11]([c:17]1[cH:18][cH:19][cH:20]"
    "[cH:21][c:22]1[F:23])[N:10]1[CH2:9][CH2:8][CH:7]([SH:6])[CH2:25][CH2:24]1."
    "[CH3:1][CH2:2][CH2:3][C:4](=[O:5])Cl"
    ">>"
    "[CH3:1][CH2:2][CH2:3][C:4](=[O:5])[S:6][CH:7]1[CH2:8][CH2:9][N:10]([CH:11]"
    "([C:12](=[O:13])[CH:14]2[CH2:15][CH2:16]2)[c:17]2[cH:18][cH:19][cH:20][cH:21]"
    "[c:22]2[F:23])[CH2:24][CH2:25]1"
)


def site_and_leaving(smiles: str, pattern: str, site_pos: int, leaving_pos: tuple[int, ...]):
    mol = parse_smiles(smiles)
    matches = find_matches(mol, compile_pattern(pattern))
    if not matches:
        raise ValueError(f"{pattern!r} not found in {smiles!r}")
    match = matches[0]
    return mol, match[site_pos], tuple(match[p] for p in leaving_pos)


def couple(
    frag_a,
    frag_b,
    order: BondOrder = BondOrder.SINGLE,
    demote: tuple[int, int, int, BondOrder] | None = None,
    break_bond: tuple[int, int, int] | None = None,
) -> tuple[str, str, str]:
    """Join two fragments into a mapped product; return reactant/product texts.

    ``demote`` rewrites one fragment bond's order in the product (as in
    isocyanate addition); ``break_bond`` removes one fragment bond (ring
    opening).  Both are (side, atom_i, atom_j[, order]) in fragment indices.
    """
    (mol_a, site_a, leave_a) = frag_a
    (mol_b, site_b, leave_b) = frag_b

    keep_a = [i for i in range(len(mol_a.atoms)) if i not in leave_a]
    keep_b = [i for i in range(len(mol_b.atoms)) if i not in leave_b]
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    prod_index: dict[tuple[int, int], int] = {}
    for source, mol, keep in ((0, mol_a, keep_a), (1, mol_b, keep_b)):
        for i in keep:
            prod_index[(source, i)] = len(atoms)
            atoms.append(replace(mol.atoms[i], map_number=None))
        for bond in mol.bonds:
            if (source, bond.a) not in prod_index or (source, bond.b) not in prod_index:
                continue
            ends = {bond.a, bond.b}
            if break_bond and break_bond[0] == source and ends == {break_bond[1], break_bond[2]}:
                continue
            out = replace(
                bond, a=prod_index[(source, bond.a)], b=prod_index[(source, bond.b)]
            )
            if demote and demote[0] == source and ends == {demote[1], demote[2]}:
                out = replace(out, order=demote[3])
            bonds.append(out)
    bonds.append(
        Bond(a=prod_index[(0, site_a)], b=prod_index[(1, site_b)], order=order)
    )
    mapped_atoms = tuple(
        replace(a, map_number=i + 1) for i, a in enumerate(atoms)
    )
    product = Molecule(atoms=tuple(mapped_atoms), bonds=tuple(bonds))
    for i in range(len(product.atoms)):
        product.implicit_hydrogens(i)

    def mapped_reactant(source: int, mol: Molecule) -> Molecule:
        out = tuple(
            replace(a, map_number=prod_index[(source, i)] + 1)
            if (source, i) in prod_index
            else replace(a, map_number=None)
            for i, a in enumerate(mol.atoms)
        )
        return Molecule(atoms=out, bonds=mol.bonds)

    text_a = write_smiles(mapped_reactant(0, mol_a))
    text_b = write_smiles(mapped_reactant(1, mol_b))
    return text_a, text_b, write_smiles(product)


ACIDS = [
    "OC(=O)C", "OC(=O)CC", "OC(=O)C(C)C", "OC(=O)c1ccccc1",
    "OC(=O)c1ccc(C)cc1", "OC(=O)C1CC1", "OC(=O)c1ccco1", "OC(=O)CCC",
    "OC(=O)c1cccc(F)c1", "OC(=O)C1CCC1",
]
AMINES = [
    "NCC", "NC1CCCCC1", "Nc1ccccc1", "NCc1ccccc1", "NCCC",
    "NCCOC", "Nc1ccc(C)cc1", "NC(C)C", "NCCc1ccccc1", "NC1CCCC1",
]
SECONDARY_AMINES = ["C(C)NC", "C1CCNC1", "C1CCNCC1"]
ACYL_CHLORIDES = [
    "ClC(=O)CCCC", "ClC(=O)c1ccc(Cl)cc1", "ClC(=O)C(C)CC",
    "ClC(=O)c1cccnc1", "ClC(=O)CC1CC1",
]
THIOLS = [
    "SCC", "SC1CCCCC1", "Sc1ccccc1", "SCc1ccccc1", "SCCC",
    "O=C(C1CC1)C(c1ccccc1F)N1CCC(S)CC1",
]
ALCOHOLS = [
    "OCC", "OC(C)C", "OCc1ccccc1", "OC1CCCCC1", "OCCCC", "OCCc1ccccn1",
]
ALKYL_HALIDES = [
    "BrCCC", "BrCc1ccccc1", "BrCC(C)C", "ICCC(C)C", "BrCCCC", "ICc1ccc(F)cc1",
]
ARYL_HALIDES = [
    "Brc1ccccc1", "Brc1ccc(C)cc1", "Brc1ccc(F)cc1", "Brc1ccncc1", "Brc1cccc(OC)c1",
]
ARYL_BORONICS = [
    "OB(O)c1ccccc1", "OB(O)c1ccc(C)cc1", "OB(O)c1ccc(OC)cc1", "OB(O)c1cccs1",
]
SULFONYL_CHLORIDES = [
    "ClS(=O)(=O)c1ccccc1", "ClS(=O)(=O)C", "ClS(=O)(=O)c1ccc(C)cc1",
]
KETONES = [
    "O=C(C)C", "O=C1CCCCC1", "O=C(C)c1ccccc1", "O=CCc1ccccc1", "O=CC(C)C",
]
CHLOROFORMATES = ["ClC(=O)OCC", "ClC(=O)OCc1ccccc1"]
ISOCYANATES = ["O=C=NCC", "O=C=Nc1ccccc1", "O=C=NC1CCCCC1"]
EPOXIDES = ["C1CO1", "CC1CO1", "c1ccccc1C1CO1", "CCC1CO1", "CC(C)C1CO1"]


def acid(s):
    return site_and_leaving(s, "C(=O)[OH]", site_pos=0, leaving_pos=(2,))


def amine(s):
    mol = parse_smiles(s)
    for idx, atom in enumerate(mol.atoms):
        if atom.element == "N" and not atom.aromatic and mol.total_h(idx) >= 1:
            return mol, idx, ()
    raise ValueError(f"no N-H in {s}")


def acyl_chloride(s):
    return site_and_leaving(s, "ClC(=O)", site_pos=1, leaving_pos=(0,))


def thiol(s):
    return site_and_leaving(s, "[SH]", site_pos=0, leaving_pos=())


def alcohol(s):
    return site_and_leaving(s, "[OH]", site_pos=0, leaving_pos=())


def alkyl_halide(s):
    mol = parse_smiles(s)
    for idx, atom in enumerate(mol.atoms):
        if atom.element in ("Br", "I"):
            nbr = mol.neighbors(idx)[0][0]
            return mol, nbr, (idx,)
    raise ValueError(f"no halide in {s}")


def sulfonyl_chloride(s):
    return site_and_leaving(s, "ClS(=O)(=O)", site_pos=1, leaving_pos=(0,))


def boronic(s):
    mol, b_site, _ = site_and_leaving(s, "OB(O)", site_pos=1, leaving_pos=())
    leaving = {b_site}
    carbon = None
    for nbr, _ in mol.neighbors(b_site):
        if mol.atoms[nbr].element == "O":
            leaving.add(nbr)
        else:
            carbon = nbr
    return mol, carbon, tuple(sorted(leaving))


def ketone(s):
    return site_and_leaving(s, "O=C", site_pos=1, leaving_pos=(0,))


def chloroformate(s):
    return site_and_leaving(s, "ClC(=O)O", site_pos=1, leaving_pos=(0,))


def isocyanate(s):
    mol = parse_smiles(s)
    matches = find_matches(mol, compile_pattern("O=C=N"))
    _, c_idx, n_idx = matches[0]
    return (mol, c_idx, ()), (0, c_idx, n_idx, BondOrder.SINGLE)


def epoxide(s):
    mol = parse_smiles(s)
    matches = find_matches(mol, compile_pattern("C1OC1"))
    c_a, o_idx, _ = matches[0]
    return (mol, c_a, ()), (0, c_a, o_idx)


def aryl_halide(s):
    mol = parse_smiles(s)
    for idx, atom in enumerate(mol.atoms):
        if atom.element == "Br":
            nbr = mol.neighbors(idx)[0][0]
            return mol, nbr, (idx,)
    raise ValueError(f"no aryl bromide in {s}")


def self_consistent(line: str) -> bool:
    mapped = bind_atom_maps(parse_rxn(line))
    template = extract_template(mapped)
    target = canonical_smiles(mapped.base.product)
    candidates = apply_template_forward(template, list(mapped.base.precursors))
    return any(canonical_smiles(c) == target for c in candidates)


def main() -> None:
    rng = random.Random(20240817)
    lines = [WORKED_EXAMPLE]
    seen_products: set[str] = set()
    seen_products.add(
        canonical_smiles(parse_rxn(WORKED_EXAMPLE).product)
    )

    def urea_build():
        frag, demote = isocyanate(rng.choice(ISOCYANATES))
        return couple(frag, amine(rng.choice(AMINES)), demote=demote)

    def epoxide_build():
        frag, broken = epoxide(rng.choice(EPOXIDES))
        return couple(frag, amine(rng.choice(AMINES)), break_bond=broken)

    plans = [
        ("amide_condensation", 43, lambda: couple(acid(rng.choice(ACIDS)), amine(rng.choice(AMINES)))),
        ("ester_condensation", 22, lambda: couple(acid(rng.choice(ACIDS)), alcohol(rng.choice(ALCOHOLS)))),
        ("thioester_acylation", 18, lambda: couple(acyl_chloride(rng.choice(ACYL_CHLORIDES)), thiol(rng.choice(THIOLS)))),
        ("amide_acylation", 19, lambda: couple(acyl_chloride(rng.choice(ACYL_CHLORIDES)), amine(rng.choice(AMINES + SECONDARY_AMINES)))),
        ("ester_acylation", 15, lambda: couple(acyl_chloride(rng.choice(ACYL_CHLORIDES)), alcohol(rng.choice(ALCOHOLS)))),
        ("williamson_ether", 18, lambda: couple(alkyl_halide(rng.choice(ALKYL_HALIDES)), alcohol(rng.choice(ALCOHOLS)))),
        ("amine_alkylation", 12, lambda: couple(alkyl_halide(rng.choice(ALKYL_HALIDES)), amine(rng.choice(AMINES)))),
        ("sulfonamide", 15, lambda: couple(sulfonyl_chloride(rng.choice(SULFONYL_CHLORIDES)), amine(rng.choice(AMINES)))),
        ("suzuki_biaryl", 10, lambda: couple(boronic(rng.choice(ARYL_BORONICS)), aryl_halide(rng.choice(ARYL_HALIDES)))),
        ("imine_condensation", 9, lambda: couple(ketone(rng.choice(KETONES)), amine(rng.choice(AMINES)), order=BondOrder.DOUBLE)),
        ("carbamate", 2, lambda: couple(chloroformate(rng.choice(CHLOROFORMATES)), amine(rng.choice(AMINES)))),
        ("urea", 3, urea_build),
        ("thioether_alkylation", 4, lambda: couple(alkyl_halide(rng.choice(ALKYL_HALIDES)), thiol(rng.choice(THIOLS)))),
        ("sulfonate_ester", 4, lambda: couple(sulfonyl_chloride(rng.choice(SULFONYL_CHLORIDES)), alcohol(rng.choice(ALCOHOLS)))),
        ("epoxide_amination", 5, epoxide_build),
    ]

    for name, count, build in plans:
        made = 0
        attempts = 0
        while made < count:
            attempts += 1
            if attempts > count * 50:
                raise RuntimeError(f"pool exhausted for {name}")
            text_a, text_b, product = build()
            line = f"{text_a}.{text_b}>>{product}"
            product_key = canonical_smiles(parse_rxn(line).product)
            if product_key in seen_products:
                continue
            if not self_consistent(line):
                raise RuntimeError(f"{name} line not self-consistent: {line}")
            seen_products.add(product_key)
            lines.append(line)
            made += 1

    assert len(lines) == 200, len(lines)
    OUT_PATH.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} reactions to {OUT_PATH}")


if __name__ == "__main__":
    sys.exit(main())
