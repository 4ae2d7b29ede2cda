"""Shared fixtures and independent brute-force oracles."""

from __future__ import annotations

import itertools
import random
from dataclasses import replace

import pytest

from retrokit.chem import bind_atom_maps, parse_rxn
from retrokit.chem.model import Molecule
from retrokit.dataset import desk_corpus_lines
from retrokit.perception import load_pattern_table

# Appendix worked example: thioesterification of a thiol with butanoyl chloride
RAW_RXN = (
    "O=C(C1CC1)C(c1ccccc1F)N1CCC(S)CC1.CCCC(=O)Cl"
    ">>CCCC(=O)SC1CCN(C(C(=O)C2CC2)c2ccccc2F)CC1"
)
MAPPED_RXN = (
    "[O:13]=[C:12]([CH:14]1[CH2:15][CH2:16]1)[CH:11]([c:17]1[cH:18][cH:19][cH:20]"
    "[cH:21][c:22]1[F:23])[N:10]1[CH2:9][CH2:8][CH:7]([SH:6])[CH2:25][CH2:24]1."
    "[CH3:1][CH2:2][CH2:3][C:4](=[O:5])Cl"
    ">>"
    "[CH3:1][CH2:2][CH2:3][C:4](=[O:5])[S:6][CH:7]1[CH2:8][CH2:9][N:10]([CH:11]"
    "([C:12](=[O:13])[CH:14]2[CH2:15][CH2:16]2)[c:17]2[cH:18][cH:19][cH:20][cH:21]"
    "[c:22]2[F:23])[CH2:24][CH2:25]1"
)
PRODUCT_SMILES = "CCCC(=O)SC1CCN(C(C(=O)C2CC2)c2ccccc2F)CC1"
THIOL_SMILES = "O=C(C1CC1)C(c1ccccc1F)N1CCC(S)CC1"
ACYL_SMILES = "CCCC(=O)Cl"

INSTANCE_TEMPLATE = "([S:6]).([C:4](=O)-Cl)>>([C:4](=O)-[S:6])"
CANONICAL_TEMPLATE = "[S:2].[C:1](=O)-Cl>>[C:1](=O)-[S:2]"
SYNTHON_A = "[6*]C(=O)CCC"
SYNTHON_B = "[4*]SC1CCN(C(C(=O)C2CC2)c2ccccc2F)CC1"


@pytest.fixture(scope="session")
def worked_example():
    return bind_atom_maps(parse_rxn(MAPPED_RXN, id="b1"))


@pytest.fixture(scope="session")
def pattern_table():
    return load_pattern_table()


@pytest.fixture(scope="session")
def corpus_lines():
    lines = desk_corpus_lines()
    assert len(lines) == 200
    return lines


def atom_label(mol: Molecule, idx: int):
    atom = mol.atoms[idx]
    return (
        atom.is_wildcard,
        atom.element,
        atom.aromatic,
        atom.formal_charge,
        mol.total_h(idx),
        atom.isotope or 0,
        atom.stereo_mark,
    )


def graphs_isomorphic(a: Molecule, b: Molecule) -> bool:
    """Exhaustive permutation-search isomorphism on labeled graphs."""
    if len(a.atoms) != len(b.atoms) or len(a.bonds) != len(b.bonds):
        return False
    labels_a = [atom_label(a, i) for i in range(len(a.atoms))]
    labels_b = [atom_label(b, i) for i in range(len(b.atoms))]
    if sorted(labels_a) != sorted(labels_b):
        return False
    bonds_a = {(min(x.a, x.b), max(x.a, x.b)): x.order for x in a.bonds}
    n = len(a.atoms)
    for perm in itertools.permutations(range(n)):
        if any(labels_a[i] != labels_b[perm[i]] for i in range(n)):
            continue
        image = {
            (min(perm[x], perm[y]), max(perm[x], perm[y])): order
            for (x, y), order in bonds_a.items()
        }
        target = {(min(x.a, x.b), max(x.a, x.b)): x.order for x in b.bonds}
        if image == target:
            return True
    return False


def graphs_isomorphic_backtracking(a: Molecule, b: Molecule) -> bool:
    """Label-pruned backtracking isomorphism for larger fixtures."""
    n = len(a.atoms)
    if n != len(b.atoms) or len(a.bonds) != len(b.bonds):
        return False
    labels_a = [atom_label(a, i) for i in range(n)]
    labels_b = [atom_label(b, i) for i in range(n)]
    if sorted(labels_a) != sorted(labels_b):
        return False

    assignment: dict[int, int] = {}
    used: set[int] = set()

    def extend(i: int) -> bool:
        if i == n:
            return True
        for j in range(n):
            if j in used or labels_a[i] != labels_b[j]:
                continue
            if a.degree(i) != b.degree(j):
                continue
            ok = True
            for nbr, bond in a.neighbors(i):
                if nbr in assignment:
                    other = b.bond_between(j, assignment[nbr])
                    if other is None or other.order != bond.order:
                        ok = False
                        break
            if not ok:
                continue
            assignment[i] = j
            used.add(j)
            if extend(i + 1):
                return True
            used.discard(j)
            del assignment[i]
        return False

    return extend(0)


def permuted(mol: Molecule, rng: random.Random) -> Molecule:
    """Random relabeling of atom order, preserving the graph."""
    n = len(mol.atoms)
    perm = list(range(n))
    rng.shuffle(perm)
    atoms = [None] * n
    for old, new in enumerate(perm):
        atoms[new] = mol.atoms[old]
    bonds = tuple(replace(b, a=perm[b.a], b=perm[b.b]) for b in mol.bonds)
    return Molecule(atoms=tuple(atoms), bonds=bonds)


def enumerate_matches_bruteforce(mol, pattern) -> list[tuple[int, ...]]:
    """All injective pattern embeddings, by exhaustive assignment.

    Independent of the production matcher: tries every ordered selection
    of molecule atoms and checks atom/bond constraints directly.
    Deduplicates exactly like the matcher (sorted matched-atom tuples).
    """
    from retrokit.chem.model import BondOrder
    from retrokit.errors import ValenceError

    graph = pattern.graph
    k = len(graph.atoms)
    results = []

    def total_h(m, i):
        try:
            return m.total_h(i)
        except ValenceError:
            return 0

    def atom_ok(p_idx, m_idx):
        p = graph.atoms[p_idx]
        m = mol.atoms[m_idx]
        if p.is_wildcard:
            return True
        if m.is_wildcard:
            return False
        if p.element != m.element or p.aromatic != m.aromatic:
            return False
        if p.formal_charge != 0 and p.formal_charge != m.formal_charge:
            return False
        if p.explicit_h is not None and total_h(mol, m_idx) != p.explicit_h:
            return False
        if p.isotope is not None and p.isotope != m.isotope:
            return False
        return True

    for combo in itertools.permutations(range(len(mol.atoms)), k):
        if not all(atom_ok(p, m) for p, m in enumerate(combo)):
            continue
        ok = True
        for bond in graph.bonds:
            target = mol.bond_between(combo[bond.a], combo[bond.b])
            if target is None:
                ok = False
                break
            key = (min(bond.a, bond.b), max(bond.a, bond.b))
            if key in pattern.default_bonds:
                if target.order not in (BondOrder.SINGLE, BondOrder.AROMATIC):
                    ok = False
                    break
            elif target.order != bond.order:
                ok = False
                break
        if ok:
            results.append(tuple(combo))

    deduped = {}
    for match in results:
        key = tuple(sorted(match))
        if key not in deduped or match < deduped[key]:
            deduped[key] = match
    return sorted(deduped.values())
