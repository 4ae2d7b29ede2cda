import pytest

from retrokit.chem import parse_smiles
from retrokit.errors import PatternSyntaxError
from retrokit.patterns import PatternDef, compile_pattern, find_matches, match_pattern

from conftest import ACYL_SMILES, enumerate_matches_bruteforce

ORACLE_MOLECULES = [
    "CCCC(=O)Cl", "CC(=O)O", "CC(=O)OC", "CC(=O)N", "OC(=O)c1ccccc1",
    "CCO", "CCOCC", "c1ccccc1", "Cc1ccccc1", "OCC(O)CO",
    "NC(=O)C(N)C(=O)O", "CSC", "CC(C)=O", "O=CC=O", "C1CCOC1",
    "c1ccncc1", "Clc1ccccc1Cl", "CC(C)(C)O", "N#CCC#N", "CC(=O)C(=O)O",
]

ORACLE_PATTERNS = ["C(=O)O", "C(=O)Cl", "[OH]", "C=O", "CO", "c1ccccc1", "N", "CC"]


def test_acyl_chloride_single_match():
    matches = match_pattern(parse_smiles(ACYL_SMILES), PatternDef("acyl", "C(=O)Cl"))
    assert len(matches) == 1
    mol = parse_smiles(ACYL_SMILES)
    c, o, cl = matches[0]
    assert mol.atoms[c].element == "C"
    assert mol.atoms[o].element == "O"
    assert mol.atoms[cl].element == "Cl"


def test_identity_single_atom():
    assert match_pattern(parse_smiles("C"), "C") == [(0,)]


def test_matches_equal_bruteforce_enumeration():
    for pattern_text in ORACLE_PATTERNS:
        compiled = compile_pattern(pattern_text)
        for mol_text in ORACLE_MOLECULES:
            mol = parse_smiles(mol_text)
            got = find_matches(mol, compiled)
            expected = enumerate_matches_bruteforce(mol, compiled)
            assert got == expected, (pattern_text, mol_text)


def test_h_count_constraint():
    thiol = parse_smiles("SCCS(=O)C")
    hits = match_pattern(thiol, "[SH]")
    assert len(hits) == 1
    assert hits[0][0] == 0


def test_charge_constraint():
    mol = parse_smiles("[O-]C(=O)C")
    assert match_pattern(mol, "[O-]") == [(0,)]
    # bare-atom patterns leave charge unconstrained
    assert len(match_pattern(mol, "O")) == 2


def test_aromatic_vs_aliphatic():
    assert match_pattern(parse_smiles("c1ccccc1"), "C") == []
    assert len(match_pattern(parse_smiles("c1ccccc1"), "c")) == 6


def test_wildcard_matches_anything():
    assert len(match_pattern(parse_smiles("CPO"), "*")) == 3


def test_default_bond_matches_single_or_aromatic():
    # "CC"-style pattern bonds are written without a symbol
    benzene = parse_smiles("c1ccccc1")
    assert len(match_pattern(benzene, "cc")) == 6  # six ring bonds
    assert match_pattern(parse_smiles("C=C"), "CC") == []


def test_explicit_single_bond_excludes_aromatic():
    biphenyl = parse_smiles("c1ccccc1-c1ccccc1")
    assert len(match_pattern(biphenyl, "c-c")) == 1


def test_ring_pattern():
    mol = parse_smiles("C1OC1CC")
    assert len(match_pattern(mol, "C1OC1")) == 1


def test_dedup_by_matched_atom_set():
    # symmetric pattern on a symmetric molecule: one match per atom set
    mol = parse_smiles("OCO")
    assert len(match_pattern(mol, "OCO")) == 1


def test_pattern_syntax_errors():
    with pytest.raises(PatternSyntaxError):
        compile_pattern("C(")
    with pytest.raises(PatternSyntaxError):
        compile_pattern("C.C")
    with pytest.raises(PatternSyntaxError):
        compile_pattern("")


def test_min_h_restriction():
    compiled = compile_pattern("S")
    thiol_and_thioether = parse_smiles("SC.CSC")
    all_s = find_matches(thiol_and_thioether, compiled)
    assert len(all_s) == 2
    with_h = find_matches(thiol_and_thioether, compiled, min_h={0: 1})
    assert len(with_h) == 1
