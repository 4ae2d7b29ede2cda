import pytest

from retrokit.chem import parse_smiles, write_smiles
from retrokit.chem.model import BondOrder, Stereo
from retrokit.errors import SmilesSyntaxError, ValenceError

from conftest import PRODUCT_SMILES, graphs_isomorphic


def test_methane():
    mol = parse_smiles("C")
    assert len(mol.atoms) == 1
    assert len(mol.bonds) == 0
    assert mol.implicit_hydrogens(0) == 4


def test_worked_example_product_has_25_heavy_atoms():
    mol = parse_smiles(PRODUCT_SMILES)
    assert len(mol.atoms) == 25


def test_unclosed_ring_raises():
    with pytest.raises(SmilesSyntaxError, match="ring bond 1"):
        parse_smiles("C1CC")


@pytest.mark.parametrize(
    "text",
    ["", "C(", "C)", "C%1C", "C=", "=C", "C..C", "[C", "C1CC2", "[Xx]", "C~C"],
)
def test_malformed_inputs(text):
    with pytest.raises(SmilesSyntaxError):
        parse_smiles(text)


def test_valence_overflow():
    with pytest.raises(ValenceError):
        parse_smiles("C(F)(F)(F)(F)F")


@pytest.mark.parametrize(
    "text,expected_h",
    [
        ("C", [4]),
        ("CC", [3, 3]),
        ("C=C", [2, 2]),
        ("C#C", [1, 1]),
        ("O", [2]),
        ("OCC", [1, 2, 3]),
        ("N", [3]),
        ("Cl", [1]),
        ("P", [3]),
        ("S", [2]),
        ("CS(=O)(=O)C", [3, 0, 0, 0, 3]),
        ("c1ccccc1", [1] * 6),
        ("c1ccncc1", [1, 1, 1, 0, 1, 1]),
        ("c1ccoc1", [1, 1, 1, 0, 1]),
        ("c1ccsc1", [1, 1, 1, 0, 1]),
        ("Cc1ccccc1", [3, 0, 1, 1, 1, 1, 1]),
    ],
)
def test_implicit_hydrogens(text, expected_h):
    mol = parse_smiles(text)
    assert [mol.implicit_hydrogens(i) for i in range(len(mol.atoms))] == expected_h


def test_bracket_atom_fields():
    mol = parse_smiles("[13CH3+:7]")
    atom = mol.atoms[0]
    assert atom.isotope == 13
    assert atom.explicit_h == 3
    assert atom.formal_charge == 1
    assert atom.map_number == 7


def test_bracket_without_h_means_zero():
    mol = parse_smiles("[CH4].[C]")
    assert mol.atoms[0].explicit_h == 4
    assert mol.atoms[1].explicit_h == 0


def test_stereo_marks_preserved():
    mol = parse_smiles("N[C@@H](C)C(=O)O")
    marks = [a.stereo_mark for a in mol.atoms]
    assert Stereo.CLOCKWISE in marks
    out = write_smiles(mol)
    assert "@@" in out


def test_directional_bonds_preserved():
    mol = parse_smiles("C/C=C\\C")
    directions = [b.direction for b in mol.bonds if b.direction is not None]
    assert len(directions) == 2
    out = write_smiles(mol)
    assert "/" in out and "\\" in out


def test_charges():
    mol = parse_smiles("[NH4+].[O-]S(=O)(=O)[O-]")
    charges = sorted(a.formal_charge for a in mol.atoms)
    assert charges == [-1, -1, 0, 0, 0, 1]
    assert parse_smiles("[Fe+2]").atoms[0].formal_charge == 2


def test_wildcard_atom():
    mol = parse_smiles("[4*]CC")
    assert mol.atoms[0].is_wildcard
    assert mol.atoms[0].isotope == 4
    assert parse_smiles("*").atoms[0].is_wildcard


def test_percent_ring_closure():
    mol = parse_smiles("C%12CCCCC%12")
    assert mol.ring_count() == 1


def test_ring_bond_order_mismatch():
    with pytest.raises(SmilesSyntaxError, match="order mismatch"):
        parse_smiles("C=1CCCCC-1")


def test_ring_bond_order_agreement():
    mol = parse_smiles("C=1CCCCC=1")
    orders = {b.order for b in mol.bonds}
    assert BondOrder.DOUBLE in orders


def test_aromatic_default_bond():
    mol = parse_smiles("cc")
    assert mol.bonds[0].order is BondOrder.AROMATIC


def test_explicit_single_between_aromatics():
    mol = parse_smiles("c1ccccc1-c1ccccc1")
    orders = [b.order for b in mol.bonds]
    assert orders.count(BondOrder.SINGLE) == 1


def test_dot_components():
    mol = parse_smiles("CC.O")
    assert len(mol.components()) == 2


def test_ring_closure_may_not_cross_dots():
    with pytest.raises(SmilesSyntaxError):
        parse_smiles("C1.C1")


def test_roundtrip_isomorphic_on_fixtures(corpus_lines):
    from conftest import graphs_isomorphic_backtracking

    seen = 0
    for line in corpus_lines[:40]:
        left, right = line.split(">>")
        for text in left.split(".") + [right]:
            mol = parse_smiles(text)
            again = parse_smiles(write_smiles(mol))
            if len(mol.atoms) <= 9:
                assert graphs_isomorphic(mol, again)
            else:
                assert graphs_isomorphic_backtracking(mol, again)
            seen += 1
    assert seen > 80


def test_ring_count_fixtures():
    assert parse_smiles("C1CC1").ring_count() == 1
    assert parse_smiles("c1ccc2ccccc2c1").ring_count() == 2
    assert parse_smiles("CC(C)C").ring_count() == 0
    assert parse_smiles("C1CC1.C1CC1").ring_count() == 2
    assert parse_smiles(PRODUCT_SMILES).ring_count() == 3
