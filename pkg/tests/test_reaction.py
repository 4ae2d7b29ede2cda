import pytest

from retrokit.chem import (
    bind_atom_maps,
    canonical_smiles,
    parse_rxn,
    parse_smiles,
    strip_maps,
)
from retrokit.errors import MappingError, SmilesSyntaxError

from conftest import ACYL_SMILES, MAPPED_RXN, RAW_RXN, THIOL_SMILES


def test_worked_example_raw_parse():
    rec = parse_rxn(RAW_RXN)
    assert len(rec.precursors) == 2
    assert canonical_smiles(rec.precursors[0]) == canonical_smiles(
        parse_smiles(THIOL_SMILES)
    )
    assert canonical_smiles(rec.precursors[1]) == canonical_smiles(
        parse_smiles(ACYL_SMILES)
    )


def test_identity_reaction():
    rec = parse_rxn("C>>C")
    assert len(rec.precursors) == 1
    assert len(rec.product.atoms) == 1


def test_single_gt_is_malformed():
    with pytest.raises(SmilesSyntaxError):
        parse_rxn("C>C")


def test_reagent_field_folds_into_precursors():
    rec = parse_rxn("CC>O>CCO")
    assert len(rec.precursors) == 2


def test_missing_separator():
    with pytest.raises(SmilesSyntaxError):
        parse_rxn("CCO")


def test_bind_atom_maps_worked_example(worked_example):
    assert worked_example.n == 25
    # the chloride leaving atom is the only unmapped precursor atom
    assert len(worked_example.unmapped_precursor_atoms) == 1
    mol_idx, atom_idx = worked_example.unmapped_precursor_atoms[0]
    atom = worked_example.base.precursors[mol_idx].atoms[atom_idx]
    assert atom.element == "Cl"


def test_bind_identity():
    mapped = bind_atom_maps(parse_rxn("[CH4:1]>>[CH4:1]"))
    assert mapped.n == 1
    assert mapped.precursor_atom(1) == (0, 0)


def test_duplicate_product_map():
    with pytest.raises(MappingError, match="duplicate"):
        bind_atom_maps(parse_rxn("[CH3:1][CH3:2]>>[CH3:1][CH3:1]"))


def test_gapped_product_maps():
    with pytest.raises(MappingError, match="gapped"):
        bind_atom_maps(parse_rxn("[CH3:1][CH3:3]>>[CH3:1][CH3:3]"))


def test_unmapped_product_atom():
    with pytest.raises(MappingError):
        bind_atom_maps(parse_rxn("[CH3:1]C>>[CH3:1]C"))


def test_product_map_missing_from_precursors():
    with pytest.raises(MappingError, match="missing"):
        bind_atom_maps(parse_rxn("[CH4:1]>>[CH3:1][CH3:2]"))


def test_strip_maps_on_mapped_product(worked_example):
    product = worked_example.base.product
    stripped = strip_maps(product)
    assert all(a.map_number is None for a in stripped.atoms)
    assert canonical_smiles(stripped) == canonical_smiles(
        parse_smiles(RAW_RXN.split(">>")[1])
    )


def test_strip_maps_identity_when_unmapped():
    mol = parse_smiles("CCO")
    assert strip_maps(mol) == mol


def test_mapped_rxn_roundtrips():
    rec = parse_rxn(MAPPED_RXN)
    again = parse_rxn(rec.rxn_smiles())
    assert canonical_smiles(again.product) == canonical_smiles(rec.product)
    assert bind_atom_maps(again).n == 25
