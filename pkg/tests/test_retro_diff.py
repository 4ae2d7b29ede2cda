from retrokit.chem import bind_atom_maps, parse_rxn
from retrokit.chem.model import BondOrder
from retrokit.retro import ChangeKind, UnmappedAtom, diff_bonds


def test_worked_example_changes(worked_example):
    diff = diff_bonds(worked_example)
    formed = [c for c in diff.bond_changes if c.kind is ChangeKind.FORMED]
    broken = [c for c in diff.bond_changes if c.kind is ChangeKind.BROKEN]
    assert [c.endpoints for c in formed] == [(4, 6)]
    assert formed[0].after is BondOrder.SINGLE
    assert len(broken) == 1
    mapped_end, handle = broken[0].endpoints
    assert mapped_end == 4
    assert isinstance(handle, UnmappedAtom)
    leaving = worked_example.base.precursors[handle.mol_index].atoms[handle.atom_index]
    assert leaving.element == "Cl"
    # the sulfur loses one implicit hydrogen
    assert diff.hydrogen_changes == {6: (1, 0)}
    assert diff.charge_changes == {}


def test_identity_reaction_is_empty():
    mapped = bind_atom_maps(parse_rxn("[CH4:1]>>[CH4:1]"))
    diff = diff_bonds(mapped)
    assert diff.bond_changes == ()
    assert diff.hydrogen_changes == {}
    assert diff.changed_maps() == set()


def test_order_change_detected():
    mapped = bind_atom_maps(parse_rxn("[CH2:1]=[CH2:2]>>[CH3:1][CH3:2]"))
    diff = diff_bonds(mapped)
    kinds = [c.kind for c in diff.bond_changes]
    assert kinds == [ChangeKind.ORDER_CHANGED]
    change = diff.bond_changes[0]
    assert change.before is BondOrder.DOUBLE
    assert change.after is BondOrder.SINGLE
    assert diff.hydrogen_changes == {1: (2, 3), 2: (2, 3)}


def test_diff_recovers_generator_edits(corpus_lines):
    """Every corpus line was built by forming exactly one new bond."""
    multi_edit = 0
    for line in corpus_lines:
        diff = diff_bonds(bind_atom_maps(parse_rxn(line)))
        formed = diff.formed_bonds()
        assert len(formed) == 1
        if len(diff.bond_changes) > 1:
            multi_edit += 1
    # some families also break or demote a bond (ring opening, isocyanate)
    assert multi_edit >= 8
