from retrokit.chem import parse_smiles
from retrokit.patterns import PatternDef, compile_pattern, find_matches
from retrokit.perception import (
    analyze_product,
    detect_groups,
    fragment_smiles,
    load_pattern_table,
    product_stats,
)

from conftest import PRODUCT_SMILES


def test_table_loads_and_compiles(pattern_table):
    assert len(pattern_table) >= 40
    names = {p.name for p in pattern_table}
    assert {"acyl_chloride", "thiol", "thioester", "ester", "amide"} <= names


def test_worked_example_stats(worked_example, pattern_table):
    _, _, stats = analyze_product(worked_example, pattern_table)
    assert stats.stereo_char_count == 0
    # independent counts over the parsed graph
    product = parse_smiles(PRODUCT_SMILES)
    assert stats.carbon_count == sum(1 for a in product.atoms if a.element == "C")
    assert stats.carbon_count == 20
    assert stats.ring_count == len(product.bonds) - len(product.atoms) + len(
        product.components()
    )
    assert stats.ring_count == 3


def test_stereo_chars_counted_from_text():
    stats = product_stats(parse_smiles("C/C=C\\[C@@H](C)O"))
    assert stats.stereo_char_count == 4  # one '/', one '\', two '@'


def test_analyze_product_is_pure(worked_example, pattern_table):
    first = analyze_product(worked_example, pattern_table)
    second = analyze_product(worked_example, pattern_table)
    assert first == second


def test_mapped_smiles_carries_all_maps(worked_example, pattern_table):
    mapped_smiles, _, _ = analyze_product(worked_example, pattern_table)
    for m in range(1, 26):
        assert f":{m}]" in mapped_smiles


def test_group_hits_report_map_numbers(worked_example, pattern_table):
    _, hits, _ = analyze_product(worked_example, pattern_table)
    by_name = {h.name: h for h in hits}
    assert set(by_name["thioester"].matched_atom_maps) == {4, 5, 6}
    assert set(by_name["aryl_fluoride"].matched_atom_maps) == {22, 23}


def test_fragment_smiles_rematches_own_pattern(worked_example, pattern_table):
    _, hits, _ = analyze_product(worked_example, pattern_table)
    patterns = {p.name: p.pattern for p in pattern_table}
    assert hits
    for hit in hits:
        fragment = parse_smiles(hit.fragment_smiles)
        compiled = compile_pattern(patterns[hit.name])
        assert find_matches(fragment, compiled), hit


def test_fragment_freezes_hydrogens():
    mol = parse_smiles("CC")
    text = fragment_smiles(mol, (0,))
    assert text == "[CH3]"
    assert find_matches(parse_smiles(text), compile_pattern("[CH3]"))


def test_detect_groups_unmapped_molecule_uses_positions():
    hits = detect_groups(parse_smiles("CCO"), [PatternDef("alcohol", "[OH]")])
    assert hits[0].matched_atom_maps == (3,)


def test_custom_table_roundtrip(tmp_path):
    table_file = tmp_path / "groups.tsv"
    table_file.write_text("# comment\nester\tC(=O)OC\n", encoding="utf-8")
    table = load_pattern_table(table_file)
    assert table == [PatternDef("ester", "C(=O)OC")]
