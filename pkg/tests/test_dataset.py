from retrokit.dataset import ingest_lines, load_records, write_records

from conftest import MAPPED_RXN


def test_worked_example_line_ingests_cleanly():
    records, report = ingest_lines([MAPPED_RXN])
    assert report.kept == 1
    assert report.dropped == []
    assert records[0].canonical_reactants


def test_duplicate_lines_collapse():
    records, report = ingest_lines([MAPPED_RXN, MAPPED_RXN])
    assert report.kept == 1
    assert report.duplicates == 1


def test_multi_label_products_flagged():
    lines = [
        "[CH3:1][C:2](=[O:3])O.[NH2:4][CH3:5]>>[CH3:1][C:2](=[O:3])[NH:4][CH3:5]",
        "[CH3:1][C:2](=[O:3])Cl.[NH2:4][CH3:5]>>[CH3:1][C:2](=[O:3])[NH:4][CH3:5]",
    ]
    records, report = ingest_lines(lines)
    assert report.kept == 2
    assert report.multi_label_flagged == 2
    assert all(r.multi_label for r in records)


def test_malformed_line_dropped_with_reason():
    records, report = ingest_lines(["C1CC>>C", "x>>y", MAPPED_RXN])
    assert report.kept == 1
    reasons = {d["reason"] for d in report.dropped}
    assert "SmilesSyntaxError" in reasons


def test_unmapped_line_dropped_as_mapping_error():
    records, report = ingest_lines(["CCO.CC>>CCOCC"])
    assert report.kept == 0
    assert report.dropped[0]["reason"] == "MappingError"


def test_comments_and_blanks_skipped():
    records, report = ingest_lines(["# header", "", MAPPED_RXN])
    assert report.total_lines == 1
    assert report.kept == 1


def test_records_roundtrip_through_jsonl(tmp_path):
    records, _ = ingest_lines([MAPPED_RXN])
    path = tmp_path / "d.jsonl"
    write_records(records, path)
    assert load_records(path) == records


def test_desk_corpus_ingests_fully(corpus_lines):
    records, report = ingest_lines(corpus_lines)
    assert report.kept == 200
    assert report.dropped == []
    assert report.multi_label_flagged == 0
