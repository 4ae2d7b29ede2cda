"""Dataset ingestion: raw RXN lines to validated JSONL records.

Input lines are RXN SMILES, pre-mapped when an atom-mapping step has
already run.  Ingestion parses, validates the product mapping,
deduplicates identical reactions, and flags products that appear with
more than one distinct reactant set (multi-label).  Per-line failures
are reported, never fatal.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from retrokit.chem import (
    bind_atom_maps,
    canonical_smiles,
    parse_rxn,
    strip_maps,
)


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    rxn: str
    canonical_product: str
    canonical_reactants: tuple[str, ...]
    multi_label: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "rxn": self.rxn,
                "canonical_product": self.canonical_product,
                "canonical_reactants": list(self.canonical_reactants),
                "multi_label": self.multi_label,
            }
        )

    @staticmethod
    def from_json(line: str) -> "DatasetRecord":
        row = json.loads(line)
        return DatasetRecord(
            id=row["id"],
            rxn=row["rxn"],
            canonical_product=row["canonical_product"],
            canonical_reactants=tuple(row["canonical_reactants"]),
            multi_label=row.get("multi_label", False),
        )


@dataclass
class IngestReport:
    total_lines: int = 0
    kept: int = 0
    duplicates: int = 0
    multi_label_flagged: int = 0
    dropped: list[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "total_lines": self.total_lines,
            "kept": self.kept,
            "duplicates": self.duplicates,
            "multi_label_flagged": self.multi_label_flagged,
            "dropped": self.dropped,
        }


def ingest_lines(lines: list[str]) -> tuple[list[DatasetRecord], IngestReport]:
    """Parse and validate raw reaction lines into records."""
    report = IngestReport()
    records: list[DatasetRecord] = []
    seen_reactions: set[str] = set()
    by_product: dict[str, set[tuple[str, ...]]] = {}

    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        report.total_lines += 1
        record_id = f"r{lineno:04d}"
        try:
            rec = parse_rxn(text, id=record_id)
            mapped = bind_atom_maps(rec)
        except Exception as exc:
            report.dropped.append(
                {"line": lineno, "reason": type(exc).__name__, "detail": str(exc)}
            )
            continue
        product = canonical_smiles(strip_maps(rec.product))
        reactants = tuple(
            sorted(canonical_smiles(strip_maps(m)) for m in rec.precursors)
        )
        key = f"{'.'.join(reactants)}>>{product}"
        if key in seen_reactions:
            report.duplicates += 1
            continue
        seen_reactions.add(key)
        by_product.setdefault(product, set()).add(reactants)
        records.append(
            DatasetRecord(
                id=record_id,
                rxn=mapped.base.raw,
                canonical_product=product,
                canonical_reactants=reactants,
            )
        )

    flagged: list[DatasetRecord] = []
    for record in records:
        multi = len(by_product[record.canonical_product]) > 1
        if multi:
            report.multi_label_flagged += 1
        flagged.append(
            DatasetRecord(
                id=record.id,
                rxn=record.rxn,
                canonical_product=record.canonical_product,
                canonical_reactants=record.canonical_reactants,
                multi_label=multi,
            )
        )
    report.kept = len(flagged)
    return flagged, report


def ingest_file(path: str | Path) -> tuple[list[DatasetRecord], IngestReport]:
    with open(path, encoding="utf-8") as handle:
        return ingest_lines(handle.read().splitlines())


def load_records(path: str | Path) -> list[DatasetRecord]:
    with open(path, encoding="utf-8") as handle:
        return [DatasetRecord.from_json(line) for line in handle if line.strip()]


def write_records(records: list[DatasetRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.to_json() + "\n")


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def desk_corpus_lines() -> list[str]:
    """The bundled 200-reaction desk corpus."""
    from importlib import resources

    text = (
        resources.files("retrokit.data")
        .joinpath("desk_corpus.rxn")
        .read_text(encoding="utf-8")
    )
    return [line for line in text.splitlines() if line.strip()]
