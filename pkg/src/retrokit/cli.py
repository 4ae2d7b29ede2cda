"""Command-line surface: ingest, extract, rationale, generate, eval,
hardset, reward, canon.

Results go to stdout or ``--out`` files; logs go to stderr.  Exit codes:
0 success, 1 partial failure (some records dropped or criteria failed),
2 fatal/usage error.  Reports embed the resolved run configuration and
the SHA-256 of every input file.
"""

from __future__ import annotations

import json
import logging
import sys
from collections import defaultdict
from pathlib import Path

import click

from retrokit import __version__
from retrokit.chem import parse_smiles
from retrokit.config import RunConfig, resolve_config
from retrokit.dataset import (
    file_sha256,
    ingest_file,
    load_records,
    write_records,
)
from retrokit.errors import SmilesSyntaxError, ValenceError

logger = logging.getLogger("retrokit")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_FATAL = 2


def _provenance(config: RunConfig, inputs: dict[str, str]) -> dict:
    return {
        "version": __version__,
        "config": config.as_dict(),
        "input_hashes": {
            name: file_sha256(path) for name, path in inputs.items() if path
        },
    }


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def main(ctx, config_path, seed, workers, verbose):
    """Retrosynthesis toolkit command line."""
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = {
        "config_path": config_path,
        "flags": {"seed": seed, "workers": workers},
    }


def _ctx_config(ctx, **extra) -> RunConfig:
    flags = dict(ctx.obj["flags"])
    flags.update(extra)
    return resolve_config(ctx.obj["config_path"], flags)


@main.command()
@click.argument("smiles")
@click.option("--keep-maps", is_flag=True, help="keep atom maps in the output")
def canon(smiles, keep_maps):
    """Print the canonical form of a SMILES string."""
    from retrokit.chem.writer import WriteOptions, write_smiles

    try:
        mol = parse_smiles(smiles)
    except (SmilesSyntaxError, ValenceError) as exc:
        raise click.ClickException(str(exc))
    click.echo(
        write_smiles(mol, canonical=True, options=WriteOptions(keep_maps=keep_maps))
    )


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.pass_context
def ingest(ctx, in_path, out_path, report_path):
    """Parse raw RXN lines into a validated dataset JSONL."""
    config = _ctx_config(ctx)
    records, report = ingest_file(in_path)
    write_records(records, out_path)
    payload = {
        **_provenance(config, {"in": in_path}),
        "report": report.as_dict(),
    }
    if report_path:
        Path(report_path).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    logger.info(
        "ingested %d lines: kept %d, duplicates %d, dropped %d",
        report.total_lines, report.kept, report.duplicates, len(report.dropped),
    )
    click.echo(json.dumps({"kept": report.kept, "dropped": len(report.dropped)}))
    sys.exit(EXIT_PARTIAL if report.dropped else EXIT_OK)


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
def extract(ctx, in_path, out_path):
    """Extract one reaction template per dataset record."""
    from retrokit.chem import bind_atom_maps, parse_rxn
    from retrokit.errors import NoChangeError
    from retrokit.retro import diff_bonds, extract_template, identify_disconnections

    config = _ctx_config(ctx)
    records = load_records(in_path)
    written = 0
    dropped = []
    with open(out_path, "w", encoding="utf-8") as handle:
        for record in records:
            try:
                mapped = bind_atom_maps(parse_rxn(record.rxn, id=record.id))
                diff = diff_bonds(mapped)
                template = extract_template(mapped, diff)
                disconnections = identify_disconnections(mapped, diff)
            except NoChangeError:
                dropped.append({"id": record.id, "reason": "NoChangeError"})
                continue
            except Exception as exc:
                dropped.append({"id": record.id, "reason": type(exc).__name__})
                continue
            handle.write(
                json.dumps(
                    {
                        "id": record.id,
                        "instance_form": template.instance_form,
                        "canonical_form": template.canonical_form,
                        "disconnections": [
                            [d.bond[0], d.bond[1], d.order.value]
                            for d in disconnections
                        ],
                    }
                )
                + "\n"
            )
            written += 1
    logger.info("extracted %d templates, dropped %d", written, len(dropped))
    click.echo(json.dumps({"templates": written, "dropped": dropped}))
    sys.exit(EXIT_PARTIAL if dropped else EXIT_OK)


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--patterns", "patterns_path", type=click.Path(exists=True), default=None)
@click.pass_context
def rationale(ctx, in_path, out_path, patterns_path):
    """Build gold structured rationales (links empty) for a dataset."""
    from retrokit.chem import bind_atom_maps, parse_rxn
    from retrokit.perception import load_pattern_table
    from retrokit.rationale import build_rationale, to_dict

    _ctx_config(ctx)
    table = load_pattern_table(patterns_path)
    records = load_records(in_path)
    dropped = []
    written = 0
    with open(out_path, "w", encoding="utf-8") as handle:
        for record in records:
            try:
                mapped = bind_atom_maps(parse_rxn(record.rxn, id=record.id))
                gold = build_rationale(mapped, table)
            except Exception as exc:
                dropped.append({"id": record.id, "reason": type(exc).__name__})
                continue
            handle.write(
                json.dumps({"id": record.id, "rxn": record.rxn, **to_dict(gold)})
                + "\n"
            )
            written += 1
    logger.info("built %d rationales, dropped %d", written, len(dropped))
    click.echo(json.dumps({"rationales": written, "dropped": dropped}))
    sys.exit(EXIT_PARTIAL if dropped else EXIT_OK)


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--offline", is_flag=True, default=None, help="use the deterministic filler")
@click.option("--endpoint", default=None, help="chat-completion endpoint URL")
@click.option("--resume", is_flag=True, help="skip variants already in the progress file")
@click.option("--n", "variants", type=int, default=None, help="variants per instance")
@click.pass_context
def generate(ctx, in_path, out_path, offline, endpoint, resume, variants):
    """Generate linked rationale variants with the async pipeline."""
    from retrokit.generation import (
        GenConfig,
        HttpChatGenerator,
        JsonlVariantSink,
        run_pipeline,
    )
    from retrokit.rationale import DeterministicFiller

    config = _ctx_config(ctx, offline=offline, endpoint=endpoint,
                         variants_per_instance=variants)
    gen_config = GenConfig(
        temperature=config.get("temperature", 0.8),
        max_tokens=config.get("max_tokens", 500),
        presence_penalty=config.get("presence_penalty", 0.0),
        frequency_penalty=config.get("frequency_penalty", 0.3),
        variants_per_instance=config.get("variants_per_instance") or 15,
        queue_capacity=config.get("queue_capacity", 5000),
        consumers=config.get("consumers", 8),
        per_consumer_concurrency=config.get("per_consumer_concurrency", 4),
        model=config.get("model", "local"),
    )
    seed = config.get("seed", 0)
    if config.get("offline") or not config.get("endpoint"):
        generator = DeterministicFiller(base_seed=seed)
    else:
        generator = HttpChatGenerator(
            config["endpoint"], api_key=config.get("api_key")
        )

    records = [
        {"id": r.id, "rxn": r.rxn} for r in load_records(in_path)
    ]
    progress_path = out_path + ".progress"
    sink = JsonlVariantSink(progress_path, resume=resume)
    report = run_pipeline(records, gen_config, generator, sink, seed=seed)
    sink.close()
    _compact_variants(records, progress_path, out_path)
    payload = {
        **_provenance(config, {"in": in_path}),
        "report": report.as_dict(),
    }
    click.echo(json.dumps(payload["report"]))
    failed = report.dropped_mapping_failure or report.dropped_truncation or report.dropped_error
    sys.exit(EXIT_PARTIAL if failed else EXIT_OK)


def _compact_variants(records, progress_path, out_path):
    """Fold per-variant progress lines into one record-level line each."""
    from retrokit.chem import bind_atom_maps, parse_rxn
    from retrokit.perception import load_pattern_table
    from retrokit.rationale import build_rationale, to_dict

    links_by_record = defaultdict(dict)
    with open(progress_path, encoding="utf-8") as handle:
        for line in handle:
            row = json.loads(line)
            links_by_record[row["id"]][row["variant"]] = row["links"]
    table = load_pattern_table()
    with open(out_path, "w", encoding="utf-8") as handle:
        for record in records:
            variants = links_by_record.get(record["id"])
            if not variants:
                continue
            mapped = bind_atom_maps(parse_rxn(record["rxn"], id=record["id"]))
            gold = to_dict(build_rationale(mapped, table))
            gold.pop("links", None)
            row = {
                "id": record["id"],
                "rxn": record["rxn"],
                **gold,
                "links": [variants[v] for v in sorted(variants)],
            }
            handle.write(json.dumps(row) + "\n")


def _build_oracle(config: RunConfig, corpus_path: str | None):
    from retrokit.dataset import desk_corpus_lines
    from retrokit.rlvr import HttpForwardModel, TemplateForwardModel, templates_from_corpus

    if config.get("oracle") == "service":
        endpoint = config.get("endpoint")
        if not endpoint:
            raise click.ClickException("--oracle service needs an endpoint")
        return HttpForwardModel(endpoint, api_key=config.get("api_key"))
    if corpus_path:
        lines = [r.rxn for r in load_records(corpus_path)]
    else:
        lines = desk_corpus_lines()
    return TemplateForwardModel(templates_from_corpus(lines))


@main.command("eval")
@click.option("--samples", "samples_path", required=True, type=click.Path(exists=True))
@click.option("--oracle", type=click.Choice(["template", "service"]), default=None)
@click.option("--k", type=int, default=None)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), default=None,
              help="dataset JSONL for the template oracle (default: bundled corpus)")
@click.option("--cache", "cache_path", type=click.Path(), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--csv", "csv_path", type=click.Path(), default=None)
@click.pass_context
def eval_cmd(ctx, samples_path, oracle, k, corpus_path, cache_path, out_path, csv_path):
    """Compute all metrics over a samples JSONL file."""
    from retrokit.metrics import SampleSet, compute_metrics
    from retrokit.rlvr import VerifierCache

    config = _ctx_config(ctx, oracle=oracle, k=k)
    fwd = _build_oracle(config, corpus_path)
    cache = VerifierCache(cache_path)
    with open(samples_path, encoding="utf-8") as handle:
        samples = [SampleSet.from_json(line) for line in handle if line.strip()]
    report = compute_metrics(
        samples, fwd, cache, k=config.get("k"), workers=config.get("workers", 1)
    )
    payload = {
        **_provenance(config, {"samples": samples_path, "corpus": corpus_path}),
        "metrics": report.as_dict(),
    }
    if config.get("oracle") != "service" and not corpus_path:
        import hashlib
        from importlib import resources

        bundled = (
            resources.files("retrokit.data").joinpath("desk_corpus.rxn").read_bytes()
        )
        payload["input_hashes"]["corpus"] = hashlib.sha256(bundled).hexdigest()
    if out_path:
        Path(out_path).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    if csv_path:
        import csv as csvmod

        with open(csv_path, "w", newline="", encoding="utf-8") as handle:
            writer = csvmod.writer(handle)
            writer.writerow(
                ["id", "exact_at_1", "roundtrip_at_1", "exact_at_k",
                 "roundtrip_at_k", "feasible_fraction", "template_count",
                 "invalid_fraction"]
            )
            for row in report.per_instance:
                writer.writerow(
                    [row.id, row.exact_at_1, row.roundtrip_at_1, row.exact_at_k,
                     row.roundtrip_at_k, row.feasible_fraction,
                     row.template_count, row.invalid_fraction]
                )
    click.echo(json.dumps(report.as_dict()))


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), default=None)
@click.option("--pool", "pool_path", type=click.Path(exists=True), default=None,
              help="dataset JSONL to draw hard instances from (default: corpus)")
@click.option("--size", type=int, default=100)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--histograms", "hist_dir", type=click.Path(), default=None)
@click.pass_context
def hardset(ctx, corpus_path, pool_path, size, out_path, hist_dir):
    """Build rare-template and rare-token hard sets (plus histograms)."""
    from retrokit.chem import bind_atom_maps, parse_rxn
    from retrokit.dataset import desk_corpus_lines, ingest_lines
    from retrokit.rarity import build_hardsets, emit_histograms
    from retrokit.retro import extract_template

    config = _ctx_config(ctx)
    if corpus_path:
        corpus = load_records(corpus_path)
    else:
        corpus, _ = ingest_lines(desk_corpus_lines())
    pool = load_records(pool_path) if pool_path else corpus

    def template_of(record):
        try:
            mapped = bind_atom_maps(parse_rxn(record.rxn, id=record.id))
            return extract_template(mapped).canonical_form
        except Exception:
            return None

    corpus_templates = [t for t in (template_of(r) for r in corpus) if t]
    frequencies: dict[str, int] = {}
    for t in corpus_templates:
        frequencies[t] = frequencies.get(t, 0) + 1
    pool_templates = [
        (r.id, t) for r, t in ((r, template_of(r)) for r in pool) if t
    ]
    pool_products = [(r.id, r.canonical_product) for r in pool]

    try:
        sets = build_hardsets(
            frequencies, pool_templates, pool_products,
            size=size, seed=config.get("seed", 0),
        )
    except Exception as exc:
        raise click.ClickException(str(exc))
    payload = {
        **_provenance(config, {"corpus": corpus_path, "pool": pool_path}),
        "rare_template_ids": list(sets.rare_template_ids),
        "rare_token_ids": list(sets.rare_token_ids),
    }
    Path(out_path).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    if hist_dir:
        emit_histograms(
            corpus_templates,
            [r.canonical_product for r in corpus],
            hist_dir,
        )
    click.echo(json.dumps({
        "rare_template": len(sets.rare_template_ids),
        "rare_token": len(sets.rare_token_ids),
    }))


@main.command()
@click.option("--samples", "samples_path", required=True, type=click.Path(exists=True))
@click.option("--oracle", type=click.Choice(["template", "service"]), default=None)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), default=None)
@click.option("--cache", "cache_path", type=click.Path(), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
def reward(ctx, samples_path, oracle, corpus_path, cache_path, out_path):
    """Per-instance exact and round-trip rewards for greedy predictions."""
    from retrokit.metrics import SampleSet
    from retrokit.rlvr import VerifierCache, exact_reward, roundtrip_reward

    config = _ctx_config(ctx, oracle=oracle)
    fwd = _build_oracle(config, corpus_path)
    cache = VerifierCache(cache_path)
    with open(samples_path, encoding="utf-8") as handle:
        samples = [SampleSet.from_json(line) for line in handle if line.strip()]
    with open(out_path, "w", encoding="utf-8") as handle:
        for sample in samples:
            handle.write(
                json.dumps(
                    {
                        "id": sample.id,
                        "exact": exact_reward(sample.label_reactants, sample.greedy),
                        "roundtrip": roundtrip_reward(
                            sample.product, sample.greedy, fwd, cache
                        ),
                    }
                )
                + "\n"
            )
    click.echo(json.dumps({"instances": len(samples)}))


if __name__ == "__main__":
    main()
