"""Asynchronous producer-consumer pipeline for linking-text generation.

One producer builds gold rationales from mapped reactions and enqueues
one task per variant onto a bounded queue (blocking when full).  Each of
N consumers multiplexes up to ``per_consumer_concurrency`` in-flight
variants, guarded by a semaphore; within a variant the three link slots
run strictly in order because each prompt embeds the earlier links.
Records whose rationale cannot be built are dropped as mapping failures;
truncated generations drop the variant; transport errors are retried
once, then drop the variant.
"""

from __future__ import annotations

import asyncio
import json
import os
import time
from dataclasses import dataclass, replace

import httpx

from retrokit.errors import GenerationError
from retrokit.patterns import PatternDef
from retrokit.rationale import (
    GenResult,
    Links,
    Rationale,
    build_link_prompt,
    build_rationale,
    _stable_seed,
)


@dataclass(frozen=True)
class GenConfig:
    """Generation settings; defaults follow the published run configuration."""

    temperature: float = 0.8
    max_tokens: int = 500
    presence_penalty: float = 0.0
    frequency_penalty: float = 0.3
    variants_per_instance: int = 15
    queue_capacity: int = 5000
    consumers: int = 8
    per_consumer_concurrency: int = 4
    model: str = "local"

    def __post_init__(self) -> None:
        if self.queue_capacity <= 0:
            raise ValueError("queue_capacity must be positive")
        if self.per_consumer_concurrency < 1:
            raise ValueError("per_consumer_concurrency must be >= 1")


@dataclass
class PromptTask:
    """One linking-text request; slot tasks are created in slot order."""

    record_id: str
    variant: int
    slot: str
    prompt: str
    attempt: int = 0


@dataclass
class GenReport:
    """Pipeline accounting.

    ``produced`` counts enqueued variant tasks and satisfies
    produced == completed + dropped_truncation + dropped_error once the
    queue drains; ``dropped_mapping_failure`` counts whole records that
    never produced variants.
    """

    produced: int = 0
    completed: int = 0
    dropped_mapping_failure: int = 0
    dropped_truncation: int = 0
    dropped_error: int = 0
    elapsed_s: float = 0.0
    throughput: float = 0.0
    max_queue_depth: int = 0
    max_in_flight: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class _VariantWork:
    record_id: str
    variant: int
    rationale: Rationale
    task: PromptTask


class JsonlVariantSink:
    """Append-only variant sink with per-write flush and resume support.

    Each completed variant appends one JSON line
    ``{id, variant, links:{l12,l23,l34}}``; ``completed_keys`` holds the
    (id, variant) pairs already on disk so a rerun can skip them.
    """

    def __init__(self, path: str, resume: bool = False):
        self.path = path
        self.completed_keys: set[tuple[str, int]] = set()
        if resume and os.path.exists(path):
            with open(path, encoding="utf-8") as handle:
                for line in handle:
                    try:
                        row = json.loads(line)
                        self.completed_keys.add((row["id"], row["variant"]))
                    except (json.JSONDecodeError, KeyError):
                        continue
        mode = "a" if resume else "w"
        self._handle = open(path, mode, encoding="utf-8")

    def write_slot(self, record_id: str, variant: int, slot: str, text: str) -> None:
        """Per-slot hook; the JSONL sink persists only whole variants."""

    def write_variant(self, record_id: str, variant: int, links: Links) -> None:
        row = {
            "id": record_id,
            "variant": variant,
            "links": {"l12": links.l12, "l23": links.l23, "l34": links.l34},
        }
        self._handle.write(json.dumps(row) + "\n")
        self._handle.flush()
        self.completed_keys.add((record_id, variant))

    def close(self) -> None:
        self._handle.close()


class HttpChatGenerator:
    """JSON-over-HTTP chat-completion client for an external service."""

    def __init__(self, endpoint: str, api_key: str | None = None, timeout: float = 60.0):
        self.endpoint = endpoint
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(timeout=timeout, headers=headers)

    def generate(self, prompt: str, config: GenConfig | None = None, seed=None) -> GenResult:
        config = config or GenConfig()
        payload = {
            "model": config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": config.temperature,
            "max_tokens": config.max_tokens,
            "presence_penalty": config.presence_penalty,
            "frequency_penalty": config.frequency_penalty,
        }
        try:
            response = self._client.post(self.endpoint, json=payload)
            response.raise_for_status()
            body = response.json()
            choice = body["choices"][0]
            return GenResult(
                text=choice["message"]["content"],
                finish_reason=choice.get("finish_reason", "stop"),
            )
        except (httpx.HTTPError, KeyError, IndexError, ValueError):
            return GenResult(text="", finish_reason="error")


async def _run_async(records, config, generator, sink, patterns, seed) -> GenReport:
    report = GenReport()
    queue: asyncio.Queue[_VariantWork | None] = asyncio.Queue(
        maxsize=config.queue_capacity
    )
    in_flight = 0
    counters_lock = asyncio.Lock()
    sink_lock = asyncio.Lock()
    started = time.monotonic()
    skip = getattr(sink, "completed_keys", set())

    async def producer() -> None:
        loop = asyncio.get_running_loop()
        for record in records:
            record_id = record["id"]
            try:
                rationale = await loop.run_in_executor(
                    None, _build_gold, record, patterns
                )
            except Exception:
                report.dropped_mapping_failure += 1
                continue
            for variant in range(config.variants_per_instance):
                if (record_id, variant) in skip:
                    continue
                task = PromptTask(
                    record_id=record_id,
                    variant=variant,
                    slot="l12",
                    prompt=build_link_prompt(rationale, "l12"),
                )
                await queue.put(
                    _VariantWork(record_id, variant, rationale, task)
                )
                report.produced += 1
                report.max_queue_depth = max(report.max_queue_depth, queue.qsize())
        for _ in range(config.consumers):
            await queue.put(None)

    async def call_generator(task: PromptTask) -> GenResult:
        nonlocal in_flight
        async with counters_lock:
            in_flight += 1
            report.max_in_flight = max(report.max_in_flight, in_flight)
        try:
            return await asyncio.to_thread(
                generator.generate,
                task.prompt,
                config,
                seed=_stable_seed(seed, task.record_id, task.variant, task.slot),
            )
        except Exception:
            return GenResult(text="", finish_reason="error")
        finally:
            async with counters_lock:
                in_flight -= 1

    async def process_variant(work: _VariantWork) -> None:
        current = replace(work.rationale, links=Links())
        filled: dict[str, str] = {}
        task = work.task
        for slot in ("l12", "l23", "l34"):
            if task.slot != slot:
                task = PromptTask(
                    record_id=work.record_id,
                    variant=work.variant,
                    slot=slot,
                    prompt=build_link_prompt(current, slot),
                )
            result = await call_generator(task)
            if result.finish_reason == "error" and task.attempt == 0:
                task.attempt += 1
                result = await call_generator(task)
            if result.finish_reason == "length":
                report.dropped_truncation += 1
                return
            if result.finish_reason != "stop":
                report.dropped_error += 1
                return
            filled[slot] = result.text.strip()
            current = replace(current, links=Links(**filled))
            async with sink_lock:
                sink.write_slot(work.record_id, work.variant, slot, filled[slot])
        async with sink_lock:
            sink.write_variant(work.record_id, work.variant, current.links)
        report.completed += 1

    async def consumer() -> None:
        sem = asyncio.Semaphore(config.per_consumer_concurrency)
        pending: set[asyncio.Task] = set()

        async def guarded(work: _VariantWork) -> None:
            try:
                await process_variant(work)
            finally:
                sem.release()

        while True:
            work = await queue.get()
            if work is None:
                queue.task_done()
                break
            await sem.acquire()
            job = asyncio.create_task(guarded(work))
            pending.add(job)
            job.add_done_callback(pending.discard)
            queue.task_done()
        if pending:
            await asyncio.gather(*pending)

    consumers = [asyncio.create_task(consumer()) for _ in range(config.consumers)]
    await producer()
    await asyncio.gather(*consumers)
    assert queue.qsize() == 0, "queue not drained"
    assert in_flight == 0, "requests still in flight"

    report.elapsed_s = time.monotonic() - started
    report.throughput = report.completed / report.elapsed_s if report.elapsed_s else 0.0
    return report


def _build_gold(record: dict, patterns: list[PatternDef]) -> Rationale:
    if "rationale" in record:
        rationale = record["rationale"]
        if rationale is None:
            raise GenerationError("record carries no rationale")
        return rationale
    from retrokit.chem import bind_atom_maps, parse_rxn

    mapped = bind_atom_maps(parse_rxn(record["rxn"], id=record["id"]))
    return build_rationale(mapped, patterns)


def run_pipeline(
    records,
    config: GenConfig,
    generator,
    sink,
    patterns: list[PatternDef] | None = None,
    seed: int = 0,
) -> GenReport:
    """Run the generation pipeline to completion and return its report.

    ``records`` are dicts with ``id`` and either a mapped ``rxn`` string
    or a prebuilt ``rationale``.  The generator exposes
    ``generate(prompt, config, seed=...) -> GenResult``; the sink gets a
    ``write_slot`` call per link in slot order and one ``write_variant``
    per completed variant.
    """
    if patterns is None:
        from retrokit.perception import load_pattern_table

        patterns = load_pattern_table()
    return asyncio.run(
        _run_async(records, config, generator, sink, patterns, seed)
    )
