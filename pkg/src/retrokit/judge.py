"""Order-swapped pairwise judging of reasoning texts.

Every pair is judged twice, once with the presentation order swapped;
the outcome counts only when the un-swapped verdicts agree.  Transport
errors discard the pair into a separate tally.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources

VERDICTS = ("A", "B", "tie")


@dataclass(frozen=True)
class JudgePair:
    """One comparison item; verdicts are filled in by judge_winrate."""

    id: str
    model_a: str
    model_b: str
    reasoning_a: str
    reasoning_b: str
    verdict_forward: str | None = None
    verdict_swapped: str | None = None

    @property
    def accepted(self) -> bool:
        if self.verdict_forward is None or self.verdict_swapped is None:
            return False
        return self.verdict_forward == _unswap(self.verdict_swapped)


@dataclass(frozen=True)
class WinRate:
    model_a: str
    model_b: str
    wins_a: int = 0
    wins_b: int = 0
    ties: int = 0
    discarded_disagreement: int = 0
    discarded_error: int = 0

    @property
    def judged(self) -> int:
        return self.wins_a + self.wins_b + self.ties


def _unswap(verdict: str) -> str:
    if verdict == "A":
        return "B"
    if verdict == "B":
        return "A"
    return verdict


def load_judge_prompt(path: str | None = None) -> str:
    """The judge instruction text; editable config, bundled default."""
    if path is None:
        return (
            resources.files("retrokit.data")
            .joinpath("judge_prompt.txt")
            .read_text(encoding="utf-8")
        )
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def judge_winrate(
    pairs: list[JudgePair], judge, prompt: str | None = None
) -> tuple[dict[tuple[str, str], WinRate], list[JudgePair]]:
    """Tally order-consistent verdicts per model pair.

    ``judge`` is called as judge(prompt, reasoning_a, reasoning_b) and
    returns "A", "B" or "tie"; anything it raises discards the pair as a
    transport error.  Returns the per-pair tallies and the judged pairs
    with both verdicts recorded.
    """
    prompt = prompt if prompt is not None else load_judge_prompt()
    tallies: dict[tuple[str, str], WinRate] = {}
    judged: list[JudgePair] = []
    for pair in pairs:
        key = (pair.model_a, pair.model_b)
        tally = tallies.setdefault(key, WinRate(model_a=key[0], model_b=key[1]))
        try:
            forward = judge(prompt, pair.reasoning_a, pair.reasoning_b)
            swapped = judge(prompt, pair.reasoning_b, pair.reasoning_a)
        except Exception:
            tallies[key] = replace(
                tally, discarded_error=tally.discarded_error + 1
            )
            judged.append(pair)
            continue
        if forward not in VERDICTS or swapped not in VERDICTS:
            tallies[key] = replace(
                tally, discarded_error=tally.discarded_error + 1
            )
            judged.append(pair)
            continue
        done = replace(pair, verdict_forward=forward, verdict_swapped=swapped)
        judged.append(done)
        if not done.accepted:
            tallies[key] = replace(
                tally, discarded_disagreement=tally.discarded_disagreement + 1
            )
            continue
        if forward == "A":
            tallies[key] = replace(tally, wins_a=tally.wins_a + 1)
        elif forward == "B":
            tallies[key] = replace(tally, wins_b=tally.wins_b + 1)
        else:
            tallies[key] = replace(tally, ties=tally.ties + 1)
    return tallies, judged
