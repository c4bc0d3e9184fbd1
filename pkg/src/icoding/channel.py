"""Round-accurate adversarial channel engine.

One execution owns all of its state: two party programs produce one
action per round, the adversary may substitute delivered symbols while a
budget of floor(rate * rounds) errors lasts, and the trace records what
happened.  Adaptive rounds follow the standard semantics: if both
parties transmit nothing is delivered, and if both listen the adversary
chooses both delivered symbols without being charged.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class Send:
    symbol: Any


class _Listen:
    __slots__ = ()

    def __repr__(self):
        return "Listen"


LISTEN = _Listen()
RoundAction = Any  # Send(symbol) or LISTEN


class ScheduleViolation(RuntimeError):
    """A party deviated from the fixed turn order in non-adaptive mode."""


class BudgetViolation(AssertionError):
    """Engine-internal accounting exceeded the error budget."""


class StrategyBudgetError(ValueError):
    """Scripted corruption list provably exceeds the error budget."""


class ErrorBudget:
    """Error budget floor(rate * total_rounds), engine enforced."""

    def __init__(self, total_rounds: int, rate: Fraction | float):
        self.total_rounds = total_rounds
        self.rate = Fraction(rate).limit_denominator(10**9) if isinstance(rate, float) else Fraction(rate)
        self.max_errors = int(self.rate * total_rounds)
        self.spent = 0
        self.attempted_overspend = 0

    @property
    def remaining(self) -> int:
        return self.max_errors - self.spent

    def try_spend(self) -> bool:
        if self.spent >= self.max_errors:
            self.attempted_overspend += 1
            return False
        self.spent += 1
        if self.spent > self.max_errors:
            raise BudgetViolation("spent exceeded floor(rate * rounds)")
        return True


@dataclass
class RoundRecord:
    round: int
    actor_a: str  # "send" | "listen"
    actor_b: str
    sent_a: Any
    sent_b: Any
    delivered_a: Any
    delivered_b: Any
    corrupted: bool


class ExecutionTrace:
    """Per-round records (optional) plus always-on aggregates."""

    def __init__(self, keep_rounds: bool = True, block_rounds: Optional[int] = None):
        self.keep_rounds = keep_rounds
        self.block_rounds = block_rounds
        self.records: list[RoundRecord] = []
        self.spent = 0
        self.block_corruptions: dict[int, int] = {}
        self.sent_log: list[tuple[int, Any]] = []  # what the adversary may observe

    def record(self, rec: RoundRecord) -> None:
        if rec.corrupted:
            self.spent += 1
            if self.block_rounds:
                b = rec.round // self.block_rounds
                self.block_corruptions[b] = self.block_corruptions.get(b, 0) + 1
        if self.keep_rounds:
            self.records.append(rec)

    def corruptions_in(self, block: int) -> int:
        return self.block_corruptions.get(block, 0)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out)
        w.writerow(["round", "actor_A", "actor_B", "sent",
                    "delivered_A", "delivered_B", "corrupted"])
        for r in self.records:
            sent = r.sent_a if r.sent_a is not None else r.sent_b
            if r.sent_a is not None and r.sent_b is not None:
                sent = f"{r.sent_a}|{r.sent_b}"
            w.writerow([r.round, r.actor_a, r.actor_b, _sym(sent),
                        _sym(r.delivered_a), _sym(r.delivered_b), int(r.corrupted)])
        return out.getvalue()


def _sym(s: Any) -> str:
    if isinstance(s, tuple):
        return ":".join(str(x) for x in s)
    return "" if s is None else str(s)


@dataclass
class RunContext:
    """Public run structure the adversary is allowed to observe."""

    total_rounds: int
    block_rounds: Optional[int] = None
    scheme: Optional[dict] = None  # scheme-published constants (codes, paths)
    corruptor: Optional[Callable[[np.random.Generator, int, Any], Any]] = None

    def corrupt_symbol(self, rng: np.random.Generator, r: int, symbol: Any) -> Any:
        if self.corruptor is not None:
            return self.corruptor(rng, r, symbol)
        return ("garbage", int(rng.integers(1 << 62)))


class AdversaryStrategy:
    """Decision procedure over public channel state; never sees private
    randomness.  Subclasses plan round-level substitutions; the engine
    clamps anything over budget."""

    kind = "null"

    def reset(self, ctx: RunContext, rng: np.random.Generator,
              budget: ErrorBudget) -> None:
        self.ctx = ctx
        self.rng = rng

    def decide(self, r: int, sender: str, symbol: Any,
               trace: ExecutionTrace, budget: ErrorBudget) -> Any:
        """Replacement symbol to deliver instead, or None to pass through."""
        return None

    def inject(self, r: int, trace: ExecutionTrace) -> tuple[Any, Any]:
        """Symbols delivered to (Alice, Bob) in a both-listen round."""
        return None, None


class _PlannedStrategy(AdversaryStrategy):
    """Corruption at a precomputed set of rounds."""

    def __init__(self):
        self.planned: set[int] = set()

    def decide(self, r, sender, symbol, trace, budget):
        if r in self.planned:
            return self.ctx.corrupt_symbol(self.rng, r, symbol)
        return None


class UniformStrategy(_PlannedStrategy):
    """I.i.d. per-round corruption at the given rate, clamped at budget."""

    kind = "uniform"

    def __init__(self, rate: float):
        super().__init__()
        self.rate = float(rate)

    def reset(self, ctx, rng, budget):
        super().reset(ctx, rng, budget)
        hits = np.nonzero(rng.random(ctx.total_rounds) < self.rate)[0]
        self.planned = set(int(x) for x in hits[:budget.max_errors])


class BurstStrategy(_PlannedStrategy):
    """One contiguous window of exactly the full budget."""

    kind = "burst"

    def __init__(self, start: Optional[int] = None):
        super().__init__()
        self.start = start

    def reset(self, ctx, rng, budget):
        super().reset(ctx, rng, budget)
        width = budget.max_errors
        hi = max(1, ctx.total_rounds - width + 1)
        start = self.start if self.start is not None else int(rng.integers(hi))
        self.planned = set(range(start, min(start + width, ctx.total_rounds)))


class BlockFrontStrategy(_PlannedStrategy):
    """Spend ceil(L/2)-1 corruptions per block, front to back, until the
    budget runs out (the fully-corrupted-early-blocks proof regime)."""

    kind = "block-front"

    def reset(self, ctx, rng, budget):
        super().reset(ctx, rng, budget)
        if not ctx.block_rounds:
            raise ValueError("block-front needs a block length")
        L = ctx.block_rounds
        per_block = max(1, (L + 1) // 2 - 1)
        remaining = budget.max_errors
        planned = set()
        base = 0
        while remaining > 0 and base < ctx.total_rounds:
            take = min(per_block, remaining, ctx.total_rounds - base)
            planned.update(range(base, base + take))
            remaining -= take
            base += L
        self.planned = planned


class ScriptedStrategy(AdversaryStrategy):
    """Replay an explicit corruption list of (round, replacement|None)."""

    kind = "scripted"

    def __init__(self, corruptions: Sequence[tuple[int, Any]] = (),
                 unchecked: bool = False):
        self.script = {int(r): rep for r, rep in corruptions}
        self.unchecked = unchecked

    def reset(self, ctx, rng, budget):
        super().reset(ctx, rng, budget)
        if not self.unchecked and len(self.script) > budget.max_errors:
            raise StrategyBudgetError(
                f"script has {len(self.script)} corruptions, budget is "
                f"{budget.max_errors}")

    def decide(self, r, sender, symbol, trace, budget):
        if r in self.script:
            rep = self.script[r]
            return rep if rep is not None else self.ctx.corrupt_symbol(self.rng, r, symbol)
        return None


class AntiMajorityStrategy(AdversaryStrategy):
    """Corrupt one listener's edge-set words toward a fixed wrong path.

    Needs scheme support published in the run context: which rounds the
    target hears and the wrong-path codeword symbol for each of them.
    Spends just enough per block to move the word inside the wrong
    codeword's decoding radius, front to back.
    """

    kind = "anti-majority"

    def __init__(self, target: str = "A"):
        self.target = target

    def reset(self, ctx, rng, budget):
        super().reset(ctx, rng, budget)
        support = (ctx.scheme or {}).get("antimajority")
        if support is None:
            raise ValueError("anti-majority needs scheme support in the run context")
        self.replacements = {}
        remaining = budget.max_errors
        # per block: positions needed to out-vote the true codeword
        for block_rounds in support.blocks(self.target):
            need = support.flips_needed
            for r, wrong_symbol in block_rounds[:need]:
                if remaining == 0:
                    return
                self.replacements[r] = wrong_symbol
                remaining -= 1

    def decide(self, r, sender, symbol, trace, budget):
        if r in self.replacements:
            inner = symbol[1] if isinstance(symbol, tuple) and len(symbol) == 2 else None
            return (self.replacements[r], inner)
        return None


def strategy(kind: str, **params) -> AdversaryStrategy:
    """Factory for the built-in strategies."""
    kinds = {
        "null": lambda: ScriptedStrategy(()),
        "uniform": lambda: UniformStrategy(params.pop("rate")),
        "burst": lambda: BurstStrategy(params.pop("start", None)),
        "blockfront": BlockFrontStrategy,
        "block-front": BlockFrontStrategy,
        "antimajority": lambda: AntiMajorityStrategy(params.pop("target", "A")),
        "anti-majority": lambda: AntiMajorityStrategy(params.pop("target", "A")),
        "scripted": lambda: ScriptedStrategy(params.pop("corruptions", ()),
                                             params.pop("unchecked", False)),
    }
    if kind not in kinds:
        raise ValueError(f"unknown strategy kind {kind!r}")
    strat = kinds[kind]()
    if params:
        raise ValueError(f"unused strategy params {sorted(params)}")
    return strat


class Engine:
    """Drives one execution; ``advance`` lets a runner interleave work at
    block boundaries (list-decoder outcomes, adaptive decisions)."""

    def __init__(self, alice, bob, schedule, budget: ErrorBudget,
                 adversary: AdversaryStrategy, seed: int,
                 run_ctx: Optional[RunContext] = None,
                 keep_rounds: bool = True):
        self.alice = alice
        self.bob = bob
        self.schedule = schedule
        self.budget = budget
        self.adversary = adversary
        self.ctx = run_ctx or RunContext(total_rounds=budget.total_rounds)
        rng = np.random.Generator(np.random.Philox(key=seed & (2**64 - 1)))
        adversary.reset(self.ctx, rng, budget)
        self.trace = ExecutionTrace(keep_rounds=keep_rounds,
                                    block_rounds=self.ctx.block_rounds)
        self.round = 0

    def advance(self, n_rounds: int) -> None:
        for _ in range(n_rounds):
            self._step()

    def run_all(self) -> ExecutionTrace:
        self.advance(self.budget.total_rounds - self.round)
        if self.trace.spent != self.budget.spent:
            raise BudgetViolation("trace corruption flags disagree with spend")
        return self.trace

    def _step(self) -> None:
        r = self.round
        if r >= self.budget.total_rounds:
            raise RuntimeError("execution already complete")
        act_a = self.alice.act(r)
        act_b = self.bob.act(r)
        a_sends = isinstance(act_a, Send)
        b_sends = isinstance(act_b, Send)
        if self.schedule is not None:
            expected = self.schedule(r)
            if (expected == "A") != a_sends or (expected == "B") != b_sends:
                raise ScheduleViolation(
                    f"round {r}: schedule says {expected}, actions "
                    f"A={'send' if a_sends else 'listen'} "
                    f"B={'send' if b_sends else 'listen'}")

        sent_a = act_a.symbol if a_sends else None
        sent_b = act_b.symbol if b_sends else None
        delivered_a = delivered_b = None
        corrupted = False

        if a_sends and not b_sends:
            delivered_b = sent_a
            replacement = self.adversary.decide(r, "A", sent_a, self.trace, self.budget)
            if replacement is not None and self.budget.try_spend():
                delivered_b = replacement
                corrupted = True
            self.bob.deliver(r, delivered_b)
        elif b_sends and not a_sends:
            delivered_a = sent_b
            replacement = self.adversary.decide(r, "B", sent_b, self.trace, self.budget)
            if replacement is not None and self.budget.try_spend():
                delivered_a = replacement
                corrupted = True
            self.alice.deliver(r, delivered_a)
        elif not a_sends and not b_sends:
            delivered_a, delivered_b = self.adversary.inject(r, self.trace)
            self.alice.deliver(r, delivered_a)
            self.bob.deliver(r, delivered_b)
        # both send: nothing is delivered and nothing is charged

        self.trace.sent_log.append((r, sent_a if sent_a is not None else sent_b))
        self.trace.record(RoundRecord(r, "send" if a_sends else "listen",
                                      "send" if b_sends else "listen",
                                      sent_a, sent_b, delivered_a, delivered_b,
                                      corrupted))
        self.round = r + 1


def execute(alice, bob, schedule, budget: ErrorBudget,
            adversary: AdversaryStrategy, seed: int,
            run_ctx: Optional[RunContext] = None,
            keep_rounds: bool = True) -> ExecutionTrace:
    """Run both party programs over the adversarial channel.

    ``schedule`` is a callable round -> "A"|"B" for non-adaptive mode, or
    None for adaptive mode.  Party programs expose ``act(round)`` and
    ``deliver(round, symbol)``.  Deterministic in all arguments.
    """
    return Engine(alice, bob, schedule, budget, adversary, seed,
                  run_ctx, keep_rounds).run_all()
