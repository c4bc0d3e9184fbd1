"""List-decodable building blocks consumed by the reductions and boosting.

Two block schemes are provided.  The RS exchange scheme is concrete: each
party encodes its preferred-edge table for a protocol slice and unique
decoding of the other table reproduces the slice's path, tolerating block
error rate 1/4 - eps with list size 1.  The oracle scheme realizes the
black-box hypothesis of the reductions for arbitrary (rate, list size):
the engine measures a block's true error fraction and the contract is
enforced directly, with non-truth list entries under adversary-controlled
garbage policies.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import ecc
from .tree import Path, ProtocolInstance, is_alice_level


@dataclass(frozen=True)
class ListDecodeGuarantee:
    """Balanced list decoder contract for one block."""

    tolerable_rate: Fraction
    list_size: int
    failure_prob: float
    block_rounds: int
    alphabet_size: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.tolerable_rate < Fraction(1, 2):
            raise ValueError("tolerable rate must be in (0, 1/2)")
        if self.list_size < 1:
            raise ValueError("list size must be >= 1")
        if self.block_rounds % 2 != 0:
            raise ValueError("balanced scheme needs an even round count")


@dataclass(frozen=True)
class Candidate:
    """Root-anchored path segment: ``path`` runs from the root and the
    final ``path.length - anchor_len`` edges are the block's new part."""

    anchor_len: int
    path: Path

    def __post_init__(self):
        if not 0 <= self.anchor_len <= self.path.length:
            raise ValueError("anchor length outside the path")

    @property
    def block(self) -> Path:
        return Path(self.path.length - self.anchor_len,
                    self.path.bits & ((1 << (self.path.length - self.anchor_len)) - 1))


@dataclass
class BlockOutcome:
    candidates_a: list[Candidate]
    candidates_b: list[Candidate]
    guarantee_held: bool
    measured_rate: Fraction


class GarbagePolicy:
    """Adversary-controlled content of non-truth list entries."""

    def bind(self, instance: ProtocolInstance) -> None:
        self.instance = instance

    def candidate(self, party: str, truth: Candidate,
                  recipient, rng: np.random.Generator) -> Optional[Candidate]:
        """One garbage candidate, or None to pad with a truth duplicate."""
        return None


class TruthDuplicatePolicy(GarbagePolicy):
    """Always pads with duplicates of the truth."""


class RandomPathsPolicy(GarbagePolicy):
    """Random plausible candidates: a random path over the truth's span.

    Almost never survives the recipients' own-edge filter, so edge sets
    stay truth-dominated; this is the default policy.
    """

    def candidate(self, party, truth, recipient, rng):
        length = truth.path.length
        if length == 0:
            return None
        span = length - truth.anchor_len
        bits = 0
        if span:
            bits = int.from_bytes(rng.bytes((span + 7) // 8), "big") & ((1 << span) - 1)
        head = truth.path.prefix(truth.anchor_len)
        return Candidate(truth.anchor_len,
                         Path(length, (head.bits << span) | bits))


class TargetedWrongPolicy(GarbagePolicy):
    """Candidates built to pass the recipient's filter: the recipient's
    own levels follow its preferred edges, the other party's levels are
    anti-preferred, so the block is accepted yet off the common path."""

    def candidate(self, party, truth, recipient, rng):
        mine = is_alice_level if party == "A" else (lambda v: not is_alice_level(v))
        path = truth.path.prefix(truth.anchor_len)
        node = path.node()
        for _ in range(truth.path.length - truth.anchor_len):
            bit = self.instance.preferred_bit(node)
            if not mine(node):
                bit ^= 1
            path = path.extend(bit)
            node = (node << 1) | bit
        return Candidate(truth.anchor_len, path)


def garbage_policy(kind: str) -> GarbagePolicy:
    policies = {
        "random": RandomPathsPolicy,
        "targeted": TargetedWrongPolicy,
        "truth": TruthDuplicatePolicy,
    }
    if kind not in policies:
        raise ValueError(f"unknown garbage policy {kind!r}")
    return policies[kind]()


class OracleScheme:
    """Guarantee-faithful realization of a balanced (rate, s, p) list
    decoder: whenever a block's measured error fraction is within the
    tolerable rate, both parties' lists contain the true transcript
    (except with probability failure_prob); everything else is garbage.
    """

    kind = "oracle"

    def __init__(self, guarantee: ListDecodeGuarantee,
                 policy: Optional[GarbagePolicy] = None):
        self.guarantee = guarantee
        self.policy = policy or RandomPathsPolicy()

    def bind(self, instance: ProtocolInstance) -> None:
        self.policy.bind(instance)

    def outcomes(self, truth: Candidate, corrupted_rounds: int,
                 rng: np.random.Generator,
                 recipients: tuple = (None, None)) -> BlockOutcome:
        g = self.guarantee
        rate = Fraction(corrupted_rounds, g.block_rounds)
        held = rate <= g.tolerable_rate
        if held and g.failure_prob > 0 and rng.random() < g.failure_prob:
            held = False
        lists = []
        for party, recipient in zip("AB", recipients):
            n_garbage = g.list_size - 1 if held else g.list_size
            entries = [truth] if held else []
            for _ in range(n_garbage):
                cand = self.policy.candidate(party, truth, recipient, rng)
                entries.append(cand if cand is not None else truth)
            for cand in entries:
                if cand.path.length > self.policy.instance.depth:
                    raise AssertionError("policy emitted an invalid candidate")
            lists.append(entries)
        return BlockOutcome(lists[0], lists[1], held, rate)


def slice_table_bits(instance: ProtocolInstance, party: str,
                     anchor: Path, depth: int) -> str:
    """Party's preferred bits for its levels of the slice below anchor,
    nodes in (level, offset) order."""
    mine = is_alice_level if party == "A" else (lambda v: not is_alice_level(v))
    base = anchor.node()
    bits = []
    for j in range(depth):
        width = 1 << j
        first = base << j
        if mine(first):
            bits.extend(str(instance.preferred_bit(first + off))
                        for off in range(width))
    return "".join(bits)


def slice_path(instance: ProtocolInstance, anchor: Path, depth: int,
               table_a: Optional[str] = None,
               table_b: Optional[str] = None) -> Path:
    """Walk the slice below anchor following preferred edges, taking
    missing levels from the supplied table bits (offset-indexed)."""
    base = anchor.node()
    path = anchor
    node = base
    for j in range(depth):
        if table_a is not None and is_alice_level(node):
            bit = int(_table_lookup(table_a, instance, "A", base, node, j))
        elif table_b is not None and not is_alice_level(node):
            bit = int(_table_lookup(table_b, instance, "B", base, node, j))
        else:
            bit = instance.preferred_bit(node)
        path = path.extend(bit)
        node = (node << 1) | bit
    return path


def _table_lookup(table: str, instance, party: str, base: int,
                  node: int, j: int) -> str:
    """Index of `node` inside the party's slice table built by
    slice_table_bits: levels owned by the party, offsets within level."""
    mine = is_alice_level if party == "A" else (lambda v: not is_alice_level(v))
    idx = 0
    for lvl in range(j):
        first = base << lvl
        if mine(first):
            idx += 1 << lvl
    idx += node - (base << j)
    return table[idx]


class RsExchangeScheme:
    """Concrete balanced scheme: each party RS-encodes its slice table
    with relative distance 1 - eps and sends it over its half of the
    block; unique decoding both ways yields the slice path as a singleton
    list.  Correct whenever the block error rate is at most 1/4 - eps.
    """

    kind = "rs-exchange"
    MAX_SLICE = 16

    def __init__(self, instance: ProtocolInstance, anchor: Path, depth: int,
                 eps_inv: int, block_rounds: int):
        if depth > self.MAX_SLICE:
            raise ValueError(f"slice depth {depth} exceeds {self.MAX_SLICE}")
        if block_rounds % 2:
            raise ValueError("block rounds must be even")
        self.instance = instance
        self.anchor = anchor
        self.depth = depth
        self.eps_inv = eps_inv
        n_c = block_rounds // 2
        table_bits = max(
            len(slice_table_bits(instance, p, anchor, depth)) for p in "AB")
        self.code = ecc.code_for_payload(max(table_bits, 1), eps_inv, n_c=n_c)
        self.table_len = {p: len(slice_table_bits(instance, p, anchor, depth))
                          for p in "AB"}
        self.guarantee = ListDecodeGuarantee(
            tolerable_rate=Fraction(1, 4) - Fraction(1, eps_inv),
            list_size=1, failure_prob=0.0, block_rounds=block_rounds,
            alphabet_size=self.code.q)

    def word(self, party: str) -> tuple[int, ...]:
        bits = slice_table_bits(self.instance, party, self.anchor, self.depth)
        return ecc.rs_encode(self.code.pack(bits), self.code)

    def decode_candidates(self, party: str, received: Sequence[int]) -> list[Candidate]:
        """Candidates for `party` from the word it heard (the other
        party's table).  Decode failure yields an empty list."""
        other = "B" if party == "A" else "A"
        try:
            msg = ecc.rs_unique_decode(list(received), self.code)
        except ecc.DecodeFailure:
            return []
        bits = self.code.unpack(msg, self.table_len[other])
        kw = {"table_a": bits} if other == "A" else {"table_b": bits}
        path = slice_path(self.instance, self.anchor, self.depth, **kw)
        return [Candidate(self.anchor.length, path)]
