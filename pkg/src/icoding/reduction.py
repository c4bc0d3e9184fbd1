"""Unique decoding from list decoding: the block template and its four
instantiations.

Each run partitions its rounds into joint blocks (both parties alternate)
and, for the adaptive and one-sided variants, exclusive blocks (one party
transmits).  Per joint block the inner list decoder simulates the whole
protocol while both parties piggyback Reed-Solomon codewords of their
accumulated edge-sets; decoding assigns every heard block a confidence
c_i = 1 - 2*Delta/(N'/2) and the output rule is the majority path, the
non-empty path with the largest summed confidence.

Confidences are rationals with denominator N'/2, so all ledger arithmetic
is integer-exact on values scaled by N'/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import ecc
from .base_decoders import (BlockOutcome, Candidate, GarbagePolicy,
                            ListDecodeGuarantee, OracleScheme,
                            RsExchangeScheme, garbage_policy)
from .channel import (LISTEN, AdversaryStrategy, Engine, ErrorBudget,
                      RunContext, Send)
from .tree import (EMPTY_PATH, Path, ProtocolInstance, SubtreeEdgeSet,
                   common_path, is_alice_level, subtree_decode,
                   subtree_encode)

VARIANTS = ("nonadaptive14", "adaptive27", "onesided13", "listreduce")


@dataclass(frozen=True)
class ReductionConfig:
    """Template parameters for one variant at a given epsilon = 1/eps_inv."""

    variant: str
    eps_inv: int
    n: int
    s: int
    b1: int
    b2: int
    code: ecc.RsCode
    inner_rate: Fraction

    @classmethod
    def build(cls, variant: str, eps_inv: int, n: int, s: int = 3,
              n_c: Optional[int] = None) -> "ReductionConfig":
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        if eps_inv < 4:
            raise ValueError("eps must be at most 1/4")
        if n < 2 or n % 2:
            raise ValueError("n must be even and >= 2")
        eps = Fraction(1, eps_inv)
        if variant == "nonadaptive14":
            b1, b2, inner_rate = eps_inv, 0, Fraction(1, 4) - eps
        elif variant == "adaptive27":
            b1, b2, inner_rate = 3 * eps_inv, eps_inv, Fraction(1, 2) - eps
        elif variant == "onesided13":
            b1, b2, inner_rate = eps_inv, eps_inv, Fraction(1, 2) - eps
        else:  # listreduce
            b1, b2, inner_rate = eps_inv, 0, Fraction(1, 2) - eps
        payload = 4 * b1 * s * n
        code = ecc.code_for_payload(payload, eps_inv, n_c=n_c or 2 * eps_inv)
        return cls(variant, eps_inv, n, s, b1, b2, code, inner_rate)

    @property
    def eps(self) -> Fraction:
        return Fraction(1, self.eps_inv)

    @property
    def n_c(self) -> int:
        return self.code.n_c

    @property
    def n_prime(self) -> int:
        return 2 * self.code.n_c

    @property
    def total_rounds(self) -> int:
        return self.b1 * self.n_prime + self.b2 * self.n_prime // 2

    @property
    def edge_bound(self) -> int:
        return self.b1 * self.s * self.n

    @property
    def payload_bits(self) -> int:
        return 4 * self.edge_bound

    @property
    def guarantee_rate(self) -> Fraction:
        base = {"nonadaptive14": Fraction(1, 4), "adaptive27": Fraction(2, 7),
                "onesided13": Fraction(1, 3), "listreduce": Fraction(1, 2)}
        return base[self.variant] - 2 * self.eps

    @property
    def list_cap(self) -> int:
        """Output size bound ceil(1/eps) * b1 for the list-size reduction."""
        return self.eps_inv * self.b1

    def locate(self, r: int) -> tuple[str, int, int]:
        """(part, block, position) of a round; exclusive blocks count on
        from b1."""
        joint_rounds = self.b1 * self.n_prime
        if r < joint_rounds:
            return "joint", r // self.n_prime, r % self.n_prime
        r -= joint_rounds
        half = self.n_prime // 2
        return "excl", self.b1 + r // half, r % half


@dataclass
class BlockEntry:
    block: int
    e_set: Optional[SubtreeEdgeSet]
    path: Optional[Path]
    c_scaled: int


class ConfidenceLedger:
    """Per-block decoded sets, derived paths and exact confidences.

    All aggregates are integers scaled by N'/2: C, c(tau) per path, and
    the derived quantities C' = 2c(tau_max) + c(0) - C and
    C'' = 2(c(tau_max) + c(0)) - C.
    """

    def __init__(self, n_c: int):
        self.n_c = n_c
        self.entries: list[BlockEntry] = []
        self.path_conf: dict[Path, int] = {}
        self.empty_conf = 0
        self.total_conf = 0

    def add(self, block: int, e_set: Optional[SubtreeEdgeSet],
            path: Optional[Path], c_scaled: int) -> None:
        if not -self.n_c <= c_scaled <= self.n_c:
            raise ValueError("confidence outside [-1, 1]")
        self.entries.append(BlockEntry(block, e_set, path, c_scaled))
        self.total_conf += c_scaled
        if path is None:
            self.empty_conf += c_scaled
        else:
            self.path_conf[path] = self.path_conf.get(path, 0) + c_scaled

    def tau_max(self) -> Optional[Path]:
        """Non-empty path with the largest confidence, ties to the
        lexicographically smallest path."""
        if not self.path_conf:
            return None
        best = max(self.path_conf.values())
        return min(p for p, c in self.path_conf.items() if c == best)

    def c_of(self, path: Optional[Path]) -> int:
        if path is None:
            return self.empty_conf
        return self.path_conf.get(path, 0)

    @property
    def c_prime_scaled(self) -> int:
        return 2 * self.c_of(self.tau_max()) + self.empty_conf - self.total_conf

    @property
    def c_dprime_scaled(self) -> int:
        return 2 * (self.c_of(self.tau_max()) + self.empty_conf) - self.total_conf

    def c_prime(self) -> Fraction:
        return Fraction(self.c_prime_scaled, self.n_c)

    def c_dprime(self) -> Fraction:
        return Fraction(self.c_dprime_scaled, self.n_c)


def block_confidence(word: Sequence[int], code: ecc.RsCode,
                     payload_bits: int) -> tuple[Optional[SubtreeEdgeSet], int]:
    """Decode a received edge-set word: (decoded set or None, confidence
    scaled by N'/2).

    Decode failure is maximal ambiguity: (None, 0).  A successful RS
    decode whose bit payload is not a valid walk yields (None, c).
    """
    try:
        msg = ecc.rs_unique_decode(list(word), code)
    except ecc.DecodeFailure:
        return None, 0
    delta = ecc.distance_to_message(word, msg, code)
    c_scaled = code.n_c - 2 * delta
    return subtree_decode(code.unpack(msg, payload_bits)), c_scaled


def derive_path(e_set: Optional[SubtreeEdgeSet], instance: ProtocolInstance,
                party: str) -> Optional[Path]:
    """Walk from the root taking own preferred edges at own levels and the
    unique e_set edge elsewhere; None unless a leaf is reached."""
    if e_set is None:
        return None
    mine = is_alice_level if party == "A" else (lambda v: not is_alice_level(v))
    path = EMPTY_PATH
    node = 1
    for _ in range(instance.depth):
        if mine(node):
            bit = instance.preferred_bit(node)
        else:
            kids = e_set.children(node)
            if len(kids) != 1:
                return None
            bit = kids[0] & 1
        path = path.extend(bit)
        node = (node << 1) | bit
    return path


class _AntiMajoritySupport:
    """Published scheme data the anti-majority strategy corrupts toward:
    for each block the rounds its target hears and the corresponding
    symbol of a fixed wrong-path edge-set codeword."""

    def __init__(self, config: ReductionConfig, instance: ProtocolInstance):
        self.config = config
        self.instance = instance
        self.flips_needed = config.n_c - config.code.radius
        self._words: dict[str, tuple[int, ...]] = {}

    def _wrong_word(self, target: str) -> tuple[int, ...]:
        if target not in self._words:
            mine = is_alice_level if target == "A" else (lambda v: not is_alice_level(v))
            path = EMPTY_PATH
            node = 1
            for _ in range(self.config.n):
                bit = self.instance.preferred_bit(node)
                if not mine(node):
                    bit ^= 1
                path = path.extend(bit)
                node = (node << 1) | bit
            bits = subtree_encode(SubtreeEdgeSet.from_path(path),
                                  self.config.edge_bound)
            self._words[target] = ecc.rs_encode(self.config.code.pack(bits),
                                                self.config.code)
        return self._words[target]

    def blocks(self, target: str):
        cfg = self.config
        word = self._wrong_word(target)
        offset = 0 if target == "B" else 1  # A hears odd joint positions
        for b in range(cfg.b1):
            base = b * cfg.n_prime
            yield [(base + 2 * i + offset, word[i]) for i in range(cfg.n_c)]
        if cfg.variant == "onesided13" and target == "A":
            half = cfg.n_prime // 2
            for b in range(cfg.b2):
                base = cfg.b1 * cfg.n_prime + b * half
                yield [(base + i, word[i]) for i in range(half)]


class TemplateParty:
    """One party of the template, driven round by round by the engine."""

    def __init__(self, role: str, instance: ProtocolInstance,
                 config: ReductionConfig,
                 exchange: Optional[RsExchangeScheme] = None):
        self.role = role
        self.instance = instance
        self.config = config
        self.exchange = exchange
        self.e_nodes: set[int] = set()
        self.ledger = ConfidenceLedger(config.n_c)
        self.list_hits: dict[Path, tuple[int, int]] = {}
        self.safe: Optional[bool] = None
        self.joint_snapshot: Optional[tuple[int, int]] = None  # (C', C'')
        self._block_word: Optional[tuple[int, ...]] = None
        self._prepared_block = -1
        self._final_word: Optional[tuple[int, ...]] = None
        self._recv_ecc: list = []
        self._recv_inner: list = []
        self._inner_word = exchange.word(role) if exchange else None
        self._mine = is_alice_level if role == "A" else (lambda v: not is_alice_level(v))

    # -- engine interface ---------------------------------------------

    def act(self, r: int):
        part, block, pos = self.config.locate(r)
        if part == "joint":
            if block != self._prepared_block:
                self._prepare_block(block)
            my_turn = (pos % 2 == 0) == (self.role == "A")
            if not my_turn:
                return LISTEN
            idx = pos // 2
            inner = self._inner_word[idx] if self._inner_word is not None else 0
            return Send((self._block_word[idx], inner))
        if self.config.variant == "onesided13":
            sender = self.role == "B"
        else:  # adaptive27: safe parties transmit, unsafe listen
            sender = bool(self.safe)
        if sender:
            return Send((self._final_word[pos], 0))
        return LISTEN

    def deliver(self, r: int, symbol) -> None:
        if isinstance(symbol, tuple) and len(symbol) == 2:
            head, inner = symbol
        else:
            head, inner = symbol, 0
        if not isinstance(head, int):
            head = 0  # injected junk defaults to a fixed field symbol
        self._recv_ecc.append(head % self.config.code.q)
        self._recv_inner.append(inner)

    # -- block processing, driven by the runner ------------------------

    def _prepare_block(self, block: int) -> None:
        bits = subtree_encode(SubtreeEdgeSet(self.e_nodes),
                              self.config.edge_bound)
        self._block_word = ecc.rs_encode(self.config.code.pack(bits),
                                         self.config.code)
        self._prepared_block = block

    def accepts(self, cand: Candidate) -> bool:
        """Own-edge filter: every edge at this party's levels over the
        candidate's new part must be preferred."""
        path = cand.path
        if path.length > self.instance.depth:
            return False
        node = path.node(cand.anchor_len)
        for d in range(cand.anchor_len, path.length):
            bit = path.bit(d)
            if self._mine(node) and self.instance.preferred_bit(node) != bit:
                return False
            node = (node << 1) | bit
        return True

    def finish_joint_block(self, block: int, candidates: list[Candidate]) -> None:
        for cand in candidates:
            if self.accepts(cand):
                p = cand.path
                self.e_nodes.update(p.node(d) for d in range(1, p.length + 1))
        word = self._recv_ecc
        assert len(word) == self.config.n_c
        if self.config.variant == "listreduce":
            self._list_decode(block, word)
        else:
            e_set, c_scaled = block_confidence(word, self.config.code,
                                               self.config.payload_bits)
            path = derive_path(e_set, self.instance, self.role)
            self.ledger.add(block, e_set, path, c_scaled)
        self._recv_ecc = []
        self._recv_inner = []

    def _list_decode(self, block: int, word) -> None:
        cfg = self.config
        for msg in ecc.rs_nearest_list(word, cfg.code, cfg.eps_inv):
            dist = ecc.distance_to_message(word, msg, cfg.code)
            e_set = subtree_decode(cfg.code.unpack(msg, cfg.payload_bits))
            path = derive_path(e_set, self.instance, self.role)
            if path is None:
                continue
            old = self.list_hits.get(path)
            if old is None or (dist, block) < old:
                self.list_hits[path] = (dist, block)

    def inner_received(self) -> list:
        return self._recv_inner

    def end_joint_part(self) -> None:
        self.joint_snapshot = (self.ledger.c_prime_scaled,
                               self.ledger.c_dprime_scaled)
        if self.config.variant == "adaptive27":
            # strict threshold: safe iff C'' > 1/eps
            self.safe = (self.ledger.c_dprime_scaled
                         > self.config.eps_inv * self.config.n_c)
        if self.config.b2:
            bits = subtree_encode(SubtreeEdgeSet(self.e_nodes),
                                  self.config.edge_bound)
            self._final_word = ecc.rs_encode(self.config.code.pack(bits),
                                             self.config.code)

    def finish_exclusive_block(self, block: int) -> None:
        if not self._recv_ecc:
            return  # transmitted (or nothing was delivered)
        word = self._recv_ecc
        if len(word) == self.config.n_c:
            e_set, c_scaled = block_confidence(word, self.config.code,
                                               self.config.payload_bits)
            path = derive_path(e_set, self.instance, self.role)
            self.ledger.add(block, e_set, path, c_scaled)
        self._recv_ecc = []
        self._recv_inner = []

    def output_path(self) -> Optional[Path]:
        return self.ledger.tau_max()

    def output_list(self) -> list[Path]:
        ranked = sorted(self.list_hits.items(), key=lambda kv: (kv[1], kv[0]))
        return [p for p, _ in ranked[:self.config.list_cap]]


@dataclass
class ReductionResult:
    config: ReductionConfig
    seed: int
    adversary_kind: str
    path_a: Optional[Path]
    path_b: Optional[Path]
    correct_a: bool
    correct_b: bool
    safe_a: Optional[bool]
    safe_b: Optional[bool]
    c_prime_a: Fraction
    c_prime_b: Fraction
    c_dprime_a: Fraction
    c_dprime_b: Fraction
    joint_c_dprime_a: Fraction
    joint_c_dprime_b: Fraction
    lists_a: list[Path] = field(default_factory=list)
    lists_b: list[Path] = field(default_factory=list)
    spent: int = 0
    guarantee_blocks: list[tuple[int, bool, Fraction]] = field(default_factory=list)
    ledger_a: Optional[ConfidenceLedger] = None
    ledger_b: Optional[ConfidenceLedger] = None

    def csv_row(self, rate) -> list:
        return [self.config.variant, f"1/{self.config.eps_inv}", self.config.n,
                str(rate), self.adversary_kind, int(self.correct_a),
                int(self.correct_b), str(self.c_prime_a), str(self.c_prime_b),
                str(self.c_dprime_a), str(self.c_dprime_b), self.spent]

    CSV_HEADER = ["variant", "eps", "n", "rate", "adversary", "correct_A",
                  "correct_B", "Cprime_A", "Cprime_B", "Cdprime_A",
                  "Cdprime_B", "spent"]


def run_reduction(instance: ProtocolInstance, config: ReductionConfig,
                  adversary: AdversaryStrategy, seed: int,
                  rate: Optional[Fraction] = None,
                  inner: str = "oracle",
                  policy: Optional[GarbagePolicy] = None,
                  keep_rounds: bool = False) -> ReductionResult:
    """Execute one trial of a reduction variant over the channel engine.

    ``inner`` selects the list-decodable block scheme: "oracle" (any
    variant) or "rs-exchange" (tolerates 1/4 - eps, so nonadaptive14
    only, and requires n <= 16).  ``rate`` defaults to the variant's
    guaranteed rate.
    """
    if instance.depth != config.n:
        raise ValueError("instance depth does not match the config")
    rate = config.guarantee_rate if rate is None else Fraction(rate)
    truth = Candidate(0, common_path(instance))

    exchange = None
    oracle = None
    if inner == "rs-exchange":
        exchange = RsExchangeScheme(instance, EMPTY_PATH, config.n,
                                    config.eps_inv, config.n_prime)
        if exchange.guarantee.tolerable_rate < config.inner_rate:
            raise ValueError(
                f"rs-exchange tolerates {exchange.guarantee.tolerable_rate}, "
                f"variant needs {config.inner_rate}")
    elif inner == "oracle":
        guarantee = ListDecodeGuarantee(config.inner_rate, config.s, 0.0,
                                        config.n_prime)
        oracle = OracleScheme(guarantee, policy)
        oracle.bind(instance)
    else:
        raise ValueError(f"unknown inner scheme {inner!r}")

    alice = TemplateParty("A", instance, config, exchange)
    bob = TemplateParty("B", instance, config, exchange)
    budget = ErrorBudget(config.total_rounds, rate)

    q = config.code.q
    q_bytes = (q.bit_length() + 7) // 8

    def corruptor(rng, r, symbol):
        head = int.from_bytes(rng.bytes(q_bytes), "big") % q
        return (head, int(rng.integers(1 << 62)))

    ctx = RunContext(
        total_rounds=config.total_rounds, block_rounds=config.n_prime,
        scheme={"antimajority": _AntiMajoritySupport(config, instance)},
        corruptor=corruptor)

    schedule = None
    if config.variant != "adaptive27":
        def schedule(r):
            part, _, pos = config.locate(r)
            if part == "joint":
                return "A" if pos % 2 == 0 else "B"
            return "B"  # onesided13 exclusive part; others have none

    engine = Engine(alice, bob, schedule, budget, adversary, seed,
                    run_ctx=ctx, keep_rounds=keep_rounds)
    rng = np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), 1]))

    guarantee_blocks = []
    for b in range(config.b1):
        engine.advance(config.n_prime)
        corrupted = engine.trace.corruptions_in(b)
        if oracle is not None:
            outcome = oracle.outcomes(truth, corrupted, rng)
        else:
            outcome = BlockOutcome(
                exchange.decode_candidates("A", alice.inner_received()),
                exchange.decode_candidates("B", bob.inner_received()),
                Fraction(corrupted, config.n_prime) <= exchange.guarantee.tolerable_rate,
                Fraction(corrupted, config.n_prime))
        guarantee_blocks.append((b, outcome.guarantee_held, outcome.measured_rate))
        alice.finish_joint_block(b, outcome.candidates_a)
        bob.finish_joint_block(b, outcome.candidates_b)

    alice.end_joint_part()
    bob.end_joint_part()
    for b in range(config.b2):
        engine.advance(config.n_prime // 2)
        alice.finish_exclusive_block(config.b1 + b)
        bob.finish_exclusive_block(config.b1 + b)
    assert engine.round == config.total_rounds

    truth_path = truth.path
    if config.variant == "listreduce":
        la, lb = alice.output_list(), bob.output_list()
        return ReductionResult(
            config, seed, adversary.kind, None, None,
            truth_path in la, truth_path in lb, None, None,
            Fraction(0), Fraction(0), Fraction(0), Fraction(0),
            Fraction(0), Fraction(0), la, lb, budget.spent, guarantee_blocks,
            alice.ledger, bob.ledger)

    path_a, path_b = alice.output_path(), bob.output_path()
    return ReductionResult(
        config, seed, adversary.kind, path_a, path_b,
        path_a == truth_path, path_b == truth_path,
        alice.safe, bob.safe,
        alice.ledger.c_prime(), bob.ledger.c_prime(),
        alice.ledger.c_dprime(), bob.ledger.c_dprime(),
        Fraction(alice.joint_snapshot[1], config.n_c),
        Fraction(bob.joint_snapshot[1], config.n_c),
        [], [], budget.spent, guarantee_blocks, alice.ledger, bob.ledger)
