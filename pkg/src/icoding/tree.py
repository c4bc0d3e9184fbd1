"""Canonical-form protocol trees and the subtree wire encoding.

A protocol instance is a complete binary tree of even depth n.  Nodes are
indexed in heap order (root = 1, children of v are 2v and 2v+1), so the
level of a node is ``v.bit_length()`` and ancestor arithmetic is shift
based.  Alice owns the preferred edges at odd levels, Bob at even levels;
following the preferred edges from the root yields the common path, which
is what every simulation in this repository tries to recover.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Iterable, Iterator, Optional


def level(node: int) -> int:
    """1-based level of a heap-indexed node (root is level 1)."""
    return node.bit_length()


def is_alice_level(node: int) -> bool:
    return node.bit_length() % 2 == 1


@total_ordering
class Path:
    """A root-downward path, packed as (length, bits) with MSB = root edge.

    Bit 0 means left child.  Paths order lexicographically by their bit
    sequences, with a proper prefix sorting before its extensions.
    """

    __slots__ = ("length", "bits")

    def __init__(self, length: int = 0, bits: int = 0):
        if length < 0 or bits >> length:
            raise ValueError("path bits exceed declared length")
        self.length = length
        self.bits = bits

    @classmethod
    def from_bits(cls, seq: Iterable[int] | str) -> "Path":
        bits = 0
        n = 0
        for b in seq:
            bits = (bits << 1) | int(b)
            n += 1
        return cls(n, bits)

    def bit(self, i: int) -> int:
        """Bit for the edge leaving level i+1 (0-based from the root)."""
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.bits >> (self.length - 1 - i)) & 1

    def node(self, depth: Optional[int] = None) -> int:
        """Heap index of the node at the given depth along the path."""
        d = self.length if depth is None else depth
        if not 0 <= d <= self.length:
            raise IndexError(d)
        return (1 << d) | (self.bits >> (self.length - d))

    def prefix(self, length: int) -> "Path":
        if not 0 <= length <= self.length:
            raise IndexError(length)
        return Path(length, self.bits >> (self.length - length))

    def extend(self, bit: int) -> "Path":
        return Path(self.length + 1, (self.bits << 1) | (bit & 1))

    def concat(self, other: "Path") -> "Path":
        return Path(self.length + other.length, (self.bits << other.length) | other.bits)

    def startswith(self, other: "Path") -> bool:
        return other.length <= self.length and self.prefix(other.length) == other

    def __iter__(self) -> Iterator[int]:
        return (self.bit(i) for i in range(self.length))

    def __str__(self) -> str:
        return "".join(str(b) for b in self)

    def __repr__(self) -> str:
        return f"Path({str(self)!r})"

    def __eq__(self, other):
        return (
            isinstance(other, Path)
            and self.length == other.length
            and self.bits == other.bits
        )

    def __lt__(self, other):
        if not isinstance(other, Path):
            return NotImplemented
        m = min(self.length, other.length)
        a, b = self.prefix(m).bits, other.prefix(m).bits
        if a != b:
            return a < b
        return self.length < other.length

    def __hash__(self):
        return hash((self.length, self.bits))


EMPTY_PATH = Path()


class ProtocolInstance:
    """Preferred-edge table over a depth-n complete binary tree.

    The preferred bit of an internal node is either read from explicit
    tables or derived lazily from a keyed counter generator, so instances
    of depth far beyond anything materializable (n = 1024 and up) stay
    cheap: only the nodes a simulation actually touches are evaluated.
    """

    def __init__(self, depth: int, preferred_a: Optional[dict] = None,
                 preferred_b: Optional[dict] = None, seed: Optional[int] = None):
        if depth < 2 or depth % 2 != 0:
            raise ValueError("depth must be an even integer >= 2")
        if (preferred_a is None) != (preferred_b is None):
            raise ValueError("supply both tables or neither")
        if preferred_a is None and seed is None:
            raise ValueError("need explicit tables or a generator seed")
        self.depth = depth
        self._a = preferred_a
        self._b = preferred_b
        self._seed = seed
        self._cache: dict[int, int] = {}
        if preferred_a is not None:
            self._validate_tables()

    def _validate_tables(self) -> None:
        for node in self._a:
            if not is_alice_level(node):
                raise ValueError(f"node {node} in Alice's table is even-level")
        for node in self._b:
            if is_alice_level(node):
                raise ValueError(f"node {node} in Bob's table is odd-level")
        for node in self.internal_nodes():
            table = self._a if is_alice_level(node) else self._b
            if table.get(node) not in (0, 1):
                raise ValueError(f"internal node {node} lacks a preferred bit")

    def internal_nodes(self) -> Iterator[int]:
        """All internal nodes, levels 1..depth.  Exponential in depth."""
        return iter(range(1, 1 << self.depth))

    def preferred_bit(self, node: int) -> int:
        """Preferred child bit of an internal node."""
        if not 1 <= node.bit_length() <= self.depth:
            raise ValueError(f"node {node} is not internal at depth {self.depth}")
        if self._a is not None:
            table = self._a if is_alice_level(node) else self._b
            return table[node]
        bit = self._cache.get(node)
        if bit is None:
            digest = hashlib.blake2b(
                node.to_bytes((node.bit_length() + 7) // 8, "big"),
                key=self._seed.to_bytes(8, "big"), digest_size=1).digest()
            bit = digest[0] & 1
            self._cache[node] = bit
        return bit

    def owner(self, node: int) -> str:
        return "A" if is_alice_level(node) else "B"

    def to_tables(self) -> tuple[dict, dict]:
        """Materialized (preferred_A, preferred_B); exponential in depth."""
        a, b = {}, {}
        for node in self.internal_nodes():
            (a if is_alice_level(node) else b)[node] = self.preferred_bit(node)
        return a, b

    def __eq__(self, other):
        if not isinstance(other, ProtocolInstance) or self.depth != other.depth:
            return False
        if self.depth <= 20:
            return self.to_tables() == other.to_tables()
        if self._seed is not None and other._seed is not None:
            return self._seed == other._seed
        return self is other

    def __hash__(self):
        return hash((self.depth, self._seed))

    def serialize(self) -> str:
        """Textual form: ``n=<int>``, then A/B preferred bits in node order."""
        a, b = self.to_tables()
        abits = "".join(str(a[v]) for v in sorted(a))
        bbits = "".join(str(b[v]) for v in sorted(b))
        return f"n={self.depth}\nA:{abits}\nB:{bbits}\n"

    @classmethod
    def deserialize(cls, text: str) -> "ProtocolInstance":
        lines = [ln for ln in text.strip().splitlines() if ln]
        if len(lines) != 3 or not lines[0].startswith("n="):
            raise ValueError("malformed instance text")
        n = int(lines[0][2:])
        abits = lines[1].removeprefix("A:")
        bbits = lines[2].removeprefix("B:")
        a_nodes = sorted(v for v in range(1, 1 << n) if is_alice_level(v))
        b_nodes = sorted(v for v in range(1, 1 << n) if not is_alice_level(v))
        if len(abits) != len(a_nodes) or len(bbits) != len(b_nodes):
            raise ValueError("bitstring length does not match depth")
        a = {v: int(c) for v, c in zip(a_nodes, abits)}
        b = {v: int(c) for v, c in zip(b_nodes, bbits)}
        return cls(n, a, b)


def random_instance(n: int, seed: int) -> ProtocolInstance:
    """Instance whose preferred bits come from a keyed counter generator.

    Identical (n, seed) yields identical instances; evaluation is lazy, so
    this is the only constructor that scales to large depths.
    """
    if n < 2 or n % 2 != 0:
        raise ValueError("depth must be an even integer >= 2")
    return ProtocolInstance(n, seed=seed & 0xFFFFFFFFFFFFFFFF)


def common_path(instance: ProtocolInstance) -> Path:
    """Root-to-leaf path following the preferred edges; length exactly n."""
    path = EMPTY_PATH
    node = 1
    for _ in range(instance.depth):
        bit = instance.preferred_bit(node)
        path = path.extend(bit)
        node = (node << 1) | bit
    return path


class SubtreeEdgeSet:
    """Ancestor-closed set of tree edges, stored as a full rooted subtree.

    Edges are keyed by their child endpoint: edge (v, b) is the member
    ``2v + b``.  Ancestor closure means every member's parent edge is a
    member too (or the parent is the root).
    """

    __slots__ = ("nodes",)

    def __init__(self, nodes: Iterable[int] = ()):
        self.nodes = frozenset(nodes)
        for c in self.nodes:
            if c < 2:
                raise ValueError(f"{c} is not an edge endpoint")
            if c >= 4 and (c >> 1) not in self.nodes:
                raise ValueError(f"edge to {c} is missing its parent edge")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]]) -> "SubtreeEdgeSet":
        return cls((v << 1) | b for v, b in edges)

    @classmethod
    def from_path(cls, path: Path) -> "SubtreeEdgeSet":
        return cls(path.node(d) for d in range(1, path.length + 1))

    @classmethod
    def from_paths(cls, paths: Iterable[Path]) -> "SubtreeEdgeSet":
        nodes = set()
        for p in paths:
            nodes.update(p.node(d) for d in range(1, p.length + 1))
        return cls(nodes)

    def edges(self) -> Iterator[tuple[int, int]]:
        return ((c >> 1, c & 1) for c in self.nodes)

    def children(self, node: int) -> list[int]:
        return [c for c in (node << 1, (node << 1) | 1) if c in self.nodes]

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, child_node: int) -> bool:
        return child_node in self.nodes

    def __eq__(self, other):
        return isinstance(other, SubtreeEdgeSet) and self.nodes == other.nodes

    def __hash__(self):
        return hash(self.nodes)

    def __repr__(self):
        return f"SubtreeEdgeSet({sorted(self.nodes)})"


class SizeExceeded(ValueError):
    """Edge set larger than the encoding bound."""


# Two-bit move codes of the depth-first walk.  10 never occurs in a walk,
# which makes it usable as detectable padding.
_LEFT, _RIGHT, _UP, _PAD = "00", "01", "11", "10"


def subtree_encode(edge_set: SubtreeEdgeSet, bound: int) -> str:
    """Depth-first-walk encoding, padded to exactly 4*bound bits.

    The walk starts at the root, explores left child before right, and
    emits 00 / 01 / 11 for left-down / right-down / up moves; every edge
    contributes one down and one up move, 4 bits total.
    """
    if len(edge_set) > bound:
        raise SizeExceeded(f"{len(edge_set)} edges exceed bound {bound}")
    moves: list[str] = []

    def walk(node: int) -> None:
        for bit, code in ((0, _LEFT), (1, _RIGHT)):
            child = (node << 1) | bit
            if child in edge_set:
                moves.append(code)
                walk(child)
                moves.append(_UP)

    walk(1)
    return "".join(moves) + _PAD * (2 * bound - len(moves))


def subtree_decode(bits: str) -> Optional[SubtreeEdgeSet]:
    """Replay a walk encoding; total on arbitrary bits.

    Returns None (the invalid marker) on any malformed input: an up move
    at the root, padding followed by a non-padding code, a walk that does
    not end at the root, or a dangling partial code.  Callers treat the
    invalid marker as the empty-path decode.
    """
    if len(bits) % 2 != 0 or any(c not in "01" for c in bits):
        return None
    node = 1
    nodes: set[int] = set()
    for i in range(0, len(bits), 2):
        code = bits[i:i + 2]
        if code == _PAD:
            # Padding is only valid as an all-padding tail at the root.
            if node != 1 or bits[i:] != _PAD * ((len(bits) - i) // 2):
                return None
            break
        if code == _UP:
            if node == 1:
                return None
            node >>= 1
        else:
            node = (node << 1) | (code == _RIGHT)
            nodes.add(node)
    else:
        if node != 1:
            return None
    return SubtreeEdgeSet(nodes)


def enumerate_subtrees(max_edges: int, max_depth: int) -> Iterator[frozenset[int]]:
    """All ancestor-closed edge sets within the given size and depth caps.

    Exhaustive-test helper: yields node-id frozensets, the empty set first.
    """

    def grow(node: int, budget: int, depth: int) -> Iterator[frozenset[int]]:
        yield frozenset()
        if budget <= 0 or depth <= 0:
            return
        left, right = node << 1, (node << 1) | 1
        for lsub in grow(left, budget - 1, depth - 1):
            lset = frozenset({left}) | lsub
            remaining = budget - len(lset)
            yield lset
            if remaining > 0:
                for rsub in grow(right, remaining - 1, depth - 1):
                    yield lset | frozenset({right}) | rsub
        for rsub in grow(right, budget - 1, depth - 1):
            yield frozenset({right}) | rsub

    return grow(1, max_edges, max_depth)
