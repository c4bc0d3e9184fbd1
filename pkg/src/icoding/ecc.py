"""Reed-Solomon codes over prime fields and a seeded universal hash family.

The edge-set exchange codes need relative distance close to 1, which RS
delivers with a short message over a large field; simulations therefore
run with giant prime fields (the bit payload packed into one or two
symbols) where Berlekamp-Welch stays cheap, while all correctness oracles
run over tiny fields where exhaustive enumeration is possible.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

import gmpy2

# Probable primes 2^bits + offset (gmpy2.next_prime); is_prime-checked in
# the test suite.  Symbol payloads are floor(log2 q) = `bits` usable bits.
PRIME_OFFSETS = {
    64: 13, 128: 51, 256: 297, 512: 75, 1024: 643,
    2048: 981, 3072: 813, 4096: 1761, 6144: 375, 8192: 897,
}

# Mersenne exponents usable as hash fields (2^e - 1 prime).
_MERSENNE_EXPONENTS = (61, 89, 107, 127, 521, 607, 1279, 2203, 4253)

BRUTE_FORCE_CAP = 1 << 20


def ladder_prime(min_bits: int) -> tuple[int, int]:
    """Smallest precomputed prime with at least min_bits payload bits.

    Returns (q, payload_bits).
    """
    for bits in sorted(PRIME_OFFSETS):
        if bits >= min_bits:
            return (1 << bits) + PRIME_OFFSETS[bits], bits
    raise ValueError(f"no precomputed prime covers {min_bits} payload bits")


@dataclass(frozen=True)
class RsCode:
    """Reed-Solomon code: degree-(k-1) polynomials over GF(q), evaluated
    at points 0..n_c-1.  Minimum distance is n_c - k + 1."""

    q: int
    k: int
    n_c: int

    def __post_init__(self):
        if self.k < 1 or self.n_c < self.k:
            raise ValueError("need 1 <= k <= n_c")
        if self.n_c > self.q:
            raise ValueError("codeword length exceeds field size")

    @property
    def distance(self) -> int:
        return self.n_c - self.k + 1

    @property
    def radius(self) -> int:
        """Unique-decoding radius floor((n_c - k) / 2)."""
        return (self.n_c - self.k) // 2

    def check_relative_distance(self, eps_inv: int) -> bool:
        """Relative distance >= 1 - 1/eps_inv, i.e. k <= ceil(n_c/eps_inv)+1."""
        return self.distance * eps_inv >= (eps_inv - 1) * self.n_c

    @property
    def payload_bits(self) -> int:
        """Bits carried per symbol when packing bit payloads."""
        return self.q.bit_length() - 1

    def pack(self, bits: str) -> tuple[int, ...]:
        """Zero-pad a bit string and split it into k field symbols."""
        per = self.payload_bits
        if len(bits) > per * self.k:
            raise ValueError("payload does not fit the message space")
        padded = bits.ljust(per * self.k, "0")
        return tuple(int(padded[i * per:(i + 1) * per], 2) for i in range(self.k))

    def unpack(self, message: Sequence[int], n_bits: int) -> str:
        per = self.payload_bits
        bits = "".join(format(s, f"0{per}b") for s in message)
        return bits[:n_bits]


def code_for_payload(payload_bits: int, eps_inv: int, k: int = 2,
                     n_c: Optional[int] = None) -> RsCode:
    """E-set code: k giant symbols, codeword length defaulting to 2/eps.

    The default n_c = 2*eps_inv keeps relative distance (n_c-k+1)/n_c at
    least 1 - eps for k = 2 while holding Berlekamp-Welch to a size where
    thousand-trial runs stay cheap.
    """
    if n_c is None:
        n_c = 2 * eps_inv
    q, _ = ladder_prime((payload_bits + k - 1) // k)
    code = RsCode(q, k, n_c)
    if not code.check_relative_distance(eps_inv):
        raise ValueError("codeword too short for the required distance")
    return code


def rs_encode(message: Sequence[int], code: RsCode) -> tuple[int, ...]:
    """Evaluations of the message polynomial at points 0..n_c-1."""
    if len(message) != code.k:
        raise ValueError(f"message must have {code.k} symbols")
    q = code.q
    if any(not 0 <= s < q for s in message):
        raise ValueError("message symbol out of field range")
    coeffs = [gmpy2.mpz(s) for s in reversed(message)]  # Horner order
    out = []
    for x in range(code.n_c):
        acc = gmpy2.mpz(0)
        for c in coeffs:
            acc = (acc * x + c) % q
        out.append(int(acc))
    return tuple(out)


def _poly_eval(coeffs: list, x: int, q) -> int:
    acc = gmpy2.mpz(0)
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def _poly_divmod(num: list, den: list, q):
    """Polynomial division over GF(q); coefficient lists, low order first."""
    num = [gmpy2.mpz(c) for c in num]
    den = [gmpy2.mpz(c) for c in den]
    while den and den[-1] == 0:
        den.pop()
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = gmpy2.invert(den[-1], q)
    quot = [gmpy2.mpz(0)] * max(0, len(num) - len(den) + 1)
    rem = num[:]
    for i in range(len(quot) - 1, -1, -1):
        if len(rem) < len(den) + i:
            continue
        factor = (rem[len(den) + i - 1] * inv_lead) % q
        quot[i] = factor
        if factor:
            for j, d in enumerate(den):
                rem[i + j] = (rem[i + j] - factor * d) % q
    while rem and rem[-1] == 0:
        rem.pop()
    return quot, rem


def _trim(poly: list) -> list:
    while poly and poly[-1] == 0:
        poly.pop()
    return poly


# Per-code caches: the locator modulus prod(x - i) and small inverses.
_GAO_CACHE: dict[tuple[int, int], list] = {}
_INV_CACHE: dict[tuple[int, int], list] = {}


def _gao_modulus(code: RsCode) -> list:
    key = (code.q, code.n_c)
    if key not in _GAO_CACHE:
        q = code.q
        poly = [gmpy2.mpz(1)]
        for x in range(code.n_c):
            poly = [(-x * poly[0]) % q] + [
                (poly[t - 1] - x * poly[t]) % q for t in range(1, len(poly))
            ] + [poly[-1]]
        _GAO_CACHE[key] = poly
    return _GAO_CACHE[key]


def _small_inverses(code: RsCode) -> list:
    key = (code.q, code.n_c)
    if key not in _INV_CACHE:
        _INV_CACHE[key] = [None] + [gmpy2.invert(d, code.q)
                                    for d in range(1, code.n_c)]
    return _INV_CACHE[key]


def _newton_interpolate(word: Sequence[int], code: RsCode) -> list:
    """Coefficients of the unique polynomial of degree < n_c through
    (i, word[i]); evaluation points are consecutive so divided
    differences only ever divide by small cached constants."""
    q = code.q
    inv = _small_inverses(code)
    dd = [gmpy2.mpz(y) for y in word]
    n = len(dd)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            dd[i] = ((dd[i] - dd[i - 1]) * inv[j]) % q
    poly = [dd[n - 1]]
    for i in range(n - 2, -1, -1):
        # poly = poly * (x - i) + dd[i]
        poly = [(dd[i] - i * poly[0]) % q] + [
            (poly[t - 1] - i * poly[t]) % q for t in range(1, len(poly))
        ] + [poly[-1]]
    return _trim(poly)


class DecodeFailure(Exception):
    """No codeword within the unique-decoding radius."""


def _distance_to_word(coeffs: list, word: Sequence[int], code: RsCode) -> int:
    q = code.q
    return sum(1 for x in range(code.n_c) if _poly_eval(coeffs, x, q) != word[x])


# Position pairs tried by the interpolate-and-verify fast path; spread so
# that prefix- or suffix-concentrated corruption still leaves a clean pair.
def _fast_path_groups(n_c: int, k: int):
    anchors = [n_c - k, 0, n_c // 2, n_c // 4, (3 * n_c) // 4]
    seen = set()
    for a in anchors:
        group = tuple(range(a, a + k))
        if group[-1] < n_c and group not in seen:
            seen.add(group)
            yield group


def _interpolate(points: list[tuple[int, int]], q) -> list:
    """Lagrange interpolation; returns coefficient list, low order first."""
    k = len(points)
    coeffs = [gmpy2.mpz(0)] * k
    for i, (xi, yi) in enumerate(points):
        # Numerator polynomial prod_{j != i} (x - xj), scaled by yi/denom.
        denom = gmpy2.mpz(1)
        basis = [gmpy2.mpz(1)]
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            denom = (denom * (xi - xj)) % q
            basis = [(-xj * basis[0]) % q] + [
                (basis[t - 1] - xj * basis[t]) % q for t in range(1, len(basis))
            ] + [basis[-1]]
        scale = (gmpy2.mpz(yi) * gmpy2.invert(denom, q)) % q
        for t in range(len(basis)):
            coeffs[t] = (coeffs[t] + scale * basis[t]) % q
    return coeffs


def rs_unique_decode(word: Sequence[int], code: RsCode) -> tuple[int, ...]:
    """Unique decoding within radius floor((n_c-k)/2) by Berlekamp-Welch
    rational interpolation (the partial-Euclid key-equation form).

    A few interpolate-and-verify attempts run first: any candidate whose
    codeword lies within the radius must be the unique answer, so the
    shortcut never changes the result, only the cost.  Raises
    DecodeFailure when no codeword is within the radius.
    """
    if len(word) != code.n_c:
        raise ValueError(f"word must have {code.n_c} symbols")
    q, k, t = code.q, code.k, code.radius
    if any(not 0 <= s < q for s in word):
        raise ValueError("word symbol out of field range")

    for group in _fast_path_groups(code.n_c, k):
        coeffs = _interpolate([(x, word[x]) for x in group], q)
        if _distance_to_word(coeffs, word, code) <= t:
            return tuple(int(c) for c in (coeffs + [gmpy2.mpz(0)] * k)[:k])

    if t == 0:
        raise DecodeFailure("received word is not a codeword")

    # Key equation: with g0 = prod(x - i) and g1 interpolating the word,
    # run the extended Euclid on (g0, g1) until deg r < (n_c + k) / 2;
    # then r / v is the message polynomial iff <= t errors occurred.
    r0 = list(_gao_modulus(code))
    r1 = _newton_interpolate(word, code)
    v0, v1 = [gmpy2.mpz(0)], [gmpy2.mpz(1)]
    stop = (code.n_c + k + 1) // 2
    while r1 and len(r1) - 1 >= stop:
        quot, rem = _poly_divmod(r0, r1, q)
        v2 = _poly_sub(v0, _poly_mul(quot, v1, q), q)
        r0, r1 = r1, _trim(rem)
        v0, v1 = v1, v2
    if not r1:
        f_poly, rem = [], []  # zero remainder: the zero polynomial
    else:
        f_poly, rem = _poly_divmod(r1, v1, q)
    if _trim(rem):
        raise DecodeFailure("rational interpolant is not polynomial")
    if len(f_poly) > k and any(f_poly[k:]):
        raise DecodeFailure("quotient degree exceeds message degree")
    f_poly = (f_poly + [gmpy2.mpz(0)] * k)[:k]
    if _distance_to_word(f_poly, word, code) > t:
        raise DecodeFailure("nearest candidate is beyond the radius")
    return tuple(int(c) for c in f_poly)


def _poly_mul(a: list, b: list, q) -> list:
    if not a or not b:
        return []
    out = [gmpy2.mpz(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] = (out[i + j] + ca * cb) % q
    return out


def _poly_sub(a: list, b: list, q) -> list:
    n = max(len(a), len(b))
    a = a + [gmpy2.mpz(0)] * (n - len(a))
    b = b + [gmpy2.mpz(0)] * (n - len(b))
    return _trim([(x - y) % q for x, y in zip(a, b)])


def distance_to_message(word: Sequence[int], message: Sequence[int],
                        code: RsCode) -> int:
    """Hamming distance between a word and a message's codeword."""
    return _distance_to_word([gmpy2.mpz(s) for s in message], word, code)


def _nearest_brute(word, code: RsCode, limit: int):
    scored = []
    for msg in product(range(code.q), repeat=code.k):
        cw = rs_encode(msg, code)
        d = sum(1 for a, b in zip(cw, word) if a != b)
        scored.append((d, msg))
    scored.sort()
    return [msg for _, msg in scored[:limit]]


def _nearest_linear(word, code: RsCode, limit: int):
    """Exact nearest-list for k <= 2 without enumerating the field.

    Any codeword agreeing with the word on >= k positions is determined
    by a k-subset of positions, so interpolating all subsets enumerates
    every codeword at distance <= n_c - k; farther codewords are filled
    in lexicographic message order.
    """
    q, n = code.q, code.n_c
    agreements: dict[tuple, int] = {}
    if code.k == 1:
        for y in word:
            agreements[(y,)] = agreements.get((y,), 0) + 1
    else:
        inv_cache = {d: int(gmpy2.invert(d, q)) for d in range(1, n)}
        hits: dict[tuple, int] = {}
        for i in range(n):
            for j in range(i + 1, n):
                c1 = ((word[j] - word[i]) * inv_cache[j - i]) % q
                c0 = (word[i] - c1 * i) % q
                key = (c0, c1)
                hits[key] = hits.get(key, 0) + 1
        for key, m in hits.items():
            # m = C(a, 2) pair hits for agreement a.
            a = int((1 + gmpy2.isqrt(8 * m + 1)) // 2)
            agreements[key] = a
    ranked = sorted(agreements.items(), key=lambda kv: (n - kv[1], kv[0]))
    out = [msg for msg, _ in ranked[:limit]]
    if len(out) >= limit:
        return out

    taken = set(out)
    # Distance n-1 codewords agree on exactly one position.
    if code.k == 1:
        for c in range(q):
            if len(out) == limit:
                return out
            if (c,) not in taken:
                out.append((c,))  # all remaining are distance n, lex order
        return out
    c0 = 0
    while len(out) < limit and c0 < q:
        cands = set()
        for i in range(1, n):
            cands.add(((word[i] - c0) * int(gmpy2.invert(i, q))) % q)
        if c0 == word[0]:
            cands.update(range(min(limit, q)))
        for c1 in sorted(cands):
            if (c0, c1) not in taken and len(out) < limit:
                out.append((c0, c1))
                taken.add((c0, c1))
        c0 += 1
    return out


def rs_nearest_list(word: Sequence[int], code: RsCode, L: int) -> list[tuple[int, ...]]:
    """The L messages whose codewords are nearest the word, distance order,
    ties broken by lexicographic message order.

    Exhaustive enumeration requires q^k <= 2^20; beyond that only k <= 2
    is supported, via exact agreement-set interpolation (every codeword
    at distance <= n_c - k passes through a k-subset of word positions).
    """
    if len(word) != code.n_c:
        raise ValueError(f"word must have {code.n_c} symbols")
    space = code.q ** code.k
    if space <= BRUTE_FORCE_CAP:
        return _nearest_brute(word, code, min(L, space))
    if code.k <= 2:
        return _nearest_linear(word, code, min(L, space))
    raise ValueError("list decoding beyond 2^20 messages requires k <= 2")


# ---------------------------------------------------------------------------
# Seeded hash family


class HashSpec:
    """Seeded universal hash: degree-1 polynomial over a Mersenne prime.

    Position i of the input contributes coefficient a_{i+1} when set, and
    the input length multiplies a_0, so distinct inputs always leave a
    nonzero coefficient combination.  Coefficients are expanded from the
    seed with SHAKE-256 in blocks; the digest is the low output_len bits
    of the field element, giving collision probability at most
    2^(1-output_len) for fixed distinct inputs over a random seed.
    """

    _BLOCK = 256

    def __init__(self, seed: bytes | int, output_len: int):
        if output_len < 1:
            raise ValueError("output_len must be positive")
        if isinstance(seed, int):
            seed = seed.to_bytes(8, "big", signed=False)
        self.seed = seed
        self.output_len = output_len
        exp = next(e for e in _MERSENNE_EXPONENTS if e >= max(output_len, 61))
        self.prime_exp = exp
        self.prime = (1 << exp) - 1
        self._coeff_bytes = exp // 8 + 9
        self._coeffs: list[int] = []

    def coefficient(self, i: int) -> int:
        while i >= len(self._coeffs):
            block = len(self._coeffs) // self._BLOCK
            shake = hashlib.shake_256(self.seed + block.to_bytes(8, "big"))
            raw = shake.digest(self._coeff_bytes * self._BLOCK)
            w = self._coeff_bytes
            self._coeffs.extend(
                int.from_bytes(raw[j * w:(j + 1) * w], "big") % self.prime
                for j in range(self._BLOCK)
            )
        return self._coeffs[i]

    def fold(self, value: int) -> int:
        """Reduce a partial sum modulo the Mersenne prime."""
        p, e = self.prime, self.prime_exp
        value = (value & p) + (value >> e)
        if value >= p:
            value -= p
        return value

    def digest_bits(self, field_value: int) -> str:
        return format(field_value & ((1 << self.output_len) - 1),
                      f"0{self.output_len}b")


def hash_eval(spec: HashSpec, bits: str) -> str:
    """Digest of a bit string; deterministic in (seed, input)."""
    acc = spec.coefficient(0) * len(bits)
    for i, b in enumerate(bits):
        if b == "1":
            acc += spec.coefficient(i + 1)
    return spec.digest_bits(spec.fold(acc))
