"""Relations with coefficients in {-1, 0, 1} and quasi-independent subsets.

A finite set is quasi-independent when its subset sums are pairwise
distinct, equivalently when the only {-1,0,1} relation is the zero one.
Counting uses meet-in-the-middle over sign assignments; the quasi-independence
test and the greedy extractor work on subset sums instead, so the two routes
check each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AliasError, CapExceeded, DomainError
from .spectrum import FreqSet, GroupSpec

DEFAULT_CAP = 1 << 25
MAX_WITNESSES = 64
_INT64_SAFE = 2**62


class _Arith:
    """Vectorized group arithmetic on arrays of elements.

    Scalar groups use 1-d arrays; Z(p)^N uses (k, N) digit arrays. Integer
    arithmetic falls back to Python ints (object dtype) when sums could
    overflow int64.
    """

    def __init__(self, group: GroupSpec, elements: Sequence):
        self.group = group
        if group.is_vector:
            self.p = group.p
            self.N = group.N
            self.base = np.array(elements, dtype=np.int64).reshape(len(elements), group.N) % group.p
            if group.p**group.N < _INT64_SAFE:
                self.weights = group.p ** np.arange(group.N, dtype=np.int64)
                self.key_dtype = np.int64
            else:
                # pack digit rows into fixed-width byte strings
                self.weights = None
                self.key_dtype = np.uint8 if group.p < 256 else np.int64
        else:
            mod = group.modulus
            total = sum(abs(int(e)) for e in elements)
            if mod is None and total >= _INT64_SAFE:
                self.dtype = object
            else:
                self.dtype = np.int64
            self.mod = mod
            self.base = np.array([int(e) for e in elements], dtype=self.dtype)

    def zero(self) -> np.ndarray:
        if self.group.is_vector:
            return np.zeros((1, self.N), dtype=np.int64)
        return np.zeros(1, dtype=self.dtype)

    def element(self, i: int) -> np.ndarray:
        return self.base[i]

    def add(self, arr, x):
        out = arr + x
        if self.group.is_vector:
            return out % self.p
        return out % self.mod if self.mod else out

    def sub(self, arr, x):
        out = arr - x
        if self.group.is_vector:
            return out % self.p
        return out % self.mod if self.mod else out

    def neg(self, arr):
        if self.group.is_vector:
            return (-arr) % self.p
        return (-arr) % self.mod if self.mod else -arr

    def keys(self, arr) -> np.ndarray:
        """Hashable/sortable 1-d key per element."""
        if self.group.is_vector:
            if self.weights is None:
                packed = np.ascontiguousarray(arr.astype(self.key_dtype))
                return packed.view(np.dtype((np.void, packed.shape[1] * packed.itemsize))).ravel()
            return arr @ self.weights
        return arr

    def concat(self, parts):
        return np.concatenate(parts, axis=0)

    def signed_sums(self, indices: Sequence[int]) -> np.ndarray:
        """All 3^len sums; element i of ``indices`` has digit (j // 3^i) % 3 in {0:0, 1:+1, 2:-1}."""
        sums = self.zero()
        for i in indices:
            x = self.element(i)
            sums = self.concat([sums, self.add(sums, x), self.sub(sums, x)])
        return sums

    def subset_sums(self, indices: Sequence[int]) -> np.ndarray:
        """All 2^len sums; element i of ``indices`` is bit i of the position."""
        sums = self.zero()
        for i in indices:
            sums = self.concat([sums, self.add(sums, self.element(i))])
        return sums


def _decode_signs(index: int, length: int) -> list[int]:
    digits = []
    for _ in range(length):
        index, d = divmod(index, 3)
        digits.append((0, 1, -1)[d])
    return digits


def _elements(A) -> tuple[GroupSpec, tuple]:
    if isinstance(A, FreqSet):
        return A.group, A.elements
    return GroupSpec.integers(), tuple(int(a) for a in A)


def group_sum(group: GroupSpec, elements: Sequence, signs: Sequence[int]):
    """Exact ``sum signs_n * n`` in the group, with Python integers."""
    if group.is_vector:
        total = [0] * group.N
        for e, s in zip(elements, signs):
            for i, c in enumerate(e):
                total[i] += s * c
        return tuple(c % group.p for c in total)
    total = sum(s * int(e) for e, s in zip(elements, signs))
    return total % group.modulus if group.modulus else total


@dataclass(frozen=True)
class RelationCertificate:
    """A sign vector over a frequency set whose signed sum vanishes."""

    set: FreqSet
    signs: tuple

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if len(signs) != len(self.set):
            raise DomainError("sign vector and set differ in length")
        if any(s not in (-1, 0, 1) for s in signs):
            raise DomainError("signs must lie in {-1, 0, 1}")
        if not self.set.group.is_zero(group_sum(self.set.group, self.set.elements, signs)):
            raise DomainError(f"signs {signs} do not define a relation")
        object.__setattr__(self, "signs", signs)

    @property
    def trivial(self) -> bool:
        return not any(self.signs)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.signs) if s)


@dataclass
class RelationReport:
    count: int
    certificates: list[RelationCertificate] = field(default_factory=list)
    cap: int = DEFAULT_CAP

    @property
    def quasi_independent(self) -> bool:
        return self.count == 1

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "quasi_independent": self.quasi_independent,
            "witnesses": [list(c.signs) for c in self.certificates],
            "cap": self.cap,
        }


def _as_freqset(A) -> FreqSet:
    return A if isinstance(A, FreqSet) else FreqSet.of(A)


def _mitm_count(arith: _Arith, n: int, keep: bool):
    half = n // 2
    left_idx, right_idx = list(range(half)), list(range(half, n))
    left = arith.keys(arith.signed_sums(left_idx))
    right_neg = arith.keys(arith.neg(arith.signed_sums(right_idx)))
    uniq, inverse, counts = np.unique(left, return_inverse=True, return_counts=True)
    pos = np.searchsorted(uniq, right_neg)
    pos_clip = np.minimum(pos, len(uniq) - 1)
    hit = (pos < len(uniq)) & (uniq[pos_clip] == right_neg)
    total = int(counts[pos_clip[hit]].astype(np.int64).sum()) if hit.any() else 0
    witnesses = []
    if keep:
        order = np.argsort(inverse, kind="stable")
        starts = np.concatenate([[0], np.cumsum(counts)])
        for j in np.flatnonzero(hit):
            u = pos_clip[j]
            for li in order[starts[u]:starts[u + 1]]:
                signs = _decode_signs(int(li), len(left_idx)) + _decode_signs(int(j), len(right_idx))
                if any(signs):
                    witnesses.append(signs)
                if len(witnesses) >= MAX_WITNESSES:
                    return total, witnesses
    return total, witnesses


def _mitm_work(n: int) -> int:
    return 3 ** (n // 2) + 3 ** (n - n // 2)


def relation_count(A, cap: int = DEFAULT_CAP, keep_witnesses: bool = False) -> RelationReport:
    """Exact ``|R(A)|``, the number of {-1,0,1} relations including the zero one.

    ``cap`` bounds the number of half-sums enumerated. When it is exceeded the
    raised :class:`CapExceeded` carries, as ``partial``, the exact count of the
    longest prefix of ``A`` that fits; relations of a subset extend by zeros,
    so this is a lower bound.
    """
    A = _as_freqset(A)
    if cap < 1:
        raise DomainError("cap must be >= 1")
    n = len(A)
    arith = _Arith(A.group, A.elements)
    if _mitm_work(n) > cap:
        m = n
        while m > 0 and _mitm_work(m) > cap:
            m -= 1
        lower = _mitm_count(arith, m, False)[0] if m else 1
        raise CapExceeded(f"3^{n} sign vectors exceed cap {cap}", partial=lower)
    total, raw = _mitm_count(arith, n, keep_witnesses)
    certs = [RelationCertificate(A, tuple(s)) for s in raw]
    return RelationReport(count=total, certificates=certs, cap=cap)


def relation_count_bruteforce(A) -> int:
    """Scan all 3^n sign vectors with exact integer arithmetic (test oracle)."""
    import itertools

    group, elems = _elements(A)
    return sum(
        1 for signs in itertools.product((-1, 0, 1), repeat=len(elems))
        if group.is_zero(group_sum(group, elems, signs))
    )


def _collision_signs(i1: int, i2: int, n: int) -> tuple[int, ...]:
    return tuple(((i1 >> b) & 1) - ((i2 >> b) & 1) for b in range(n))


def is_quasi_independent(A, cap: int = DEFAULT_CAP) -> tuple[bool, RelationCertificate | None]:
    """True iff the 2^|A| subset sums are pairwise distinct.

    On failure the witness is the difference of two colliding subsets.
    """
    A = _as_freqset(A)
    n = len(A)
    if 2**n > cap:
        raise CapExceeded(f"2^{n} subset sums exceed cap {cap}", partial=None)
    arith = _Arith(A.group, A.elements)
    keys = arith.keys(arith.subset_sums(range(n)))
    order = np.argsort(keys, kind="stable")
    ordered = keys[order]
    dup = np.flatnonzero(ordered[1:] == ordered[:-1])
    if dup.size == 0:
        return True, None
    j = int(dup[0])
    signs = _collision_signs(int(order[j]), int(order[j + 1]), n)
    return False, RelationCertificate(A, signs)


@dataclass
class ExtractionResult:
    subset: FreqSet
    retained: FreqSet
    strategy: str
    stats: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Greedy:
    pass


@dataclass(frozen=True)
class RandomThinning:
    delta: float
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")


def greedy_quasi_independent(A, cap: int = DEFAULT_CAP) -> FreqSet:
    """Scan ``A`` in order, admitting ``x`` iff ``x`` is not in ``S - S``.

    ``S`` is the subset-sum set of the admitted elements; ``x in S - S`` is
    exactly the condition that ``S`` and ``S + x`` meet.
    """
    A = _as_freqset(A)
    group = A.group
    arith = _Arith(group, A.elements)
    sums = arith.zero()
    sum_keys = arith.keys(sums)
    kept = []
    for i in range(len(A)):
        shifted = arith.add(sums, arith.element(i))
        shifted_keys = arith.keys(shifted)
        if np.isin(shifted_keys, sum_keys).any():
            continue
        if 2 * len(shifted_keys) > cap:
            raise CapExceeded(f"subset-sum set would exceed cap {cap}", partial=A.subset(kept))
        kept.append(i)
        sums = arith.concat([sums, shifted])
        sum_keys = np.concatenate([sum_keys, shifted_keys])
    return A.subset(kept)


def thinning_mask(n: int, delta: float, seed: int) -> np.ndarray:
    """Keep element i with probability delta/2, drawn from stream (seed, i)."""
    return np.array([np.random.default_rng([seed, i]).random() < delta / 2 for i in range(n)], dtype=bool)


def extract_quasi_independent(A, strategy=Greedy(), cap: int = DEFAULT_CAP) -> ExtractionResult:
    """Extract a quasi-independent ``B`` from ``A``; the result is re-verified."""
    A = _as_freqset(A)
    if len(A) == 0:
        raise DomainError("cannot extract from an empty set")
    if isinstance(strategy, RandomThinning):
        mask = thinning_mask(len(A), strategy.delta, strategy.seed)
        retained = A.subset(np.flatnonzero(mask))
        name = "random_thinning"
    elif isinstance(strategy, Greedy):
        retained = A
        name = "greedy"
    else:
        raise DomainError(f"unknown strategy {strategy!r}")
    B = greedy_quasi_independent(retained, cap=cap)
    if len(B) and 2 ** len(B) <= cap:
        ok, _ = is_quasi_independent(B, cap=cap)
        assert ok, "greedy produced a dependent set"
    stats: dict = {"input_size": len(A), "retained_size": len(retained), "output_size": len(B)}
    if name == "random_thinning":
        try:
            stats["retained_relations"] = relation_count(retained, cap=cap).count
        except CapExceeded as exc:
            stats["retained_relations"] = {"capped": True, "lower_bound": exc.partial}
    return ExtractionResult(subset=B, retained=retained, strategy=name, stats=stats)


def mesh_count(L, ks: Sequence[int], s: int, budget: int = 2_000_000) -> int:
    """``|L ∩ {sum k_i m_i : sum |m_i| <= 2^s}|`` by breadth-first sum generation."""
    L = _as_freqset(L)
    if s < 0:
        raise DomainError("s must be >= 0")
    ks = [int(k) for k in ks]
    if not ks:
        raise DomainError("need at least one k")
    radius = 2**s
    if radius * len(ks) > budget:
        raise CapExceeded(f"mesh radius {radius} with {len(ks)} generators exceeds budget {budget}")
    if len(L) == 0:
        return 0
    steps = np.array(sorted({k for k in ks} | {-k for k in ks}), dtype=np.int64)
    seen = np.zeros(1, dtype=np.int64)
    frontier = seen
    for _ in range(radius):
        cand = np.unique((frontier[:, None] + steps[None, :]).ravel())
        frontier = np.setdiff1d(cand, seen, assume_unique=True)
        if frontier.size == 0:
            break
        seen = np.union1d(seen, frontier)
        if seen.size > budget:
            raise CapExceeded(f"reachable set exceeds budget {budget}")
    return int(np.isin(np.array(L.elements, dtype=np.int64), seen).sum())


def dyadic_block(k: int) -> int:
    """The n with ``k in (2^n, 2^(n+1)]``, for positive integers (n = -1 for k = 1)."""
    return (k - 1).bit_length() - 1


@dataclass
class LacunaryDecomposition:
    parts: list[list[int]]
    block_bound: int
    q: float


def lacunary_decompose(L, q: float = 2.0) -> LacunaryDecomposition:
    """First-fit split of sorted ``L`` into runs with ``next/prev >= q``.

    Also reports ``sup_n |L ∩ (2^n, 2^(n+1)]|``.
    """
    elems = sorted(int(e) for e in (L.elements if isinstance(L, FreqSet) else L))
    if not q > 1:
        raise DomainError(f"q must exceed 1, got {q}")
    if any(e <= 0 for e in elems):
        raise DomainError("lacunary decomposition needs positive frequencies")
    parts: list[list[int]] = []
    for e in elems:
        for part in parts:
            if e >= q * part[-1]:
                part.append(e)
                break
        else:
            parts.append([e])
    for part in parts:
        assert all(b >= q * a for a, b in zip(part, part[1:]))
    counts: dict[int, int] = {}
    for e in elems:
        counts[dyadic_block(e)] = counts.get(dyadic_block(e), 0) + 1
    return LacunaryDecomposition(parts=parts, block_bound=max(counts.values(), default=0), q=q)


def relation_integral(A, M: int | None = None) -> float:
    """Grid value of ``∫ prod_{n in A} (1 + e^{int} + e^{-int}) dm`` for integer ``A``."""
    elems = [int(e) for e in (A.elements if isinstance(A, FreqSet) else A)]
    top = sum(abs(e) for e in elems)
    if M is None:
        M = 1 << max(1, (2 * top + 1).bit_length())
    if M < 2 * top + 1:
        raise AliasError(f"grid {M} aliases the product; need M >= {2 * top + 1}")
    t = 2 * np.pi * np.arange(M) / M
    prod = np.ones(M)
    for e in elems:
        prod *= 1 + 2 * np.cos(e * t)
    return float(prod.mean())
