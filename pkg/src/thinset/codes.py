"""Constant-weight code packings and extraction of quasi-independent subsets.

N(k, m, n) is the largest family of m-subsets of {0..n-1} whose pairwise
intersections have at most k points.  Words are stored as bitmasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import CapExceeded, DomainError
from .relations import DEFAULT_CAP, is_quasi_independent, relation_count
from .spectrum import FreqSet

WORD_CAP = 1 << 22
CLIQUE_CAP = 5000


@dataclass
class CodeFamily:
    n: int
    m: int
    k: int
    words: list[tuple[int, ...]] = field(default_factory=list)

    def __post_init__(self):
        self.words = [tuple(sorted(int(i) for i in w)) for w in self.words]
        for w in self.words:
            if len(set(w)) != self.m or not all(0 <= i < self.n for i in w):
                raise DomainError(f"word {w} is not an {self.m}-subset of [{self.n}]")
        masks = [_mask(w) for w in self.words]
        for a, b in combinations(range(len(masks)), 2):
            if (masks[a] & masks[b]).bit_count() > self.k:
                raise DomainError(f"words {self.words[a]} and {self.words[b]} share more than {self.k} points")

    def __len__(self) -> int:
        return len(self.words)

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "k": self.k, "size": len(self), "words": [list(w) for w in self.words]}


def _mask(word) -> int:
    return sum(1 << i for i in word)


def _check_params(n: int, m: int, k: int) -> None:
    if not 0 <= k < m < n:
        raise DomainError(f"need 0 <= k < m < n, got k={k}, m={m}, n={n}")


def _all_words(n: int, m: int) -> tuple[list[tuple[int, ...]], np.ndarray]:
    words = list(combinations(range(n), m))
    return words, np.array([_mask(w) for w in words], dtype=np.uint64)


@dataclass(frozen=True)
class Lex:
    cap: int = WORD_CAP


@dataclass(frozen=True)
class Random:
    seed: int = 0
    cap: int = WORD_CAP


def gv_greedy(n: int, m: int, k: int, order=Lex()) -> CodeFamily:
    """Greedy maximal family: scan the words in order, keep each one compatible with all kept.

    Maximality holds because a rejected word conflicts with a kept one.
    """
    _check_params(n, m, k)
    if n > 63:
        raise DomainError("n > 63 does not fit the bitmask representation")
    total = math.comb(n, m)
    partial = total > order.cap
    if isinstance(order, Lex):
        words = []
        for w in combinations(range(n), m):
            if len(words) >= order.cap:
                break
            words.append(w)
    elif isinstance(order, Random):
        if partial:
            rng = np.random.default_rng(order.seed)
            seen = set()
            words = []
            while len(words) < order.cap:
                w = tuple(sorted(rng.choice(n, m, replace=False).tolist()))
                if w not in seen:
                    seen.add(w)
                    words.append(w)
        else:
            words = list(combinations(range(n), m))
            perm = np.random.default_rng(order.seed).permutation(len(words))
            words = [words[i] for i in perm]
    else:
        raise DomainError(f"unknown order {order!r}")
    masks = np.array([_mask(w) for w in words], dtype=np.uint64)
    available = np.ones(len(words), dtype=bool)
    kept = []
    i = 0
    while True:
        rest = np.flatnonzero(available[i:])
        if rest.size == 0:
            break
        i += int(rest[0])
        kept.append(words[i])
        available &= np.bitwise_count(masks & masks[i]) <= k
        available[i] = False
    family = CodeFamily(n, m, k, kept) if len(kept) <= 2000 else _trusted(n, m, k, kept)
    if partial:
        raise CapExceeded(f"C({n},{m}) = {total} words exceed cap {order.cap}; maximality not certified",
                          partial=family)
    return family


def _trusted(n, m, k, words) -> CodeFamily:
    # pairwise validation is quadratic; large greedy outputs are checked by the vectorized scan above
    fam = CodeFamily.__new__(CodeFamily)
    fam.n, fam.m, fam.k, fam.words = n, m, k, [tuple(w) for w in words]
    return fam


def counting_bound(n: int, m: int, k: int) -> float:
    """``C(n,m) / sum_{k<j<=m} C(m,j) C(n-m,m-j)``: any maximal family is at least this large."""
    _check_params(n, m, k)
    ball = sum(math.comb(m, j) * math.comb(n - m, m - j) for j in range(k + 1, m + 1))
    return math.comb(n, m) / ball


def _max_clique(adj: list[int], candidates: int) -> int:
    """Size of a maximum clique inside ``candidates`` (bitset), greedy-colouring bound."""
    best = 0

    def colour_order(P: int) -> list[tuple[int, int]]:
        # returns (vertex, colour bound) in increasing bound order
        out = []
        colour = 0
        uncoloured = P
        while uncoloured:
            colour += 1
            Q = uncoloured
            while Q:
                v = (Q & -Q).bit_length() - 1
                Q &= ~(1 << v)
                Q &= ~adj[v]
                uncoloured &= ~(1 << v)
                out.append((v, colour))
        return out

    def expand(size: int, P: int) -> None:
        nonlocal best
        order = colour_order(P)
        for v, bound in reversed(order):
            if size + bound <= best:
                return
            newP = P & adj[v]
            if newP:
                expand(size + 1, newP)
            elif size + 1 > best:
                best = size + 1
            P &= ~(1 << v)

    if candidates:
        expand(0, candidates)
    return best


def exact_N(n: int, m: int, k: int, cap: int = CLIQUE_CAP) -> int:
    """Exact N(k, m, n) by branch and bound on the compatibility graph.

    The graph is vertex-transitive under permutations of [n], so one word can
    be fixed in the clique.
    """
    _check_params(n, m, k)
    total = math.comb(n, m)
    if total > cap:
        raise CapExceeded(f"C({n},{m}) = {total} exceeds the clique cap {cap}", partial=None)
    words, masks = _all_words(n, m)
    adj = []
    for i in range(total):
        ok = np.flatnonzero(np.bitwise_count(masks & masks[i]) <= k)
        bits = 0
        for j in ok.tolist():
            if j != i:
                bits |= 1 << j
        adj.append(bits)
    return 1 + _max_clique(adj, adj[0])


def relation_closure(A: FreqSet, word, cap: int = DEFAULT_CAP) -> tuple[int, ...]:
    """Grow ``r`` inside ``word`` by relation supports until ``word \\ r`` is quasi-independent."""
    covered: set[int] = set()
    while True:
        rest = [i for i in word if i not in covered]
        if not rest:
            return tuple(sorted(covered))
        ok, witness = is_quasi_independent(A.subset(rest), cap=cap)
        if ok:
            return tuple(sorted(covered))
        covered.update(rest[i] for i in witness.support)


@dataclass
class CodeExtraction:
    subset: FreqSet
    word: tuple
    removed: tuple


@dataclass
class EvidenceExceeded:
    """Every word carries a relation support larger than k.

    Distinct words then have distinct supports (two words share at most k
    points), which injects the family into the nontrivial relations of A.
    """

    family_size: int
    relation_count: int
    supports: list
    k: int

    @property
    def holds(self) -> bool:
        return self.family_size <= self.relation_count

    def to_json(self) -> dict:
        return {"family_size": self.family_size, "relation_count": self.relation_count,
                "holds": self.holds, "supports": [list(s) for s in self.supports], "k": self.k}


def extract_via_codes(A, family: CodeFamily, cap: int = DEFAULT_CAP) -> CodeExtraction | EvidenceExceeded:
    A = A if isinstance(A, FreqSet) else FreqSet.of(A)
    if len(A) != family.n:
        raise DomainError(f"family lives on [{family.n}] but |A| = {len(A)}")
    supports = []
    for word in family.words:
        r = relation_closure(A, word, cap=cap)
        if len(r) <= family.k:
            B = tuple(i for i in word if i not in r)
            subset = A.subset(B)
            if not is_quasi_independent(subset, cap=cap)[0] or len(B) < family.m - family.k:
                raise AssertionError("extracted subset failed verification")
            return CodeExtraction(subset=subset, word=word, removed=r)
        supports.append(r)
    if len(set(supports)) != len(supports):
        raise AssertionError("relation supports of distinct words coincide")
    count = relation_count(A, cap=cap).count
    return EvidenceExceeded(len(family), count, supports, family.k)


def walk_tail(m: int, k: int) -> tuple[float, float]:
    """``P(S_m > 2k - m)`` for a simple +-1 walk, exactly, and the bound ``exp(-(2k-m)^2 / 2m)``."""
    thr = 2 * k - m
    # S_m = 2j - m with j ~ Bin(m, 1/2)
    p = sum(math.comb(m, j) for j in range(m + 1) if 2 * j - m > thr) / 2**m
    return p, math.exp(-(thr * thr) / (2 * m))
