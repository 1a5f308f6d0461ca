"""Linear algebra over GF(p) and partition of vector lists into independent parts.

The partition routine is the classical matroid-partition augmentation: each
new vector enters through a shortest exchange path across the current parts.
When no path exists the set of vectors reachable from the new one has rank
below ``|A|/k``, which is returned as the obstruction.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .relations import is_quasi_independent
from .spectrum import FreqSet, GroupSpec, _is_prime


@dataclass(frozen=True)
class GFVectorSet:
    p: int
    N: int
    vectors: tuple

    def __post_init__(self):
        if not _is_prime(self.p):
            raise DomainError(f"p must be prime, got {self.p}")
        vecs = tuple(tuple(int(c) % self.p for c in v) for v in self.vectors)
        for v in vecs:
            if len(v) != self.N:
                raise DomainError(f"vector {v} does not have length {self.N}")
            if not any(v):
                raise DomainError("zero vector is not allowed")
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def of(cls, p: int, vectors: Sequence[Sequence[int]]) -> "GFVectorSet":
        vectors = [list(v) for v in vectors]
        if not vectors:
            raise DomainError("need at least one vector to infer the dimension")
        return cls(p, len(vectors[0]), tuple(map(tuple, vectors)))

    def __len__(self) -> int:
        return len(self.vectors)

    def matrix(self, subset: Sequence[int] | None = None) -> np.ndarray:
        idx = range(len(self)) if subset is None else subset
        return np.array([self.vectors[i] for i in idx], dtype=np.int64).reshape(-1, self.N)


def _row_reduce(rows: np.ndarray, p: int) -> int:
    """Rank of the row space of ``rows`` over GF(p)."""
    a = rows.copy() % p
    rank = 0
    n_rows, n_cols = a.shape
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if a[r, col]), None)
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        a[rank] = (a[rank] * pow(int(a[rank, col]), -1, p)) % p
        others = a[:, col].copy()
        others[rank] = 0
        a = (a - np.outer(others, a[rank])) % p
        rank += 1
        if rank == n_rows:
            break
    return rank


def gf_rank(V: GFVectorSet, subset: Sequence[int] | None = None) -> int:
    idx = list(range(len(V))) if subset is None else list(subset)
    if any(not 0 <= i < len(V) for i in idx):
        raise DomainError("subset index out of range")
    if not idx:
        return 0
    return _row_reduce(V.matrix(idx), V.p)


def _combination(basis: np.ndarray, target: np.ndarray, p: int) -> np.ndarray | None:
    """Coefficients c with ``c @ basis == target`` mod p, or None if outside the span.

    ``basis`` rows are assumed independent, so the solution is unique.
    """
    k = basis.shape[0]
    if k == 0:
        return None if target.any() else np.zeros(0, dtype=np.int64)
    aug = np.concatenate([basis.T % p, target.reshape(-1, 1) % p], axis=1)
    rows, cols = aug.shape
    pivots = []
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, rows) if aug[i, c]), None)
        if piv is None:
            continue
        aug[[r, piv]] = aug[[piv, r]]
        aug[r] = (aug[r] * pow(int(aug[r, c]), -1, p)) % p
        col = aug[:, c].copy()
        col[r] = 0
        aug = (aug - np.outer(col, aug[r])) % p
        pivots.append(c)
        r += 1
    if aug[r:, k].any():
        return None
    coeffs = np.zeros(k, dtype=np.int64)
    for i, c in enumerate(pivots):
        coeffs[c] = aug[i, k]
    return coeffs


@dataclass
class Partition:
    parts: list[list[int]]

    def to_json(self) -> dict:
        return {"partition": self.parts}


@dataclass
class FailureWitness:
    """A subset ``A`` with ``rank(A) < |A| / k``, so no k-partition exists."""

    subset: list[int]
    rank: int
    k: int

    def to_json(self) -> dict:
        return {"witness": self.subset, "rank": self.rank, "k": self.k}


class _PartitionState:
    def __init__(self, V: GFVectorSet, k: int):
        self.V = V
        self.k = k
        self.parts: list[list[int]] = [[] for _ in range(k)]
        self.owner: dict[int, int] = {}

    def circuit(self, part: int, y: int) -> list[int] | None:
        """Members of ``part`` that can be swapped out for ``y``; None if ``part + y`` is independent."""
        members = self.parts[part]
        coeffs = _combination(self.V.matrix(members), np.array(self.V.vectors[y]), self.V.p)
        if coeffs is None:
            return None
        return [m for m, c in zip(members, coeffs) if c]

    def insert(self, x: int) -> list[int] | None:
        """Augment along a shortest exchange path; return the reachable set on failure."""
        parent: dict[int, tuple[int | None, int | None]] = {x: (None, None)}
        queue = deque([x])
        while queue:
            y = queue.popleft()
            for part in range(self.k):
                if self.owner.get(y) == part:
                    continue
                swap_out = self.circuit(part, y)
                if swap_out is None:
                    self._apply(y, part, parent)
                    return None
                for z in swap_out:
                    if z not in parent:
                        parent[z] = (y, part)
                        queue.append(z)
        return sorted(parent)

    def _apply(self, y: int, part: int, parent) -> None:
        # walk back: y goes into `part`; whoever displaced y takes y's old slot
        while y is not None:
            old = self.owner.get(y)
            if old is not None:
                self.parts[old].remove(y)
            self.parts[part].append(y)
            self.owner[y] = part
            prev, _ = parent[y]
            if prev is None:
                break
            part = old
            y = prev


def horn_rado_partition(V: GFVectorSet, k: int) -> Partition | FailureWitness:
    """Split ``V`` into at most ``k`` linearly independent parts, or certify impossibility."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    state = _PartitionState(V, k)
    for x in range(len(V)):
        reachable = state.insert(x)
        if reachable is not None:
            rank = gf_rank(V, reachable)
            if not rank * k < len(reachable):
                raise AssertionError("exchange graph produced an invalid obstruction")
            return FailureWitness(subset=reachable, rank=rank, k=k)
    parts = [sorted(part) for part in state.parts if part]
    for part in parts:
        if gf_rank(V, part) != len(part):
            raise AssertionError(f"part {part} is dependent")
    return Partition(parts=parts)


def independence_vs_quasi(V: GFVectorSet, cap: int = 1 << 25) -> dict:
    """Linear independence over GF(p) against quasi-independence in Z(p)^N.

    Repeated vectors give the relation ``v - v = 0`` and are never
    quasi-independent.
    """
    independent = gf_rank(V) == len(V)
    if len(set(V.vectors)) < len(V):
        quasi = False
    else:
        quasi, _ = is_quasi_independent(FreqSet(GroupSpec.prime_power(V.p, V.N), V.vectors), cap=cap)
    if independent and not quasi:
        raise AssertionError("linearly independent set failed quasi-independence")
    return {"independent": independent, "quasi_independent": quasi}
