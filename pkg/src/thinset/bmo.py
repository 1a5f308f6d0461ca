"""BMO norms on the discretized circle, Fejer and trapezoid kernels.

Arcs are runs of consecutive grid points ``start, start+1, ..., start+len-1``
taken mod M, each with normalized counting measure.  The norm is

    |mean f| + sup_I || f - f_I ||_{X(dm_I)}

with X either L1 or the Orlicz space psi_a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import AliasError, DomainError
from .relations import dyadic_block, lacunary_decompose
from .spectrum import SampledFunction, TrigPoly, fejer_poly, lp_norm, next_pow2, synth_eval
from .subgauss import psi_norm_rows


@dataclass(frozen=True)
class ArcFamily:
    """All arcs of the listed lengths, at every grid start."""

    M: int
    lengths: tuple
    scheme: str

    def __post_init__(self):
        if any(not 1 <= L <= self.M for L in self.lengths):
            raise DomainError(f"arc lengths must lie in [1, {self.M}]")

    @classmethod
    def dyadic(cls, M: int) -> "ArcFamily":
        return cls(M, tuple(1 << j for j in range(M.bit_length()) if 1 << j <= M), "DyadicLengths")

    @classmethod
    def all_grid(cls, M: int) -> "ArcFamily":
        return cls(M, tuple(range(1, M + 1)), "AllGridArcs")

    @property
    def arcs(self) -> list[tuple[int, int]]:
        return [(s, L) for L in self.lengths for s in range(self.M)]

    def __len__(self) -> int:
        return self.M * len(self.lengths)


@dataclass(frozen=True)
class Mean1:
    pass


@dataclass(frozen=True)
class Psi:
    a: float = 2.0


def _windows(values: np.ndarray, L: int) -> np.ndarray:
    """Row s holds ``values[s : s+L]`` with wraparound."""
    ext = np.concatenate([values, values[: L - 1]])
    return sliding_window_view(ext, L)


def arc_oscillations(f: SampledFunction, flavor=Mean1(), arcs: ArcFamily | None = None) -> np.ndarray:
    """Per-arc ``||f - f_I||`` in the order of ``arcs.arcs``."""
    values = np.asarray(f.values)
    M = values.size
    arcs = ArcFamily.dyadic(M) if arcs is None else arcs
    if arcs.M != M:
        raise DomainError(f"arc family is for M={arcs.M}, samples have M={M}")
    if isinstance(flavor, Psi) and not flavor.a > 0:
        raise DomainError("psi_a needs a > 0")
    ext = np.concatenate([values, values])
    prefix = np.concatenate([[0], np.cumsum(ext)])
    out = []
    for L in arcs.lengths:
        means = (prefix[L: L + M] - prefix[:M]) / L
        dev = np.abs(_windows(values, L) - means[:, None])
        if isinstance(flavor, Mean1):
            out.append(dev.mean(axis=1))
        elif isinstance(flavor, Psi):
            out.append(psi_norm_rows(dev, flavor.a, iters=48))
        else:
            raise DomainError(f"unknown flavor {flavor!r}")
    return np.concatenate(out)


def bmo_norm(f: SampledFunction, flavor=Mean1(), arcs: ArcFamily | None = None) -> float:
    """``|mean f| + max_I ||f - f_I||`` over the arc family (dyadic lengths by default)."""
    if not np.allclose(f.weights, f.weights[0], rtol=0, atol=1e-15):
        raise DomainError("BMO norms are defined for uniform grid samples")
    return float(abs(np.mean(f.values)) + arc_oscillations(f, flavor, arcs).max())


def bmo_bruteforce(values, flavor=Mean1()) -> float:
    """All-arcs Mean1 norm by direct summation, an oracle for small M."""
    values = np.asarray(values)
    M = values.size
    best = 0.0
    for s in range(M):
        for L in range(1, M + 1):
            seg = values[(s + np.arange(L)) % M]
            best = max(best, float(np.mean(np.abs(seg - seg.mean()))))
    return abs(values.mean()) + best


def trapezoid_coefficient(n: int, k: int) -> Fraction:
    """phi_n(k): 0 at 0, linear up to 1 on [2^n, 2^(n+1)], linear down to 0 at 3 * 2^n."""
    lo, hi, end = 1 << n, 1 << (n + 1), 3 << n
    if k <= 0 or k >= end:
        return Fraction(0)
    if k < lo:
        return Fraction(k, lo)
    if k <= hi:
        return Fraction(1)
    return Fraction(end - k, lo)


def _fejer_coefficient(N: int, k: int) -> Fraction:
    return max(Fraction(0), 1 - Fraction(abs(k), N))


@dataclass
class TrapezoidSpec:
    n: int
    coefficients: dict
    poly: TrigPoly
    decomposition: tuple
    l1_norm: float
    grid: int


def trapezoid_poly(n: int, M: int | None = None) -> TrapezoidSpec:
    """``P_n = sum_k phi_n(k) e^{ikt}`` with its Fejer decomposition checked in rational arithmetic.

    With ``c = 2^n + 2^(n-1)``:  ``phi_n(k) = 3/2 F_c(k-c) - 1/2 F_{2^(n-1)}(k-c)``.
    """
    if n < 1:
        raise DomainError(f"level must be >= 1, got {n}")
    c = (1 << n) + (1 << (n - 1))
    half = 1 << (n - 1)
    end = 3 << n
    coeffs = {k: trapezoid_coefficient(n, k) for k in range(0, end + 1)}
    for k in range(-end, 2 * end + 1):
        phi = trapezoid_coefficient(n, k)
        combo = Fraction(3, 2) * _fejer_coefficient(c, k - c) - Fraction(1, 2) * _fejer_coefficient(half, k - c)
        if phi != combo:
            raise AssertionError(f"Fejer decomposition fails at k={k}: {phi} != {combo}")
    poly = TrigPoly.of({k: float(v) for k, v in coeffs.items() if v})
    grid = 4 * end if M is None else M
    if grid < 4 * end:
        raise AliasError(f"evaluation grid {grid} is below 4 * {end}")
    l1 = lp_norm(synth_eval(poly, grid), 1)
    return TrapezoidSpec(n=n, coefficients=coeffs, poly=poly,
                         decomposition=((Fraction(3, 2), c, c), (Fraction(-1, 2), half, c)),
                         l1_norm=l1, grid=grid)


def fejer_l1(N: int, M: int | None = None) -> float:
    M = next_pow2(4 * N) if M is None else M
    return lp_norm(synth_eval(fejer_poly(N), M), 1)


def pairing_identity(f: TrigPoly, n: int, M: int | None = None, tol: float = 1e-9) -> tuple[float, float]:
    """``sum_k phi_n(n_k) x_k / 2`` against the grid mean of ``f * Re(P_n)``.

    Parseval identifies the two for positive spectra: ``f P_n`` has no
    constant term and ``f conj(P_n)`` picks out ``phi_n(n_k) x_k``.
    """
    if any(k <= 0 for k in f.coeffs) and any(f.coeffs.get(k, 0) for k in f.coeffs if k <= 0):
        raise DomainError("pairing identity is stated for positive spectra")
    top = max(f.coeffs, default=0) + (3 << n)
    # each factor is sampled alias-free, which also resolves the product
    if M is None:
        M = next_pow2(2 * top + 1)
    if M < 2 * top + 1:
        raise AliasError(f"grid {M} aliases f * P_n; need M >= {2 * top + 1}")
    lhs = sum(float(trapezoid_coefficient(n, k)) * c for k, c in f.coeffs.items()) / 2
    P = synth_eval(trapezoid_poly(n, max(M, 4 * (3 << n))).poly, M)
    F = synth_eval(f, M)
    rhs = np.mean(F.values * P.values.real)
    scale = max(1.0, sum(abs(c) for c in f.coeffs.values()))
    if abs(lhs - rhs) > tol * scale:
        raise AssertionError(f"pairing identity off by {abs(lhs - rhs)}")
    return complex(lhs), complex(rhs)


def block_phi_sums(L, n: int) -> Fraction:
    """``sum phi_n(n_k)^2`` over the dyadic block ``(2^n, 2^(n+1)]`` where phi_n = 1."""
    elems = [int(e) for e in (L.elements if hasattr(L, "elements") else L)]
    return sum((trapezoid_coefficient(n, k) ** 2 for k in elems if dyadic_block(k) == n), Fraction(0))


def check_block_bridge(L) -> bool:
    """If every dyadic block holds at most N points then every block sum is at most N."""
    bound = lacunary_decompose(L).block_bound
    blocks = {dyadic_block(int(k)) for k in (L.elements if hasattr(L, "elements") else L)}
    return all(block_phi_sums(L, n) <= bound for n in blocks if n >= 1)


@dataclass
class RatioStats:
    max_ratio: float
    mean_ratio: float
    min_ratio: float
    trials: int
    seed: int
    M: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def lacunary_bmo_ratio(L, trials: int = 200, M: int | None = None, seed: int = 0, a: float = 2.0,
                       arcs: ArcFamily | None = None) -> RatioStats:
    """``||sum x_k e^{i n_k t}||_{*,psi_a} / ||x||_2`` for random unit coefficient vectors.

    Coefficients are standard complex Gaussians normalized to unit length,
    drawn from ``default_rng([seed, trial])``.
    """
    elems = sorted(int(e) for e in (L.elements if hasattr(L, "elements") else L))
    if not elems or elems[0] <= 0:
        raise DomainError("need a nonempty set of positive frequencies")
    if M is None:
        M = next_pow2(2 * elems[-1] + 1)
    if M <= 2 * elems[-1]:
        raise AliasError(f"grid {M} aliases frequency {elems[-1]}")
    arcs = ArcFamily.dyadic(M) if arcs is None else arcs
    t = 2 * np.pi * np.arange(M) / M
    basis = np.exp(1j * np.outer(elems, t))
    ratios = []
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        x = rng.standard_normal(len(elems)) + 1j * rng.standard_normal(len(elems))
        x /= np.linalg.norm(x)
        ratios.append(bmo_norm(SampledFunction(x @ basis), Psi(a), arcs))
    r = np.array(ratios)
    return RatioStats(float(r.max()), float(r.mean()), float(r.min()), trials, seed, M)
