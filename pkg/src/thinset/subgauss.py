"""Orlicz norms, subgaussian constants and the estimates built on them.

All quantities are computed on exact finite distributions, so moment
generating functions are finite sums evaluated in log-sum-exp form.
Monte Carlo input is histogrammed first (:meth:`DiscreteDistribution.from_samples`).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp, roots_hermitenorm

from .errors import DomainError, MeanNotZero
from .spectrum import FreqSet, SampledFunction, lp_norm

MEAN_TOL = 1e-10


def default_lambda_grid(lo: float = 1e-3, hi: float = 50.0, num: int = 400) -> np.ndarray:
    pos = np.geomspace(lo, hi, num)
    return np.concatenate([-pos[::-1], pos])


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("THINSET_THREADS", "1")))
    except ValueError:
        return 1


class DiscreteDistribution:
    """Finitely many atoms with probabilities summing to one."""

    def __init__(self, values, probs=None):
        values = np.asarray(values)
        values = values.astype(complex if np.iscomplexobj(values) else float).reshape(-1)
        if values.size == 0:
            raise DomainError("a distribution needs at least one atom")
        if probs is None:
            probs = np.full(values.size, 1.0 / values.size)
        probs = np.asarray(probs, dtype=float).reshape(-1)
        if probs.shape != values.shape or np.any(probs < 0):
            raise DomainError("probabilities must be nonnegative and match the values")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise DomainError(f"probabilities sum to {probs.sum()!r}, not 1")
        self.values = values
        self.weights = probs

    @property
    def probs(self) -> np.ndarray:
        return self.weights

    @classmethod
    def from_samples(cls, samples) -> "DiscreteDistribution":
        vals, counts = np.unique(np.asarray(samples).reshape(-1), return_counts=True)
        return cls(vals, counts / counts.sum())

    @classmethod
    def from_sampled(cls, f: SampledFunction) -> "DiscreteDistribution":
        vals = f.values.real if f.is_real else f.values
        return cls(vals, f.weights)

    def mean(self):
        return np.dot(self.weights, self.values)

    def centered(self) -> "DiscreteDistribution":
        return DiscreteDistribution(self.values - self.mean(), self.weights)

    def scaled(self, c: float) -> "DiscreteDistribution":
        return DiscreteDistribution(self.values * c, self.weights)

    def __len__(self) -> int:
        return self.values.size


def rademacher() -> DiscreteDistribution:
    return DiscreteDistribution([-1.0, 1.0], [0.5, 0.5])


def normal_quadrature(nodes: int = 200) -> DiscreteDistribution:
    """Standard normal as Gauss-Hermite (probabilists') nodes and weights."""
    if nodes < 2:
        raise DomainError("need at least two quadrature nodes")
    x, w = roots_hermitenorm(nodes)
    w = w / w.sum()
    x = 0.5 * (x - x[::-1])  # exact symmetry, so the mean is zero to rounding
    keep = w > 0
    return DiscreteDistribution(x[keep], w[keep] / w[keep].sum())


def uniform_circle(M: int = 1024) -> DiscreteDistribution:
    """``cos(theta)`` for theta uniform on the M-point grid."""
    vals = np.cos(2 * np.pi * np.arange(M) / M)
    vals -= vals.mean()
    return DiscreteDistribution(vals)


NAMED = {
    "rademacher": rademacher,
    "normal-quadrature": normal_quadrature,
    "uniform-circle": uniform_circle,
}


def named_distribution(spec: str) -> DiscreteDistribution:
    """``rademacher``, ``normal-quadrature`` or ``normal-quadrature{64}``, ``uniform-circle{M}``."""
    name, _, arg = spec.partition("{")
    if name not in NAMED:
        raise DomainError(f"unknown distribution {spec!r}; choose from {sorted(NAMED)}")
    if arg:
        return NAMED[name](int(arg.rstrip("}")))
    return NAMED[name]()


def _atoms(f):
    values = np.asarray(f.values)
    weights = np.asarray(f.weights, dtype=float)
    keep = weights > 0
    return values[keep], weights[keep]


def _psi_log_objective(mod: np.ndarray, logw: np.ndarray, a: float, t: float) -> float:
    return float(logsumexp(logw + (mod / t) ** a)) - 1.0


def psi_norm(f, a: float = 2.0) -> float:
    """``inf{t > 0 : E exp(|f/t|^a) <= e}`` by root finding on ``log t``."""
    if not a > 0:
        raise DomainError(f"psi_a needs a > 0, got {a}")
    values, weights = _atoms(f)
    if not np.all(np.isfinite(values)):
        raise DomainError("non-finite atom")
    mod = np.abs(values)
    top = float(mod.max())
    if top == 0:
        return 0.0
    logw = np.log(weights)
    if _psi_log_objective(mod, logw, a, top) >= 0:
        # all mass at the maximal modulus: the root is exactly max|f|
        return top
    t_low = top / 700.0 ** (1.0 / a)
    while _psi_log_objective(mod, logw, a, t_low) <= 0:
        t_low /= 2.0
    root = brentq(
        lambda s: _psi_log_objective(mod, logw, a, math.exp(s)),
        math.log(t_low), math.log(top), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500,
    )
    return math.exp(root)


def psi_norm_rows(mod: np.ndarray, a: float, iters: int = 64) -> np.ndarray:
    """Vectorized psi_a norm of each row of ``mod`` under uniform weights.

    Bisection on ``log t`` for all rows at once; relative accuracy better
    than 1e-12 after 64 halvings of the bracket.
    """
    mod = np.abs(np.asarray(mod, dtype=float))
    rows, L = mod.shape
    top = mod.max(axis=1)
    out = np.zeros(rows)
    live = top > 0
    if not live.any():
        return out
    m = mod[live] / top[live, None]
    logw = -math.log(L)

    def h(t):
        return logsumexp(logw + (m / t[:, None]) ** a, axis=1) - 1.0

    hi = np.ones(m.shape[0])
    lo = np.full(m.shape[0], 700.0 ** (-1.0 / a))
    while True:
        bad = h(lo) <= 0
        if not bad.any():
            break
        lo[bad] /= 2.0
    exact = h(hi) >= 0
    log_lo, log_hi = np.log(lo), np.log(hi)
    for _ in range(iters):
        mid = 0.5 * (log_lo + log_hi)
        above = h(np.exp(mid)) > 0
        log_lo = np.where(above, mid, log_lo)
        log_hi = np.where(above, log_hi, mid)
    t = np.exp(0.5 * (log_lo + log_hi))
    t[exact] = 1.0
    out[live] = t * top[live]
    return out


def _real_atoms(f):
    values, weights = _atoms(f)
    if np.iscomplexobj(values):
        if np.any(values.imag != 0):
            raise DomainError("sg_constant needs a real-valued variable")
        values = values.real
    if not np.all(np.isfinite(values)):
        raise DomainError("non-finite atom makes the MGF infinite")
    return values.astype(float), weights


def log_mgf(f, lambdas) -> np.ndarray:
    values, weights = _real_atoms(f)
    lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
    return logsumexp(np.log(weights)[None, :] + lam[:, None] * values[None, :], axis=1)


def sg_constant(f, lambda_grid=None, mean_tol: float = MEAN_TOL) -> float:
    """Grid lower bound for the subgaussian constant of a mean-zero variable.

    ``max(sqrt(Var f), max_lambda sqrt(2 log E e^{lambda f}) / |lambda|)``;
    the first term is the lambda -> 0 limit of the second.
    """
    values, weights = _real_atoms(f)
    scale = max(1.0, float(np.abs(values).max()))
    mean = float(np.dot(weights, values))
    if abs(mean) > mean_tol * scale:
        raise MeanNotZero(f"mean {mean!r} is not zero")
    lam = default_lambda_grid() if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    lam = lam[lam != 0]
    var = float(np.dot(weights, (values - mean) ** 2))
    best = math.sqrt(var)
    if lam.size:
        lm = logsumexp(np.log(weights)[None, :] + lam[:, None] * values[None, :], axis=1)
        ratios = np.sqrt(2 * np.maximum(lm, 0.0)) / np.abs(lam)
        best = max(best, float(ratios.max()))
    return best


class FunctionSystem:
    """Functions sampled on one common set of weighted atoms."""

    def __init__(self, functions: Sequence[SampledFunction] | np.ndarray, weights=None):
        if isinstance(functions, np.ndarray):
            matrix = np.atleast_2d(functions)
            if weights is None:
                weights = np.full(matrix.shape[1], 1.0 / matrix.shape[1])
        else:
            functions = list(functions)
            if not functions:
                raise DomainError("a function system needs at least one function")
            weights = functions[0].weights if weights is None else weights
            for fn in functions:
                if not np.array_equal(fn.weights, weights):
                    raise DomainError("functions in a system must share atoms and weights")
            matrix = np.array([fn.values for fn in functions])
        self.matrix = matrix
        self.weights = np.asarray(weights, dtype=float)
        if abs(self.weights.sum() - 1) > 1e-12:
            raise DomainError("system weights must sum to 1")

    @classmethod
    def characters(cls, freqs, M: int = 1024) -> "FunctionSystem":
        elems = freqs.elements if isinstance(freqs, FreqSet) else tuple(freqs)
        t = 2 * np.pi * np.arange(M) / M
        return cls(np.exp(1j * np.outer(elems, t)))

    @classmethod
    def rademacher(cls, n: int) -> "FunctionSystem":
        """Coordinates of the cube {-1, 1}^n under the uniform measure."""
        cube = ((np.arange(2**n)[None, :] >> np.arange(n)[:, None]) & 1) * 2.0 - 1.0
        return cls(cube)

    def __len__(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.matrix.shape[1]

    def function(self, i: int) -> SampledFunction:
        return SampledFunction(self.matrix[i], self.weights)

    def real_system(self) -> np.ndarray:
        """Real parts stacked with imaginary parts, as in the complex convention."""
        if np.iscomplexobj(self.matrix) and np.any(self.matrix.imag != 0):
            return np.vstack([self.matrix.real, self.matrix.imag])
        return np.real(self.matrix).astype(float)


@dataclass
class SystemEstimate:
    value: float
    direction: np.ndarray
    restarts: int
    seed: int


def _rotate(x: np.ndarray, i: int, angle: float) -> np.ndarray:
    e = np.zeros_like(x)
    e[i] = 1.0
    perp = e - np.dot(e, x) * x
    norm = np.linalg.norm(perp)
    if norm < 1e-12:
        return x
    y = math.cos(angle) * x + math.sin(angle) * perp / norm
    return y / np.linalg.norm(y)


def sg_system_lower(
    S: FunctionSystem,
    restarts: int = 16,
    seed: int = 0,
    lambda_grid=None,
    search_grid=None,
    min_step: float = 1e-3,
) -> SystemEstimate:
    """Certified lower bound for the subgaussian constant of a system.

    Maximizes ``x -> sg_constant(sum x_n f_n)`` over the unit sphere by
    random restarts and coordinate-wise rotations with a shrinking step.
    Restarts use streams ``(seed, r)`` and are merged by max, so the result
    does not depend on THINSET_THREADS.
    """
    F = S.real_system()
    weights = S.weights
    coarse = default_lambda_grid(num=60) if search_grid is None else search_grid
    fine = default_lambda_grid() if lambda_grid is None else lambda_grid

    def objective(x, grid):
        return sg_constant(SampledFunction(x @ F, weights), grid, mean_tol=1e-8)

    def run(r: int):
        rng = np.random.default_rng([seed, r])
        x = rng.standard_normal(F.shape[0])
        x /= np.linalg.norm(x)
        val = objective(x, coarse)
        step = 0.5
        while step >= min_step:
            improved = False
            for i in range(F.shape[0]):
                for angle in (step, -step):
                    y = _rotate(x, i, angle)
                    v = objective(y, coarse)
                    if v > val + 1e-12:
                        x, val, improved = y, v, True
                        break
            if not improved:
                step /= 2
        return objective(x, fine), x

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(run, range(restarts)))
    best = max(range(restarts), key=lambda r: (results[r][0], -r))
    return SystemEstimate(value=results[best][0], direction=results[best][1], restarts=restarts, seed=seed)


def moment_growth(f, a: float = 2.0, p_max: int = 64) -> float:
    """``sup`` over even ``p`` in ``[2, p_max]`` of ``p^(-1/a) ||f||_p``."""
    if p_max < 2 or p_max % 2:
        raise DomainError(f"p_max must be an even integer >= 2, got {p_max}")
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    sf = SampledFunction(np.asarray(f.values, dtype=complex), f.weights)
    return max(p ** (-1.0 / a) * lp_norm(sf, p) for p in range(2, p_max + 1, 2))


@dataclass
class MonteCarloEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int


def iid_sup_statistic(f, a: float = 2.0, n_max: int = 1000, trials: int = 100, seed: int = 0) -> MonteCarloEstimate:
    """Monte Carlo ``E sup_{n <= n_max} (log(n+1))^(-1/a) |f_n|`` over iid copies."""
    if trials < 1 or n_max < 1:
        raise DomainError("trials and n_max must be positive")
    values, weights = _atoms(f)
    mod = np.abs(values)
    scale = np.log(np.arange(2, n_max + 2)) ** (-1.0 / a)
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(weights)
    cdf[-1] = 1.0
    out = np.empty(trials)
    chunk = max(1, 4_000_000 // n_max)
    for start in range(0, trials, chunk):
        rows = min(chunk, trials - start)
        idx = np.searchsorted(cdf, rng.random((rows, n_max)), side="right")
        idx = np.minimum(idx, len(cdf) - 1)
        out[start:start + rows] = (mod[idx] * scale).max(axis=1)
    stderr = float(out.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return MonteCarloEstimate(mean=float(out.mean()), stderr=stderr, trials=trials, seed=seed)


@dataclass
class NetReport:
    points: list[int]
    separation: float
    bound: float
    log_size: float
    bound_holds: bool

    def to_json(self) -> dict:
        return {
            "points": self.points, "size": len(self.points), "separation": self.separation,
            "bound": self.bound, "log_size": self.log_size, "bound_holds": self.bound_holds,
        }


def packing_net(S: FunctionSystem, delta: float, s: float, C: float, norm_tol: float = 1e-8) -> NetReport:
    """Greedy maximal set of atoms pairwise further apart than ``delta * sqrt(n)``.

    ``bound`` is ``n (1 - delta C)^2 / (2 s^2 C^2)``; when ``s`` is a valid
    subgaussian constant for the system, ``log |net| >= bound``.
    """
    if not 0 < delta < 1.0 / C:
        raise DomainError(f"need 0 < delta < 1/C = {1.0 / C}, got {delta}")
    F = S.matrix
    n = F.shape[0]
    w = S.weights
    l2 = np.sqrt(np.abs(F) ** 2 @ w)
    if np.any(np.abs(l2 - 1) > norm_tol):
        raise DomainError(f"functions must have unit L2 norm, got {l2}")
    if np.abs(F[:, w > 0]).max() > C + 1e-12:
        raise DomainError(f"sup norm exceeds C = {C}")
    X = F.T
    sep = delta * math.sqrt(n)
    net: list[int] = []
    for j in range(X.shape[0]):
        if w[j] == 0:
            continue
        if net:
            d = np.sqrt((np.abs(X[net] - X[j]) ** 2).sum(axis=1))
            if d.min() <= sep:
                continue
        net.append(j)
    # maximality: every atom lies within the separation of some net point
    for j in range(X.shape[0]):
        d = np.sqrt((np.abs(X[net] - X[j]) ** 2).sum(axis=1))
        assert d.min() <= sep or j in net
    bound = n * (1 - delta * C) ** 2 / (2 * s**2 * C**2)
    log_size = math.log(len(net))
    return NetReport(points=net, separation=sep, bound=bound, log_size=log_size, bound_holds=log_size >= bound)


def arith_sg_lower_bound(L, N: int, delta_grid=None) -> float:
    """Largest ``s`` ruled out by ``log(2 pi N / delta + 1) >= |L| (1-delta)^2 / 2 s^2``."""
    elems = [int(e) for e in (L.elements if isinstance(L, FreqSet) else L)]
    if any(not 1 <= e <= N for e in elems):
        raise DomainError(f"frequencies must lie in [1, {N}]")
    deltas = np.linspace(1e-3, 1 - 1e-3, 999) if delta_grid is None else np.asarray(delta_grid, dtype=float)
    vals = np.sqrt(len(elems) * (1 - deltas) ** 2 / (2 * np.log(2 * np.pi * N / deltas + 1)))
    return float(vals.max())


def cyclic_distances(L, M: int) -> np.ndarray:
    """``d(s, 0) = (sum_k |e^{2 pi i k s / M} - 1|^2)^(1/2)`` for s = 0..M-1."""
    elems = np.array([int(e) for e in (L.elements if isinstance(L, FreqSet) else L)], dtype=np.int64)
    s = np.arange(M)
    if elems.size == 0:
        return np.zeros(M)
    phase = 2 * np.pi * ((np.outer(elems, s)) % M) / M
    return np.sqrt((2 - 2 * np.cos(phase)).sum(axis=0))


def entropy_integral(L, M: int | None = None) -> float:
    """``∫_0^diam sqrt(log 1/mu(eps)) d eps`` with ``mu(eps) = #{s : d(s,0) < eps} / M``.

    ``mu`` is a step function, so the integral is an exact finite sum over the
    sorted distinct distances.
    """
    if M is None:
        if not isinstance(L, FreqSet) or L.group.kind != "cyclic":
            raise DomainError("entropy_integral needs a cyclic FreqSet or an explicit M")
        M = L.group.M
    if M < 2:
        raise DomainError("M must be >= 2")
    d = np.sort(cyclic_distances(L, M))
    levels, counts = np.unique(d, return_counts=True)
    below = np.cumsum(counts)  # for eps in (levels[i], levels[i+1]], mu = below[i] / M
    widths = np.diff(levels)
    heights = np.sqrt(np.log(M / below[:-1]))
    return float(np.dot(widths, heights))
