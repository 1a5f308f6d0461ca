"""Hermite expansions, the Mehler kernel and Gaussian concentration checks.

Conventions: probabilists' Hermite polynomials ``h_n`` with
``h_{n+1} = x h_n - n h_{n-1}``, orthogonal under the standard Gaussian with
``<h_n, h_n> = n!``.  Multi-indices are tuples of length N, ordered graded
lexicographically.

The Mehler kernel of ``T_delta`` is

    K(x, t) = (1 - d^2)^{-N/2} exp((-d^2|t|^2 + 2 d t.x - d^2|x|^2) / (2(1 - d^2)))

and the composition ``T_delta Theta_z`` has the product kernel with
per-coordinate correlation ``rho_i = delta * z_i``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import logsumexp, roots_hermitenorm

from .errors import CertificateFailure, DomainError
from .subgauss import MonteCarloEstimate


def hermite_eval(n: int, x):
    """``h_n(x)`` by the three-term recurrence; integer inputs stay exact."""
    if n < 0:
        raise DomainError(f"degree must be >= 0, got {n}")
    if isinstance(x, (int, np.integer)):
        x = int(x)
        prev, cur = 1, x
    else:
        x = np.asarray(x, dtype=float)
        prev, cur = np.ones_like(x), x.copy()
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, x * cur - k * prev
    return cur


def hermite_table(D: int, x) -> np.ndarray:
    """Rows ``h_0(x), ..., h_D(x)`` for an array of points."""
    x = np.asarray(x, dtype=float)
    out = np.empty((D + 1,) + x.shape)
    out[0] = 1.0
    if D >= 1:
        out[1] = x
    for k in range(1, D):
        out[k + 1] = x * out[k] - k * out[k - 1]
    return out


def multi_indices(N: int, D: int) -> list[tuple[int, ...]]:
    """All alpha with ``|alpha| <= D``, graded then lexicographic (descending)."""
    out = []
    for d in range(D + 1):
        layer = [a for a in itertools.product(range(d + 1), repeat=N) if sum(a) == d]
        out.extend(sorted(layer, reverse=True))
    return out


def _alpha_factorial(alpha) -> int:
    return math.prod(math.factorial(a) for a in alpha)


@dataclass
class HermiteExpansion:
    """``F = sum_alpha c_alpha h_alpha`` in N Gaussian variables, degree <= D."""

    N: int
    max_degree: int
    coefficients: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for alpha, c in self.coefficients.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.N or min(alpha, default=0) < 0:
                raise DomainError(f"bad multi-index {alpha} for N={self.N}")
            if sum(alpha) > self.max_degree:
                raise DomainError(f"multi-index {alpha} exceeds degree {self.max_degree}")
            if c != 0:
                clean[alpha] = float(c)
        self.coefficients = clean

    @classmethod
    def basis(cls, alpha, max_degree: int | None = None) -> "HermiteExpansion":
        alpha = tuple(alpha)
        return cls(len(alpha), sum(alpha) if max_degree is None else max_degree, {alpha: 1.0})

    def to_vector(self) -> np.ndarray:
        index = multi_indices(self.N, self.max_degree)
        return np.array([self.coefficients.get(a, 0.0) for a in index])

    def evaluate(self, x) -> np.ndarray:
        """Values at points ``x`` of shape (..., N)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.N:
            raise DomainError(f"points must have last dimension {self.N}")
        tables = [hermite_table(self.max_degree, x[..., i]) for i in range(self.N)]
        out = np.zeros(x.shape[:-1])
        for alpha, c in self.coefficients.items():
            term = np.full(x.shape[:-1], c)
            for i, a in enumerate(alpha):
                term = term * tables[i][a]
            out = out + term
        return out

    def degree_part(self, d: int) -> "HermiteExpansion":
        return HermiteExpansion(self.N, self.max_degree,
                                {a: c for a, c in self.coefficients.items() if sum(a) == d})

    def norm2(self) -> float:
        """L2 norm under the product Gaussian."""
        return math.sqrt(sum(c * c * _alpha_factorial(a) for a, c in self.coefficients.items()))


@dataclass(frozen=True)
class T:
    delta: float


@dataclass(frozen=True)
class Theta:
    z: tuple


def apply_operator(F: HermiteExpansion, op) -> HermiteExpansion:
    """``T_delta`` scales degree d by ``delta^d``; ``Theta_z`` scales ``h_alpha`` by ``prod z_i^alpha_i``."""
    if isinstance(op, T):
        if abs(op.delta) > 1:
            raise DomainError("T needs |delta| <= 1")
        scale = lambda a: op.delta ** sum(a)
    elif isinstance(op, Theta):
        z = tuple(float(v) for v in op.z)
        if len(z) != F.N:
            raise DomainError(f"Theta needs {F.N} parameters")
        if any(abs(v) > 1 for v in z):
            raise DomainError("Theta parameters must lie in [-1, 1]")
        scale = lambda a: math.prod(zi ** ai for zi, ai in zip(z, a))
    else:
        raise DomainError(f"unknown operator {op!r}")
    return HermiteExpansion(F.N, F.max_degree, {a: c * scale(a) for a, c in F.coefficients.items()})


def gauss_hermite(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and probability weights for the standard Gaussian."""
    x, w = roots_hermitenorm(nodes)
    return x, w / w.sum()


def mehler_apply_quadrature(F: HermiteExpansion, delta: float, x, nodes: int | None = None) -> np.ndarray:
    """``(T_delta F)(x) = E F(delta x + sqrt(1 - delta^2) g')`` by tensor Gauss-Hermite."""
    if abs(delta) > 1:
        raise DomainError("need |delta| <= 1")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    nodes = nodes or F.max_degree + 1
    g, w = gauss_hermite(nodes)
    grid = np.array(list(itertools.product(g, repeat=F.N)))
    wts = np.array([math.prod(c) for c in itertools.product(w, repeat=F.N)])
    pts = delta * x[:, None, :] + math.sqrt(max(0.0, 1 - delta * delta)) * grid[None, :, :]
    return F.evaluate(pts) @ wts


def mehler_kernel(x, t, delta: float) -> float:
    """Closed-form Mehler kernel; positive for ``|delta| < 1``."""
    if not abs(delta) < 1:
        raise DomainError("Mehler kernel needs |delta| < 1")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if x.shape != t.shape:
        raise DomainError("x and t must have the same dimension")
    d2 = delta * delta
    expo = (-d2 * t @ t + 2 * delta * t @ x - d2 * x @ x) / (2 * (1 - d2))
    return float((1 - d2) ** (-x.size / 2) * math.exp(expo))


def mehler_series(x, t, delta: float, degree: int = 20) -> float:
    """``sum_{|alpha| <= degree} delta^|alpha| h_alpha(x) h_alpha(t) / alpha!``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    # the sum factorizes into per-coordinate series graded by total degree
    per = [hermite_table(degree, x[i]) * hermite_table(degree, t[i])
           / np.array([math.factorial(k) for k in range(degree + 1)]) for i in range(x.size)]
    layer = np.zeros(degree + 1)
    layer[0] = 1.0
    for p in per:
        layer = np.convolve(layer, p)[: degree + 1]
    return float(sum(delta**d * layer[d] for d in range(degree + 1)))


def kernel_mass(delta: float, N: int = 1, nodes: int = 80) -> float:
    """``int int K dP dP`` by tensor Gauss-Hermite (per coordinate, the kernel factorizes)."""
    g, w = gauss_hermite(nodes)
    X, Tt = np.meshgrid(g, g, indexing="ij")
    d2 = delta * delta
    K = (1 - d2) ** -0.5 * np.exp((-d2 * Tt**2 + 2 * delta * Tt * X - d2 * X**2) / (2 * (1 - d2)))
    return float(w @ K @ w) ** N


def _quad_form_tail(weights: np.ndarray, x: float) -> float:
    """``P(sum_j w_j chi2_1 > x)`` by Imhof's inversion formula.

    The integrand is ``sin(theta(u) - x u/2) / (u rho(u))`` with slowly varying
    ``theta``; the oscillating tail goes to a Fourier-weighted quadrature.
    """
    weights = weights[weights != 0]
    if weights.size == 0:
        return float(0.0 > x)
    omega = 0.5 * x

    def theta0(u):
        return 0.5 * np.sum(np.arctan(weights * u))

    def rho(u):
        return np.prod((1 + (weights * u) ** 2) ** 0.25)

    def full(u):
        if u == 0:
            return 0.5 * float(np.sum(weights)) - omega
        return math.sin(theta0(u) - omega * u) / (u * rho(u))

    cut = 4.0 / np.abs(weights).max()
    head = integrate.quad(full, 0.0, cut, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
    if omega == 0:
        tail = integrate.quad(full, cut, np.inf, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
    else:
        # sin(a - w u) = sin a cos(w u) - cos a sin(w u)
        tail = integrate.quad(lambda u: math.sin(theta0(u)) / (u * rho(u)), cut, np.inf,
                              weight="cos", wvar=omega, limlst=200)[0]
        tail -= integrate.quad(lambda u: math.cos(theta0(u)) / (u * rho(u)), cut, np.inf,
                               weight="sin", wvar=omega, limlst=200)[0]
    return 0.5 + (head + tail) / math.pi


def mehler_l1_distance(rho) -> float:
    """``||Phi - 1||_{L1(P x P)}`` for the product Mehler kernel with correlations ``rho``.

    With ``U = (x+t)/sqrt2`` and ``V = (x-t)/sqrt2`` per coordinate,
    ``log Phi = c + sum a_i U_i^2 - b_i V_i^2``.  Under P the U, V are
    standard; under ``Q = Phi P`` they have variances ``1 +- rho``.  Then
    ``||Phi - 1||_1 = 2 (Q(Phi > 1) - P(Phi > 1))``.
    """
    rho = np.asarray(rho, dtype=float)
    rho = rho[rho != 0]
    if rho.size == 0:
        return 0.0
    if np.any(np.abs(rho) >= 1):
        raise DomainError("correlations must satisfy |rho| < 1")
    c = -0.5 * np.sum(np.log1p(-rho**2))
    a = rho / (2 * (1 + rho))
    b = rho / (2 * (1 - rho))
    p_tail = _quad_form_tail(np.concatenate([a, -b]), -c)
    q_tail = _quad_form_tail(np.concatenate([rho / 2, -rho / 2]), -c)
    return 2.0 * (q_tail - p_tail)


@dataclass
class TensorKernel:
    """A kernel on ``R^N x R^N`` stored by its Hermite coefficient matrix.

    ``matrix[i, j]`` is the coefficient of ``e_i (x) e_j`` where
    ``e_alpha = h_alpha / sqrt(alpha!)`` is the orthonormal basis indexed by
    ``index``.  ``rho`` is set when the kernel is a scaled shifted Mehler
    kernel ``(Phi_rho - 1)/delta`` known in closed form beyond the truncation.
    """

    index: list
    matrix: np.ndarray
    l1_norm: float | None = None
    op_norm_2to2: float | None = None
    rho: tuple | None = None
    delta: float | None = None

    def op_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def recompute_l1(self) -> float:
        if self.rho is None:
            raise DomainError("L1 norm is only available for closed-form Mehler kernels")
        return mehler_l1_distance(self.rho) / self.delta

    def block(self, degree_i: int, degree_j: int) -> np.ndarray:
        rows = [k for k, a in enumerate(self.index) if sum(a) == degree_i]
        cols = [k for k, a in enumerate(self.index) if sum(a) == degree_j]
        return self.matrix[np.ix_(rows, cols)]

    def to_json(self) -> dict:
        return {
            "l1_norm": self.l1_norm,
            "op_norm_2to2": self.op_norm_2to2,
            "rank": int(np.linalg.matrix_rank(self.matrix)) if self.matrix.size else 0,
            "dimension": len(self.index),
        }


def tensor_decompose(N: int, delta: float, z=None, max_degree: int = 8, l1_tol: float = 1e-4):
    """Split ``sum z_n g_n (x) g_n`` as ``t + r`` with ``t`` small in L1 and ``r`` small on L2.

    ``Phi`` is the kernel of ``T_delta Theta_z``.  ``t = (Phi - 1)/delta`` and
    ``r = -(1/delta) sum_{2 <= d <= D} delta^d P_d``, so their sum on degree-1
    by degree-1 is exactly ``sum z_n g_n (x) g_n``.  The L1 norm of ``t`` is
    at most ``2/delta`` because ``Phi >= 0`` has mass one.
    """
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if max_degree < 2:
        raise DomainError("max_degree must be at least 2")
    z = np.ones(N) if z is None else np.asarray(z, dtype=float)
    if z.shape != (N,) or np.any(np.abs(z) > 1):
        raise DomainError("z must be a vector in [-1, 1]^N")
    rho = delta * z
    index = multi_indices(N, max_degree)
    eig = np.array([math.prod(r**a for r, a in zip(rho, alpha)) for alpha in index])
    degree = np.array([sum(a) for a in index])
    t_diag = np.where(degree >= 1, eig, 0.0) / delta
    r_diag = np.where(degree >= 2, -eig, 0.0) / delta
    t = TensorKernel(index, np.diag(t_diag), rho=tuple(rho), delta=delta)
    r = TensorKernel(index, np.diag(r_diag))
    t.l1_norm = t.recompute_l1()
    t.op_norm_2to2 = t.op_norm()
    r.op_norm_2to2 = r.op_norm()
    r.l1_norm = None
    if t.l1_norm > 2 / delta + l1_tol:
        raise CertificateFailure(f"L1 certificate {t.l1_norm} exceeds 2/delta = {2 / delta}")
    return t, r


def reconstruction_error(t: TensorKernel, r: TensorKernel, z) -> float:
    """Max deviation of ``t + r`` on degree 1 x degree 1 from ``diag(z)``."""
    block = t.block(1, 1) + r.block(1, 1)
    index1 = [a for a in t.index if sum(a) == 1]
    target = np.diag([float(np.dot(a, z)) for a in index1])
    return float(np.abs(block - target).max())


# Lipschitz functionals on R^n with their Lipschitz constants.
def _coordinate(g):
    return g[:, 0]


def _euclidean(g):
    return np.linalg.norm(g, axis=1)


def _max_coordinate(g):
    return g.max(axis=1)


def _distance_to_point(g):
    return np.linalg.norm(g - 1.0, axis=1)


def _constant(g):
    return np.zeros(g.shape[0])


LIPSCHITZ: dict[str, tuple[Callable, float]] = {
    "coordinate": (_coordinate, 1.0),
    "euclidean-norm": (_euclidean, 1.0),
    "max-coordinate": (_max_coordinate, 1.0),
    "distance-to-point": (_distance_to_point, 1.0),
    "constant": (_constant, 0.0),
}


def _sg_of_samples(f: np.ndarray, lam: np.ndarray) -> float:
    f = f - f.mean()
    best = float(f.std())
    lm = logsumexp(lam[:, None] * f[None, :], axis=1) - math.log(f.size)
    return max(best, float((np.sqrt(2 * np.maximum(lm, 0.0)) / np.abs(lam)).max()))


def lipschitz_concentration(F: str, n: int, trials: int = 100_000, seed: int = 0,
                            lambda_grid=None, bootstrap: int = 30, chunk: int = 20_000) -> MonteCarloEstimate:
    """Empirical subgaussian constant of ``F(g) - E F(g)`` for Gaussian g in R^n.

    The lambda grid is kept moderate (|lambda| <= 2) because the empirical
    moment generating function is unreliable in the far tail.  The stderr is
    a bootstrap over resampled trials.
    """
    if F not in LIPSCHITZ:
        raise DomainError(f"unknown functional {F!r}; choose from {sorted(LIPSCHITZ)}")
    if trials < 2:
        raise DomainError("need at least two trials")
    fn, _ = LIPSCHITZ[F]
    lam = np.concatenate([-np.geomspace(0.05, 2.0, 24)[::-1], np.geomspace(0.05, 2.0, 24)]) \
        if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    lam = lam[lam != 0]
    parts = []
    for c, start in enumerate(range(0, trials, chunk)):
        size = min(chunk, trials - start)
        parts.append(fn(np.random.default_rng([seed, c]).standard_normal((size, n))))
    f = np.concatenate(parts)
    if np.ptp(f) == 0:
        return MonteCarloEstimate(mean=0.0, stderr=0.0, trials=trials, seed=seed)
    value = _sg_of_samples(f, lam)
    rng = np.random.default_rng([seed, 1 << 20])
    boots = [_sg_of_samples(f[rng.integers(0, f.size, f.size)], lam) for _ in range(bootstrap)]
    return MonteCarloEstimate(mean=value, stderr=float(np.std(boots, ddof=1)), trials=trials, seed=seed)
