"""Riesz products, Sidon ratios and minimal-norm Fourier interpolation.

``interpolate_l1`` solves the finite convex program

    minimize   sum_t w_t |u(t)|
    subject to sum_t w_t u(t) conj(gamma(t)) = z_gamma   for gamma in L

with an exact conic solver, then certifies the answer independently of the
solver: the primal density is projected back onto the constraint set and the
dual coefficients are rescaled until ``|sum_gamma c_gamma gamma(t)| <= 1``
holds on every atom, so ``Re sum c_gamma conj(z_gamma)`` is a valid lower bound.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import AliasError, DomainError, Infeasible, PreconditionError, ToleranceNotMet
from .relations import is_quasi_independent
from .spectrum import FreqSet, GroupSpec, SampledFunction
from .subgauss import FunctionSystem, thread_count


@dataclass
class RieszProduct:
    base: FreqSet
    phases: np.ndarray
    samples: SampledFunction
    damping: float = 1.0


def _scalar_freqs(A) -> tuple[GroupSpec, list[int]]:
    if isinstance(A, FreqSet):
        if A.group.is_vector:
            raise DomainError("Riesz products here need scalar frequencies")
        return A.group, [int(e) for e in A.elements]
    return GroupSpec.integers(), [int(e) for e in A]


def riesz_product(A, z=None, M: int | None = None, damping: float = 1.0, verify: bool = True) -> RieszProduct:
    """``prod_n (1 + damping * Re(conj(z_n) e^{int}))`` on an M-point grid.

    ``A`` must be quasi-independent. With ``verify`` the product is checked
    for nonnegativity, unit mean and, when ``|A| <= 12``, the coefficient law
    ``F^(sum_B n) = prod_B conj(z_n)/2`` for every subset ``B`` (damping 1).
    """
    group, elems = _scalar_freqs(A)
    A = A if isinstance(A, FreqSet) else FreqSet.of(elems)
    if not 0 <= damping <= 1:
        raise DomainError("damping must lie in [0, 1]")
    z = np.ones(len(elems), dtype=complex) if z is None else np.asarray(z, dtype=complex)
    if z.shape != (len(elems),):
        raise DomainError("one phase per frequency is required")
    if np.any(np.abs(np.abs(z) - 1) > 1e-12):
        raise DomainError("phases must be unimodular")
    if len(elems):
        ok, witness = is_quasi_independent(A)
        if not ok:
            raise PreconditionError(f"frequency set is not quasi-independent: relation {witness.signs}")
    if group.kind == "cyclic":
        if M is None:
            M = group.M
        if M % group.M:
            raise AliasError(f"grid {M} is not a multiple of the cyclic order {group.M}")
        freqs = [e * (M // group.M) for e in elems]
    else:
        reach = sum(abs(e) for e in elems)
        if M is None:
            M = 1 << max(3, (2 * reach + 1).bit_length())
        if M <= 2 * reach:
            raise AliasError(f"grid {M} aliases the expansion; need M > {2 * reach}")
        freqs = elems
    t = 2 * np.pi * np.arange(M) / M
    values = np.ones(M)
    for n, zn in zip(freqs, z):
        values = values * (1 + damping * np.real(np.conj(zn) * np.exp(1j * n * t)))
    samples = SampledFunction(values)
    out = RieszProduct(base=A, phases=z, samples=samples, damping=damping)
    if verify:
        if values.min() < -1e-10:
            raise AssertionError("Riesz product took a negative value")
        if abs(values.mean() - 1) > 1e-10:
            raise AssertionError("Riesz product mean differs from 1")
        if len(elems) <= 12:
            err = expansion_error(out)
            if err > 1e-9:
                raise AssertionError(f"product disagrees with its expansion by {err}")
    return out


def expansion_coefficients(elems, z, damping: float = 1.0) -> dict[int, complex]:
    """Exact Fourier coefficients of the product by expanding each factor.

    Factor n contributes 1, ``damping*conj(z_n)/2`` at +n and ``damping*z_n/2``
    at -n; colliding sign patterns add up.
    """
    coeffs: dict[int, complex] = {0: 1.0 + 0j}
    for n, zn in zip(elems, z):
        nxt: dict[int, complex] = {}
        for k, c in coeffs.items():
            for shift, factor in ((0, 1.0), (n, damping * np.conj(zn) / 2), (-n, damping * zn / 2)):
                nxt[k + shift] = nxt.get(k + shift, 0) + c * factor
        coeffs = nxt
    return coeffs


def expansion_error(F: RieszProduct) -> float:
    """Max deviation between the sampled product's FFT and its exact expansion."""
    group, elems = _scalar_freqs(F.base)
    M = len(F.samples)
    if group.kind == "cyclic":
        elems = [e * (M // group.M) for e in elems]
    got = np.fft.fft(F.samples.values) / M
    want = np.zeros(M, dtype=complex)
    for k, c in expansion_coefficients(elems, F.phases, F.damping).items():
        want[k % M] += c
    return float(np.max(np.abs(got - want)))


def coefficient_law_violations(A, tol: float = 1e-9) -> list[tuple[int, ...]]:
    """Subsets B whose sum ``sum_B n`` is also reached by another signed pattern.

    For these B the product law ``F^(sum_B n) = prod_B conj(z_n)/2`` fails
    for generic phases; quasi-independence alone does not exclude them
    (``{1, 2}``: ``2 - 1 = 1``).
    """
    _, elems = _scalar_freqs(A)
    n = len(elems)
    reps: dict[int, int] = {}
    for eps in itertools.product((0, 1, -1), repeat=n):
        k = sum(e * x for e, x in zip(eps, elems))
        reps[k] = reps.get(k, 0) + 1
    bad = []
    for r in range(1, n + 1):
        for B in itertools.combinations(range(n), r):
            if reps[sum(elems[i] for i in B)] > 1:
                bad.append(B)
    return bad


def coefficient_law_error(F: RieszProduct) -> float:
    """Max over subsets B of ``|F^(sum_B n) - prod_B conj(z_n)/2|``, read off the FFT."""
    group, elems = _scalar_freqs(F.base)
    M = len(F.samples)
    scale = M // group.M if group.kind == "cyclic" else 1
    coeffs = np.fft.fft(F.samples.values) / M
    worst = 0.0
    for r in range(len(elems) + 1):
        for B in itertools.combinations(range(len(elems)), r):
            k = sum(elems[i] for i in B) * scale
            expected = np.prod([F.damping * np.conj(F.phases[i]) / 2 for i in B]) if B else 1.0
            worst = max(worst, abs(coeffs[k % M] - expected))
    return worst


@dataclass(frozen=True)
class Deterministic:
    pass


@dataclass(frozen=True)
class RandomSigns:
    trials: int = 200
    seed: int = 0


def _system_matrix(S, M: int) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(S, FunctionSystem):
        return S.matrix, S.weights
    sys = FunctionSystem.characters(S, M)
    return sys.matrix, sys.weights


def sidon_ratio(S, a, mode=Deterministic(), M: int = 1024) -> float:
    """``sum |a_n| / ||sum a_n phi_n||_inf`` (or its random-sign average denominator).

    The deterministic ratio is a certified lower bound for the Sidon constant
    of the system on the given atoms.
    """
    a = np.asarray(a, dtype=complex)
    if not np.any(a):
        raise DomainError("coefficient vector must be nonzero")
    F, w = _system_matrix(S, M)
    if F.shape[0] != a.size:
        raise DomainError("need one coefficient per function")
    F = F[:, w > 0]
    l1 = float(np.abs(a).sum())
    if isinstance(mode, Deterministic):
        return l1 / float(np.abs(a @ F).max())
    if isinstance(mode, RandomSigns):
        rng = np.random.default_rng(mode.seed)
        signs = rng.choice([-1.0, 1.0], size=(mode.trials, a.size))
        sups = np.abs((signs * a) @ F).max(axis=1)
        return l1 / float(sups.mean())
    raise DomainError(f"unknown mode {mode!r}")


@dataclass
class InterpolationSolution:
    density: np.ndarray
    primal_value: float
    dual_value: float
    gap: float
    dual_coeffs: np.ndarray
    constraint_error: float
    targets: np.ndarray = field(repr=False, default=None)

    @property
    def relative_gap(self) -> float:
        return self.gap / max(abs(self.primal_value), 1e-300)

    def to_json(self) -> dict:
        return {
            "primal_value": self.primal_value, "dual_value": self.dual_value, "gap": self.gap,
            "relative_gap": self.relative_gap, "constraint_error": self.constraint_error,
            "dual_coeffs": [[c.real, c.imag] for c in self.dual_coeffs],
        }


def group_atoms(group: GroupSpec) -> np.ndarray:
    """All elements of a finite group as rows of an integer array."""
    if group.kind == "cyclic":
        return np.arange(group.M).reshape(-1, 1)
    if group.kind == "prime_power":
        grids = np.meshgrid(*[np.arange(group.p)] * group.N, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)
    raise DomainError("interpolation needs a finite group (cyclic or prime_power)")


def _characters(group: GroupSpec, L) -> tuple:
    """Canonical distinct characters; unlike FreqSet the trivial character is allowed."""
    elems = L.elements if isinstance(L, FreqSet) else tuple(L)
    canon = tuple(group.canonical(e) for e in elems)
    if len(set(canon)) != len(canon):
        raise Infeasible("repeated characters make the constraints inconsistent or redundant")
    return canon


def character_matrix(group: GroupSpec, L) -> np.ndarray:
    """``X[g, t] = gamma_g(t)`` for gamma in L and t in the group."""
    atoms = group_atoms(group)
    mod = group.M if group.kind == "cyclic" else group.p
    L = _characters(group, L)
    freqs = np.array([np.atleast_1d(e) for e in L], dtype=np.int64).reshape(len(L), -1)
    phase = (freqs @ atoms.T) % mod
    return np.exp(2j * np.pi * phase / mod)


def _certify(X: np.ndarray, z: np.ndarray, u: np.ndarray, c: np.ndarray):
    n = X.shape[1]
    # project u onto the constraint set; characters are orthonormal in L2(w)
    residual = z - (X.conj() @ u) / n
    u = u + X.T @ residual
    constraint_error = float(np.abs(z - (X.conj() @ u) / n).max())
    primal = float(np.abs(u).mean())
    envelope = float(np.abs(X.T @ c).max())
    if envelope > 0:
        c = c / envelope
    dual = float(np.real(np.vdot(z, c)))
    return u, c, primal, dual, constraint_error


def _solve_conic(X: np.ndarray, z: np.ndarray, tol: float):
    import cvxpy as cp

    n_chars, n = X.shape
    ur = cp.Variable(n)
    ui = cp.Variable(n)
    Ar, Ai = X.real / n, X.imag / n
    # sum_t w u conj(gamma) = (Ar ur + Ai ui) + i (Ar ui - Ai ur)
    cons_r = Ar @ ur + Ai @ ui == z.real
    cons_i = Ar @ ui - Ai @ ur == z.imag
    objective = cp.Minimize(cp.sum(cp.norm(cp.vstack([ur, ui]), 2, axis=0)) / n)
    prob = cp.Problem(objective, [cons_r, cons_i])
    eps = min(1e-8, tol * 1e-2)
    try:
        prob.solve(solver=cp.CLARABEL, tol_gap_abs=eps, tol_gap_rel=eps, tol_feas=eps)
    except cp.error.SolverError:
        prob.solve(solver=cp.SCS, eps=eps, max_iters=200000)
    if prob.status in ("infeasible", "infeasible_inaccurate"):
        raise Infeasible("interpolation constraints are inconsistent")
    if ur.value is None:
        raise ToleranceNotMet(f"solver returned status {prob.status}")
    u = ur.value + 1j * ui.value
    # Lagrangian with multipliers y: the dual function is Re <c, z> with c = -(yr + i yi)
    yr = np.asarray(cons_r.dual_value, dtype=float)
    yi = np.asarray(cons_i.dual_value, dtype=float)
    c = -(yr + 1j * yi)
    return u, c


def interpolate_l1(group: GroupSpec, L, z, tol: float = 1e-6) -> InterpolationSolution:
    """Smallest-L1 density with prescribed Fourier coefficients on L, with a duality gap."""
    L = _characters(group, L)
    order = group.order
    if order is None:
        raise DomainError("interpolation needs a finite group")
    if len(L) > order:
        raise DomainError("more constraints than group elements")
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.size != len(L):
        raise DomainError("one target per character is required")
    X = character_matrix(group, L)
    if len(L) == order:
        # square system: the inverse transform is the only feasible density
        u = X.T @ z
        c = _best_square_dual(X, z)
    else:
        u, c = _solve_conic(X, z, tol)
    u, c, primal, dual, cerr = _certify(X, z, u, c)
    if cerr > 1e-8 * max(1.0, float(np.abs(z).max())):
        raise Infeasible(f"constraint residual {cerr} after projection")
    gap = primal - dual
    sol = InterpolationSolution(u, primal, dual, gap, c, cerr, targets=z)
    if gap > tol * max(abs(primal), 1e-300):
        raise ToleranceNotMet(f"relative gap {sol.relative_gap:.3g} above {tol}", primal=primal, dual=dual)
    return sol


def _best_square_dual(X: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Dual certificate for the square case: c = transform of sign(u)."""
    n = X.shape[1]
    u = X.T @ z
    phase = np.where(np.abs(u) > 0, u / np.maximum(np.abs(u), 1e-300), 0)
    return (X.conj() @ phase) / n


def _phase_patterns(n: int, phase_samples: int | None, seed: int):
    if phase_samples is None and n <= 16:
        # z and -z give the same optimum, so fix the first sign
        for bits in itertools.product((1.0, -1.0), repeat=max(n - 1, 0)):
            yield np.array((1.0,) + bits, dtype=complex)[:n] if n else np.zeros(0, dtype=complex)
        return
    count = 64 if phase_samples is None else phase_samples
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield np.exp(2j * np.pi * rng.random(n))


@dataclass
class SidonSearchResult:
    lower_bound: float
    best_phases: np.ndarray
    evaluated: int
    values: list[float]


def sidon_constant_search(group: GroupSpec, L, phase_samples: int | None = None, seed: int = 0,
                          tol: float = 1e-6) -> SidonSearchResult:
    """Lower bound for the Sidon constant: max interpolation norm over sampled phases.

    With ``phase_samples=None`` and ``|L| <= 16`` every sign pattern is tried
    (up to global sign); otherwise seeded random phases, drawn as a stream so
    a longer run extends a shorter one.
    """
    L = _characters(group, L)
    patterns = list(_phase_patterns(len(L), phase_samples, seed))

    def solve(z):
        try:
            return interpolate_l1(group, L, z, tol).primal_value
        except ToleranceNotMet as exc:
            # the projected primal is still a feasible density, hence a valid bound
            return exc.primal

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        values = list(pool.map(solve, patterns))
    best = int(np.argmax(values))
    return SidonSearchResult(lower_bound=float(values[best]), best_phases=patterns[best],
                             evaluated=len(values), values=[float(v) for v in values])


def subgaussian_bridge_gap(A, x, M: int | None = None) -> float:
    """``log ∫ e^{Re(f)/2} dm - sum |x_n|^2 / 2`` for ``f = sum x_n e^{int}``; nonpositive for quasi-independent A."""
    _, elems = _scalar_freqs(A)
    x = np.asarray(x, dtype=complex)
    if M is None:
        M = 1 << max(3, (2 * max(abs(e) for e in elems) + 1).bit_length() + 2)
    t = 2 * np.pi * np.arange(M) / M
    f = x @ np.exp(1j * np.outer(elems, t))
    lhs = float(logsumexp(np.real(f) / 2) - math.log(M))
    return lhs - float(np.sum(np.abs(x) ** 2)) / 2
