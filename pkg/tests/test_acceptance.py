"""The sixteen acceptance criteria, each at its stated tolerance.

Every test prints one ``ACCEPTANCE k: PASS|FAIL`` line (also collected in the
terminal summary) and then asserts the criterion.
"""

import json
import math
import time

import numpy as np
import pytest

from cli_cases import CASES, result_fields
from thinset.bmo import fejer_l1, lacunary_bmo_ratio, pairing_identity, trapezoid_poly
from thinset.cli import run
from thinset.codes import counting_bound, exact_N, gv_greedy
from thinset.gaussian import (
    LIPSCHITZ, HermiteExpansion, T, apply_operator, kernel_mass, lipschitz_concentration, mehler_kernel,
    mehler_series, multi_indices, reconstruction_error, tensor_decompose,
)
from thinset.matroid import GFVectorSet, Partition, gf_rank, horn_rado_partition
from thinset.relations import RelationCertificate, is_quasi_independent, relation_count, relation_integral
from thinset.riesz import coefficient_law_error, interpolate_l1, riesz_product
from thinset.spectrum import FreqSet, GroupSpec, TrigPoly
from thinset.subgauss import (
    DiscreteDistribution, FunctionSystem, normal_quadrature, psi_norm, rademacher, sg_constant, sg_system_lower,
)


@pytest.fixture
def record(request):
    def emit(k, ok, detail):
        line = f"ACCEPTANCE {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        request.config.acceptance_lines.append(line)
        assert ok, line
    return emit


def test_01_relation_identity(record):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst, mismatches = 0.0, 0
    for _ in range(50):
        size = int(rng.integers(1, 9))
        A = rng.choice(np.r_[-40:0, 1:41], size=size, replace=False).tolist()
        val = relation_integral(A)
        worst = max(worst, abs(val - round(val)))
        mismatches += relation_count(A).count != round(val)
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and worst < 1e-6 and elapsed < 10
    record(1, ok, f"mismatches={mismatches} max pre-round error={worst:.2e} time={elapsed:.2f}s")


def test_02_quasi_independence_truths(record):
    a = is_quasi_independent([1, 2, 4, 8, 16])[0]
    ok_b, cert = is_quasi_independent([1, 2, 3])
    b = not ok_b and cert is not None
    if b:
        RelationCertificate(FreqSet.of([1, 2, 3]), cert.signs)
    exp_set = [4 ** (n * n) + 2**j for n in range(1, 4) for j in range(1, n + 1)]
    c, witness = is_quasi_independent(exp_set)
    detail = f"doubling={a} 123-witness={cert.signs if b else None} exponential-set={c}"
    if not c:
        detail += f" (relation {witness.signs})"
    record(2, a and b and c, detail)


def brute_partition(V, k):
    """Backtracking assignment of vectors to k independent classes."""
    n = len(V)
    parts = [[] for _ in range(k)]

    def place(i):
        if i == n:
            return True
        tried_empty = False
        for part in parts:
            if not part:
                if tried_empty:
                    continue
                tried_empty = True
            part.append(i)
            if gf_rank(V, part) == len(part) and place(i + 1):
                return True
            part.pop()
        return False

    return place(0)


def test_03_horn_rado(record):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    disagreements = bad_certificates = 0
    for trial in range(200):
        p = (2, 3)[trial % 2]
        N, size = int(rng.integers(1, 5)), int(rng.integers(1, 13))
        vecs = []
        while len(vecs) < size:
            v = rng.integers(0, p, N)
            if v.any():
                vecs.append(v.tolist())
        V = GFVectorSet.of(p, vecs)
        for k in (1, 2, 3):
            out = horn_rado_partition(V, k)
            disagreements += isinstance(out, Partition) != brute_partition(V, k)
            if isinstance(out, Partition):
                cover = sorted(i for part in out.parts for i in part) == list(range(len(V)))
                bad_certificates += not (cover and len(out.parts) <= k
                                         and all(gf_rank(V, q) == len(q) for q in out.parts))
            else:
                bad_certificates += not (gf_rank(V, out.subset) == out.rank and out.rank * k < len(out.subset))
    elapsed = time.perf_counter() - start
    ok = disagreements == 0 and bad_certificates == 0 and elapsed < 30
    record(3, ok, f"disagreements={disagreements} bad certificates={bad_certificates} time={elapsed:.1f}s")


def test_04_orlicz_exactness(record):
    r = psi_norm(rademacher(), 2)
    g = psi_norm(normal_quadrature(), 2)
    target = math.sqrt(2 / (1 - math.exp(-2)))
    ok = abs(r - 1) <= 1e-8 and abs(g - target) <= 1e-4
    record(4, ok, f"rademacher={r:.12f} normal={g:.8f} (target {target:.8f})")


def test_05_subgaussian_constants(record):
    r = sg_constant(rademacher())
    g = sg_constant(normal_quadrature())
    est = sg_system_lower(FunctionSystem.characters([1, 2, 4], M=1024), restarts=16, seed=0)
    ok = abs(r - 1) <= 1e-6 and abs(g - 1) <= 1e-3 and est.value <= 2 + 0.05
    record(5, ok, f"rademacher={r:.9f} normal={g:.6f} system{{1,2,4}} lower={est.value:.4f}")


def distribution_battery(count, seed):
    rng = np.random.default_rng(seed)
    out = [rademacher(), normal_quadrature()]
    while len(out) < count:
        k = int(rng.integers(2, 400))
        v = (rng.standard_normal(k), rng.exponential(size=k), rng.uniform(-1, 1, k) ** 3,
             rng.choice([-1.0, 0.0, 5.0], k))[len(out) % 4]
        p = rng.dirichlet(np.ones(k) * rng.uniform(0.2, 2))
        out.append(DiscreteDistribution((v - p @ v) * rng.uniform(0.1, 10), p))
    return out


def test_06_sandwich_constants(record):
    upper, lower = math.sqrt(8 * math.e), math.sqrt(2 * (math.e + 1) / (math.e - 1))
    violations, worst = 0, 0.0
    for d in distribution_battery(100, seed=42):
        sg, psi = sg_constant(d), psi_norm(d, 2)
        violations += (sg > upper * psi) + (psi > lower * sg)
        worst = max(worst, sg / (upper * psi), psi / (lower * sg))
    record(6, violations == 0, f"violations={violations} worst ratio to constant={worst:.3f}")


def test_07_azuma(record):
    rng = np.random.default_rng(17)
    n = 8
    eps = ((np.arange(2**n)[None, :] >> np.arange(n)[:, None]) & 1) * 2.0 - 1.0
    worst = 0.0
    for _ in range(100):
        d = np.empty_like(eps)
        for k in range(n):
            table = rng.uniform(-1, 1, 2**k)
            past = ((eps[:k] > 0) * (1 << np.arange(k))[:, None]).sum(axis=0).astype(int)
            d[k] = eps[k] * table[past]
        x = rng.standard_normal(n)
        worst = max(worst, sg_constant(DiscreteDistribution(x @ d)) / np.linalg.norm(x))
    record(7, worst <= 1.05, f"max sg/||x||_2 = {worst:.4f} over 100 martingales")


def test_08_riesz_coefficient_law(record):
    rng = np.random.default_rng(8)
    battery = {"doubling": [2**k for k in range(10)], "powers of 3": [3**k for k in range(10)]}
    while len(battery) < 5:
        A = sorted(rng.choice(np.arange(1, 400), size=int(rng.integers(3, 9)), replace=False).tolist())
        if is_quasi_independent(A)[0]:
            battery[str(A)] = A
    errors = {}
    for name, A in battery.items():
        errors[name] = max(coefficient_law_error(riesz_product(A, np.exp(2j * np.pi * rng.random(len(A)))))
                           for _ in range(20))
    ok = max(errors.values()) <= 1e-9
    record(8, ok, "max law error: " + ", ".join(f"{k}={v:.1e}" for k, v in errors.items()))


def test_09_interpolation(record):
    singles = [interpolate_l1(GroupSpec.cyclic(M), [g], [1], tol=1e-8) for M, g in ((4, 1), (9, 2), (32, 5))]
    single_ok = all(abs(s.primal_value - 1) <= 1e-8 and s.gap <= 1e-8 for s in singles)
    pair = interpolate_l1(GroupSpec.cyclic(4), [1, 3], [1, 1])
    pair_ok = abs(pair.primal_value - 1) <= 1e-6 and pair.gap <= 1e-6
    record(9, single_ok and pair_ok,
           f"single gaps={[f'{s.gap:.1e}' for s in singles]} pair value={pair.primal_value:.9f} gap={pair.gap:.1e}")


def test_10_mehler(record):
    worst = {}
    deltas = np.linspace(-0.7, 0.7, 15)
    pts = np.linspace(-2, 2, 9)
    worst[1] = max(abs(mehler_kernel([x], [t], d) - mehler_series([x], [t], d))
                   for d in deltas for x in pts for t in pts)
    coarse = np.linspace(-2, 2, 5)
    worst[2] = max(abs(mehler_kernel([a, b], [c, e], d) - mehler_series([a, b], [c, e], d))
                   for d in deltas[::2] for a in coarse for b in coarse for c in coarse for e in coarse)
    F = HermiteExpansion(2, 6, {a: float(v) for a, v in
                                zip(multi_indices(2, 6), np.random.default_rng(0).standard_normal(28))})
    semi = max(abs(apply_operator(apply_operator(F, T(d1)), T(d2)).coefficients[a]
                   - apply_operator(F, T(d1 * d2)).coefficients[a]) / max(abs(F.coefficients[a]), 1e-300)
               for d1, d2 in ((0.5, 0.3), (0.9, -0.7), (-0.2, 0.6)) for a in F.coefficients)
    mass = max(abs(kernel_mass(d, N) - 1) for d in (0.1, 0.5, 0.7, 0.9) for N in (1, 2, 3))
    ok = max(worst.values()) <= 1e-6 and semi <= 1e-14 and mass <= 1e-6
    record(10, ok, f"series error N=1 {worst[1]:.1e}, N=2 {worst[2]:.1e}; semigroup rel {semi:.1e}; "
                   f"mass {mass:.1e}")


def test_11_tensor_decomposition(record):
    worst_op = worst_l1 = worst_rec = 0.0
    for N in (1, 2, 3):
        for delta in np.round(np.arange(1, 10) / 10, 1):
            for D in range(4, 11):
                t, r = tensor_decompose(N, float(delta), max_degree=D)
                worst_op = max(worst_op, abs(r.op_norm() - delta))
                worst_l1 = max(worst_l1, t.l1_norm - 2 / delta)
                worst_rec = max(worst_rec, reconstruction_error(t, r, np.ones(N)))
    ok = worst_op <= 1e-15 and worst_l1 <= 1e-4 and worst_rec <= 1e-8
    record(11, ok, f"|op(r)-delta|={worst_op:.1e} max l1(t)-2/delta={worst_l1:.3f} reconstruction={worst_rec:.1e}")


def test_12_lipschitz(record):
    parts, ok = [], True
    for name in sorted(LIPSCHITZ):
        if name == "constant":
            continue
        est = lipschitz_concentration(name, 3, trials=100_000, seed=12)
        ok &= est.mean <= LIPSCHITZ[name][1] + 3 * est.stderr
        parts.append(f"{name}={est.mean:.4f}+-{est.stderr:.4f}")
    record(12, ok, " ".join(parts))


def test_13_codes(record):
    exact = [exact_N(n, 1, 0) == n for n in (2, 5, 9)] + [exact_N(4, 2, 1) == 6, exact_N(7, 3, 1) == 7]
    below = [(n, m, k) for n in range(2, 17) for m in range(1, n) for k in range(m)
             if len(gv_greedy(n, m, k)) < counting_bound(n, m, k) - 1e-9]
    record(13, all(exact) and not below, f"exact values ok={all(exact)} triples below counting bound={below}")


def test_14_bmo(record):
    fejer = max(abs(fejer_l1(N) - 1) for N in (1, 2, 7, 16, 64, 100))
    norms = [trapezoid_poly(n).l1_norm for n in range(1, 11)]  # raises if the decomposition is off
    rng = np.random.default_rng(14)
    pair_err = 0.0
    for _ in range(100):
        elems = [1]
        while elems[-1] < 3000:
            elems.append(int(math.ceil(elems[-1] * rng.uniform(1.3, 3.0))))
        f = TrigPoly.of(dict(zip(elems, rng.standard_normal(len(elems)) + 1j * rng.standard_normal(len(elems)))))
        lhs, rhs = pairing_identity(f, int(rng.integers(1, 10)), tol=1.0)
        pair_err = max(pair_err, abs(lhs - rhs))
    ok = fejer <= 1e-10 and max(norms) <= 2 + 1e-6 and pair_err <= 1e-9
    record(14, ok, f"fejer |L1-1|={fejer:.1e} max ||P_n||={max(norms):.6f} pairing error={pair_err:.1e}")


def test_15_comparative_pipeline(record):
    interval = lacunary_bmo_ratio(list(range(1, 65)), trials=200, seed=15)
    lacunary = lacunary_bmo_ratio([2**k for k in range(7)], trials=200, seed=15)
    factor = interval.max_ratio / lacunary.max_ratio
    record(15, factor >= 2, f"interval max={interval.max_ratio:.3f} lacunary max={lacunary.max_ratio:.3f} "
                            f"factor={factor:.2f} (M={interval.M})")


def test_16_determinism(capsys, record):
    differing = []
    for name, argv in sorted(CASES.items()):
        outs = []
        for _ in range(2):
            assert run(argv) == 0
            outs.append(result_fields(json.loads(capsys.readouterr().out)))
        if outs[0] != outs[1]:
            differing.append(name)
    record(16, not differing, f"{len(CASES)} CLI configurations repeated; differing={differing}")
