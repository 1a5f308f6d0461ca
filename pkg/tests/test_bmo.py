from fractions import Fraction

import numpy as np
import pytest

from thinset.bmo import (
    ArcFamily, Mean1, Psi, arc_oscillations, block_phi_sums, bmo_bruteforce, bmo_norm, check_block_bridge,
    fejer_l1, lacunary_bmo_ratio, pairing_identity, trapezoid_coefficient, trapezoid_poly,
)
from thinset.errors import AliasError, DomainError
from thinset.spectrum import SampledFunction, TrigPoly, fejer_poly, synth_eval
from thinset.subgauss import DiscreteDistribution, psi_norm


def grid(M):
    return 2 * np.pi * np.arange(M) / M


def test_constant_function():
    assert bmo_norm(SampledFunction(np.full(32, -3.0))) == pytest.approx(3.0)
    assert bmo_norm(SampledFunction(np.full(32, 2.0)), Psi(2)) == pytest.approx(2.0)


def test_cosine_against_brute_force():
    f = SampledFunction(np.cos(grid(256)))
    assert bmo_norm(f, Mean1(), ArcFamily.all_grid(256)) == pytest.approx(bmo_bruteforce(f.values), abs=1e-12)


def test_homogeneity():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(64)
    one = bmo_norm(SampledFunction(v))
    assert bmo_norm(SampledFunction(2 * v)) == pytest.approx(2 * one)
    assert bmo_norm(SampledFunction(2 * v), Psi(2)) == pytest.approx(2 * bmo_norm(SampledFunction(v), Psi(2)))


def test_dyadic_family_within_envelope():
    rng = np.random.default_rng(1)
    for _ in range(20):
        M = int(rng.choice([16, 32, 64]))
        v = rng.standard_normal(M) * rng.uniform(0.1, 3) + (rng.random() < 0.5) * np.sign(grid(M) - np.pi)
        f = SampledFunction(v)
        full = bmo_norm(f, Mean1(), ArcFamily.all_grid(M))
        dy = bmo_norm(f, Mean1())
        assert full / 4 <= dy <= full + 1e-12


def test_psi_arc_norm_matches_scalar():
    rng = np.random.default_rng(2)
    v = rng.standard_normal(32)
    arcs = ArcFamily(32, (5,), "custom")
    osc = arc_oscillations(SampledFunction(v), Psi(2), arcs)
    for s in (0, 7, 30):
        seg = v[(s + np.arange(5)) % 32]
        want = psi_norm(DiscreteDistribution(np.abs(seg - seg.mean())), 2)
        assert osc[s] == pytest.approx(want, rel=1e-10)


def test_arc_family_validation():
    with pytest.raises(DomainError):
        ArcFamily(8, (0, 2), "custom")
    assert len(ArcFamily.dyadic(64)) == 64 * 7
    with pytest.raises(DomainError):
        arc_oscillations(SampledFunction(np.ones(8)), Mean1(), ArcFamily.dyadic(16))


def test_fejer_kernel():
    for N in (1, 5, 16, 37):
        F = synth_eval(fejer_poly(N), 4 * N + 4)
        assert F.values.real.min() >= -1e-12
        assert fejer_l1(N) == pytest.approx(1, abs=1e-10)


def test_trapezoid_coefficients():
    for n in range(1, 6):
        assert trapezoid_coefficient(n, 1 << n) == 1
        assert trapezoid_coefficient(n, 0) == 0
        assert trapezoid_coefficient(n, 3 << n) == 0
        assert trapezoid_coefficient(n, (1 << n) + (1 << (n - 1))) == 1
    assert trapezoid_coefficient(3, 4) == Fraction(1, 2)
    assert trapezoid_coefficient(3, 20) == Fraction(1, 2)


def test_trapezoid_decomposition_and_norm():
    for n in range(1, 11):
        spec = trapezoid_poly(n)
        assert spec.grid >= 4 * (3 << n)
        if n <= 8:
            assert spec.l1_norm <= 2 + 1e-6
    with pytest.raises(AliasError):
        trapezoid_poly(3, M=40)


def random_lacunary_poly(rng):
    elems = sorted({int(2**k + rng.integers(0, 2 ** max(k - 2, 0) + 1)) for k in range(1, 11)})
    elems = [e for i, e in enumerate(elems) if i == 0 or e >= 1.2 * elems[i - 1]]
    coeffs = rng.standard_normal(len(elems)) + 1j * rng.standard_normal(len(elems))
    return TrigPoly.of(dict(zip(elems, coeffs)))


def test_pairing_identity_random():
    rng = np.random.default_rng(3)
    for _ in range(100):
        f = random_lacunary_poly(rng)
        n = int(rng.integers(1, 8))
        lhs, rhs = pairing_identity(f, n)
        assert abs(lhs - rhs) <= 1e-9


def test_pairing_identity_examples():
    lhs, rhs = pairing_identity(TrigPoly.of({8: 1.0}), 3)
    assert lhs == pytest.approx(0.5) and rhs == pytest.approx(0.5)
    lhs, rhs = pairing_identity(TrigPoly.of({100: 2.0, 200: 1.0}), 2)
    assert abs(lhs) < 1e-12 and abs(rhs) < 1e-12
    with pytest.raises(AliasError):
        pairing_identity(TrigPoly.of({8: 1.0}), 3, M=32)


def test_block_bridge():
    assert check_block_bridge([2, 3, 4])
    assert block_phi_sums([5, 6, 7], 2) == 3
    assert check_block_bridge([2**k for k in range(1, 12)])
    assert check_block_bridge([1, 3, 5, 9, 10, 11, 17, 40, 41])


def test_ratio_single_frequency_is_constant():
    stats = lacunary_bmo_ratio([5], trials=6, seed=0)
    assert stats.max_ratio == pytest.approx(stats.min_ratio, rel=1e-9)
    one = bmo_norm(SampledFunction(np.exp(5j * grid(stats.M))), Psi(2))
    assert stats.max_ratio == pytest.approx(one, rel=1e-9)


def test_ratio_pipeline_lacunary():
    stats = lacunary_bmo_ratio([2**k for k in range(7)], trials=10, seed=4)
    assert np.isfinite(stats.max_ratio) and stats.min_ratio <= stats.mean_ratio <= stats.max_ratio
    again = lacunary_bmo_ratio([2**k for k in range(7)], trials=10, seed=4)
    assert again.to_json() == stats.to_json()
    with pytest.raises(AliasError):
        lacunary_bmo_ratio([64], trials=2, M=64)
