import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thinset.errors import AliasError, DomainError
from thinset.spectrum import (
    FreqSet, GroupSpec, SampledFunction, TrigPoly, character, fejer_poly, lp_norm, synth_eval,
)


def test_quarter_grid_character():
    f = synth_eval(TrigPoly.of({1: 1}), 4)
    assert np.allclose(f.values, [1, 1j, -1, -1j], atol=1e-15)


def test_constant_poly():
    f = synth_eval(TrigPoly.of({0: 2.5 - 1j}), 16)
    assert np.allclose(f.values, 2.5 - 1j)


def test_fejer_two_closed_form():
    f = synth_eval(fejer_poly(2), 8)
    t = 2 * np.pi * np.arange(8) / 8
    assert np.allclose(f.values, 2 * np.cos(t / 2) ** 2)
    assert f.values[0] == pytest.approx(2)


def test_empty_poly_is_zero():
    assert np.all(synth_eval(TrigPoly.of({}), 8).values == 0)


def test_alias_guard():
    with pytest.raises(AliasError):
        synth_eval(TrigPoly.of({5: 1}), 8)


def test_cyclic_lift_needs_multiple():
    poly = TrigPoly(GroupSpec.cyclic(4), {1: 1})
    assert np.allclose(synth_eval(poly, 8).values, [1, 1j, -1, -1j] * 2)
    with pytest.raises(AliasError):
        synth_eval(poly, 6)


def test_lp_norm_examples():
    assert lp_norm(character(7, 64), 3) == pytest.approx(1)
    assert lp_norm(synth_eval(fejer_poly(9), 64), 1) == pytest.approx(1, abs=1e-10)
    assert lp_norm(synth_eval(TrigPoly.of({0: 1, 1: 0.5, -1: 0.5}), 64), np.inf) == pytest.approx(2)
    with pytest.raises(DomainError):
        lp_norm(character(1, 8), 0.5)


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.integers(-20, 20), st.complex_numbers(max_magnitude=5, allow_nan=False), max_size=8))
def test_parseval_and_mean(coeffs):
    poly = TrigPoly.of(coeffs)
    f = synth_eval(poly, 64)
    assert np.mean(np.abs(f.values) ** 2) == pytest.approx(sum(abs(c) ** 2 for c in poly.coeffs.values()), abs=1e-10)
    assert abs(f.mean() - poly.coefficient(0)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False), min_size=2, max_size=40),
       st.integers(0, 100))
def test_norm_monotone_and_shift_invariant(vals, shift):
    f = SampledFunction(np.array(vals))
    norms = [lp_norm(f, p) for p in (1, 2, 4, np.inf)]
    assert all(a <= b * (1 + 1e-12) + 1e-300 for a, b in zip(norms, norms[1:]))
    assert lp_norm(f.roll(shift), 2) == lp_norm(f, 2) or np.isclose(lp_norm(f.roll(shift), 2), lp_norm(f, 2), rtol=1e-15)


def test_sampled_function_is_immutable():
    f = SampledFunction([1.0, 2.0])
    with pytest.raises(AttributeError):
        f.values = np.zeros(2)
    with pytest.raises(ValueError):
        f.values[0] = 3
    with pytest.raises(DomainError):
        SampledFunction([1.0, 2.0], [0.5, 0.6])


def test_freqset_invariants():
    with pytest.raises(DomainError):
        FreqSet.of([1, 2, 1])
    with pytest.raises(DomainError):
        FreqSet.of([0, 3])
    A = FreqSet(GroupSpec.cyclic(8), (9, 3))
    assert A.elements == (1, 3)
    V = FreqSet(GroupSpec.prime_power(3, 2), ((4, -1), (0, 1)))
    assert V.elements == ((1, 2), (0, 1))


def test_group_parse_and_json_roundtrip():
    for text in ("integers", "cyclic:64", "torus:1024", "prime_power:2:5"):
        g = GroupSpec.parse(text)
        assert GroupSpec.from_json(g.to_json()) == g
    with pytest.raises(DomainError):
        GroupSpec.prime_power(4, 2)
    poly = TrigPoly.of({3: 1 + 2j, -1: 0.5})
    assert TrigPoly.from_json(poly.to_json()) == poly
