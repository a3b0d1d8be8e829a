import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from marginforge.cases import ex1_plant, ex4_plant
from marginforge.errors import InvalidPolynomial, PoleEvaluation, StablePlant
from marginforge.rational import (
    Polynomial,
    RationalFunction,
    classify_plant,
    evaluate,
    roots,
    spectral_factor,
)

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def horner(desc, s):
    acc = 0j
    for c in desc:
        acc = acc * s + c
    return acc


def test_evaluate_simple():
    f = RationalFunction([-2.0, 1.0], [-1.0, 1.0])
    assert evaluate(f, 0.0) == pytest.approx(2.0)
    assert evaluate(RationalFunction.constant(1.0), 3 + 4j) == pytest.approx(1.0)


def test_evaluate_matches_horner_on_benchmark_plant():
    P = ex1_plant().transfer
    num = np.polymul([0.01, -0.1], [1.0, 0.1659]) * 1.0
    den = np.polymul([1.0, -0.1081], [1.0, 0.2981, 0.06281])
    for s in (1.0, 0.3 + 2j, -4.0 + 0.1j):
        assert evaluate(P, s) == pytest.approx(horner(num, s) / horner(den, s), rel=1e-12)


def test_pole_evaluation_raises():
    f = RationalFunction([1.0], [-1.0, 1.0])
    with pytest.raises(PoleEvaluation):
        f(1.0)
    v = f(np.array([1.0, 2.0]))
    assert np.isnan(v[0]) and v[1] == pytest.approx(1.0)


def test_roots_examples():
    r = roots(Polynomial.from_descending([1.0, 0.0, -1.0]))
    assert np.allclose(sorted(r.real), [-1.0, 1.0])
    q = roots(Polynomial.from_descending([1.0, 0.2981, 0.06281]))
    assert np.allclose(q.real, -0.14905, atol=1e-12)
    assert q[0] == np.conj(q[1])
    with pytest.raises(InvalidPolynomial):
        roots(Polynomial([3.0]))


@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=6))
def test_roots_from_roots_identity(pairs):
    # real roots and conjugate pairs, kept distinct
    rts = []
    for a, b in pairs:
        if abs(b) < 0.3:
            rts.append(complex(a, 0))
        else:
            rts += [complex(a, b), complex(a, -b)]
    rts = np.array(rts)
    if rts.size > 12:
        rts = rts[:12]
    if rts.size > 1:
        gaps = np.abs(rts[:, None] - rts[None, :]) + np.eye(rts.size) * 10
        if gaps.min() < 0.3:
            return
    p = Polynomial.from_roots(rts)
    got = roots(p)
    for r in rts:
        assert np.min(np.abs(got - r)) < 1e-8 * max(1.0, abs(r)) * 10 ** (rts.size / 4)


@given(st.lists(finite, min_size=1, max_size=5), st.lists(finite, min_size=2, max_size=6),
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_conjugate_symmetry(num, den, s):
    if all(abs(c) < 1e-3 for c in den):
        return
    f = RationalFunction(num, den)
    try:
        with np.errstate(all="ignore"):
            a, b = f(np.conj(s)), np.conj(f(s))
    except PoleEvaluation:
        return
    if np.isfinite(a) and np.isfinite(b):
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


def test_classify_examples():
    P = classify_plant(RationalFunction([-2.0, 1.0], [-0.5, 1.0]))
    assert P.unstable_poles == (0.5,) and P.nmp_zeros == (2.0,)
    E = ex1_plant()
    assert np.allclose(E.unstable_poles, [0.1081]) and np.allclose(E.nmp_zeros, [10.0])
    with pytest.raises(StablePlant):
        classify_plant(RationalFunction([1.0], [1.0, 1.0]))


@pytest.mark.parametrize("r,th", [(1, np.pi / 4), (1, np.pi / 3), (2, np.pi / 3)])
def test_classify_exact_conjugate_pair(r, th):
    P = ex4_plant(r, th, 1.0)
    a, b = P.unstable_poles
    assert a == np.conj(b)
    assert abs(a - r * np.exp(1j * th)) < 1e-9 or abs(b - r * np.exp(1j * th)) < 1e-9


@pytest.mark.parametrize("B,expect", [
    ([1.0, 1.0], [1.0, 1.0]),
    ([4.0], [2.0]),
    ([4.0, 5.0, 1.0], [2.0, 3.0, 1.0]),
])
def test_spectral_factor_examples(B, expect):
    b = spectral_factor(Polynomial(B))
    assert np.allclose(b.coeffs, expect, atol=1e-9)


@given(st.lists(st.floats(0.05, 4), min_size=1, max_size=4), st.floats(0.1, 3))
def test_spectral_factor_magnitude(rs, g):
    # B(w) = g^2 prod (w^2 + r^2) is nonnegative
    B = Polynomial([g * g])
    for r in rs:
        B = B * Polynomial([r * r, 1.0])
    b = spectral_factor(B)
    w = np.linspace(-10, 10, 1000)
    err = np.max(np.abs(np.abs(b(1j * w)) ** 2 - B(w ** 2)))
    assert err <= 1e-6 * (1 + B.norm())
    assert np.all(roots(b).real < 0) if b.degree else True
