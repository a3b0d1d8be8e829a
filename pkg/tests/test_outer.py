import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marginforge.cases import ex1_plant, ex2_plant
from marginforge.outer import OuterEvaluator, eval_outer, interpolation_values
from marginforge.rational import RationalFunction
from marginforge.weights import WeightFunction, WeightSpec
from oracles import outer_real_point


def ratio_weight(omega):
    w = 1j * np.asarray(omega, dtype=float)
    return np.abs(w + 1) / np.abs(w + 2)


def boundary_magnitude(ev, omega, sigma=1e-6):
    """``|W(i omega)|`` by first-order Richardson extrapolation in ``Re s``."""
    a = abs(eval_outer(ev, sigma + 1j * omega))
    b = abs(eval_outer(ev, 2 * sigma + 1j * omega))
    return 2 * a - b


def test_constant_weight():
    ev = OuterEvaluator(lambda w: np.full(np.shape(w), 3.0))
    for s in (1.0, 0.1 + 4j, 20 - 3j):
        assert eval_outer(ev, s) == pytest.approx(3.0, rel=1e-6)


def test_rational_outer():
    ev = OuterEvaluator(ratio_weight)
    assert eval_outer(ev, 1.0) == pytest.approx(2.0 / 3.0, abs=1e-6)
    s = 0.4 + 1.7j
    assert eval_outer(ev, s) == pytest.approx((s + 1) / (s + 2), abs=1e-6)


def test_delay_weight_at_benchmark_pole():
    w = WeightFunction(WeightSpec(tau_bar=1.0))
    ev = OuterEvaluator(w)
    want = outer_real_point(w, 0.1081)
    assert eval_outer(ev, 0.1081) == pytest.approx(want, rel=1e-6)


def test_magnitude_fidelity_floored_delay():
    w = WeightFunction(WeightSpec(tau_bar=1.0))
    ev = OuterEvaluator(w)
    rng = np.random.default_rng(7)
    om = rng.uniform(-100.0, 100.0, 100)
    got = np.array([boundary_magnitude(ev, x) for x in om])
    rel = np.abs(got / w(om) - 1.0)
    assert rel.max() <= 10 * ev.quad_tol


@given(st.floats(0.05, 5.0), st.floats(-5.0, 5.0))
@settings(max_examples=20)
def test_conjugate_symmetry(sigma, y):
    ev = OuterEvaluator(WeightFunction(WeightSpec(tau_bar=0.7)))
    s = complex(sigma, y)
    assert eval_outer(ev, s.conjugate()) == pytest.approx(np.conj(eval_outer(ev, s)), rel=1e-9)


@given(st.floats(0.0, 10.0), st.floats(0.0, 10.0), st.floats(0.02, 5.0))
@settings(max_examples=20)
def test_monotone_transfer(t1, t2, p):
    t1, t2 = sorted((t1, t2))
    w1 = eval_outer(OuterEvaluator(WeightFunction(WeightSpec(tau_bar=t1))), p)
    w2 = eval_outer(OuterEvaluator(WeightFunction(WeightSpec(tau_bar=t2))), p)
    assert abs(w1) <= abs(w2) * (1 + 1e-8)


def test_interpolation_values_unshifted():
    ev = OuterEvaluator(WeightFunction(WeightSpec(tau_bar=2.0)))
    prob = interpolation_values(ev, ex1_plant())
    assert prob.values[1] == 0
    assert prob.values[0] == pytest.approx(eval_outer(ev, 0.1081))
    single = interpolation_values(ev, ex2_plant(0.5, z=2.0))
    assert single.values[0] == pytest.approx(eval_outer(ev, 0.5))


def test_interpolation_values_constant_shift():
    ev = OuterEvaluator(WeightFunction(WeightSpec(tau_bar=1.0, shift=RationalFunction.constant(-10.0))))
    prob = interpolation_values(ev, ex2_plant(0.5), RationalFunction.constant(-10.0))
    assert prob.values[1] == pytest.approx(10.0 * eval_outer(ev, 2.0))
    assert prob.values[0] == pytest.approx(11.0 * eval_outer(ev, 0.5))


def test_rejects_left_half_plane():
    ev = OuterEvaluator(ratio_weight)
    with pytest.raises(ValueError):
        eval_outer(ev, -0.1)
