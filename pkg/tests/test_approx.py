import numpy as np
import pytest

from marginforge.approx import CoinvariantBasis, approx_weight, reduce_interpolant
from marginforge.errors import SingularSystem, ZeroCountOverflow
from marginforge.pick import InterpolationProblem
from marginforge.rational import Polynomial, RationalFunction
from marginforge.weights import WeightFunction, WeightSpec

AXIS = 1j * np.concatenate([-np.geomspace(1e3, 1e-3, 800), np.geomspace(1e-3, 1e3, 800)])


def sup_diff(A, B):
    return float(np.max(np.abs(A(AXIS) - B(AXIS))))


@pytest.fixture(scope="module")
def delay_fit():
    w = WeightFunction(WeightSpec(tau_bar=1.0))
    return w, approx_weight(w, 10, 10)


@pytest.fixture(scope="module")
def spurious():
    """``T(1) = 1/2`` times a spurious second-order factor normalized at ``s = 1``."""
    F = RationalFunction(Polynomial([1.0, 1.0, 1.0]), Polynomial([1.05, 1.1, 1.0]))
    G = RationalFunction(Polynomial([2.0, 1.0]), Polynomial([3.0, 1.0]))
    T = G * F * (0.5 / (0.75 * complex(F(1.0)).real))
    return T, InterpolationProblem([1.0], [0.5])


def test_constant_weight_exact():
    fit = approx_weight(lambda w: np.full(np.shape(w), 2.0), 0, 0)
    assert fit.eps_star == pytest.approx(0.0, abs=1e-6)
    assert fit.magnitude(np.array([0.0, 1.0, 1e3])) == pytest.approx([2.0] * 3, rel=1e-6)


def test_first_order_weight_exact():
    fit = approx_weight(lambda w: np.abs(1j * np.asarray(w) + 1.0), 1, 0)
    assert fit.eps_star == pytest.approx(0.0, abs=1e-3)
    b = fit.b.coeffs / fit.a.coeffs[0]
    assert np.allclose(b, [1.0, 1.0], atol=1e-3)


def test_degree_ten_delay_fit(delay_fit):
    w, fit = delay_fit
    assert fit.eps_star <= 0.05
    assert fit.b.degree == 10 and fit.a.degree == 10
    ratio = fit.magnitude(fit.grid) / w(fit.grid)
    assert ratio.min() >= 1.0 - 1e-12
    assert ratio.max() <= 1.0 + fit.eps_star + 1e-12
    low = fit.magnitude(fit.lower_grid) / w(fit.lower_grid)
    assert low.min() >= 1.0 - 1e-12


def test_fit_is_stable(delay_fit):
    _, fit = delay_fit
    for p in (fit.a, fit.b):
        assert np.max(p.roots().real) <= -1e-9


def test_bisection_trace_monotone(delay_fit):
    _, fit = delay_fit
    feasible = [e for e, ok in fit.trace if ok]
    infeasible = [e for e, ok in fit.trace if not ok]
    assert feasible
    if infeasible:
        assert max(infeasible) < min(feasible)


def test_improper_rolloff_relative_degree():
    w = WeightFunction(WeightSpec(tau_bar=1.0))
    fit = approx_weight(w, 5, 4, improper_rolloff=1)
    assert fit.relative_degree == -1
    big = np.geomspace(1e4, 1e6, 5)
    assert np.all(np.diff(fit.magnitude(big)) > 0)
    with pytest.raises(ValueError):
        approx_weight(w, 4, 4, improper_rolloff=1)


def test_coinvariant_basis_solve():
    basis = CoinvariantBasis([1.0, 0.5 + 2j, 0.5 - 2j])
    vals = np.array([0.3, 1 - 1j, 1 + 1j])
    alpha = basis.solve(vals)
    assert np.allclose(basis.cauchy(basis.poles) @ alpha, vals)
    with pytest.raises(SingularSystem):
        CoinvariantBasis([1.0, 1.0])


@pytest.mark.parametrize("n_T", [1, 2, 3, 4])
def test_reduction_preserves_data(spurious, n_T):
    T, prob = spurious
    Th = reduce_interpolant(T, prob, n_T)
    assert abs(Th(1.0) - 0.5) <= 1e-6
    assert max(Th.num.degree, Th.den.degree) <= n_T
    assert Th.is_stable()


def test_reduction_fixed_point(spurious):
    T, prob = spurious
    Th = reduce_interpolant(T, prob, 4)
    again = reduce_interpolant(Th, prob, 4, eps_tol=1e-6)
    assert sup_diff(again, Th) <= 1e-5


@pytest.mark.parametrize("n_T", [4, 6])
def test_reduction_converges_as_fit_tightens(spurious, n_T):
    T, prob = spurious
    errs = [sup_diff(reduce_interpolant(T, prob, n_T, eps_target=e), T) for e in (0.2, 0.1, 0.05, 0.01)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_zero_count_overflow():
    # two right half-plane zeros but a single node
    T = RationalFunction.from_zpk([1.0, 2.0], [-1.0, -2.0, -3.0], 0.1)
    prob = InterpolationProblem([0.5], [complex(T(0.5))])
    with pytest.raises(ZeroCountOverflow):
        reduce_interpolant(T, prob, 3)
