import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marginforge.errors import DuplicateNodes, Infeasible
from marginforge.pick import (
    InterpolationProblem,
    PickMatrix,
    build_pick,
    is_feasible,
    max_entropy_interpolant,
)
from oracles import pick_2x2_feasible

AXIS = np.concatenate([-np.geomspace(1e4, 1e-4, 2048), np.geomspace(1e-4, 1e4, 2048)])


def two_point(w1):
    return InterpolationProblem([1.0, 2.0], [w1, 0.0])


def random_problem(rng, sep=0.3):
    """Conjugate-closed data sampled from a real Schur function ``c B(s)``.

    Draws are repeated until the nodes are pairwise separated by ``sep`` and
    the Pick matrix passes the feasibility test; the exact Pick matrix is
    always positive definite, but for clustered nodes its smallest
    eigenvalue falls below the decision margin.
    """
    while True:
        prob = _draw(rng)
        d = np.abs(prob.nodes[:, None] - prob.nodes[None, :]) + np.eye(len(prob)) * 9
        if d.min() >= sep and is_feasible(build_pick(prob)):
            return prob


def _draw(rng):
    n_real = int(rng.integers(0, 5))
    n_pair = int(rng.integers(0 if n_real else 1, (8 - n_real) // 2 + 1))
    nodes = list(rng.uniform(0.1, 5.0, n_real))
    for _ in range(n_pair):
        v = complex(rng.uniform(0.1, 3.0), rng.uniform(0.2, 4.0))
        nodes += [v, v.conjugate()]
    a = rng.uniform(0.2, 3.0)
    c = rng.uniform(-0.9, 0.9)
    nodes = np.array(nodes, dtype=complex)
    vals = c * (nodes - a) / (nodes + a) * (nodes + 0.5) / (nodes + 1.5)
    vals = np.where(nodes.imag == 0, vals.real, vals)
    return InterpolationProblem(nodes, vals)


def test_build_pick_examples():
    P = build_pick(two_point(0.3)).entries
    assert np.allclose(P, [[(1 - 0.09) / 2, 1 / 3], [1 / 3, 1 / 4]])
    one = build_pick(InterpolationProblem([1.0], [0.0]))
    assert np.allclose(one.entries, [[0.5]]) and is_feasible(one)
    edge = build_pick(InterpolationProblem([1.0], [1.0]))
    assert edge.entries[0, 0] == 0 and not is_feasible(edge)
    with pytest.raises(DuplicateNodes):
        InterpolationProblem([1.0, 1.0], [0.0, 0.1])


def test_is_feasible_examples():
    assert is_feasible(build_pick(two_point(0.3)))
    assert not is_feasible(build_pick(two_point(0.34)))
    assert is_feasible(PickMatrix([[0.5]]))
    assert not is_feasible(PickMatrix([[1.0, 0.0], [0.0, -1e-3]]))


def test_feasibility_flips_at_one_third():
    d = 1e-6
    # offset by half a step so no sample sits on the singular boundary
    grid = 1 / 3 + d * (np.arange(-50, 50) + 0.5)
    verdicts = np.array([is_feasible(build_pick(two_point(w))) for w in grid])
    oracle = np.array([pick_2x2_feasible(w) for w in grid])
    flips = np.flatnonzero(verdicts[1:] != verdicts[:-1])
    assert flips.size == 1
    j = flips[0]
    assert grid[j] < 1 / 3 < grid[j + 1]
    assert abs(0.5 * (grid[j] + grid[j + 1]) - 1 / 3) <= d
    assert np.sum(verdicts != oracle) <= 1


def test_interpolant_examples():
    zero = max_entropy_interpolant(InterpolationProblem([0.7], [0.0]))
    assert np.max(np.abs(zero(1j * AXIS))) < 1e-12
    half = max_entropy_interpolant(InterpolationProblem([1.0], [0.5]))
    assert np.allclose(half(1j * AXIS), 0.5)
    T = max_entropy_interpolant(two_point(0.3))
    assert T(1.0) == pytest.approx(0.3, abs=1e-8)
    assert abs(T(2.0)) < 1e-8
    assert np.max(np.abs(T(1j * AXIS))) < 1


def test_infeasible_raises():
    with pytest.raises(Infeasible):
        max_entropy_interpolant(two_point(0.5))


def test_random_problems_residual_and_norm():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        prob = random_problem(rng)
        T = max_entropy_interpolant(prob)
        res = np.abs(T(prob.nodes) - prob.values) / np.maximum(1.0, np.abs(prob.values))
        assert res.max() <= 1e-8
        has_real = bool(np.any(prob.nodes.imag == 0))
        assert max(T.num.degree, T.den.degree) <= len(prob) - (1 if has_real else 0)
        assert np.max(np.abs(T(1j * AXIS))) < 1
        assert abs(T.value_at_infinity()) < 1
        assert T.is_stable()


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40)
def test_real_symmetry(seed):
    prob = random_problem(np.random.default_rng(seed))
    T = max_entropy_interpolant(prob)
    for p in (T.num, T.den):
        c = np.asarray(p.coeffs)
        assert np.max(np.abs(np.imag(c))) <= 1e-10 * max(1.0, np.max(np.abs(c)))
