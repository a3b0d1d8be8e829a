"""Nevanlinna-Pick interpolation on the right half-plane.

A function analytic in ``Re s > 0`` with ``sup |f| < 1`` and ``f(v_j) = w_j``
exists iff the Pick matrix ``[(1 - w_j conj(w_k)) / (v_j + conj(v_k))]`` is
positive definite.  The central (maximum entropy) solution is built by the
Schur recursion: peel one node at a time with a Blaschke factor and stop with
the zero parameter.
"""

import numpy as np

from .errors import DuplicateNodes, IllConditioned, Infeasible
from .rational import Polynomial, RationalFunction

__all__ = [
    "InterpolationProblem",
    "PickMatrix",
    "build_pick",
    "is_feasible",
    "default_margin",
    "max_entropy_interpolant",
]

NODE_TOL = 1e-9


class InterpolationProblem:
    """Nodes ``v`` in the open right half-plane and target values ``w``.

    Raises
    ------
    ValueError
        If a node has ``Re v <= 0`` or the lengths differ.
    DuplicateNodes
        If two nodes coincide.
    """

    def __init__(self, nodes, values):
        v = np.atleast_1d(np.asarray(nodes, dtype=complex))
        w = np.atleast_1d(np.asarray(values, dtype=complex))
        if v.shape != w.shape or v.ndim != 1:
            raise ValueError("nodes and values must be 1-D and of equal length")
        if np.any(v.real <= 0):
            raise ValueError("nodes must lie in the open right half-plane")
        for i in range(v.size):
            for j in range(i + 1, v.size):
                if abs(v[i] - v[j]) <= NODE_TOL * max(1.0, abs(v[i])):
                    raise DuplicateNodes(f"nodes {v[i]} and {v[j]} coincide")
        self.nodes = v
        self.values = w

    def __len__(self):
        return self.nodes.size

    def __repr__(self):
        return f"InterpolationProblem(nodes={self.nodes!r}, values={self.values!r})"

    @property
    def conjugate_closed(self):
        """True if ``(v, w)`` pairs are closed under joint conjugation."""
        used = np.zeros(self.nodes.size, dtype=bool)
        for i, (v, w) in enumerate(zip(self.nodes, self.values)):
            if used[i]:
                continue
            if v.imag == 0:
                if abs(w.imag) > 1e-10 * max(1.0, abs(w)):
                    return False
                used[i] = True
                continue
            d = np.where(used, np.inf, np.abs(self.nodes - np.conj(v)))
            j = int(np.argmin(d))
            if d[j] > 1e-9 * max(1.0, abs(v)) or abs(self.values[j] - np.conj(w)) > 1e-9 * max(1.0, abs(w)):
                return False
            used[i] = used[j] = True
        return True


class PickMatrix:
    """Hermitian Pick matrix of an :class:`InterpolationProblem`."""

    def __init__(self, entries):
        self.entries = np.asarray(entries, dtype=complex)

    @property
    def trace(self):
        return float(np.real(np.trace(self.entries)))

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.entries)[0])


def build_pick(prob):
    v, w = prob.nodes, prob.values
    p = (1.0 - w[:, None] * np.conj(w)[None, :]) / (v[:, None] + np.conj(v)[None, :])
    # exact Hermitian symmetry
    return PickMatrix(0.5 * (p + p.conj().T))


def default_margin(pick):
    return 1e-10 * abs(pick.trace)


def is_feasible(pick, margin=None):
    """True iff the smallest eigenvalue exceeds ``margin`` (default ``1e-10 * trace``)."""
    if margin is None:
        margin = default_margin(pick)
    d = np.real(np.diag(pick.entries))
    if np.any(d <= 0):
        return False
    return pick.min_eigenvalue() > margin


def _blaschke(v, s):
    return (s - v) / (s + np.conj(v))


def _central_parameter(gam):
    """Free parameter giving the solution normalized at infinity, ``f(inf) = 0``.

    The chain of Schur steps equals ``M = prod [[1, g], [conj g, 1]]`` at
    infinity; the parameter is the Moebius image of 0 under ``M^-1``.
    """
    M = np.eye(2, dtype=complex)
    for g in gam:
        M = M @ np.array([[1.0, g], [np.conj(g), 1.0]])
    x = np.linalg.solve(M, np.array([0.0, 1.0]))
    return x[0] / x[1]


def max_entropy_interpolant(prob, tol=1e-8, check=True):
    """Central Nevanlinna-Pick interpolant, degree ``<= len(prob) - 1``.

    With at least one real node the free parameter of the last step is zero
    and a real node is processed last.  Data made only of conjugate pairs
    gets the solution normalized at infinity instead, of degree
    ``len(prob)``.

    The Schur parameters ``g_j`` come from the forward pass
    ``w_i <- (w_i - g_j) / ((1 - conj(g_j) w_i) b_j(v_i))``; the backward pass
    assembles ``f <- (g + b f) / (1 + conj(g) b f)`` from ``f = g_last``.

    Raises
    ------
    Infeasible
        If the Pick matrix is not positive definite.
    IllConditioned
        If a Schur parameter is within ``1e-10`` of the unit circle or the
        result misses the data by more than ``tol``.
    """
    pick = build_pick(prob)
    if check and not is_feasible(pick):
        raise Infeasible("Pick matrix is not positive definite")
    # The recursion's free parameter f_n = 0 is the solution without a pole at
    # -conj(v_last); it depends only on the last node, and is real for real
    # data when that node is real.
    order = np.arange(prob.nodes.size)
    real = np.flatnonzero(prob.nodes.imag == 0)
    if real.size:
        order = np.concatenate([np.delete(order, real[-1]), [real[-1]]])
    v = prob.nodes[order]
    w = prob.values[order]
    n = v.size
    gam = np.zeros(n, dtype=complex)
    for j in range(n):
        g = w[j]
        if 1.0 - abs(g) ** 2 < 1e-10:
            if abs(g) >= 1.0:
                raise Infeasible("Schur parameter outside the unit disc")
            raise IllConditioned("Schur parameter too close to the unit circle")
        gam[j] = g
        rest = slice(j + 1, n)
        w[rest] = (w[rest] - g) / ((1.0 - np.conj(g) * w[rest]) * _blaschke(v[j], v[rest]))
    if real.size or n == 0:
        num, den, first = Polynomial([gam[-1]]), Polynomial([1.0]), n - 2
    else:
        num, den, first = Polynomial([_central_parameter(gam)]), Polynomial([1.0]), n - 1
    for j in range(first, -1, -1):
        g = gam[j]
        sp = Polynomial([np.conj(v[j]), 1.0])
        sm = Polynomial([-v[j], 1.0])
        num, den = g * den * sp + sm * num, den * sp + np.conj(g) * sm * num
        lead = den.leading
        num, den = num * (1.0 / lead), den * (1.0 / lead)
    f = RationalFunction(num, den)
    if prob.conjugate_closed:
        scale = max(np.max(np.abs(num.coeffs)), np.max(np.abs(den.coeffs)))
        imag = max(np.max(np.abs(np.imag(num.coeffs))), np.max(np.abs(np.imag(den.coeffs))))
        if imag > 1e-10 * scale:
            raise IllConditioned(f"interpolant coefficients not real (imag {imag:.1e})")
        f = RationalFunction(np.real(num.coeffs), np.real(den.coeffs))
    resid = np.abs(f(prob.nodes) - prob.values)
    if np.any(resid > tol * np.maximum(1.0, np.abs(prob.values))):
        raise IllConditioned(f"interpolation residual {resid.max():.1e}")
    return f
