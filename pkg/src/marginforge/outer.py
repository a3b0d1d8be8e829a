"""Outer (minimum-phase) extension of a magnitude function into the right half-plane.

For a weight ``phi`` on the imaginary axis,

    W(s) = exp[(1/pi) int log phi(w) (w s + i)/(w + i s) dw/(1 + w^2)].

With ``w = tan(theta/2)`` the integral becomes ``(1/2pi) int_{-pi}^{pi}`` of a
bounded integrand.  The theta-integral is evaluated with composite
Gauss-Legendre panels that are split adaptively until the panel sum agrees
with the sum over its halves.  Weight kinks and the Poisson peaks of nodes
close to the axis are inserted as panel breaks.
"""

import numpy as np

from .errors import QuadratureFailure
from .rational import RationalFunction

__all__ = ["OuterEvaluator", "eval_outer", "interpolation_values"]

_GL_ORDER = 16
_X, _WTS = np.polynomial.legendre.leggauss(_GL_ORDER)


def _kernel(theta, s):
    """``(w s + i)/(w + i s)`` written in half-angles; finite at ``theta = +-pi``."""
    sn = np.sin(0.5 * theta)
    cs = np.cos(0.5 * theta)
    return (sn * s + 1j * cs) / (sn + 1j * s * cs)


def _peak_breaks(s):
    """Geometric panel breaks around ``theta(Im s)`` with width ``~ Re s``."""
    out = []
    for v in np.atleast_1d(s):
        sig, y = v.real, v.imag
        th = 2.0 * np.arctan(y)
        h = 2.0 * sig / (1.0 + y * y)
        if h > 0.5:
            continue
        out.append(th)
        step = h
        while step < 2 * np.pi:
            out.extend([th - step, th + step])
            step *= 4.0
    return np.asarray(out)


class OuterEvaluator:
    """Evaluate the outer function of a weight at points of the right half-plane.

    Parameters
    ----------
    weight : callable
        Vectorized ``omega -> phi(omega) > 0``.  If it exposes
        ``breakpoints()`` those frequencies become panel breaks.
    quad_tol : float
        Relative tolerance on the exponent integral.
    max_panels : int
        Refinement budget.
    """

    def __init__(self, weight, quad_tol=1e-8, max_panels=200000):
        self.weight = weight
        self.quad_tol = float(quad_tol)
        self.max_panels = int(max_panels)
        bp = getattr(weight, "breakpoints", None)
        omega_b = np.asarray(bp(), dtype=float) if bp is not None else np.array([0.0])
        self._theta_b = 2.0 * np.arctan(omega_b)

    def _log_phi(self, theta):
        with np.errstate(over="ignore"):
            omega = np.tan(0.5 * theta)
        return np.log(self.weight(omega))

    def _panel_sum(self, a, b, s):
        """Gauss-Legendre value per panel for every node; shape (panels, nodes)."""
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        th = mid[:, None] + half[:, None] * _X[None, :]
        lp = self._log_phi(th.ravel()).reshape(th.shape)
        k = _kernel(th[:, :, None], s[None, None, :])
        return np.einsum("pq,pqn->pn", lp * (half[:, None] * _WTS[None, :]), k)

    def log_outer(self, s):
        """``log W(s)`` (complex) for ``Re s > 0``; broadcasts over ``s``."""
        s_arr = np.asarray(s, dtype=complex)
        flat = s_arr.ravel()
        if np.any(flat.real <= 0):
            raise ValueError("outer function requires Re(s) > 0")
        edges = np.concatenate([[-np.pi, np.pi], self._theta_b, _peak_breaks(flat),
                                np.linspace(-np.pi, np.pi, 33)])
        edges = np.unique(np.clip(edges, -np.pi, np.pi))
        a, b = edges[:-1], edges[1:]
        keep = b - a > 1e-15
        a, b = a[keep], b[keep]
        total = np.zeros(flat.size, dtype=complex)
        scale = None
        n_used = 0
        for _ in range(60):
            whole = self._panel_sum(a, b, flat)
            m = 0.5 * (a + b)
            left = self._panel_sum(a, m, flat)
            right = self._panel_sum(m, b, flat)
            fine = left + right
            if scale is None:
                scale = np.maximum(1.0, np.abs(fine.sum(axis=0)))
            err = np.max(np.abs(fine - whole) / scale[None, :], axis=1)
            # per-panel share: relative to the panel's own mass plus a length
            # share of the total, so narrow Poisson peaks are not over-resolved
            mass = np.max(np.abs(fine) / scale[None, :], axis=1)
            share = self.quad_tol * (mass + (b - a) / (2 * np.pi))
            done = err <= share
            total += fine[done].sum(axis=0)
            n_used += int(done.sum())
            if np.all(done):
                break
            a, b, m = a[~done], b[~done], m[~done]
            a, b = np.concatenate([a, m]), np.concatenate([m, b])
            if n_used + a.size > self.max_panels:
                raise QuadratureFailure("outer quadrature exceeded its panel budget")
        else:
            raise QuadratureFailure("outer quadrature did not converge")
        out = (total / (2.0 * np.pi)).reshape(s_arr.shape)
        return out[()] if out.ndim == 0 else out

    def __call__(self, s):
        return np.exp(self.log_outer(s))


def eval_outer(ev, s):
    """``W(s)`` for ``Re s > 0`` (scalar or array)."""
    return ev(s)


def interpolation_values(ev, plant, shift=None):
    """Interpolation data for ``T~ = (T - T0) W`` at the plant's unstable nodes.

    Poles ``p`` give ``(1 - T0(p)) W(p)`` and zeros ``z`` give ``-T0(z) W(z)``.

    Returns
    -------
    InterpolationProblem
    """
    from .pick import InterpolationProblem

    shift = RationalFunction.constant(0.0) if shift is None else shift
    poles = np.asarray(plant.unstable_poles, dtype=complex)
    zeros = np.asarray(plant.nmp_zeros, dtype=complex)
    nodes = np.concatenate([poles, zeros])
    w = np.asarray(ev(nodes), dtype=complex)
    if shift.is_zero:
        vals = np.concatenate([w[: poles.size], np.zeros(zeros.size, dtype=complex)])
    else:
        t0 = np.asarray(shift(nodes), dtype=complex)
        vals = np.concatenate([(1.0 - t0[: poles.size]) * w[: poles.size],
                               -t0[poles.size:] * w[poles.size:]])
    # exact conjugate symmetry for real nodes
    real = nodes.imag == 0
    vals = np.where(real & (np.abs(vals.imag) < 1e-12 * np.maximum(1, np.abs(vals))), vals.real, vals)
    return InterpolationProblem(nodes, vals)
