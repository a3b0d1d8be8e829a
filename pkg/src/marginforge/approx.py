"""Rational over-approximation of weights and interpolant reduction.

:func:`approx_weight` looks for stable ``b, a`` with

    phi(w) <= |b(iw) / a(iw)| <= (1 + eps) phi(w)

and the smallest ``eps`` found by bisection.  For fixed ``eps`` the squared
magnitudes ``B = |b|^2`` and ``A = |a|^2`` enter linearly, so each step is an
LP.  ``A`` and ``B`` are parametrized as cosine polynomials in
``theta = 2 arctan(w / w_s)``, which keeps the basis bounded on the whole
line; nonnegativity is imposed on a dense theta grid and confirmed after the
spectral factorization.

:func:`reduce_interpolant` lowers the degree of an interpolant ``T`` by
writing ``T = a / sigma`` with ``a`` in the span of ``1/(s + conj(s_k))``,
replacing ``sigma`` by a low-degree magnitude fit and re-solving for ``a``.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import linprog

from .errors import (
    InfeasibleDegree,
    NotNonnegative,
    ReductionFailure,
    SingularSystem,
    ZeroCountOverflow,
)
from .rational import Polynomial, RationalFunction, roots

__all__ = [
    "MagnitudeApproxResult",
    "CoinvariantBasis",
    "approx_weight",
    "default_grid",
    "reduce_interpolant",
]

STAB_TOL = 1e-9


def default_grid(wmin=1e-3, wmax=1e3, per_decade=100, extra=()):
    """Log-spaced positive frequencies plus any extra points inside the range."""
    n = int(round(per_decade * np.log10(wmax / wmin))) + 1
    g = np.geomspace(wmin, wmax, n)
    extra = np.abs(np.asarray(extra, dtype=float))
    extra = extra[(extra >= wmin) & (extra <= wmax)]
    return np.unique(np.concatenate([g, extra]))


@dataclass
class MagnitudeApproxResult:
    """Stable ``b / a`` sandwiching a weight.

    ``eps_star`` is the measured overshoot ``max |b/a| / phi - 1`` on the
    upper-constraint grid; the lower bound ``|b/a| >= phi`` holds on the full
    certification grid.
    """

    b: Polynomial
    a: Polynomial
    eps_star: float
    grid: np.ndarray = field(repr=False)
    lower_grid: np.ndarray = field(repr=False)
    trace: list = field(default_factory=list, repr=False)

    @property
    def relative_degree(self):
        return self.a.degree - self.b.degree

    def as_rational(self):
        return RationalFunction(self.b, self.a)

    def magnitude(self, omega):
        w = 1j * np.asarray(omega, dtype=float)
        return np.abs(self.b(w) / self.a(w))


def _cos_basis(theta, n):
    return np.cos(np.outer(theta, np.arange(n + 1)))


def _theta(omega, ws):
    return 2.0 * np.arctan(np.asarray(omega, dtype=float) / ws)


def _lower_grid(ws, breakpoints, n_theta=2001):
    th = np.linspace(0.0, np.pi, n_theta)
    w_log = np.geomspace(1e-7, 1e7, 1401)
    w = np.concatenate([ws * np.tan(0.5 * th[:-1]), w_log, breakpoints])
    w = np.unique(np.abs(w))
    return w


def _fejer_riesz(c, ws):
    """Stable ``p(s)`` with ``|p(iw)|^2`` proportional to ``sum c_k cos(k theta) (1+(w/ws)^2)^n``.

    Roots of the palindromic polynomial ``z^n sum c_k cos(k theta)`` come in
    pairs ``zeta, 1/conj(zeta)``; the ones inside the unit disc map to the
    left half-plane under ``s = ws (zeta - 1)/(zeta + 1)``.  Roots on the
    circle should be double; near-double pairs produced by tiny negative
    excursions between grid points are merged at their mean angle.
    """
    n = c.size - 1
    if n == 0:
        return Polynomial([1.0])
    full = np.concatenate([0.5 * c[:0:-1], [c[0]], 0.5 * c[1:]])
    zr = npoly.polyroots(full)
    near = np.abs(np.abs(zr) - 1.0) < 1e-6
    chosen = list(zr[~near & (np.abs(zr) < 1.0)])
    on = zr[near]
    up = np.sort(np.angle(on[on.imag > 1e-9]))
    for j in range(0, up.size, 2):
        ang = up[j:j + 2].mean()
        chosen += [np.exp(1j * ang), np.exp(-1j * ang)]
    for sign in (1.0, -1.0):
        cnt = int(np.sum((np.abs(on.imag) <= 1e-9) & (np.sign(on.real) == sign)))
        chosen += [sign] * ((cnt + 1) // 2)
    chosen = np.asarray(chosen, dtype=complex)
    keep = np.abs(1.0 + chosen) > 1e-10
    s_roots = ws * (chosen[keep] - 1.0) / (chosen[keep] + 1.0)
    p = Polynomial.from_roots(s_roots)
    return p.real_part(1e-6) if not p.is_real else p


def _sq_mag(c, theta, ratio_exp, omega, ws):
    """``sum c_k cos k theta * (1 + (w/ws)^2)^ratio_exp``."""
    return _cos_basis(theta, c.size - 1) @ c * (1.0 + (omega / ws) ** 2) ** ratio_exp


class _SandwichLP:
    def __init__(self, phi_lo, th_lo, phi_up, th_up, r_lo, r_up, n_b, n_a, th_nn, delta):
        self.n_a, self.n_b = n_a, n_b
        self.ca_lo = _cos_basis(th_lo, n_a)
        self.cb_lo = _cos_basis(th_lo, n_b)
        self.ca_up = _cos_basis(th_up, n_a)
        self.cb_up = _cos_basis(th_up, n_b)
        self.f_lo = phi_lo ** 2 * r_lo
        self.f_up = phi_up ** 2 * r_up
        self.th_nn = th_nn
        self.delta = delta
        # margins below this are within solver tolerance
        self.t_min = 1e-8

    def _nonneg_rows(self):
        ca = _cos_basis(self.th_nn, self.n_a)
        cb = _cos_basis(self.th_nn, self.n_b)
        za = np.zeros((ca.shape[0], self.n_b + 1))
        zb = np.zeros((cb.shape[0], self.n_a))
        rows = np.vstack([np.hstack([-ca[:, 1:], za]), np.hstack([zb, -cb])])
        rhs = np.concatenate([1.0 - self.delta * np.ones(ca.shape[0]), -self.delta * np.ones(cb.shape[0])])
        return rows, rhs

    def solve(self, eps):
        """Max-margin ``(a-coeffs, b-coeffs)`` at ``eps``, or None if infeasible.

        Rows are divided by ``phi^2 r`` so that the margin ``t`` is relative;
        maximizing it keeps the solution off the constraint boundary, which
        keeps the factor roots away from the imaginary axis.
        """
        s2 = (1.0 + eps) ** 2
        # variables: a_1..a_na (a_0 = 1), b_0..b_nb, t
        ones_lo = np.ones((self.f_lo.size, 1))
        ones_up = np.ones((self.f_up.size, 1))
        lo = np.hstack([self.ca_lo[:, 1:], -self.cb_lo / self.f_lo[:, None], ones_lo])
        lo_rhs = -np.ones(self.f_lo.size)
        up = np.hstack([-s2 * self.ca_up[:, 1:], self.cb_up / self.f_up[:, None], ones_up])
        up_rhs = s2 * np.ones(self.f_up.size)
        nn, nn_rhs = self._nonneg_rows()
        na = _cos_basis(self.th_nn, self.n_a).shape[0]
        tcol = np.concatenate([np.ones(na), np.zeros(nn.shape[0] - na)])[:, None]
        nn = np.hstack([nn, tcol])
        A = np.vstack([lo, up, nn])
        b = np.concatenate([lo_rhs, up_rhs, nn_rhs])
        scale = np.maximum(np.max(np.abs(A), axis=1), np.abs(b))
        c = np.zeros(A.shape[1])
        c[-1] = -1.0
        bounds = [(None, None)] * (A.shape[1] - 1) + [(None, 1.0)]
        res = linprog(c, A_ub=A / scale[:, None], b_ub=b / scale, bounds=bounds, method="highs")
        if res.status != 0 or res.x[-1] <= self.t_min:
            return None
        x = res.x[:-1]
        return np.concatenate([[1.0], x[: self.n_a]]), x[self.n_a:]


def approx_weight(phi, n_b, n_a, grid=None, improper_rolloff=None, rolloff_cutoff=None,
                  eps_max=10.0, tol=1e-3, omega_scale=1.0, eps_start=0.05, eps_fixed=None):
    """Stable rational magnitude sandwich of a weight.

    Parameters
    ----------
    phi : callable
        Even weight, vectorized over ``omega``; a ``breakpoints()`` method is
        used when present.
    n_b, n_a : int
        Degrees of numerator ``b`` and denominator ``a``.
    grid : array_like, optional
        Positive frequencies carrying the upper constraint (default
        :func:`default_grid` over ``[1e-3, 1e3] * omega_scale``).
    improper_rolloff : int, optional
        Require ``n_b - n_a == improper_rolloff`` and drop the upper
        constraint above ``rolloff_cutoff``.
    eps_max, tol : float
        Bisection range and absolute tolerance on ``eps``.
    eps_start : float
        First upper bracket; grown by 4x until the LP is feasible.
    eps_fixed : float, optional
        Solve the LP at this ``eps`` only instead of bisecting.
    omega_scale : float
        Frequency mapped to ``theta = pi/2``.

    Raises
    ------
    InfeasibleDegree
        If the LP is infeasible even at ``eps_max``.
    NotNonnegative
        If no LP solution factors into stable ``b, a`` of full degree.

    Notes
    -----
    The LP verdict drives the bisection; every feasible solution is factored
    and re-scaled so the lower bound holds on the certification grid, and the
    one with the smallest measured overshoot is returned.
    """
    if n_b < 0 or n_a < 0:
        raise ValueError("degrees must be nonnegative")
    ws = float(omega_scale)
    bp_fn = getattr(phi, "breakpoints", None)
    bps = np.asarray(bp_fn(), dtype=float) if bp_fn is not None else np.array([])
    bps = np.unique(np.abs(bps[np.isfinite(bps)]))
    bps = bps[bps > 0]
    if grid is None:
        grid = default_grid(1e-3 * ws, 1e3 * ws, extra=bps)
    grid = np.unique(np.abs(np.asarray(grid, dtype=float)))
    if improper_rolloff is not None:
        if n_b - n_a != improper_rolloff:
            raise ValueError("improper_rolloff requires n_b - n_a == improper_rolloff")
        if rolloff_cutoff is None:
            rolloff_cutoff = 10.0 * (bps.max() if bps.size else 1.0)
        grid = grid[grid <= rolloff_cutoff]
    w_lo = _lower_grid(ws, bps)
    w_lo = np.unique(np.concatenate([w_lo, grid]))
    phi_lo = np.asarray(phi(w_lo), dtype=float)
    phi_up = np.asarray(phi(grid), dtype=float)
    if np.any(phi_lo <= 0) or np.any(phi_up <= 0):
        raise ValueError("weight must be positive on the grid")
    ex = n_a - n_b
    r_lo = (1.0 + (w_lo / ws) ** 2) ** ex
    r_up = (1.0 + (grid / ws) ** 2) ** ex
    th_lo, th_up = _theta(w_lo, ws), _theta(grid, ws)
    th_nn = np.linspace(0.0, np.pi, 2001)
    lp = _SandwichLP(phi_lo, th_lo, phi_up, th_up, r_lo, r_up, n_b, n_a, th_nn, 0.0)

    def certify(sol):
        """Factor an LP solution; scale b so that ``|b/a| >= phi`` on the lower grid."""
        ca, cb = sol
        try:
            a = _fejer_riesz(ca, ws)
            b = _fejer_riesz(cb, ws)
        except Exception:
            return None
        if a.degree != n_a or b.degree != n_b:
            return None
        if (a.degree and np.max(roots(a).real) >= -STAB_TOL) or \
           (b.degree and np.max(roots(b).real) >= -STAB_TOL):
            return None
        b = b * (1.0 / b.leading if b.leading < 0 else 1.0)
        a = a * (1.0 / a.leading if a.leading < 0 else 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            mag_lo = np.abs(b(1j * w_lo) / a(1j * w_lo))
            lift = float(np.max(phi_lo / mag_lo))
        if not np.isfinite(lift) or lift <= 0:
            return None
        b = b * lift
        mag_up = np.abs(b(1j * grid) / a(1j * grid))
        return b, a, float(max(0.0, np.max(mag_up / phi_up) - 1.0))

    trace = []
    best = None

    def attempt(eps):
        nonlocal best
        sol = lp.solve(eps)
        trace.append((eps, sol is not None))
        if sol is None:
            return False
        cert = certify(sol)
        if cert is not None and (best is None or cert[2] < best[2]):
            best = cert
        return True

    if eps_fixed is not None:
        if not attempt(float(eps_fixed)):
            raise InfeasibleDegree(f"no degree ({n_b}, {n_a}) sandwich at eps={eps_fixed}")
        lo = hi = float(eps_fixed)
    # bracket from below: good fits usually have eps well under 0.1
    else:
        lo, hi = 0.0, min(eps_start, eps_max)
    while eps_fixed is None and not attempt(hi):
        if hi >= eps_max:
            raise InfeasibleDegree(f"no degree ({n_b}, {n_a}) sandwich within eps={eps_max}")
        lo, hi = hi, min(4.0 * hi, eps_max)
    if eps_fixed is None and lo == 0.0 and attempt(0.0):
        hi = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if attempt(mid):
            hi = mid
        else:
            lo = mid
    # interior solutions at larger eps factor more reliably
    probe = max(hi, tol)
    while best is None and probe < eps_max:
        probe = min(2.0 * probe, eps_max)
        attempt(probe)
    if best is None:
        raise NotNonnegative("no LP solution admitted a stable spectral factorization")
    b, a, eps_star = best
    return MagnitudeApproxResult(b=b, a=a, eps_star=eps_star, grid=grid, lower_grid=w_lo, trace=trace)


class CoinvariantBasis:
    """Functions ``1/(s + conj(s_k))`` for nodes ``s_k`` in the right half-plane."""

    def __init__(self, poles):
        p = np.asarray(poles, dtype=complex)
        if np.any(p.real <= 0):
            raise ValueError("nodes must lie in the open right half-plane")
        if np.unique(np.round(p, 12)).size != p.size:
            raise SingularSystem("nodes are not distinct")
        self.poles = p

    def __len__(self):
        return self.poles.size

    def cauchy(self, s):
        s = np.asarray(s, dtype=complex)
        return 1.0 / (s[:, None] + np.conj(self.poles)[None, :])

    def denominator(self):
        return Polynomial.from_roots(-np.conj(self.poles))

    def numerator(self, alpha):
        """Numerator over :meth:`denominator` of ``sum alpha_j / (s + conj(s_j))``."""
        out = Polynomial([0.0])
        for j, aj in enumerate(alpha):
            others = np.delete(-np.conj(self.poles), j)
            out = out + Polynomial.from_roots(others, aj)
        return out

    def solve(self, values):
        """Coefficients ``alpha`` with ``sum_j alpha_j / (s_k + conj(s_j)) = values_k``.

        Raises
        ------
        SingularSystem
            If the Cauchy matrix is numerically singular.
        """
        C = self.cauchy(self.poles)
        if np.linalg.cond(C) > 1e13:
            raise SingularSystem("Cauchy system is ill-conditioned (nodes too close)")
        return np.linalg.solve(C, np.asarray(values, dtype=complex))


def _real_if_closed(p, tol=1e-8):
    if p.is_real:
        return p
    scale = np.max(np.abs(p.coeffs))
    if np.max(np.abs(p.coeffs.imag)) <= tol * scale:
        return Polynomial(p.coeffs.real)
    return p


def reduce_interpolant(T, prob, n_T, sigma_degree=None, eps_tol=1e-3, omega_scale=1.0,
                       return_fit=False, eps_target=None):
    """Low-degree interpolant close to ``T`` with the same data.

    Parameters
    ----------
    T : RationalFunction
        Stable and satisfying ``T(s_k) = w_k``.
    prob : InterpolationProblem
        Nodes ``s_k`` and values ``w_k``.
    n_T : int
        Target McMillan degree, at least the number of nodes.
    sigma_degree : int, optional
        Numerator degree of the fit of ``|sigma|`` (default ``n_T - N``).
    eps_target : float, optional
        Fit ``|sigma|`` at this sandwich width instead of the tightest one.

    Raises
    ------
    ZeroCountOverflow
        If ``T`` has more right half-plane zeros than the subspace can absorb.
    ReductionFailure
        If the result misses the data by more than ``1e-6``.
    """
    nodes = prob.nodes
    N = nodes.size
    if n_T < N:
        raise ValueError("n_T must be at least the number of nodes")
    basis = CoinvariantBasis(nodes)
    if sigma_degree is None:
        sigma_degree = n_T - N
    zT = T.zeros()
    z_rhp = zT[zT.real > 0]
    if np.any(np.abs(zT.real) < 1e-6 * np.maximum(1.0, np.abs(zT))):
        raise ReductionFailure("T has zeros on the imaginary axis")
    if z_rhp.size > N - 1:
        raise ZeroCountOverflow(f"T has {z_rhp.size} right half-plane zeros, at most {N - 1} allowed")
    q = Polynomial.from_roots(list(z_rhp) + [-1.0] * (N - 1 - z_rhp.size))
    q = _real_if_closed(q)
    Pi = _real_if_closed(basis.denominator())
    # sigma = q / (Pi T) = q den_T / (Pi num_T)
    s_num = q * T.den
    s_den = Pi * T.num
    d = s_num.degree - s_den.degree

    def sigma_mag(omega):
        w = 1j * np.asarray(omega, dtype=float)
        return np.abs(s_num(w) / s_den(w))

    n_b = sigma_degree
    n_a = n_b - d
    if n_a < 0:
        raise ReductionFailure("target degree too small for the asymptote of sigma")
    fit = approx_weight(sigma_mag, n_b, n_a, tol=eps_tol, omega_scale=omega_scale, eps_fixed=eps_target)
    sig_hat = RationalFunction(fit.b, fit.a)
    alpha = basis.solve(prob.values * sig_hat(nodes))
    a_num = _real_if_closed(basis.numerator(alpha))
    num = _real_if_closed(a_num * fit.a)
    den = _real_if_closed(Pi * fit.b)
    That = RationalFunction(num, den).normalized()
    resid = np.abs(That(nodes) - prob.values)
    if np.any(resid > 1e-6 * np.maximum(1.0, np.abs(prob.values))):
        raise ReductionFailure(f"reduced interpolant misses data by {resid.max():.1e}")
    return (That, fit) if return_fit else That
