"""Controller realization from an interpolant and verification of the achieved margins.

With a rational outer weight ``W~`` and interpolant ``T~`` the closed loop is
``T = T~ / W~ + T0`` and the controller ``K = T / (P (1 - T))``.  The unstable
plant poles are roots of ``1 - T`` and the nonminimum-phase zeros are roots
of ``T``; those factors are divided out exactly before ``K`` is formed.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .approx import MagnitudeApproxResult, approx_weight, default_grid
from .errors import (
    CancellationFailure,
    HypothesisViolated,
    Infeasible,
    ShiftBlocksProperness,
    UnstableT,
)
from .margin import rational_problem
from .pick import build_pick, is_feasible, max_entropy_interpolant
from .rational import Polynomial, RationalFunction
from .regions import _dist_simultaneous, dist_to_cut, dist_to_gain_set, dist_to_phase_set
from .weights import WeightFunction

__all__ = [
    "ControllerRealization",
    "VerificationReport",
    "synthesize",
    "enforce_strict_properness",
    "verify_margins",
    "distance_profile",
    "characteristic_polynomial",
]


@dataclass
class ControllerRealization:
    """Synthesized controller together with what it certifies."""

    K: RationalFunction
    T: RationalFunction
    W_approx: MagnitudeApproxResult
    certified: tuple
    T_tilde: RationalFunction = None
    shift: RationalFunction = None
    char_poly: Polynomial = None
    loop_residual: float = np.nan
    tau_requested: float = np.nan
    notes: list = field(default_factory=list)


@dataclass
class VerificationReport:
    min_distance: float
    argmin_omega: float
    passed: bool
    threshold: float
    interp_residual: float
    omega: np.ndarray = field(repr=False)
    distance: np.ndarray = field(repr=False)
    distance_at_infinity: float = np.nan


def enforce_strict_properness(spec):
    """Approximation settings that make the synthesized ``T`` strictly proper.

    The weight fit becomes improper with relative degree one, so ``T~/W~``
    vanishes at infinity and ``T(inf) = T0(inf)``.

    Raises
    ------
    ShiftBlocksProperness
        If ``Im(T0(inf))^2 + Re(T0(inf)) > 1/4`` or ``T0(inf) != 0``.
    """
    t_inf = complex(spec.shift.value_at_infinity())
    if t_inf.imag ** 2 + t_inf.real > 0.25:
        raise ShiftBlocksProperness("Im(T0(inf))^2 + Re(T0(inf)) exceeds 1/4")
    if abs(t_inf) > 0:
        raise ShiftBlocksProperness("T(inf) = T0(inf) != 0, so T cannot be strictly proper")
    return {"improper_rolloff": 1}


def characteristic_polynomial(plant, K):
    """``D_P K_d + N_P K_n`` for the delay-free loop."""
    P = plant.transfer
    return P.den * K.den + P.num * K.num


def _divide_out(p, rts, what, tol=1e-6):
    """Division of ``p`` by ``prod (s - r)``, discarding the remainder.

    Each root is first checked with the condition-scaled residual
    ``|p(r)| / sum |c_k| |r|^k``.
    """
    if len(rts) == 0:
        return p
    c = np.abs(p.coeffs)
    for r in rts:
        scale = np.sum(c * np.abs(r) ** np.arange(c.size))
        res = abs(p(r)) / max(scale, 1e-300)
        if res > tol:
            raise CancellationFailure(f"{what} do not cancel at {r} (residual {res:.1e})")
    out = p.coeffs.astype(complex)
    for r in rts:
        out = _deflate(out, complex(r))
    q = Polynomial(out)
    return q.real_part(1e-7) if p.is_real else q


def _deflate(c, r):
    """Synthetic division of ascending coefficients ``c`` by ``(s - r)``.

    Runs from the leading end for ``|r| <= 1`` and from the constant end
    otherwise, so that rounding errors are not amplified; the remainder is
    dropped at the end where it is negligible.
    """
    n = c.size - 1
    q = np.zeros(n, dtype=complex)
    if abs(r) <= 1:
        acc = c[n]
        for k in range(n - 1, -1, -1):
            q[k] = acc
            acc = c[k] + r * acc
    else:
        # c(s) = (s - r) q(s): c_0 = -r q_0, c_k = q_{k-1} - r q_k
        q[0] = -c[0] / r
        for k in range(1, n):
            q[k] = (q[k - 1] - c[k]) / r
    return q


def _ensure_real(p):
    return p if p.is_real else p.real_part(1e-7)


def _build_controller(plant, T):
    P = plant.transfer.minreal()
    Tn, Td = _ensure_real(T.num), _ensure_real(T.den)
    one_minus = Td - Tn
    # K = Tn D_P / ((Td - Tn) N_P), cancel C+ poles in D_P/(Td - Tn) and zeros in Tn/N_P
    Dp = _divide_out(P.den, plant.unstable_poles, "unstable plant poles")
    Om = _divide_out(one_minus, plant.unstable_poles, "roots of 1 - T at plant poles")
    Np = _divide_out(P.num, plant.nmp_zeros, "plant zeros")
    Tn_c = _divide_out(Tn, plant.nmp_zeros, "roots of T at plant zeros")
    K = RationalFunction(Tn_c * Dp, Om * Np).normalized()
    return K


def synthesize(plant, report, W_approx=None, T0=None, fraction=0.98, n_b=10, n_a=10,
               improper_rolloff=None, rolloff_cutoff=None, backoff=0.98, max_backoff=40,
               omega_scale=None):
    """Controller achieving the margins certified by ``report``.

    Parameters
    ----------
    plant : Plant
    report : MarginReport
        Source of the delay bound, the weight specification and the shift.
    W_approx : MagnitudeApproxResult, optional
        Rational weight; fitted at ``fraction * tau_bound`` when omitted.  If
        its Pick problem is infeasible, ``tau`` is reduced by ``backoff`` and
        the weight refitted.
    fraction : float
        Synthesis point relative to the bound (interior of the feasible set).
    omega_scale : float, optional
        Frequency scale of the weight fit; ``1/tau`` when omitted.

    Raises
    ------
    UnstableT
        If the closed loop ``T`` has right half-plane poles.
    CancellationFailure
        If the plant's unstable factors do not cancel.
    """
    T0 = report.shift_used if T0 is None else T0
    spec = replace(report.spec, shift=T0)
    tau = fraction * report.tau_bound
    notes = []
    fit = W_approx
    for _ in range(max_backoff):
        spec_t = spec.with_tau(tau)
        if fit is None:
            fit = approx_weight(WeightFunction(spec_t), n_b, n_a, improper_rolloff=improper_rolloff,
                                rolloff_cutoff=rolloff_cutoff,
                                omega_scale=omega_scale if omega_scale else 1.0 / tau)
        prob = rational_problem(plant, fit.as_rational(), T0)
        if is_feasible(build_pick(prob)):
            break
        notes.append(f"rational weight infeasible at tau={tau:.6g}; backing off")
        tau *= backoff
        fit = None
    else:
        raise Infeasible("no feasible rational weight below the certified bound")
    Wt = fit.as_rational()
    Tt = max_entropy_interpolant(prob)
    T = (Tt / Wt + T0).minreal()
    if T.den.degree > 0 and not T.is_stable():
        raise UnstableT("closed-loop T has right half-plane poles")
    T = RationalFunction(_ensure_real(T.num), _ensure_real(T.den))
    K = _build_controller(plant, T)
    cp = characteristic_polynomial(plant, K)
    # achieved T from the loop
    w = 1j * np.geomspace(1e-3, 1e3, 601)
    L = plant.transfer(w) * K(w)
    resid = float(np.max(np.abs(L / (1 + L) - T(w))))
    return ControllerRealization(
        K=K, T=T, W_approx=fit, certified=(spec.gain_k, spec.phase_phi, tau), T_tilde=Tt,
        shift=T0, char_poly=cp, loop_residual=resid, tau_requested=fraction * report.tau_bound,
        notes=notes,
    )


def distance_profile(T_vals, spec, omega):
    """Distance from ``T(i omega)`` to the forbidden set of ``spec`` at each frequency."""
    wt = np.asarray(omega) * spec.tau_bar
    if spec.mode == "simultaneous":
        return _dist_simultaneous(spec.gain_k, spec.phase_phi, wt, T_vals)
    d = dist_to_cut(wt, T_vals)
    if spec.mode == "independent":
        if spec.gain_k > 1:
            d = np.minimum(d, dist_to_gain_set(spec.gain_k, T_vals))
        if spec.phase_phi > 0:
            d = np.minimum(d, dist_to_phase_set(spec.phase_phi, T_vals))
    return d


def verify_margins(T, spec, grid=None, plant=None, threshold=0.0, n=4096):
    """Check that ``T(i omega)`` stays away from the forbidden set for ``spec``.

    The grid is ``n`` log-spaced frequencies in ``[1e-4, 1e4]`` of both signs,
    ``omega = 0``, the weight breakpoints and an asymptotic sample.

    Raises
    ------
    UnstableT
        If ``T`` has poles with ``Re >= 0``.
    HypothesisViolated
        If ``Re T(inf) >= 1/2``.
    """
    if T.den.degree > 0 and not T.is_stable():
        raise UnstableT("T is not analytic in the closed right half-plane")
    t_inf = complex(T.value_at_infinity())
    if not np.isfinite(t_inf) or t_inf.real >= 0.5:
        raise HypothesisViolated("Re T(inf) >= 1/2: loop gain does not roll off")
    if grid is None:
        g = np.geomspace(1e-4, 1e4, n)
        bps = WeightFunction(replace(spec, shift=RationalFunction.constant(0.0))).breakpoints()
        grid = np.concatenate([-g[::-1], [0.0], g, bps])
    omega = np.unique(np.asarray(grid, dtype=float))
    tv = T(1j * omega)
    d = np.asarray(distance_profile(tv, spec, omega), dtype=float)
    d_inf = float(np.min(distance_profile(np.full(2, t_inf), spec, np.array([1e12, -1e12]))))
    j = int(np.argmin(d))
    dmin = float(min(d[j], d_inf))
    arg = float(omega[j]) if d[j] <= d_inf else np.inf
    resid = np.nan
    if plant is not None:
        r1 = [abs(T(p) - 1.0) for p in plant.unstable_poles]
        r0 = [abs(T(z)) for z in plant.nmp_zeros]
        resid = float(max(r1 + r0))
    return VerificationReport(min_distance=dmin, argmin_omega=arg, passed=bool(dmin > threshold),
                              threshold=threshold, interp_residual=resid, omega=omega,
                              distance=d, distance_at_infinity=d_inf)
