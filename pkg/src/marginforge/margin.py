"""Lower bounds on the achievable delay margin.

For a candidate delay range ``tau`` the problem is solvable iff a Pick
matrix built from outer-function values at the plant's unstable poles and
zeros is positive definite.  Feasibility is (essentially) monotone in
``tau``, so the largest feasible ``tau`` is found by bisection.
"""

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .approx import approx_weight, reduce_interpolant
from .errors import (
    IllConditioned,
    Infeasible,
    InfeasibleDegree,
    InfeasibleAtZero,
    MarginForgeError,
    NoUnstablePole,
    NotNonnegative,
    ReductionFailure,
    ShiftHitsCut,
    ShiftHitsRegion,
    ShiftInvalid,
)
from .outer import OuterEvaluator, interpolation_values
from .pick import InterpolationProblem, build_pick, default_margin, is_feasible, max_entropy_interpolant
from .rational import Plant, RationalFunction
from .weights import WeightFunction, WeightSpec, log_integrability_check, shift_validity_limit

__all__ = [
    "MarginQuery",
    "MarginReport",
    "Step",
    "bound_bisection",
    "bound_with_constant_shift",
    "bound_multi_margin",
    "homotopy_bound",
    "initial_upper_bound",
    "evaluate_tau",
    "rational_problem",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MarginQuery:
    """Inputs of a bound computation.

    ``spec_template.tau_bar`` is ignored; the bisection sets it.
    """

    plant: Plant
    spec_template: WeightSpec = field(default_factory=WeightSpec)
    bisection_tol: float = 1e-3
    tau_upper_init: float | None = None
    quad_tol: float = 1e-8

    def __post_init__(self):
        if not self.bisection_tol > 0:
            raise ValueError("bisection_tol must be positive")
        if self.tau_upper_init is not None and not self.tau_upper_init > 0:
            raise ValueError("tau_upper_init must be positive")
        if not isinstance(self.plant, Plant) or not self.plant.unstable_poles:
            raise NoUnstablePole("plant has no unstable pole")


@dataclass(frozen=True)
class Step:
    tau: float
    feasible: bool
    min_eig: float
    note: str = ""


@dataclass
class MarginReport:
    """Result of a bound computation.

    ``tau_bound`` is the last feasible ``tau`` of the bisection trace.
    """

    tau_bound: float
    iterations: list
    interpolant: RationalFunction | None
    shift_used: RationalFunction
    spec: WeightSpec
    problem: InterpolationProblem | None = None
    tau_upper: float = np.nan
    warnings: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def monotone(self):
        return not any("non-monotone" in w for w in self.warnings)


def initial_upper_bound(plant):
    """``2 pi / max |p|`` over the unstable poles."""
    return 2.0 * np.pi / max(abs(p) for p in plant.unstable_poles)


def _shift_guard(spec):
    """Reason string if the shift touches a forbidden set at this tau, else ''."""
    if spec.shift_is_zero:
        return ""
    if spec.shift_is_constant and spec.mode == "delay":
        return ""
    if spec.tau_bar >= shift_validity_limit(spec.shift):
        return "shift hits cut"
    if spec.mode != "delay" and not log_integrability_check(WeightFunction(spec)):
        return "shift hits region"
    return ""


def evaluate_tau(q, tau, targets=None):
    """Pick test at one ``tau``.

    Parameters
    ----------
    targets : tuple of arrays, optional
        ``(T(p), T(z))`` interpolation targets; default ``(1, 0)``.

    Returns
    -------
    Step, InterpolationProblem or None
    """
    spec = q.spec_template.with_tau(tau)
    reason = _shift_guard(spec)
    if reason:
        return Step(tau, False, -np.inf, reason), None
    ev = OuterEvaluator(WeightFunction(spec), quad_tol=q.quad_tol)
    try:
        prob = _problem(ev, q.plant, spec.shift, targets)
    except (ShiftHitsCut, ShiftHitsRegion) as exc:
        return Step(tau, False, -np.inf, str(exc)), None
    pick = build_pick(prob)
    lam = pick.min_eigenvalue()
    return Step(tau, bool(lam > default_margin(pick)), lam), prob


def _problem(W, plant, shift, targets=None):
    if targets is None:
        return interpolation_values(W, plant, shift)
    tp, tz = targets
    poles = np.asarray(plant.unstable_poles, dtype=complex)
    zeros = np.asarray(plant.nmp_zeros, dtype=complex)
    nodes = np.concatenate([poles, zeros])
    w = np.asarray(W(nodes), dtype=complex)
    t0 = np.asarray(shift(nodes), dtype=complex) if not shift.is_zero else np.zeros(nodes.size)
    target = np.concatenate([np.broadcast_to(tp, poles.shape), np.broadcast_to(tz, zeros.shape)])
    vals = (target - t0) * w
    vals = np.where((nodes.imag == 0) & (np.abs(vals.imag) < 1e-12), vals.real, vals)
    return InterpolationProblem(nodes, vals)


def rational_problem(plant, W_rat, shift, targets=None):
    """Interpolation data with a rational outer weight ``W_rat``."""
    return _problem(W_rat, plant, shift, targets)


def _bisect(q, lo, hi, targets=None, trace=None):
    trace = [] if trace is None else trace
    best_prob = None
    while hi - lo > q.bisection_tol:
        mid = 0.5 * (lo + hi)
        step, prob = evaluate_tau(q, mid, targets)
        trace.append(step)
        if step.feasible:
            lo, best_prob = mid, prob
        else:
            hi = mid
    return lo, hi, best_prob, trace


def _monotone_warnings(trace):
    out = []
    infeasible = [s.tau for s in trace if not s.feasible]
    for s in trace:
        if s.feasible and infeasible and s.tau > min(infeasible):
            out.append(f"non-monotone trace: feasible at {s.tau:.6g} above infeasible {min(infeasible):.6g}")
    for w in out:
        warnings.warn(w, RuntimeWarning, stacklevel=3)
    return out


def _interpolant(prob):
    if prob is None:
        return None
    try:
        return max_entropy_interpolant(prob)
    except (IllConditioned, Infeasible) as exc:
        log.info("no interpolant at final tau: %s", exc)
        return None


def bound_bisection(q, targets=None):
    """Certified lower bound on the delay margin by bisection on Pick feasibility.

    The search interval is ``[0, tau_upper_init]`` (default
    ``2 pi / max |p|``).  A ``tau`` at which the shift touches a forbidden
    set counts as infeasible.

    Returns
    -------
    MarginReport
    """
    hi = q.tau_upper_init if q.tau_upper_init is not None else initial_upper_bound(q.plant)
    lo, _, prob, trace = _bisect(q, 0.0, hi, targets)
    if prob is None:
        _, prob = evaluate_tau(q, lo, targets) if lo > 0 else (None, None)
    return MarginReport(
        tau_bound=lo,
        iterations=trace,
        interpolant=_interpolant(prob),
        shift_used=q.spec_template.shift,
        spec=q.spec_template.with_tau(lo),
        problem=prob,
        tau_upper=hi,
        warnings=_monotone_warnings(trace),
    )


def bound_with_constant_shift(q, T0_value):
    """Bisection with the constant shift ``T0 = T0_value``.

    Raises
    ------
    ShiftInvalid
        If ``Re(T0_value) >= 1/2``.
    """
    c = complex(T0_value)
    if c.real >= 0.5:
        raise ShiftInvalid("constant shift must satisfy Re T0 < 1/2")
    val = c.real if c.imag == 0 else c
    spec = replace(q.spec_template, shift=RationalFunction.constant(val))
    return bound_bisection(replace(q, spec_template=spec))


def bound_multi_margin(q):
    """Delay bound with guaranteed gain and/or phase margins.

    Raises
    ------
    InfeasibleAtZero
        If the gain/phase requirement alone cannot be met.
    """
    spec = q.spec_template
    if spec.mode == "delay":
        raise ValueError("bound_multi_margin needs mode 'independent' or 'simultaneous'")
    if spec.gain_k <= 1 and spec.phase_phi <= 0:
        raise ValueError("need gain_k > 1 or phase_phi > 0")
    step0, _ = evaluate_tau(q, 0.0)
    if not step0.feasible:
        raise InfeasibleAtZero("gain/phase margins are not attainable even without delay")
    rep = bound_bisection(q)
    rep.iterations.insert(0, step0)
    rep.extra["margins"] = {"gain_k": spec.gain_k, "phase_phi": spec.phase_phi, "tau": rep.tau_bound}
    return rep


def _rational_feasible_tau(q, tau, targets, n_b, n_a, improper_rolloff=None, shrink=0.9,
                           refine=2, max_shrink=40, omega_scale=None):
    """A large ``tau' <= tau`` whose rational-weight Pick problem is feasible.

    ``tau`` is shrunk geometrically until feasible and the last bracket is
    then bisected ``refine`` times.  ``omega_scale`` defaults to ``1/tau'``,
    the natural frequency scale of the delay weight.
    """
    spec0 = q.spec_template

    def trial(t):
        spec = spec0.with_tau(t)
        if _shift_guard(spec):
            return None
        try:
            fit = approx_weight(WeightFunction(spec), n_b, n_a, improper_rolloff=improper_rolloff,
                                omega_scale=omega_scale if omega_scale else 1.0 / t)
        except (NotNonnegative, InfeasibleDegree) as exc:
            log.info("weight fit failed at tau=%.6g: %s", t, exc)
            return None
        prob = rational_problem(q.plant, fit.as_rational(), spec.shift, targets)
        return (t, fit, prob) if is_feasible(build_pick(prob)) else None

    hi, found = tau, trial(tau)
    for _ in range(max_shrink):
        if found is not None:
            break
        hi, tau = tau, tau * shrink
        found = trial(tau)
    if found is None:
        raise Infeasible("rational weight never becomes feasible")
    lo = found[0]
    if hi > lo:
        for _ in range(refine):
            mid = 0.5 * (lo + hi)
            got = trial(mid)
            if got is None:
                hi = mid
            else:
                lo, found = mid, got
    return found


def _next_shift(That, T_half, gamma, guard=0.5 - 1e-3):
    """Damped shift for the next homotopy step, with ``Re T0(inf) < guard``.

    The reduced ``That`` is preferred; ``T_half`` is used when the reduction
    moved the value at infinity past the guard, and the damping is
    strengthened when neither qualifies.
    """
    for T, note in ((That, "reduced"), (T_half, "unreduced")):
        if (complex(T.value_at_infinity()) * gamma).real < guard and T.is_stable():
            return (T * gamma).normalized(), note
    r = complex(That.value_at_infinity()).real
    g = min(gamma, 0.98 * guard / r) if r > 0 else gamma
    return (That * g).normalized(), f"reduced, damping {g:.4g}"


def homotopy_bound(q, N=3, n_T=None, n_b=10, n_a=10, gamma=0.95, T_init=None, headroom=1.5,
                   max_retries=4, omega_scale=None):
    """Iterative choice of the shift by continuation in the pole targets.

    Step ``k`` of ``N`` searches with targets ``T(p) = k/N``, ``T(z) = 0``
    around the previous design ``T0 = T^(k-1)``, rebuilds
    ``T = T~ / W~ + T0`` with a rational weight ``W~``, reduces it to degree
    ``n_T`` and damps it by ``gamma``.  The last step (``k = N``) is a full
    certified bisection with the final shift.

    Returns
    -------
    MarginReport
        ``extra`` holds the per-step records (``alpha``, bound, rational
        bound, reduction residual sampled around the weight's frequency
        scale), ``T_half`` (``T^(N-1/2)``) and ``T0_final``.
    """
    plant = q.plant
    nodes_n = len(plant.unstable_poles) + len(plant.nmp_zeros)
    if N < 1:
        raise ValueError("N must be >= 1")
    if n_T is None:
        n_T = nodes_n + 2
    if n_T < nodes_n:
        raise ValueError("n_T must be at least the number of interpolation nodes")
    T0 = T_init if T_init is not None else RationalFunction.constant(0.0)
    tau_hat = q.tau_upper_init if q.tau_upper_init is not None else initial_upper_bound(plant)
    steps = []
    T_half = None
    rep = None
    for k in range(1, N + 1):
        alpha = k / N
        targets = (alpha, 0.0)
        try:
            spec = replace(q.spec_template, shift=T0)
        except ShiftInvalid as exc:
            raise ShiftInvalid(f"homotopy step {k}: {exc}") from exc
        qk = replace(q, spec_template=spec, tau_upper_init=tau_hat)
        try:
            cap = tau_hat
            lo, hi, prob, trace = _bisect(qk, 0.0, cap, targets)
            retries = 0
            while cap - lo <= 2 * qk.bisection_tol and retries < max_retries:
                # feasible right up to the warm-start cap: widen it
                retries += 1
                cap *= headroom
                lo, hi, p2, trace = _bisect(qk, lo, cap, targets, trace)
                prob = p2 if p2 is not None else prob
        except MarginForgeError as exc:
            raise type(exc)(f"homotopy step {k}: {exc}") from exc
        steps.append({"k": k, "alpha": alpha, "tau": lo, "upper": hi})
        log.info("homotopy step %d/%d alpha=%.3f tau=%.5g", k, N, alpha, lo)
        if k == N:
            rep = MarginReport(
                tau_bound=lo, iterations=trace, interpolant=_interpolant(prob), shift_used=T0,
                spec=spec.with_tau(lo), problem=prob, tau_upper=hi,
                warnings=_monotone_warnings(trace),
            )
        if lo <= 0:
            raise Infeasible(f"homotopy step {k}: no feasible tau")
        tau_hat = max(lo, hi)
        if k == N:
            break
        try:
            tau_r, fit, prob_r = _rational_feasible_tau(qk, lo, targets, n_b, n_a, omega_scale=omega_scale)
            Tt = max_entropy_interpolant(prob_r)
            T_half = (Tt / fit.as_rational() + T0).minreal()
            data = InterpolationProblem(prob_r.nodes, np.concatenate([
                np.full(len(plant.unstable_poles), alpha), np.zeros(len(plant.nmp_zeros))]))
            That = reduce_interpolant(T_half, data, n_T,
                                      omega_scale=omega_scale if omega_scale else 1.0 / tau_r)
        except MarginForgeError as exc:
            raise ReductionFailure(f"homotopy step {k}: {exc}") from exc
        T0, note = _next_shift(That, T_half, gamma)
        w_chk = 1j * np.geomspace(1e-3, 1e3, 61) / max(tau_r, 1e-12)
        steps[-1].update({
            "tau_rational": tau_r, "shift_source": note,
            "reduction_residual": float(np.max(np.abs(That(w_chk) - T_half(w_chk)))),
        })
    rep.extra.update({"steps": steps, "T_half": T_half, "T0_final": T0, "N": N})
    return rep
