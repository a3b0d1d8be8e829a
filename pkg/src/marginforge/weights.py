"""Frequency weights ``phi(omega)`` for delay, shifted and multi-margin problems.

The weight is the reciprocal distance from the shift ``T0(i omega)`` to the
forbidden set at each frequency, floored at ``floor_eps``.  With ``T0 == 0``
and the pure delay set it reduces to ``2|sin(omega tau / 2)|`` capped at 2.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ShiftHitsCut, ShiftHitsRegion, ShiftInvalid
from .rational import Polynomial, RationalFunction
from .regions import (
    _dist_simultaneous,
    dist_to_cut,
    dist_to_gain_set,
    dist_to_phase_set,
)

__all__ = [
    "WeightSpec",
    "WeightFunction",
    "phi_delay",
    "phi_shifted",
    "phi_multi_independent",
    "phi_multi_simultaneous",
    "log_integrability_check",
    "shift_validity_limit",
    "MODES",
]

MODES = ("delay", "independent", "simultaneous")
DEFAULT_FLOOR = 1e-4
_ZERO = RationalFunction([0.0], [1.0])


def _as_shift(shift):
    if shift is None:
        return _ZERO
    if isinstance(shift, RationalFunction):
        return shift
    return RationalFunction.constant(float(np.real(shift)) if np.isreal(shift) else shift)


@dataclass(frozen=True)
class WeightSpec:
    """Margin requirement defining a weight.

    Parameters
    ----------
    tau_bar : float
        Delay range ``[0, tau_bar]`` in seconds.
    shift : RationalFunction
        Nominal complementary sensitivity ``T0``; the disc centre.
    floor_eps : float
        Lower floor of the weight.
    mode : {"delay", "independent", "simultaneous"}
    gain_k, phase_phi : float
        Gain and phase margins for the multi-margin modes.
    """

    tau_bar: float = 0.0
    shift: RationalFunction = field(default=_ZERO)
    floor_eps: float = DEFAULT_FLOOR
    mode: str = "delay"
    gain_k: float = 1.0
    phase_phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "shift", _as_shift(self.shift))
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.tau_bar < 0:
            raise ValueError("tau_bar must be >= 0")
        if not self.floor_eps > 0:
            raise ValueError("floor_eps must be positive")
        if self.gain_k < 1:
            raise ValueError("gain_k must be >= 1")
        if not 0 <= self.phase_phi < 2 * np.pi:
            raise ValueError("phase_phi must lie in [0, 2 pi)")
        t_inf = self.shift.value_at_infinity()
        if not np.isfinite(t_inf) or np.real(t_inf) >= 0.5:
            raise ShiftInvalid("shift must satisfy Re T0(inf) < 1/2")

    def with_tau(self, tau_bar):
        return replace(self, tau_bar=float(tau_bar))

    @property
    def shift_is_zero(self):
        return self.shift.is_zero

    @property
    def shift_is_constant(self):
        return self.shift.num.degree == 0 and self.shift.den.degree == 0


def phi_delay(tau_bar, omega):
    """Unshifted delay weight: ``2|sin(tau omega / 2)|`` for ``|omega tau| <= pi``, else 2."""
    x = np.abs(np.asarray(omega, dtype=float) * tau_bar)
    out = np.where(x <= np.pi, 2.0 * np.abs(np.sin(0.5 * x)), 2.0)
    return out[()] if out.ndim == 0 else out


def _shift_values(spec, omega):
    omega = np.asarray(omega, dtype=float)
    if spec.shift_is_constant:
        c = spec.shift.num.coeffs[0] / spec.shift.den.coeffs[0]
        return np.full(omega.shape, c, dtype=complex)
    return np.asarray(spec.shift(1j * omega), dtype=complex)


def _recip(d, exc, what):
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise exc(f"shift touches the {what}")
    with np.errstate(divide="ignore"):
        return 1.0 / d


def _raw_delay(spec, omega, t0):
    return _recip(dist_to_cut(np.asarray(omega) * spec.tau_bar, t0), ShiftHitsCut, "delay cut")


def _finish(v, spec):
    out = np.maximum(spec.floor_eps, v)
    return out[()] if np.ndim(out) == 0 else out


def phi_shifted(spec, omega):
    """Shifted delay weight ``max(eps, 1 / dist(C_{omega tau}, T0(i omega)))``.

    Raises
    ------
    ShiftHitsCut
        If ``T0(i omega)`` lies on the cut at some requested frequency.
    """
    omega = np.asarray(omega, dtype=float)
    return _finish(_raw_delay(spec, omega, _shift_values(spec, omega)), spec)


def _independent_terms(spec, omega, t0):
    terms = [_raw_delay(spec, omega, t0)]
    if spec.gain_k > 1:
        terms.append(_recip(dist_to_gain_set(spec.gain_k, t0), ShiftHitsRegion, "gain set"))
    if spec.phase_phi > 0:
        terms.append(_recip(dist_to_phase_set(spec.phase_phi, t0), ShiftHitsRegion, "phase set"))
    return np.array(np.broadcast_arrays(*terms))


def phi_multi_independent(spec, omega):
    """Largest of the gain, phase and delay weights (union of forbidden sets)."""
    omega = np.asarray(omega, dtype=float)
    t0 = _shift_values(spec, omega)
    return _finish(np.max(_independent_terms(spec, omega, t0), axis=0), spec)


def phi_multi_simultaneous(spec, omega):
    """Reciprocal distance to the simultaneous gain/phase/delay region."""
    omega = np.asarray(omega, dtype=float)
    t0 = _shift_values(spec, omega)
    d = _dist_simultaneous(spec.gain_k, spec.phase_phi, omega * spec.tau_bar, t0)
    return _finish(_recip(d, ShiftHitsRegion, "simultaneous region"), spec)


_DISPATCH = {
    "delay": phi_shifted,
    "independent": phi_multi_independent,
    "simultaneous": phi_multi_simultaneous,
}


class WeightFunction:
    """Callable weight built from a :class:`WeightSpec`.

    ``w(omega)`` broadcasts over arrays.  :meth:`breakpoints` lists the
    frequencies where the weight switches branch; quadrature and the
    rational fit use them as mandatory grid points.
    """

    def __init__(self, spec):
        self.spec = spec
        self._fn = _DISPATCH[spec.mode]
        self._bp = None

    def __call__(self, omega):
        return self._fn(self.spec, omega)

    def __repr__(self):
        return f"WeightFunction({self.spec!r})"

    @property
    def floor(self):
        return self.spec.floor_eps

    def at_infinity(self):
        """Limit of the weight as ``|omega| -> inf``."""
        spec = self.spec
        t_inf = complex(spec.shift.value_at_infinity())
        if spec.mode == "simultaneous" and spec.tau_bar > 0:
            d = _dist_simultaneous(spec.gain_k, spec.phase_phi, 1e300, t_inf)
            return max(spec.floor_eps, 1.0 / float(d))
        if spec.tau_bar > 0:
            v = 1.0 / abs(0.5 - t_inf.real)
        else:
            v = 0.0
        if spec.mode == "independent":
            if spec.gain_k > 1:
                v = max(v, 1.0 / float(dist_to_gain_set(spec.gain_k, t_inf)))
            if spec.phase_phi > 0:
                v = max(v, 1.0 / float(dist_to_phase_set(spec.phase_phi, t_inf)))
        if spec.mode == "simultaneous":
            v = float(self(1e12))
        return max(spec.floor_eps, v)

    def _branch(self, omega):
        """Integer label of the active smooth branch at each frequency."""
        spec = self.spec
        omega = np.asarray(omega, dtype=float)
        t0 = _shift_values(spec, omega)
        x = omega * spec.tau_bar
        a = np.abs(x)
        with np.errstate(all="ignore"):
            ye = -0.5 * np.cos(0.5 * a) / np.sin(0.5 * a)
        im = np.where(x < 0, -t0.imag, t0.imag)
        code = np.where(a >= 2 * np.pi, 2, np.where(im - ye <= 0, 1, 0))
        if spec.mode == "independent":
            terms = _independent_terms(spec, omega, t0)
            code = code + 4 * np.argmax(terms, axis=0)
            raw = np.max(terms, axis=0)
        elif spec.mode == "simultaneous":
            code = code + 4 * self._sim_piece(omega, t0)
            raw = 1.0 / _dist_simultaneous(spec.gain_k, spec.phase_phi, x, t0)
        else:
            raw = _raw_delay(spec, omega, t0)
        return code + 64 * (raw < spec.floor_eps) + 128 * (omega < 0)

    def _sim_piece(self, omega, t0):
        spec = self.spec
        x = omega * spec.tau_bar
        # label by which boundary piece is nearest, via finite differences in k/phi
        base = _dist_simultaneous(spec.gain_k, spec.phase_phi, x, t0)
        probes = [dist_to_cut(spec.phase_phi + np.maximum(0, x), t0),
                  dist_to_cut(-spec.phase_phi + np.minimum(0, x), t0)]
        lab = np.full(omega.shape, 3)
        for i, p in enumerate(probes):
            lab = np.where(np.isclose(p, base, rtol=1e-12, atol=0), i, lab)
        return lab

    def breakpoints(self, wmin=1e-6, wmax=1e6, n=4000):
        """Frequencies (both signs) where the weight changes branch."""
        if self._bp is not None:
            return self._bp
        spec = self.spec
        pts = [0.0]
        if spec.tau_bar > 0:
            for m in (np.pi, 2 * np.pi):
                with np.errstate(over="ignore"):
                    pts += [m / np.float64(spec.tau_bar), -m / np.float64(spec.tau_bar)]
        grid = np.geomspace(wmin, wmax, n)
        for sgn in (1.0, -1.0):
            w = sgn * grid
            lab = self._branch(w)
            for j in np.flatnonzero(lab[1:] != lab[:-1]):
                lo, hi = w[j], w[j + 1]
                llo = lab[j]
                for _ in range(50):
                    mid = 0.5 * (lo + hi)
                    if self._branch(np.array([mid]))[0] == llo:
                        lo = mid
                    else:
                        hi = mid
                pts.append(0.5 * (lo + hi))
        if spec.shift_is_zero and spec.mode == "delay" and spec.tau_bar > 0:
            # exact floor crossing for the closed-form weight
            with np.errstate(over="ignore"):
                x = 2.0 * np.arcsin(min(1.0, spec.floor_eps / 2.0)) / spec.tau_bar
            if np.isfinite(x):
                pts += [x, -x]
        pts = np.array(pts)
        pts = pts[np.abs(pts) < 1e290]
        self._bp = np.unique(np.round(pts, 15))
        return self._bp


def shift_validity_limit(shift):
    """Largest ``tau_bar`` for which ``T0(i omega)`` avoids every delay cut.

    ``T0`` can only touch a cut where it crosses ``Re = 1/2``; at each such
    crossing ``omega0`` the admissible delay is bounded by
    ``2 arccot(-2 Im T0(i omega0)) / omega0`` (mirrored for negative
    frequencies).  Returns ``inf`` if ``T0`` never crosses the line.
    """
    shift = _as_shift(shift)
    if shift.num.degree == 0 and shift.den.degree == 0:
        c = shift.num.coeffs[0] / shift.den.coeffs[0]
        if np.real(c) >= 0.5:
            return 0.0
        return np.inf
    n, d = shift.num.coeffs, shift.den.coeffs
    ik_n = n * (1j) ** np.arange(n.size)
    ik_d = d * (1j) ** np.arange(d.size)
    # Re(n(iw) conj(d(iw))) - |d(iw)|^2 / 2 as a real polynomial in w
    nd = np.polynomial.polynomial.polymul(ik_n, np.conj(ik_d))
    dd = np.polynomial.polynomial.polymul(ik_d, np.conj(ik_d))
    m = max(nd.size, dd.size)
    poly = np.zeros(m)
    poly[: nd.size] += nd.real
    poly[: dd.size] -= 0.5 * dd.real
    p = Polynomial(poly).trim(1e-13)
    if p.degree < 1:
        return np.inf if p.coeffs[0] < 0 else 0.0
    limit = np.inf
    for r in np.polynomial.polynomial.polyroots(p.coeffs):
        if abs(r.imag) > 1e-8 * max(1.0, abs(r)):
            continue
        w0 = r.real
        if w0 == 0:
            return 0.0
        y0 = complex(shift(1j * w0)).imag
        if w0 > 0:
            t = 2.0 * (0.5 * np.pi - np.arctan(-2.0 * y0)) / w0
        else:
            t = 2.0 * (0.5 * np.pi - np.arctan(2.0 * y0)) / -w0
        limit = min(limit, t)
    return limit


def log_integrability_check(w, wmax=1e6, n=20001, cap=1e12):
    """Scan for unbounded weight values.

    The floor bounds ``log phi`` from below, so integrability fails only if
    the weight blows up, which happens when the shift crosses ``Re = 1/2``
    inside a cut.
    """
    spec = w.spec
    if spec.tau_bar > 0 and spec.tau_bar >= shift_validity_limit(spec.shift):
        return False
    grid = np.concatenate([-np.geomspace(wmax, 1e-6, n // 2), [0.0], np.geomspace(1e-6, wmax, n // 2)])
    try:
        v = w(grid)
    except (ShiftHitsCut, ShiftHitsRegion):
        return False
    return bool(np.all(np.isfinite(v)) and np.max(v) < cap)
