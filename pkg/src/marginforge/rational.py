"""Polynomial and rational-function arithmetic for SISO transfer functions.

Coefficients are stored in ascending order of degree, matching
:mod:`numpy.polynomial.polynomial`.  Roots come from companion-matrix
eigenvalues (``polyroots``), which is reliable for the degrees used here
(at most a few dozen).
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    BoundaryPoleZero,
    InvalidPolynomial,
    NonConvergence,
    NonSimpleRoots,
    NotNonnegative,
    PoleEvaluation,
    StablePlant,
)

__all__ = [
    "Polynomial",
    "RationalFunction",
    "Plant",
    "evaluate",
    "roots",
    "classify_plant",
    "spectral_factor",
    "pair_conjugates",
]

BOUNDARY_TOL = 1e-9
COPRIME_TOL = 1e-8
DISTINCT_TOL = 1e-6


def _as_coeffs(coeffs):
    c = np.atleast_1d(np.asarray(coeffs))
    if c.ndim != 1 or c.size == 0:
        raise InvalidPolynomial("coefficients must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(c)):
        raise InvalidPolynomial("coefficients must be finite")
    if np.iscomplexobj(c):
        if np.all(c.imag == 0):
            c = c.real
    c = c.astype(complex if np.iscomplexobj(c) else float)
    # strip exact trailing zeros (leading in descending order)
    nz = np.flatnonzero(c)
    c = c[: nz[-1] + 1] if nz.size else c[:1] * 0
    return c


class Polynomial:
    """Polynomial with coefficients in ascending order of degree.

    Parameters
    ----------
    coeffs : array_like
        ``coeffs[k]`` multiplies ``s**k``.  Exact zero leading terms are
        removed.  Complex coefficients are allowed for intermediate
        computations; everything user facing is real.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = _as_coeffs(coeffs)
        c.setflags(write=False)
        self._c = c

    @classmethod
    def from_roots(cls, rts, gain=1.0):
        rts = np.asarray(list(rts), dtype=complex)
        if rts.size == 0:
            return cls([gain])
        c = npoly.polyfromroots(rts) * gain
        if np.max(np.abs(c.imag), initial=0.0) <= 1e-12 * np.max(np.abs(c)):
            c = c.real
        return cls(c)

    @classmethod
    def from_descending(cls, coeffs):
        return cls(np.asarray(coeffs)[::-1])

    @property
    def coeffs(self):
        return self._c

    @property
    def degree(self):
        return self._c.size - 1

    @property
    def is_zero(self):
        return self._c.size == 1 and self._c[0] == 0

    @property
    def is_real(self):
        return not np.iscomplexobj(self._c)

    @property
    def leading(self):
        return self._c[-1]

    def descending(self):
        return self._c[::-1].copy()

    def __call__(self, s):
        return npoly.polyval(s, self._c)

    def __repr__(self):
        return f"Polynomial({np.array2string(self._c, precision=6)})"

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._c.shape == other._c.shape and bool(np.all(self._c == other._c))

    __hash__ = None

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other._c
        if np.isscalar(other):
            return np.array([other])
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Polynomial(npoly.polyadd(self._c, o))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self._c)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Polynomial(npoly.polysub(self._c, o))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Polynomial(npoly.polymul(self._c, o))

    __rmul__ = __mul__

    def __pow__(self, n):
        out = Polynomial([1.0])
        for _ in range(int(n)):
            out = out * self
        return out

    def __divmod__(self, other):
        q, r = npoly.polydiv(self._c, other._c)
        return Polynomial(q), Polynomial(r)

    def conj(self):
        return Polynomial(np.conj(self._c))

    def mirror(self):
        """Return ``p(-s)``."""
        signs = (-1.0) ** np.arange(self._c.size)
        return Polynomial(self._c * signs)

    def deriv(self):
        return Polynomial(npoly.polyder(self._c)) if self.degree > 0 else Polynomial([0.0])

    def real_part(self, tol=1e-9):
        """Drop imaginary parts that are negligible relative to the coefficients."""
        if self.is_real:
            return self
        scale = np.max(np.abs(self._c))
        if np.max(np.abs(self._c.imag)) > tol * scale:
            raise InvalidPolynomial("coefficients are not real to tolerance")
        return Polynomial(self._c.real)

    def roots(self):
        return roots(self)

    def norm(self):
        return float(np.linalg.norm(self._c))

    def trim(self, tol=1e-14):
        """Drop leading coefficients below ``tol`` times the largest one."""
        c = self._c
        scale = np.max(np.abs(c))
        if scale == 0:
            return Polynomial([0.0])
        keep = np.flatnonzero(np.abs(c) > tol * scale)
        return Polynomial(c[: keep[-1] + 1])


def pair_conjugates(rts, tol=1e-7):
    """Snap roots of a real polynomial onto exact conjugate pairs.

    Roots whose imaginary part is below ``tol`` relative to their modulus are
    made real; the remaining ones are matched greedily with their nearest
    conjugate and averaged.
    """
    rts = list(np.asarray(rts, dtype=complex))
    out = []
    cplx = []
    for r in rts:
        if abs(r.imag) <= tol * max(1.0, abs(r)):
            out.append(complex(r.real, 0.0))
        else:
            cplx.append(r)
    upper = [r for r in cplx if r.imag > 0]
    lower = [r for r in cplx if r.imag < 0]
    if len(upper) != len(lower):
        # odd split means a near-real root was misclassified; keep raw values
        return np.array(out + cplx, dtype=complex)
    for r in upper:
        j = int(np.argmin([abs(r - np.conj(q)) for q in lower]))
        q = lower.pop(j)
        m = 0.5 * (r + np.conj(q))
        out.extend([m, np.conj(m)])
    return np.array(out, dtype=complex)


def roots(p, tol=1e-6):
    """All roots of ``p`` with multiplicity.

    Raises
    ------
    InvalidPolynomial
        If ``p`` has degree zero.
    NonConvergence
        If a root fails the residual test after one Newton polish.
    """
    if not isinstance(p, Polynomial):
        p = Polynomial(p)
    if p.degree < 1:
        raise InvalidPolynomial("roots() needs degree >= 1")
    c = p.coeffs
    rts = npoly.polyroots(c).astype(complex)
    dp = p.deriv()
    # one Newton step polishes companion-matrix eigenvalues
    d = dp(rts)
    ok = np.abs(d) > 0
    step = np.zeros_like(rts)
    step[ok] = p(rts[ok]) / d[ok]
    polished = rts - step
    better = np.abs(p(polished)) < np.abs(p(rts))
    rts = np.where(better, polished, rts)
    if p.is_real:
        rts = pair_conjugates(rts)
    scale = np.linalg.norm(c)
    resid = np.abs(p(rts)) / (scale * np.maximum(1.0, np.abs(rts)) ** p.degree)
    if np.any(~np.isfinite(rts)) or np.any(resid > tol):
        raise NonConvergence(f"root residual {resid.max():.2e} exceeds tolerance")
    order = np.lexsort((rts.imag, rts.real))
    return rts[order]


class RationalFunction:
    """Ratio ``num(s) / den(s)`` of two polynomials.

    Construction does not cancel common factors; call :meth:`minreal` for a
    coprime representation.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=1.0):
        num = num if isinstance(num, Polynomial) else Polynomial(num)
        den = den if isinstance(den, Polynomial) else Polynomial(den)
        if den.is_zero:
            raise InvalidPolynomial("denominator is identically zero")
        self.num = num
        self.den = den

    @classmethod
    def constant(cls, c):
        return cls([c], [1.0])

    @classmethod
    def from_zpk(cls, zeros, poles, gain):
        return cls(Polynomial.from_roots(zeros, gain), Polynomial.from_roots(poles))

    def __call__(self, s):
        return evaluate(self, s)

    def __repr__(self):
        return f"RationalFunction(num={self.num.coeffs!r}, den={self.den.coeffs!r})"

    @property
    def is_real(self):
        return self.num.is_real and self.den.is_real

    @property
    def is_zero(self):
        return self.num.is_zero

    @property
    def relative_degree(self):
        return self.den.degree - self.num.degree

    def value_at_infinity(self):
        rd = self.relative_degree
        if rd > 0 or self.num.is_zero:
            return 0.0
        if rd < 0:
            return np.inf
        v = self.num.leading / self.den.leading
        return v.real if np.isrealobj(v) else v

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(other, [1.0])
        if np.isscalar(other):
            return RationalFunction.constant(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.num.is_zero:
            raise ZeroDivisionError("division by the zero function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def conj(self):
        return RationalFunction(self.num.conj(), self.den.conj())

    def real_part(self, tol=1e-9):
        return RationalFunction(self.num.real_part(tol), self.den.real_part(tol))

    def zeros(self):
        return roots(self.num) if self.num.degree > 0 else np.array([], dtype=complex)

    def poles(self):
        return roots(self.den) if self.den.degree > 0 else np.array([], dtype=complex)

    def is_stable(self, margin=0.0):
        """True if all poles have real part below ``-margin``."""
        p = self.poles()
        return bool(np.all(p.real < -margin))

    def normalized(self):
        """Scale so the denominator is monic."""
        lead = self.den.leading
        return RationalFunction(self.num * (1.0 / lead), self.den * (1.0 / lead))

    def minreal(self, tol=COPRIME_TOL):
        """Cancel numerator/denominator root pairs closer than ``tol`` (relative)."""
        if self.num.is_zero:
            return RationalFunction([0.0], [1.0])
        if self.num.degree == 0 or self.den.degree == 0:
            return self.normalized()
        z = list(self.zeros())
        p = list(self.poles())
        cancelled = False
        for zi in list(z):
            if not p:
                break
            d = [abs(zi - pi) for pi in p]
            j = int(np.argmin(d))
            if d[j] <= tol * max(1.0, abs(zi)):
                z.remove(zi)
                p.pop(j)
                cancelled = True
        if not cancelled:
            return self.normalized()
        gain = self.num.leading / self.den.leading
        if self.is_real:
            gain = float(np.real(gain))
        num = Polynomial.from_roots(z, gain)
        den = Polynomial.from_roots(p)
        if self.is_real:
            num, den = num.real_part(1e-8), den.real_part(1e-8)
        return RationalFunction(num, den)


def evaluate(f, s, tol=1e-300):
    """Evaluate ``f`` at ``s`` (scalar or array).

    Raises
    ------
    PoleEvaluation
        If the denominator vanishes (below ``tol`` relative to its
        coefficient norm) at a scalar ``s``.
    """
    d = f.den(s)
    n = f.num(s)
    scale = f.den.norm() * np.maximum(1.0, np.abs(s)) ** f.den.degree
    small = np.abs(d) <= tol * scale
    if np.any(small):
        if np.ndim(s) == 0:
            raise PoleEvaluation(f"denominator vanishes at s={s}")
        d = np.where(small, np.nan, d)
    return n / d


@dataclass(frozen=True)
class Plant:
    """An unstable SISO plant with its open right half-plane poles and zeros."""

    transfer: RationalFunction
    unstable_poles: tuple
    nmp_zeros: tuple

    @property
    def nodes(self):
        return np.array(list(self.unstable_poles) + list(self.nmp_zeros), dtype=complex)

    @property
    def n_poles(self):
        return len(self.unstable_poles)

    def __call__(self, s):
        return self.transfer(s)


def _rhp(rts, what):
    out = []
    for r in rts:
        if abs(r.real) < BOUNDARY_TOL * max(1.0, abs(r)):
            raise BoundaryPoleZero(f"{what} {r} lies on the imaginary axis")
        if r.real > 0:
            out.append(complex(r))
    return out


def classify_plant(transfer):
    """Split the closed right half-plane roots off a transfer function.

    Raises
    ------
    BoundaryPoleZero
        A pole or zero lies on the imaginary axis.
    StablePlant
        No pole in the open right half-plane (delay margin is infinite).
    NonSimpleRoots
        Right half-plane poles/zeros are repeated or nearly coincide.
    """
    if transfer.relative_degree < 0:
        raise InvalidPolynomial("plant must be proper")
    if not transfer.is_real:
        raise InvalidPolynomial("plant must have real coefficients")
    tf = transfer.minreal()
    poles = _rhp(tf.poles(), "pole") if tf.den.degree > 0 else []
    zeros = _rhp(tf.zeros(), "zero") if tf.num.degree > 0 else []
    if not poles:
        raise StablePlant("plant has no unstable pole: delay margin infinite")
    rhp = poles + zeros
    for i, a in enumerate(rhp):
        for b in rhp[i + 1:]:
            if abs(a - b) < DISTINCT_TOL * max(1.0, abs(a)):
                raise NonSimpleRoots(f"repeated right half-plane root near {a}")

    def snap(v):
        v = complex(v)
        return complex(v.real, 0.0) if v.imag == 0 else v

    poles = tuple(snap(p) for p in sorted(poles, key=lambda r: (r.real, r.imag)))
    zeros = tuple(snap(z) for z in sorted(zeros, key=lambda r: (r.real, r.imag)))
    return Plant(tf, poles, zeros)


def spectral_factor(B):
    """Stable spectral factor of a polynomial that is nonnegative on the real line.

    Parameters
    ----------
    B : Polynomial
        Coefficients in powers of ``omega**2``: ``B(w) = sum_j B.coeffs[j] * w**(2j)``.

    Returns
    -------
    Polynomial
        ``b(s)`` with real coefficients, roots in the closed left half-plane,
        positive leading coefficient and ``|b(iw)|**2 == B(w)``.

    Raises
    ------
    NotNonnegative
        If ``B`` is negative somewhere on the real line.
    """
    if not isinstance(B, Polynomial):
        B = Polynomial(B)
    c = np.real_if_close(B.coeffs)
    if np.iscomplexobj(c):
        raise NotNonnegative("B must have real coefficients")
    n = B.degree
    if n == 0:
        if c[0] < 0:
            raise NotNonnegative("negative constant")
        return Polynomial([np.sqrt(c[0])])
    if c[-1] < 0:
        raise NotNonnegative("B tends to -inf")
    # sign changes on x = w**2 >= 0
    xr = [r.real for r in roots(B) if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and r.real >= 0]
    probes = sorted(set([0.0] + xr))
    mids = [0.5 * (a + b) for a, b in zip(probes[:-1], probes[1:])] + [probes[-1] + 1.0, 0.0]
    if any(B(x) < -1e-12 * B.norm() for x in mids):
        raise NotNonnegative("B takes negative values on the real line")
    # Q(s) = B(-s^2) = b(s) b(-s)
    q = np.zeros(2 * n + 1)
    q[::2] = c * (-1.0) ** np.arange(n + 1)
    # raw eigenvalues: their cluster means are accurate, polished roots are not
    left = _left_roots(npoly.polyroots(q).astype(complex), n)
    b = Polynomial.from_roots(left, np.sqrt(c[-1])).real_part(1e-6)
    return b


def _clusters(rts, tol=1e-3):
    """Group nearby roots; a multiple root is best estimated by its cluster mean."""
    rts = list(rts)
    out = []
    while rts:
        r = rts.pop(0)
        group = [r]
        rest = []
        for q in rts:
            (group if abs(q - r) <= tol * max(1.0, abs(r)) else rest).append(q)
        rts = rest
        out.append((complex(np.mean(group)), len(group)))
    return out


def _left_roots(rts, n):
    """``n`` roots of ``b`` from the ``2n`` roots of ``b(s) b(-s)``."""
    left = []
    for c, m in _clusters(rts):
        if abs(c.real) <= 1e-7 * max(1.0, abs(c)):
            left += [complex(0.0, c.imag)] * (m // 2)
        elif c.real < 0:
            left += [c] * m
    if len(left) != n:
        # clustering failed to split evenly; fall back to ordering by real part
        left = list(np.asarray(rts)[np.argsort(np.real(rts), kind="stable")][:n])
    return np.asarray(left, dtype=complex)
