"""Forbidden regions for the complementary sensitivity function.

A loop gain ``L`` maps to ``T = L / (1 + L)``.  A multiplicative
perturbation ``Delta`` destabilizes the loop where ``1 + Delta L = 0``,
which in the ``T`` plane is the point ``1 / (1 - Delta)``.  The sets below
are the images of the perturbation families used for gain, phase and delay
margins.

All distance functions broadcast over array arguments.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRegion, InvalidGain

__all__ = [
    "dist_to_cut",
    "dist_to_gain_set",
    "dist_to_phase_set",
    "dist_to_simultaneous",
    "point_in_region_nyquist",
    "SimultaneousRegion",
    "cut_endpoint",
    "region_boundary",
]

TWO_PI = 2.0 * np.pi
_TINY = 1e-12


def cut_endpoint(phi):
    """Imaginary part of the finite endpoint of the cut for ``0 < phi < 2 pi``."""
    h = 0.5 * np.asarray(phi, dtype=float)
    with np.errstate(all="ignore"):
        return -0.5 * np.cos(h) / np.sin(h)


def dist_to_cut(phi, z):
    """Distance from ``z`` to the cut ``C_phi``.

    ``C_phi`` is empty for ``phi == 0``, the half-line
    ``1/2 + i y, y <= -cot(phi/2)/2`` for ``0 < phi < 2 pi``, its mirror image
    for negative ``phi`` and the whole line ``Re = 1/2`` for ``|phi| >= 2 pi``.
    Returns ``inf`` for the empty cut.
    """
    phi, z = np.broadcast_arrays(np.asarray(phi, dtype=float), np.asarray(z, dtype=complex))
    a = np.abs(phi)
    # mirror negative cuts onto the lower one
    zz = np.where(phi < 0, np.conj(z), z)
    out = np.full(phi.shape, np.inf)
    full = a >= TWO_PI
    out = np.where(full, np.abs(zz.real - 0.5), out)
    mid = (a > 0) & ~full
    if np.any(mid):
        with np.errstate(all="ignore"):
            ye = cut_endpoint(np.where(mid, a, 1.0))
        eta = zz.imag - ye
        d_line = np.abs(zz.real - 0.5)
        # ye = -inf for phi below the smallest normal: the cut is out of reach
        fin = np.isfinite(ye)
        with np.errstate(all="ignore"):
            d_end = np.where(fin, np.abs(zz - (0.5 + 1j * np.where(fin, ye, 0.0))), np.inf)
        out = np.where(mid, np.where(eta <= 0, d_line, d_end), out)
    return out[()] if out.ndim == 0 else out


def dist_to_gain_set(k, z):
    """Distance from ``z`` to the real half-line ``[-inf, -1/(k-1)]``."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 1):
        raise InvalidGain("gain margin must exceed 1")
    z = np.asarray(z, dtype=complex)
    xe = -1.0 / (k - 1.0)
    out = np.where(z.real <= xe, np.abs(z.imag), np.abs(z - xe))
    return out[()] if out.ndim == 0 else out


def dist_to_phase_set(phase_phi, z):
    """Distance from ``z`` to ``C_phi`` union ``C_-phi``."""
    phase_phi = np.asarray(phase_phi, dtype=float)
    return np.minimum(dist_to_cut(phase_phi, z), dist_to_cut(-phase_phi, z))


@dataclass(frozen=True)
class SimultaneousRegion:
    """Image of ``{k' e^{-i th} e^{-i omega t}}`` for ``k' in [1, k]``,
    ``th in [-phi, phi]``, ``t in [0, tau]`` at one frequency.

    In the Nyquist plane this is the annular sector ``-rho e^{i psi}`` with
    ``rho in [1/k, 1]`` and ``psi`` in :attr:`psi_range`.
    """

    gain_k: float
    phase_phi: float
    delay_tau: float
    omega: float

    def __post_init__(self):
        if self.gain_k < 1:
            raise InvalidGain("gain_k must be >= 1")
        if not 0 <= self.phase_phi < TWO_PI:
            raise ValueError("phase_phi must lie in [0, 2 pi)")
        if self.delay_tau < 0:
            raise ValueError("delay_tau must be >= 0")
        if self.gain_k == 1 and self.phase_phi == 0 and self.omega * self.delay_tau == 0:
            raise DegenerateRegion("region collapses to the single point T = inf")

    @property
    def psi_range(self):
        return _psi_range(self.phase_phi, self.omega * self.delay_tau)

    @property
    def is_annulus(self):
        lo, hi = self.psi_range
        return hi - lo >= TWO_PI


def _psi_range(phase_phi, wt):
    wt = np.asarray(wt, dtype=float)
    return -phase_phi + np.minimum(0.0, wt), phase_phi + np.maximum(0.0, wt)


def _in_sector(k, psi1, psi2, w):
    rho = np.abs(w)
    psi = np.angle(-w)
    span = psi2 - psi1
    radial = (rho >= (1.0 / k) * (1 - _TINY)) & (rho <= 1 + _TINY)
    ang = (np.mod(psi - psi1, TWO_PI) <= span + _TINY) | (span >= TWO_PI)
    return radial & ang


def _nyquist(z):
    with np.errstate(all="ignore"):
        return z / (1.0 - z)


def point_in_region_nyquist(region, w):
    """True where the loop-gain value ``w`` lies in the Nyquist-plane sector."""
    psi1, psi2 = region.psi_range
    out = _in_sector(region.gain_k, psi1, psi2, np.asarray(w, dtype=complex))
    return out[()] if np.ndim(out) == 0 else out


def _dist_inner_arc(k, psi1, psi2, z):
    c = -1.0 / (k * k - 1.0)
    r = k / (k * k - 1.0)
    d = z - c
    ad = np.abs(d)
    safe = ad > 0
    u = np.where(safe, d / np.where(safe, ad, 1.0), 1.0)
    tstar = c + r * u
    with np.errstate(all="ignore"):
        psistar = -np.angle(1.0 - 1.0 / tstar)
    inside = np.mod(psistar - psi1, TWO_PI) <= (psi2 - psi1)
    e1 = 1.0 / (1.0 - k * np.exp(-1j * psi1))
    e2 = 1.0 / (1.0 - k * np.exp(-1j * psi2))
    ends = np.minimum(np.abs(z - e1), np.abs(z - e2))
    return np.where(safe & inside, np.abs(ad - r), np.where(safe, ends, r))


def _dist_segment(a, b, z):
    ab = b - a
    t = np.clip(((z - a) * np.conj(ab)).real / np.abs(ab) ** 2, 0.0, 1.0)
    return np.abs(z - (a + t * ab))


def _dist_connector(k, psi, z):
    psi = np.asarray(psi, dtype=float)
    z = np.asarray(z, dtype=complex)
    s = np.sin(psi)
    cs = np.cos(psi)
    degenerate = np.abs(s) < 1e-9
    with np.errstate(all="ignore"):
        c = 0.5 - np.divide(0.5j * cs, s)
        r = np.divide(0.5, np.abs(s))
        d = z - c
        ad = np.abs(d)
        tstar = c + r * d / ad
        delta = 1.0 - 1.0 / tstar
        kap = (delta * np.exp(1j * psi)).real
        e1 = 1.0 / (1.0 - np.exp(-1j * psi))
        e2 = 1.0 / (1.0 - k * np.exp(-1j * psi))
        inside = np.isfinite(kap) & (kap >= 1.0) & (kap <= k)
        arc = np.where(inside, np.abs(ad - r), np.minimum(np.abs(z - e1), np.abs(z - e2)))
        arc = np.where(ad > 0, arc, r)
    # psi ~ 0: the gain half-line; psi ~ pi: segment [1/(1+k), 1/2]
    xe = -1.0 / (k - 1.0)
    ray = np.where(z.real <= xe, np.abs(z.imag), np.abs(z - xe))
    seg = _dist_segment(1.0 / (1.0 + k), 0.5 + 0j, z)
    deg = np.where(cs > 0, ray, seg)
    return np.where(degenerate, deg, arc)


def _dist_simultaneous(k, phase_phi, wt, z):
    """Vectorized distance to the simultaneous region over ``omega * tau`` and ``z``."""
    wt, z = np.broadcast_arrays(np.asarray(wt, dtype=float), np.asarray(z, dtype=complex))
    psi1, psi2 = _psi_range(phase_phi, wt)
    span = psi2 - psi1
    full = span >= TWO_PI
    gain = k - 1.0 > 1e-12
    d = np.minimum(dist_to_cut(psi2, z), dist_to_cut(psi1, z))
    d = np.where(full, np.abs(z.real - 0.5), d)
    if gain:
        p1 = np.where(full, -np.pi, psi1)
        p2 = np.where(full, np.pi, psi2)
        d_arc = _dist_inner_arc(k, p1, p2, z)
        c = -1.0 / (k * k - 1.0)
        r = k / (k * k - 1.0)
        d_circ = np.abs(np.abs(z - c) - r)
        d_conn = np.minimum(_dist_connector(k, psi1, z), _dist_connector(k, psi2, z))
        d = np.minimum(d, np.where(full, d_circ, np.minimum(d_arc, d_conn)))
    inside = _in_sector(k, psi1, psi2, _nyquist(z)) & (z != 1)
    # the empty point set at omega*tau = 0 with no gain/phase range
    empty = (not gain) & (phase_phi == 0) & (wt == 0)
    d = np.where(inside, 0.0, d)
    d = np.where(empty, np.inf, d)
    return d[()] if d.ndim == 0 else d


def dist_to_simultaneous(region, z):
    """Distance from ``z`` to the simultaneous gain/phase/delay region.

    Zero if ``z`` lies in the region (tested in the Nyquist plane), otherwise
    the minimum over the boundary pieces: the two half-lines on ``Re = 1/2``,
    the arc of the circle centred at ``-1/(k^2-1)`` and the two connector arcs.
    """
    return _dist_simultaneous(region.gain_k, region.phase_phi,
                              region.omega * region.delay_tau, z)


def region_boundary(region, n=400, ray_length=20.0):
    """Sampled boundary pieces of a simultaneous region, for plotting.

    Returns a list of ``(label, points)`` with complex ``points`` in the
    ``T`` plane.  Half-lines are truncated at ``ray_length``.
    """
    k = region.gain_k
    psi1, psi2 = (float(v) for v in region.psi_range)
    pieces = []
    if psi2 - psi1 >= TWO_PI:
        y = np.linspace(-ray_length, ray_length, n)
        pieces.append(("unit-circle image", 0.5 + 1j * y))
        if k > 1:
            th = np.linspace(-np.pi, np.pi, n)
            pieces.append(("gain arc", 1.0 / (1.0 - k * np.exp(-1j * th))))
        return pieces
    if psi2 > 0:
        ye = float(cut_endpoint(psi2))
        pieces.append(("cut (delay/phase, lower)", 0.5 + 1j * np.linspace(-ray_length, ye, n)))
    if psi1 < 0:
        ye = -float(cut_endpoint(-psi1))
        pieces.append(("cut (phase, upper)", 0.5 + 1j * np.linspace(ye, ray_length, n)))
    if k > 1:
        th = np.linspace(psi1, psi2, n)
        pieces.append(("gain arc", 1.0 / (1.0 - k * np.exp(-1j * th))))
        kap = np.linspace(1.0, k, n)
        for lab, psi in (("connector 1", psi1), ("connector 2", psi2)):
            with np.errstate(all="ignore"):
                pts = 1.0 / (1.0 - kap * np.exp(-1j * psi))
            pts = pts[np.isfinite(pts) & (np.abs(pts) < ray_length)]
            pieces.append((lab, pts))
    return pieces
