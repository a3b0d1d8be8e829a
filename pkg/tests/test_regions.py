import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from marginforge.errors import DegenerateRegion, InvalidGain
from marginforge.regions import (
    SimultaneousRegion,
    dist_to_cut,
    dist_to_gain_set,
    dist_to_phase_set,
    dist_to_simultaneous,
    point_in_region_nyquist,
)
from marginforge.weights import phi_delay
from oracles import cut_oracle, dist_oracle

cplx = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)
angle = st.floats(-6.0, 6.0, allow_nan=False)


@pytest.mark.parametrize("phi,z,expect", [
    (np.pi, 0, 0.5),
    (np.pi / 2, 0, np.sqrt(2) / 2),
    (0.0, 1 + 1j, np.inf),
    (3 * np.pi, 0.2 + 5j, 0.3),
])
def test_cut_examples(phi, z, expect):
    assert dist_to_cut(phi, z) == pytest.approx(expect)


def test_gain_and_phase_examples():
    assert dist_to_gain_set(2, 0) == pytest.approx(1.0)
    assert dist_to_gain_set(2, -3) == 0
    assert dist_to_gain_set(3, -0.5 + 1j) == pytest.approx(1.0)
    with pytest.raises(InvalidGain):
        dist_to_gain_set(1.0, 0)
    assert dist_to_phase_set(np.pi / 2, 0) == pytest.approx(np.sqrt(2) / 2)
    assert dist_to_phase_set(0.0, 7 - 2j) == np.inf
    assert dist_to_phase_set(2 * np.pi, 0) == pytest.approx(0.5)


def test_reciprocal_identity_grid():
    w = np.geomspace(1e-3, 1e3, 200)
    tau = np.geomspace(1e-2, 1e2, 200)[::-1]
    d = dist_to_cut(w * tau, 0.0)
    assert np.max(np.abs(d * phi_delay(1.0, w * tau) - 1.0)) <= 1e-10


@given(angle, cplx)
def test_cut_conjugate_symmetry(phi, z):
    assert dist_to_cut(-phi, np.conj(z)) == pytest.approx(dist_to_cut(phi, z), abs=1e-12)


@given(st.floats(-5, 0.49), st.lists(st.floats(1e-3, 2 * np.pi - 1e-3), min_size=2, max_size=8))
def test_cut_monotone_in_phi(x, phis):
    phis = np.sort(phis)
    d = dist_to_cut(phis, complex(x, 0))
    assert np.all(np.diff(d) <= 1e-12)


@given(angle, cplx)
def test_cut_matches_sampling(phi, z):
    assert dist_to_cut(phi, z) == pytest.approx(cut_oracle(phi, z), abs=1e-6)


@given(st.floats(0.05, 5.0), st.floats(-3, 3), cplx)
def test_simultaneous_reduces_to_cut(tau, omega, z):
    if omega * tau == 0:
        return
    reg = SimultaneousRegion(1.0, 0.0, tau, omega)
    assert float(dist_to_simultaneous(reg, z)) == pytest.approx(float(dist_to_cut(omega * tau, z)), abs=1e-9)


def test_simultaneous_examples():
    with pytest.raises(DegenerateRegion):
        SimultaneousRegion(1.0, 0.0, 0.0, 1.0)
    reg = SimultaneousRegion(1.5, np.pi / 12, 0.0, 1.0)
    # a point of the inner arc: Delta = 1.5 e^{i 0.1}
    z = 1.0 / (1.0 - 1.5 * np.exp(0.1j))
    assert float(dist_to_simultaneous(reg, z)) == pytest.approx(0.0, abs=1e-9)
    big = SimultaneousRegion(1.5, np.pi / 12, 10.0, 1.0)
    assert big.is_annulus
    assert float(dist_to_simultaneous(big, 0.0)) == pytest.approx(dist_oracle(1.5, np.pi / 12, 10.0, 0j), abs=1e-6)


def test_point_in_region_examples():
    for reg in (SimultaneousRegion(2.0, 0.3, 1.0, 0.5), SimultaneousRegion(1.5, 0.0, 2.0, 1.0)):
        assert point_in_region_nyquist(reg, -1.0)
    reg = SimultaneousRegion(2.0, 0.3, 1.0, 0.5)
    assert not point_in_region_nyquist(reg, -1.0 / 4.0)
    k, ph, tau, w = 1.5, np.pi / 12, 2.0, 0.7
    reg = SimultaneousRegion(k, ph, tau, w)
    assert point_in_region_nyquist(reg, -(1 / 1.2) * np.exp(1j * (ph + w * tau / 2)))


@given(st.floats(1.05, 3), st.floats(0, 1.5), st.floats(0, 3), st.floats(-3, 3), cplx,
       st.floats(1e-3, 0.5), st.floats(0, 2 * np.pi))
def test_simultaneous_matches_oracle(k, ph, tau, w, z, off, ang):
    # half of the probes sit just outside a boundary point
    reg = SimultaneousRegion(k, ph, tau, w)
    z2 = 1.0 / (1.0 - k * np.exp(-1j * ph)) + off * np.exp(1j * ang)
    for zz in (z, z2):
        assert float(dist_to_simultaneous(reg, zz)) == pytest.approx(
            dist_oracle(k, ph, w * tau, zz, n=20_000), abs=1e-4)
