import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from marginforge.errors import ShiftHitsCut, ShiftHitsRegion, ShiftInvalid
from marginforge.rational import RationalFunction
from marginforge.regions import dist_to_cut
from marginforge.weights import (
    WeightFunction,
    WeightSpec,
    log_integrability_check,
    phi_delay,
    phi_multi_independent,
    phi_multi_simultaneous,
    phi_shifted,
    shift_validity_limit,
)

GRID = np.concatenate([-np.geomspace(1e3, 1e-3, 400), [0.0], np.geomspace(1e-3, 1e3, 400)])


def test_phi_delay_examples():
    assert phi_delay(1.0, np.pi) == pytest.approx(2.0)
    assert phi_delay(1.0, 0.0) == 0.0
    assert phi_delay(1.0, 10.0) == 2.0


def test_phi_shifted_examples():
    spec = WeightSpec(tau_bar=1.0)
    assert phi_shifted(spec, np.pi / 2) == pytest.approx(np.sqrt(2.0), rel=1e-14)
    assert phi_shifted(spec, 0.0) == pytest.approx(1e-4)
    spec = WeightSpec(tau_bar=1.0, shift=RationalFunction.constant(-10.0))
    assert phi_shifted(spec, np.pi) == pytest.approx(1 / 10.5, rel=1e-12)


def test_independent_examples():
    only_gain = WeightSpec(tau_bar=0.0, mode="independent", gain_k=2.0)
    assert np.allclose(phi_multi_independent(only_gain, GRID), 1.0)
    only_phase = WeightSpec(tau_bar=0.0, mode="independent", gain_k=1.0, phase_phi=np.pi / 2)
    assert np.allclose(phi_multi_independent(only_phase, GRID), np.sqrt(2.0))
    both = WeightSpec(tau_bar=1.0, mode="independent", gain_k=2.0, phase_phi=np.pi / 2)
    assert phi_multi_independent(both, 0.0) == pytest.approx(np.sqrt(2.0))


def test_simultaneous_reduces_to_shifted():
    shift = RationalFunction([-1.0], [1.0, 1.0])
    a = WeightSpec(tau_bar=2.0, shift=shift, mode="simultaneous", gain_k=1.0, phase_phi=0.0)
    b = WeightSpec(tau_bar=2.0, shift=shift)
    w = GRID[GRID != 0]
    assert np.allclose(phi_multi_simultaneous(a, w), phi_shifted(b, w), rtol=1e-9)


def test_simultaneous_full_annulus_matches_oracle():
    from oracles import dist_oracle

    spec = WeightSpec(tau_bar=10.0, mode="simultaneous", gain_k=1.5, phase_phi=np.pi / 12)
    for omega in (0.7, 1.3, 5.0):
        want = 1.0 / dist_oracle(1.5, np.pi / 12, omega * 10.0, 0j)
        assert phi_multi_simultaneous(spec, omega) == pytest.approx(want, rel=1e-6)


def test_zero_shift_equals_closed_form():
    for tau in (0.1, 1.0, 7.3):
        spec = WeightSpec(tau_bar=tau)
        exact = phi_delay(tau, GRID)
        got = phi_shifted(spec, GRID)
        m = exact >= spec.floor_eps
        assert np.max(np.abs(got[m] - exact[m])) <= 4e-16 * 2


@given(st.floats(0.0, 20.0), st.floats(0.0, 20.0), st.floats(-50.0, 50.0))
def test_monotone_in_tau(t1, t2, omega):
    t1, t2 = sorted((t1, t2))
    lo = phi_shifted(WeightSpec(tau_bar=t1), omega)
    hi = phi_shifted(WeightSpec(tau_bar=t2), omega)
    assert lo <= hi + 1e-12


@given(st.floats(0.0, 5.0), st.floats(1.0, 4.0), st.floats(0.0, 3.0), st.floats(-20.0, 20.0))
def test_dominance(tau, k, ph, omega):
    kw = dict(tau_bar=tau, gain_k=k, phase_phi=ph)
    ind = phi_multi_independent(WeightSpec(mode="independent", **kw), omega)
    sim = phi_multi_simultaneous(WeightSpec(mode="simultaneous", **kw), omega)
    delay = phi_shifted(WeightSpec(tau_bar=tau), omega)
    assert ind >= delay - 1e-12
    if k > 1:
        assert ind >= (k - 1.0) - 1e-9
    assert sim >= ind * (1 - 1e-9)


@given(st.sampled_from(["delay", "independent", "simultaneous"]), st.floats(0.0, 5.0),
       st.floats(-2.0, 0.3), st.floats(-1e3, 1e3))
def test_floor_everywhere(mode, tau, c, omega):
    spec = WeightSpec(tau_bar=tau, shift=RationalFunction.constant(c), mode=mode,
                      gain_k=1.2 if mode != "delay" else 1.0)
    try:
        v = WeightFunction(spec)(omega)
    except (ShiftHitsCut, ShiftHitsRegion):
        return
    assert v >= spec.floor_eps


def test_even_for_real_shift():
    spec = WeightSpec(tau_bar=1.5, shift=RationalFunction([-2.0], [1.0, 1.0]), mode="independent",
                      gain_k=1.5, phase_phi=0.3)
    w = WeightFunction(spec)
    pos = GRID[GRID > 0]
    assert np.allclose(w(pos), w(-pos), rtol=1e-13)


def test_shift_invalid_at_construction():
    with pytest.raises(ShiftInvalid):
        WeightSpec(shift=RationalFunction.constant(0.6))


def test_shift_hits_cut_raises():
    # T0 = 1/(1+s) equals 1/2 - i/2 at omega = 1; the cut at omega tau = pi
    # ends at 1/2, so it contains that point
    spec = WeightSpec(tau_bar=np.pi, shift=RationalFunction([1.0], [1.0, 1.0]))
    with pytest.raises(ShiftHitsCut):
        phi_shifted(spec, 1.0)


def test_validity_limit_matches_cut_contact():
    shift = RationalFunction([0.4, 0.0], [1.0, 1.0])
    # Re T0(i w) = 0.4/(1+w^2) never reaches 1/2
    assert shift_validity_limit(shift) == np.inf
    shift = RationalFunction([2.0], [1.0, 1.0])
    lim = shift_validity_limit(shift)
    assert 0 < lim < np.inf
    # at w0 where Re T0 = 1/2, T0 touches the cut exactly at tau = lim
    w0 = np.sqrt(3.0)
    t0 = complex(shift(1j * w0))
    assert t0.real == pytest.approx(0.5)
    assert dist_to_cut(w0 * lim, t0) == pytest.approx(0.0, abs=1e-9)
    assert dist_to_cut(w0 * lim * 0.99, t0) > 0


def test_log_integrability():
    assert log_integrability_check(WeightFunction(WeightSpec(tau_bar=1.0)))
    crossing = RationalFunction([2.0], [1.0, 1.0])
    assert not log_integrability_check(WeightFunction(WeightSpec(tau_bar=50.0, shift=crossing)))
    assert log_integrability_check(WeightFunction(WeightSpec(
        tau_bar=1.0, mode="independent", gain_k=2.0, phase_phi=np.pi / 6)))


def test_breakpoints_include_kinks():
    bp = WeightFunction(WeightSpec(tau_bar=2.0)).breakpoints()
    for x in (np.pi / 2, np.pi):
        assert np.min(np.abs(bp - x)) < 1e-12
