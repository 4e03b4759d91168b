import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from blockade.errors import DimensionMismatch, StepTooLarge, TruncationTooSmall
from blockade.model import FockTruncation, ModelParams, build_h_ddjc, build_h_eff
from blockade.validity import (
    AmplitudeState,
    ValidityParams,
    amp_derivs_ddjc,
    amp_derivs_eff,
    coherent_initial_state,
    default_step,
    fidelity,
    fidelity_curve,
    generator_matrix,
    integrate_amps,
)


def basis(n_max, atom, n):
    s = AmplitudeState(np.zeros(n_max + 1), np.zeros(n_max + 1))
    (s.excited if atom == "e" else s.ground)[n] = 1.0
    return s


def random_state(rng, n_max):
    v = rng.normal(size=2 * (n_max + 1)) + 1j * rng.normal(size=2 * (n_max + 1))
    return AmplitudeState.from_vector(v / np.linalg.norm(v))


def test_excited_vacuum_derivative():
    p = ModelParams(delta_c_prime=-3.0, delta_0=0.8, chi=1.5, omega_r=2.0)
    d = amp_derivs_ddjc(basis(4, "e", 0), p)
    assert d.excited[0] == pytest.approx(-0.4j)  # -i delta_0 / 2
    assert d.ground[0] == pytest.approx(-1.0j)  # -i omega_r / 2
    assert np.count_nonzero(d.excited) == 1 and np.count_nonzero(d.ground) == 1


def test_ground_one_photon_derivative():
    p = ModelParams(delta_c_prime=-3.0, delta_0=0.8, chi=1.5, omega_r=2.0)
    d = amp_derivs_ddjc(basis(4, "g", 1), p)
    assert d.ground[1] == pytest.approx(-1j * (-3.0 - 0.4 - 1.5))
    assert d.excited[1] == pytest.approx(-1.0j)


def test_conditional_drive_derivative():
    vp = ValidityParams.dispersive_recipe(0.1)
    s = basis(4, "e", 1)
    d = amp_derivs_eff(s, vp).excited - amp_derivs_ddjc(s, vp.model).excited
    drive = 0.5 * vp.model.omega_r * 0.1
    assert d[0] == pytest.approx(-1j * drive)
    assert d[2] == pytest.approx(-1j * drive * math.sqrt(2))
    dg = amp_derivs_eff(basis(4, "g", 1), vp).ground - amp_derivs_ddjc(basis(4, "g", 1), vp.model).ground
    assert dg[0] == pytest.approx(1j * drive)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.02, 0.5))
def test_derivatives_equal_schroedinger_rhs(seed, r):
    t = FockTruncation(6)
    vp = ValidityParams.dispersive_recipe(r, chi=1.3, omega_ratio=1.7, delta_0=0.4)
    s = random_state(np.random.default_rng(seed), t.n_max)
    v = s.as_vector()
    eff = amp_derivs_eff(s, vp).as_vector()
    ddjc = amp_derivs_ddjc(s, vp.model).as_vector()
    assert np.max(np.abs(eff + 1j * build_h_eff(vp.model, t, r) @ v)) <= 1e-12 * max(1, abs(vp.model.delta_c_prime))
    assert np.max(np.abs(ddjc + 1j * build_h_ddjc(vp.model, t) @ v)) <= 1e-12 * max(1, abs(vp.model.delta_c_prime))


def test_ddjc_generator_block_frequencies():
    p = ModelParams(delta_c_prime=-2.0, delta_0=0.3, chi=1.0, omega_r=2.0)
    gen = generator_matrix("ddjc", p, 5)
    freqs = np.sort(np.linalg.eigvals(1j * gen).real)
    expected = []
    for m in range(6):
        half = 0.5 * math.hypot(p.delta_0 + 2 * m * p.chi, p.omega_r)
        expected += [m * p.delta_c_prime + half, m * p.delta_c_prime - half]
    assert np.allclose(freqs, np.sort(expected), atol=1e-12)


def test_integrate_zero_time_returns_initial():
    s = basis(3, "e", 0)
    traj = integrate_amps("ddjc", s, ModelParams(), 0.0, 1e-3)
    assert len(traj.states) == 1
    assert np.array_equal(traj.states[0].as_vector(), s.as_vector())


def test_vacuum_rabi_oscillation():
    p = ModelParams(delta_c_prime=-5.0, delta_0=0.0, chi=1.0, omega_r=2.0)
    traj = integrate_amps("ddjc", basis(4, "e", 0), p, 3.0, 1e-3, sample_every=100)
    for tm, s in zip(traj.times, traj.states):
        assert s.excited[0] == pytest.approx(math.cos(tm), abs=1e-9)
        assert s.ground[0] == pytest.approx(-1j * math.sin(tm), abs=1e-9)
    assert traj.times[-1] == pytest.approx(3.0)


def test_integrate_direct_matches_propagator_and_exact():
    rng = np.random.default_rng(3)
    vp = ValidityParams.dispersive_recipe(0.2, chi=1.0)
    t = FockTruncation(5)
    s = random_state(rng, t.n_max)
    dt = default_step(vp.model, t.n_max)
    a = integrate_amps("eff", s, vp, 0.5, dt, sample_every=50)
    b = integrate_amps("eff", s, vp, 0.5, dt, sample_every=50, direct=True)
    assert np.max(np.abs(a.states[-1].as_vector() - b.states[-1].as_vector())) < 1e-11
    exact = scipy.linalg.expm(-1j * 0.5 * build_h_eff(vp.model, t, 0.2)) @ s.as_vector()
    assert np.max(np.abs(a.states[-1].as_vector() - exact)) < 1e-6
    assert a.norm_drift() < 1e-7


def test_integrate_rejects_large_step():
    vp = ValidityParams.dispersive_recipe(0.1)
    with pytest.raises(StepTooLarge):
        integrate_amps("eff", basis(4, "g", 0), vp, 1.0, 0.1)
    with pytest.raises(TypeError):
        integrate_amps("eff", basis(4, "g", 0), vp.model, 1.0, 1e-5)
    with pytest.raises(ValueError):
        integrate_amps("other", basis(4, "g", 0), vp.model, 1.0, 1e-5)


def test_coherent_initial_state():
    t = FockTruncation(12)
    vac = coherent_initial_state(0.0, t)
    assert vac.excited[0] == pytest.approx(1 / math.sqrt(2))
    assert vac.ground[0] == pytest.approx(1 / math.sqrt(2))
    s = coherent_initial_state(1.0, t)
    assert s.norm() == pytest.approx(1.0, abs=1e-14)
    for n in range(5):
        assert abs(s.excited[n]) ** 2 == pytest.approx(math.exp(-1) / (2 * math.factorial(n)), rel=1e-9)
    with pytest.raises(TruncationTooSmall):
        coherent_initial_state(3.0, t)


def test_fidelity_values():
    e0, g0 = basis(3, "e", 0), basis(3, "g", 0)
    assert fidelity(e0, e0) == 1.0
    assert fidelity(e0, g0) == 0.0
    mix = AmplitudeState.from_vector((e0.as_vector() + g0.as_vector()) / math.sqrt(2))
    assert fidelity(e0, mix) == pytest.approx(0.5)
    with pytest.raises(DimensionMismatch):
        fidelity(e0, basis(4, "e", 0))


def test_validity_params_relations():
    vp = ValidityParams.dispersive_recipe(0.1, chi=2.0)
    assert vp.delta == pytest.approx(200.0)
    assert vp.g == pytest.approx(20.0)
    assert vp.g**2 / vp.delta == pytest.approx(2.0)
    assert vp.model.delta_c_prime == pytest.approx(-1.0 * 2.0 - 200.0)
    assert vp.model.delta_c_prime / vp.model.chi == pytest.approx(-1 - (1 / 0.1) ** 2)
    assert vp.model.eta == 0.0
    with pytest.raises(ValueError):
        ValidityParams.dispersive_recipe(0.0)


def test_fidelity_improves_as_detuning_grows():
    t = FockTruncation(12)
    init = coherent_initial_state(1.0, t)
    losses = []
    for r in (0.3, 0.2, 0.1, 0.05):
        times, f, drift = fidelity_curve(ValidityParams.dispersive_recipe(r), init, 10.0, 201)
        assert f[0] == pytest.approx(1.0, abs=1e-14)
        assert drift <= 1e-7
        assert np.all((f >= 0) & (f <= 1))
        losses.append(1 - f.min())
    assert all(a > b for a, b in zip(losses, losses[1:]))
