import math

import numpy as np
import pytest

import dqe.oracle as oracle
from dqe.errors import InconclusiveError, ParameterError
from dqe.frames import DriveGeometry
from dqe.oracle import (
    OracleConfig,
    ensemble_curves,
    estimate_rates,
    generate_noise_trajectory,
    propagate,
    validate_statistics,
)
from dqe.spectra import Lorentzian, White


def _free_geom():
    return DriveGeometry(omega_Z=1.0, Omega=0.0, nu=0.5)


# ---------------------------------------------------------------------------
# noise synthesis


def test_trajectory_deterministic_and_distinct():
    noise = Lorentzian(W_z=1.0, Gamma=math.pi, gamma=1.0, cutoff=10.0)
    a = generate_noise_trajectory(noise, "z", 0.01, 5.0, seed=3, traj_index=0)
    b = generate_noise_trajectory(noise, "z", 0.01, 5.0, seed=3, traj_index=0)
    c = generate_noise_trajectory(noise, "z", 0.01, 5.0, seed=3, traj_index=1)
    d = generate_noise_trajectory(noise, "z", 0.01, 5.0, seed=4, traj_index=0)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
    assert a.shape == (500,)


def test_trajectory_zero_strength_axis():
    noise = Lorentzian(W_z=1.0, Gamma=math.pi, gamma=1.0, cutoff=10.0)
    out = generate_noise_trajectory(noise, "x", 0.01, 5.0, seed=0)
    np.testing.assert_array_equal(out, 0.0)


def test_trajectory_validation():
    noise = White(S0=1.0, W_z=1.0, cutoff=5.0)
    with pytest.raises(ParameterError):
        generate_noise_trajectory(noise, "w", 0.01, 5.0, seed=0)
    with pytest.raises(ParameterError):
        generate_noise_trajectory(noise, "z", 1.0, 1.0, seed=0)


def test_statistics_lorentzian():
    noise = Lorentzian(W_z=0.7, Gamma=2.0 * math.pi, gamma=1.0, cutoff=30.0)
    report = validate_statistics(noise, "z", n_samples=6000, n_traj=48)
    assert report.passed, f"max deviation {report.max_deviation_sigma:.2f} sigma"
    # lag-0 value is the truncated variance, within a few percent here
    assert report.sample[0] == pytest.approx(report.expected[0], rel=0.1)


def test_statistics_white_variance():
    noise = White(S0=2.0, W_z=1.5, cutoff=5.0)
    report = validate_statistics(noise, "z", n_samples=4000, n_traj=48)
    assert report.passed
    assert report.expected[0] == pytest.approx(1.5 * 2.0 * 5.0 / math.pi, rel=1e-6)


def test_statistics_detect_misscaled_amplitudes(monkeypatch):
    """Doubling the synthesized power must trip the 3 sigma gate."""
    real = oracle._mode_table

    def skewed(noise, axis, dt, n_steps, cutoff):
        omegas, amps, length = real(noise, axis, dt, n_steps, cutoff)
        return omegas, amps * math.sqrt(2.0), length

    monkeypatch.setattr(oracle, "_mode_table", skewed)
    noise = Lorentzian(W_z=0.7, Gamma=2.0 * math.pi, gamma=1.0, cutoff=30.0)
    report = validate_statistics(noise, "z", n_samples=6000, n_traj=48)
    assert not report.passed
    assert report.max_deviation_sigma > 3.0


def test_statistics_zero_axis_rejected():
    noise = Lorentzian(W_z=1.0, Gamma=math.pi, gamma=1.0, cutoff=10.0)
    with pytest.raises(ParameterError):
        validate_statistics(noise, "x")


# ---------------------------------------------------------------------------
# propagation


def _config(geom, noise, dt, t_max, **kw):
    kw.setdefault("n_traj", 100)
    return OracleConfig(geom=geom, noise=noise, dt=dt, t_max=t_max, **kw)


def test_config_validation():
    geom = _free_geom()
    noise = White(S0=1.0, W_z=1.0, cutoff=5.0)
    with pytest.raises(ParameterError):
        _config(geom, noise, dt=-0.01, t_max=10.0)
    with pytest.raises(ParameterError):
        _config(geom, noise, dt=0.01, t_max=0.05)
    with pytest.raises(ParameterError):
        _config(geom, noise, dt=0.01, t_max=10.0, n_traj=50)
    with pytest.raises(ParameterError):
        _config(geom, noise, dt=0.01, t_max=10.0, initial_state="y+")
    with pytest.raises(ParameterError):
        _config(geom, noise, dt=0.01, t_max=10.0, seed=-1)
    # dt too coarse for the synthesis cutoff
    with pytest.raises(ParameterError):
        _config(geom, noise, dt=0.05, t_max=10.0)


def test_zero_noise_resonant_rabi():
    geom = DriveGeometry(omega_Z=1.0, Omega=0.2, nu=1.0)
    cfg = _config(geom, White(S0=1.0), dt=0.05, t_max=40.0)
    sx, sy, sz = propagate(cfg, 0.0, 0.0, 0.0)
    t = np.arange(cfg.n_steps + 1) * cfg.dt
    np.testing.assert_allclose(sz, np.cos(0.2 * t), atol=1e-10)


def test_zero_noise_detuned_rabi():
    geom = DriveGeometry(omega_Z=1.0, Omega=0.3, nu=1.4)
    cfg = _config(geom, White(S0=1.0), dt=0.05, t_max=40.0)
    _, _, sz = propagate(cfg, 0.0, 0.0, 0.0)
    t = np.arange(cfg.n_steps + 1) * cfg.dt
    s2 = geom.sin_theta**2
    wp = geom.omega_prime
    np.testing.assert_allclose(
        sz, 1.0 - 2.0 * s2 * np.sin(0.5 * wp * t) ** 2, atol=1e-10
    )


def test_zero_noise_free_precession():
    cfg = _config(_free_geom(), White(S0=1.0), dt=0.05, t_max=30.0,
                  initial_state="x+")
    sx, sy, sz = propagate(cfg, 0.0, 0.0, 0.0)
    t = np.arange(cfg.n_steps + 1) * cfg.dt
    np.testing.assert_allclose(sx, np.cos(t), atol=1e-10)
    np.testing.assert_allclose(sy, np.sin(t), atol=1e-10)
    np.testing.assert_allclose(sz, 0.0, atol=1e-12)


def test_propagate_norm_preserved_under_noise():
    geom = DriveGeometry(omega_Z=1.0, Omega=0.4, nu=0.9, phi=0.3)
    noise = Lorentzian(W_x=0.5, W_z=0.5, Gamma=math.pi, gamma=1.0, cutoff=10.0)
    cfg = _config(geom, noise, dt=0.01, t_max=20.0)
    nx = generate_noise_trajectory(noise, "x", cfg.dt, cfg.t_max, 0, offset=0.005)
    nz = generate_noise_trajectory(noise, "z", cfg.dt, cfg.t_max, 0, offset=0.005)
    sx, sy, sz = propagate(cfg, nx, 0.0, nz)
    np.testing.assert_allclose(sx**2 + sy**2 + sz**2, 1.0, atol=1e-12)


def test_propagate_batched_shapes():
    geom = DriveGeometry(omega_Z=1.0, Omega=0.2, nu=1.0)
    cfg = _config(geom, White(S0=1.0), dt=0.05, t_max=5.0)
    n = cfg.n_steps
    nz = np.zeros((3, n))
    nz[1] = 0.05
    sx, sy, sz = propagate(cfg, 0.0, 0.0, nz)
    assert sz.shape == (3, n + 1)
    # identical rows for identical noise
    np.testing.assert_array_equal(sz[0], sz[2])
    assert not np.array_equal(sz[0], sz[1])
    with pytest.raises(ParameterError):
        propagate(cfg, np.zeros(n - 1), 0.0, 0.0)


def test_propagate_second_order_convergence():
    """Halving dt against a deterministic time-dependent perturbation must
    shrink the error by about 4 (exactly 2nd order would be 4.0; the frame
    handles the static part exactly, so only the noise term contributes)."""
    geom = DriveGeometry(omega_Z=1.0, Omega=0.3, nu=1.1, phi=0.2)
    noise = White(S0=1.0)

    def run(dt):
        cfg = OracleConfig(geom=geom, noise=noise, dt=dt, t_max=10.0,
                           n_traj=100)
        t_mid = (np.arange(cfg.n_steps) + 0.5) * dt
        n_x = 0.15 * np.cos(0.9 * t_mid + 1.0)
        n_y = 0.10 * np.cos(1.7 * t_mid)
        n_z = 0.20 * np.cos(1.3 * t_mid + 0.4)
        sx, sy, sz = propagate(cfg, n_x, n_y, n_z)
        return np.array([sx[-1], sy[-1], sz[-1]])

    ref = run(0.0025)
    err1 = np.max(np.abs(run(0.02) - ref))
    err2 = np.max(np.abs(run(0.01) - ref))
    assert err1 / err2 > 3.5
    assert err1 < 1e-3


# ---------------------------------------------------------------------------
# ensemble estimates


def test_estimate_rates_free_dephasing():
    # 1/T2 = 2 W_z S(0) = Gamma/pi for this line; here 0.05
    noise = Lorentzian(W_z=1.0, Gamma=0.05 * math.pi, gamma=1.0, cutoff=10.0)
    cfg = OracleConfig(geom=_free_geom(), noise=noise, dt=0.01, t_max=100.0,
                       n_traj=400, seed=11, initial_state="x+")
    est = estimate_rates(cfg)
    assert est.fit_kind == "crossing"
    assert est.stderr > 0
    assert est.rate == pytest.approx(0.05, rel=0.15)
    assert abs(est.rate - 0.05) < 4.0 * est.stderr


def test_estimate_rates_deterministic():
    noise = Lorentzian(W_z=1.0, Gamma=0.05 * math.pi, gamma=1.0, cutoff=10.0)
    cfg = OracleConfig(geom=_free_geom(), noise=noise, dt=0.01, t_max=80.0,
                       n_traj=120, seed=5, initial_state="x+")
    a = estimate_rates(cfg)
    b = estimate_rates(cfg)
    assert a.rate == b.rate
    assert a.stderr == b.stderr


def test_estimate_rates_method_validation():
    noise = Lorentzian(W_z=1.0, Gamma=0.05 * math.pi, gamma=1.0, cutoff=10.0)
    cfg = OracleConfig(geom=_free_geom(), noise=noise, dt=0.01, t_max=80.0,
                       n_traj=120, initial_state="x+")
    with pytest.raises(ParameterError):
        estimate_rates(cfg, method="spline")


def test_estimate_rates_inconclusive_when_too_slow():
    noise = Lorentzian(W_z=1.0, Gamma=1e-4 * math.pi, gamma=1.0, cutoff=10.0)
    cfg = OracleConfig(geom=_free_geom(), noise=noise, dt=0.01, t_max=100.0,
                       n_traj=100, initial_state="x+")
    with pytest.raises(InconclusiveError) as info:
        estimate_rates(cfg)
    assert "t_max" in info.value.diagnostics


def test_weak_noise_warning_for_driven_runs():
    geom = DriveGeometry(omega_Z=1.0, Omega=0.05, nu=1.0)
    noise = White(S0=1.0, W_x=1.0, cutoff=2.0)
    cfg = OracleConfig(geom=geom, noise=noise, dt=0.05, t_max=0.5, n_traj=100,
                      initial_state="x+")
    with pytest.warns(RuntimeWarning, match="rate theory"):
        with pytest.raises(InconclusiveError):
            estimate_rates(cfg)


def test_ensemble_curves_free_precession():
    cfg = OracleConfig(geom=_free_geom(), noise=White(S0=1.0), dt=0.05,
                       t_max=10.0, n_traj=100, initial_state="x+")
    curves = ensemble_curves(cfg, stride=4)
    assert curves.t.shape == curves.sx.shape == curves.sx_err.shape
    assert curves.t[1] - curves.t[0] == pytest.approx(0.2)
    np.testing.assert_allclose(curves.sx, np.cos(curves.t), atol=1e-10)
    # identical trajectories: stderr is pure cancellation residue
    np.testing.assert_allclose(curves.sx_err, 0.0, atol=1e-7)
    with pytest.raises(ParameterError):
        ensemble_curves(cfg, stride=0)


def test_ensemble_curves_decay_tracks_estimate():
    noise = Lorentzian(W_z=1.0, Gamma=0.05 * math.pi, gamma=1.0, cutoff=10.0)
    cfg = OracleConfig(geom=_free_geom(), noise=noise, dt=0.01, t_max=60.0,
                       n_traj=200, seed=2, initial_state="x+")
    curves = ensemble_curves(cfg, stride=50)
    amp = np.hypot(curves.sx, curves.sy)
    # the transverse magnitude should have decayed visibly but not fully
    assert amp[0] == pytest.approx(1.0, abs=1e-10)
    assert 0.02 < amp[-1] < 0.5
    assert np.all(curves.sx_err[1:] > 0)
