"""Monte-Carlo oracle for the driven-qubit decoherence rates.

Everything else in this package is rate theory; this module is the referee.
It integrates the full lab-frame Hamiltonian

    H(t) = omega_Z/2 sigma_z + (Omega/2 e^{-i nu t - i phi} sigma_+ + h.c.)
           + n_x sigma_x + n_y sigma_y + n_z sigma_z

over ensembles of synthesized colored-noise trajectories n_j(t) and extracts
decay rates from the ensemble-averaged Bloch components, with bootstrap error
bars. No rotating-frame or weak-coupling approximations are made, so
agreement here validates the analytic modules end to end.

Noise synthesis is a harmonic superposition: n(t) = sum_k a_k cos(w_k t +
theta_k) on a deterministic frequency grid with per-trajectory random phases.
Matching <n(t1)n(t2)> = W S(t2-t1) under the convention S(t) =
(1/2pi) int S(w) e^{-iwt} dw fixes a_k = sqrt(2 W S(w_k) dw / pi). Phases are
seeded per (seed, axis, trajectory), so results are reproducible and
independent of any execution-order choices.

Integration happens in the frame co-rotating with the drive at nu, where the
deterministic part of the Hamiltonian is constant: each step applies the
exact matrix exponential of the frame Hamiltonian frozen at the step
midpoint. Noise-free evolution is therefore exact to rounding at any dt, the
state norm is preserved to rounding always, and the noise-induced error
converges at second order in dt. Reported Bloch components are rotated back
to the lab frame.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.fft import next_fast_len

from .errors import InconclusiveError, ParameterError
from .frames import DriveGeometry, weak_noise_ratio
from .spectra import NoiseSpectrum, autocorrelation, default_cutoff

__all__ = [
    "OracleConfig",
    "DecayEstimate",
    "EnsembleCurves",
    "ValidationReport",
    "generate_noise_trajectory",
    "propagate",
    "ensemble_curves",
    "estimate_rates",
    "validate_statistics",
]

_INV_E = math.exp(-1.0)
_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}
_FFT_LANES = 8          # lanes per ifft batch (bounds transient memory)
_CHUNK_LANES = 240      # trajectories propagated together


@dataclass(frozen=True)
class OracleConfig:
    """Monte-Carlo run description.

    dt must resolve every frequency in play: dt * max(omega_Z, nu, cutoff)
    <= 0.1 or the config is rejected. t_max should cover at least ~5 of the
    expected decay time; too short a window surfaces later as
    InconclusiveError. initial_state is "z+" (relaxation-type runs, tracks
    sigma_z) or "x+" (dephasing-type runs, tracks sigma_x).
    """

    geom: DriveGeometry
    noise: NoiseSpectrum
    dt: float
    t_max: float
    n_traj: int = 2000
    seed: int = 0
    initial_state: str = "z+"

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ParameterError("dt must be positive")
        if not (math.isfinite(self.t_max) and self.t_max >= 10 * self.dt):
            raise ParameterError("t_max must cover at least 10 steps")
        if self.n_traj < 100:
            raise ParameterError("n_traj must be >= 100")
        if self.initial_state not in ("z+", "x+"):
            raise ParameterError("initial_state must be 'z+' or 'x+'")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ParameterError("seed must be a nonnegative integer")
        fmax = max(self.geom.omega_Z, self.geom.nu, self._cutoff() or 0.0)
        if self.dt * fmax > 0.1 * (1 + 1e-9):
            raise ParameterError(
                f"dt = {self.dt:.6g} cannot resolve the fastest scale "
                f"{fmax:.6g}: need dt * max(omega_Z, nu, cutoff) <= 0.1"
            )

    def _cutoff(self) -> Optional[float]:
        n = self.noise
        if n.W_x == 0 and n.W_y == 0 and n.W_z == 0:
            return None
        return default_cutoff(n)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass(frozen=True)
class DecayEstimate:
    """A fitted decay rate with its bootstrap standard error.

    fit_kind is "crossing" (1/e crossing of the envelope, interpolated
    between demodulation bins) or "expfit" (log-linear fit of the envelope).
    """

    rate: float
    stderr: float
    fit_kind: str

    def __post_init__(self):
        if not math.isfinite(self.rate):
            raise ParameterError("rate must be finite")
        if not (math.isfinite(self.stderr) and self.stderr >= 0):
            raise ParameterError("stderr must be >= 0")


@dataclass(frozen=True)
class EnsembleCurves:
    """Ensemble-averaged Bloch components with standard errors of the mean."""

    t: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    sx_err: np.ndarray
    sy_err: np.ndarray
    sz_err: np.ndarray


@dataclass(frozen=True)
class ValidationReport:
    """Sample-vs-analytic autocorrelation comparison for the noise source."""

    passed: bool
    lags: np.ndarray
    sample: np.ndarray
    expected: np.ndarray
    sigma: np.ndarray
    max_deviation_sigma: float


# ---------------------------------------------------------------------------
# noise synthesis


def _mode_table(noise, axis, dt, n_steps, cutoff):
    """Frequency grid and amplitudes for the harmonic superposition."""
    w = noise.strength(axis)
    if w == 0.0:
        return None
    wc = cutoff if cutoff is not None else default_cutoff(noise)
    length = next_fast_len(10 * n_steps)
    dw = 2.0 * math.pi / (length * dt)
    n_modes = int(wc / dw + 0.5)
    if n_modes < 8:
        raise ParameterError(
            "fewer than 8 spectral modes below the cutoff; increase t_max "
            "or the cutoff so the spectrum is resolvable"
        )
    omegas = (np.arange(n_modes) + 0.5) * dw
    amps = np.sqrt(2.0 * w * noise.density(omegas) * dw / math.pi)
    return omegas, amps, length


def _noise_batch(noise, axis, dt, n_steps, seed, traj_indices, offset, cutoff):
    """Trajectories of n_axis sampled at offset + k*dt, shape (lanes, n_steps).

    The sum over modes is evaluated as a zero-padded inverse FFT: with
    w_k = (k + 1/2) dw and dw = 2 pi / (L dt), the sample at step j is
    Re[ e^{i pi j / L} * L * ifft(c)_j ] where c_k = a_k e^{i(theta_k +
    w_k * offset)}.
    """
    table = _mode_table(noise, axis, dt, n_steps, cutoff)
    lanes = len(traj_indices)
    if table is None:
        return np.zeros((lanes, n_steps))
    omegas, amps, length = table
    ax = _AXIS_INDEX[axis]
    base = amps * np.exp(1j * omegas * offset)
    j_phase = np.exp(1j * (math.pi / length) * np.arange(n_steps))

    out = np.empty((lanes, n_steps))
    for start in range(0, lanes, _FFT_LANES):
        rows = traj_indices[start:start + _FFT_LANES]
        c = np.zeros((len(rows), length), dtype=complex)
        for i, idx in enumerate(rows):
            rng = np.random.default_rng([seed, ax, int(idx)])
            theta = rng.uniform(0.0, 2.0 * math.pi, omegas.size)
            c[i, :omegas.size] = base * np.exp(1j * theta)
        spectrum_sum = np.fft.ifft(c, axis=1)[:, :n_steps] * length
        out[start:start + len(rows)] = (spectrum_sum * j_phase).real
    return out


def generate_noise_trajectory(noise, axis, dt, t_max, seed, *,
                              traj_index=0, offset=0.0, cutoff=None):
    """One sampled noise trajectory n_axis(offset + k*dt), k = 0..N-1.

    A stationary Gaussian process whose autocorrelation converges to
    W_axis * S(tau) (compare spectra.autocorrelation under the same cutoff).
    Zero coupling strength returns zeros. Scale-free spectra need a cutoff,
    either on the model or passed here.
    """
    if axis not in _AXIS_INDEX:
        raise ParameterError("axis must be 'x', 'y' or 'z'")
    n_steps = int(round(t_max / dt))
    if n_steps < 2:
        raise ParameterError("t_max must cover at least 2 samples")
    return _noise_batch(
        noise, axis, dt, n_steps, seed, np.asarray([traj_index]), offset, cutoff
    )[0]


# ---------------------------------------------------------------------------
# propagation


def _initial_state(kind, lanes):
    psi0 = np.empty(lanes, dtype=complex)
    psi1 = np.empty(lanes, dtype=complex)
    if kind == "z+":
        psi0[:] = 1.0
        psi1[:] = 0.0
    else:
        psi0[:] = math.sqrt(0.5)
        psi1[:] = math.sqrt(0.5)
    return psi0, psi1


def _frame_tables(geom, dt, n_steps):
    """Constants and phase tables for propagation in the nu-rotating frame.

    Returns (drive, hz0, mid_phase, rec_phase): the static off-diagonal
    drive element (Omega/2) e^{-i phi}, the static diagonal -delta/2,
    e^{i nu t} at the step midpoints (multiplies transverse noise), and
    e^{i nu t} at the sample times (rotates coherences back to the lab).
    """
    drive = 0.5 * geom.Omega * np.exp(-1j * geom.phi)
    hz0 = -0.5 * geom.delta
    t_mid = (np.arange(n_steps) + 0.5) * dt
    mid_phase = np.exp(1j * geom.nu * t_mid)
    rec_phase = np.exp(1j * geom.nu * dt * np.arange(n_steps + 1))
    return drive, hz0, mid_phase, rec_phase


def _step(psi0, psi1, hz, h01, dt):
    """Advance by exp(-i H dt) for H = [[hz, h01], [conj(h01), -hz]].

    Exact for the frozen H: U = cos(h dt) - i sin(h dt) (H/h), applied
    without forming matrices. The sin(h dt)/h factor is safe as h -> 0
    because it only ever multiplies components bounded by h.
    """
    habs2 = h01.real * h01.real + h01.imag * h01.imag + hz * hz
    h = np.sqrt(habs2)
    th = h * dt
    k = np.sin(th) / np.maximum(h, 1e-30)
    u00 = np.cos(th) - 1j * (k * hz)
    kh = k * h01
    new0 = u00 * psi0 - 1j * (kh * psi1)
    new1 = -1j * (np.conj(kh) * psi0) + np.conj(u00) * psi1
    return new0, new1


def propagate(config: OracleConfig, n_x, n_y, n_z):
    """Deterministic Bloch-component time series for given noise samples.

    The noise arrays hold midpoint samples n_j(t_k + dt/2) with shape
    (n_steps,) or (lanes, n_steps); scalars (e.g. 0.0) broadcast. Returns
    (sx, sy, sz) sampled at t_k = k*dt for k = 0..n_steps, leading axes
    matching the noise arrays. State norms are preserved to rounding, so
    sx^2 + sy^2 + sz^2 stays at 1 to the same accuracy.
    """
    n = config.n_steps
    arrs = [np.asarray(a, dtype=float) for a in (n_x, n_y, n_z)]
    lead = ()
    for a in arrs:
        if a.ndim > 0:
            if a.shape[-1] != n:
                raise ParameterError(
                    f"noise arrays must have {n} samples, got {a.shape[-1]}"
                )
            lead = np.broadcast_shapes(lead, a.shape[:-1])
    lanes = int(np.prod(lead)) if lead else 1
    cols = [
        a.reshape(-1, n) if a.ndim > 0 else None  # None: constant scalar
        for a in arrs
    ]
    scalars = [float(a) if a.ndim == 0 else 0.0 for a in arrs]

    psi0, psi1 = _initial_state(config.initial_state, lanes)
    drive, hz0, mid_phase, rec_phase = _frame_tables(config.geom, config.dt, n)

    sx = np.empty((lanes, n + 1))
    sy = np.empty((lanes, n + 1))
    sz = np.empty((lanes, n + 1))

    def record(k):
        z = np.conj(psi0) * psi1 * rec_phase[k]
        sx[:, k] = 2.0 * z.real
        sy[:, k] = 2.0 * z.imag
        sz[:, k] = (psi0.real**2 + psi0.imag**2) - (psi1.real**2 + psi1.imag**2)

    record(0)
    for k in range(n):
        nx_k = cols[0][:, k] if cols[0] is not None else scalars[0]
        ny_k = cols[1][:, k] if cols[1] is not None else scalars[1]
        nz_k = cols[2][:, k] if cols[2] is not None else scalars[2]
        h01 = np.asarray((nx_k - 1j * ny_k) * mid_phase[k] + drive,
                         dtype=complex)
        hz = hz0 + nz_k
        psi0, psi1 = _step(psi0, psi1, hz, h01, config.dt)
        record(k + 1)

    shape = lead + (n + 1,)
    return sx.reshape(shape), sy.reshape(shape), sz.reshape(shape)


# ---------------------------------------------------------------------------
# ensemble machinery


def _batch_layout(n_traj, n_batches=50):
    """Contiguous trajectory batches, as (start, stop) pairs."""
    n_batches = min(n_batches, n_traj)
    base, rem = divmod(n_traj, n_batches)
    bounds = [0]
    for b in range(n_batches):
        bounds.append(bounds[-1] + base + (1 if b < rem else 0))
    return bounds


def _chunk_batches(bounds, max_lanes=_CHUNK_LANES):
    """Group whole batches into propagation chunks of <= max_lanes lanes."""
    chunks = []
    b = 0
    while b < len(bounds) - 1:
        e = b + 1
        while e < len(bounds) - 1 and bounds[e + 1] - bounds[b] <= max_lanes:
            e += 1
        chunks.append((b, e))
        b = e
    return chunks


def _demod_frequency(config):
    g = config.geom
    if config.initial_state == "x+":
        return g.nu if g.Omega > 0 else g.omega_Z
    return g.omega_prime if g.Omega > 0 else None


class _DemodAccumulator:
    """Per-batch, per-bin sums of g, g cos(wt), g sin(wt).

    Bin width is one demodulation period, so the DC channel and the
    quadrature pair separate cleanly; for undriven relaxation runs there is
    no carrier and plain time bins are used.
    """

    def __init__(self, config, sizes):
        self.sizes = np.asarray(sizes, dtype=float)
        n_batches = self.sizes.size
        self.w_dem = _demod_frequency(config)
        t_max, dt = config.t_max, config.dt
        if self.w_dem is None:
            self.n_bins = 200
            self.period = t_max / self.n_bins
        else:
            self.period = 2.0 * math.pi / self.w_dem
            self.n_bins = int(t_max / self.period)
            if self.n_bins < 8:
                raise InconclusiveError(
                    "fewer than 8 demodulation bins fit in t_max; "
                    "increase t_max",
                    diagnostics={"t_max": t_max, "bin_width": self.period},
                )
        t = np.arange(config.n_steps + 1) * dt
        self.bin_of = np.minimum((t / self.period).astype(int), self.n_bins)
        self.valid = self.bin_of < self.n_bins
        self.counts = np.bincount(self.bin_of[self.valid],
                                  minlength=self.n_bins)[:self.n_bins]
        if self.w_dem is not None:
            self.cos_t = np.cos(self.w_dem * t)
            self.sin_t = np.sin(self.w_dem * t)
        self.S = np.zeros((n_batches, self.n_bins))
        self.X = np.zeros((n_batches, self.n_bins))
        self.Y = np.zeros((n_batches, self.n_bins))

    def add(self, k, g, batch_rows, offsets):
        if not self.valid[k]:
            return
        b = self.bin_of[k]
        gb = np.add.reduceat(g, offsets)
        self.S[batch_rows, b] += gb
        if self.w_dem is not None:
            self.X[batch_rows, b] += self.cos_t[k] * gb
            self.Y[batch_rows, b] += self.sin_t[k] * gb

    def envelope(self, multiplicity, initial_state):
        """Envelope curve for a combination of batches.

        multiplicity holds how many times each batch enters (all ones for
        the plain estimate; bootstrap resamples pass their draw counts).
        """
        norm = float(multiplicity @ self.sizes) * self.counts
        s = (multiplicity @ self.S) / norm
        if self.w_dem is None:
            return s
        amp = 2.0 * np.hypot((multiplicity @ self.X) / norm,
                             (multiplicity @ self.Y) / norm)
        if initial_state == "x+":
            return amp
        return s + amp

    def bin_centers(self):
        return (np.arange(self.n_bins) + 0.5) * self.period


def _run_demod(config):
    """Propagate the full ensemble, accumulating demodulated batch sums."""
    bounds = _batch_layout(config.n_traj)
    sizes = np.diff(bounds).astype(float)
    acc = _DemodAccumulator(config, sizes)

    geom, dt, n = config.geom, config.dt, config.n_steps
    drive, hz0, mid_phase, rec_phase = _frame_tables(geom, dt, n)
    noise = config.noise
    have = {ax: noise.strength(ax) > 0 for ax in ("x", "y", "z")}
    cutoff = config._cutoff()
    want_sz = config.initial_state == "z+"

    for b0, b1 in _chunk_batches(bounds):
        lanes = bounds[b1] - bounds[b0]
        idx = np.arange(bounds[b0], bounds[b1])
        rows = np.arange(b0, b1)
        offsets = np.asarray([bounds[b] - bounds[b0] for b in range(b0, b1)])

        tracks = {}
        for ax in ("x", "y", "z"):
            if have[ax]:
                tracks[ax] = _noise_batch(
                    noise, ax, dt, n, config.seed, idx, 0.5 * dt, cutoff
                )
        psi0, psi1 = _initial_state(config.initial_state, lanes)

        for k in range(n + 1):
            if want_sz:
                g = (psi0.real**2 + psi0.imag**2) - (psi1.real**2 + psi1.imag**2)
            else:
                g = 2.0 * np.real(np.conj(psi0) * psi1 * rec_phase[k])
            acc.add(k, g, rows, offsets)
            if k == n:
                break
            perp = tracks["x"][:, k] if "x" in tracks else 0.0
            if "y" in tracks:
                perp = perp - 1j * tracks["y"][:, k]
            h01 = np.asarray(perp * mid_phase[k] + drive, dtype=complex)
            hz = hz0 + tracks["z"][:, k] if "z" in tracks else hz0
            psi0, psi1 = _step(psi0, psi1, hz, h01, dt)

    return acc


def _crossing_rate(t, env):
    """Rate 1/t* from the first 1/e crossing of the envelope, or None.

    The crossing time comes from a weighted log-linear fit over the
    contiguous bins around the crossing whose envelope lies in (0.15, 0.75),
    which keeps the 1/e-time definition but averages the per-bin noise; a
    bare two-point interpolation is both noisier and, being tied to the
    "first bin below" selection, poorly tracked by bootstrap resampling.
    Decays too fast to populate that window fall back to interpolation.
    """
    below = np.flatnonzero(env < _INV_E)
    if below.size == 0:
        return None
    i = below[0]
    if i == 0:
        return None
    ok = (env > 0.15) & (env < 0.75)
    a = i
    while a > 0 and ok[a - 1]:
        a -= 1
    b = i
    while b < env.size and ok[b]:
        b += 1
    window = np.arange(a, b)
    if window.size >= 4:
        slope, intercept = np.polyfit(
            t[window], np.log(env[window]), 1, w=env[window]
        )
        if slope < 0:
            t_star = (-1.0 - intercept) / slope
            pad = t[1] - t[0]
            if t[window[0]] - pad <= t_star <= t[window[-1]] + pad:
                return 1.0 / t_star
    t_star = t[i - 1] + (t[i] - t[i - 1]) * (env[i - 1] - _INV_E) / (
        env[i - 1] - env[i]
    )
    return 1.0 / t_star


def _expfit_rate(t, env):
    """Log-linear least-squares slope over the resolved part of the decay.

    Weights of env (= 1/sigma of the log values for constant absolute bin
    noise) keep the noisy small-envelope tail from dominating the fit.
    """
    mask = env > 0.05
    if mask.sum() < 4:
        return None
    slope = np.polyfit(t[mask], np.log(env[mask]), 1, w=env[mask])[0]
    if slope >= 0:
        return None
    return -slope


def estimate_rates(config: OracleConfig, method: str = "crossing") -> DecayEstimate:
    """Decay rate of the ensemble envelope, with bootstrap standard error.

    For "z+" runs the envelope is the DC part of <sigma_z> plus the
    demodulated amplitude at the dressed frequency (the DC part alone when
    undriven), matching the analytic sigma_z envelope with sigma_inf = 0; a
    "z+" estimate is T1-like. For "x+" runs it is the demodulated amplitude
    of <sigma_x> at the drive (or Zeeman) frequency; T2-like.

    method "crossing" locates the 1/e time, "expfit" fits an exponential.
    Bootstrap resampling happens over ~50 trajectory batches with a rng
    derived from config.seed, so results are fully deterministic.

    Raises InconclusiveError (with diagnostics) when no decay is resolvable
    within t_max; aim for t_max of at least ~5 expected decay times.
    """
    if method not in ("crossing", "expfit"):
        raise ParameterError("method must be 'crossing' or 'expfit'")
    cutoff = config._cutoff()
    if config.geom.Omega > 0 and cutoff is not None:
        ratio = weak_noise_ratio(config.geom, config.noise, cutoff=cutoff)
        if ratio > 0.1:
            warnings.warn(
                f"noise rms / Omega = {ratio:.3g} exceeds 0.1; rate theory "
                "comparisons may be off beyond statistical error",
                RuntimeWarning,
                stacklevel=2,
            )

    acc = _run_demod(config)
    t = acc.bin_centers()
    fit = _crossing_rate if method == "crossing" else _expfit_rate

    n_batches = acc.sizes.size
    env = acc.envelope(np.ones(n_batches), config.initial_state)
    rate = fit(t, env)
    if rate is None:
        raise InconclusiveError(
            "no decay resolved within t_max",
            diagnostics={
                "t_max": config.t_max,
                "envelope_min": float(env.min()),
                "envelope_first_bin": float(env[0]),
                "n_bins": acc.n_bins,
                "hint": "t_max should cover ~5 expected decay times",
            },
        )

    rng = np.random.default_rng([config.seed, 3, 0])
    boot = []
    for _ in range(200):
        counts = np.bincount(
            rng.integers(0, n_batches, n_batches), minlength=n_batches
        ).astype(float)
        r = fit(t, acc.envelope(counts, config.initial_state))
        if r is not None:
            boot.append(r)
    if len(boot) < 160:
        raise InconclusiveError(
            "bootstrap resamples frequently failed to resolve a decay",
            diagnostics={"resolved": len(boot), "total": 200},
        )
    return DecayEstimate(rate=rate, stderr=float(np.std(boot)), fit_kind=method)


def ensemble_curves(config: OracleConfig, stride: int = 1) -> EnsembleCurves:
    """Ensemble means of all three Bloch components on the full time grid.

    Heavier output than estimate_rates needs, intended for inspection and
    CSV export; stride subsamples the time grid. Standard errors are over
    trajectories.
    """
    if stride < 1:
        raise ParameterError("stride must be >= 1")
    n = config.n_steps
    keep = np.arange(0, n + 1, stride)
    sums = np.zeros((3, keep.size))
    sqs = np.zeros((3, keep.size))

    geom, dt = config.geom, config.dt
    drive, hz0, mid_phase, rec_phase = _frame_tables(geom, dt, n)
    noise = config.noise
    have = {ax: noise.strength(ax) > 0 for ax in ("x", "y", "z")}
    cutoff = config._cutoff()
    keep_mask = np.zeros(n + 1, dtype=bool)
    keep_mask[keep] = True
    keep_pos = np.cumsum(keep_mask) - 1

    for start in range(0, config.n_traj, _CHUNK_LANES):
        idx = np.arange(start, min(start + _CHUNK_LANES, config.n_traj))
        tracks = {
            ax: _noise_batch(noise, ax, dt, n, config.seed, idx, 0.5 * dt, cutoff)
            for ax in ("x", "y", "z")
            if have[ax]
        }
        psi0, psi1 = _initial_state(config.initial_state, idx.size)
        for k in range(n + 1):
            if keep_mask[k]:
                z = np.conj(psi0) * psi1 * rec_phase[k]
                vals = (
                    2.0 * z.real,
                    2.0 * z.imag,
                    (psi0.real**2 + psi0.imag**2)
                    - (psi1.real**2 + psi1.imag**2),
                )
                p = keep_pos[k]
                for row, v in enumerate(vals):
                    sums[row, p] += v.sum()
                    sqs[row, p] += (v * v).sum()
            if k == n:
                break
            perp = tracks["x"][:, k] if "x" in tracks else 0.0
            if "y" in tracks:
                perp = perp - 1j * tracks["y"][:, k]
            h01 = np.asarray(perp * mid_phase[k] + drive, dtype=complex)
            hz = hz0 + tracks["z"][:, k] if "z" in tracks else hz0
            psi0, psi1 = _step(psi0, psi1, hz, h01, dt)

    m = config.n_traj
    means = sums / m
    var = np.maximum(sqs / m - means**2, 0.0)
    errs = np.sqrt(var / m)
    return EnsembleCurves(
        t=keep * dt,
        sx=means[0], sy=means[1], sz=means[2],
        sx_err=errs[0], sy_err=errs[1], sz_err=errs[2],
    )


# ---------------------------------------------------------------------------
# statistics self-test


def validate_statistics(noise: NoiseSpectrum, axis: str, n_samples: int = 10_000,
                        seed: int = 0, *, n_traj: int = 64,
                        n_lags: int = 20, cutoff: float = None) -> ValidationReport:
    """Check synthesized noise against the analytic autocorrelation.

    Generates n_traj trajectories of n_samples points each, estimates the
    autocorrelation at n_lags lags spanning a couple of correlation times,
    and compares with W * spectra.autocorrelation under the same cutoff.
    Passes when every lag agrees within 3 bootstrap standard deviations.
    """
    if axis not in _AXIS_INDEX:
        raise ParameterError("axis must be 'x', 'y' or 'z'")
    w = noise.strength(axis)
    if w == 0:
        raise ParameterError(f"noise strength along {axis} is zero")
    wc = cutoff if cutoff is not None else default_cutoff(noise)
    dt = 0.1 / wc
    char = noise.characteristic_frequency() or (wc / 10.0)
    span = min(n_samples // 2, max(n_lags, int(round(2.0 / (char * dt)))))
    lag_steps = np.unique(np.round(np.linspace(0, span, n_lags)).astype(int))

    per_traj = np.empty((n_traj, lag_steps.size))
    for i in range(n_traj):
        series = generate_noise_trajectory(
            noise, axis, dt, n_samples * dt, seed, traj_index=i, cutoff=wc
        )
        for j, ell in enumerate(lag_steps):
            head = series[: n_samples - ell]
            tail = series[ell:] if ell else head
            per_traj[i, j] = np.mean(head * tail)

    sample = per_traj.mean(axis=0)
    rng = np.random.default_rng([seed, 7, 1])
    picks = rng.integers(0, n_traj, (200, n_traj))
    boot_means = per_traj[picks].mean(axis=1)
    sigma = np.maximum(boot_means.std(axis=0), 1e-300)

    lags = lag_steps * dt
    expected = w * autocorrelation(noise, lags, cutoff=wc)
    dev = np.abs(sample - expected) / sigma
    return ValidationReport(
        passed=bool(np.all(dev <= 3.0)),
        lags=lags,
        sample=sample,
        expected=np.asarray(expected),
        sigma=sigma,
        max_deviation_sigma=float(dev.max()),
    )
