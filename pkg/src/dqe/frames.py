"""Drive geometry and rotating-frame decoherence rates.

The lab-frame model is a qubit of splitting omega_Z driven by a single
circular component of strength Omega at frequency nu and phase phi, with
classical Gaussian noise n_x, n_y, n_z coupled to the three spin axes. In the
frame rotating at nu the static part is tilted by an angle theta with

    tan(theta) = -Omega / Delta,      Delta = nu - omega_Z,

on the branch theta in (0, pi) for Omega > 0, and the dressed splitting is
omega' = sqrt(Omega^2 + Delta^2). Relaxation in that frame samples the noise
at omega' (transverse noise enters through the drive-shifted sidebands
nu +/- omega'), while pure dephasing samples it at nu and at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import ParameterError
from .spectra import NoiseSpectrum, autocorrelation, sideband_spectrum

__all__ = [
    "DriveGeometry",
    "RotatingRates",
    "effective_noise_spectra",
    "rotating_frame_rates",
    "weak_noise_ratio",
]


@dataclass(frozen=True)
class DriveGeometry:
    """Drive parameters and the derived rotating-frame geometry.

    Parameters
    ----------
    omega_Z : float
        Qubit splitting, > 0 (angular frequency).
    Omega : float
        Drive strength, >= 0.
    nu : float
        Drive frequency, > 0.
    phi : float
        Drive phase.

    Omega = 0 together with nu = omega_Z leaves the rotating-frame axis
    undefined and is rejected.
    """

    omega_Z: float
    Omega: float
    nu: float
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.omega_Z) and self.omega_Z > 0):
            raise ParameterError("omega_Z must be positive")
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise ParameterError("nu must be positive")
        if not (math.isfinite(self.Omega) and self.Omega >= 0):
            raise ParameterError("Omega must be >= 0")
        if not math.isfinite(self.phi):
            raise ParameterError("phi must be finite")
        if self.Omega == 0.0 and self.delta == 0.0:
            raise ParameterError(
                "Omega = 0 with nu = omega_Z is degenerate: the rotating-frame "
                "quantization axis is undefined"
            )

    @property
    def delta(self) -> float:
        """Detuning nu - omega_Z."""
        return self.nu - self.omega_Z

    @property
    def omega_prime(self) -> float:
        """Rotating-frame splitting sqrt(Omega^2 + Delta^2)."""
        return math.hypot(self.Omega, self.delta)

    # sin/cos are formed algebraically from (Omega, Delta) so that exact
    # special cases (Delta = 0 -> cos = 0, Omega = 0 -> sin = 0) hold to the
    # last bit; theta itself is only reported for diagnostics.
    @property
    def sin_theta(self) -> float:
        return self.Omega / self.omega_prime

    @property
    def cos_theta(self) -> float:
        return -self.delta / self.omega_prime

    @property
    def theta(self) -> float:
        return math.atan2(self.Omega, -self.delta)


@dataclass(frozen=True)
class RotatingRates:
    """Rotating-frame rates; inv_T2p = inv_T1p/2 + inv_Tphip by construction."""

    inv_T1p: float
    inv_Tphip: float

    @property
    def inv_T2p(self) -> float:
        return 0.5 * self.inv_T1p + self.inv_Tphip


def effective_noise_spectra(geom: DriveGeometry, noise: NoiseSpectrum, omega: float):
    """Effective rotating-frame spectra (S_x'x', S_y'y', S_z'z') at omega.

    The transverse lab noise is demodulated by the drive into two quadrature
    channels with densities

        S_w(omega) = (W_x cos^2 phi + W_y sin^2 phi)/2 * Stilde(nu, omega)
        S_u(omega) = (W_x sin^2 phi + W_y cos^2 phi)/2 * Stilde(nu, omega)

    where Stilde(nu, omega) = S(nu+omega) + S(nu-omega), and the tilted-frame
    combinations are

        S_x'x' = 2 [S_w cos^2 theta + W_z S sin^2 theta]
        S_y'y' = 2 S_u
        S_z'z' = 2 [S_w sin^2 theta + W_z S cos^2 theta].

    Spectrum evaluations whose coefficient vanishes are skipped, so a model
    divergent at an unused frequency (e.g. S(0)) never raises here.
    """
    cos2, sin2 = geom.cos_theta**2, geom.sin_theta**2
    cphi2 = math.cos(geom.phi) ** 2
    sphi2 = math.sin(geom.phi) ** 2

    cw = 0.5 * (noise.W_x * cphi2 + noise.W_y * sphi2)
    cu = 0.5 * (noise.W_x * sphi2 + noise.W_y * cphi2)
    s_tilde = sideband_spectrum(noise, geom.nu, omega) if (cw or cu) else 0.0
    s_plain = noise.density(omega) if noise.W_z else 0.0

    s_w = cw * s_tilde
    s_u = cu * s_tilde
    s_z = noise.W_z * s_plain

    s_xx = 2.0 * (s_w * cos2 + s_z * sin2)
    s_yy = 2.0 * s_u
    s_zz = 2.0 * (s_w * sin2 + s_z * cos2)
    return s_xx, s_yy, s_zz


def rotating_frame_rates(geom: DriveGeometry, noise: NoiseSpectrum) -> RotatingRates:
    """Weak-coupling rates in the rotating frame.

    1/T1' = S_x'x'(omega') + S_y'y'(omega')
          = 2 W_z sin^2(theta) S(omega')
            + [W_x (cos^2 theta cos^2 phi + sin^2 phi)
               + W_y (cos^2 theta sin^2 phi + cos^2 phi)] Stilde(nu, omega')

    1/Tphi' = S_z'z'(0)
            = 2 sin^2(theta) (W_x cos^2 phi + W_y sin^2 phi) S(nu)
              + 2 W_z cos^2(theta) S(0)

    Each spectrum value is computed once, and only when its coefficient is
    nonzero; at exact resonance (cos theta = 0) or with W_z = 0 the S(0) term
    is therefore never evaluated, keeping infrared-divergent models usable.

    Returns
    -------
    RotatingRates
    """
    cos2, sin2 = geom.cos_theta**2, geom.sin_theta**2
    cphi2 = math.cos(geom.phi) ** 2
    sphi2 = math.sin(geom.phi) ** 2
    w_p = geom.omega_prime

    c_sideband = noise.W_x * (cos2 * cphi2 + sphi2) + noise.W_y * (cos2 * sphi2 + cphi2)
    c_splitting = 2.0 * noise.W_z * sin2
    c_drivefreq = 2.0 * sin2 * (noise.W_x * cphi2 + noise.W_y * sphi2)
    c_zero = 2.0 * noise.W_z * cos2

    inv_t1p = 0.0
    if c_splitting:
        inv_t1p += c_splitting * noise.density(w_p)
    if c_sideband:
        inv_t1p += c_sideband * sideband_spectrum(noise, geom.nu, w_p)

    inv_tphip = 0.0
    if c_drivefreq:
        inv_tphip += c_drivefreq * noise.density(geom.nu)
    if c_zero:
        inv_tphip += c_zero * noise.density(0.0)

    return RotatingRates(inv_T1p=inv_t1p, inv_Tphip=inv_tphip)


def weak_noise_ratio(geom: DriveGeometry, noise: NoiseSpectrum,
                     cutoff: Optional[float] = None) -> float:
    """Total noise rms over Omega, a validity diagnostic for the rate theory.

    The weak-coupling treatment assumes the noise amplitude is small against
    the drive; ratios above ~0.1 deserve suspicion. Requires Omega > 0 and an
    integrable spectrum (explicit cutoff for scale-free models).
    """
    if geom.Omega <= 0:
        raise ParameterError("weak_noise_ratio requires Omega > 0")
    c0 = autocorrelation(noise, 0.0, cutoff=cutoff)
    var = (noise.W_x + noise.W_y + noise.W_z) * c0
    return math.sqrt(max(var, 0.0)) / geom.Omega
