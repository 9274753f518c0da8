"""Lab-frame observables of a driven qubit.

Relaxation and dephasing times measured in the lab are defined through the
1/e decay of slowly varying envelopes of <sigma_z(t)> and <sigma_x(t)>, which
mix the two rotating-frame rates. This module provides those envelopes, a
bracketed root solver for the 1/e times, and the closed-form resonant and
non-driven rates used as cross-checks.

Conventions: the qubit starts in the +z (for T1) or +x (for T2) eigenstate,
sigma_inf is the asymptotic rotating-frame polarization along the dressed
axis, and all rates are angular frequencies.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    DivergentRateError,
    NoCrossingError,
    ParameterError,
    PreconditionError,
)
from .frames import DriveGeometry, RotatingRates, rotating_frame_rates
from .spectra import NoiseSpectrum, sideband_spectrum

__all__ = [
    "EnvelopeConfig",
    "LabRates",
    "sigma_z_envelope",
    "sigma_x_envelope",
    "solve_T1",
    "solve_T2",
    "lab_rates",
    "resonant_T1",
    "nondriven_rates",
    "driving_modification",
    "resonant_Tphi_phi0",
]

_INV_E = math.exp(-1.0)
_RESONANCE_RTOL = 1e-9


@dataclass(frozen=True)
class EnvelopeConfig:
    """Inputs for the lab-frame envelopes.

    sigma_inf is the long-time rotating-frame polarization along the dressed
    axis, in [-1, 1]. The default 0 corresponds to a fully mixed steady state
    (high-temperature environment).
    """

    geom: DriveGeometry
    rates: RotatingRates
    sigma_inf: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.sigma_inf) and abs(self.sigma_inf) <= 1.0):
            raise ParameterError("sigma_inf must lie in [-1, 1]")


@dataclass(frozen=True)
class LabRates:
    """Lab-frame rates. inv_Tphi = inv_T2 - inv_T1/2 when not supplied.

    method is "root" for envelope-solved values and "analytic" for
    closed-form ones. inv_Tphi may come out negative; it is reported signed.
    """

    inv_T1: float
    inv_T2: float
    inv_Tphi: Optional[float] = None
    method: str = "root"

    def __post_init__(self):
        if self.method not in ("root", "analytic"):
            raise ParameterError("method must be 'root' or 'analytic'")
        if self.inv_Tphi is None:
            object.__setattr__(self, "inv_Tphi", self.inv_T2 - 0.5 * self.inv_T1)


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("t must be >= 0")
    return t


def sigma_z_envelope(cfg: EnvelopeConfig, t):
    """Envelope of <sigma_z(t)> for a qubit prepared along +z.

        sin^2(theta) e^{-t/T2'} + cos(theta) [sigma_inf
            + (cos(theta) - sigma_inf) e^{-t/T1'}]

    i.e. the full expression with the fast cos(omega' t) factor replaced by
    its amplitude. Equals 1 at t = 0 for every configuration. Accepts scalar
    or array t (>= 0).
    """
    t = _check_time(t)
    g, r = cfg.geom, cfg.rates
    s2 = g.sin_theta**2
    c = g.cos_theta
    out = s2 * np.exp(-t * r.inv_T2p) + c * (
        cfg.sigma_inf + (c - cfg.sigma_inf) * np.exp(-t * r.inv_T1p)
    )
    return float(out) if out.ndim == 0 else out


def sigma_x_envelope(cfg: EnvelopeConfig, t, combine: str = "quadrature"):
    """Envelope of <sigma_x(t)> for a qubit prepared along +x.

    The signal oscillates at the drive frequency with two quadrature
    amplitudes. With the dressed-frame precession frozen at its initial
    phase these are

        X(t) = slow(t) + cos(phi) cos^2(theta) e^{-t/T2'}
        Y(t) = sin(phi) e^{-t/T2'}
        slow(t) = sigma_inf sin(theta)
                  + (cos(phi) sin(theta) - sigma_inf) sin(theta) e^{-t/T1'}

    combine="quadrature" (default) returns hypot(X, Y), which starts at
    exactly 1 and at phi=0 reduces to |slow + cos^2(theta) e^{-t/T2'}|.
    combine="sum" returns the conservative upper bound
    |slow| + sqrt(cos^2(theta)cos^2(phi) + sin^2(phi)) e^{-t/T2'}, which
    majorizes every quadrature mix but can exceed 1 at t = 0.
    """
    if combine not in ("quadrature", "sum"):
        raise ParameterError("combine must be 'quadrature' or 'sum'")
    t = _check_time(t)
    g, r = cfg.geom, cfg.rates
    s, c = g.sin_theta, g.cos_theta
    cphi, sphi = math.cos(g.phi), math.sin(g.phi)
    e1 = np.exp(-t * r.inv_T1p)
    e2 = np.exp(-t * r.inv_T2p)
    slow = cfg.sigma_inf * s + (cphi * s - cfg.sigma_inf) * s * e1
    if combine == "quadrature":
        out = np.hypot(slow + cphi * c * c * e2, sphi * e2)
    else:
        s_perp = math.sqrt(c * c * cphi * cphi + sphi * sphi)
        out = np.abs(slow) + s_perp * e2
    return float(out) if out.ndim == 0 else out


def _first_crossing(env: Callable, rates: RotatingRates, what: str) -> float:
    """First t > 0 where env(t) = 1/e, by geometric scan plus bisection.

    env must be vectorized and satisfy env(0) > 1/e. The scan covers
    [1e-3 min(T), 1e3 max(T)] over the finite rotating-frame times T at
    roughly 64 points per decade, so non-monotone envelopes are bracketed at
    their first dip. The returned bracket width is below 1e-9 relative.
    """
    finite_T = [1.0 / x for x in (rates.inv_T1p, rates.inv_T2p) if x > 0]
    if not finite_T:
        raise DivergentRateError(
            f"cannot solve {what}: both rotating-frame rates are zero"
        )
    lo = 1e-3 * min(finite_T)
    hi = 1e3 * max(finite_T)
    n = int(64 * math.log10(hi / lo)) + 2
    ts = np.geomspace(lo, hi, n)
    gs = np.asarray(env(ts)) - _INV_E

    a, b = 0.0, None
    if gs[0] < 0:
        b = ts[0]
    else:
        below = np.flatnonzero(gs < 0)
        if below.size:
            i = below[0]
            a, b = ts[i - 1], ts[i]
    if b is None:
        raise NoCrossingError(
            f"cannot solve {what}: envelope stays above 1/e out to "
            f"t = {hi:.6g} (value there {gs[-1] + _INV_E:.6g})"
        )

    for _ in range(200):
        if b - a <= 1e-9 * b:
            break
        mid = 0.5 * (a + b)
        if env(mid) - _INV_E > 0:
            a = mid
        else:
            b = mid
    return 2.0 / (a + b)


def solve_T1(cfg: EnvelopeConfig, mode: str = "fixed") -> float:
    """Lab-frame 1/T1 from the 1/e crossing of the sigma_z envelope.

    mode="fixed" pins the asymptote to sigma_inf = 0, giving the form

        sin^2(theta) e^{-t/T2'} + cos^2(theta) e^{-t/T1'} = 1/e

    whose solution always lies between 1/T1' and 1/T2'. mode="general" keeps
    cfg.sigma_inf, in which case the envelope tends to sigma_inf*cos(theta)
    and may never reach 1/e (NoCrossingError).
    """
    if mode not in ("fixed", "general"):
        raise ParameterError("mode must be 'fixed' or 'general'")
    if mode == "fixed":
        cfg = EnvelopeConfig(cfg.geom, cfg.rates, sigma_inf=0.0)
    return _first_crossing(lambda t: sigma_z_envelope(cfg, t), cfg.rates, "T1")


def solve_T2(cfg: EnvelopeConfig, mode: str = "fixed",
             combine: str = "quadrature") -> float:
    """Lab-frame 1/T2 from the 1/e crossing of the sigma_x envelope.

    mode="fixed" pins phi = 0 and sigma_inf = -1, solving

        sin(theta)(e^{-t/T1'} - 1) + sin^2(theta) e^{-t/T1'}
            + cos^2(theta) e^{-t/T2'} = 1/e

    regardless of cfg's phi and sigma_inf (the envelope is signed and not
    monotone, hence the scanning solver). mode="general" solves
    sigma_x_envelope(cfg, t, combine) = 1/e as given.
    """
    if mode not in ("fixed", "general"):
        raise ParameterError("mode must be 'fixed' or 'general'")
    if mode == "fixed":
        g, r = cfg.geom, cfg.rates
        s, c2 = g.sin_theta, g.cos_theta**2

        def env(t):
            e1 = np.exp(-np.asarray(t, dtype=float) * r.inv_T1p)
            return s * (e1 - 1.0) + s * s * e1 + c2 * np.exp(-t * r.inv_T2p)

    else:
        def env(t):
            return sigma_x_envelope(cfg, t, combine=combine)

    return _first_crossing(env, cfg.rates, "T2")


def lab_rates(cfg: EnvelopeConfig, mode: str = "fixed") -> LabRates:
    """Root-solved lab-frame rates, with 1/Tphi = 1/T2 - 1/(2 T1).

    A negative 1/Tphi is reported as-is with a RuntimeWarning; the envelope
    definitions do not force the combination to stay positive.
    """
    inv_t1 = solve_T1(cfg, mode=mode)
    inv_t2 = solve_T2(cfg, mode=mode)
    inv_tphi = inv_t2 - 0.5 * inv_t1
    if inv_tphi < 0:
        warnings.warn(
            f"lab-frame 1/Tphi = {inv_tphi:.6g} is negative; the 1/e-crossing "
            "definitions of T1 and T2 do not guarantee a positive difference",
            RuntimeWarning,
            stacklevel=2,
        )
    return LabRates(inv_T1=inv_t1, inv_T2=inv_t2, inv_Tphi=inv_tphi, method="root")


def _require_resonant(geom: DriveGeometry, who: str):
    if abs(geom.delta) > _RESONANCE_RTOL * geom.omega_Z:
        raise PreconditionError(
            f"{who} requires resonant driving (nu = omega_Z); "
            f"got detuning {geom.delta:.6g}"
        )


def resonant_T1(geom: DriveGeometry, noise: NoiseSpectrum) -> float:
    """Closed-form lab 1/T1 for resonant driving (nu = omega_Z).

        1/T1 = 1/2 (W_x sin^2 phi + W_y cos^2 phi) Stilde(omega_Z, Omega)
               + 2 (W_x cos^2 phi + W_y sin^2 phi) S(omega_Z)
               + W_z S(Omega)

    which coincides with the rotating-frame 1/T2' at zero detuning.
    """
    _require_resonant(geom, "resonant_T1")
    cphi2 = math.cos(geom.phi) ** 2
    sphi2 = math.sin(geom.phi) ** 2
    c_side = 0.5 * (noise.W_x * sphi2 + noise.W_y * cphi2)
    c_plain = 2.0 * (noise.W_x * cphi2 + noise.W_y * sphi2)

    out = 0.0
    if c_side:
        out += c_side * sideband_spectrum(noise, geom.omega_Z, geom.Omega)
    if c_plain:
        out += c_plain * noise.density(geom.omega_Z)
    if noise.W_z:
        out += noise.W_z * noise.density(geom.Omega)
    return out


def nondriven_rates(omega_Z: float, noise: NoiseSpectrum):
    """Free-qubit (1/T1, 1/Tphi) = (2 (W_x + W_y) S(omega_Z), 2 W_z S(0)).

    S(0) is only evaluated when W_z is nonzero, so infrared-divergent models
    with purely transverse coupling give 1/Tphi = 0 instead of raising.
    """
    if not (math.isfinite(omega_Z) and omega_Z > 0):
        raise ParameterError("omega_Z must be positive")
    wt = noise.W_x + noise.W_y
    inv_t1 = 2.0 * wt * noise.density(omega_Z) if wt else 0.0
    inv_tphi = 2.0 * noise.W_z * noise.density(0.0) if noise.W_z else 0.0
    return inv_t1, inv_tphi


def driving_modification(geom: DriveGeometry, noise: NoiseSpectrum) -> float:
    """Change of the lab 1/T1 due to resonant driving.

        delta(1/T1) = W_z S(Omega)
            - (W_x sin^2 phi + W_y cos^2 phi) [2 S(omega_Z)
                                               - 1/2 Stilde(omega_Z, Omega)]

    Algebraically identical to resonant_T1(geom) minus the non-driven 1/T1.
    Negative values mean driving slows relaxation (about -25% of the free
    rate for flat, transverse-dominated noise); positive values occur for
    spectra peaked at omega_Z +/- Omega with longitudinal coupling.
    """
    _require_resonant(geom, "driving_modification")
    cphi2 = math.cos(geom.phi) ** 2
    sphi2 = math.sin(geom.phi) ** 2
    out = 0.0
    if noise.W_z:
        out += noise.W_z * noise.density(geom.Omega)
    c = noise.W_x * sphi2 + noise.W_y * cphi2
    if c:
        out -= c * (
            2.0 * noise.density(geom.omega_Z)
            - 0.5 * sideband_spectrum(noise, geom.omega_Z, geom.Omega)
        )
    return out


def resonant_Tphi_phi0(geom: DriveGeometry, noise: NoiseSpectrum) -> float:
    """Closed-form lab 1/Tphi for resonant driving at phi = 0.

    Uses the short-time estimate 1/T2 = 2/T1' for the transverse decay:

        1/Tphi = 7/(4 T1') - 1/(2 Tphi')
               = 7/2 W_z S(Omega) + 7/4 W_y Stilde(omega_Z, Omega)
                 - W_x S(omega_Z)

    The combination can be negative for spectra peaked at omega_Z with
    dominant W_x; it is returned signed with a RuntimeWarning.
    """
    _require_resonant(geom, "resonant_Tphi_phi0")
    if abs(geom.phi) > 1e-9:
        raise PreconditionError("resonant_Tphi_phi0 requires phi = 0")
    rr = rotating_frame_rates(geom, noise)
    out = 1.75 * rr.inv_T1p - 0.5 * rr.inv_Tphip
    if out < 0:
        warnings.warn(
            f"resonant phi=0 1/Tphi = {out:.6g} is negative; the short-time "
            "estimate it is built on does not apply to this spectrum",
            RuntimeWarning,
            stacklevel=2,
        )
    return out
