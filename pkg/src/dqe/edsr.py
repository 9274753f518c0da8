"""Electrically driven spin qubit with piezoelectric phonon noise.

An in-plane AC electric field drives the spin through spin-orbit coupling,
and the same coupling converts phonon-induced electric-field fluctuations
into purely transverse magnetic noise with spectral density proportional to
|omega|^5. Everything here is parametrized by the dimensionless drive
strength R = Omega/omega_Z, detuning delta = Delta/omega_Z, and the
Rashba-to-Dresselhaus ratio r.

Rates default to dimensionless form (common prefactor K = 1). Physical mode
needs material constants (piezoelectric constant, density, sound speed) plus
the dot confinement frequency, and then returns rates in 1/s.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple, Optional

from scipy.constants import e as ELEMENTARY_CHARGE
from scipy.constants import hbar as HBAR
from scipy.constants import value as _constant

from .errors import (
    DegeneratePolarizationError,
    EvaluationError,
    ParameterError,
    PreconditionError,
)
from .frames import DriveGeometry
from .spectra import PhononMaterial, PhononPiezo

__all__ = [
    "DriveFields",
    "EdsrParams",
    "EdsrRates",
    "ResonantT1Split",
    "taylor_F",
    "map_edsr",
    "drive_strength_estimate",
    "drive_field_amplitudes",
    "edsr_rotating_rates",
    "edsr_large_detuning_rates",
    "edsr_resonant_T1_split",
    "environment_rescaling",
    "edsr_resonant_Tphi",
    "gaas_defaults",
    "gaas_material",
]

_BOHR_MAGNETON = _constant("Bohr magneton")


@dataclass(frozen=True)
class DriveFields:
    """Physical drive-field magnitudes for unit-full estimates.

    E_x, E_y in V/m; B_z in tesla together with the g-factor fixes the
    Zeeman splitting when EdsrParams.omega_Z is left as None.
    """

    E_x: float
    E_y: float = 0.0
    B_z: Optional[float] = None
    g: Optional[float] = None

    def __post_init__(self):
        if self.E_x < 0 or self.E_y < 0:
            raise ParameterError("field magnitudes must be >= 0")
        if self.B_z is not None and self.B_z <= 0:
            raise ParameterError("B_z must be positive when given")


@dataclass(frozen=True)
class EdsrParams:
    """Inputs for the electrically driven spin qubit.

    beta is the Dresselhaus strength (m/s) and r = alpha/beta >= 0 the
    Rashba ratio, so beta_minus = beta (1 - r) may vanish or change sign;
    only its square enters the rates. R = Omega/omega_Z must be positive
    and 1 + delta > 0 keeps the drive frequency positive.

    dimensionless=True (default) sets the common rate prefactor to 1.
    Physical mode requires material and omega_d; omega_Z may then be given
    directly or derived from fields_ (B_z and g).
    """

    R: float
    delta: float = 0.0
    r: float = 0.0
    phi: float = 0.0
    beta: float = 1000.0
    omega_Z: Optional[float] = 1.0
    omega_d: Optional[float] = None
    material: Optional[PhononMaterial] = None
    fields_: Optional[DriveFields] = None
    dimensionless: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0):
            raise ParameterError("R must be positive")
        if not (math.isfinite(self.delta) and self.delta > -1.0):
            raise ParameterError("delta must satisfy 1 + delta > 0")
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ParameterError("r must be >= 0")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ParameterError("beta must be positive")
        if self.omega_Z is None:
            f = self.fields_
            if f is None or f.B_z is None or f.g is None:
                raise ParameterError(
                    "omega_Z is None and cannot be derived: supply fields_ "
                    "with B_z and g"
                )
            wz = abs(f.g) * _BOHR_MAGNETON * f.B_z / HBAR
            object.__setattr__(self, "omega_Z", wz)
        if not self.omega_Z > 0:
            raise ParameterError("omega_Z must be positive")
        if self.omega_d is not None and not self.omega_d > 0:
            raise ParameterError("omega_d must be positive when given")
        if not self.dimensionless:
            if self.material is None:
                raise ParameterError("physical mode requires material constants")
            if self.omega_d is None:
                raise ParameterError("physical mode requires omega_d")

    @property
    def beta_plus(self) -> float:
        return self.beta * (1.0 + self.r)

    @property
    def beta_minus(self) -> float:
        return self.beta * (1.0 - self.r)

    def prefactor(self) -> float:
        """Common rate prefactor K; 1 in dimensionless mode, else 1/s."""
        if self.dimensionless:
            return 1.0
        field_scale = (ELEMENTARY_CHARGE / (HBAR * self.omega_d**2)) ** 2
        return (
            self.beta**2
            * field_scale
            * self.material.prefactor()
            * self.omega_Z**5
        )


@dataclass(frozen=True)
class EdsrRates:
    """Rotating-frame rates; prefactor records the K they already include."""

    inv_T1p: float
    inv_Tphip: float
    prefactor: float = 1.0

    def __post_init__(self):
        if self.inv_T1p < 0 or self.inv_Tphip < 0 or self.prefactor < 0:
            raise ParameterError("rates and prefactor must be >= 0")

    @property
    def inv_T2p(self) -> float:
        return 0.5 * self.inv_T1p + self.inv_Tphip


class ResonantT1Split(NamedTuple):
    zeeman: float
    sideband: float
    total: float
    nondriven: float
    ratio: float


def taylor_F(x):
    """F(x) = |1 - x|^5 + (1 + x)^5 (= 2 + 20 x^2 + 10 x^4 for x <= 1).

    The combined weight of the two sidebands of a fifth-power spectrum.
    The spectrum is even, hence the absolute value: it matters once the
    lower sideband crosses zero (x > 1, splitting above the reference
    frequency). Accepts scalars or numpy arrays.
    """
    return abs(1.0 - x) ** 5 + (1.0 + x) ** 5


def map_edsr(params: EdsrParams):
    """Translate EDSR parameters into (DriveGeometry, NoiseSpectrum).

    The noise is a fifth-power spectrum with purely transverse weights
    W_x proportional to (beta (1-r))^2 and W_y to (beta (1+r))^2, W_z = 0.
    In dimensionless mode the spectrum is (|omega|/omega_Z)^5 and the beta
    factors are dropped, so composed rates carry prefactor 1.
    """
    wz = params.omega_Z
    geom = DriveGeometry(
        omega_Z=wz,
        Omega=params.R * wz,
        nu=(1.0 + params.delta) * wz,
        phi=params.phi,
    )
    if params.dimensionless:
        noise = PhononPiezo(
            W_x=(1.0 - params.r) ** 2,
            W_y=(1.0 + params.r) ** 2,
            W_z=0.0,
            dimensionless=True,
            scale=wz**-5,
        )
    else:
        field_scale = (ELEMENTARY_CHARGE / (HBAR * params.omega_d**2)) ** 2
        noise = PhononPiezo(
            W_x=params.beta_minus**2,
            W_y=params.beta_plus**2,
            W_z=0.0,
            dimensionless=False,
            material=params.material,
            scale=field_scale,
        )
    return geom, noise


def drive_strength_estimate(params: EdsrParams) -> float:
    """Estimate Omega/omega_Z = 2 (beta + alpha) e |E_x| / (hbar omega_d^2).

    Linear in the control field and in beta (1 + r), inverse-square in the
    confinement frequency, independent of omega_Z. Requires fields_ and
    omega_d.
    """
    if params.fields_ is None:
        raise ParameterError("drive_strength_estimate requires fields_")
    if params.omega_d is None:
        raise ParameterError("drive_strength_estimate requires omega_d")
    return (
        2.0
        * params.beta_plus
        * ELEMENTARY_CHARGE
        * params.fields_.E_x
        / (HBAR * params.omega_d**2)
    )


def drive_field_amplitudes(params: EdsrParams):
    """Control-field amplitudes (|E_x|, |E_y|) realizing the circular drive.

    The required electric field is elliptically polarized with magnitudes

        |E_x| = hbar omega_d^2 Omega / (e beta_plus nu)
        |E_y| = hbar omega_d^2 Omega / (e |beta_minus| nu)

    At r = 1 the y-amplitude diverges (beta_minus = 0): raise instead, since
    that regime needs phi = pi/2 with a field linearly polarized along x.
    """
    if params.omega_d is None:
        raise ParameterError("drive_field_amplitudes requires omega_d")
    if params.r == 1.0:
        raise DegeneratePolarizationError(
            "r = 1 makes the x-coupling vanish; no elliptical field realizes "
            "the circular drive. Fix phi = pi/2 and drive with a linearly "
            "x-polarized field instead."
        )
    nu = (1.0 + params.delta) * params.omega_Z
    common = HBAR * params.omega_d**2 * params.R * params.omega_Z / (
        ELEMENTARY_CHARGE * nu
    )
    return common / params.beta_plus, common / abs(params.beta_minus)


def _polarization_weights(r, phi):
    """(1 + r^2 -/+ 2 r cos 2phi) in the cancellation-free half-angle form.

    The textbook combination loses ~10 digits near r = 1 on the closed
    channel; (1-r)^2 + 4r sin^2/cos^2 is exact there.
    """
    base = (1.0 - r) ** 2
    return base + 4.0 * r * math.sin(phi) ** 2, base + 4.0 * r * math.cos(phi) ** 2


def _angle_factors(params: EdsrParams):
    # weights of the detuning and sideband channels
    return _polarization_weights(params.r, params.phi)


def edsr_rotating_rates(params: EdsrParams,
                        sideband_at: str = "splitting") -> EdsrRates:
    """Closed-form rotating-frame rates for the electrically driven spin.

    1/T1' = K (1+delta)^5 F(x) [ (1+r^2-2r cos2phi) delta^2/(R^2+delta^2)
                                 + (1+r^2+2r cos2phi) ]
    1/Tphi' = 2 K R^2 (1+delta)^5 (1+r^2-2r cos2phi) / (R^2+delta^2)

    sideband_at selects the frequency offset inside F. "splitting" (default)
    uses x = sqrt(R^2+delta^2)/(1+delta), the dressed splitting, and then the
    result matches frames.rotating_frame_rates composed with map_edsr. The
    "drive" variant uses x = R/(1+delta), which evaluates both sidebands at
    the drive strength instead; it is the form whose large-detuning limit is
    edsr_large_detuning_rates. The two differ only off resonance.
    """
    if sideband_at not in ("splitting", "drive"):
        raise ParameterError("sideband_at must be 'splitting' or 'drive'")
    k = params.prefactor()
    R, d = params.R, params.delta
    w_det, w_side = _angle_factors(params)
    opd5 = (1.0 + d) ** 5
    lorentz = R * R / (R * R + d * d)

    if sideband_at == "splitting":
        x = math.hypot(R, d) / (1.0 + d)
    else:
        x = R / (1.0 + d)
    inv_t1p = k * opd5 * taylor_F(x) * (w_det * (1.0 - lorentz) + w_side)
    inv_tphip = 2.0 * k * opd5 * lorentz * w_det
    return EdsrRates(inv_T1p=inv_t1p, inv_Tphip=inv_tphip, prefactor=k)


def edsr_large_detuning_rates(params: EdsrParams):
    """Large-detuning (|delta| >> R) limits of the rotating-frame rates.

        1/T1'   -> 4 K (1+delta)^5 (1+r^2)          (phi-independent)
        1/Tphi' -> 2 K (R/delta)^2 (1+delta)^5 (1+r^2-2r cos2phi)

    These are the limits of the sideband_at="drive" form. delta = 0 has no
    dephasing limit to take.
    """
    if params.delta == 0.0:
        raise EvaluationError(
            "large-detuning dephasing limit divides by delta; got delta = 0"
        )
    k = params.prefactor()
    w_det, _ = _angle_factors(params)
    opd5 = (1.0 + params.delta) ** 5
    inv_t1p = 4.0 * k * opd5 * (1.0 + params.r**2)
    inv_tphip = 2.0 * k * (params.R / params.delta) ** 2 * opd5 * w_det
    return inv_t1p, inv_tphip


def _require_resonant_params(params: EdsrParams, who: str):
    if abs(params.delta) > 1e-12:
        raise PreconditionError(f"{who} requires delta = 0")


def edsr_resonant_T1_split(params: EdsrParams) -> ResonantT1Split:
    """Resonant lab 1/T1 split into its two channels, plus the free-qubit
    rate and the driven/non-driven ratio.

        zeeman    = 2 K (1+r^2-2r cos2phi)      noise at omega_Z
        sideband  = (K/2) F(R) (1+r^2+2r cos2phi)  noise at omega_Z +/- Omega
        nondriven = 4 K (1+r^2)

    ratio = total/nondriven is K-free; it tends to 3/4 at r = 0 and small R,
    is maximized over phi at phi = pi/2, and at r = 1, phi = 0 the Zeeman
    channel closes entirely, leaving ratio = F(R)/4.
    """
    _require_resonant_params(params, "edsr_resonant_T1_split")
    k = params.prefactor()
    w_det, w_side = _angle_factors(params)
    zeeman = 2.0 * k * w_det
    sideband = 0.5 * k * taylor_F(params.R) * w_side
    total = zeeman + sideband
    nondriven = 4.0 * k * (1.0 + params.r**2)
    return ResonantT1Split(zeeman, sideband, total, nondriven, total / nondriven)


def environment_rescaling(omega: float, Omega: float, r: float, phi: float) -> float:
    """Factor by which resonant driving rescales the noise the qubit feels
    at frequency omega, for transverse piezo-type coupling:

        (1+r^2-2r cos2phi)/(2(1+r^2))
            + (1+r^2+2r cos2phi)/(8(1+r^2)) * F(Omega/omega)

    For omega >> Omega this spans [1/2, 1]: 1/2 at r = 1, phi = 0; 1 at
    r = 1, phi = pi/2; 3/4 at r = 0 regardless of phi.
    """
    if not omega > 0:
        raise EvaluationError("environment_rescaling needs omega > 0")
    if Omega < 0 or r < 0:
        raise ParameterError("Omega and r must be >= 0")
    u = 1.0 + r * r
    w_det, w_side = _polarization_weights(r, phi)
    return w_det / (2.0 * u) + w_side / (8.0 * u) * taylor_F(Omega / omega)


def edsr_resonant_Tphi(params: EdsrParams) -> float:
    """Resonant lab-frame pure dephasing rate at phi = 0:

        1/Tphi = K [ (7/4) F(R) (1+r)^2 - (1-r)^2 ]

    For small R this is K (5/2 + 9r + 5r^2/2), increasing in r. Matches
    labframe.resonant_Tphi_phi0 composed with map_edsr.
    """
    _require_resonant_params(params, "edsr_resonant_Tphi")
    if abs(params.phi) > 1e-9:
        raise PreconditionError("edsr_resonant_Tphi requires phi = 0")
    k = params.prefactor()
    return k * (
        1.75 * taylor_F(params.R) * (1.0 + params.r) ** 2
        - (1.0 - params.r) ** 2
    )


def gaas_defaults() -> dict:
    """Shipped GaAs constants (external literature values, not derived here)."""
    text = resources.files("dqe").joinpath("data/gaas.json").read_text()
    return json.loads(text)


def gaas_material() -> PhononMaterial:
    """PhononMaterial built from the shipped GaAs constants."""
    d = gaas_defaults()
    return PhononMaterial(
        e14=d["e14_V_per_m"], rho=d["rho_kg_per_m3"], c=d["c_m_per_s"]
    )
