"""Noise spectral-density models and derived spectral quantities.

Every model is a symmetric spectral density S(omega) = S(-omega), evaluated
through |omega|, with per-axis coupling strengths W_x, W_y, W_z carried on the
model. Frequencies are angular throughout. The autocorrelation convention is

    C(t) = W * (1/2pi) * integral dOmega S(omega) exp(-i omega t),

so the lag-0 variance of an axis is (W/pi) * integral_0^cutoff S(omega) dOmega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.constants import hbar as HBAR

from .errors import EvaluationError, ParameterError

__all__ = [
    "NoiseSpectrum",
    "White",
    "Lorentzian",
    "PhononMaterial",
    "PhononPiezo",
    "PowerLaw",
    "Tabulated",
    "eval_spectrum",
    "sideband_spectrum",
    "autocorrelation",
    "default_cutoff",
]


def _as_abs_array(omega):
    w = np.abs(np.asarray(omega, dtype=float))
    return w


def _maybe_scalar(out, omega):
    if np.ndim(omega) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class NoiseSpectrum:
    """Base class: per-axis strengths plus an optional synthesis cutoff.

    Parameters
    ----------
    W_x, W_y, W_z : float
        Nonnegative coupling strengths of the three noise axes. The product
        W_j * S(omega) is what enters every rate formula.
    cutoff : float, optional
        Angular frequency above which the spectrum is treated as absent for
        integration and trajectory synthesis. Models without an intrinsic
        scale (white, power-law, |omega|^5) require it for those uses.
    """

    W_x: float = 0.0
    W_y: float = 0.0
    W_z: float = 0.0
    cutoff: Optional[float] = None

    def __post_init__(self):
        for name in ("W_x", "W_y", "W_z"):
            if not math.isfinite(getattr(self, name)) or getattr(self, name) < 0:
                raise ParameterError(f"{name} must be finite and >= 0")
        if self.cutoff is not None and self.cutoff <= 0:
            raise ParameterError("cutoff must be positive when given")

    # subclasses implement the one-sided shape on |omega|
    def _density_abs(self, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def density(self, omega):
        """S(omega), symmetric in omega; scalar in, scalar out."""
        return _maybe_scalar(self._density_abs(_as_abs_array(omega)), omega)

    def strength(self, axis: str) -> float:
        return {"x": self.W_x, "y": self.W_y, "z": self.W_z}[axis]

    def characteristic_frequency(self) -> Optional[float]:
        """Largest intrinsic frequency scale, or None if the model has none."""
        return None

    @property
    def kind(self) -> str:
        return type(self).__name__.lower()


@dataclass(frozen=True)
class White(NoiseSpectrum):
    """Flat spectrum S(omega) = S0."""

    S0: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.S0 < 0 or not math.isfinite(self.S0):
            raise ParameterError("S0 must be finite and >= 0")

    def _density_abs(self, w):
        return np.full_like(w, self.S0)


@dataclass(frozen=True)
class Lorentzian(NoiseSpectrum):
    """Lorentzian line of integrated weight Gamma, width gamma, center omega_c.

    S(omega) = (1/2pi) * Gamma * gamma^2 / (gamma^2 + (|omega| - omega_c)^2)

    The peak value is Gamma/(2 pi) at |omega| = omega_c and the half-width at
    half-maximum is gamma. omega_c = 0 gives the zero-centered line used for
    S(0)-sensitive checks.
    """

    Gamma: float = 2.0 * math.pi
    gamma: float = 1.0
    omega_c: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if self.gamma <= 0:
            raise ParameterError("gamma must be positive")
        if self.Gamma < 0:
            raise ParameterError("Gamma must be >= 0")
        if self.omega_c < 0:
            raise ParameterError("omega_c must be >= 0")

    def _density_abs(self, w):
        g2 = self.gamma * self.gamma
        return (self.Gamma / (2.0 * math.pi)) * g2 / (g2 + (w - self.omega_c) ** 2)

    def characteristic_frequency(self):
        return max(self.omega_c, self.gamma)


@dataclass(frozen=True)
class PhononMaterial:
    """Piezoelectric material constants entering the |omega|^5 prefactor.

    e14 is the piezoelectric constant expressed as an electric field, rho the
    mass density, c the sound speed. Only their combination
    hbar e14^2 / (15 pi^2 rho c^5) matters here.
    """

    e14: float
    rho: float
    c: float

    def __post_init__(self):
        if self.e14 <= 0 or self.rho <= 0 or self.c <= 0:
            raise ParameterError("material constants e14, rho, c must be positive")

    def prefactor(self) -> float:
        return HBAR * self.e14**2 / (15.0 * math.pi**2 * self.rho * self.c**5)


@dataclass(frozen=True)
class PhononPiezo(NoiseSpectrum):
    """Piezoelectric phonon spectrum, S(omega) proportional to |omega|^5.

    In dimensionless mode (the default) the full physical prefactor is
    replaced by ``scale`` (1.0 unless a mapping supplies a reference-frequency
    normalization). In physical mode the prefactor is
    scale * hbar e14^2/(15 pi^2 rho c^5) from ``material``.
    """

    dimensionless: bool = True
    material: Optional[PhononMaterial] = None
    scale: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.scale <= 0 or not math.isfinite(self.scale):
            raise ParameterError("scale must be positive and finite")
        if not self.dimensionless and self.material is None:
            raise ParameterError("physical mode requires material constants")

    def prefactor(self) -> float:
        if self.dimensionless:
            return self.scale
        return self.scale * self.material.prefactor()

    def _density_abs(self, w):
        return self.prefactor() * w**5


@dataclass(frozen=True)
class PowerLaw(NoiseSpectrum):
    """S(omega) = amplitude * |omega|^exponent; the exponent may be negative.

    For exponent < 0 the density diverges as omega -> 0. An optional infrared
    cutoff ``ir_cutoff`` clamps |omega| from below; none is endorsed by
    default, and evaluating exactly at omega = 0 without one raises.
    """

    amplitude: float = 1.0
    exponent: float = 1.0
    ir_cutoff: Optional[float] = None

    def __post_init__(self):
        super().__post_init__()
        if self.amplitude < 0 or not math.isfinite(self.amplitude):
            raise ParameterError("amplitude must be finite and >= 0")
        if not math.isfinite(self.exponent):
            raise ParameterError("exponent must be finite")
        if self.ir_cutoff is not None and self.ir_cutoff <= 0:
            raise ParameterError("ir_cutoff must be positive when given")

    def _density_abs(self, w):
        if self.exponent < 0:
            if self.ir_cutoff is not None:
                w = np.maximum(w, self.ir_cutoff)
            elif np.any(w == 0.0):
                raise EvaluationError(
                    f"power-law spectrum with exponent {self.exponent} diverges "
                    "at omega=0; set ir_cutoff to regularize"
                )
        return self.amplitude * w**self.exponent


@dataclass(frozen=True)
class Tabulated(NoiseSpectrum):
    """Linear interpolation of sampled (omega_i, S_i), clamped at both ends."""

    omegas: Sequence[float] = field(default_factory=tuple)
    values: Sequence[float] = field(default_factory=tuple)

    def __post_init__(self):
        super().__post_init__()
        om = np.asarray(self.omegas, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if om.size == 0 or vals.size == 0:
            raise ParameterError("tabulated spectrum requires a nonempty grid")
        if om.size != vals.size:
            raise ParameterError("omegas and values must have equal length")
        if np.any(om < 0):
            raise ParameterError("tabulated grid must use |omega| >= 0")
        if np.any(np.diff(om) <= 0):
            raise ParameterError("tabulated grid must be strictly increasing")
        if np.any(vals < 0):
            raise ParameterError("tabulated densities must be >= 0")
        object.__setattr__(self, "omegas", tuple(float(v) for v in om))
        object.__setattr__(self, "values", tuple(float(v) for v in vals))

    def _density_abs(self, w):
        return np.interp(w, self.omegas, self.values)

    def characteristic_frequency(self):
        return self.omegas[-1]


def eval_spectrum(model: NoiseSpectrum, omega):
    """Evaluate S(omega); accepts scalars or arrays, symmetric in omega."""
    return model.density(omega)


def sideband_spectrum(model: NoiseSpectrum, nu: float, omega):
    """Drive-shifted combination S(nu + omega) + S(nu - omega).

    Parameters
    ----------
    model : NoiseSpectrum
    nu : float
        Drive frequency (angular).
    omega : float or ndarray
        Offset frequency; the combination is even in omega.
    """
    return model.density(nu + omega) + model.density(nu - omega)


def default_cutoff(model: NoiseSpectrum) -> float:
    """Integration/synthesis cutoff: explicit value, else 50x the model scale.

    Raises
    ------
    ParameterError
        If the model has neither an explicit cutoff nor an intrinsic
        frequency scale (White, PowerLaw, PhononPiezo).
    """
    if model.cutoff is not None:
        return float(model.cutoff)
    char = model.characteristic_frequency()
    if char is None or char <= 0:
        raise ParameterError(
            f"{model.kind} spectrum has no intrinsic frequency scale; "
            "an explicit cutoff is required"
        )
    if isinstance(model, Tabulated):
        # beyond the grid the density is clamped constant, so the grid end is
        # the only defensible integration limit
        return char
    return 50.0 * char


def autocorrelation(model: NoiseSpectrum, tau, *, cutoff: Optional[float] = None,
                    num: int = 10001):
    """Cosine-transform autocorrelation (1/pi) int_0^cutoff S(w) cos(w tau) dw.

    This is the unit-strength correlation; multiply by W_j for an axis.
    Trapezoid rule on a uniform grid; ``num`` defaults to 10^4 + 1 points.

    Parameters
    ----------
    model : NoiseSpectrum
    tau : float or ndarray
        Lag(s).
    cutoff : float, optional
        Integration limit; defaults to ``default_cutoff(model)``.
    num : int
        Grid points for the trapezoid rule.

    Raises
    ------
    ParameterError
        For a cutoff-less White model (delta-correlated: the transform only
        exists as S0 * delta(tau)) or any other scale-free model without a
        cutoff.
    """
    if isinstance(model, White) and model.cutoff is None and cutoff is None:
        raise ParameterError(
            "white noise without a cutoff is delta-correlated "
            "(C(tau) = S0^2-weighted delta); set a cutoff for a finite transform"
        )
    w_max = float(cutoff) if cutoff is not None else default_cutoff(model)
    if w_max <= 0:
        raise ParameterError("cutoff must be positive")
    grid = np.linspace(0.0, w_max, int(num))
    dens = model._density_abs(grid)
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    integrand = dens[:, None] * np.cos(grid[:, None] * tau_arr[None, :])
    out = np.trapezoid(integrand, grid, axis=0) / math.pi
    if np.ndim(tau) == 0:
        return float(out[0])
    return out
