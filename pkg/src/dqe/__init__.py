"""Decoherence rates of driven qubits.

Analytic rotating-frame and lab-frame decoherence rates for a periodically
driven two-level system coupled to anisotropic classical noise, a
spin-orbit-qubit (EDSR) specialization with piezoelectric phonon noise, and
a Monte-Carlo trajectory oracle that checks the rate theory against direct
integration of the stochastic Schrodinger dynamics.
"""

from .edsr import (
    DriveFields,
    EdsrParams,
    EdsrRates,
    ResonantT1Split,
    drive_field_amplitudes,
    drive_strength_estimate,
    edsr_large_detuning_rates,
    edsr_resonant_T1_split,
    edsr_resonant_Tphi,
    edsr_rotating_rates,
    environment_rescaling,
    gaas_material,
    map_edsr,
    taylor_F,
)
from .errors import (
    DegeneratePolarizationError,
    DivergentRateError,
    DqeError,
    EvaluationError,
    InconclusiveError,
    NoCrossingError,
    ParameterError,
    PreconditionError,
    SolveError,
)
from .frames import (
    DriveGeometry,
    RotatingRates,
    effective_noise_spectra,
    rotating_frame_rates,
    weak_noise_ratio,
)
from .labframe import (
    EnvelopeConfig,
    LabRates,
    driving_modification,
    lab_rates,
    nondriven_rates,
    resonant_T1,
    resonant_Tphi_phi0,
    sigma_x_envelope,
    sigma_z_envelope,
    solve_T1,
    solve_T2,
)
from .oracle import (
    DecayEstimate,
    EnsembleCurves,
    OracleConfig,
    ValidationReport,
    ensemble_curves,
    estimate_rates,
    generate_noise_trajectory,
    propagate,
    validate_statistics,
)
from .spectra import (
    Lorentzian,
    NoiseSpectrum,
    PhononMaterial,
    PhononPiezo,
    PowerLaw,
    Tabulated,
    White,
    autocorrelation,
    default_cutoff,
    eval_spectrum,
    sideband_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # spectra
    "NoiseSpectrum", "White", "Lorentzian", "PhononMaterial", "PhononPiezo",
    "PowerLaw", "Tabulated", "eval_spectrum", "sideband_spectrum",
    "autocorrelation", "default_cutoff",
    # frames
    "DriveGeometry", "RotatingRates", "effective_noise_spectra",
    "rotating_frame_rates", "weak_noise_ratio",
    # labframe
    "EnvelopeConfig", "LabRates", "sigma_z_envelope", "sigma_x_envelope",
    "solve_T1", "solve_T2", "lab_rates", "resonant_T1", "nondriven_rates",
    "driving_modification", "resonant_Tphi_phi0",
    # edsr
    "DriveFields", "EdsrParams", "EdsrRates", "ResonantT1Split", "taylor_F",
    "map_edsr", "edsr_rotating_rates", "edsr_large_detuning_rates",
    "edsr_resonant_T1_split", "environment_rescaling", "edsr_resonant_Tphi",
    "drive_strength_estimate", "drive_field_amplitudes", "gaas_material",
    # oracle
    "OracleConfig", "DecayEstimate", "EnsembleCurves", "ValidationReport",
    "generate_noise_trajectory", "propagate", "ensemble_curves",
    "estimate_rates", "validate_statistics",
    # errors
    "DqeError", "ParameterError", "PreconditionError", "EvaluationError",
    "SolveError", "NoCrossingError", "DivergentRateError",
    "InconclusiveError", "DegeneratePolarizationError",
]
