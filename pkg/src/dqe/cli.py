"""Command-line interface: sweeps, figure presets, and file emission.

    dqe <mode> --config cfg.json [--out PATH] [--seed N] [--preset figK]

Modes
-----
rates   rotating-frame rates from a drive geometry and a noise model
solve   root-solved lab-frame rates from the same inputs
edsr    spin-orbit-qubit operations (dimensionless phonon units, K = 1)
oracle  Monte-Carlo rate estimate for the configured drive and noise
figure  built-in presets fig1..fig7; writes CSV + PNG + meta JSON

Configs are JSON with top-level keys mode, drive, noise, edsr, oracle,
sweep, output, seed. Sweeps name an axis as "<section>.<field>" (for
example "edsr.delta") with start/stop/count and linear or log spacing.
Every run writes a delimited table whose comment header carries the
git-style sha1 of the normalized config, plus a sibling .meta.json that
re-ingests to the identical run configuration.

Exit codes: 0 success, 1 computational failure (the failing grid point is
named on stderr), 2 usage or config error. DQE_THREADS caps sweep
parallelism; output row order always follows the grid.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .edsr import (
    DriveFields,
    EdsrParams,
    drive_strength_estimate,
    edsr_large_detuning_rates,
    edsr_resonant_T1_split,
    edsr_resonant_Tphi,
    edsr_rotating_rates,
    environment_rescaling,
    gaas_material,
)
from .errors import DqeError, ParameterError
from .frames import DriveGeometry, rotating_frame_rates
from .labframe import EnvelopeConfig, lab_rates
from .oracle import OracleConfig, ensemble_curves, estimate_rates
from .plotting import render_panels
from .spectra import Lorentzian, PhononPiezo, PowerLaw, Tabulated, White

__all__ = ["RunConfig", "parse_config", "config_sha1", "run", "main"]

MODES = ("rates", "solve", "edsr", "oracle", "figure")

_REQUIRED = object()


@dataclass(frozen=True)
class RunConfig:
    """Normalized run description; sections are plain dicts with defaults filled."""

    mode: str
    output: dict
    seed: int = 0
    drive: Optional[dict] = None
    noise: Optional[dict] = None
    edsr: Optional[dict] = None
    oracle: Optional[dict] = None
    sweep: Optional[dict] = None

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "seed": self.seed, "output": dict(self.output)}
        for name in ("drive", "noise", "edsr", "oracle", "sweep"):
            section = getattr(self, name)
            if section is not None:
                out[name] = dict(section)
        return out


# ---------------------------------------------------------------------------
# config parsing and normalization


def _num(v, key):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParameterError(f"{key} must be a number")
    return float(v)


def _intval(v, key):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParameterError(f"{key} must be an integer")
    return v


def _strval(v, key):
    if not isinstance(v, str):
        raise ParameterError(f"{key} must be a string")
    return v


def _boolval(v, key):
    if not isinstance(v, bool):
        raise ParameterError(f"{key} must be a boolean")
    return v


def _numlist(v, key):
    if not isinstance(v, (list, tuple)) or not v:
        raise ParameterError(f"{key} must be a nonempty list of numbers")
    return [_num(x, key) for x in v]


def _optional(caster):
    def cast(v, key):
        return None if v is None else caster(v, key)

    return cast


_DRIVE_SPEC = {
    "omega_Z": (_REQUIRED, _num),
    "Omega": (_REQUIRED, _num),
    "nu": (_REQUIRED, _num),
    "phi": (0.0, _num),
    "sigma_inf": (0.0, _num),
    "solve_mode": ("fixed", _strval),
}

_NOISE_COMMON = {
    "kind": (_REQUIRED, _strval),
    "W_x": (0.0, _num),
    "W_y": (0.0, _num),
    "W_z": (0.0, _num),
    "cutoff": (None, _optional(_num)),
}

_NOISE_EXTRAS = {
    "white": {"S0": (1.0, _num)},
    "lorentzian": {
        "Gamma": (2.0 * math.pi, _num),
        "gamma": (1.0, _num),
        "omega_c": (0.0, _num),
    },
    "phonon": {"scale": (1.0, _num), "material": (None, _optional(_strval))},
    "powerlaw": {
        "amplitude": (1.0, _num),
        "exponent": (1.0, _num),
        "ir_cutoff": (None, _optional(_num)),
    },
    "tabulated": {"omegas": (_REQUIRED, _numlist), "values": (_REQUIRED, _numlist)},
}

_EDSR_SPEC = {
    "op": ("rates", _strval),
    "preset": (None, _optional(_strval)),
    "R": (0.01, _num),
    "delta": (0.0, _num),
    "r": (0.0, _num),
    "phi": (0.0, _num),
    "beta": (1000.0, _num),
    "omega_Z": (1.0, _num),
    "sideband_at": ("splitting", _strval),
    "omega_over_Omega": (None, _optional(_num)),
    "omega_d": (None, _optional(_num)),
    "E_x": (None, _optional(_num)),
    "E_y": (0.0, _num),
    "material": (None, _optional(_strval)),
}

_ORACLE_SPEC = {
    "dt": (_REQUIRED, _num),
    "t_max": (_REQUIRED, _num),
    "n_traj": (2000, _intval),
    "initial_state": ("z+", _strval),
    "method": ("crossing", _strval),
    "curves": (False, _boolval),
    "curve_stride": (1, _intval),
}

_SWEEP_SPEC = {
    "axis": (_REQUIRED, _strval),
    "start": (_REQUIRED, _num),
    "stop": (_REQUIRED, _num),
    "count": (_REQUIRED, _intval),
    "spacing": ("linear", _strval),
}

_OUTPUT_SPEC = {"path": (None, _optional(_strval)), "format": ("csv", _strval)}

_SWEEPABLE = {
    "drive": {"omega_Z", "Omega", "nu", "phi", "sigma_inf"},
    "noise": {
        "W_x", "W_y", "W_z", "cutoff", "S0", "Gamma", "gamma", "omega_c",
        "scale", "amplitude", "exponent", "ir_cutoff",
    },
    "edsr": {
        "R", "delta", "r", "phi", "beta", "omega_Z", "omega_over_Omega",
        "omega_d", "E_x", "E_y",
    },
    "oracle": {"dt", "t_max"},
}

_MODE_SECTIONS = {
    "rates": ("drive", "noise"),
    "solve": ("drive", "noise"),
    "edsr": ("edsr",),
    "oracle": ("drive", "noise", "oracle"),
    "figure": ("edsr",),
}


def _normalize(section, spec, name):
    if not isinstance(section, dict):
        raise ParameterError(f"config section '{name}' must be an object")
    unknown = set(section) - set(spec)
    if unknown:
        raise ParameterError(
            f"unknown key(s) in '{name}' section: {', '.join(sorted(unknown))}"
        )
    out = {}
    for key, (default, caster) in spec.items():
        if key in section:
            out[key] = caster(section[key], f"{name}.{key}")
        elif default is _REQUIRED:
            raise ParameterError(f"'{name}.{key}' is required")
        else:
            out[key] = default
    return out


def _normalize_noise(section):
    if not isinstance(section, dict):
        raise ParameterError("config section 'noise' must be an object")
    kind = section.get("kind")
    if kind not in _NOISE_EXTRAS:
        raise ParameterError(
            f"noise.kind must be one of {sorted(_NOISE_EXTRAS)}, got {kind!r}"
        )
    return _normalize(section, {**_NOISE_COMMON, **_NOISE_EXTRAS[kind]}, "noise")


def _normalize_sweep(sweep, rc_sections):
    out = _normalize(sweep, _SWEEP_SPEC, "sweep")
    if out["count"] < 1:
        raise ParameterError("sweep.count must be >= 1")
    if out["spacing"] not in ("linear", "log"):
        raise ParameterError("sweep.spacing must be 'linear' or 'log'")
    if out["spacing"] == "log" and (out["start"] <= 0 or out["stop"] <= 0):
        raise ParameterError("log sweeps require positive endpoints")
    axis = out["axis"]
    if axis.count(".") != 1:
        raise ParameterError(
            "sweep.axis must look like '<section>.<field>', e.g. 'edsr.delta'"
        )
    section, field = axis.split(".")
    if section not in _SWEEPABLE or field not in _SWEEPABLE[section]:
        raise ParameterError(f"'{axis}' is not a sweepable axis")
    if rc_sections.get(section) is None:
        raise ParameterError(
            f"sweep axis '{axis}' refers to a section the config does not use"
        )
    return out


def parse_config(data: dict) -> RunConfig:
    """Validate raw JSON data into a normalized RunConfig.

    Normalization fills every default, so to_dict() output re-parses to an
    identical RunConfig. Raises ParameterError on any structural problem,
    including model-level validation of the configured starting point.
    """
    if not isinstance(data, dict):
        raise ParameterError("config must be a JSON object")
    known = {"mode", "drive", "noise", "edsr", "oracle", "sweep", "output", "seed"}
    unknown = set(data) - known
    if unknown:
        raise ParameterError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    mode = data.get("mode")
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ParameterError("seed must be a nonnegative integer")

    raw = {k: data.get(k) for k in ("drive", "noise", "edsr", "oracle", "sweep")}

    if mode == "figure":
        edsr_raw = dict(raw["edsr"] or {})
        preset = edsr_raw.get("preset")
        if preset not in _PRESETS:
            raise ParameterError(
                f"figure mode needs a preset from {sorted(_PRESETS)}, got {preset!r}"
            )
        spec = _PRESETS[preset]
        edsr_raw = {**spec["base"], "preset": preset, **edsr_raw}
        raw["edsr"] = edsr_raw
        if raw["sweep"] is None:
            axis, start, stop, count, spacing = spec["sweep"]
            raw["sweep"] = {
                "axis": axis, "start": start, "stop": stop,
                "count": count, "spacing": spacing,
            }

    sections = {}
    for name in ("drive", "noise", "edsr", "oracle"):
        if raw[name] is None:
            sections[name] = None
        elif name == "noise":
            sections[name] = _normalize_noise(raw[name])
        else:
            spec = {"drive": _DRIVE_SPEC, "edsr": _EDSR_SPEC,
                    "oracle": _ORACLE_SPEC}[name]
            sections[name] = _normalize(raw[name], spec, name)

    for name in _MODE_SECTIONS[mode]:
        if sections[name] is None:
            raise ParameterError(f"mode '{mode}' requires a '{name}' section")

    sweep = None
    if raw["sweep"] is not None:
        sweep = _normalize_sweep(raw["sweep"], sections)

    output = _normalize(data.get("output", {}), _OUTPUT_SPEC, "output")
    if output["format"] not in ("csv", "json"):
        raise ParameterError("output.format must be 'csv' or 'json'")
    if mode == "figure" and output["format"] != "csv":
        raise ParameterError("figure mode always emits CSV (plus PNG and meta)")
    if output["path"] is None:
        stem = sections["edsr"]["preset"] if mode == "figure" else mode
        ext = ".json" if output["format"] == "json" else ".csv"
        output["path"] = stem + ext

    if sections["oracle"] is not None:
        o = sections["oracle"]
        if o["initial_state"] not in ("z+", "x+"):
            raise ParameterError("oracle.initial_state must be 'z+' or 'x+'")
        if o["method"] not in ("crossing", "expfit"):
            raise ParameterError("oracle.method must be 'crossing' or 'expfit'")
        if o["curves"] and sweep is not None:
            raise ParameterError("oracle curves output requires a single-point run")

    rc = RunConfig(mode=mode, output=output, seed=seed,
                   drive=sections["drive"], noise=sections["noise"],
                   edsr=sections["edsr"], oracle=sections["oracle"], sweep=sweep)
    _dry_build(rc)
    return rc


def _dry_build(rc: RunConfig):
    """Construct the model objects once so config-level problems fail early."""
    probe = _point_config(rc, _grid(rc.sweep)[0]) if rc.sweep else rc
    if probe.mode in ("rates", "solve", "oracle"):
        geom = _geom_from(probe.drive)
        noise = _noise_from(probe.noise)
        if probe.mode == "oracle":
            _oracle_config(probe, geom, noise)
    if probe.mode in ("edsr", "figure"):
        op = probe.edsr["op"] if probe.mode == "edsr" else "rates"
        if op != "rescaling":
            _edsr_params(probe.edsr)
        if op == "estimate":
            _estimate_params(probe.edsr)


def config_sha1(rc: RunConfig) -> str:
    """Git-style sha1 (blob hash) of the canonical JSON form of the config."""
    body = json.dumps(rc.to_dict(), sort_keys=True,
                      separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\x00" % len(body) + body).hexdigest()


# ---------------------------------------------------------------------------
# building model objects from sections


def _geom_from(d) -> DriveGeometry:
    return DriveGeometry(omega_Z=d["omega_Z"], Omega=d["Omega"],
                         nu=d["nu"], phi=d["phi"])


def _noise_from(d):
    common = {k: d[k] for k in ("W_x", "W_y", "W_z", "cutoff")}
    kind = d["kind"]
    if kind == "white":
        return White(S0=d["S0"], **common)
    if kind == "lorentzian":
        return Lorentzian(Gamma=d["Gamma"], gamma=d["gamma"],
                          omega_c=d["omega_c"], **common)
    if kind == "phonon":
        if d["material"] is None:
            return PhononPiezo(scale=d["scale"], **common)
        if d["material"] != "gaas":
            raise ParameterError(f"unknown material {d['material']!r}; "
                                 "only 'gaas' ships with the package")
        return PhononPiezo(dimensionless=False, material=gaas_material(),
                           scale=d["scale"], **common)
    if kind == "powerlaw":
        return PowerLaw(amplitude=d["amplitude"], exponent=d["exponent"],
                        ir_cutoff=d["ir_cutoff"], **common)
    return Tabulated(omegas=tuple(d["omegas"]), values=tuple(d["values"]),
                     **common)


def _edsr_params(d, **overrides) -> EdsrParams:
    kw = {k: d[k] for k in ("R", "delta", "r", "phi", "beta", "omega_Z")}
    kw.update(overrides)
    return EdsrParams(**kw)


def _estimate_params(d) -> EdsrParams:
    if d["E_x"] is None or d["omega_d"] is None:
        raise ParameterError("edsr op 'estimate' needs E_x (V/m) and omega_d (rad/s)")
    return EdsrParams(
        R=d["R"], delta=d["delta"], r=d["r"], phi=d["phi"], beta=d["beta"],
        omega_Z=d["omega_Z"], omega_d=d["omega_d"],
        fields_=DriveFields(E_x=d["E_x"], E_y=d["E_y"]),
    )


def _oracle_config(rc: RunConfig, geom, noise) -> OracleConfig:
    o = rc.oracle
    return OracleConfig(geom=geom, noise=noise, dt=o["dt"], t_max=o["t_max"],
                        n_traj=o["n_traj"], seed=rc.seed,
                        initial_state=o["initial_state"])


# ---------------------------------------------------------------------------
# evaluation


def _grid(sweep) -> np.ndarray:
    if sweep is None:
        return np.asarray([math.nan])
    if sweep["count"] == 1:
        return np.asarray([sweep["start"]])
    if sweep["spacing"] == "log":
        return np.geomspace(sweep["start"], sweep["stop"], sweep["count"])
    return np.linspace(sweep["start"], sweep["stop"], sweep["count"])


def _point_config(rc: RunConfig, value) -> RunConfig:
    if rc.sweep is None:
        return rc
    section, field = rc.sweep["axis"].split(".")
    patched = dict(getattr(rc, section))
    patched[field] = float(value)
    return dataclasses.replace(rc, **{section: patched})


_EDSR_OPS = ("rates", "resonant_split", "resonant_Tphi", "large_detuning",
             "rescaling", "estimate")


def _eval_edsr(d) -> dict:
    op = d["op"]
    if op == "rates":
        er = edsr_rotating_rates(_edsr_params(d), sideband_at=d["sideband_at"])
        return {"inv_T1p": er.inv_T1p, "inv_Tphip": er.inv_Tphip,
                "inv_T2p": er.inv_T2p}
    if op == "resonant_split":
        split = edsr_resonant_T1_split(_edsr_params(d))
        return split._asdict()
    if op == "resonant_Tphi":
        return {"inv_Tphi": edsr_resonant_Tphi(_edsr_params(d))}
    if op == "large_detuning":
        t1, tphi = edsr_large_detuning_rates(_edsr_params(d))
        return {"inv_T1p_approx": t1, "inv_Tphip_approx": tphi}
    if op == "rescaling":
        if d["omega_over_Omega"] is None:
            raise ParameterError("edsr op 'rescaling' needs omega_over_Omega")
        omega_drive = d["R"] * d["omega_Z"]
        return {"rescaling": environment_rescaling(
            d["omega_over_Omega"] * omega_drive, omega_drive, d["r"], d["phi"])}
    if op == "estimate":
        return {"R_estimate": drive_strength_estimate(_estimate_params(d))}
    raise ParameterError(f"edsr.op must be one of {_EDSR_OPS}, got {op!r}")


def _eval_point(rc: RunConfig) -> dict:
    if rc.mode == "rates":
        rr = rotating_frame_rates(_geom_from(rc.drive), _noise_from(rc.noise))
        return {"inv_T1p": rr.inv_T1p, "inv_Tphip": rr.inv_Tphip,
                "inv_T2p": rr.inv_T2p}
    if rc.mode == "solve":
        geom = _geom_from(rc.drive)
        rr = rotating_frame_rates(geom, _noise_from(rc.noise))
        cfg = EnvelopeConfig(geom=geom, rates=rr,
                             sigma_inf=rc.drive["sigma_inf"])
        lr = lab_rates(cfg, mode=rc.drive["solve_mode"])
        return {"inv_T1": lr.inv_T1, "inv_T2": lr.inv_T2,
                "inv_Tphi": lr.inv_Tphi}
    if rc.mode == "edsr":
        return _eval_edsr(rc.edsr)
    if rc.mode == "oracle":
        geom = _geom_from(rc.drive)
        est = estimate_rates(_oracle_config(rc, geom, _noise_from(rc.noise)),
                             method=rc.oracle["method"])
        return {"rate": est.rate, "stderr": est.stderr, "fit_kind": est.fit_kind}
    raise ParameterError(f"cannot evaluate mode {rc.mode!r}")


class _GridPointFailure(Exception):
    pass


def _n_threads() -> int:
    raw = os.environ.get("DQE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"DQE_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise ParameterError("DQE_THREADS must be >= 1")
    return n


def _pmap(fn, values):
    """Ordered map over grid values, parallel when DQE_THREADS > 1."""
    threads = _n_threads()
    if threads == 1 or len(values) <= 1:
        return [fn(v) for v in values]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, values))


# ---------------------------------------------------------------------------
# output


_UNITS = {
    "rates": "angular frequencies/rates in rad per unit time (hbar = 1); phi in rad",
    "solve": "angular frequencies/rates in rad per unit time (hbar = 1); phi in rad",
    "edsr": "dimensionless phonon units (K = 1, frequencies relative to omega_Z)",
    "oracle": "rates in rad per unit time (hbar = 1); stderr same units",
    "figure": "dimensionless phonon units (K = 1, frequencies relative to omega_Z)",
}


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _plain(v):
    if isinstance(v, (str, bool, int)):
        return v
    if isinstance(v, (np.bool_, np.integer)):
        return v.item()
    return float(v)


def _write_csv(path, rc, columns, rows):
    lines = [
        f"# dqe {rc.mode} results",
        f"# config-sha1: {config_sha1(rc)}",
        f"# units: {_UNITS[rc.mode]}",
        ",".join(columns),
    ]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json_rows(path, rc, columns, rows):
    doc = {
        "metadata": {"run_config": rc.to_dict(), "config_sha1": config_sha1(rc),
                     "units": _UNITS[rc.mode]},
        "columns": list(columns),
        "rows": [[_plain(v) for v in row] for row in rows],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _meta_path(out_path: str) -> str:
    stem, _ = os.path.splitext(out_path)
    return stem + ".meta.json"


def _write_meta(rc: RunConfig, out_path, extra=None):
    doc = {"run_config": rc.to_dict(), "config_sha1": config_sha1(rc),
           "units": _UNITS[rc.mode]}
    doc.update(extra or {})
    path = _meta_path(out_path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# figure presets

_PI = math.pi

_PRESETS = {
    "fig1": {
        "base": {"R": 0.05, "phi": 0.0},
        "sweep": ("edsr.delta", -0.5, 0.5, 201, "linear"),
        "curves": [("r=0", {"r": 0.0}), ("r=0.5", {"r": 0.5}),
                   ("r=0.9", {"r": 0.9})],
        "op": "rates",
        "quantities": ("inv_T1p", "inv_Tphip"),
        "panels": {"inv_T1p": "log", "inv_Tphip": "log"},
        "xlabel": "relative detuning delta",
        "xscale": "linear",
        "title": "Rotating-frame rates vs detuning (R = 0.05)",
        "note": "delta range [-0.5, 0.5] is a preset choice",
    },
    "fig2": {
        "base": {"delta": 0.0},
        "sweep": ("edsr.R", 1e-3, 1e-1, 61, "log"),
        "curves": [
            ("r=0.05 phi=0", {"r": 0.05, "phi": 0.0}),
            ("r=0.05 phi=pi/4", {"r": 0.05, "phi": _PI / 4}),
            ("r=0.05 phi=pi/2", {"r": 0.05, "phi": _PI / 2}),
            ("r=0.8 phi=0", {"r": 0.8, "phi": 0.0}),
            ("r=0.8 phi=pi/4", {"r": 0.8, "phi": _PI / 4}),
            ("r=0.8 phi=pi/2", {"r": 0.8, "phi": _PI / 2}),
        ],
        "op": "resonant_split",
        "quantities": ("ratio",),
        "panels": {"ratio": "linear"},
        "xlabel": "relative drive strength R",
        "xscale": "log",
        "title": "Resonant driven-to-static relaxation ratio",
        "note": "",
    },
    "fig3": {
        "base": {"R": 0.01, "delta": 0.0},
        "sweep": ("edsr.phi", 0.0, _PI, 81, "linear"),
        "curves": [("r=0", {"r": 0.0}), ("r=0.5", {"r": 0.5}),
                   ("r=0.9", {"r": 0.9})],
        "op": "resonant_split",
        "quantities": ("total", "sideband"),
        "panels": {"total": "linear", "sideband": "linear"},
        "xlabel": "drive polarization angle phi (rad)",
        "xscale": "linear",
        "title": "Resonant relaxation vs polarization angle (R = 0.01)",
        "note": "phi range [0, pi] is a preset choice",
    },
    "fig4": {
        "base": {},
        "sweep": ("edsr.omega_over_Omega", 1.0, 1e3, 121, "log"),
        "curves": [
            ("r=0", {"r": 0.0, "phi": 0.0}),
            ("r=0.5 phi=0", {"r": 0.5, "phi": 0.0}),
            ("r=0.5 phi=pi/2", {"r": 0.5, "phi": _PI / 2}),
            ("r=1 phi=0", {"r": 1.0, "phi": 0.0}),
            ("r=1 phi=pi/2", {"r": 1.0, "phi": _PI / 2}),
        ],
        "op": "rescaling",
        "quantities": ("rescaling",),
        "panels": {"rescaling": "linear"},
        "xlabel": "frequency ratio omega/Omega",
        "xscale": "log",
        "title": "Driven-environment spectral rescaling",
        "note": "",
    },
    "fig5": {
        "base": {"R": 0.01, "delta": 0.0, "phi": 0.0},
        "sweep": ("edsr.R", 1e-3, 1e-1, 61, "log"),
        "curves": [("r=0", {"r": 0.0}), ("r=0.5", {"r": 0.5}),
                   ("r=1", {"r": 1.0})],
        "op": "resonant_Tphi",
        "quantities": ("inv_Tphi",),
        "panels": {"inv_Tphi": "log"},
        "xlabel": "relative drive strength R",
        "xscale": "log",
        "title": "Resonant dephasing rate vs drive strength",
        "note": "",
    },
    "fig6": {
        "base": {"R": 0.01},
        "sweep": ("edsr.delta", -0.5, 0.5, 201, "linear"),
        "curves": [
            ("r=0 phi=0", {"r": 0.0, "phi": 0.0}),
            ("r=0.5 phi=0", {"r": 0.5, "phi": 0.0}),
            ("r=0.9 phi=0", {"r": 0.9, "phi": 0.0}),
            ("r=0.9 phi=pi/4", {"r": 0.9, "phi": _PI / 4}),
            ("r=0.9 phi=pi/2", {"r": 0.9, "phi": _PI / 2}),
        ],
        "op": "rates_with_ratio",
        "quantities": ("inv_T1p", "t1_ratio"),
        "panels": {"inv_T1p": "log", "t1_ratio": "linear"},
        "xlabel": "relative detuning delta",
        "xscale": "linear",
        "title": "Off-resonant relaxation and driven-to-static ratio (R = 0.01)",
        "note": "delta range [-0.5, 0.5] is a preset choice; t1_ratio divides "
                "by the static-qubit rate 4K(1+r^2)",
    },
    "fig7": {
        "base": {"R": 0.001, "phi": 0.0},
        "sweep": ("edsr.delta", -0.5, 0.5, 201, "linear"),
        "curves": [("r=0", {"r": 0.0}), ("r=0.5", {"r": 0.5}),
                   ("r=0.9", {"r": 0.9})],
        "op": "rates",
        "quantities": ("inv_Tphip",),
        "panels": {"inv_Tphip": "log"},
        "xlabel": "relative detuning delta",
        "xscale": "linear",
        "title": "Off-resonant dephasing vs detuning (R = 0.001)",
        "note": "delta range [-0.5, 0.5] is a preset choice",
    },
}


def _eval_figure_point(d, op) -> dict:
    if op == "rates_with_ratio":
        er = edsr_rotating_rates(_edsr_params(d), sideband_at=d["sideband_at"])
        static = 4.0 * (1.0 + d["r"] ** 2)
        return {"inv_T1p": er.inv_T1p, "t1_ratio": er.inv_T1p / static}
    return _eval_edsr({**d, "op": op})


def _run_figure(rc: RunConfig):
    spec = _PRESETS[rc.edsr["preset"]]
    grid = _grid(rc.sweep)
    axis_field = rc.sweep["axis"].split(".")[1]

    def eval_value(value):
        row = {}
        for label, overrides in spec["curves"]:
            d = {**rc.edsr, **overrides, axis_field: float(value)}
            try:
                vals = _eval_figure_point(d, spec["op"])
            except DqeError as exc:
                raise _GridPointFailure(
                    f"{rc.sweep['axis']} = {float(value)!r} ({label}): {exc}"
                ) from exc
            for q in spec["quantities"]:
                row[f"{q}[{label}]"] = vals[q]
        return row

    results = _pmap(eval_value, list(grid))

    columns = [rc.sweep["axis"]]
    for q in spec["quantities"]:
        columns.extend(f"{q}[{label}]" for label, _ in spec["curves"])
    rows = [[float(x)] + [res[c] for c in columns[1:]]
            for x, res in zip(grid, results)]

    out_path = rc.output["path"]
    _write_csv(out_path, rc, columns, rows)

    panels = []
    for q in spec["quantities"]:
        series = [
            (label, np.asarray([res[f"{q}[{label}]"] for res in results]))
            for label, _ in spec["curves"]
        ]
        panels.append({"ylabel": q, "yscale": spec["panels"][q],
                       "series": series})
    png_path = os.path.splitext(out_path)[0] + ".png"
    render_panels(np.asarray(grid), panels, xlabel=spec["xlabel"],
                  title=spec["title"], xscale=spec["xscale"], path=png_path)

    meta_path = _write_meta(rc, out_path, {
        "preset": rc.edsr["preset"],
        "title": spec["title"],
        "columns": columns,
        "png": png_path,
        "note": spec["note"],
    })
    print(f"wrote {out_path} ({len(rows)} rows), {png_path}, {meta_path}")


# ---------------------------------------------------------------------------
# entry points


def _run_sweep(rc: RunConfig):
    grid = _grid(rc.sweep)

    def eval_value(value):
        point = _point_config(rc, value)
        try:
            return _eval_point(point)
        except DqeError as exc:
            if rc.sweep is None:
                raise _GridPointFailure(f"the configured point: {exc}") from exc
            raise _GridPointFailure(
                f"{rc.sweep['axis']} = {float(value)!r}: {exc}"
            ) from exc

    results = _pmap(eval_value, list(grid))

    columns = list(results[0].keys())
    rows = [list(res.values()) for res in results]
    if rc.sweep is not None:
        columns = [rc.sweep["axis"]] + columns
        rows = [[float(x)] + row for x, row in zip(grid, rows)]

    out_path = rc.output["path"]
    if rc.output["format"] == "json":
        _write_json_rows(out_path, rc, columns, rows)
    else:
        _write_csv(out_path, rc, columns, rows)
    meta_path = _write_meta(rc, out_path)
    written = [f"{out_path} ({len(rows)} rows)", meta_path]

    if rc.mode == "oracle" and rc.oracle["curves"]:
        geom = _geom_from(rc.drive)
        curves = ensemble_curves(_oracle_config(rc, geom, _noise_from(rc.noise)),
                                 stride=rc.oracle["curve_stride"])
        curve_cols = ["t", "sx", "sy", "sz", "sx_err", "sy_err", "sz_err"]
        curve_rows = list(zip(curves.t, curves.sx, curves.sy, curves.sz,
                              curves.sx_err, curves.sy_err, curves.sz_err))
        curve_path = os.path.splitext(out_path)[0] + "_curves.csv"
        _write_csv(curve_path, rc, curve_cols, curve_rows)
        written.append(curve_path)

    print("wrote " + ", ".join(written))


def run(rc: RunConfig) -> int:
    """Execute a parsed RunConfig; returns the process exit status."""
    try:
        if rc.mode == "figure":
            _run_figure(rc)
        else:
            _run_sweep(rc)
        return 0
    except _GridPointFailure as exc:
        print(f"dqe: computational failure at {exc}", file=sys.stderr)
        return 1
    except DqeError as exc:
        print(f"dqe: computational failure: {exc}", file=sys.stderr)
        return 1


_EPILOG = """\
output columns
  rates    <axis>, inv_T1p, inv_Tphip, inv_T2p
  solve    <axis>, inv_T1, inv_T2, inv_Tphi
  edsr     depends on edsr.op:
             rates           inv_T1p, inv_Tphip, inv_T2p
             resonant_split  zeeman, sideband, total, nondriven, ratio
             resonant_Tphi   inv_Tphi
             large_detuning  inv_T1p_approx, inv_Tphip_approx
             rescaling       rescaling        (needs edsr.omega_over_Omega)
             estimate        R_estimate       (needs edsr.E_x, edsr.omega_d)
  oracle   rate, stderr, fit_kind; with oracle.curves=true also a
           *_curves.csv with t, sx, sy, sz, sx_err, sy_err, sz_err
  figure   <axis> plus one column per preset curve; also writes a PNG render
           and a .meta.json; presets: fig1..fig7

config sketch (JSON)
  {"mode": "rates",
   "drive": {"omega_Z": 1.0, "Omega": 0.1, "nu": 1.0, "phi": 0.0},
   "noise": {"kind": "white", "S0": 1.0, "W_x": 1e-3, "W_y": 1e-3,
              "cutoff": 2.5},
   "sweep": {"axis": "drive.nu", "start": 0.5, "stop": 1.5, "count": 101,
              "spacing": "linear"},
   "output": {"path": "rates.csv", "format": "csv"},
   "seed": 0}
  noise kinds: white (S0), lorentzian (Gamma, gamma, omega_c),
  phonon (scale, material), powerlaw (amplitude, exponent, ir_cutoff),
  tabulated (omegas, values); all carry W_x, W_y, W_z, cutoff.
  drive extras for solve mode: sigma_inf, solve_mode (fixed|general).
  oracle section: dt, t_max, n_traj, initial_state (z+|x+),
  method (crossing|expfit), curves, curve_stride.

environment
  DQE_THREADS   caps sweep parallelism (default 1); output row order is
                always grid order, so results are identical at any setting

exit codes
  0 success; 1 computational failure (failing grid point named on stderr);
  2 usage or config error
"""


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="dqe",
        description="Decoherence rates of driven qubits: analytic sweeps, "
                    "figure presets, and a Monte-Carlo cross-check.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", help="path to a JSON run config")
    parser.add_argument("--out", help="output path (overrides output.path)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--preset", help="figure preset name (fig1..fig7)")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            with open(args.config, "r", encoding="utf-8") as fh:
                data = json.load(fh)
            if not isinstance(data, dict):
                raise ParameterError("config must be a JSON object")
        else:
            data = {}
        if "mode" in data and data["mode"] != args.mode:
            raise ParameterError(
                f"config mode {data['mode']!r} does not match "
                f"command-line mode {args.mode!r}"
            )
        data["mode"] = args.mode
        if args.preset is not None:
            if args.mode != "figure":
                raise ParameterError("--preset only applies to figure mode")
            data.setdefault("edsr", {})["preset"] = args.preset
        if args.seed is not None:
            if args.seed < 0:
                raise ParameterError("--seed must be nonnegative")
            data["seed"] = args.seed
        if args.out is not None:
            data.setdefault("output", {})["path"] = args.out
        _n_threads()
        rc = parse_config(data)
    except (ParameterError, OSError, json.JSONDecodeError) as exc:
        print(f"dqe: config error: {exc}", file=sys.stderr)
        sys.exit(2)

    sys.exit(run(rc))


if __name__ == "__main__":
    main()
