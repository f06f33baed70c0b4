"""JSON run configuration.

Every physical quantity carries its unit in the field name. Example (all
fields optional, defaults shown)::

    {
      "coupler": {
        "coupling_per_m": 33.0,
        "length_m": 0.0475,
        "gamma": 1.0,
        "pump_amplitude_1": 1.0,
        "pump_amplitude_2": 1.0,
        "pump_phase_difference_rad": 0.0,
        "mismatch_per_m": 0.0
      },
      "dispersion": {
        "curvature_s2_per_m": null,
        "phase_matching_bandwidth_fraction": 0.25
      },
      "profile": {"model": "default"},
      "filter": {"filter_center_nm": 1342.0, "filter_fwhm_nm": 12.0, "pump_omega_rad_per_s": null},
      "spectral": {"grid_points": 101, "grid_span_fwhm": 1.5,
                   "integration_steps": 2000, "convergence_check": true},
      "sweep": {
        "delta_phi_over_pi": {"start": -1.0, "stop": 1.0, "num": 21},
        "delta_beta_over_c": {"start": -8.0, "stop": 8.0, "num": 21}
      },
      "output": {"format": "csv"}
    }

``profile.model`` is ``default`` (bundled approximate oven profile),
``homogeneous`` or ``polynomial`` (then ``coefficients`` lists delta_beta/c
in ascending powers of z/L). A null dispersion curvature is derived from the
filter: the phase-matching bandwidth is ``phase_matching_bandwidth_fraction``
times the filter FWHM (see ``DispersionModel.from_bandwidth``).
Sweep axes are either ``{"start", "stop", "num"}`` or an explicit list;
``delta_phi_rad`` may be given instead of ``delta_phi_over_pi``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytic import SweepGrid
from .errors import ConfigError
from .filtering import FilterSpec
from .propagation import DEFAULT_STEPS, MIN_STEPS, DispersionModel, InhomogeneityProfile
from .state import CouplerConfig

OUTPUT_FORMATS = ("csv", "json")

DEFAULTS = {
    "coupler": {
        "coupling_per_m": 33.0,
        "length_m": 0.0475,
        "gamma": 1.0,
        "pump_amplitude_1": 1.0,
        "pump_amplitude_2": 1.0,
        "pump_phase_difference_rad": 0.0,
        "mismatch_per_m": 0.0,
    },
    "dispersion": {"curvature_s2_per_m": None, "phase_matching_bandwidth_fraction": 0.25},
    "profile": {"model": "default"},
    "filter": {"filter_center_nm": 1342.0, "filter_fwhm_nm": 12.0, "pump_omega_rad_per_s": None},
    "spectral": {
        "grid_points": 101,
        "grid_span_fwhm": 1.5,
        "integration_steps": DEFAULT_STEPS,
        "convergence_check": True,
    },
    "sweep": {
        "delta_phi_over_pi": {"start": -1.0, "stop": 1.0, "num": 21},
        "delta_beta_over_c": {"start": -8.0, "stop": 8.0, "num": 21},
    },
    "output": {"format": "csv"},
}


@dataclass(frozen=True)
class SpectralSettings:
    grid_points: int = 101
    grid_span_fwhm: float = 1.5
    integration_steps: int = DEFAULT_STEPS
    convergence_check: bool = True


@dataclass(frozen=True)
class RunConfig:
    coupler: CouplerConfig
    dispersion: DispersionModel
    profile: InhomogeneityProfile
    filter: FilterSpec
    sweep: SweepGrid
    spectral: SpectralSettings
    output_format: str = "csv"
    echo: dict = None

    @classmethod
    def default(cls) -> "RunConfig":
        return parse_config({})


def _merge(base: dict, override: dict, path: str, errors: list) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base and not (path == "profile" and key == "coefficients"):
            errors.append(f"{where}: unknown field")
        elif isinstance(base.get(key), dict):
            if isinstance(value, dict):
                out[key] = _merge(base[key], value, where, errors)
            else:
                errors.append(f"{where}: expected an object")
        else:
            out[key] = value
    return out


def _number(section: dict, key: str, where: str, errors: list, allow_none=False):
    value = section.get(key)
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        errors.append(f"{where}.{key}: expected a finite number, got {value!r}")
        return None
    return float(value)


def _axis(spec, where: str, errors: list):
    if isinstance(spec, list):
        vals = []
        for v in spec:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                errors.append(f"{where}: list entries must be finite numbers")
                return None
            vals.append(float(v))
        if not vals:
            errors.append(f"{where}: axis is empty")
            return None
        return vals
    if isinstance(spec, dict):
        if set(spec) - {"start", "stop", "num"} or not {"start", "stop", "num"} <= set(spec):
            errors.append(f"{where}: range needs exactly the keys start, stop, num")
            return None
        start = _number(spec, "start", where, errors)
        stop = _number(spec, "stop", where, errors)
        num = spec["num"]
        if isinstance(num, bool) or not isinstance(num, int) or num < 1:
            errors.append(f"{where}.num: expected a positive integer")
            return None
        if start is None or stop is None:
            return None
        return [float(v) for v in np.linspace(start, stop, num)]
    errors.append(f"{where}: expected a list or a start/stop/num range")
    return None


def parse_config(raw: dict) -> RunConfig:
    """Validate a config document; raises ConfigError listing every bad field."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    errors: list = []
    doc = _merge({k: v for k, v in DEFAULTS.items() if k != "sweep"},
                 {k: v for k, v in raw.items() if k != "sweep"}, "", errors)
    sweep_raw = raw.get("sweep", {})
    if not isinstance(sweep_raw, dict):
        errors.append("sweep: expected an object")
        sweep_raw = {}
    doc["sweep"] = dict(sweep_raw)
    doc["sweep"].setdefault("delta_beta_over_c", DEFAULTS["sweep"]["delta_beta_over_c"])
    if "delta_phi_rad" not in doc["sweep"]:
        doc["sweep"].setdefault("delta_phi_over_pi", DEFAULTS["sweep"]["delta_phi_over_pi"])

    cp = doc["coupler"]
    nums = {k: _number(cp, k, "coupler", errors) for k in DEFAULTS["coupler"]}
    coupler = None
    if None not in nums.values():
        checks = [
            ("coupling_per_m", nums["coupling_per_m"] > 0, "must be > 0"),
            ("length_m", nums["length_m"] > 0, "must be > 0"),
            ("gamma", nums["gamma"] >= 0, "must be >= 0"),
            ("pump_amplitude_1", nums["pump_amplitude_1"] >= 0, "must be >= 0"),
            ("pump_amplitude_2", nums["pump_amplitude_2"] >= 0, "must be >= 0"),
        ]
        bad = [f"coupler.{k}: {msg}" for k, ok, msg in checks if not ok]
        errors.extend(bad)
        if not bad:
            coupler = CouplerConfig(
                c=nums["coupling_per_m"],
                L=nums["length_m"],
                gamma=nums["gamma"],
                A1=nums["pump_amplitude_1"],
                A2=nums["pump_amplitude_2"],
                delta_phi=nums["pump_phase_difference_rad"],
                delta_beta0=nums["mismatch_per_m"],
            )

    fl = doc["filter"]
    center = _number(fl, "filter_center_nm", "filter", errors)
    fwhm = _number(fl, "filter_fwhm_nm", "filter", errors)
    pump = _number(fl, "pump_omega_rad_per_s", "filter", errors, allow_none=True)
    spec = None
    if center is not None and fwhm is not None:
        try:
            spec = FilterSpec.from_wavelength(center, fwhm, pump)
        except ValueError as exc:
            errors.append(f"filter: {exc}")

    dp = doc["dispersion"]
    curv = _number(dp, "curvature_s2_per_m", "dispersion", errors, allow_none=True)
    frac = _number(dp, "phase_matching_bandwidth_fraction", "dispersion", errors)
    if frac is not None and frac <= 0:
        errors.append("dispersion.phase_matching_bandwidth_fraction: must be > 0")
    if curv is not None and curv < 0:
        errors.append("dispersion.curvature_s2_per_m: must be >= 0")
    dispersion = None
    if spec is not None and coupler is not None and frac is not None and frac > 0:
        if curv is None:
            dispersion = DispersionModel.from_bandwidth(coupler.L, spec.omega0, frac * spec.fwhm)
        else:
            dispersion = DispersionModel(curv, spec.omega0)

    pr = doc["profile"]
    model = pr.get("model")
    profile = None
    if model == "default":
        profile = InhomogeneityProfile.default()
    elif model == "homogeneous":
        profile = InhomogeneityProfile.homogeneous()
    elif model == "polynomial":
        coeffs = pr.get("coefficients")
        if not isinstance(coeffs, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in coeffs
        ):
            errors.append("profile.coefficients: expected a list of finite numbers")
        else:
            profile = InhomogeneityProfile(tuple(coeffs))
    else:
        errors.append(f"profile.model: expected 'default', 'homogeneous' or 'polynomial', got {model!r}")

    sp = doc["spectral"]
    points, steps, check = sp.get("grid_points"), sp.get("integration_steps"), sp.get("convergence_check")
    span = _number(sp, "grid_span_fwhm", "spectral", errors)
    if isinstance(points, bool) or not isinstance(points, int) or points < 1 or points % 2 == 0:
        errors.append("spectral.grid_points: expected an odd positive integer")
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < MIN_STEPS:
        errors.append(f"spectral.integration_steps: expected an integer >= {MIN_STEPS}")
    if not isinstance(check, bool):
        errors.append("spectral.convergence_check: expected true or false")
    if span is not None and span <= 0:
        errors.append("spectral.grid_span_fwhm: must be > 0")

    sw = doc["sweep"]
    grid = None
    phis = None
    if "delta_phi_over_pi" in sw and "delta_phi_rad" in sw:
        errors.append("sweep: give only one of delta_phi_over_pi and delta_phi_rad")
    elif "delta_phi_rad" in sw:
        phis = _axis(sw["delta_phi_rad"], "sweep.delta_phi_rad", errors)
    else:
        over = _axis(sw["delta_phi_over_pi"], "sweep.delta_phi_over_pi", errors)
        phis = None if over is None else [v * math.pi for v in over]
    betas = _axis(sw["delta_beta_over_c"], "sweep.delta_beta_over_c", errors)
    extra = set(sw) - {"delta_phi_over_pi", "delta_phi_rad", "delta_beta_over_c"}
    for k in sorted(extra):
        errors.append(f"sweep.{k}: unknown field")
    if phis is not None and betas is not None:
        grid = SweepGrid(tuple(phis), tuple(betas))

    fmt = doc["output"].get("format")
    if fmt not in OUTPUT_FORMATS:
        errors.append(f"output.format: expected one of {', '.join(OUTPUT_FORMATS)}, got {fmt!r}")

    if errors:
        raise ConfigError(errors)

    run = RunConfig(
        coupler=coupler,
        dispersion=dispersion,
        profile=profile,
        filter=spec,
        sweep=grid,
        spectral=SpectralSettings(points, span, steps, check),
        output_format=fmt,
    )
    object.__setattr__(run, "echo", echo_config(run, doc))
    return run


def echo_config(run: RunConfig, doc: dict) -> dict:
    """Fully resolved config document; feeding it back reproduces the run exactly."""
    c = run.coupler
    return {
        "coupler": {
            "coupling_per_m": c.c,
            "length_m": c.L,
            "gamma": c.gamma,
            "pump_amplitude_1": c.A1,
            "pump_amplitude_2": c.A2,
            "pump_phase_difference_rad": c.delta_phi,
            "mismatch_per_m": c.delta_beta0,
        },
        "dispersion": {
            "curvature_s2_per_m": run.dispersion.curvature,
            "phase_matching_bandwidth_fraction": doc["dispersion"]["phase_matching_bandwidth_fraction"],
        },
        "profile": {"model": "polynomial", "coefficients": list(run.profile.coefficients)},
        "filter": {
            "filter_center_nm": doc["filter"]["filter_center_nm"],
            "filter_fwhm_nm": doc["filter"]["filter_fwhm_nm"],
            "pump_omega_rad_per_s": run.filter.pump_omega,
        },
        "spectral": {
            "grid_points": run.spectral.grid_points,
            "grid_span_fwhm": run.spectral.grid_span_fwhm,
            "integration_steps": run.spectral.integration_steps,
            "convergence_check": run.spectral.convergence_check,
        },
        "sweep": {
            "delta_phi_rad": list(run.sweep.delta_phi_values),
            "delta_beta_over_c": list(run.sweep.delta_beta_over_c_values),
        },
        "output": {"format": run.output_format},
    }


def load_config(path) -> RunConfig:
    """Read and validate a JSON config file (None gives the defaults)."""
    if path is None:
        return RunConfig.default()
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_config(raw)
