"""Command-line entry point.

    nlcoupler [--config PATH] [--out DIR] [--threads N] [--seed S] COMMAND ...

Commands: sweep, state, tomography, emit-plots, validate-config.
Exit codes: 0 success, 2 config/argument error, 3 I/O error,
4 numerical or convergence error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import QUANTITIES, solve_waveguide, steering_dominance, sweep, point_observables
from .config import RunConfig, load_config
from .errors import AccuracyError, ConfigError, CouplerError, DegenerateStateError
from .filtering import reduced_density_matrix
from .metrics import concurrence, fidelity, purity
from .numeric_map import sweep_filtered
from .plots import PlotError, emit_plots
from .propagation import frequency_grid, integrate_spectrum
from .state import (
    BASIS_LABELS,
    BiphotonState,
    bell_phi_plus,
    gauge_fixed,
    noon_psi_minus,
    product_state,
    pure_density_matrix,
)
from .tomography import linear_inversion, mle_fit, simulate_counts, standard_measurement_set

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
SIGNATURE_TOL = 1e-3
STEERING_RATIO = 0.9

# name -> (delta_phi / pi, delta_beta / c, ideal target or None for "the state itself")
TARGETS = {
    "noon": (1.0, 0.0, noon_psi_minus),
    "bell": (0.0, 0.0, bell_phi_plus),
    "factorizable": (0.0, 2.0, product_state),
    "steering": (-0.53, -5.0, None),
    "config": (None, None, None),
}


def fmt(x) -> str:
    """Shortest round-trip representation of a double; NaN as 'nan'."""
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def write_text(path: Path, text: str) -> str:
    path.write_text(text, encoding="utf-8", newline="\n")
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _jsonable(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    return x


def write_manifest(out: Path, command: str, run: RunConfig, files: dict, started: float, extra=None):
    manifest = {
        "command": command,
        "version": __version__,
        "config": run.echo,
        "files": dict(sorted(files.items())),
        "timing": {
            "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "runtime_s": round(time.perf_counter() - started, 3),
        },
    }
    if extra:
        manifest.update(extra)
    write_text(out / "manifest.json", dump_json(manifest))


def map_csv(cmap, quantity: str) -> str:
    lines = ["delta_phi,delta_beta_over_c,value"]
    values = cmap.quantity(quantity)
    for i, phi in enumerate(cmap.grid.delta_phi_values):
        for j, beta in enumerate(cmap.grid.delta_beta_over_c_values):
            lines.append(f"{fmt(phi)},{fmt(beta)},{fmt(values[i, j])}")
    return "\n".join(lines) + "\n"


def matrix_csv(m: np.ndarray) -> str:
    lines = ["row," + ",".join(BASIS_LABELS)]
    for label, row in zip(BASIS_LABELS, m):
        lines.append(label + "," + ",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _prepare_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_sweep(args, run: RunConfig) -> int:
    started = time.perf_counter()
    out = _prepare_out(args)
    if args.mode == "analytic":
        cmap = sweep(run.coupler, run.sweep, threads=args.threads)
    else:
        s = run.spectral
        cmap = sweep_filtered(
            run.coupler, run.dispersion, run.profile, run.filter, run.sweep,
            points=s.grid_points, span=s.grid_span_fwhm, steps=s.integration_steps,
            check=s.convergence_check, threads=args.threads,
        )
    files = {}
    if run.output_format == "csv":
        for q in QUANTITIES:
            files[f"{q}.csv"] = write_text(out / f"{q}.csv", map_csv(cmap, q))
    else:
        doc = {
            "delta_phi": list(run.sweep.delta_phi_values),
            "delta_beta_over_c": list(run.sweep.delta_beta_over_c_values),
        }
        for q in QUANTITIES:
            doc[q] = [[_jsonable(float(v)) for v in row] for row in cmap.quantity(q)]
        files["sweep.json"] = write_text(out / "sweep.json", dump_json(doc))
    write_manifest(out, "sweep", run, files, started, {"mode": args.mode})
    print(f"wrote {len(files)} data files to {out}")
    return EXIT_OK


def classify(state: BiphotonState) -> dict:
    """Signature checks (tolerance 1e-3) plus steering statistics."""
    p = state.probabilities
    a = gauge_fixed(state).amp
    top, ratio = steering_dominance(state)
    c = concurrence(pure_density_matrix(state))
    flags = []
    if p[0, 0] < SIGNATURE_TOL and p[1, 1] < SIGNATURE_TOL and abs(p[0, 1] - 0.5) < SIGNATURE_TOL:
        flags.append("bell_phi_plus")
    if (
        p[0, 1] < SIGNATURE_TOL
        and abs(p[0, 0] - 0.5) < SIGNATURE_TOL
        and abs(p[1, 1] - 0.5) < SIGNATURE_TOL
        and abs(a[0, 0] + a[1, 1]) < 2 * SIGNATURE_TOL
    ):
        flags.append("noon_psi_minus")
    if c < SIGNATURE_TOL:
        flags.append("factorizable")
    if ratio > STEERING_RATIO and top > 0.5:
        flags.append("steering_waveguide_1" if p[0, 0] >= p[1, 1] else "steering_waveguide_2")
    return {
        "flags": flags,
        "steering": {"max_single_waveguide_probability": top, "dominance_ratio": ratio},
        "concurrence": c,
    }


def cmd_state(args, run: RunConfig) -> int:
    out = _prepare_out(args)
    started = time.perf_counter()
    phi = args.delta_phi if args.delta_phi is not None else args.delta_phi_over_pi * math.pi
    cfg = run.coupler.with_point(phi, args.delta_beta_over_c)
    state = solve_waveguide(cfg)
    g = gauge_fixed(state)
    p11, p12, p22, ph11, ph12, _ = point_observables(state)
    info = classify(state)
    report = {
        "delta_phi": phi,
        "delta_beta_over_c": args.delta_beta_over_c,
        "amplitudes": {
            lab: [float(v.real), float(v.imag)] for lab, v in zip(BASIS_LABELS, g.vector())
        },
        "probabilities": {"11": p11, "12": p12, "21": p12, "22": p22},
        "phase11_rel": _jsonable(ph11),
        "phase12_rel": _jsonable(ph12),
        **info,
    }
    report = json.loads(json.dumps(report, default=float))
    digest = write_text(out / "state.json", dump_json(report))
    write_manifest(out, "state", run, {"state.json": digest}, started)

    print(f"state at delta_phi = {phi / math.pi:.4g} pi, delta_beta/c = {args.delta_beta_over_c:g}")
    for lab, v in zip(BASIS_LABELS, g.vector()):
        print(f"  psi_{lab} = {v.real:+.6f} {v.imag:+.6f}i   p = {abs(v) ** 2:.6f}")
    print(f"  concurrence = {info['concurrence']:.6f}")
    st = info["steering"]
    print(
        f"  steering: max single-waveguide pair probability = {st['max_single_waveguide_probability']:.6f}, "
        f"dominance ratio = {st['dominance_ratio']:.6f}"
    )
    print("  recognized: " + (", ".join(info["flags"]) or "none"))
    return EXIT_OK


def _tomography_state(args, run: RunConfig):
    phi_pi, beta, ideal = TARGETS[args.target]
    if args.target == "config":
        cfg = run.coupler
    else:
        cfg = run.coupler.with_point(phi_pi * math.pi, beta)
    if args.path == "analytic":
        state = solve_waveguide(cfg)
        rho = pure_density_matrix(state)
    else:
        freqs = frequency_grid(run.filter.omega0, run.filter.fwhm, run.spectral.grid_points, run.spectral.grid_span_fwhm)
        spectral = integrate_spectrum(
            cfg, run.dispersion, run.profile, freqs,
            steps=run.spectral.integration_steps, check=run.spectral.convergence_check,
            omega0=run.filter.omega0,
        )
        rho = reduced_density_matrix(spectral, run.filter)
        state = None
    if ideal is not None:
        target = ideal()
    elif state is not None:
        target = state
    else:
        target = solve_waveguide(cfg)
    return cfg, rho, target


def cmd_tomography(args, run: RunConfig) -> int:
    out = _prepare_out(args)
    started = time.perf_counter()
    cfg, rho, target = _tomography_state(args, run)
    mset = standard_measurement_set()
    record = simulate_counts(rho, mset, args.counts, args.noise, args.seed)
    lin = linear_inversion(record, mset)
    fit = mle_fit(record, mset)
    mle = fit.rho

    files = {
        "counts.csv": write_text(out / "counts.csv", record.to_csv()),
        "rho_real.csv": write_text(out / "rho_real.csv", matrix_csv(np.real(mle.rho))),
        "rho_imag.csv": write_text(out / "rho_imag.csv", matrix_csv(np.imag(mle.rho))),
        "rho_linear_real.csv": write_text(out / "rho_linear_real.csv", matrix_csv(np.real(lin.rho))),
        "rho_linear_imag.csv": write_text(out / "rho_linear_imag.csv", matrix_csv(np.imag(lin.rho))),
    }
    metrics = {
        "target": args.target,
        "path": args.path,
        "delta_phi": cfg.delta_phi,
        "delta_beta_over_c": cfg.delta_beta_over_c,
        "counts": args.counts,
        "noise": args.noise,
        "seed": args.seed,
        "true_state": {
            "concurrence": concurrence(rho),
            "purity": purity(rho),
            "fidelity_vs_target": fidelity(rho, target),
        },
        "mle": {
            "concurrence": concurrence(mle),
            "purity": purity(mle),
            "fidelity_vs_target": fidelity(mle, target),
            "converged": fit.converged,
            "iterations": fit.iterations,
        },
        "linear_inversion": {
            "physical": lin.physical,
            "min_eigenvalue": lin.meta["min_eigenvalue"],
            "fidelity_vs_target": float(np.real(target.vector().conj() @ lin.rho @ target.vector())),
        },
    }
    files["metrics.json"] = write_text(out / "metrics.json", dump_json(json.loads(json.dumps(metrics, default=float))))
    write_manifest(out, "tomography", run, files, started)
    print(
        f"MLE fidelity vs {args.target} target: {metrics['mle']['fidelity_vs_target']:.6f}, "
        f"concurrence {metrics['mle']['concurrence']:.4f}, converged={fit.converged}"
    )
    if not fit.converged:
        print("warning: maximum-likelihood reconstruction did not converge", file=sys.stderr)
    return EXIT_OK


def cmd_emit_plots(args, run) -> int:
    directory = Path(args.directory) if args.directory else Path(args.out)
    written = emit_plots(directory)
    for name in written:
        print(f"wrote {directory / name}")
    return EXIT_OK


def cmd_validate(args, run: RunConfig) -> int:
    c = run.coupler
    print(f"config OK: Lc = {c.Lc:.6g} (pi/2 = {math.pi / 2:.6g}), grid {run.sweep.shape[0]}x{run.sweep.shape[1]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlcoupler", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", default=None, help="JSON run configuration (defaults if omitted)")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    parser.add_argument("--seed", type=int, default=0, help="seed for simulated count noise")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="correlation maps over (delta_phi, delta_beta/c)")
    p.add_argument("--mode", choices=("analytic", "numeric"), default="analytic")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("state", help="report a single output state")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--delta-phi", type=float, default=None, help="pump phase difference (rad)")
    g.add_argument("--delta-phi-over-pi", type=float, default=0.0, help="pump phase difference / pi")
    p.add_argument("--delta-beta-over-c", type=float, default=0.0)
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("tomography", help="simulate counts and reconstruct the density matrix")
    p.add_argument("--target", choices=tuple(TARGETS), default="noon")
    p.add_argument("--counts", type=float, default=5000.0, help="mean total coincidences N")
    p.add_argument("--noise", choices=("none", "poisson"), default="poisson")
    p.add_argument("--path", choices=("analytic", "numeric"), default="analytic")
    p.set_defaults(func=cmd_tomography)

    p = sub.add_parser("emit-plots", help="write gnuplot scripts for sweep/tomography outputs")
    p.add_argument("directory", nargs="?", default=None, help="data directory (default: --out)")
    p.set_defaults(func=cmd_emit_plots, needs_config=False)

    p = sub.add_parser("validate-config", help="check a configuration file")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        run = None if not getattr(args, "needs_config", True) else load_config(args.config)
        return args.func(args, run)
    except ConfigError as exc:
        print("config error:", file=sys.stderr)
        for msg in exc.messages:
            print(f"  {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for name in exc.missing:
            print(f"  missing: {name}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AccuracyError, DegenerateStateError, ArithmeticError, CouplerError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
