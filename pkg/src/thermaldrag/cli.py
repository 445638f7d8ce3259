"""Command-line interface.

Every subcommand resolves its flags into a JSON-compatible config, runs, and
(when ``--out`` is given) writes its outputs together with ``manifest.json``.
``thermaldrag replay manifest.json --out DIR`` reruns from that config and
reproduces the numerical outputs byte for byte.

Exit codes: 0 success, 2 parse errors (flags or species file), 3 domain
errors, 4 numerical failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, _backend
from .constants import get_constants
from .drag import drag_curve, linear_response_slope
from .errors import DomainError, NumericalError, SpeciesParseError
from .fokker_planck import (
    MomentumGrid,
    evolve,
    gaussian_state,
    read_snapshot,
    stationary_solution,
)
from .frame import compensating_force, infer_lab_velocity, lab_frame_force
from .langevin import SimConfig, ks_statistic, run_ensemble
from .physics import (
    MultilevelAtom,
    ThermalEnvironment,
    TwoLevelAtom,
    bose_occupation,
    level_populations,
    multilevel_coefficients,
    two_level_coefficients,
)
from .species import loads_species

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_NUMERIC = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def _triple(raw: str) -> list[float]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z but got {raw!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric component in {raw!r}") from None


def _float_list(raw: str) -> list[float]:
    try:
        return [float(p) for p in raw.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {raw!r}") from None


def _write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit(payload: Any) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


# --- species / temperature resolution ---------------------------------------

def _species_document(args) -> dict | None:
    if not getattr(args, "species", None):
        return None
    text = Path(args.species).read_text(encoding="utf-8")
    atom = loads_species(text, args.name)  # validates before anything runs
    doc = json.loads(text)
    if isinstance(doc, dict) and "species" in doc:
        entries = doc["species"]
        doc = entries[0] if args.name is None else next(e for e in entries if e.get("name") == args.name)
    if args.units and get_constants(args.units) != atom.constants:
        raise DomainError(f"--units {args.units} disagrees with species units {doc['units']!r}")
    return doc


def _atom(cfg: dict):
    return loads_species(json.dumps(cfg["species_document"]))


def _reference_frequency(atom) -> float:
    if isinstance(atom, TwoLevelAtom):
        return atom.omega0
    return atom.transition_frequency(0)


def _environment(atom, cfg: dict) -> ThermalEnvironment:
    if cfg.get("beta_homega") is not None:
        return ThermalEnvironment.from_reduced(cfg["beta_homega"], _reference_frequency(atom), atom.constants)
    t = cfg["temperature"]
    if t is None:
        raise DomainError("give --temperature or --beta-homega")
    if t < 0:
        raise DomainError(f"temperature must be >= 0, got {t}")
    return ThermalEnvironment(t, atom.constants)


def _coefficients(atom, env):
    if isinstance(atom, TwoLevelAtom):
        return two_level_coefficients(atom, env)
    return multilevel_coefficients(atom, env)


def _as_multilevel(atom) -> MultilevelAtom:
    return MultilevelAtom.from_two_level(atom) if isinstance(atom, TwoLevelAtom) else atom


# --- commands ---------------------------------------------------------------

def run_coeffs(cfg: dict, out: Path | None) -> dict:
    atom = _atom(cfg)
    env = _environment(atom, cfg)
    coeffs = _coefficients(atom, env)
    ml = _as_multilevel(atom)
    rho = level_populations(ml, env)
    rows = []
    for t, pair in zip(ml.transitions, ml.pair_atoms):
        pc = two_level_coefficients(pair, env)
        rows.append({
            "upper": t.upper,
            "lower": t.lower,
            "omega": pair.omega0,
            "Gamma": pair.gamma_sp,
            "n": float(bose_occupation(pair.omega0, env)),
            "gamma_over_Gamma_3M": pc.gamma * 3.0 * pair.mass / pair.gamma_sp,
            "weight": float(rho[t.upper] + rho[t.lower]),
        })
    result = {
        "species": cfg["species_document"].get("name"),
        "unit_system": atom.constants.name,
        "temperature": env.temperature,
        "gamma": coeffs.gamma,
        "D": coeffs.diffusion,
        "einstein_residual": coeffs.einstein_residual(),
        "populations": [float(r) for r in rho],
        "transitions": rows,
    }
    if env.is_zero:
        result["note"] = "zero-temperature: all thermal factors vanish"
    if out is not None:
        _write_json(out / "coeffs.json", result)
        with (out / "transitions.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            cols = list(rows[0])
            w.writerow(cols)
            for r in rows:
                w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
    return result


def _print_coeffs(result: dict) -> None:
    print(f"species      {result['species']}  ({result['unit_system']} units)")
    print(f"temperature  {result['temperature']!r}")
    print(f"gamma        {result['gamma']!r}")
    print(f"D            {result['D']!r}")
    print(f"D/(gamma M kB T) - 1  {result['einstein_residual']!r}")
    if "note" in result:
        print(f"note         {result['note']}")
    print("populations  " + " ".join(repr(r) for r in result["populations"]))
    print("upper lower omega Gamma n gamma_over_Gamma_3M weight")
    for r in result["transitions"]:
        print(" ".join(repr(r[k]) for k in
                       ("upper", "lower", "omega", "Gamma", "n", "gamma_over_Gamma_3M", "weight")))


def run_sweep(cfg: dict, out: Path | None) -> dict:
    atom = _atom(cfg)
    t_min, t_max, n = cfg["t_min"], cfg["t_max"], cfg["n_points"]
    if not 0 < t_min <= t_max:
        raise DomainError("sweep needs 0 < t_min <= t_max")
    if n == 1:
        temps = np.array([t_min])
    elif cfg["scale"] == "log":
        temps = np.geomspace(t_min, t_max, n)
    else:
        temps = np.linspace(t_min, t_max, n)
    rows = []
    for t in temps:
        c = _coefficients(atom, ThermalEnvironment(float(t), atom.constants))
        rows.append((float(t), c.gamma, c.diffusion, c.einstein_residual()))
    lines = ["T,gamma,D,residual"] + [",".join(repr(x) for x in r) for r in rows]
    text = "\n".join(lines) + "\n"
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return {"rows": len(rows), "max_abs_residual": max(abs(r[3]) for r in rows)}


def _sim_coefficients(cfg: dict) -> tuple[float, float, float]:
    if cfg.get("species_document") is not None:
        atom = _atom(cfg)
        c = _coefficients(atom, _environment(atom, cfg))
        return c.gamma, c.diffusion, c.mass
    missing = [k for k in ("gamma", "diffusion") if cfg.get(k) is None]
    if missing:
        raise DomainError(f"give --species with a temperature, or --{' --'.join(missing)}")
    return cfg["gamma"], cfg["diffusion"], cfg["mass"]


def run_simulate(cfg: dict, out: Path | None) -> dict:
    gamma, diffusion, mass = _sim_coefficients(cfg)
    sim = SimConfig(
        gamma=gamma, diffusion=diffusion, mass=mass, dt=cfg["dt"], n_steps=cfg["n_steps"],
        n_trajectories=cfg["n_trajectories"], seed=cfg["seed"], p0=cfg["p0"],
        initial_variance=cfg["initial_variance"], stepper=cfg["stepper"],
        drift_velocity=cfg["drift_velocity"], external_force=cfg["external_force"],
        block_size=cfg["block_size"], histogram_bins=cfg["bins"],
    )
    stats = run_ensemble(sim, workers=cfg.get("workers", 1))
    summary = {
        "gamma": gamma,
        "D": diffusion,
        "mass": mass,
        "t_end": float(stats.times[-1]),
        "final_mean": stats.mean_momentum[-1].tolist(),
        "final_variance": stats.variance[-1].tolist(),
        "backend": stats.backend,
    }
    if cfg.get("compare_fp"):
        snap, header = read_snapshot(cfg["compare_fp"])
        summary["fp_snapshot_time"] = header["t"]
        summary["ks_vs_fp"] = [ks_statistic(stats.final_momenta[:, a], snap.cdf) for a in range(3)]
        if not math.isclose(header["t"], summary["t_end"], rel_tol=1e-9):
            summary["warning"] = "snapshot time differs from simulation end time"
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        stats.moments_csv(out / "moments.csv")
        stats.histogram_csv(out / "histogram.csv")
        _write_json(out / "summary.json", summary)
    return summary


def run_fpsolve(cfg: dict, out: Path | None) -> dict:
    gamma, diffusion, _ = _sim_coefficients(cfg)
    grid = MomentumGrid(cfg["p_min"], cfg["p_max"], cfg["n_points"])
    if cfg["initial"] == "stationary":
        state = stationary_solution(grid, gamma, diffusion)
    else:
        state = gaussian_state(grid, cfg["init_mean"], cfg["init_variance"])
    final = evolve(state, gamma, diffusion, cfg["t_end"], dt=cfg.get("dt"))
    summary = {
        "gamma": gamma,
        "D": diffusion,
        "t": final.time,
        "total_probability": final.total,
        "mean": final.mean,
        "second_moment": final.moment(2),
        "variance": final.variance,
    }
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        final.to_csv(out / "distribution.csv", gamma, diffusion)
        _write_json(out / "summary.json", summary)
    return summary


def run_dragcurve(cfg: dict, out: Path | None) -> dict:
    atom = _atom(cfg)
    if not isinstance(atom, TwoLevelAtom):
        raise DomainError("dragcurve needs a two-level species")
    env = _environment(atom, cfg)
    if cfg.get("speeds"):
        speeds = np.asarray(cfg["speeds"], dtype=float)
    else:
        speeds = np.linspace(0.0, cfg["v_max"], cfg["n_speeds"])
    curve = drag_curve(atom, env, speeds)
    summary = {
        "temperature": env.temperature,
        "gamma_from_slope": linear_response_slope(atom, env),
        "gamma_closed_form": two_level_coefficients(atom, env).gamma,
        "n_speeds": int(speeds.size),
    }
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        curve.to_csv(out / "dragcurve.csv")
        _write_json(out / "summary.json", summary)
    else:
        print("v,F_parallel,quadrature_error")
        for v, f, e in zip(curve.speeds, curve.forces, curve.errors):
            print(f"{float(v)!r},{float(f)!r},{float(e)!r}")
    return summary


def run_frame(cfg: dict, out: Path | None) -> dict:
    g, m, u = cfg["gamma"], cfg["mass"], cfg["u"]
    result = {
        "u": u,
        "v_prime": cfg["v_prime"],
        "lab_force": lab_frame_force(g, m, u, cfg["v_prime"]).tolist(),
        "compensating_force": compensating_force(g, m, u).tolist(),
    }
    if cfg.get("f_comp") is not None:
        result["inferred_u"] = infer_lab_velocity(cfg["f_comp"], g, m).tolist()
    if out is not None:
        _write_json(out / "frame.json", result)
    return result


COMMANDS = {
    "coeffs": run_coeffs,
    "sweep": run_sweep,
    "simulate": run_simulate,
    "fpsolve": run_fpsolve,
    "dragcurve": run_dragcurve,
    "frame": run_frame,
}

# flags that do not affect numerical output
_VOLATILE = {"workers"}


# --- argument parsing -------------------------------------------------------

def _add_species(p, required=True):
    p.add_argument("--species", required=required, help="species JSON file")
    p.add_argument("--name", help="species name inside a registry file")
    p.add_argument("--units", choices=["si", "SI", "natural"],
                   help="expected unit system of the species file")


def _add_temperature(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--temperature", type=float,
                   help="background temperature (kelvin for SI, energy for natural units)")
    g.add_argument("--beta-homega", type=float,
                   help="dimensionless hbar*omega/(kB T) of the first transition")


def _add_coefficients(p):
    _add_species(p, required=False)
    _add_temperature(p)
    p.add_argument("--gamma", type=float, help="damping rate (used without --species)")
    p.add_argument("--diffusion", type=float, help="momentum diffusion coefficient D")
    p.add_argument("--mass", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thermaldrag", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("coeffs", help="damping/diffusion coefficients of a species")
    _add_species(p)
    _add_temperature(p)
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("sweep", help="tabulate gamma and D over temperature")
    _add_species(p)
    p.add_argument("--t-min", type=float, required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--n-points", type=int, default=50)
    p.add_argument("--scale", choices=["linear", "log"], default="log")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("simulate", help="Langevin ensemble of momenta")
    _add_coefficients(p)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--n-steps", type=int, required=True)
    p.add_argument("--n-traj", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p0", type=_triple, default=[0.0, 0.0, 0.0])
    p.add_argument("--init-variance", type=float, default=0.0)
    p.add_argument("--stepper", choices=["euler", "exact"], default="euler")
    p.add_argument("--drift-velocity", type=_triple, default=[0.0, 0.0, 0.0],
                   help="lab velocity u relative to the background")
    p.add_argument("--external-force", type=_triple, default=[0.0, 0.0, 0.0])
    p.add_argument("--block-size", type=int, default=4096)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--compare-fp", type=Path, help="fpsolve distribution.csv to compare against (KS)")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("fpsolve", help="Fokker-Planck evolution of one momentum component")
    _add_coefficients(p)
    p.add_argument("--p-min", type=float, required=True)
    p.add_argument("--p-max", type=float, required=True)
    p.add_argument("--n-points", type=int, default=801)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float)
    p.add_argument("--initial", choices=["gaussian", "stationary"], default="gaussian")
    p.add_argument("--init-mean", type=float, default=0.0)
    p.add_argument("--init-variance", type=float, default=1.0)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("dragcurve", help="exact drag force versus speed")
    _add_species(p)
    _add_temperature(p)
    p.add_argument("--speeds", type=_float_list, help="comma-separated speeds")
    p.add_argument("--v-max", type=float)
    p.add_argument("--n-speeds", type=int, default=21)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("frame", help="lab-frame drag and compensating force")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--mass", type=float, required=True)
    p.add_argument("--u", type=_triple, required=True, help="lab velocity relative to background")
    p.add_argument("--v-prime", type=_triple, default=[0.0, 0.0, 0.0])
    p.add_argument("--f-comp", type=_triple, help="measured compensating force")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("replay", help="rerun a command from its manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--workers", type=int, default=1)
    return parser


def _config_from_args(args) -> dict:
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
           if k not in ("command", "out", "json", "species", "name", "units")}
    if args.command in ("coeffs", "sweep", "dragcurve", "simulate", "fpsolve"):
        cfg["species_document"] = _species_document(args)
        cfg["species_path"] = args.species
    if args.command == "simulate":
        cfg["n_trajectories"] = cfg.pop("n_traj")
        cfg["initial_variance"] = cfg.pop("init_variance")
        cfg["compare_fp"] = str(args.compare_fp) if args.compare_fp else None
    if args.command == "dragcurve" and not cfg.get("speeds") and cfg.get("v_max") is None:
        raise DomainError("give --speeds or --v-max")
    return cfg


def _manifest(command: str, cfg: dict, started: float, finished: float, out: Path) -> dict:
    doc = cfg.get("species_document")
    return {
        "schema_version": 1,
        "command": command,
        "config": {k: v for k, v in cfg.items() if k not in _VOLATILE},
        "seed": cfg.get("seed"),
        "unit_system": doc.get("units") if doc else cfg.get("units", "natural"),
        "code_version": __version__,
        "backend": _backend.NAME,
        "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "finished_utc": datetime.fromtimestamp(finished, timezone.utc).isoformat(),
        "wall_time_s": finished - started,
        "outputs": sorted(p.name for p in out.iterdir() if p.name != "manifest.json"),
    }


def _execute(command: str, cfg: dict, out: Path | None, print_json: bool = False) -> int:
    started = time.time()
    result = COMMANDS[command](cfg, out)
    finished = time.time()
    if command == "coeffs" and not print_json:
        _print_coeffs(result)
    elif command not in ("sweep", "dragcurve") or out is not None:
        _emit(result)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "manifest.json", _manifest(command, cfg, started, finished, out))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "replay":
            manifest = json.loads(args.manifest.read_text(encoding="utf-8"))
            cfg = dict(manifest["config"])
            cfg["workers"] = args.workers
            return _execute(manifest["command"], cfg, args.out)
        cfg = _config_from_args(args)
        return _execute(args.command, cfg, args.out, getattr(args, "json", False))
    except SpeciesParseError as exc:
        print(f"thermaldrag: species parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (json.JSONDecodeError, KeyError, OSError) as exc:
        print(f"thermaldrag: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, ValueError) as exc:
        print(f"thermaldrag: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NumericalError, ArithmeticError) as exc:
        print(f"thermaldrag: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
