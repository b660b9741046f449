"""Config-driven experiment runner.

Usage:
  glt list
  glt run CONFIG.toml [--output DIR] [--seed S] [--threads N]

Configs are TOML with three tables: [experiment] (kind, seed, output),
[model] (builder kind plus its arguments) and [params] (experiment
numbers).  Every CSV/JSON artifact embeds the config hash; rerunning the
same config reproduces every artifact byte for byte (the manifest's wall
time is the one deliberately nondeterministic field).
"""

from __future__ import annotations

import argparse
import difflib
import hashlib
import json
import os
import sys
import time

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import __version__
from .errors import ConfigError, GltError
from .filters_qa import (QaFilter, connected_correlation, decay_fit,
                         filtered_correlation, filtered_correlation_error_bound,
                         qa_transport)
from .hall import FluxTorusFamily, berry_curvature_grid, chern_number, hall_conductance
from .lieb_robinson import light_cone_study
from .lsm import flux_insertion_study, lsm_experiment
from .models import MODEL_BUILDERS, TermSum, build_model
from .operators import embed, spin_matrices
from .spectral import full_spectrum

EXPERIMENTS = {
    "lr-bound": {
        "help": "exact evolved-commutator norms vs series and exponential bounds",
        "params": {"times": "list of floats", "distances": "list of ints",
                   "site_a?": "int (default 0)", "mu_grid?": "list of floats",
                   "k_max?": "int"},
        "models": ("majumdar_ghosh", "heisenberg_chain", "gapped_test_chain"),
    },
    "corr-decay": {
        "help": "connected vs step-filtered correlators and decay-length fit",
        "params": {"distances": "list of ints",
                   "alpha_over_gap_sq?": "list of floats (default 1/4, 1/8, 1/16)"},
        "models": ("gapped_test_chain",),
    },
    "lsm": {
        "help": "twist-operator variational experiment (orthogonality, bound)",
        "params": {"L_sweep?": "list of even ints (reuses the model at each size)"},
        "models": ("heisenberg_chain", "majumdar_ghosh", "polarized_chain"),
    },
    "spectral-flow": {
        "help": "low spectrum under single and balanced twists over a flux grid",
        "params": {"grid_points?": "int (default 64)", "k?": "int (default 2)"},
        "models": ("heisenberg_chain", "majumdar_ghosh"),
    },
    "berry": {
        "help": "flux-torus curvature grid and Chern number in one charge sector",
        "params": {"grid_points": "int", "sector": "int"},
        "models": ("xxz_torus",),
    },
    "hall": {
        "help": "transverse conductance from a transport loop plus grid certificate",
        "params": {"grid_points": "int", "sector": "int",
                   "loop_radius?": "float (default 2 pi / grid_points)",
                   "loop_steps?": "int (default 128)"},
        "models": ("xxz_torus",),
    },
    "transport": {
        "help": "continuation transport along a gapped field path",
        "params": {"h_start": "float", "h_end": "float",
                   "steps?": "list of ints (default 16, 32, 64)",
                   "delta?": "float (default half the path min gap)"},
        "models": ("gapped_test_chain",),
    },
}


def list_experiments(stream=None) -> str:
    lines = ["experiment kinds:"]
    for kind, info in EXPERIMENTS.items():
        lines.append(f"  {kind:<14} {info['help']}")
        lines.append(f"  {'':<14} models: {', '.join(info['models'])}")
        for key, desc in info["params"].items():
            mark = "optional" if key.endswith("?") else "required"
            lines.append(f"  {'':<14} params.{key.rstrip('?'):<20} {desc} [{mark}]")
    text = "\n".join(lines)
    if stream is not None:
        print(text, file=stream)
    return text


# ---------------------------------------------------------------------------
# config loading and validation

def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def load_config(path: str) -> tuple:
    try:
        raw = open(path, "rb").read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        cfg = tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}") from exc
    digest = hashlib.sha256(raw).hexdigest()[:16]
    return cfg, digest


def validate_config(cfg: dict, path: str) -> dict:
    for table in ("experiment", "model"):
        if table not in cfg or not isinstance(cfg[table], dict):
            _fail(path, f"[{table}]: missing table")
    exp = cfg["experiment"]
    kind = exp.get("kind")
    if kind not in EXPERIMENTS:
        near = difflib.get_close_matches(str(kind), EXPERIMENTS, n=1, cutoff=0.4)
        hint = f"; nearest valid kind is {near[0]!r}" if near else ""
        _fail(path, f"[experiment].kind: unknown kind {kind!r}{hint}")
    model = cfg["model"]
    mkind = model.get("kind")
    if mkind not in MODEL_BUILDERS:
        near = difflib.get_close_matches(str(mkind), MODEL_BUILDERS, n=1, cutoff=0.4)
        hint = f"; nearest valid kind is {near[0]!r}" if near else ""
        _fail(path, f"[model].kind: unknown model {mkind!r}{hint}")
    if mkind not in EXPERIMENTS[kind]["models"]:
        _fail(path, f"[model].kind: {mkind!r} is not usable with {kind!r} "
                    f"(expected one of {EXPERIMENTS[kind]['models']})")
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        _fail(path, "[params]: must be a table")
    for key, _ in EXPERIMENTS[kind]["params"].items():
        if not key.endswith("?") and key not in params:
            _fail(path, f"[params].{key}: missing required key for {kind!r}")
    seed = exp.get("seed", 7)
    if not isinstance(seed, int):
        _fail(path, "[experiment].seed: must be an integer")
    return {"kind": kind, "model": dict(model), "params": dict(params),
            "seed": seed, "output": exp.get("output", "glt_out")}


# ---------------------------------------------------------------------------
# deterministic writers

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header, rows, meta):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash={meta['config_hash']} seed={meta['seed']}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_json(path, payload: dict, meta):
    payload = dict(payload)
    payload["config_hash"] = meta["config_hash"]
    payload["seed"] = meta["seed"]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# experiment drivers; each returns a list of written file names

def _site_z(ham, site):
    _, _, sz = spin_matrices(0.5)
    return embed(sz, [site], ham.indexer)


def run_lr_bound(cfg, out, meta, threads):
    ham, _ = build_model(cfg["model"])
    p = cfg["params"]
    times = [float(t) for t in p["times"]]
    site_a = int(p.get("site_a", 0))
    mu_grid = tuple(p.get("mu_grid", (0.5, 1.0, 1.5, 2.0)))
    k_max = p.get("k_max")
    files = []
    violations = 0
    for dist in p["distances"]:
        a = _site_z(ham, site_a)
        b = _site_z(ham, (site_a + int(dist)) % ham.lattice.n_sites)
        prof = light_cone_study(ham, a, b, times, mu_grid=mu_grid, k_max=k_max)
        rows = [(t, e, s, tl, x) for t, e, s, tl, x in prof.rows()]
        violations += int(np.sum(prof.exact_norms > prof.series_bounds + prof.tails + 1e-12))
        violations += int(np.sum(prof.exact_norms > prof.exp_bounds + 1e-12))
        name = f"lightcone_d{int(dist)}.csv"
        write_csv(os.path.join(out, name),
                  ["t", "exact", "series_bound", "tail", "exp_bound"], rows, meta)
        files.append(name)
    write_json(os.path.join(out, "lr_summary.json"),
               {"violations": violations, "distances": [int(d) for d in p["distances"]],
                "mu_grid": list(mu_grid)}, meta)
    files.append("lr_summary.json")
    if violations:
        raise GltError(f"{violations} bound violations detected")
    return files


def run_corr_decay(cfg, out, meta, threads):
    ham, _ = build_model(cfg["model"])
    p = cfg["params"]
    spec = full_spectrum(ham)
    fractions = [float(x) for x in p.get("alpha_over_gap_sq", (0.25, 0.125, 0.0625))]
    distances = [int(d) for d in p["distances"]]
    files = []
    mags = []
    for frac_i, frac in enumerate(fractions):
        alpha = frac * spec.gap ** 2
        rows = []
        for dist in distances:
            a = _site_z(ham, 0)
            b = _site_z(ham, dist % ham.lattice.n_sites)
            conn = connected_correlation(a, b, spec)
            filt = filtered_correlation(a, b, spec, alpha)
            bound = filtered_correlation_error_bound(a, b, spec.gap, alpha)
            rows.append((dist, conn.real, filt.real, bound))
            if frac_i == 0:
                mags.append(abs(conn))
        name = f"corr_decay_alpha{frac_i}.csv"
        write_csv(os.path.join(out, name),
                  ["l", "exact_connected", "filtered", "bound"], rows, meta)
        files.append(name)
    fit = decay_fit(distances, mags)
    write_json(os.path.join(out, "decay_fit.json"),
               {"correlation_length": fit.correlation_length,
                "prefactor": fit.prefactor, "residual": fit.residual,
                "no_decay": fit.no_decay, "gap": spec.gap,
                "alpha_over_gap_sq": fractions}, meta)
    files.append("decay_fit.json")
    return files


def run_lsm(cfg, out, meta, threads):
    ham, charge = build_model(cfg["model"])
    rep = lsm_experiment(ham, charge)
    write_json(os.path.join(out, "lsm_report.json"), rep.to_json_dict(), meta)
    files = ["lsm_report.json"]
    sweep = cfg["params"].get("L_sweep")
    if sweep:
        rows = []
        for length in sweep:
            model = dict(cfg["model"])
            model["L"] = int(length)
            ham_l, charge_l = build_model(model)
            rep_l = lsm_experiment(ham_l, charge_l)
            rows.append((int(length), rep_l.e_var_avg - rep_l.e0, rep_l.bound_value,
                         abs(rep_l.overlap), np.angle(rep_l.translation_phase)))
        write_csv(os.path.join(out, "lsm_sweep.csv"),
                  ["L", "evar_minus_e0", "bound_value", "overlap", "phase"],
                  rows, meta)
        files.append("lsm_sweep.csv")
    return files


def run_spectral_flow(cfg, out, meta, threads):
    ham, charge = build_model(cfg["model"])
    p = cfg["params"]
    n_grid = int(p.get("grid_points", 64))
    k = int(p.get("k", 2))
    grid = np.linspace(0.0, 2.0 * np.pi, n_grid + 1)
    rep = flux_insertion_study(ham, charge, grid, k=k, threads=threads)
    rows = []
    for i, theta in enumerate(grid):
        single = rep.flow_single.results[i].energies
        balanced = rep.flow_balanced.results[i].energies
        rows.append((theta, *single, *balanced))
    header = (["theta"] + [f"single_e{j}" for j in range(k)]
              + [f"balanced_e{j}" for j in range(k)])
    write_csv(os.path.join(out, "spectral_flow.csv"), header, rows, meta)
    write_json(os.path.join(out, "flow_certificates.json"),
               {"gap_at_zero": rep.gap_at_zero,
                "min_gap_single": rep.min_gap_single,
                "gap_ratio": rep.gap_ratio,
                "balanced_spectrum_deviation": rep.balanced_spectrum_deviation,
                "full_turn_matrix_deviation": rep.full_turn_matrix_deviation},
               meta)
    return ["spectral_flow.csv", "flow_certificates.json"]


def run_berry(cfg, out, meta, threads):
    ham, charge = build_model(cfg["model"])
    p = cfg["params"]
    family = FluxTorusFamily(ham, charge, sector=int(p["sector"]))
    grid = berry_curvature_grid(family, int(p["grid_points"]), threads=threads)
    integer, deviation = chern_number(grid)
    rows = []
    for a in range(grid.n):
        for b in range(grid.n):
            rows.append((grid.angles[a], grid.angles[b], grid.plaquette_phases[a, b]))
    write_csv(os.path.join(out, "berry_grid.csv"), ["theta", "phi", "plaquette_phase"],
              rows, meta)
    write_json(os.path.join(out, "berry_summary.json"),
               {"chern": grid.chern, "integer": integer, "deviation": deviation,
                "min_gap": grid.min_gap, "grid_points": grid.n,
                "under_resolved": grid.under_resolved}, meta)
    return ["berry_grid.csv", "berry_summary.json"]


def run_hall(cfg, out, meta, threads):
    ham, charge = build_model(cfg["model"])
    p = cfg["params"]
    family = FluxTorusFamily(ham, charge, sector=int(p["sector"]))
    res = hall_conductance(family, int(p["grid_points"]),
                           loop_radius=p.get("loop_radius"),
                           loop_steps=int(p.get("loop_steps", 128)),
                           threads=threads)
    write_json(os.path.join(out, "hall_report.json"), res.to_json_dict(), meta)
    return ["hall_report.json"]


def run_transport(cfg, out, meta, threads):
    model = dict(cfg["model"])
    p = cfg["params"]
    h_start, h_end = float(p["h_start"]), float(p["h_end"])
    steps = [int(n) for n in p.get("steps", (16, 32, 64))]
    length = int(model["L"])

    def path(s):
        m = dict(model)
        m["h"] = h_start + (h_end - h_start) * s
        ham_s, _ = build_model(m)
        _, _, sz = spin_matrices(0.5)
        z = np.array([[1, 0], [0, -1]], dtype=complex)
        dterms = [embed(-(h_end - h_start) * z, [i], ham_s.indexer)
                  for i in range(length)]
        return ham_s, TermSum(ham_s.lattice, ham_s.indexer, dterms)

    probe = [full_spectrum(path(s)[0]).gap for s in (0.0, 0.5, 1.0)]
    delta = float(p.get("delta", min(probe) / 2.0))
    results = []
    for n_steps in steps:
        res = qa_transport(path, n_steps, QaFilter(delta))
        results.append({"steps": n_steps, "fidelity": res.fidelity,
                        "phase": res.phase, "min_gap": res.path_min_gap})
    write_json(os.path.join(out, "transport.json"),
               {"model": model, "h_start": h_start, "h_end": h_end,
                "delta": delta, "runs": results}, meta)
    return ["transport.json"]


RUNNERS = {
    "lr-bound": run_lr_bound,
    "corr-decay": run_corr_decay,
    "lsm": run_lsm,
    "spectral-flow": run_spectral_flow,
    "berry": run_berry,
    "hall": run_hall,
    "transport": run_transport,
}


def run(config_path: str, output: str | None = None, seed: int | None = None,
        threads: int | None = None) -> int:
    """Execute one config; returns the process exit code."""
    try:
        cfg_raw, digest = load_config(config_path)
        cfg = validate_config(cfg_raw, config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if seed is not None:
        cfg["seed"] = seed
    if output is not None:
        cfg["output"] = output
    if threads is None:
        threads = int(os.environ.get("GLT_THREADS", "1"))

    out = cfg["output"]
    meta = {"config_hash": digest, "seed": cfg["seed"]}
    started = time.time()
    try:
        os.makedirs(out, exist_ok=True)
        files = RUNNERS[cfg["kind"]](cfg, out, meta, threads)
    except (ValueError, TypeError) as exc:
        # builder/parameter rejections are configuration mistakes
        print(f"config error: {config_path}: {exc}", file=sys.stderr)
        return 2
    except GltError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("residual", "location", "gap", "overlap", "value", "deviation"):
            if getattr(exc, attr, None) is not None:
                payload[attr] = getattr(exc, attr)
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        write_json(os.path.join(out, "error.json"), payload, meta)
        return 1
    manifest = {
        "kind": cfg["kind"],
        "config": {"experiment": {"kind": cfg["kind"], "seed": cfg["seed"]},
                   "model": cfg["model"], "params": cfg["params"]},
        "config_hash": digest,
        "version": __version__,
        "files": files,
        "wall_time_s": round(time.time() - started, 3),
    }
    with open(os.path.join(out, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(files)} artifact(s) to {out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="glt",
                                     description="gapped lattice toolkit experiment runner")
    sub = parser.add_subparsers(dest="command")
    run_p = sub.add_parser("run", help="run one experiment config")
    run_p.add_argument("config")
    run_p.add_argument("--output", default=None, help="output directory (overrides config)")
    run_p.add_argument("--seed", type=int, default=None, help="seed override")
    run_p.add_argument("--threads", type=int, default=None,
                       help="worker threads (fallback: GLT_THREADS, default 1)")
    sub.add_parser("list", help="list experiment kinds and their config keys")
    args = parser.parse_args(argv)
    if args.command == "list":
        list_experiments(stream=sys.stdout)
        return 0
    if args.command == "run":
        return run(args.config, args.output, args.seed, args.threads)
    parser.print_help()
    return 2


if __name__ == "__main__":
    sys.exit(main())
