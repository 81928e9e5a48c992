"""Command-line surface: configuration in, reproducible artifacts out.

Every run writes its result files plus a manifest echoing the resolved
configuration, per-stage wall times, and content hashes of the artifacts.
Result files carry no timestamps, so identical (config, seed) runs are
byte-identical; wall times live only in the manifest.

Exit codes: 0 ok, 2 configuration, 3 numerical failure, 4 resource limits.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import (Bundle, load_config_file, load_preset, make_bundle,
                     make_penalized, make_rhs, PRESET_SUMMARIES, PRESETS)
from .errors import (ConfigurationError, DataError, GeometryError,
                     NeukolError, ResourceError, SolverError)
from .measure import build_space
from .potentials import MoreauEnvelope
from .sde import SDESettings, feynman_kac, sample_invariant
from .solver import (WeakProblem, estimate_report, flux_trace, penalize_sweep,
                     solve)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_RESOURCE = 4


def _fmt(v) -> str:
    return f"{v:.17g}" if isinstance(v, float) else str(v)


def write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: Path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


class Run:
    """Output directory + stage timing + manifest bookkeeping."""

    def __init__(self, out_dir: Path, cfg: dict, command: str, threads: int):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.command = command
        self.threads = threads
        self.stages = {}
        self.files = []
        self._t0 = None
        self._stage = None

    def stage(self, name):
        self._stage = name
        self._t0 = time.perf_counter()
        return self

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.stages[self._stage] = time.perf_counter() - self._t0
        return False

    def emit_csv(self, name, header, rows):
        path = self.out / name
        write_csv(path, header, rows)
        self.files.append(path)
        return path

    def emit_json(self, name, obj):
        path = self.out / name
        write_json(path, obj)
        self.files.append(path)
        return path

    def finish(self):
        manifest = {
            "command": self.command,
            "config": self.cfg,
            "threads": self.threads,
            "stage_seconds": self.stages,
            "files": {p.name: _sha256(p) for p in self.files},
            "versions": {"neukol": __version__, "numpy": np.__version__},
        }
        write_json(self.out / "manifest.json", manifest)


def _load_cfg(args) -> dict:
    if args.preset and args.config:
        raise ConfigurationError("give either --preset or --config, not both")
    if args.preset:
        cfg = load_preset(args.preset)
    elif args.config:
        cfg = load_config_file(args.config)
    else:
        raise ConfigurationError("a --preset or --config is required")
    if args.seed is not None:
        cfg["top"]["seed"] = args.seed
    return cfg


def _problem(bundle: Bundle, lam, rhs, mode, body, potential):
    s = bundle.cfg["solve"]
    return WeakProblem(space=bundle.space, lam=lam, rhs=rhs, mode=mode, body=body,
                       potential=potential, pad_sigma=s["pad_sigma"],
                       cg_tol=s["cg_tol"])


def _solve_from_bundle(bundle: Bundle):
    cfg = bundle.cfg
    lam = cfg["solve"]["lambda"]
    rhs = make_rhs(cfg, bundle.n)
    mode = cfg["solve"]["mode"]
    if mode == "penalized":
        pot = make_penalized(bundle, cfg["solve"]["alpha"])
        body = None
    elif mode == "restricted":
        if bundle.body is None:
            raise ConfigurationError("restricted mode needs a [convex_set]")
        pot, body = bundle.potential, bundle.body
    else:
        pot, body = bundle.potential, None
    prob = _problem(bundle, lam, rhs, mode, body, pot)
    return solve(prob), prob


def _solution_rows(bundle: Bundle, sol):
    X = bundle.space.nodes().reshape(-1, bundle.n)
    u = sol.u.ravel()
    keep = ~np.isnan(u)
    return [tuple(X[i]) + (u[i],) for i in np.flatnonzero(keep)]


def cmd_solve(args) -> int:
    cfg = _load_cfg(args)
    run = Run(args.out, cfg, "solve", args.threads)
    with run.stage("build"):
        bundle = make_bundle(cfg)
    with run.stage("solve"):
        sol, prob = _solve_from_bundle(bundle)
    with run.stage("report"):
        rep = estimate_report(sol)
        payload = rep.as_dict()
        payload.update({
            "cg_iterations": sol.cg_iters,
            "cg_relative_residual": sol.cg_relres,
            "dofs": sol.dofs,
            "mode": prob.mode,
            "seed": cfg["top"]["seed"],
        })
        run.emit_json("report.json", payload)
        if cfg["output"]["write_solution"]:
            header = [f"x{k + 1}" for k in range(bundle.n)] + ["u"]
            run.emit_csv("solution.csv", header, _solution_rows(bundle, sol))
    run.finish()
    print(f"solve: dofs={sol.dofs} cg_iters={sol.cg_iters} "
          f"lhs_diss={rep.lhs_diss:.6g} rhs_diss={rep.rhs_diss:.6g}")
    return EXIT_OK


def cmd_penalize_sweep(args) -> int:
    cfg = _load_cfg(args)
    run = Run(args.out, cfg, "penalize-sweep", args.threads)
    with run.stage("build"):
        bundle = make_bundle(cfg)
        alphas = cfg["solve"]["alpha_sweep"]
        if alphas is None or len(alphas) == 0:
            raise ConfigurationError("penalize-sweep needs solve.alpha_sweep")
        if len(alphas) == 1:
            print("warning: single alpha, no convergence verdict", file=sys.stderr)
        if bundle.body is None:
            raise ConfigurationError("penalize-sweep needs a [convex_set]")
        rhs = make_rhs(cfg, bundle.n)
    with run.stage("sweep"):
        res = penalize_sweep(bundle.space, bundle.body, bundle.potential,
                             cfg["solve"]["lambda"], rhs, alphas,
                             pad_sigma=cfg["solve"]["pad_sigma"])
    with run.stage("report"):
        rows = [(r["alpha"], r["w12_error"], r["mass_outside"], r["flux_norm"])
                for r in res["rows"]]
        run.emit_csv("sweep.csv",
                     ["alpha", "w12_error", "mass_outside", "flux_norm"], rows)
        payload = {"rows": res["rows"], "verdicts": res["verdicts"],
                   "reference_flux": res["reference_flux"],
                   "seed": cfg["top"]["seed"]}
        run.emit_json("report.json", payload)
    run.finish()
    v = res["verdicts"]
    print(f"penalize-sweep: error_monotone={v['error_monotone']} "
          f"final/initial={v['final_over_initial']:.4g} mass_monotone={v['mass_monotone']}")
    return EXIT_OK


def cmd_feynman_kac(args) -> int:
    cfg = _load_cfg(args)
    run = Run(args.out, cfg, "feynman-kac", args.threads)
    with run.stage("build"):
        bundle = make_bundle(cfg)
        lam = cfg["solve"]["lambda"]
        rhs = make_rhs(cfg, bundle.n)
        sde_cfg = cfg["sde"]
        if sde_cfg["probes"] is None:
            raise ConfigurationError("feynman-kac needs sde.probes")
        flat = np.asarray(sde_cfg["probes"], dtype=float)
        if flat.size % bundle.n:
            raise ConfigurationError("sde.probes length must be a multiple of n")
        probes = flat.reshape(-1, bundle.n)
    with run.stage("solve"):
        sol, prob = _solve_from_bundle(bundle)
        u_pde = sol.evaluate(probes)
    with run.stage("paths"):
        drift = None
        if bundle.potential is not None:
            env = bundle.potential if hasattr(bundle.potential, "gradient") \
                else MoreauEnvelope(bundle.potential, sde_cfg["alpha"])
            drift = env.gradient
        settings = SDESettings(scheme=sde_cfg["scheme"], dt=sde_cfg["dt"],
                               horizon=sde_cfg["T"], paths=sde_cfg["paths"],
                               seed=cfg["top"]["seed"], alpha=sde_cfg["alpha"],
                               exponential=sde_cfg["exponential"])
        fk = feynman_kac(bundle.space, bundle.body, drift, rhs, lam, probes, settings)
    with run.stage("report"):
        rows, verdicts = [], []
        for i in range(len(probes)):
            tol = 3 * fk.stderrs[i] + 0.02 * abs(u_pde[i])
            ok = abs(fk.estimates[i] - u_pde[i]) <= tol
            verdicts.append(bool(ok))
            rows.append(tuple(probes[i]) + (u_pde[i], fk.estimates[i],
                                            fk.stderrs[i], tol, int(ok)))
        header = [f"x{k + 1}" for k in range(bundle.n)] + \
            ["u_pde", "u_mc", "stderr", "tolerance", "agree"]
        run.emit_csv("fk.csv", header, rows)
        run.emit_json("report.json", {
            "bias_bound": fk.bias_bound, "paths_failed": fk.paths_failed,
            "steps": fk.steps, "all_agree": all(verdicts),
            "seed": cfg["top"]["seed"],
        })
    run.finish()
    print(f"feynman-kac: {sum(verdicts)}/{len(verdicts)} probes agree "
          f"(bias_bound={fk.bias_bound:.2e})")
    return EXIT_OK


def cmd_flux_check(args) -> int:
    cfg = _load_cfg(args)
    run = Run(args.out, cfg, "flux-check", args.threads)
    with run.stage("build"):
        bundle = make_bundle(cfg)
        if cfg["solve"]["mode"] != "restricted":
            raise ConfigurationError("flux-check needs solve.mode = restricted "
                                     "(a whole-space run has no boundary)")
        if bundle.body is None:
            raise ConfigurationError("flux-check needs a [convex_set]")
        ladder = cfg["solve"]["mesh_ladder"] or [100, 200, 400]
        ladder = [int(m) for m in ladder]
        rhs = make_rhs(cfg, bundle.n)
    rows = []
    with run.stage("ladder"):
        for m in ladder:
            cfg_m = json.loads(json.dumps(cfg))
            if bundle.model_kind in ("rd", "ch"):
                cfg_m["model"]["cells_per_axis"] = m
            else:
                cfg_m["space"]["cells_per_axis"] = m
            b_m = make_bundle(cfg_m)
            prob = _problem(b_m, cfg["solve"]["lambda"], rhs, "restricted",
                            b_m.body, b_m.potential)
            sol = solve(prob)
            fx = flux_trace(sol, b_m.body, potential=b_m.potential)
            h = float(np.max(b_m.space.grid.cell_size))
            rows.append((m, h, fx.flux_norm, fx.identity_residual))
    with run.stage("report"):
        run.emit_csv("flux.csv", ["m", "h", "flux_norm", "identity_residual"], rows)
        fluxes = np.array([r[2] for r in rows])
        ms = np.array([r[0] for r in rows], dtype=float)
        order = float(-np.polyfit(np.log(ms), np.log(np.maximum(fluxes, 1e-300)), 1)[0])
        decreasing = bool(np.all(np.diff(fluxes) < 0))
        run.emit_json("report.json", {
            "empirical_order": order, "decreasing": decreasing,
            "finest_flux": float(fluxes[-1]), "seed": cfg["top"]["seed"],
        })
    run.finish()
    print(f"flux-check: order={order:.2f} decreasing={decreasing} "
          f"finest={fluxes[-1]:.3e}")
    return EXIT_OK


def cmd_sample_invariant(args) -> int:
    cfg = _load_cfg(args)
    run = Run(args.out, cfg, "sample-invariant", args.threads)
    with run.stage("build"):
        bundle = make_bundle(cfg)
        sde_cfg = cfg["sde"]
        drift = None
        if bundle.potential is not None:
            env = bundle.potential if hasattr(bundle.potential, "gradient") \
                else MoreauEnvelope(bundle.potential, sde_cfg["alpha"])
            drift = env.gradient
        settings = SDESettings(scheme=sde_cfg["scheme"], dt=sde_cfg["dt"],
                               horizon=sde_cfg["T"], paths=sde_cfg["paths"],
                               seed=cfg["top"]["seed"], alpha=sde_cfg["alpha"],
                               exponential=sde_cfg["exponential"])
    with run.stage("paths"):
        res = sample_invariant(bundle.space, bundle.body, drift, settings,
                               burn_in=sde_cfg["burn_in"],
                               keep_time=sde_cfg["keep_time"],
                               stride=sde_cfg["stride"], bins=sde_cfg["bins"],
                               potential=bundle.potential,
                               burn_dt=sde_cfg["burn_dt"])
    with run.stage("report"):
        rows = []
        for k in range(bundle.n):
            for b in range(len(res.counts[k])):
                rows.append((k + 1, res.edges[k][b], res.edges[k][b + 1],
                             int(res.counts[k][b])))
        run.emit_csv("histogram.csv", ["axis", "bin_lo", "bin_hi", "count"], rows)
        run.emit_json("report.json", {
            "samples": res.samples,
            "sup_cdf_distance": res.sup_cdf_distance,
            "burn_steps": res.burn_steps,
            "seed": cfg["top"]["seed"],
        })
    run.finish()
    print(f"sample-invariant: samples={res.samples} "
          f"sup_cdf={['%.4f' % d for d in res.sup_cdf_distance]}")
    return EXIT_OK


def cmd_validate_config(args) -> int:
    cfg = _load_cfg(args)
    make_bundle(cfg)
    json.dump(cfg, sys.stdout, sort_keys=True, indent=1)
    print()
    return EXIT_OK


def cmd_list_presets(args) -> int:
    for name in sorted(PRESETS):
        print(f"{name:20s} {PRESET_SUMMARIES[name]}")
    return EXIT_OK


def _add_common(p):
    p.add_argument("--config", help="path to a config file")
    p.add_argument("--preset", help="name of a built-in preset")
    p.add_argument("--out", default="neukol-out", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=1,
                   help="recorded in the manifest; kernels are deterministic "
                        "and single-threaded regardless")


COMMANDS = {
    "solve": cmd_solve,
    "penalize-sweep": cmd_penalize_sweep,
    "feynman-kac": cmd_feynman_kac,
    "flux-check": cmd_flux_check,
    "sample-invariant": cmd_sample_invariant,
    "validate-config": cmd_validate_config,
    "list-presets": cmd_list_presets,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="neukol",
                                 description="weighted-Galerkin / reflected-path "
                                             "experiments on convex sets")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name != "list-presets":
            _add_common(p)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as e:
        print(f"resource error: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (SolverError, DataError, GeometryError) as e:
        print(f"numerical failure [{type(e).__name__}]: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NeukolError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
