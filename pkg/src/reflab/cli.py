"""Command line entry point.

Subcommands: single, sweep, ensemble, capacity, validate.  Exit codes:
0 success, 1 validation failure (a `validate` check failed), 2 config
error (bad file, bad keys, bad values; argparse usage errors also exit 2),
3 runtime failure (solver non-convergence, non-finite states, I/O).
"""
import argparse
import os
import sys

from .checks import render_report, run_battery
from .config import ConfigError, read_config, standard_config
from .runner import (run_capacity, run_ensemble, run_single, run_sweep,
                     _manifest, _write_text)
from .solver import NonConvergence, NonFinite


def _parser():
    ap = argparse.ArgumentParser(
        prog="reflab",
        description="penalized reflection experiments: obstacle SPDE "
                    "trajectories, penalty sweeps, ensembles, capacity")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = dict(
        single="solve one trajectory and write trajectory + ledger CSVs",
        sweep="coupled penalty sweep on one path, write the report CSV",
        ensemble="Monte Carlo over paths, write per-path and mean/se CSVs",
        capacity="estimate parabolic capacity of the configured cell set",
        validate="run the library invariant battery and report margins",
    )
    for name in ("single", "sweep", "ensemble", "capacity", "validate"):
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", metavar="PATH",
                       help="INI config; omitted = the standard scenario")
        p.add_argument("--out", metavar="DIR",
                       help="output directory (default: config out_dir)")
        p.add_argument("--seed-override", type=int, metavar="SEED",
                       help="replace the config's path seed / base seed")
        p.add_argument("--threads", type=int, metavar="N",
                       help="worker processes for ensemble paths")
    return ap


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = read_config(args.config) if args.config else standard_config()
    except ConfigError as e:
        print("config error:", file=sys.stderr)
        for msg in e.errors:
            print(f"  - {msg}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if args.threads is not None:
        if args.threads < 1:
            print("config error: --threads must be positive", file=sys.stderr)
            return 2
        cfg.threads = args.threads
    out = args.out or cfg.out_dir
    seed = args.seed_override

    try:
        if args.command == "single":
            rec = run_single(cfg, out, seed=seed)
            print(f"single: {rec.nt} steps, final |u|_2 = "
                  f"{rec.norms['l2'][-1]:.6g}, ledger residual = "
                  f"{rec.ledger.final_residual:.3e} -> {out}")
        elif args.command == "sweep":
            rep = run_sweep(cfg, out, seed=seed)
            ns = ", ".join(f"{row['n']:g}" for row in rep["rows"])
            print(f"sweep over n = {ns} -> {out}")
        elif args.command == "ensemble":
            summary = run_ensemble(cfg, out, seed=seed)
            done = summary["completed"]
            print(f"ensemble: {done}/{summary['num_paths']} paths -> {out}")
            if done < summary["num_paths"]:
                for f in summary["failures"]:
                    print(f"  path {f['path_index']} failed: {f['error']}",
                          file=sys.stderr)
        elif args.command == "capacity":
            res = run_capacity(cfg, out)
            print(f"capacity: {res['value']:.6g} "
                  f"(reflected {res['reflected_value']:.6g}, "
                  f"converged={res['converged']}) -> {out}")
        else:  # validate
            results = run_battery()
            text = render_report(results)
            os.makedirs(out, exist_ok=True)
            sha = _write_text(os.path.join(out, "validate.txt"), text)
            _manifest(out, cfg, "validate", {}, {"validate.txt": sha},
                      [r.name for r in results if not r.ok], 0.0)
            print(text, end="")
            if any(not r.ok for r in results):
                return 1
    except (NonConvergence, NonFinite) as e:
        print(f"runtime failure: {e}", file=sys.stderr)
        return 3
    except Exception as e:
        print(f"runtime failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
