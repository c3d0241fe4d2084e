"""Command line entry point."""

from __future__ import annotations

import argparse
import sys

from . import harness

EXIT_OK, EXIT_ERROR, EXIT_ACCEPTANCE = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="subnyq", description="Sub-Nyquist radar scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in harness.MODULES:
        p = sub.add_parser(name, help=f"run a {name} scenario")
        p.add_argument("--scenario", default=None,
                       help="builtin scenario name or YAML/JSON file (default: builtin of this name)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--out-dir", default="subnyq-out")
        p.add_argument("--snr-db", type=float, default=None)
        p.add_argument("--plot", action="store_true", help="also render PNGs (needs matplotlib)")
        if name == "temporal":
            p.add_argument("--pfa", type=float, default=None)
            p.add_argument("--max-iter", type=int, default=None)
        if name == "specx":
            p.add_argument("--epochs", type=int, default=None)
            p.add_argument("--nb", type=int, default=None)
    return ap


def _scenario(args) -> harness.Scenario:
    ref = args.scenario or ("temporal-demo" if args.command == "temporal" else args.command)
    d = harness.load_scenario(ref).to_dict()
    if d["module"] != args.command:
        raise harness.ScenarioError(f"scenario is for {d['module']!r}, not {args.command!r}")
    if args.seed is not None:
        d["seed"] = args.seed
    if args.trials is not None:
        d["trials"] = args.trials
    over = {"snr_db": args.snr_db, "Pfa": getattr(args, "pfa", None),
            "max_iter": getattr(args, "max_iter", None), "epochs": getattr(args, "epochs", None),
            "Nb": getattr(args, "nb", None)}
    for k, v in over.items():
        if v is not None:
            if k not in d["params"]:
                raise harness.ScenarioError(f"--{k.lower()} does not apply to {args.command}")
            d["params"][k] = v
    return harness.Scenario.from_dict(d)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        sc = _scenario(args)
        rep = harness.run(sc, args.out_dir)
        plots = []
        if args.plot:
            from . import plotting
            plots = plotting.render(args.out_dir, rep.artifacts)
    except Exception as exc:  # surfaced with context, mapped to exit 1
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print("----- BEGIN REPORT -----")
    for k, v in sorted(rep.aggregate.items()):
        print(f"{k}: {v}")
    print(f"passed: {rep.passed()}")
    for k, v in sorted(rep.artifacts.items()):
        print(f"artifact {k}: {args.out_dir}/{v}")
    for name in plots:
        print(f"figure: {args.out_dir}/{name}")
    print("----- END REPORT -----")
    return EXIT_OK if rep.passed() else EXIT_ACCEPTANCE


if __name__ == "__main__":
    sys.exit(main())
