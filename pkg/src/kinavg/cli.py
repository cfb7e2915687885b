"""``kinavg`` command line: one subcommand per experiment kind plus ``run`` and ``plot-data``."""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import KINDS, load_config
from .errors import ConfigurationError
from .experiments import emit_plot_data, run

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _common(p):
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument("--out", type=Path, help="output directory (default: ./runs/<kind>)")
    p.add_argument("--threads", type=int, default=None, help="worker threads for sweeps")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--tolerance-scale", type=float, default=None, help="multiply every assertion tolerance")


def build_parser():
    ap = argparse.ArgumentParser(prog="kinavg", description="Velocity-averaging experiments.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="run the experiment named in --config"))
    for kind in KINDS:
        _common(sub.add_parser(kind, help=f"run a {kind} experiment"))
    pd = sub.add_parser("plot-data", help="reshape a result JSON into a tidy CSV")
    pd.add_argument("result", type=Path)
    pd.add_argument("--kind", required=True, choices=["bands", "comparison", "eps_sweep"])
    pd.add_argument("--out", type=Path, required=True)
    return ap


def _assemble(args):
    cfg = load_config(args.config) if args.config else {}
    if args.command == "run":
        if "kind" not in cfg:
            raise ConfigurationError("invalid config:\n  <root>: 'run' needs a config with a kind")
    elif cfg.get("kind", args.command) != args.command:
        raise ConfigurationError(f"config kind {cfg['kind']!r} does not match subcommand {args.command!r}")
    else:
        cfg["kind"] = args.command
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.tolerance_scale is not None:
        cfg["tolerance_scale"] = args.tolerance_scale
    if args.threads is not None:
        cfg["threads"] = args.threads
    out = args.out or Path(cfg.get("out", Path("runs") / cfg["kind"]))
    return cfg, out, cfg.get("threads", 1)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "plot-data":
            print(emit_plot_data(args.result, args.kind, args.out))
            return EXIT_OK
        cfg, out, threads = _assemble(args)
        manifest = run(cfg, out, threads=threads)
    except ConfigurationError as exc:
        print(f"kinavg: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for a in manifest.assertions:
        print(f"{'PASS' if a['passed'] else 'FAIL'}  {a['name']}" + (f"  ({a['detail']})" if a["detail"] else ""))
    print(json.dumps({"manifest": str(Path(out) / "manifest.json"), "runs": manifest.runs,
                      "passed": manifest.passed}))
    return EXIT_OK if manifest.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
