"""Command-line entry point: `qpower <verb> [--config FILE] [flags] [--override k=v ...]`.

Flags override config-file values, and --override entries override both.
Exit status: 0 when the experiment's pass gate holds, 1 when it fails,
2 on usage or configuration errors.
"""

import argparse
import json
import sys

from .experiments import ExperimentConfig, run_experiment

_VERBS = (
    "run",
    "npm",
    "qnpm",
    "subspace",
    "lambda-q",
    "prepare-v1",
    "tomography",
    "hard-instance",
    "lb-curve",
    "gpe-calibrate",
    "pmf-dump",
)


def _parse_override(item):
    if "=" not in item:
        raise argparse.ArgumentTypeError(f"override must be key=value, got {item!r}")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def build_parser():
    parser = argparse.ArgumentParser(prog="qpower", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in _VERBS:
        p = sub.add_parser(verb)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--override", action="append", default=[], type=_parse_override,
                       metavar="KEY=VALUE")
        p.add_argument("--d", default=None, help="dimension (or JSON list for sweeps)")
        p.add_argument("--q", type=int, default=None)
        p.add_argument("--gamma", type=float, default=None)
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        if verb == "tomography":
            p.add_argument("--mode", choices=["basis", "unbiased", "refined"], default=None)
        if verb == "gpe-calibrate":
            p.add_argument("--a", type=float, default=None)
            p.add_argument("--s", type=float, default=None)
            p.add_argument("--N", type=int, default=None)
            p.add_argument("--exact", action="store_true")
        if verb == "pmf-dump":
            p.add_argument("--s", type=float, default=None)
            p.add_argument("--c", type=float, default=None)
            p.add_argument("--variant", choices=["full", "truncated", "modular"], default=None)
            p.add_argument("--L", type=float, default=None)
            p.add_argument("--R", type=float, default=None)
            p.add_argument("--N", type=int, default=None)
    return parser


def _assemble_config(args):
    data = {}
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    if args.verb != "run":
        data["experiment"] = args.verb
    flag_keys = ("d", "q", "gamma", "eps", "delta", "trials", "seed", "out",
                 "mode", "a", "s", "N", "exact", "c", "variant", "L", "R")
    for key in flag_keys:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            data[key] = val
    for key, value in args.override:
        data[key] = value
    if isinstance(data.get("d"), str):
        try:
            data["d"] = json.loads(data["d"])
        except json.JSONDecodeError:
            raise ValueError(f"config.d: cannot parse {data['d']!r}")
    return ExperimentConfig.from_dict(data)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _assemble_config(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"qpower: configuration error: {exc}", file=sys.stderr)
        return 2
    summary = run_experiment(cfg)
    print(json.dumps(summary, indent=2, sort_keys=True, default=float))
    return 0 if summary.get("passed", True) else 1


if __name__ == "__main__":
    sys.exit(main())
