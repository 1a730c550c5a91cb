"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings

import numpy as np

from . import __version__
from .codes import (
    CODE_NAMES,
    check_prevention_condition,
    codewords_from_json,
    error_orbit,
    make_code,
    search_three_qubit_codes,
)
from .experiments import THREADS_ENV, ConfigError, load_config, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("zenocode")


def _emit(obj, as_json: bool, text: str) -> None:
    if as_json:
        print(json.dumps(obj, indent=2))
    else:
        print(text)


def cmd_run(args) -> int:
    try:
        spec = load_config(args.config)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        print(f"error: invalid config field {e}", file=sys.stderr)
        return EXIT_USAGE
    log.info("running %s experiment on %s", spec.experiment, spec.code)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            result = run_experiment(spec)
    except ConfigError as e:
        print(f"error: invalid config field {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OverflowError, RuntimeError, ValueError, np.linalg.LinAlgError) as e:
        print(f"error: simulation failed: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    stem = os.path.splitext(os.path.basename(args.config))[0]
    csv_path, json_path = result.write(args.out, stem)
    summary = result.summary()
    lines = [f"{spec.experiment} on {spec.code}: {len(result.records)} grid points -> {csv_path}, {json_path}"]
    for key, val in summary["slopes"].items():
        if val is not None:
            lines.append(f"  slope[{key}] = {val['slope']:+.3f} +/- {val['stderr']:.3f}")
    for key, val in summary["extras"].items():
        if not isinstance(val, list):
            lines.append(f"  {key} = {val}")
    _emit(summary, args.json, "\n".join(lines))
    return EXIT_OK


def analyze(name: str) -> dict:
    code = make_code(name)
    orbits = [error_orbit(code, i).to_dict() for i in range(code.k)]
    return {"code": name, "n_physical": code.n_physical, "codewords": code.k,
            "orbits": orbits, "prevention": check_prevention_condition(code).to_dict()}


def cmd_analyze_code(args) -> int:
    if args.name not in CODE_NAMES:
        print(f"error: unknown code {args.name!r}; known: {', '.join(CODE_NAMES)}", file=sys.stderr)
        return EXIT_USAGE
    rep = analyze(args.name)
    lines = [f"{args.name}: {rep['codewords']} codewords on {rep['n_physical']} qubits"]
    for o in rep["orbits"]:
        lines.append(
            f"  |{o['source']}_E>: {len(o['distinct'])} distinct single-error states, "
            f"{o['orthogonal_count']} mutually orthogonal, {o['new_count']} new "
            f"(max overlap with other codewords {o['overlaps_with_other_codewords']:.2e})"
        )
    p = rep["prevention"]
    verdict = "pass" if p["pass"] else f"FAIL (witness {p['witness']['error']}: |{p['witness']['from']}_E> -> |{p['witness']['to']}_E>, overlap {p['worst_overlap']:.3f})"
    lines.append(f"  prevention condition: {verdict}")
    _emit(rep, args.json, "\n".join(lines))
    return EXIT_OK


def cmd_check_code(args) -> int:
    try:
        with open(args.file) as fh:
            words = codewords_from_json(fh.read())
        rep = check_prevention_condition(words)
    except FileNotFoundError:
        print(f"error: file not found: {args.file}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:  # includes json.JSONDecodeError
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    d = rep.to_dict()
    text = f"prevention condition: {'pass' if rep.passed else 'FAIL'} (worst overlap {rep.worst_overlap:.3e})"
    if rep.witness:
        text += f"\n  witness: {rep.witness[0]} maps codeword {rep.witness[1]} onto {rep.witness[2]}"
    text += f"\n  diagonal violation {rep.diagonal_violation:.3e}; detects all single errors: {rep.detects_all}"
    _emit(d, args.json, text)
    return EXIT_OK


def cmd_search(args) -> int:
    if args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    rep = search_three_qubit_codes(args.trials, args.seed, polish=not args.no_polish)
    d = rep.to_dict()
    text = (
        f"searched {rep.trials} random three-qubit codes (seed {rep.seed})\n"
        f"  min violation {rep.min_violation:.4f}"
        + (f", after polishing {rep.polished_violation:.4f}" if rep.polished_violation is not None else "")
        + f"\n  repetition code: pairwise condition {'pass' if rep.repetition_pairwise_pass else 'fail'}, "
        f"violation {rep.repetition_violation:.3f}\n  {d['conclusion']}"
    )
    _emit(d, args.json, text)
    return EXIT_OK


def cmd_list_codes(args) -> int:
    rows = [{"name": n, "n_physical": make_code(n).n_physical, "codewords": make_code(n).k} for n in CODE_NAMES]
    _emit(rows, args.json, "\n".join(f"{r['name']:28s} {r['codewords']} codewords on {r['n_physical']} qubits" for r in rows))
    return EXIT_OK


def cmd_version(args) -> int:
    _emit({"version": __version__}, args.json, __version__)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zenocode",
        description="Zeno-type error prevention simulator.",
        epilog=f"Set {THREADS_ENV} to control worker processes (default: number of logical CPUs).",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze-code", help="orbit counts and prevention check for a named code")
    p.add_argument("name")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze_code)

    p = sub.add_parser("check-code", help="check candidate codewords from a JSON file")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check_code)

    p = sub.add_parser("search-3qubit", help="randomized search for three-qubit codes")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-polish", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("list-codes", help="list available codes")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_list_codes)

    p = sub.add_parser("version", help="print the package version")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_version)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
