"""``witness`` command-line front end.

Exit codes: 0 ran and detected nothing, 2 ran and at least one criterion
fired, 1 error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Optional

from fockwit import __version__
from fockwit.fock import PureState
from fockwit.oracle import schmidt_rank
from fockwit.statespec import SpecError, parse_state_spec, state_summary
from fockwit.witnesses import (
    CRITERIA,
    TRUNCATION_MODES,
    BatteryConfig,
    BatteryReport,
    CriterionResult,
    all_cuts,
    run_battery,
)

EXIT_CLEAN, EXIT_ERROR, EXIT_DETECTED = 0, 1, 2

CUTOFF_NOTE = (
    "full_variance used hard-truncated operators on a state with weight on the top "
    "cutoff level; its value depends on the cutoff (the GHZ state gives 0 at cutoff 2 "
    "and 4 at any cutoff >= 3). Rerun with --full-truncation exact for the untruncated value."
)


def _num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float):
        return _num(obj)
    if hasattr(obj, "item"):  # numpy scalar
        return _jsonable(obj.item())
    return obj


def result_record(r: CriterionResult) -> dict:
    return {
        "criterion": r.criterion,
        "inequality": r.inequality,
        "cut": None if r.cut is None else r.cut.label,
        "concludes": "fully entangled" if r.cut is None else f"entangled across {r.cut.label}",
        "params": _jsonable(r.params),
        "lhs": _num(r.lhs),
        "rhs": _num(r.rhs),
        "margin": _num(r.margin),
        "verdict": r.verdict,
        "truncation_warning": r.truncation_warning,
        "details": _jsonable(r.details),
        "error": r.error,
    }


def oracle_check(state, report: BatteryReport) -> dict:
    """Schmidt ranks for every cut and any fired cut the oracle contradicts."""
    if not isinstance(state, PureState):
        return {"skipped": "Schmidt-rank oracle needs a pure state"}
    ranks = {cut.label: schmidt_rank(state, cut)[0] for cut in all_cuts(state.n_modes)}
    contradictions = [
        {"criterion": r.criterion, "cut": r.cut.label, "params": _jsonable(r.params)}
        for r in report.fired
        if r.cut is not None and ranks[r.cut.label] < 2
    ]
    return {"schmidt_ranks": ranks, "contradictions": contradictions}


def build_report(spec_doc, state, report: BatteryReport, config: BatteryConfig,
                 elapsed: float, oracle: Optional[dict] = None) -> dict:
    warnings = [
        f"{r.criterion} {r.conclusion} {json.dumps(_jsonable(r.params), sort_keys=True)}"
        for r in report.truncation_warnings
    ]
    notes = []
    if any(r.criterion == "full_variance" and r.truncation_warning for r in report.results):
        notes.append(CUTOFF_NOTE)
    doc = {
        "tool": "witness",
        "version": __version__,
        "input": spec_doc,
        "state": state_summary(state),
        "config": {
            "max_degree": config.max_degree,
            "tolerance": config.tolerance,
            "criteria": list(config.criteria) if config.criteria else "all",
            "pair_truncation": config.pair_truncation,
            "full_truncation": config.full_truncation,
            "phase": "closed-form optimum over [0, pi)",
        },
        "results": [result_record(r) for r in report.results],
        "flags": {
            "any_fired": report.any_fired,
            "entangled_cuts": [c.label for c in report.entangled_cuts],
            "fully_entangled_via_theorem8": report.fully_entangled_via_theorem8,
            "fully_entangled_via_all_cuts": report.fully_entangled_via_all_cuts,
            "pure_full_via_theorem9": report.pure_full_via_theorem9,
        },
        "truncation_warnings": warnings,
        "notes": notes,
        "timing": {"wall_seconds": elapsed},
    }
    if oracle is not None:
        doc["oracle"] = oracle
    return doc


def _fmt(x) -> str:
    return "nan" if x is None else f"{x:.6g}"


def render_text(doc: dict) -> str:
    lines = [
        f"witness {doc['version']}  modes={doc['state']['n_modes']} dims={doc['state']['dims']} "
        f"pure={doc['state']['pure']}",
        "",
        f"{'criterion':<16} {'cut':<8} {'params':<34} {'lhs':>12} {'rhs':>12} {'margin':>12}  verdict",
        "-" * 106,
    ]
    for r in doc["results"]:
        params = ",".join(
            f"{k}={v}" for k, v in r["params"].items() if k != "truncation"
        ).replace(" ", "")
        flag = " *" if r["truncation_warning"] else ""
        lines.append(
            f"{r['criterion']:<16} {r['cut'] or 'full':<8} {params[:34]:<34} "
            f"{_fmt(r['lhs']):>12} {_fmt(r['rhs']):>12} {_fmt(r['margin']):>12}  {r['verdict']}{flag}"
        )
        if r["error"]:
            lines.append(f"    error: {r['error']}")
    f = doc["flags"]
    lines += [
        "",
        f"entangled cuts: {', '.join(f['entangled_cuts']) or 'none'}",
        f"fully entangled (phase-optimized variance): {f['fully_entangled_via_theorem8']}",
        f"fully entangled (every cut, pure state):    {f['fully_entangled_via_all_cuts']}",
        f"fully entangled (pure-state moment test):   {f['pure_full_via_theorem9']}",
    ]
    if doc["truncation_warnings"]:
        lines.append(f"* {len(doc['truncation_warnings'])} result(s) carry a truncation warning")
    for note in doc["notes"]:
        lines.append(f"note: {note}")
    if "oracle" in doc:
        o = doc["oracle"]
        if "skipped" in o:
            lines.append(f"oracle: {o['skipped']}")
        else:
            ranks = ", ".join(f"{k}={v}" for k, v in o["schmidt_ranks"].items())
            lines.append(f"oracle Schmidt ranks: {ranks}; contradictions: {len(o['contradictions'])}")
    lines.append(f"elapsed: {doc['timing']['wall_seconds']:.3f} s")
    return "\n".join(lines)


def _parse_criteria(text: str):
    if text == "all":
        return None
    names = tuple(x.strip() for x in text.split(",") if x.strip())
    unknown = [n for n in names if n not in CRITERIA]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown criteria {unknown}; choose from {', '.join(CRITERIA)}")
    return names


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="witness", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"witness {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="evaluate the criteria battery on a state")
    run.add_argument("--state", required=True, type=Path, help="JSON state-spec file")
    run.add_argument("--max-degree", type=int, default=3, help="largest degree per mode (default 3)")
    run.add_argument("--tolerance", type=float, default=1e-9, help="firing threshold on the margin")
    run.add_argument("--criteria", type=_parse_criteria, default=None,
                     help=f"comma-separated subset of {', '.join(CRITERIA)} (default all)")
    run.add_argument("--format", choices=("text", "json"), default="text")
    run.add_argument("--seed", type=int, default=None, help="seed for random constructors")
    run.add_argument("--oracle", action="store_true",
                     help="cross-check fired cuts against Schmidt ranks (pure states)")
    run.add_argument("--pair-truncation", choices=TRUNCATION_MODES, default="exact")
    run.add_argument("--full-truncation", choices=TRUNCATION_MODES, default="hard")
    run.add_argument("--output", type=Path, default=None, help="write the report here instead of stdout")
    return parser


def run(args) -> int:
    try:
        text = args.state.read_text()
    except OSError as exc:
        print(f"witness: cannot read {args.state}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        spec = parse_state_spec(text)
        config = BatteryConfig(
            max_degree=args.max_degree,
            tolerance=args.tolerance,
            criteria=args.criteria,
            pair_truncation=args.pair_truncation,
            full_truncation=args.full_truncation,
        )
        t0 = time.perf_counter()
        state = spec.build(args.seed)
        report = run_battery(state, config)
        oracle = oracle_check(state, report) if args.oracle else None
        elapsed = time.perf_counter() - t0
    except (SpecError, ValueError, RuntimeError) as exc:
        print(f"witness: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    doc = build_report(json.loads(text), state, report, config, elapsed, oracle)
    out = json.dumps(doc, indent=2) if args.format == "json" else render_text(doc)
    if args.output is not None:
        args.output.write_text(out + "\n")
    else:
        print(out)
    return EXIT_DETECTED if report.any_fired else EXIT_CLEAN


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.command == "run":
        return run(args)
    return EXIT_ERROR  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
