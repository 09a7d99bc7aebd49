"""Command-line entry point: ``fnslab <subcommand> --config PATH --out DIR``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load
from .experiments import ExperimentReport, run_scenario
from .lemmas import lemma_suite

SUBCOMMANDS = {
    "run": "run",
    "smalldata": "smalldata",
    "eps-refine": "eps_refine",
    "contraction": "contraction",
    "linear-check": "linear_check",
    "manufactured": "manufactured",
    "lemmas": "lemmas",
}

HELP = {
    "run": "integrate one trajectory from generated data",
    "smalldata": "small-data boundedness run plus ensemble constant fit",
    "eps-refine": "same data at successively halved cutoffs",
    "contraction": "twin runs from nearby data against a Gronwall envelope",
    "linear-check": "single linear modes against the matrix exponential",
    "manufactured": "temporal convergence order with a manufactured solution",
    "lemmas": "measure harmonic-analysis constants on a random ensemble",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fnslab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", type=Path, help="key = value configuration file")
        p.add_argument("--out", type=Path, default=Path("fnslab-out"), help="output directory")
        p.add_argument("--snapshots", choices=("none", "final", "all"), default="none",
                       help="which saved states to write as FNSS snapshots")
    return parser


def _lemmas(spec, lemma_spec, out: Path) -> ExperimentReport:
    report = ExperimentReport(spec.with_(kind="lemmas"))
    m = lemma_suite(lemma_spec, witness_dir=out / "witnesses")
    report.artifacts.append(m.write_csv(out / "lemmas.csv"))
    for row in m.rows:
        report.values[row.lemma] = row.max_ratio
    report.verdicts["AC4.finite"] = m.all_finite
    report.verdicts["AC4.commutator_j_stable"] = m.commutator_j_stable
    report.write(out)
    return report


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    kind = SUBCOMMANDS[args.command]
    try:
        spec, lemma_spec = load(args.config, kind)
    except (ConfigError, OSError) as exc:
        print(f"fnslab: configuration error: {exc}", file=sys.stderr)
        return 2
    args.out.mkdir(parents=True, exist_ok=True)
    if kind == "lemmas":
        report = _lemmas(spec, lemma_spec, args.out)
    else:
        report = run_scenario(spec, args.out, args.snapshots)
    for line in report.summary_lines():
        print(line)
    for note in report.notes:
        print(f"note: {note}")
    for name, value in report.values.items():
        print(f"{name} = {value}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
