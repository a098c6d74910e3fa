"""Batch CLI: ingest a snapshot, run the pipeline, write the report bundle.

Subcommands: ingest, fit, gap, classes, simulate, report.  Every output
file embeds the snapshot label, package version and the full run
configuration; CSVs carry them as leading '#' comment lines, JSON files
in a "provenance" object.  CSV bodies are byte-stable for a fixed input
and configuration; only the generated_at field in JSON varies between
runs.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import fit_power_law, theory_envelope
from .classes import ClassFlags, cross_tab, proportion_in_A_by_omega
from .gap import GapParams, classify, gap_score
from .ingest import MalformedLine, load_stripped
from .synth import compare_gap, simulate

GAP_N_START = 301
GAP_N_END_CAP = 10000

OUTPUT_ENV_VAR = "SLOANE_GAP_OUTPUT"


class CliError(Exception):
    """User-facing failure; message goes to stderr, exit code 1."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on besides the input bytes."""

    input_path: str | None = None
    n_max: int = 10000
    percentile: float = 82.0
    c_small: int = 100
    c_large: int = 350
    window: int = 100
    omega_pct: float = 95.0
    functions: int = 400000
    terms: int = 20
    seed: int = 0
    output_dir: str = "out"
    strict: bool = False
    no_synth: bool = False
    no_plots: bool = False

    def gap_params(self) -> GapParams:
        n_end = min(self.n_max, GAP_N_END_CAP)
        if n_end < GAP_N_START:
            raise CliError(
                f"--n-max {self.n_max} leaves no study range"
                f" (needs at least {GAP_N_START})"
            )
        return GapParams(
            n_start=GAP_N_START,
            n_end=n_end,
            percentile=self.percentile,
            c_small=self.c_small,
            c_large=self.c_large,
        )

    def to_json_dict(self) -> dict:
        # provenance records only what shapes the numbers; where the
        # files came from or went is visible elsewhere
        excluded = {"input_path", "output_dir", "no_synth", "no_plots"}
        return {k: v for k, v in asdict(self).items() if k not in excluded}


def _provenance(config: RunConfig, snapshot_label: str, timestamp: bool) -> dict:
    prov = {
        "snapshot_label": snapshot_label,
        "version": f"sloanegap {__version__}",
        "config": config.to_json_dict(),
    }
    if timestamp:
        prov["generated_at"] = datetime.datetime.now().isoformat(timespec="seconds")
    return prov


def _comment_block(config: RunConfig, snapshot_label: str) -> str:
    cfg = json.dumps(config.to_json_dict(), sort_keys=True, separators=(",", ":"))
    return (
        f"# snapshot: {snapshot_label}\n"
        f"# generator: sloanegap {__version__}\n"
        f"# config: {cfg}\n"
    )


def _write_csv(path: Path, config: RunConfig, snapshot_label: str, body) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(_comment_block(config, snapshot_label))
        body(fh)


def _write_json(path: Path, config: RunConfig, snapshot_label: str, payload: dict) -> None:
    doc = dict(payload)
    doc["provenance"] = _provenance(config, snapshot_label, timestamp=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(config: RunConfig) -> Path:
    path = Path(config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_table(config: RunConfig):
    if config.input_path is None:
        raise CliError("--input PATH is required for this subcommand")
    path = Path(config.input_path)
    if not path.is_file():
        raise CliError(f"input file not found: {path}")
    return load_stripped(path, n_max=config.n_max, strict=config.strict)


def _print(summary: dict) -> None:
    print(json.dumps(summary, sort_keys=True))


def cmd_ingest(config: RunConfig) -> int:
    table, stats = _load_table(config)
    out = _outdir(config)
    _write_csv(out / "counts.csv", config, table.snapshot_label, table.write_csv)
    _write_json(out / "counts.json", config, table.snapshot_label, table.to_json_dict())
    _print(
        {
            "sequences_parsed": stats.sequences_parsed,
            "total_terms_seen": table.total_terms_seen,
            "n_max": table.n_max,
            "skipped_lines": stats.skipped_lines,
        }
    )
    return 0


def cmd_fit(config: RunConfig) -> int:
    table, _ = _load_table(config)
    fit = fit_power_law(table, (1, table.n_max))
    out = _outdir(config)
    _write_json(out / "fit.json", config, table.snapshot_label, fit.to_json_dict())
    envelope = theory_envelope((3, table.n_max), h=fit.k)

    def body(fh):
        fh.write("n,upper,lower,k_bound\n")
        for pt in envelope:
            fh.write(f"{pt.n},{pt.upper},{pt.lower},{pt.k_upper_bound}\n")

    _write_csv(out / "envelope.csv", config, table.snapshot_label, body)
    _print(fit.to_json_dict())
    return 0


def cmd_gap(config: RunConfig) -> int:
    table, _ = _load_table(config)
    params = config.gap_params()
    partition = classify(table, params)
    score = gap_score(table, params)
    out = _outdir(config)
    _write_csv(
        out / "partition.csv",
        config,
        table.snapshot_label,
        lambda fh: partition.write_csv(fh, table),
    )
    summary = {
        "size_A": partition.size_A,
        "fraction_A": partition.fraction_A,
        "gap_score": score,
        "boundary_method": (
            "nearest-rank percentile of counts over [n-c, n+c]"
            " clipped to the study range, strict membership"
        ),
    }
    _write_json(out / "gap.json", config, table.snapshot_label, summary)
    _print({k: summary[k] for k in ("size_A", "fraction_A", "gap_score")})
    return 0


def cmd_classes(config: RunConfig) -> int:
    table, _ = _load_table(config)
    params = config.gap_params()
    partition = classify(table, params)
    flags = ClassFlags.compute(
        (params.n_start, params.n_end), window=config.window, pct=config.omega_pct
    )
    tab = cross_tab(partition, flags)
    out = _outdir(config)
    _write_csv(out / "table2.csv", config, table.snapshot_label, tab.write_csv)
    _write_figure3_csv(out / "figure3.csv", config, table.snapshot_label, partition, flags)
    _print(
        {
            row.name: {"in_A": row.count_in_A, "ratio": _json_num(row.membership_ratio)}
            for row in tab.rows
        }
    )
    return 0


def _json_num(x: float):
    return x if math.isfinite(x) else None


def _write_figure3_csv(path, config, snapshot_label, partition, flags) -> None:
    proportions = proportion_in_A_by_omega(partition, flags)
    counts = np.bincount(flags.omega)

    def body(fh):
        fh.write("omega,proportion_in_A,count\n")
        for w in sorted(proportions):
            fh.write(f"{w},{proportions[w]},{counts[w]}\n")

    _write_csv(path, config, snapshot_label, body)


def cmd_simulate(config: RunConfig) -> int:
    result = simulate(
        config.seed,
        num_functions=config.functions,
        terms_per_function=config.terms,
        v_max=config.n_max,
    )
    out = _outdir(config)
    label = result.table.snapshot_label

    def body(fh):
        fh.write("value,count\n")
        for v in range(1, result.v_max + 1):
            fh.write(f"{v},{result.table.counts[v]}\n")

    _write_csv(out / "synthetic_counts.csv", config, label, body)
    summary = {
        "seed": result.seed,
        "num_functions": result.num_functions,
        "terms_per_function": result.terms_per_function,
        "total_values": result.total_values,
        "counted": result.counted,
        "discarded": result.discarded,
    }
    if config.input_path is not None:
        table, _ = _load_table(config)
        comparison = compare_gap(table, result, config.gap_params())
        payload = comparison.to_json_dict()
        payload["model"] = _model_disclosure()
        _write_json(out / "comparison.json", config, table.snapshot_label, payload)
        summary["ratio"] = _json_num(comparison.ratio)
    _print(summary)
    return 0


def _model_disclosure() -> dict:
    # Aggregation choices that affect comparability of synthetic runs.
    return {"deduplicate_functions": False, "value_cap": None}


def cmd_report(config: RunConfig) -> int:
    table, _ = _load_table(config)
    out = _outdir(config)
    label = table.snapshot_label

    fit = fit_power_law(table, (1, table.n_max))
    _write_json(out / "fit.json", config, label, fit.to_json_dict())

    params = config.gap_params()
    partition = classify(table, params)
    score = gap_score(table, params)
    _write_csv(
        out / "partition.csv", config, label, lambda fh: partition.write_csv(fh, table)
    )

    flags = ClassFlags.compute(
        (params.n_start, params.n_end), window=config.window, pct=config.omega_pct
    )
    tab = cross_tab(partition, flags)
    _write_csv(out / "table2.csv", config, label, tab.write_csv)
    _write_figure3_csv(out / "figure3.csv", config, label, partition, flags)

    def table1_body(fh):
        fh.write("n,count,limit_value\n")
        for i, flagged in enumerate(flags.is_square):
            if flagged and not partition.in_A[i]:
                n = params.n_start + i
                limit = int(np.floor(partition.boundary[i])) + 1
                fh.write(f"{n},{table.counts[n]},{limit}\n")

    _write_csv(out / "table1.csv", config, label, table1_body)

    comparison = None
    if not config.no_synth:
        result = simulate(
            config.seed,
            num_functions=config.functions,
            terms_per_function=config.terms,
            v_max=config.n_max,
        )
        comparison = compare_gap(table, result, params)
        payload = comparison.to_json_dict()
        payload["model"] = _model_disclosure()
        _write_json(out / "comparison.json", config, label, payload)

    if not config.no_plots:
        from . import plots

        plots.cloud_figure(table, out / "cloud.png", fit=fit, partition=partition)
        plots.omega_figure(
            proportion_in_A_by_omega(partition, flags), out / "figure3.png"
        )
        if comparison is not None:
            plots.comparison_figure(table, result.table, out / "comparison.png")

    summary = {
        "size_A": partition.size_A,
        "fraction_A": partition.fraction_A,
        "gap_score": score,
        "slope": fit.slope,
        "r2": fit.r2,
        "k": fit.k,
    }
    if comparison is not None:
        summary["gap_score_synth"] = comparison.gap_score_synth
        summary["gap_score_ratio"] = _json_num(comparison.ratio)
    _print(summary)
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "fit": cmd_fit,
    "gap": cmd_gap,
    "classes": cmd_classes,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="PATH", help="stripped snapshot file")
    common.add_argument("--n-max", type=int, default=10000, help="counting range upper bound")
    common.add_argument("--percentile", type=float, default=82.0, help="boundary percentile")
    common.add_argument("--c-small", type=int, default=100, help="window half-width for n <= 1000")
    common.add_argument("--c-large", type=int, default=350, help="window half-width for n > 1000")
    common.add_argument("--window", type=int, default=100, help="factor-count window half-width")
    common.add_argument("--omega-pct", type=float, default=95.0, help="factor-count percentile")
    common.add_argument("--functions", type=int, default=400000, help="synthetic functions to sample")
    common.add_argument("--terms", type=int, default=20, help="evaluations per synthetic function")
    common.add_argument("--seed", type=int, default=0, help="simulation seed")
    common.add_argument("--output-dir", default="out", help=f"output directory (overridden by ${OUTPUT_ENV_VAR})")
    common.add_argument("--strict", action="store_true", help="fail on the first malformed input line")

    parser = argparse.ArgumentParser(
        prog="sloanegap",
        description="Occurrence statistics of an integer-sequence snapshot: "
        "power-law fit, gap partition, number classes, synthetic control cloud.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="build and write the occurrence table")
    sub.add_parser("fit", parents=[common], help="fit the power law and write the envelope")
    sub.add_parser("gap", parents=[common], help="classify above/below and score the gap")
    sub.add_parser("classes", parents=[common], help="cross-tabulate number classes against the gap")
    sub.add_parser("simulate", parents=[common], help="generate the synthetic cloud")
    report = sub.add_parser("report", parents=[common], help="write the full report bundle")
    report.add_argument("--no-synth", action="store_true", help="skip the synthetic comparison")
    report.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    output_dir = os.environ.get(OUTPUT_ENV_VAR) or args.output_dir
    return RunConfig(
        input_path=args.input,
        n_max=args.n_max,
        percentile=args.percentile,
        c_small=args.c_small,
        c_large=args.c_large,
        window=args.window,
        omega_pct=args.omega_pct,
        functions=args.functions,
        terms=args.terms,
        seed=args.seed,
        output_dir=output_dir,
        strict=args.strict,
        no_synth=getattr(args, "no_synth", False),
        no_plots=getattr(args, "no_plots", False),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        return _COMMANDS[args.command](config)
    except (CliError, MalformedLine, OSError, ValueError) as exc:
        print(f"sloanegap: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
