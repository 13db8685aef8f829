"""Command-line front end: analyze, simulate, generate, threshold.

Exit codes: 0 success, 2 bad arguments, 3 unreadable or malformed digit
file, 4 generation ceiling exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bayes import N_DIGITS, DigitCounts, DirichletPrior, MixturePrior, Prior
from .constants import (
    CONSTANTS,
    DEFAULT_CEILING,
    DigitFileError,
    GenerationCeilingError,
    generate_digits,
    ingest_digit_file,
)
from .freq import critical_value, threshold_counts, threshold_log_bf
from .runner import (
    AnalysisConfig,
    SimulationConfig,
    Trajectory,
    run_simulation,
    run_trajectory,
    trajectory_from_counts,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIGIT_FILE = 3
EXIT_CEILING = 4

SCHEMA_VERSION = 1
FIXED_COLUMNS = ["N", "log_bf_a1", "log_bf_a50", "log_bf_mix", "log_bf_max", "log_bf_threshold"]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise ValueError(text)
    return v


def parse_prior(token: str) -> tuple[str, Prior]:
    """``a<v>`` is a symmetric Dirichlet D(v); ``mix:<a1>:<a2>:<w>`` a mixture."""
    token = token.strip()
    try:
        if token.startswith("mix"):
            parts = token.split(":")
            if len(parts) != 4:
                raise ValueError(token)
            a1, a2, w = _positive_float(parts[1]), _positive_float(parts[2]), float(parts[3])
            prior = MixturePrior(DirichletPrior.symmetric(a1), DirichletPrior.symmetric(a2), w)
            return "mix", prior
        if token.startswith("a"):
            prior = DirichletPrior.symmetric(_positive_float(token[1:]))
            return prior.label, prior
    except ValueError:
        pass
    raise UsageError(f"bad prior {token!r}; expected a<value> or mix:<a1>:<a2>:<w>")


def parse_priors(text: str) -> dict[str, Prior]:
    out: dict[str, Prior] = {}
    for token in filter(None, (t.strip() for t in text.split(","))):
        label, prior = parse_prior(token)
        if label in out:
            raise UsageError(f"prior {label!r} given twice")
        out[label] = prior
    if not out:
        raise UsageError("no priors given")
    return out


def parse_bias(text: str) -> tuple[float, ...]:
    """``"0:0.11"`` -> digit 0 gets 0.11, the rest share the remainder evenly."""
    probs: dict[int, float] = {}
    for item in filter(None, (t.strip() for t in text.split(","))):
        try:
            d, p = item.split(":")
            digit, prob = int(d), float(p)
        except ValueError:
            raise UsageError(f"bad bias entry {item!r}; expected <digit>:<probability>") from None
        if not 0 <= digit < N_DIGITS or digit in probs or not 0.0 <= prob <= 1.0:
            raise UsageError(f"bad bias entry {item!r}")
        probs[digit] = prob
    rest = [d for d in range(N_DIGITS) if d not in probs]
    remainder = 1.0 - sum(probs.values())
    if remainder < -1e-12 or (not rest and abs(remainder) > 1e-12):
        raise UsageError(f"bias probabilities sum to {sum(probs.values())!r}, not 1")
    share = max(remainder, 0.0) / len(rest) if rest else 0.0
    p = np.array([probs.get(d, share) for d in range(N_DIGITS)])
    return tuple(float(v) for v in p / p.sum())


def parse_counts(text: str) -> DigitCounts:
    try:
        vals = [int(v) for v in text.split(",")]
        counts = DigitCounts(tuple(vals))
    except ValueError:
        raise UsageError(f"bad counts {text!r}; expected {N_DIGITS} comma-separated integers") from None
    if counts.k != N_DIGITS:
        raise UsageError(f"need {N_DIGITS} counts, got {counts.k}")
    if counts.total == 0:
        raise UsageError("counts are all zero")
    return counts


# ---------------------------------------------------------------------------
# emitters


def fmt_number(v) -> str:
    """Shortest round-trip text; empty for missing values."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def _json_value(v):
    if v is None or isinstance(v, (bool, np.bool_)):
        return None if v is None else bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return None if math.isnan(v) else v


def trajectory_columns(traj: Trajectory) -> list[str]:
    extra = [f"log_bf_{lab}" for lab in traj.labels if lab not in ("a1", "a50", "mix")]
    bounds = [f"{kind}_{lab}" for lab in traj.labels for kind in ("log_bf_max", "log_bf_threshold")]
    return FIXED_COLUMNS + ["gap", "chisq", "partial"] + extra + bounds


def trajectory_rows(traj: Trajectory) -> tuple[list[str], list[list]]:
    cols = trajectory_columns(traj)
    n = len(traj)
    none = [None] * n
    data: dict[str, list] = {"N": traj.n.tolist()}
    for lab in ("a1", "a50", "mix"):
        data[f"log_bf_{lab}"] = traj.log_bf[lab].tolist() if lab in traj.log_bf else none
    ref = traj.reference
    data["log_bf_max"] = traj.log_bf_max[ref].tolist()
    data["log_bf_threshold"] = traj.log_bf_threshold[ref].tolist()
    if "a1" in traj.log_bf and "a50" in traj.log_bf:
        data["gap"] = (traj.log_bf["a1"] - traj.log_bf["a50"]).tolist()
    else:
        data["gap"] = none
    data["chisq"] = traj.chisq.tolist()
    data["partial"] = [traj.partial_last and i == n - 1 for i in range(n)]
    for lab in traj.labels:
        data[f"log_bf_{lab}"] = traj.log_bf[lab].tolist()
        data[f"log_bf_max_{lab}"] = traj.log_bf_max[lab].tolist()
        data[f"log_bf_threshold_{lab}"] = traj.log_bf_threshold[lab].tolist()
    rows = [[data[c][i] for c in cols] for i in range(n)]
    return cols, rows


def write_table(out, fmt: str, metadata: dict, cols: list[str], rows: list[list], key: str, extra=None):
    if fmt == "json":
        doc = {"metadata": metadata, "columns": cols, key: [
            {c: _json_value(v) for c, v in zip(cols, row)} for row in rows
        ]}
        if extra:
            doc.update(extra)
        json.dump(doc, out, indent=1)
        out.write("\n")
        return
    out.write(f"# digitlaw {key} schema v{SCHEMA_VERSION}\n")
    out.write("# metadata: " + json.dumps(metadata, sort_keys=True) + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([fmt_number(v) for v in row])
    if extra:
        for name, block in extra.items():
            out.write(f"# {name}: " + json.dumps(block, sort_keys=True) + "\n")


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _present(log_bf: float) -> str:
    """Two-decimal log plus BF in scientific notation, computed without overflow."""
    log10 = log_bf / math.log(10)
    exp = math.floor(log10)
    mant = 10 ** (log10 - exp)
    if round(mant, 2) >= 10:
        mant, exp = mant / 10, exp + 1
    return f"{log_bf:.2f} (BF = {mant:.2f}e{exp:+d})"


# ---------------------------------------------------------------------------
# subcommands


def _metadata(command: str, argv: Sequence[str], **fields) -> dict:
    meta = {"software": "digitlaw", "version": __version__, "command": command, "argv": list(argv)}
    meta.update(fields)
    return meta


def cmd_analyze(args, argv) -> int:
    priors = parse_priors(args.priors)
    if args.max_digits is not None and args.max_digits < 1:
        raise UsageError("--max-digits must be at least 1")
    if args.block < 1:
        raise UsageError("--block must be at least 1")
    if not 0 < args.alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    config = AnalysisConfig(priors=priors, block_size=args.block, alpha=args.alpha, max_digits=args.max_digits)

    if args.counts is not None:
        counts = parse_counts(args.counts)
        traj = trajectory_from_counts(np.array([counts.counts]), config, source="counts")
        source = {"counts": list(counts.counts)}
    else:
        if args.constant is not None:
            length = args.max_digits if args.max_digits is not None else 10**6
            stream = generate_digits(
                args.constant,
                length,
                block_size=args.block,
                include_integer_part=args.include_integer_digit,
                ceiling=args.ceiling,
            )
            source = {"constant": args.constant, "include_integer_digit": args.include_integer_digit}
        else:
            stream = ingest_digit_file(args.digits, block_size=args.block)
            source = {"digits": os.path.abspath(args.digits)}
        traj = run_trajectory(stream, config)

    meta = _metadata(
        "analyze",
        argv,
        source=traj.source,
        priors=args.priors,
        block_size=args.block,
        alpha=args.alpha,
        max_digits=args.max_digits,
        reference_prior=traj.reference,
        final_counts=list(traj.final_counts.counts),
        **source,
    )
    cols, rows = trajectory_rows(traj)
    n_final = int(traj.n[-1])
    final = traj.final()
    lines = [f"N = {n_final}  [{label}]  log BF01 = {_present(v)}" for label, v in final.items()]
    extra = {"final_log_bf01": final}
    _emit(args, meta, cols, rows, "points", extra, lines)
    return EXIT_OK


def _emit(args, meta, cols, rows, key, extra, lines) -> None:
    """Series to --out (summary to stdout), or everything to stdout.

    With CSV on stdout the summary lines follow the table as ``#`` comments;
    JSON on stdout cannot carry trailing text, so the lines go to stderr.
    """
    out, close = _open_out(args.out)
    try:
        write_table(out, args.format, meta, cols, rows, key, extra=extra)
    finally:
        if close:
            out.close()
    if close:
        for line in lines:
            print(line)
    elif args.format == "csv":
        for line in lines:
            print("# " + line)
    else:
        for line in lines:
            print(line, file=sys.stderr)


def cmd_simulate(args, argv) -> int:
    bias = parse_bias(args.bias)
    priors = parse_priors(args.priors)
    if args.reps < 1 or args.digits_per_rep < 1 or args.block < 1:
        raise UsageError("--reps, --digits-per-rep and --block must be positive")
    config = SimulationConfig(
        replications=args.reps,
        digits_per_replication=args.digits_per_rep,
        bias=bias,
        seed=args.seed,
        priors=priors,
        block_size=args.block,
        keep_trajectories=0,
    )
    result = run_simulation(config, jobs=args.jobs or os.cpu_count() or 1)
    summary = result.summary()
    labels = list(config.priors)
    cols = ["rep", "N"] + [f"log_bf10_{lab}" for lab in labels] + ["chisq"] + [f"n{d}" for d in range(N_DIGITS)]
    rows = []
    for i in range(config.replications):
        rows.append(
            [i, config.digits_per_replication]
            + [result.final_log_bf10[lab][i] for lab in labels]
            + [result.final_chisq[i]]
            + result.final_counts[i].tolist()
        )
    meta = _metadata(
        "simulate",
        argv,
        replications=args.reps,
        digits_per_replication=args.digits_per_rep,
        bias=list(bias),
        seed=args.seed,
        priors=args.priors,
        block_size=args.block,
        seeding="numpy SeedSequence(seed, spawn_key=(rep,)) -> PCG64",
    )
    lines = []
    for lab in labels:
        st = summary[lab]
        lines.append(
            f"[{lab}] mean log BF10 = {_present(st['mean_log_bf10'])}  "
            f"min {st['min_log_bf10']:.2f}  median {st['median']:.2f}  max {st['max_log_bf10']:.2f}"
        )
    lines.append(
        f"chi-squared rejection rate at alpha={config.alpha}: {summary['chisq']['fraction_rejected']:.3f}"
    )
    _emit(args, meta, cols, rows, "replications", {"summary": summary}, lines)
    return EXIT_OK


def cmd_generate(args, argv) -> int:
    if args.length < 1:
        raise UsageError("--length must be at least 1")
    stream = generate_digits(
        args.constant, args.length, include_integer_part=args.include_integer_digit, ceiling=args.ceiling
    )
    n = stream.write(args.out)
    print(f"wrote {n} digits of {args.constant} to {args.out}")
    return EXIT_OK


def cmd_threshold(args, argv) -> int:
    label, prior = parse_prior(args.prior)
    if args.n < N_DIGITS or args.n % N_DIGITS:
        raise UsageError(f"--n must be a positive multiple of {N_DIGITS}")
    if not 0 < args.alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    try:
        tc = threshold_counts(args.n, args.alpha, args.df)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    value = threshold_log_bf(args.n, prior, args.alpha, args.df)
    print("counts: " + ",".join(str(c) for c in tc.counts.counts))
    print(f"chisq: {tc.statistic!r}")
    print(f"critical: {critical_value(args.alpha, args.df)!r}")
    print(f"log_bf01[{label}]: {value!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="digitlaw", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="sequential Bayes factors for a digit stream")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--constant", choices=CONSTANTS)
    src.add_argument("--digits", metavar="PATH", help="ASCII digit file")
    src.add_argument("--counts", metavar="N0,...,N9", help="a single tally instead of a stream")
    p.add_argument("--max-digits", type=int, default=None, help="digits to use (default for --constant: 1000000)")
    p.add_argument("--block", type=int, default=1000, help="digits per evaluation step")
    p.add_argument("--priors", default="a1,a50", help="comma list of aV (symmetric Dirichlet) or mix:A1:A2:W")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output table format")
    p.add_argument("--out", default=None, help="write the table here instead of stdout")
    p.add_argument("--include-integer-digit", action="store_true")
    p.add_argument("--ceiling", type=int, default=DEFAULT_CEILING, help="largest length generated in memory")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="replicated streams from a biased digit distribution")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--digits-per-rep", type=int, default=10**6)
    p.add_argument("--bias", default="0:0.11", help="digit:prob pairs; the rest is split evenly")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--priors", default="a1,a50", help="comma list of aV (symmetric Dirichlet) or mix:A1:A2:W")
    p.add_argument("--block", type=int, default=1000, help="digits per evaluation step")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output table format")
    p.add_argument("--out", default=None, help="write the table here instead of stdout")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: CPU count)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("generate", help="write a digit cache file for a constant")
    p.add_argument("--constant", choices=CONSTANTS, required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--include-integer-digit", action="store_true")
    p.add_argument("--ceiling", type=int, default=DEFAULT_CEILING, help="largest length generated in memory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("threshold", help="threshold dataset at the chi-squared critical value")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--prior", default="a1")
    p.add_argument("--df", type=int, default=N_DIGITS - 1)
    p.set_defaults(func=cmd_threshold)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except UsageError as exc:
        print(f"digitlaw {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DigitFileError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"digitlaw {args.command}: digit file error: {exc}", file=sys.stderr)
        return EXIT_DIGIT_FILE
    except GenerationCeilingError as exc:
        print(f"digitlaw {args.command}: {exc}", file=sys.stderr)
        return EXIT_CEILING
