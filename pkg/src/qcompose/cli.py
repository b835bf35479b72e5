"""Command-line entry point.

Exit codes: 0 success, 1 bad input or usage, 2 I/O or network failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import statistics
import sys
from collections import Counter
from pathlib import Path

import requests
import yaml

from . import aesthetics
from .chess.board import FenError, IllegalPositionError, parse_fen
from .chess.mate import MAX_DEPTH, prove_mate_in_n
from .composer import ComposerSettings, ConfigurationError
from .entropy import (
    DEFAULT_MIX_RATIO,
    ENDPOINT_ENV,
    MixedSource,
    PseudoSource,
    QuantumClient,
    QuantumClientConfig,
    QuantumFetchError,
)
from .experiment import EntropySet, ExperimentPlan, PlanError, QuantumSettings, analyze, render_text, run_experiment
from .records import RecordFormatError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _depth(text: str) -> int:
    n = int(text)
    if not 1 <= n <= MAX_DEPTH:
        raise argparse.ArgumentTypeError(f"depth must be in 1..{MAX_DEPTH}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcompose", description="Quantum/pseudo entropy chess problem composer and analysis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compose", help="run a composing campaign")
    p.add_argument("--plan", help="YAML experiment plan")
    p.add_argument("--config", help="YAML composer config (configurations, attempt bounds, mix_ratio, endpoint)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--offline", action="store_true", help="no network: replay or seeded offline bytes only")
    p.add_argument("--mix", type=float, help="single-set run at this quantum mix ratio")
    p.add_argument("--attempts", type=int, help="attempt budget per instance")
    p.add_argument("--seconds", type=float, help="wall-clock budget per instance")
    p.add_argument("--instances", type=int, help="instances per set")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--endpoint", help="QRNG endpoint URL")
    p.add_argument("--replay", help="recorded quantum bytes (file or directory)")

    p = sub.add_parser("verify", help="prove or refute a forced mate")
    p.add_argument("--fen", required=True)
    p.add_argument("--depth", type=_depth, default=3)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("score", help="aesthetic breakdown of a forced mate")
    p.add_argument("--fen", required=True)
    p.add_argument("--depth", type=_depth, default=3)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("analyze", help="statistics from record files or a typed-in table")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--records", nargs="+", help="record files or directories")
    src.add_argument("--table", help="CSV quantity table or per-set score columns")
    p.add_argument("--quartiles", help="CSV of per-set Q1/Q3 to use instead of computed quartiles")
    p.add_argument("--permissive", action="store_true", help="skip malformed record lines")
    p.add_argument("--json", help="also write the structured report here")

    p = sub.add_parser("entropy-test", help="fetch quantum bytes and print diagnostics")
    p.add_argument("--endpoint", help=f"QRNG endpoint URL (default: ${ENDPOINT_ENV} or the public service)")
    p.add_argument("--n", type=int, default=1024, help="bytes to fetch")
    p.add_argument("--block-size", type=int, default=1024)
    p.add_argument("--timeout", type=float, default=10.0)
    p.add_argument("--mix", type=float, default=DEFAULT_MIX_RATIO, help="mix ratio for the simulated draw split")
    p.add_argument("--draws", type=int, default=10_000, help="simulated mixed draws")
    p.add_argument("--seed", type=int, default=0)
    return parser


# -- compose -----------------------------------------------------------------


def _load_yaml(path) -> dict:
    data = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(data, dict):
        raise UsageError(f"{path}: expected a mapping at top level")
    return data


def plan_from_args(args) -> ExperimentPlan:
    """Built-in defaults, then plan file, then config file, then flags."""
    if args.plan:
        plan = ExperimentPlan.load(args.plan)
    else:
        plan = ExperimentPlan(sets=[EntropySet("Q15", DEFAULT_MIX_RATIO)], instances_per_set=1)
    config = _load_yaml(args.config) if args.config else {}
    composer_keys = {"configurations", "permissible_configurations", "attempts_min", "attempts_max",
                     "target_depth", "max_placement_retries"}
    extra = set(config) - composer_keys - {"mix_ratio", "endpoint"}
    if extra:
        raise UsageError(f"{args.config}: unknown keys {sorted(extra)}")
    composer = {k: v for k, v in config.items() if k in composer_keys}
    if composer:
        base = plan.composer_settings.to_dict()
        base.update(composer)
        if "configurations" in composer:
            base.pop("permissible_configurations")
        plan.composer_settings = ComposerSettings.from_dict(base)

    mix = args.mix if args.mix is not None else (None if args.plan else config.get("mix_ratio"))
    if mix is not None:
        plan.sets = [EntropySet(f"Q{round(mix * 100):g}" if mix else "Pseudo", float(mix))]

    q = plan.quantum
    endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV) or config.get("endpoint") or q.endpoint
    mode = q.mode
    replay = args.replay or q.replay_path
    if args.replay:
        mode = "replay"
    elif args.offline and mode in ("http", "stub"):
        mode = "offline"
    plan.quantum = QuantumSettings(**{**vars(q), "mode": mode, "endpoint": endpoint, "replay_path": replay})

    if args.seed is not None:
        plan.base_seed = args.seed
    if args.attempts is not None or args.seconds is not None:
        plan.budget_attempts = args.attempts
        plan.budget_seconds = args.seconds
    if args.instances is not None:
        plan.instances_per_set = args.instances
    if args.workers is not None:
        plan.workers = args.workers
    plan.__post_init__()
    return plan


def cmd_compose(args) -> int:
    plan = plan_from_args(args)
    report, paths = run_experiment(plan, args.out)
    print(render_text(report), end="")
    print(f"\n{len(paths)} record file(s) under {Path(args.out) / 'records'}")
    if report.incomplete_sets:
        print(f"incomplete sets: {', '.join(report.incomplete_sets)}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# -- verify / score ----------------------------------------------------------


def _position(fen: str):
    try:
        return parse_fen(fen)
    except FenError as exc:
        raise UsageError(f"bad FEN: {exc}") from None


def cmd_verify(args) -> int:
    verdict = prove_mate_in_n(_position(args.fen), args.depth)
    if args.json:
        print(json.dumps({
            "outcome": verdict.outcome if not verdict.is_mate else f"mate_in_{verdict.k}",
            "k": verdict.k,
            "key_moves": list(verdict.key_moves),
            "principal_variation": list(verdict.principal_variation),
        }, indent=2))
    elif verdict.is_mate:
        print(f"mate_in_{verdict.k}")
        print(f"key: {' '.join(verdict.key_moves)}")
        print(f"line: {' '.join(verdict.principal_variation)}")
    else:
        print(f"{verdict.outcome} within {args.depth}")
    return EXIT_OK


def cmd_score(args) -> int:
    position = _position(args.fen)
    verdict = prove_mate_in_n(position, args.depth, with_solution=True)
    if not verdict.is_mate:
        raise UsageError(f"no forced mate within {args.depth}; nothing to score")
    breakdown = aesthetics.score(position, verdict)
    if args.json:
        print(json.dumps({"mate_in": verdict.k, **breakdown.as_dict(), "scorer": aesthetics.SCORER_VERSION}, indent=2))
    else:
        print(f"mate_in_{verdict.k}  key {' '.join(verdict.key_moves)}")
        print(f"economy     {breakdown.economy:.4f}")
        print(f"sparsity    {breakdown.sparsity:.4f}")
        print(f"themes      {breakdown.theme_bonus:.4f}  ({', '.join(breakdown.themes) or 'none'})")
        print(f"total       {breakdown.total:.4f}")
        print(f"scorer: {aesthetics.SCORER_VERSION}")
    return EXIT_OK


# -- analyze -----------------------------------------------------------------


def cmd_analyze(args) -> int:
    if args.table:
        report = analyze(args.table, table=True, quartiles=args.quartiles)
    else:
        for p in args.records:
            if not Path(p).exists():
                raise FileNotFoundError(f"no such file or directory: {p}")
        report = analyze(args.records, permissive=args.permissive)
    print(render_text(report), end="")
    if args.json:
        Path(args.json).write_text(report.to_json())
    return EXIT_OK


# -- entropy-test ------------------------------------------------------------


def cmd_entropy_test(args) -> int:
    if args.n < 1 or args.draws < 0:
        raise UsageError("--n must be >= 1 and --draws >= 0")
    kwargs = dict(block_size=min(args.block_size, 1024), low_watermark=0, request_timeout=args.timeout)
    config = QuantumClientConfig(endpoint_url=args.endpoint, **kwargs) if args.endpoint else QuantumClientConfig.from_env(**kwargs)
    client = QuantumClient(config)
    data = client.take(args.n)
    counts = Counter(data)
    expected = len(data) / 256
    chi2 = sum((counts.get(v, 0) - expected) ** 2 / expected for v in range(256))
    lat = client.latencies
    print(f"endpoint       {config.endpoint_url}")
    print(f"bytes          {len(data)} in {client.requests} request(s), {client.fetch_failures} failure(s)")
    print(f"latency        mean {statistics.fmean(lat) * 1000:.1f} ms, max {max(lat) * 1000:.1f} ms")
    print(f"byte mean      {statistics.fmean(data):.2f} (uniform 127.5)")
    print(f"chi-square     {chi2:.1f} on 255 df")

    if args.draws:
        mixed = MixedSource(PseudoSource(args.seed), client, args.mix)
        for _ in range(args.draws):
            mixed.next_unit()
        st = mixed.stats
        sigma = math.sqrt(args.mix * (1 - args.mix) / args.draws)
        print(f"mixed draws    {st.total}: pseudo {st.pseudo_draws}, quantum {st.quantum_draws}, fallback {st.fallback_events}")
        print(f"quantum ratio  {st.quantum_fraction:.4f} (target {args.mix}, sigma {sigma:.4f})")
    return EXIT_OK


COMMANDS = {
    "compose": cmd_compose,
    "verify": cmd_verify,
    "score": cmd_score,
    "analyze": cmd_analyze,
    "entropy-test": cmd_entropy_test,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, FenError, IllegalPositionError, PlanError, ConfigurationError, RecordFormatError) as exc:
        print(f"qcompose {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, QuantumFetchError, requests.RequestException) as exc:
        print(f"qcompose {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"qcompose {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
