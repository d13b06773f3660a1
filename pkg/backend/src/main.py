import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

import argparse
import logging
from typing import List, Optional, Union

from backend.src.analysis.classifier import ClassifierConfig, classify_family
from backend.src.analysis.probabilities import partition_correct_prob
from backend.src.data_io.report_exporter import emit_report
from backend.src.oracle.exhaustive_oracle import OracleReport, OracleSuite, monte_carlo_check
from backend.src.quantum.errors import ConfigError, InvariantViolation, SealError
from backend.src.quantum.states import DIMENSION_CAP
from backend.src.runner.config_loader import (
    ExperimentConfig,
    build_config,
    build_family,
    build_instrument,
    load_config,
)
from backend.src.runner.sweep_runner import SWEEP_COLUMNS, run_sweep
from backend.src.runner.table1 import TABLE1_COLUMNS, table1_demo
from backend.src.seals.families import SealFamily, instantiate
from backend.src.seals.schemes import ProductSeal
from backend.src.strategies.read_strategies import PartitionReadoutInstrument, PartitionSpec, partition_readout
from backend.src.verification.verifier import joint_success_escape

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2


def _load(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else build_config({})
    if getattr(args, "seed", None) is not None:
        cfg.output.seed = args.seed
    if getattr(args, "format", None):
        cfg.output.format = args.format
    if getattr(args, "out", None):
        cfg.output.path = args.out
    return cfg


def _message_args(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--message", type=int, default=0, help="Message index (default 0).")
    group.add_argument("--bits", help="Message as a 0/1 string of length n (product seals).")


def _message(args: argparse.Namespace) -> Union[int, str]:
    return args.bits if args.bits else args.message


def _pick_n(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    return int(args.n) if args.n is not None else int(cfg.sweep.n_values[0])


def cmd_encode(args: argparse.Namespace) -> int:
    cfg = _load(args)
    n = _pick_n(cfg, args)
    scheme = build_family(cfg).instantiate(n)
    state = scheme.encode(_message(args))
    print(f"[encode] {cfg.scheme.kind} n={n} message={_message(args)}")
    if state.dimension <= DIMENSION_CAP:
        for j, amp in enumerate(state.amplitudes):
            print(f"{j}\t{amp.real:.17g}\t{amp.imag:.17g}")
    else:
        for q, f in enumerate(state.qubit_factorization):
            print(f"qubit {q}\t{f[0].real:.17g}\t{f[1].real:.17g}")
    return EXIT_OK


def cmd_attack(args: argparse.Namespace) -> int:
    cfg = _load(args)
    n = _pick_n(cfg, args)
    scheme = build_family(cfg).instantiate(n)
    inst = build_instrument(cfg, scheme, n)
    report = joint_success_escape(scheme, _message(args), inst)
    print(f"[attack] {cfg.scheme.kind} n={n} strategy={cfg.strategy.kind}")
    print(f"escape_prob\t{report.escape_prob:.17g}")
    print(f"success_prob\t{report.success_prob:.17g}")
    print(f"joint_success_escape\t{report.joint_success_escape:.17g}")
    if isinstance(inst, PartitionReadoutInstrument) and isinstance(scheme, ProductSeal):
        part = PartitionSpec(n=n, k=inst.k, p_max=partition_correct_prob(scheme, inst.k))
        print(f"partition\tk={part.k}\telement={part.element_of(_message(args))}\tp_max={part.p_max:.17g}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load(args)
    rows = run_sweep(cfg, progress=args.progress)
    if cfg.output.path:
        emit_report(rows, cfg.output.format, cfg.output.path, columns=SWEEP_COLUMNS)
        print(f"[sweep] {len(rows)} rows written to {cfg.output.path}")
    else:
        for row in rows:
            print(row)
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    cfg = _load(args)
    base = cfg.classifier_config()
    if "sweep" in cfg.model_fields_set:
        classifier_cfg = base
    else:
        classifier_cfg = ClassifierConfig(
            H_crit=base.H_crit,
            ratio_eps=base.ratio_eps,
            trend_window=cfg.classifier.trend_window,
            info_ratio_min=base.info_ratio_min,
            threshold=base.threshold,
        )
    result = classify_family(build_family(cfg), cfg=classifier_cfg)
    print(f"[classify] verdict: {result.criterion} (heuristic finite-n verdict) - {result.note}")
    if result.c_constant is not None:
        print(f"[classify] c = {result.c_constant:.6g}")
    print(result.evidence.to_string(index=False))
    return EXIT_OK


def cmd_table1(args: argparse.Namespace) -> int:
    n_grid = args.n_grid or [100, 1000, 10000]
    df = table1_demo(n_grid)
    print(df.to_string(index=False))
    if args.out:
        emit_report(df.to_dict(orient="records"), args.format or "csv", args.out, columns=TABLE1_COLUMNS)
    return EXIT_OK


def _monte_carlo_reports(trials: int, seed: int) -> List[OracleReport]:
    tilt = instantiate(SealFamily.fixed_angle(0.3), 1)
    scheme_a = instantiate(SealFamily.scheme_a(0.3, 0.25), 3)
    return [
        monte_carlo_check(tilt, partition_readout(1, 1), trials, seed),
        monte_carlo_check(scheme_a, partition_readout(3, 2), trials, seed),
    ]


def cmd_oracle_check(args: argparse.Namespace) -> int:
    reports = OracleSuite(verbose=args.verbose).run(max_qubits=args.max_qubits)
    if args.trials:
        reports += _monte_carlo_reports(args.trials, args.seed or 0)
    failed = [r for r in reports if not r.passed]
    worst = max(reports, key=lambda r: r.abs_diff)
    print(f"[oracle-check] {len(reports)} checks, {len(failed)} failed, worst diff {worst.abs_diff:.3e} ({worst.quantity})")
    for r in failed:
        print(f"FAILED\t{r.quantity}\tdiff={r.abs_diff:.3e}\ttol={r.tolerance:.1e}\t{r.detail}")
    if args.out:
        emit_report(reports, args.format or "csv", args.out)
    return EXIT_INVARIANT if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qseal", description="Quantum string seal simulation and analysis.")
    parser.add_argument("--log-level", default="WARNING", help="Root log level (default WARNING).")
    sub = parser.add_subparsers(dest="command", required=True)

    def _common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="Experiment config (.yaml/.yml/.json).")
        p.add_argument("--out", help="Output path.")
        p.add_argument("--format", choices=["csv", "json"], help="Output format.")
        p.add_argument("--seed", type=int, help="Seed (overrides config and QSEAL_SEED).")

    p = sub.add_parser("encode", help="Print the sealed state for one message.")
    _common(p)
    p.add_argument("--n", type=int, help="String length (default: first sweep value).")
    _message_args(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("attack", help="Escape and obtain-and-escape probabilities for one message.")
    _common(p)
    p.add_argument("--n", type=int, help="String length (default: first sweep value).")
    _message_args(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("sweep", help="Evaluate the experiment at every configured n.")
    _common(p)
    p.add_argument("--progress", action="store_true", help="Show a progress bar.")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("classify", help="Criterion A/B/C verdict with its evidence table.")
    _common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("table1", help="Partition scaling per criterion for the built-in exemplars.")
    _common(p)
    p.add_argument("--n-grid", type=int, nargs="+", help="String lengths (default 100 1000 10000).")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("oracle-check", help="Compare fast paths against the dense oracle.")
    _common(p)
    p.add_argument("--max-qubits", type=int, default=6)
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo trials per check (0 skips sampling).")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except SealError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
