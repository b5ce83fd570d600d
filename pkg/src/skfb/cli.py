"""The ``skfb`` command-line tool.

Every subcommand prints plot-ready CSV (header + one row per result) to
stdout or ``--out``.  Rows are self-describing: replaying a row's config
columns reproduces its ber exactly.  Exit codes: 0 success, 1 runtime
error, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import replace

from . import __version__
from .codec import analytic_ber_oracle, optimize_gamma
from .core import BitMapping, SkConfig, SkVariant
from .engine import (
    BerEstimate,
    cfg_for_best_k,
    cfg_for_precision_cell,
    cfg_for_sweep_k,
    classify_cell,
    estimate_ber,
)
from .precision import PrecisionMode
from .records import (
    BestKRecord,
    GammaRecord,
    OracleRecord,
    PhaseRecord,
    RunRecord,
    make_run_record,
    read_reference_table,
    write_csv_of,
)

DEFAULT_RATE = 1.0 / 3.0
DEFAULT_TRIALS = 100_000


def _parse_snr(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise argparse.ArgumentTypeError("SNR must not be NaN")
    return value


def _parse_u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit an unsigned 64-bit integer")
    return value


def _parse_float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _parse_int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _common_options(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--variant",
        choices=[v.value for v in SkVariant],
        default=SkVariant.ESTIMATE_DIFFERENCE.value,
        help="SK recursion form (default: %(default)s)",
    )
    p.add_argument("--k", type=int, default=1, help="information bits per block")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--n", type=int, default=None, help="total channel uses")
    group.add_argument(
        "--rate", type=float, default=None, help="coding rate K/N (default 1/3)"
    )
    p.add_argument("--snr-db", type=_parse_snr, default=0.0, help="forward SNR in dB")
    p.add_argument(
        "--feedback-snr-db",
        type=_parse_snr,
        default=math.inf,
        help="feedback SNR in dB, 'inf' for noiseless (default)",
    )
    p.add_argument(
        "--precision",
        type=int,
        choices=[8, 16, 32, 64],
        default=64,
        help="emulated arithmetic width (default: %(default)s)",
    )
    p.add_argument(
        "--gamma", type=float, default=1.0, help="first-use power fraction (default 1.0)"
    )
    p.add_argument("--seed", type=_parse_u64, default=0, help="master seed")
    p.add_argument(
        "--bit-mapping",
        choices=[m.value for m in BitMapping],
        default=BitMapping.NATURAL.value,
        help="bits-to-position labeling (default: %(default)s)",
    )
    p.add_argument(
        "--trials", type=int, default=DEFAULT_TRIALS, help="Monte Carlo trials per cell"
    )
    p.add_argument(
        "--stop-at-errors",
        type=int,
        default=None,
        help="stop a cell early once this many bit errors accumulate",
    )
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")


def _rate_of(args) -> float:
    if args.rate is not None:
        if not 0 < args.rate <= 1:
            raise ValueError(f"rate must be in (0, 1], got {args.rate}")
        return args.rate
    return DEFAULT_RATE


def _config_from_args(args) -> SkConfig:
    n_total = args.n if args.n is not None else max(1, round(args.k / _rate_of(args)))
    return SkConfig(
        variant=SkVariant(args.variant),
        k=args.k,
        n_total=n_total,
        forward_snr_db=args.snr_db,
        feedback_snr_db=args.feedback_snr_db,
        precision=PrecisionMode(args.precision),
        gamma=args.gamma,
        seed=args.seed,
        bit_mapping=BitMapping(args.bit_mapping),
    )


def _emit(args, record_type, records) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv_of(record_type, records, fh)
    else:
        sys.stdout.write(write_csv_of(record_type, records))


def _timed_estimate(cfg: SkConfig, args) -> RunRecord:
    t0 = time.perf_counter()
    est = estimate_ber(cfg, args.trials, stop_at_errors=args.stop_at_errors)
    return make_run_record(
        cfg, est, time.perf_counter() - t0, stop_at_errors=args.stop_at_errors
    )


def _cmd_ber(args) -> int:
    record = _timed_estimate(_config_from_args(args), args)
    _emit(args, RunRecord, [record])
    return 0


def _k_range(args) -> range:
    if args.k_max < args.k_min:
        raise ValueError(f"--k-max {args.k_max} is below --k-min {args.k_min}")
    return range(args.k_min, args.k_max + 1, args.k_step)


def _cmd_sweep_k(args) -> int:
    base = _config_from_args(args)
    rate = _rate_of(args)
    records = [
        _timed_estimate(cfg_for_sweep_k(base, k, rate), args) for k in _k_range(args)
    ]
    _emit(args, RunRecord, records)
    return 0


def _cmd_sweep_precision(args) -> int:
    base = _config_from_args(args)
    rate = _rate_of(args)
    reference = read_reference_table(args.reference)
    records = []
    for bits in args.precisions:
        for k in _k_range(args):
            cfg = cfg_for_precision_cell(base, bits, k, rate)
            run = _timed_estimate(cfg, args)
            ref = reference.lookup(bits, base.feedback_snr_db)
            est = estimate_from_record(run)
            records.append(
                PhaseRecord(
                    **run.__dict__, reference_ber=ref, verdict=classify_cell(est, ref)
                )
            )
    _emit(args, PhaseRecord, records)
    return 0


def _best_k_records(args, base: SkConfig, feedback_snr_db: float) -> list[BestKRecord]:
    rate = _rate_of(args)
    candidates = sorted(range(args.k_min, args.k_max + 1, args.k_step))
    runs = [
        _timed_estimate(cfg_for_best_k(base, feedback_snr_db, k, rate), args)
        for k in candidates
    ]
    best = min(runs, key=lambda r: (r.ber, r.k))  # ties go to the smaller K
    return [BestKRecord(**run.__dict__, is_best=(run is best)) for run in runs]


def _cmd_best_k(args) -> int:
    base = _config_from_args(args)
    _emit(args, BestKRecord, _best_k_records(args, base, args.feedback_snr_db))
    return 0


def _cmd_sweep_feedback(args) -> int:
    base = _config_from_args(args)
    records = []
    for snr in args.feedback_snr_list:
        records.extend(_best_k_records(args, base, snr))
    _emit(args, BestKRecord, records)
    return 0


def _cmd_oracle(args) -> int:
    cfg = _config_from_args(args)
    record = OracleRecord(
        variant=cfg.variant.value,
        k=cfg.k,
        n_total=cfg.n_total,
        forward_snr_db=cfg.forward_snr_db,
        feedback_snr_db=cfg.feedback_snr_db,
        gamma=cfg.gamma,
        bit_mapping=cfg.bit_mapping.value,
        oracle_ber=analytic_ber_oracle(cfg),
    )
    _emit(args, OracleRecord, [record])
    return 0


def _cmd_optimize_gamma(args) -> int:
    cfg = _config_from_args(args)
    grid = args.gamma_grid
    gamma_star, _ = optimize_gamma(cfg, grid)
    records = [
        GammaRecord(
            k=cfg.k,
            n_total=cfg.n_total,
            forward_snr_db=cfg.forward_snr_db,
            bit_mapping=cfg.bit_mapping.value,
            gamma=float(g),
            oracle_ber=analytic_ber_oracle(replace(cfg, gamma=float(g))),
            is_best=(float(g) == gamma_star),
        )
        for g in sorted(grid)
    ]
    _emit(args, GammaRecord, records)
    return 0


def estimate_from_record(rec: RunRecord) -> BerEstimate:
    """Estimate view of a record (for classification against a reference)."""
    return BerEstimate(
        k=rec.k,
        trials=rec.trials,
        bit_errors=rec.bit_errors,
        failed_trials=rec.failed_trials,
        ber=rec.ber,
        ci_low=rec.ci_low,
        ci_high=rec.ci_high,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skfb",
        description="Monte Carlo BER experiments for SK feedback coding over AWGN",
    )
    parser.add_argument("--version", action="version", version=f"skfb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ber", help="single BER estimate")
    _common_options(p)
    p.set_defaults(func=_cmd_ber)

    p = sub.add_parser("sweep-k", help="BER vs block length at fixed rate")
    _common_options(p)
    p.add_argument("--k-min", type=int, required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--k-step", type=int, default=1)
    p.set_defaults(func=_cmd_sweep_k)

    p = sub.add_parser(
        "sweep-precision", help="SK-vs-reference grid over precision and block length"
    )
    _common_options(p)
    p.add_argument("--k-min", type=int, required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--k-step", type=int, default=1)
    p.add_argument(
        "--precisions",
        type=_parse_int_list,
        default=[8, 16, 32, 64],
        help="comma-separated widths (default: 8,16,32,64)",
    )
    p.add_argument(
        "--reference",
        required=True,
        help="CSV with header precision_bits,feedback_snr_db,reference_ber",
    )
    p.set_defaults(func=_cmd_sweep_precision)

    p = sub.add_parser("best-k", help="best block length at one feedback SNR")
    _common_options(p)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--k-step", type=int, default=1)
    p.set_defaults(func=_cmd_best_k)

    p = sub.add_parser("sweep-feedback", help="best block length per feedback SNR")
    _common_options(p)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--k-step", type=int, default=1)
    p.add_argument(
        "--feedback-snr-list",
        type=_parse_float_list,
        required=True,
        help="comma-separated feedback SNRs in dB",
    )
    p.set_defaults(func=_cmd_sweep_feedback)

    p = sub.add_parser("oracle", help="closed-form BER for noiseless feedback")
    _common_options(p)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("optimize-gamma", help="grid-optimize first-use power fraction")
    _common_options(p)
    p.add_argument(
        "--gamma-grid",
        type=_parse_float_list,
        required=True,
        help="comma-separated gamma values to scan",
    )
    p.set_defaults(func=_cmd_optimize_gamma)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"skfb: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
