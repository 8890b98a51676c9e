import argparse
import sys
from collections import Counter
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from config import BOUNDS, CheckConfig, DEFAULT_HORIZON, DEFAULT_TOL
from equivalence import (
    CONSISTENT_AT_HORIZON,
    EQUIVALENT,
    PIPELINE_DISTINGUISHED,
    PIPELINE_INCONCLUSIVE,
    check_lu_2qubit,
    check_quasi_lu_2,
    check_quasi_lu_3,
    identity_verdict,
    qubit_lu_upgrade,
    rep2_from,
    rep3_from,
)
from errors import (
    BadDimension,
    DimensionMismatch,
    InvalidState,
    LUEquivError,
    MalformedQuiver,
    ModeOutOfRange,
    NotOrthogonal,
    NotUnitary,
    PartyOutOfRange,
    ShapeMismatch,
    StateFileError,
    WrongArity,
    WrongDimension,
)
from lu_action import PAIR_MODES, generate_pair
from qudit_state import DensityMatrix, extract, max_imaginary_residue
from serialization import (
    CRITERIA,
    build_report,
    dump_json,
    dumps,
    input_entry,
    load_json,
    load_state,
    matrices_from_dict,
    rep_to_dict,
    state_from_dict,
    state_to_dict,
)
from specht import futorny_two_block_check, jing_check, quiver_cycle_check, specht_check

EXIT_OK = 0
EXIT_DISTINGUISHED = 1
EXIT_INCONCLUSIVE = 2
EXIT_PARSE_ERROR = 3
EXIT_INVALID_INPUT = 4
EXIT_DIMENSION_MISMATCH = 5

VERDICT_EXIT_CODES = {
    EQUIVALENT: EXIT_OK,
    CONSISTENT_AT_HORIZON: EXIT_OK,
    PIPELINE_DISTINGUISHED: EXIT_DISTINGUISHED,
    PIPELINE_INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


def exit_code_for(error: Exception) -> int:
    """Map a raised error onto the CLI exit codes."""
    if isinstance(error, StateFileError):
        return EXIT_PARSE_ERROR
    if isinstance(error, (InvalidState, NotUnitary, NotOrthogonal)):
        return EXIT_INVALID_INPUT
    if isinstance(error, (DimensionMismatch, ShapeMismatch, WrongArity, WrongDimension, MalformedQuiver,
                          BadDimension, PartyOutOfRange, ModeOutOfRange)):
        return EXIT_DIMENSION_MISMATCH
    return EXIT_PARSE_ERROR


def parse_dims(dims_str: str) -> Tuple[int, ...]:
    """
    Parses a partition such as '2,2,2' or '2x3' into a tuple of local dimensions.
    """
    parts = dims_str.lower().replace("x", ",").split(",")
    try:
        dims = tuple(int(p) for p in parts if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid dims: {dims_str}. Use a format like '2,2' or '2,2,3'")
    if not dims or any(d < 2 for d in dims):
        raise argparse.ArgumentTypeError(f"Invalid dims: {dims_str}. Every local dimension must be >= 2")
    return dims


# Pipelines shared by check2, check3 and sweep

def run_check(rho_a: DensityMatrix, rho_b: DensityMatrix, config: CheckConfig):
    """
    Run the 2- or 3-party pipeline on a pair of states.

    Returns (verdict, result dict, lu flag). The qubit LU upgrades are applied
    whenever the partition allows them.
    """
    if rho_a.dims != rho_b.dims:
        raise DimensionMismatch(f"states live on different partitions {rho_a.dims} and {rho_b.dims}")
    rep_a, rep_b = extract(rho_a), extract(rho_b)
    if rho_a.num_parties == 2:
        a, b = rep2_from(rep_a), rep2_from(rep_b)
        if a.dims == (2, 2):
            report = check_lu_2qubit(a, b, config.horizon, config.tol, config)
        else:
            report = check_quasi_lu_2(a, b, config.horizon, config.tol, config)
        return report.verdict, report.to_dict(), report.lu
    if rho_a.num_parties == 3:
        a, b = rep3_from(rep_a), rep3_from(rep_b)
        ledger = check_quasi_lu_3(a, b, config.battery, config.horizon, config.tol, config)
        if a.dims == (2, 2, 2):
            ledger = qubit_lu_upgrade(a, b, ledger, config.tol)
        return ledger.verdict, ledger.to_dict(), ledger.lu
    raise WrongArity(f"equivalence checks cover two or three parties, got {rho_a.num_parties}")


def run_identity_check(data: Dict[str, Any], criterion: str, horizon: Optional[int], config: CheckConfig):
    """Parse a matrices file and run one identity engine on it. Returns (verdict, report)."""
    parsed = matrices_from_dict(data, criterion)
    max_len = horizon if horizon is not None else config.horizon
    if criterion == "specht":
        a, b = parsed
        report = specht_check(a, b, horizon, config.tol, config)
    elif criterion == "jing":
        a, b = parsed
        report = jing_check(a, b, max_len, config.tol, side=_jing_side(data), config=config)
    elif criterion == "futorny":
        (a1, a2), (b1, b2) = parsed
        report = futorny_two_block_check(a1, a2, b1, b2, max_len, config.tol, config=config)
    else:
        q, rep_a, rep_b = parsed
        report = quiver_cycle_check(q, rep_a, rep_b, max_len, config.tol, config)
    return identity_verdict(report), report


def _jing_side(data: Dict[str, Any]) -> str:
    side = data.get("side", "left")
    if side not in ("left", "right"):
        raise StateFileError(f"side must be 'left' or 'right', got {side!r}", "side")
    return side


# Commands

def cmd_extract(args, config: CheckConfig) -> int:
    rho = load_state(args.state)
    rep = extract(rho)
    dump_json(rep_to_dict(rep), args.out)
    if config.debug:
        print(f"[DEBUG] extracted {len(rep.tensors)} tensors for dims {rho.dims}, "
              f"max imaginary residue {max_imaginary_residue(rho):.3g}")
    return EXIT_OK


def _cmd_check(args, config: CheckConfig, parties: int) -> int:
    data_a, data_b = load_json(args.state_a), load_json(args.state_b)
    rho_a, rho_b = state_from_dict(data_a), state_from_dict(data_b)
    if rho_a.num_parties != parties or rho_b.num_parties != parties:
        raise WrongArity(f"check{parties} needs {parties}-party states, got {rho_a.dims} and {rho_b.dims}")
    verdict, result, lu = run_check(rho_a, rho_b, config)
    report = build_report(
        f"check{parties}",
        [input_entry(args.state_a, data_a), input_entry(args.state_b, data_b)],
        config, result, verdict,
    )
    if args.json:
        dump_json(report, args.json)
    reason = result.get("reason")
    print(f"{verdict} (horizon {config.horizon}, tol {config.tol:g})" + (f": {reason}" if reason else ""))
    if lu is not None:
        print(f"LU equivalent: {lu}")
    return VERDICT_EXIT_CODES[verdict]


def cmd_check2(args, config: CheckConfig) -> int:
    return _cmd_check(args, config, 2)


def cmd_check3(args, config: CheckConfig) -> int:
    return _cmd_check(args, config, 3)


def cmd_gen_pair(args, config: CheckConfig) -> int:
    rho_a, rho_b = generate_pair(args.dims, args.seed, args.mode)
    dump_json(state_to_dict(rho_a), args.out_a)
    dump_json(state_to_dict(rho_b), args.out_b)
    if config.debug:
        print(f"[DEBUG] wrote {args.mode} pair for dims {args.dims} with seed {args.seed}")
    return EXIT_OK


def cmd_specht(args, config: CheckConfig) -> int:
    data = load_json(args.matrices)
    verdict, report = run_identity_check(data, args.criterion, args.horizon, config)
    out = build_report(f"specht --criterion {args.criterion}", [input_entry(args.matrices, data)],
                       config, report.to_dict(), verdict)
    if args.json:
        dump_json(out, args.json)
    else:
        print(dumps(out), end="")
    print(f"{verdict} ({report.words_checked} words up to length {report.horizon})")
    return VERDICT_EXIT_CODES[verdict]


def _init_wandb(args, config: CheckConfig):
    try:
        import wandb
    except ImportError:
        print("Warning: wandb is not installed, continuing without experiment tracking")
        return None
    return wandb.init(
        project="lu-equiv",
        config={
            **config.to_dict(),
            "dims": list(args.dims),
            "mode": args.mode,
            "trials": args.trials,
            "seed": args.seed,
        },
        name=f"sweep-{args.mode}-{'x'.join(str(d) for d in args.dims)}",
    )


def cmd_sweep(args, config: CheckConfig) -> int:
    """Run many seeded pairs of one family through the matching pipeline and tally verdicts."""
    run = _init_wandb(args, config) if args.wandb else None
    tally: Counter = Counter()
    lu_tally: Counter = Counter()
    residuals: List[float] = []
    stats_dict = {"Dims": "x".join(str(d) for d in args.dims), "Mode": args.mode, "Distinguished": 0, "Pass": 0}
    progress_bar = tqdm(
        total=args.trials,
        desc="Trials",
        bar_format='{desc}: {n_fmt}/{total_fmt} [{elapsed}<{remaining}, {rate_fmt}] {percentage:3.0f}%|{bar}| {postfix}',
        dynamic_ncols=True,
    )
    try:
        for trial in range(args.trials):
            # Consecutive seeds, so any trial can be replayed with gen-pair
            rho_a, rho_b = generate_pair(args.dims, args.seed + trial, args.mode)
            verdict, result, lu = run_check(rho_a, rho_b, config)
            tally[verdict] += 1
            lu_tally[str(lu)] += 1
            residuals.append(float(result["identities"]["max_residual"]))

            # Update progress bar
            stats_dict["Distinguished"] = tally[PIPELINE_DISTINGUISHED]
            stats_dict["Pass"] = tally[CONSISTENT_AT_HORIZON] + tally[EQUIVALENT]
            stats_dict["Residual"] = f"{np.mean(residuals):.2e}"
            progress_bar.set_postfix(stats_dict)
            progress_bar.update(1)

            # Log trial to wandb
            if run is not None:
                run.log({
                    "trial": trial,
                    "verdict": verdict,
                    "distinguished": int(verdict == PIPELINE_DISTINGUISHED),
                    "max_residual": residuals[-1],
                    "lu": lu,
                })
            if config.debug:
                print(f"[DEBUG] trial {trial}: {verdict} lu={lu}")
    finally:
        progress_bar.close()
        if run is not None:
            run.finish()

    summary = {
        "dims": list(args.dims),
        "mode": args.mode,
        "trials": args.trials,
        "seed": args.seed,
        "verdicts": dict(sorted(tally.items())),
        "lu": dict(sorted(lu_tally.items())),
    }
    if args.json:
        dump_json(build_report("sweep", [], config, summary, "sweep", seed=args.seed), args.json)
    for verdict, count in sorted(tally.items()):
        print(f"{verdict}: {count}/{args.trials}")
    return EXIT_OK


# Argument parsing

def _add_check_args(parser: argparse.ArgumentParser, horizon_default: Optional[int] = DEFAULT_HORIZON):
    parser.add_argument('--horizon', type=int, default=horizon_default, help='Longest word length to check')
    parser.add_argument('--tol', type=float, default=DEFAULT_TOL, help='Relative tolerance for trace and norm comparisons')
    parser.add_argument('--full-sweep', action='store_true', help='Keep checking after the first violation and record every residual')
    parser.add_argument('--bound', type=str, default='square', choices=BOUNDS, help='Specht bound used inside quiver ceilings')
    parser.add_argument('--chunk-size', type=int, default=4096, help='Words evaluated per batch')
    parser.add_argument('--json', type=str, default=None, help='Write the report to this file')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='lu-equiv', description='Local-unitary equivalence checks for 2- and 3-party states')
    parser.add_argument('--debug', action='store_true', help='Enable verbose debug logging')
    parser.add_argument('--threads', type=int, default=None,
                        help='Worker threads for word evaluation (overrides LU_EQUIV_THREADS)')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('extract', help='Write the correlation tensors of a state file')
    p.add_argument('state')
    p.add_argument('out')
    p.set_defaults(handler=cmd_extract)

    p = sub.add_parser('check2', help='Two-party quasi-LU check')
    p.add_argument('state_a')
    p.add_argument('state_b')
    _add_check_args(p)
    p.set_defaults(handler=cmd_check2, battery=1)

    p = sub.add_parser('check3', help='Three-party quasi-LU check')
    p.add_argument('state_a')
    p.add_argument('state_b')
    _add_check_args(p)
    p.add_argument('--battery', type=int, default=1, choices=[1, 2], help='Which six-matrix battery to use')
    p.add_argument('--rank-threshold', type=float, default=1e-8, help='Relative singular value cutoff for Gram ranks')
    p.set_defaults(handler=cmd_check3)

    p = sub.add_parser('gen-pair', help='Generate a seeded pair of state files')
    p.add_argument('dims', type=parse_dims, help="Partition such as '2,2,2'")
    p.add_argument('out_a')
    p.add_argument('out_b')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--mode', type=str, default='lu', choices=list(PAIR_MODES))
    p.set_defaults(handler=cmd_gen_pair)

    p = sub.add_parser('specht', help='Run one trace-identity criterion on a matrices file')
    p.add_argument('matrices')
    p.add_argument('--criterion', type=str, default='specht', choices=CRITERIA)
    _add_check_args(p, horizon_default=None)
    p.set_defaults(handler=cmd_specht, battery=1)

    p = sub.add_parser('sweep', help='Tally verdicts over many seeded pairs')
    p.add_argument('dims', type=parse_dims, help="Partition such as '2,2'")
    p.add_argument('--trials', type=int, default=100)
    p.add_argument('--seed', type=int, default=0, help='Seed of the first trial; trial i uses seed + i')
    p.add_argument('--mode', type=str, default='lu', choices=list(PAIR_MODES))
    p.add_argument('--battery', type=int, default=1, choices=[1, 2])
    p.add_argument('--wandb', action='store_true', help='Enable logging to Weights & Biases')
    _add_check_args(p)
    p.set_defaults(handler=cmd_sweep)
    return parser


def config_from_args(args) -> CheckConfig:
    kwargs = {
        "horizon": args.horizon if getattr(args, "horizon", None) is not None else DEFAULT_HORIZON,
        "tol": getattr(args, "tol", DEFAULT_TOL),
        "battery": getattr(args, "battery", 1),
        "rank_threshold": getattr(args, "rank_threshold", 1e-8),
        "full_sweep": getattr(args, "full_sweep", False),
        "chunk_size": getattr(args, "chunk_size", 4096),
        "bound": getattr(args, "bound", "square"),
        "debug": args.debug,
    }
    if args.threads is not None:
        kwargs["threads"] = args.threads
    return CheckConfig(**kwargs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except ValueError as e:
        parser.error(str(e))

    if args.debug:
        print(f"[DEBUG] {args.command} with config {config}")

    try:
        return args.handler(args, config)
    except LUEquivError as e:
        print(f"Error: {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
