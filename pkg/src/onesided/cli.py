"""Command-line entry point.

Subcommands: ``synth`` (write a synthetic instance), ``sweep`` (parameter
sweep to CSV), ``rankdep`` (rank-dependence search), ``estimate`` (single run
on an observation file), ``eval`` (compare saved factors). Every subcommand
accepts ``--config <file>``, a flat ``key=value`` text file whose entries
override the defaults and are overridden in turn by explicit flags.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import datagen, estimators, harness, masking, metrics
from .estimators import SolverConfig
from .matcore import make_rng


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract here is exit 1
    def error(self, message):
        raise _UsageError(message)


def read_config(path) -> dict[str, str]:
    """Flat key=value file; blank lines and '#' comments ignored."""
    out: dict[str, str] = {}
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read config file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise _UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(float(tok)) for tok in text.split(",") if tok.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _merge(args, config: dict[str, str], key: str, cast, default):
    flag_value = getattr(args, key, None)
    if flag_value is not None:
        return flag_value
    if key in config:
        return cast(config[key])
    return default


def _solver_from(args, config) -> SolverConfig | None:
    fields = {}
    for key, cast in (
        ("steps", int),
        ("learning_rate", float),
        ("lambda_reg", float),
        ("alpha_cap", float),
        ("init_mode", str),
    ):
        value = _merge(args, config, key, cast, None)
        if value is not None:
            fields[key] = value
    if not fields:
        return None
    return SolverConfig(rank=1, **fields)  # rank is overwritten per run


def _cmd_synth(args) -> int:
    config = read_config(args.config) if args.config else {}
    kind = _merge(args, config, "kind", str, "gaussian")
    m = _merge(args, config, "m", int, 1000)
    d = _merge(args, config, "d", int, 20)
    r = _merge(args, config, "r", int, 2)
    k = _merge(args, config, "k", int, None)
    seed = _merge(args, config, "seed", int, 0)
    rng = make_rng(seed)
    if kind == "gaussian":
        gt = datagen.gen_gaussian(m, d, r, rng)
    elif kind == "correlated":
        spectrum = _merge(args, config, "spectrum", _float_list, tuple(np.ones(r)))
        gt = datagen.gen_correlated(m, d, r, spectrum, rng)
    elif kind in ("all_ones", "single_zero"):
        gt = datagen.gen_special(kind, m, d)
    else:
        raise _UsageError(f"unknown synth kind {kind!r}")
    datagen.save_matrix(gt.x, args.out)
    datagen.save_matrix(gt.q_true, f"{args.out}.qtrue.mat")
    datagen.save_matrix(gt.lambda_true.reshape(1, -1), f"{args.out}.ltrue.mat")
    if k is not None:
        obs = masking.sample_mask(m, d, k, rng)
        datagen.save_observations(gt.x, obs, f"{args.out}.obs")
    print(f"wrote {args.out} (m={m} d={d} r={r} kind={kind} seed={seed})")
    return 0


def _cmd_estimate(args) -> int:
    config = read_config(args.config) if args.config else {}
    algorithm = _merge(args, config, "algorithm", str, "ours")
    if algorithm not in harness.ALGORITHMS:
        raise _UsageError(f"unknown algorithm {algorithm!r}; choose from {harness.ALGORITHMS}")
    r = _merge(args, config, "r", int, 2)
    seed = _merge(args, config, "seed", int, 0)
    mc_lambda = _merge(args, config, "mc_lambda", float, 0.1)
    x_obs, obs = datagen.load_observations(args.infile)
    solver = _solver_from(args, config) or SolverConfig(rank=r)
    from dataclasses import replace

    cfg = replace(solver, rank=r)
    rng = make_rng(seed)
    if algorithm in ("ours", "ours_convex"):
        target = estimators.empirical_target(x_obs, obs)
        if algorithm == "ours":
            est = estimators.solve_factored(target, cfg, rng)
        else:
            est = estimators.solve_convex(target, cfg)
        estimators.save_theta_estimate(est, args.out)
        final_loss = est.loss_trace[-1] if len(est.loss_trace) else float("nan")
        print(f"{algorithm}: final weighted loss {final_loss:.6g}; wrote {args.out}.*")
    else:
        if algorithm == "full_mc":
            fe = estimators.baseline_full_completion(
                x_obs, obs, replace(cfg, lambda_reg=mc_lambda), rng
            )
        elif algorithm == "direct":
            fe = estimators.baseline_direct(x_obs, obs, r)
        else:
            fe = estimators.baseline_no_diagonal(x_obs, obs, r)
        estimators.save_factors(fe, args.out)
        print(f"{algorithm}: wrote {args.out}.q.mat and {args.out}.lambda.mat")
    return 0


def _cmd_eval(args) -> int:
    q_hat = datagen.load_matrix(args.qhat)
    q_true = datagen.load_matrix(args.qtrue)
    rowspace = metrics.eval_rowspace(q_hat, q_true)
    r = q_true.shape[1]
    print(f"rowspace_err={rowspace!r}")
    print(f"rowspace_err_norm={rowspace / r!r}")
    if args.lhat and args.ltrue:
        lam_hat = datagen.load_matrix(args.lhat).ravel()
        lam_true = datagen.load_matrix(args.ltrue).ravel()
        colfactor = metrics.eval_colfactors(q_hat, lam_hat, q_true, lam_true)
        print(f"colfactor_err={colfactor!r}")
    if args.theta_hat and args.theta_star:
        theta_err = metrics.eval_theta(
            datagen.load_matrix(args.theta_hat), datagen.load_matrix(args.theta_star)
        )
        print(f"theta_err={theta_err!r}")
    return 0


def _cmd_sweep(args) -> int:
    config = read_config(args.config) if args.config else {}
    spec = harness.SweepSpec(
        dataset=_merge(args, config, "dataset", str, "gaussian"),
        d=_merge(args, config, "d", int, 100),
        r=_merge(args, config, "r", int, 25),
        k_list=_merge(args, config, "k", _int_list, (2,)),
        m_list=_merge(args, config, "m", _int_list, (10_000,)),
        algorithms=tuple(
            _merge(args, config, "algorithms", lambda s: tuple(s.split(",")), ("ours", "direct", "no_diag"))
        ),
        repeats=_merge(args, config, "repeats", int, 10),
        base_seed=_merge(args, config, "seed", int, 0),
        spectrum=_merge(args, config, "spectrum", _float_list, None),
        special_kind=_merge(args, config, "special_kind", str, "all_ones"),
        file_path=_merge(args, config, "file", str, None),
        solver=_solver_from(args, config),
        mc_lambda=_merge(args, config, "mc_lambda", float, 0.1),
    )
    records = harness.run_sweep(spec)
    harness.write_records(records, args.out)
    n_err = sum(1 for rec in records if rec.status != "ok")
    print(f"wrote {len(records)} records to {args.out} ({n_err} failed)")
    return 0


def _cmd_rankdep(args) -> int:
    config = read_config(args.config) if args.config else {}
    spec = harness.RankDepSpec(
        r_list=_merge(args, config, "r", _int_list, (2, 3, 4, 6)),
        d=_merge(args, config, "d", int, 200),
        k=_merge(args, config, "k", int, 2),
        target=_merge(args, config, "target", float, 0.1),
        tolerance=_merge(args, config, "tolerance", float, 0.02),
        runs_per_probe=_merge(args, config, "runs_per_probe", int, 20),
        m_max=_merge(args, config, "m_max", int, 4_000_000),
        base_seed=_merge(args, config, "seed", int, 0),
        solver=_solver_from(args, config),
    )
    results, slope = harness.rank_dependence(spec)
    harness.write_rankdep(results, args.out)
    for res in results:
        marker = "" if res.accepted else " (not accepted)"
        print(f"r={res.r}: m_star={res.m_star} after {res.probes} probes{marker}")
    print(f"slope={'absent' if slope is None else repr(slope)}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="onesided", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic instance")
    p.add_argument("--kind", choices=["gaussian", "correlated", "all_ones", "single_zero"])
    p.add_argument("--m", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--k", type=int, help="also write an observation file")
    p.add_argument("--spectrum", type=_float_list)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("estimate", help="run one estimator on an observation file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--algorithm", choices=list(harness.ALGORITHMS))
    p.add_argument("--r", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--lambda", dest="lambda_reg", type=float)
    p.add_argument("--alpha", dest="alpha_cap", type=float)
    p.add_argument("--init", dest="init_mode", choices=["spectral", "gaussian"])
    p.add_argument("--mc-lambda", dest="mc_lambda", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("eval", help="compare saved factors to ground truth")
    p.add_argument("--qhat", required=True)
    p.add_argument("--qtrue", required=True)
    p.add_argument("--lhat")
    p.add_argument("--ltrue")
    p.add_argument("--theta-hat", dest="theta_hat")
    p.add_argument("--theta-star", dest="theta_star")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="run a parameter sweep to CSV")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("rankdep", help="rank-dependence binary search")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_rankdep)

    return parser


def cli(argv=None) -> int:
    """Run the CLI on ``argv`` (defaults to ``sys.argv[1:]``); returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        ValueError,
        OSError,
        datagen.MatrixFormatError,
        masking.ObservationFormatError,
        estimators.SolverDivergenceError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
