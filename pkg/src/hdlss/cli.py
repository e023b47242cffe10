"""Command-line front end.

Subcommands: gen (write a synthetic dataset), test (identity-covariance
test on a CSV), lss (centered spectral statistic on a CSV), mc-size /
mc-power / mc-table1 (Monte Carlo experiments), qq (quantile pairs from
a column of replication values). Results go to stdout, progress and
warnings to stderr; statistical decisions never affect the exit code.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import datagen, functions, harness
from .correction import CorrectionOptions, gn_statistic, qn_statistic
from .datagen import CovarianceSpec, DistributionSpec
from .identity_test import test_identity
from .spectra import eigenvalues, normalized_gram


def _parse_dist(text: str) -> DistributionSpec:
    if text.startswith("gamma:"):
        try:
            shape, scale = (float(v) for v in text[6:].split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"bad gamma spec {text!r}; expected gamma:SHAPE,SCALE")
        return DistributionSpec.gamma(shape, scale)
    try:
        return DistributionSpec(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _parse_cov(text: str) -> CovarianceSpec:
    try:
        if text == "identity":
            return CovarianceSpec.identity()
        if text.startswith("spike:"):
            return CovarianceSpec.diag_spike(float(text[6:]))
        if text.startswith("banded:"):
            v1, v2 = (float(v) for v in text[7:].split(","))
            return CovarianceSpec.banded(v1, v2)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    raise argparse.ArgumentTypeError(
        f"bad covariance spec {text!r}; expected identity, spike:NU, "
        "or banded:V1,V2")


def _parse_f(text: str) -> functions.TestFunction:
    try:
        return functions.by_name(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _default_seed() -> int:
    return int(os.environ.get("HDLSS_SEED", "0"))


def _load_matrix(path: str, transpose: bool) -> datagen.DataMatrix:
    try:
        data = datagen.load_matrix_csv(path)
    except Exception as exc:
        raise SystemExit(f"error: cannot parse {path!r}: {exc}")
    if transpose:
        x = data.entries.T
        data = datagen.DataMatrix(x, x.shape[0], x.shape[1])
    return data


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif fmt == "csv":
        keys = sorted(k for k, v in payload.items()
                      if not isinstance(v, (dict, list)))
        print(",".join(keys))
        print(",".join(str(payload[k]) for k in keys))
    else:
        for key in sorted(payload):
            print(f"{key}: {payload[key]}")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=("json", "csv", "text"),
                     default="json")


def _add_mc_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--dist", type=_parse_dist, required=True)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--reps", type=int, default=1000)
    sub.add_argument("--seed", type=int, default=_default_seed())
    sub.add_argument("--alpha", type=float, default=0.05)
    sub.add_argument("--workers", type=int, default=1)
    sub.add_argument("--force", action="store_true",
                     help="override the desk-scale cost guardrail")
    sub.add_argument("--rep-values", action="store_true",
                     help="include per-replication values in the output")
    _add_common(sub)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdlss",
        description="Spectral statistics of normalized sample covariance "
                    "matrices in the p >> n regime")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    gen = subs.add_parser("gen", help="generate a synthetic dataset CSV")
    gen.add_argument("--dist", type=_parse_dist, required=True)
    gen.add_argument("--p", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--cov", type=_parse_cov,
                     default=CovarianceSpec.identity())
    gen.add_argument("--seed", type=int, default=_default_seed())
    gen.add_argument("--out", required=True)

    test = subs.add_parser("test", help="identity-covariance test on a CSV")
    test.add_argument("--input", required=True)
    test.add_argument("--alpha", type=float, action="append",
                      help="significance level; repeatable (default 0.05)")
    test.add_argument("--nu4", type=float, default=None,
                      help="exact fourth moment; estimated when omitted")
    test.add_argument("--standardize",
                      choices=("per-variable", "global", "none"),
                      default="none")
    test.add_argument("--transpose", action="store_true",
                      help="input has observations as rows")
    _add_common(test)

    lss_cmd = subs.add_parser("lss", help="centered LSS on a CSV")
    lss_cmd.add_argument("--input", required=True)
    lss_cmd.add_argument("--f", type=_parse_f, required=True)
    lss_cmd.add_argument("--variant", choices=("gn", "gn-calib", "qn"),
                         default="gn-calib")
    lss_cmd.add_argument("--nu4", type=float, required=True)
    lss_cmd.add_argument("--rho", type=float, default=0.5)
    lss_cmd.add_argument("--nodes", type=int, default=512)
    lss_cmd.add_argument("--transpose", action="store_true")
    _add_common(lss_cmd)

    size = subs.add_parser("mc-size", help="empirical size experiment")
    size.add_argument("--p", type=int, required=True)
    size.add_argument("--nu4-mode", choices=("exact", "estimate"),
                      default="exact")
    _add_mc_common(size)

    power = subs.add_parser("mc-power", help="empirical power experiment")
    power.add_argument("--p", type=int, required=True)
    power.add_argument("--cov", type=_parse_cov, required=True)
    power.add_argument("--nu4-mode", choices=("exact", "estimate"),
                       default="exact")
    _add_mc_common(power)

    table1 = subs.add_parser(
        "mc-table1", help="moments of the calibrated statistic")
    table1.add_argument("--p", type=int)
    table1.add_argument("--p-exp", type=float,
                        help="set p = round(n ** P_EXP)")
    table1.add_argument("--f", type=_parse_f, default=functions.HALFX3)
    table1.add_argument("--statistic", choices=("gn", "gn-calib", "qn"),
                        default="gn-calib")
    table1.add_argument("--rho", type=float, default=0.5)
    table1.add_argument("--nodes", type=int, default=512)
    _add_mc_common(table1)

    qq = subs.add_parser("qq", help="normal Q-Q pairs from a value column")
    qq.add_argument("--input", required=True,
                    help="CSV with one replication value per line")
    qq.add_argument("--grid", type=int, default=100)
    qq.add_argument("--out", default=None,
                    help="write two-column CSV here instead of stdout")

    return parser


def _cmd_gen(args) -> int:
    if args.p < 1 or args.n < 1:
        raise SystemExit("error: p and n must be positive")
    raw = datagen.sample_matrix(args.dist, args.p, args.n, args.seed)
    data = datagen.apply_covariance(raw, args.cov)
    datagen.save_matrix_csv(data, args.out)
    print(f"wrote {args.p}x{args.n} matrix to {args.out}", file=sys.stderr)
    return 0


def _cmd_test(args) -> int:
    data = _load_matrix(args.input, args.transpose)
    if data.p < data.n:
        raise SystemExit(
            f"error: matrix is {data.p}x{data.n} with p < n; this test "
            "needs dimension >> sample size (rows must be variables; "
            "use --transpose if observations are rows)")
    data = datagen.standardize(data, args.standardize)
    alphas = args.alpha or [0.05]
    result = test_identity(data, alphas[0], args.nu4)
    for alpha in alphas[1:]:
        result.reject_at[alpha] = test_identity(
            data, alpha, result.nu4_used).reject_at[alpha]
    payload = json.loads(result.to_json())
    payload["standardize"] = args.standardize
    _emit(payload, args.format)
    return 0


def _cmd_lss(args) -> int:
    data = _load_matrix(args.input, args.transpose)
    spectrum = eigenvalues(normalized_gram(data))
    if args.variant == "qn":
        result = qn_statistic(spectrum, args.f, args.nu4)
    else:
        opts = CorrectionOptions(rho=args.rho, nodes=args.nodes,
                                 calibrated=args.variant == "gn-calib")
        result = gn_statistic(spectrum, args.f, args.nu4, opts)
        print(result.to_json(rho=args.rho, nodes=args.nodes))
        return 0
    print(result.to_json())
    return 0


def _mc_config(args, p: int, cov=None, statistic="ln", f=None,
               correction=None) -> harness.ExperimentConfig:
    return harness.ExperimentConfig(
        dist=args.dist, n=args.n, p=p, reps=args.reps, seed=args.seed,
        alpha=args.alpha,
        cov=cov if cov is not None else CovarianceSpec.identity(),
        statistic=statistic, f=f,
        correction=correction or CorrectionOptions(),
        nu4_mode=getattr(args, "nu4_mode", "exact"),
        workers=args.workers, force=args.force)


def _emit_report(report: harness.McReport, args) -> None:
    payload = json.loads(report.to_json(include_values=args.rep_values))
    _emit(payload, args.format)


def _cmd_mc_size(args) -> int:
    cfg = _mc_config(args, args.p)
    _emit_report(harness.run_size(cfg, harness.stderr_progress), args)
    return 0


def _cmd_mc_power(args) -> int:
    cfg = _mc_config(args, args.p, cov=args.cov)
    _emit_report(harness.run_power(cfg, harness.stderr_progress), args)
    return 0


def _cmd_mc_table1(args) -> int:
    if (args.p is None) == (args.p_exp is None):
        raise SystemExit("error: give exactly one of --p or --p-exp")
    p = args.p if args.p is not None else int(round(args.n ** args.p_exp))
    opts = CorrectionOptions(rho=args.rho, nodes=args.nodes,
                             calibrated=args.statistic != "gn")
    cfg = _mc_config(args, p, statistic=args.statistic.replace("-", "_"),
                     f=args.f, correction=opts)
    _emit_report(harness.run_calibrated_moments(
        cfg, harness.stderr_progress), args)
    return 0


def _cmd_qq(args) -> int:
    try:
        values = np.atleast_1d(np.loadtxt(args.input, dtype=np.float64))
    except Exception as exc:
        raise SystemExit(f"error: cannot parse {args.input!r}: {exc}")
    report = harness.McReport(
        rep_values=list(map(float, values)), sample_mean=0.0, sample_sd=0.0,
        empirical_rate=None, config={}, wall_time=0.0)
    pairs = harness.qq_export(report, args.grid)
    lines = [f"{t:.17g},{e:.17g}" for t, e in pairs]
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        print("\n".join(lines))
    return 0


_HANDLERS = {
    "gen": _cmd_gen,
    "test": _cmd_test,
    "lss": _cmd_lss,
    "mc-size": _cmd_mc_size,
    "mc-power": _cmd_mc_power,
    "mc-table1": _cmd_mc_table1,
    "qq": _cmd_qq,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "reps", 1) < 1:
        parser.error("--reps must be positive")
    try:
        return _HANDLERS[args.subcommand](args)
    except harness.GuardrailError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
