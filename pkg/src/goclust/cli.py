"""Command-line driver.

    goclust generate   --seed S --out DIR
    goclust cluster    --in DIR --method goc|gpc|baseline --oracle O --k0 K ... --out FILE
    goclust evaluate   --pred FILE --truth FILE
    goclust ap         --in DIR --kind s1|s2|s3 --quantile Q --out FILE
    goclust experiment --config FILE

Exit status: 0 on success, 2 on usage errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .baselines import KINDS, affinity_propagation, baseline_cluster, discrepancy_matrix
from .datagen import GenConfig, generate_dataset
from .errors import GoclustError
from .experiment import load_config, parse_convergence, run_experiment
from .goc import CONSTANT, SHRINK, GocConfig, run_goc, run_gpc
from .metrics import eta_scores, f_measure, nmi
from .oracles import ORACLE_KINDS, OracleConfig
from .uncertainty import standardize


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _open_unit(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return v


def _convergence(text):
    try:
        return parse_convergence(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="goclust", description="Clustering with feature uncertainty sets.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--k-star", type=_positive_int, default=50)
    g.add_argument("--m", type=_positive_int, default=101)
    g.add_argument("--sigma-major", type=float, default=GenConfig.sigma_major)
    g.add_argument("--cluster-spread", type=float, default=GenConfig.cluster_spread)

    c = sub.add_parser("cluster", help="cluster a dataset with GOC, GPC or the baseline")
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--method", choices=["goc", "gpc", "baseline"], default="goc")
    c.add_argument("--oracle", choices=ORACLE_KINDS, default="kmeans")
    c.add_argument("--k0", type=_positive_int, required=True)
    c.add_argument("--lambda", dest="lam", type=_nonneg_float, default=0.0)
    c.add_argument("--max-iter", type=_positive_int, default=100)
    c.add_argument("--convergence", type=_convergence, default=None, metavar="exact|tol:EPS")
    c.add_argument("--k-schedule", choices=[SHRINK, CONSTANT], default=SHRINK)
    c.add_argument("--seed", type=int, default=0, help="oracle seed")
    c.add_argument("--no-standardize", action="store_true")
    c.add_argument("--out", default="assignment.csv")

    e = sub.add_parser("evaluate", help="score an assignment against the truth")
    e.add_argument("--pred", required=True)
    e.add_argument("--truth", required=True)

    a = sub.add_parser("ap", help="affinity propagation over set discrepancies")
    a.add_argument("--in", dest="inp", required=True)
    a.add_argument("--kind", choices=KINDS, required=True)
    a.add_argument("--quantile", type=_open_unit, default=0.5)
    a.add_argument("--damping", type=float, default=0.9)
    a.add_argument("--max-iter", type=_positive_int, default=1000)
    a.add_argument("--conv-window", type=_positive_int, default=50)
    a.add_argument("--hausdorff-standard", action="store_true")
    a.add_argument("--similarity-out", default=None)
    a.add_argument("--no-standardize", action="store_true")
    a.add_argument("--out", required=True)

    x = sub.add_parser("experiment", help="run a method matrix over replicate datasets")
    x.add_argument("--config", required=True)
    x.add_argument("--jobs", type=_positive_int, default=1)
    return p


def _load(path, no_standardize):
    d = io.load_dataset(path)
    if not no_standardize and not d.standardized:
        d = standardize(d)
    return d


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def cmd_generate(args):
    cfg = GenConfig(
        K_star=args.k_star, m=args.m, seed=args.seed, sigma_major=args.sigma_major, cluster_spread=args.cluster_spread
    )
    d = generate_dataset(cfg)
    io.save_dataset(d, args.out)
    print(f"wrote {d.n} individuals to {args.out}")


def cmd_cluster(args):
    d = _load(args.inp, args.no_standardize)
    oc = OracleConfig(kind=args.oracle, rng_seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.method == "baseline":
        a = baseline_cluster(d, args.k0, oc)
        io.write_assignment(out, a)
    else:
        gc = GocConfig(
            K0=args.k0, lam=args.lam, k_schedule=args.k_schedule, tol=args.convergence, T_max=args.max_iter, oracle=oc
        )
        a, trace = run_goc(d, None, gc) if args.method == "goc" else run_gpc(d, gc)
        io.write_assignment(out, a)
        io.write_trace(_sibling(out, ".trace.csv"), trace)
        eta = eta_scores(trace, a, None, d.true_labels)
        io.write_rows(
            _sibling(out, ".eta.csv"),
            ["t", "eta1", "eta2", "eta3"],
            [[r["t"], r["eta1"], r["eta2"], r.get("eta3", "")] for r in eta],
        )
        state = "converged" if trace.converged else "stopped at max-iter"
        print(f"{args.method}: {trace.total_iterations} iterations ({state}), {a.num_clusters} clusters")
    if d.true_labels is not None:
        print(f"nmi {nmi(a.labels, d.true_labels)!r}")
        print(f"f_measure {f_measure(a.labels, d.true_labels)!r}")


def cmd_evaluate(args):
    pred = io.read_labels(args.pred)
    truth = io.read_labels(args.truth)
    print(f"nmi {nmi(pred, truth)!r}")
    print(f"f_measure {f_measure(pred, truth)!r}")
    print(f"n_clusters {int(np.unique(pred).size)}")


def cmd_ap(args):
    d = _load(args.inp, args.no_standardize)
    S = discrepancy_matrix(d, args.kind, args.hausdorff_standard)
    if args.similarity_out:
        io.write_similarity(args.similarity_out, S)
    a = affinity_propagation(S, args.quantile, args.damping, args.max_iter, args.conv_window)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_assignment(out, a)
    if not a.info["converged"]:
        print("warning: affinity propagation did not converge", file=sys.stderr)
    print(f"ap: {a.num_clusters} clusters")
    if d.true_labels is not None:
        print(f"nmi {nmi(a.labels, d.true_labels)!r}")
        print(f"f_measure {f_measure(a.labels, d.true_labels)!r}")


def cmd_experiment(args):
    cfg = load_config(args.config)
    path = run_experiment(cfg, jobs=args.jobs)
    print(f"wrote {path}")


COMMANDS = {
    "generate": cmd_generate,
    "cluster": cmd_cluster,
    "evaluate": cmd_evaluate,
    "ap": cmd_ap,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except (GoclustError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
