"""Command-line entry point: ``sparseh2 {simulate,estimate,calibrate,decide}``.

Exit codes: 0 on success, 1 on a numerical failure (degenerate likelihood,
empty selection, failed bootstrap), 2 on usage or input/output errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import formats, parallel
from .bootstrap import DEFAULT_K
from .calibrate import DEFAULT_CUTOFF, DEFAULT_SWEEP, calibrate_threshold, decide
from .data import standardize
from .diagnostics import recovery_metrics
from .errors import EmptySelection, NumericalError, SparseH2Error
from .mle import Mode
from .pipeline import PipelineConfig, run
from .simulate import SimConfig, simulate
from .stability import DEFAULT_THRESHOLD, StabilityConfig

log = logging.getLogger("sparseh2")


class UsageError(SparseH2Error):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparseh2", description="Heritability estimation with variable selection.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, pheno=True):
        sp.add_argument("genotypes", help="genotype CSV (header of SNP ids, rows of 0/1/2)")
        if pheno:
            sp.add_argument("phenotype", help="phenotype CSV (header plus one column)")
            sp.add_argument("--covariates", help="covariate CSV (header plus one column per covariate)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=_positive_int, default=None,
                        help=f"worker threads (default: ${parallel.THREADS_ENV} or all cores)")
        sp.add_argument("--subsamples", type=_positive_int, default=50, help="stability-selection subsamples")
        sp.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")

    s = sub.add_parser("simulate", help="write a synthetic data set")
    s.add_argument("config", nargs="?", help="JSON simulation config (default: desk-scale settings)")
    s.add_argument("out_dir")
    s.add_argument("--threads", type=_positive_int, default=None)

    e = sub.add_parser("estimate", help="estimate heritability and its bootstrap interval")
    common(e)
    e.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.ESTHER.value)
    e.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    e.add_argument("--bootstrap-K", type=_positive_int, default=DEFAULT_K)
    e.add_argument("--truth", help="truth manifest; gives the oracle support and adds recovery metrics")
    e.add_argument("--out", help="machine-readable report path")

    c = sub.add_parser("calibrate", help="choose the stability threshold by simulation")
    common(c, pheno=False)
    c.add_argument("--eta-grid", type=_floats, default=[0.3, 0.5, 0.7])
    c.add_argument("--q-grid", type=_floats, default=[0.002])
    c.add_argument("--thresholds", type=_floats, default=list(DEFAULT_SWEEP))
    c.add_argument("--reps", type=_positive_int, default=5)
    c.add_argument("--out", help="CSV path for the error table")

    d = sub.add_parser("decide", help="choose between selection and no selection")
    common(d)
    d.add_argument("--thresholds", type=_floats, default=list(DEFAULT_SWEEP))
    d.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF)
    d.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="threshold whose fit is reported when selection is chosen")
    d.add_argument("--bootstrap-K", type=_positive_int, default=DEFAULT_K)
    d.add_argument("--out", help="machine-readable report path")
    return p


def _require(path):
    if path is not None and not Path(path).is_file():
        raise FileNotFoundError(f"no such file: {path}")


def _load(args, pheno=True):
    _require(args.genotypes)
    if pheno:
        _require(args.phenotype)
        _require(args.covariates)
    W = formats.read_genotypes(args.genotypes)
    Y = X = None
    if pheno:
        Y = formats.read_phenotype(args.phenotype)
        formats.check_rows(W.n, args.genotypes, Y.n, args.phenotype)
        if args.covariates:
            fx = formats.read_covariates(args.covariates)
            formats.check_rows(W.n, args.genotypes, fx.n, args.covariates)
            X = fx.X
    return W, standardize(W), Y, X


def cmd_simulate(args) -> int:
    cfg = SimConfig.from_dict(formats.read_json(args.config)) if args.config else SimConfig()
    out = simulate(cfg, workers=args.threads)
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    formats.write_genotypes(d / "genotypes.csv", out.W)
    formats.write_phenotype(d / "phenotype.csv", out.Y.values)
    if out.X is not None:
        # the intercept column is implied by every estimator
        names = [f"cov{k}" for k in range(1, out.X.p)]
        formats.write_covariates(d / "covariates.csv", out.X.X[:, 1:], names)
    manifest = {
        "eta": out.eta,
        "target_eta": cfg.target_eta,
        "sigma_e2": out.params.sigma_e2,
        "sigma_u2": out.params.sigma_u2,
        "q": out.params.q,
        "seed": cfg.seed,
        "support": out.support.tolist(),
        "support_ids": [out.W.snp_ids[j] for j in out.support],
        "effects": out.u[out.support].tolist(),
        "beta": None if out.beta is None else out.beta.tolist(),
        "config": cfg.to_dict(),
    }
    formats.write_json(d / "truth.json", manifest)
    print(f"wrote {out.W.n} x {out.W.N} genotypes, |support| = {out.support.size}, eta = {out.eta:.4f} to {d}")
    return 0


def _truth_support(truth, Zs):
    """Map manifest support (genotype columns) to standardized-matrix columns."""
    where = {int(j): k for k, j in enumerate(Zs.source_column_index)}
    return [where[j] for j in truth["support"] if j in where]


def cmd_estimate(args) -> int:
    _require(args.truth)
    W, Zs, Y, X = _load(args)
    truth = formats.read_json(args.truth) if args.truth else None
    mode = Mode(args.mode)
    support = None
    if mode is Mode.ORACLE:
        if truth is None:
            raise UsageError("--mode oracle needs --truth")
        support = tuple(_truth_support(truth, Zs))
    cfg = PipelineConfig(
        mode=mode,
        stability=StabilityConfig(n_subsamples=args.subsamples, threshold=args.threshold),
        support=support,
        bootstrap_K=args.bootstrap_K,
        seed=args.seed,
    )
    t0 = time.perf_counter()
    try:
        res = run(Y.values, Zs.values, X, cfg, workers=args.threads)
    finally:
        log.info("estimate finished in %.1f s", time.perf_counter() - t0)
    ids = Zs.ids()
    if mode is Mode.ESTHER:
        cols = res.selection.selected
        freqs = res.selection.frequencies[cols]
    elif mode is Mode.ORACLE:
        cols = np.asarray(sorted(set(support)), dtype=np.intp)
        freqs = [None] * cols.size
    else:
        cols, freqs = np.arange(Zs.N), [None] * Zs.N
    selected = [] if mode is Mode.HILMM else [
        {"id": ids[k], "column": int(Zs.source_column_index[k]), "frequency": f}
        for k, f in zip(cols, freqs)
    ]
    recovery = None
    if truth is not None and mode is not Mode.HILMM:
        u = np.zeros(W.N)
        u[np.asarray(truth["support"], dtype=np.intp)] = truth["effects"]
        if np.any(u):
            recovery = recovery_metrics(Zs.source_column_index[cols], u).to_dict()
    report = formats.RunReport(
        config={
            "mode": mode.value,
            "threshold": args.threshold,
            "subsamples": args.subsamples,
            "bootstrap_K": args.bootstrap_K,
            "seed": args.seed,
            "n": W.n,
            "N": W.N,
            "N_used": Zs.N,
            "covariates": 0 if X is None else X.shape[1],
        },
        mode=mode.value,
        eta_hat=res.fit.eta_hat,
        sigma2_hat=res.fit.sigma2_hat,
        se=res.fit.se,
        ci_low=res.bootstrap.ci_low,
        ci_high=res.bootstrap.ci_high,
        N_final=int(len(cols)),
        selected=selected,
        flags=list(res.fit.flags),
        bootstrap_dropped=res.bootstrap.dropped,
        seed=args.seed,
        recovery=recovery,
        timings=dict(res.timings) if args.timings else None,
    )
    if args.out:
        Path(args.out).write_text(report.emit())
    print(f"mode        {mode.value}")
    print(f"eta_hat     {res.fit.eta_hat:.4f}  (se {res.fit.se:.4f})")
    print(f"95% CI      [{res.bootstrap.ci_low:.4f}, {res.bootstrap.ci_high:.4f}]")
    print(f"sigma2_hat  {res.fit.sigma2_hat:.4g}")
    print(f"N_final     {len(cols)}")
    if res.fit.flags:
        print(f"flags       {', '.join(res.fit.flags)}")
    if recovery:
        print(f"capture     {recovery['capture_fraction']:.3f} of {recovery['true_support_size']} causal SNPs")
    return 0


def cmd_calibrate(args) -> int:
    W, Zs, _, _ = _load(args, pheno=False)
    result = calibrate_threshold(
        Zs.values,
        args.eta_grid,
        args.q_grid,
        args.thresholds,
        args.reps,
        seed=args.seed,
        stability=StabilityConfig(n_subsamples=args.subsamples),
        workers=args.threads,
    )
    if args.out:
        formats.write_calibration_table(args.out, result.cells)
    for t in sorted(result.worst_error):
        print(f"threshold {t:.2f}  worst mean |eta - eta_hat| {result.worst_error[t]:.4f}")
    print(f"best threshold {result.best_threshold:.2f}")
    return 0


def cmd_decide(args) -> int:
    W, Zs, Y, X = _load(args)
    t0 = time.perf_counter()
    out = decide(
        Y.values,
        Zs.values,
        X,
        thresholds=args.thresholds,
        cutoff=args.cutoff,
        threshold=args.threshold,
        stability=StabilityConfig(n_subsamples=args.subsamples),
        K=args.bootstrap_K,
        seed=args.seed,
        workers=args.threads,
    )
    elapsed = time.perf_counter() - t0
    n_final = out.selection.N_final if out.decision.verdict is Mode.ESTHER else Zs.N
    report = formats.DecisionReport(
        config={
            "thresholds": list(args.thresholds),
            "cutoff": args.cutoff,
            "threshold": args.threshold,
            "subsamples": args.subsamples,
            "bootstrap_K": args.bootstrap_K,
            "seed": args.seed,
            "n": W.n,
            "N": W.N,
            "N_used": Zs.N,
            "covariates": 0 if X is None else X.shape[1],
        },
        thresholds=[
            {"threshold": r.threshold, "eta_hat": r.eta_hat, "ci_low": r.ci_low,
             "ci_high": r.ci_high, "N_final": r.N_final}
            for r in out.sweep.per_threshold
        ],
        overlap_count=out.decision.overlap_count,
        cutoff=out.decision.cutoff,
        verdict=out.decision.verdict.value,
        flags=list(out.decision.flags) + list(out.fit.flags),
        chosen_threshold=out.threshold,
        eta_hat=out.fit.eta_hat,
        sigma2_hat=out.fit.sigma2_hat,
        se=out.fit.se,
        ci_low=out.bootstrap.ci_low,
        ci_high=out.bootstrap.ci_high,
        N_final=int(n_final),
        seed=args.seed,
        timings={"total": elapsed} if args.timings else None,
    )
    if args.out:
        Path(args.out).write_text(report.emit())
    for r in out.sweep.per_threshold:
        print(f"threshold {r.threshold:.2f}  eta_hat {r.eta_hat:.4f}  CI [{r.ci_low:.4f}, {r.ci_high:.4f}]  N={r.N_final}")
    print(f"overlap count {out.decision.overlap_count:.2f} (cutoff {out.decision.cutoff:g})")
    print(f"verdict {out.decision.verdict.value}: eta_hat {out.fit.eta_hat:.4f}, "
          f"CI [{out.bootstrap.ci_low:.4f}, {out.bootstrap.ci_high:.4f}]")
    return 0


_COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "calibrate": cmd_calibrate, "decide": cmd_decide}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except EmptySelection as exc:
        print(f"error: {exc}; try a lower --threshold or --mode hilmm", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, SparseH2Error, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
