"""Offline study at n=2000, N=100000 (about an hour and 8 GB of memory).

For each replicate a fresh data set with ``q = 1e-3`` is simulated and the
selection-based, known-support and no-selection estimators are run with
their bootstrap intervals. One line per replicate and estimator is written
as CSV to stdout, followed by a summary on stderr.

    python scripts/full_scale.py --eta 0.5 --reps 3 > full_scale.csv
"""

import argparse
import sys
import time

import numpy as np

from sparseh2.errors import EmptySelection
from sparseh2.mle import Mode
from sparseh2.pipeline import PipelineConfig, run
from sparseh2.simulate import SimConfig, simulate
from sparseh2.data import TraitParams


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--N", type=int, default=100000)
    p.add_argument("--q", type=float, default=1e-3)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    args = p.parse_args(argv)

    print("rep,mode,eta_hat,ci_low,ci_high,N_final,seconds")
    widths = {m: [] for m in Mode}
    for rep in range(args.reps):
        seed = args.seed + rep
        cfg = SimConfig(n=args.n, N=args.N, params=TraitParams(q=args.q), target_eta=args.eta, seed=seed)
        out = simulate(cfg, workers=args.threads)
        Y, Z = out.Y.values, out.Z.values
        support = tuple(int(j) for j in np.searchsorted(out.Z.source_column_index, out.support))
        for mode in Mode:
            t0 = time.perf_counter()
            pc = PipelineConfig(mode=mode, seed=seed, support=support if mode is Mode.ORACLE else None)
            try:
                res = run(Y, Z, cfg=pc, workers=args.threads)
            except EmptySelection:
                print(f"{rep},{mode.value},,,,0,{time.perf_counter() - t0:.1f}", flush=True)
                continue
            if mode is Mode.ESTHER:
                n_final = res.selection.N_final
            elif mode is Mode.ORACLE:
                n_final = len(support)
            else:
                n_final = Z.shape[1]
            widths[mode].append(res.bootstrap.width)
            print(f"{rep},{mode.value},{res.fit.eta_hat:.4f},{res.bootstrap.ci_low:.4f},"
                  f"{res.bootstrap.ci_high:.4f},{n_final},{time.perf_counter() - t0:.1f}", flush=True)
        del out, Y, Z
    for mode, w in widths.items():
        if w:
            print(f"{mode.value}: mean CI width {np.mean(w):.3f} over {len(w)} runs", file=sys.stderr)


if __name__ == "__main__":
    main()
