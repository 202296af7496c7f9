"""Field-estimator error as a function of the sample size.

Planted theta is uniform in [-scale, scale]^p on a cycle (or a graph file).
Reports, per n, the median sup-norm error over the trials, the fraction of
trials within xi, and the fraction of invalid coordinates.

    python scripts/run_sampling_sweep.py --p 8 --beta 0.4 --ns 1000 10000 100000 --trials 20
"""

import argparse
import sys

import numpy as np

from suffstat.exact import exact_sample
from suffstat.experiments import rows_to_csv
from suffstat.graphs import Graph, read_graph
from suffstat.model import build_antiferro_ising
from suffstat.sampling import estimate_fields_from_samples, gibbs_sample

COLUMNS = ["n", "trials", "sampler", "median_max_error", "success_fraction", "invalid_fraction"]


def sweep(model, theta, ns, trials, xi, sampler, seed):
    rows = []
    for n in ns:
        errs, invalid = [], []
        for ss in np.random.SeedSequence([seed, n]).spawn(trials):
            if sampler == "gibbs":
                data = gibbs_sample(model, theta, n, seed=ss, chains=min(n, 256))
            else:
                data = exact_sample(model, theta, n, seed=ss)
            est = estimate_fields_from_samples(data, model.graph, model.beta)
            errs.append(est.max_error(theta))
            invalid.append(1 - est.valid.mean())
        row = dict(
            n=n, trials=trials, sampler=sampler, median_max_error=float(np.median(errs)),
            success_fraction=float(np.mean(np.array(errs) <= xi)), invalid_fraction=float(np.mean(invalid)),
        )
        print(f"n={n:>8d}  median error {row['median_max_error']:.4f}  success {row['success_fraction']:.2f}",
              file=sys.stderr)
        rows.append(row)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--graph")
    ap.add_argument("--p", type=int, default=8)
    ap.add_argument("--beta", type=float, default=0.4)
    ap.add_argument("--theta-scale", type=float, default=0.5)
    ap.add_argument("--ns", type=int, nargs="+", default=[1_000, 10_000, 100_000])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--xi", type=float, default=0.1)
    ap.add_argument("--sampler", choices=("exact", "gibbs"), default="exact")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    graph = read_graph(args.graph) if args.graph else Graph.cycle(args.p)
    model = build_antiferro_ising(graph, args.beta)
    theta = np.random.default_rng(args.seed).uniform(-args.theta_scale, args.theta_scale, graph.p)
    rows = sweep(model, theta, args.ns, args.trials, args.xi, args.sampler, args.seed)
    text = rows_to_csv(rows, COLUMNS)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")


if __name__ == "__main__":
    main()
