"""``suffstat`` command line.

Examples
--------
    suffstat exact --graph cycle8.txt --beta 0.6 --theta-seed 1 --format json
    suffstat reduce --graph cycle8.txt --beta 0.6 --eps 1.0 --trials 5
    suffstat estimate --graph cycle8.txt --beta 0.4 --theta-seed 3 --n 200000 --trials 20
    suffstat budget --p 4 --delta 0.01 --L 10 --K 2 --eps 1.5

Exit codes: 0 ok, 2 bad configuration, 3 precondition or admissibility
failure, 4 an invariant check failed.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import experiments as ex
from .data import format_dataset
from .graphs import GraphError
from .model import ModelError

COMMANDS = ("exact", "invert", "reduce", "sample", "estimate", "verify", "budget")


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="suffstat", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    src = ap.add_argument_group("model")
    src.add_argument("--graph", help="graph file ('p k' header, 1-indexed edges)")
    src.add_argument("--dense", help="dense log-weight table file ('p' then 2**p values)")
    src.add_argument("--beta", type=float)
    src.add_argument("--theta", type=_floats, help="comma-separated natural parameters")
    src.add_argument("--theta-seed", type=int, help="draw theta uniformly from [-s, s]^p")
    src.add_argument("--theta-scale", type=float, default=0.5)
    src.add_argument("--tau", type=_floats, help="comma-separated moments (invert)")
    src.add_argument("--p", type=int, help="dimension (budget without a model)")

    sch = ap.add_argument_group("reduction schedule")
    sch.add_argument("--delta", type=float)
    sch.add_argument("--eps", type=float)
    sch.add_argument("--xi", type=float, help="oracle accuracy (reduce; 0 = exact) or target precision (estimate)")
    sch.add_argument("--L", type=float)
    sch.add_argument("--K", type=float)
    sch.add_argument("--probes", type=int, default=20)

    smp = ap.add_argument_group("sampling")
    smp.add_argument("--n", type=int, default=1000)
    smp.add_argument("--burn-in", type=int)
    smp.add_argument("--thin", type=int)
    smp.add_argument("--chains", type=int, default=1)
    smp.add_argument("--sampler", choices=("exact", "gibbs"), default="exact")
    smp.add_argument("--max-invalid", type=float, default=0.0)

    run = ap.add_argument_group("run")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--out")
    run.add_argument("--deterministic", action="store_true")
    return ap


def config_from_args(args: argparse.Namespace) -> ex.ExperimentConfig:
    fields = {k: v for k, v in vars(args).items()}
    return ex.ExperimentConfig(**fields)


def render(result: ex.ExperimentResult, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"rows": result.rows, "summary": result.summary, "status": result.status}, indent=2) + "\n"
    return ex.rows_to_csv(result.rows, result.columns)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        cfg.validate()
        if cfg.command == "sample":
            _emit(format_dataset(ex.run_sample(cfg)), cfg.out)
            return ex.EXIT_OK
        runner = {
            "exact": ex.run_exact,
            "invert": ex.run_invert,
            "reduce": ex.run_reduction_experiment,
            "estimate": ex.run_sampling_experiment,
            "verify": ex.run_verify,
            "budget": ex.run_budget,
        }[cfg.command]
        result = runner(cfg)
    except (ex.ConfigError, GraphError, ModelError, OSError) as exc:
        print(f"suffstat: {exc}", file=sys.stderr)
        return ex.EXIT_CONFIG
    _emit(render(result, cfg.format), cfg.out)
    if result.summary and cfg.format == "csv":
        print(json.dumps(result.summary), file=sys.stderr)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
