"""Experiment drivers behind the command line.

Each driver takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentResult` of flat rows plus an exit status, so the CLI only
has to parse flags and serialise.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import exact
from .exact import (
    covariance,
    default_probes,
    exact_sample,
    fact3_floor,
    gibbs_variational_gap,
    log_partition,
    log_probabilities,
    moment_map,
    verify_conditions,
)
from .graphs import read_graph
from .model import ENUMERATION_CAP, Model, build_antiferro_ising, build_dense_model
from .oracle import Oracle, free_energy, invert_moment_map
from .reduction import BudgetError, admissibility_bound, approximate_logZ, compute_budget, default_delta
from .sampling import estimate_fields_from_samples, gibbs_sample

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_INVARIANT = 4

REDUCTION_COLUMNS = [
    "trial", "p", "delta", "L", "K", "epsilon", "t0", "m0", "xi",
    "log_Z_hat", "exact_log_Z", "achieved_error", "oracle_queries", "wall_ms", "error",
]
ESTIMATION_COLUMNS = ["trial", "vertex", "N0", "N1", "theta_hat", "valid", "theta_true", "abs_error"]
L_SAFETY = 1.5


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    graph: str | None = None
    dense: str | None = None
    beta: float | None = None
    theta: list | None = None
    theta_seed: int | None = None
    theta_scale: float = 0.5
    tau: list | None = None
    p: int | None = None
    delta: float | None = None
    eps: float | None = None
    xi: float | None = None
    L: float | None = None
    K: float | None = None
    n: int = 1000
    burn_in: int | None = None
    thin: int | None = None
    chains: int = 1
    sampler: str = "exact"
    max_invalid: float = 0.0
    probes: int = 20
    seed: int = 0
    trials: int = 1
    workers: int = 1
    format: str = "csv"
    out: str | None = None
    deterministic: bool = False

    def validate(self) -> None:
        needs_model = self.command != "budget"
        if needs_model and (self.graph is None) == (self.dense is None):
            raise ConfigError("give exactly one of --graph or --dense")
        if self.graph is not None and self.beta is None:
            raise ConfigError("--graph needs --beta")
        if self.beta is not None and self.beta < 0:
            raise ConfigError("--beta must be >= 0")
        if self.theta is not None and self.theta_seed is not None:
            raise ConfigError("give at most one of --theta and --theta-seed")
        if self.delta is not None and not 0 < self.delta < 0.5:
            raise ConfigError("--delta must lie in (0, 1/2)")
        for name in ("eps", "L"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"--{name} must be positive")
        for name in ("xi", "K"):
            v = getattr(self, name)
            if v is not None and not v >= 0:
                raise ConfigError(f"--{name} must be >= 0")
        if self.n < 1 or self.trials < 1 or self.chains < 1 or self.workers < 1:
            raise ConfigError("--n, --trials, --chains and --workers must be >= 1")
        if self.burn_in is not None and self.burn_in < 0:
            raise ConfigError("--burn-in must be >= 0")
        if self.thin is not None and self.thin < 1:
            raise ConfigError("--thin must be >= 1")
        if self.format not in ("csv", "json"):
            raise ConfigError("--format must be csv or json")
        if self.sampler not in ("exact", "gibbs"):
            raise ConfigError("--sampler must be exact or gibbs")


@dataclass
class ExperimentResult:
    rows: list
    status: int = EXIT_OK
    summary: dict = field(default_factory=dict)
    columns: list | None = None


def read_dense(path) -> Model:
    """Dense table file: first token ``p``, then ``2**p`` log-weights."""
    tokens = Path(path).read_text().split()
    if not tokens:
        raise ConfigError(f"{path} is empty")
    try:
        p = int(tokens[0])
        values = [float(t) for t in tokens[1:]]
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return build_dense_model(p, values)


def load_model(cfg: ExperimentConfig) -> Model:
    if cfg.graph is not None:
        return build_antiferro_ising(read_graph(cfg.graph), cfg.beta)
    return read_dense(cfg.dense)


def planted_theta(cfg: ExperimentConfig, p: int) -> np.ndarray:
    if cfg.theta is not None:
        theta = np.asarray(cfg.theta, dtype=np.float64)
        if theta.shape != (p,):
            raise ConfigError(f"--theta needs {p} values, got {theta.size}")
        return theta
    if cfg.theta_seed is not None:
        return np.random.default_rng(cfg.theta_seed).uniform(-cfg.theta_scale, cfg.theta_scale, p)
    return np.zeros(p)


def _trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, trial])


# ---------------------------------------------------------------- reduction


def reduction_schedule(model: Model, cfg: ExperimentConfig) -> dict:
    """Resolve delta, L, K, epsilon for a model, measuring L when not given."""
    p = model.p
    K = model.span_bound if cfg.K is None else cfg.K
    delta = cfg.delta if cfg.delta is not None else default_delta(p, max(K, 1.0))
    if cfg.L is None:
        report = verify_conditions(model, delta, default_probes(p, cfg.probes, seed=cfg.seed))
        L = L_SAFETY * report.L_estimate
    else:
        L = cfg.L
    eps = 2.0 if cfg.eps is None else cfg.eps
    return {"p": p, "delta": delta, "L": L, "K": K, "epsilon": eps, "log_h0": model.log_h0}


def _reduction_trial(model: Model, sched: dict, xi: float | None, seed: int, trial: int, deterministic: bool) -> dict:
    row = {c: None for c in REDUCTION_COLUMNS}
    row.update(trial=trial, p=sched["p"], delta=sched["delta"], L=sched["L"], K=sched["K"], epsilon=sched["epsilon"])
    try:
        budget = compute_budget(sched["p"], sched["delta"], sched["L"], sched["K"], sched["epsilon"])
    except BudgetError as exc:
        row["error"] = str(exc)
        return row
    xi = budget.xi_max if xi is None else xi
    mode = "exact" if xi == 0 else "sphere"
    oracle = Oracle(model, xi=xi, noise_mode=mode, seed=_trial_seed(seed, trial), warm_start=True)
    start = time.perf_counter()
    try:
        rep = approximate_logZ(sched, oracle, sched["epsilon"], log_partition(model, np.zeros(model.p)))
    except BudgetError as exc:
        row.update(t0=budget.t0, m0=budget.m0, xi=xi, error=str(exc))
        return row
    wall = 0.0 if deterministic else (time.perf_counter() - start) * 1e3
    row.update(
        t0=budget.t0, m0=budget.m0, xi=xi, log_Z_hat=rep.log_Z_hat, exact_log_Z=rep.exact_log_Z,
        achieved_error=rep.achieved_error, oracle_queries=rep.oracle_queries, wall_ms=wall, error=None,
    )
    return row


def _map_trials(fn, args_list, workers: int):
    if workers == 1:
        return [fn(*a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *a) for a in args_list]
        return [f.result() for f in futures]


def run_reduction_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Condition check, budget, reduction, and comparison against enumeration per trial."""
    model = load_model(cfg)
    if model.p > ENUMERATION_CAP:
        raise ConfigError("the reduction needs an enumerable model")
    sched = reduction_schedule(model, cfg)
    base = {c: None for c in REDUCTION_COLUMNS}
    base.update({k: sched[k] for k in ("p", "delta", "L", "K", "epsilon")})
    if not sched["epsilon"] > admissibility_bound(model.p, sched["delta"], sched["K"]):
        bound = admissibility_bound(model.p, sched["delta"], sched["K"])
        base["error"] = f"epsilon={sched['epsilon']} is inadmissible: must exceed {bound:.6g}"
        return ExperimentResult([base], EXIT_PRECONDITION, columns=REDUCTION_COLUMNS)
    cond = verify_conditions(
        model, sched["delta"], default_probes(model.p, cfg.probes, seed=cfg.seed), L=sched["L"], K=sched["K"]
    )
    if not cond.ok:
        failed = ",".join(k for k, v in cond.passes.items() if not v)
        base["error"] = f"conditions failed: {failed}"
        return ExperimentResult([base], EXIT_PRECONDITION, columns=REDUCTION_COLUMNS)
    args = [(model, sched, cfg.xi, cfg.seed, t, cfg.deterministic) for t in range(cfg.trials)]
    rows = _map_trials(_reduction_trial, args, 1 if cfg.deterministic else cfg.workers)
    rows.sort(key=lambda r: r["trial"])
    status = EXIT_PRECONDITION if any(r["error"] for r in rows) else EXIT_OK
    within = [r["achieved_error"] <= r["epsilon"] for r in rows if r["achieved_error"] is not None]
    summary = {"trials": len(rows), "within_epsilon": sum(within), "conditions": {k: bool(v) for k, v in cond.passes.items()}}
    return ExperimentResult(rows, status, summary, REDUCTION_COLUMNS)


# ----------------------------------------------------------------- sampling


def draw_dataset(model: Model, theta, cfg: ExperimentConfig, seed):
    if cfg.sampler == "gibbs":
        return gibbs_sample(model, theta, cfg.n, cfg.burn_in, cfg.thin, seed=seed, chains=cfg.chains)
    return exact_sample(model, theta, cfg.n, seed=seed)


def run_sampling_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Draw data at a planted theta, estimate the fields, score each trial."""
    model = load_model(cfg)
    if not model.is_ising:
        raise ConfigError("the field estimator needs an Ising model (--graph)")
    theta = planted_theta(cfg, model.p)
    xi = 0.1 if cfg.xi is None else cfg.xi
    rows, errors, invalid = [], [], []
    for t in range(cfg.trials):
        data = draw_dataset(model, theta, cfg, _trial_seed(cfg.seed, t))
        est = estimate_fields_from_samples(data, model.graph, model.beta)
        for r in est.rows():
            i = r["vertex"] - 1
            r.update(trial=t, theta_true=float(theta[i]), abs_error=float(abs(r["theta_hat"] - theta[i])) if r["valid"] else None)
            if not r["valid"]:
                r["theta_hat"] = None
            rows.append(r)
        errors.append(est.max_error(theta))
        invalid.append(1 - est.valid.mean())
    frac_invalid = float(np.mean(invalid))
    summary = {
        "trials": cfg.trials,
        "n": cfg.n,
        "xi": xi,
        "success_fraction": float(np.mean([e <= xi for e in errors])),
        "median_max_error": float(np.median(errors)),
        "invalid_fraction": frac_invalid,
        "flagged": frac_invalid > cfg.max_invalid,
    }
    status = EXIT_PRECONDITION if summary["flagged"] else EXIT_OK
    return ExperimentResult(rows, status, summary, ESTIMATION_COLUMNS)


# ------------------------------------------------------------------- verify


def _fd(f, x, h=1e-3):
    """Five-point central differences of ``f`` at ``x``, one row per coordinate."""
    rows = []
    for e in np.eye(len(x)):
        f2, f1, b1, b2 = (np.asarray(f(x + s * h * e)) for s in (2, 1, -1, -2))
        rows.append((-f2 + 8 * f1 - 8 * b1 + b2) / (12 * h))
    return np.array(rows)


def _check(name, residual, threshold, passed=None) -> dict:
    residual = float(residual)
    ok = residual <= threshold if passed is None else passed
    return {"invariant": name, "residual": residual, "threshold": threshold, "passed": bool(ok)}


def verify_invariants(model: Model, seed=0, n_points: int = 3, covariance_fn=covariance) -> list[dict]:
    """Run the exponential-family identities on an enumerable model.

    ``covariance_fn`` is injectable so a corrupted covariance can serve as a
    negative control.
    """
    rng = np.random.default_rng(seed)
    p = model.p
    thetas = [rng.uniform(-2, 2, p) for _ in range(n_points)]
    grad = hess = floor = pd_min = dual = trip = 0.0
    pd_min = math.inf
    for th in thetas:
        tau = moment_map(model, th)
        grad = max(grad, np.max(np.abs(_fd(lambda t: log_partition(model, t), th) - tau)))
        jac = _fd(lambda t: moment_map(model, t), th)
        cov = covariance_fn(model, th)
        hess = max(hess, np.max(np.abs(jac - cov)))
        lam = np.linalg.eigvalsh(0.5 * (cov + cov.T))[0]
        pd_min = min(pd_min, lam)
        floor = max(floor, fact3_floor(model, th) - lam)
        F = free_energy(model, tau)
        dual = max(dual, abs(log_partition(model, th) - F - tau @ th))
        trip = max(trip, np.max(np.abs(invert_moment_map(model, tau, 1e-8) - th)))

    taus = [rng.uniform(0.2, 0.8, p) for _ in range(n_points)]
    fgrad = concave = 0.0
    for a, b in zip(taus, taus[1:] + taus[:1]):
        fd = _fd(lambda t: free_energy(model, t, 1e-12), a)
        fgrad = max(fgrad, np.max(np.abs(fd + invert_moment_map(model, a))))
        lam = rng.uniform(0.1, 0.9)
        mix = lam * free_energy(model, a) + (1 - lam) * free_energy(model, b)
        concave = max(concave, mix - free_energy(model, lam * a + (1 - lam) * b))

    th = thetas[0]
    logp, _ = log_probabilities(model, th)
    gap_self = abs(gibbs_variational_gap(model, th, np.exp(logp)))
    gap_min = min(gibbs_variational_gap(model, th, rng.dirichlet(np.ones(2**p))) for _ in range(20))

    checks = [
        _check("gradient_identity", grad, 1e-5),
        _check("hessian_identity", hess, 1e-4),
        _check("covariance_positive_definite", -pd_min, 0.0, passed=pd_min > 0),
        _check("fact3_floor", floor, 0.0),
        _check("legendre_duality", dual, 1e-8),
        _check("inversion_round_trip", trip, 1e-6),
        _check("free_energy_gradient", fgrad, 1e-4),
        _check("free_energy_concavity", concave, 1e-8),
        _check("variational_gap_at_optimum", gap_self, 1e-9),
        _check("variational_gap_nonnegative", -gap_min, 1e-9),
    ]
    if model.is_ising:
        flip = np.max(np.abs(moment_map(model, np.zeros(p)) - 0.5))
        checks.append(_check("flip_symmetry", flip, 1e-10))
    return checks


def run_verify(cfg: ExperimentConfig, covariance_fn=covariance) -> ExperimentResult:
    model = load_model(cfg)
    if model.p > ENUMERATION_CAP:
        raise ConfigError("verify needs an enumerable model")
    rows = verify_invariants(model, cfg.seed, covariance_fn=covariance_fn)
    status = EXIT_OK if all(r["passed"] for r in rows) else EXIT_INVARIANT
    return ExperimentResult(rows, status, {"passed": sum(r["passed"] for r in rows), "total": len(rows)})


# -------------------------------------------------------------- small ones


def run_exact(cfg: ExperimentConfig) -> ExperimentResult:
    model = load_model(cfg)
    summary = exact.exact_summary(model, planted_theta(cfg, model.p))
    return ExperimentResult([json.loads(summary.to_json())])


def run_invert(cfg: ExperimentConfig) -> ExperimentResult:
    model = load_model(cfg)
    if cfg.tau is None:
        raise ConfigError("invert needs --tau")
    tau = np.asarray(cfg.tau, dtype=np.float64)
    if tau.shape != (model.p,) or not np.all((tau > 0) & (tau < 1)):
        raise ConfigError(f"--tau needs {model.p} values strictly inside (0, 1)")
    theta = invert_moment_map(model, tau, 1e-10)
    F = float(log_partition(model, theta) - tau @ theta)
    return ExperimentResult([{"tau": tau.tolist(), "theta": theta.tolist(), "free_energy": F}])


def run_sample(cfg: ExperimentConfig):
    model = load_model(cfg)
    return draw_dataset(model, planted_theta(cfg, model.p), cfg, cfg.seed)


def run_budget(cfg: ExperimentConfig) -> ExperimentResult:
    if cfg.graph is not None or cfg.dense is not None:
        sched = reduction_schedule(load_model(cfg), cfg)
    else:
        if None in (cfg.p, cfg.delta, cfg.L, cfg.K, cfg.eps):
            raise ConfigError("budget without a model needs --p, --delta, --L, --K and --eps")
        sched = {"p": cfg.p, "delta": cfg.delta, "L": cfg.L, "K": cfg.K, "epsilon": cfg.eps}
    try:
        budget = compute_budget(sched["p"], sched["delta"], sched["L"], sched["K"], sched["epsilon"])
    except BudgetError as exc:
        return ExperimentResult([{**{k: sched[k] for k in ("p", "delta", "L", "K", "epsilon")}, "error": str(exc)}],
                                EXIT_PRECONDITION)
    return ExperimentResult([budget.to_dict()])


# ---------------------------------------------------------------- CSV I/O


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v)
    return v


def rows_to_csv(rows: list[dict], columns: list | None = None) -> str:
    columns = columns or list(rows[0].keys())
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({c: _cell(r.get(c)) for c in columns})
    return buf.getvalue()


def _parse_cell(s: str):
    if s == "":
        return None
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def csv_to_rows(text: str) -> list[dict]:
    """Inverse of :func:`rows_to_csv` up to booleans, which come back as 0/1."""
    return [{k: _parse_cell(v) for k, v in r.items()} for r in csv.DictReader(io.StringIO(text))]
