"""Batch experiment driver.

Subcommands: validate (check a config), run (execute experiment suites and
write CSV/JSON reports), report (summarize a previous run).  Reports carry
the config hash; writes are atomic (temp file + rename), so a crashed run
never leaves a partial report at the output path.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import load_config
from .errors import FlowLdpError, ValidationError
from . import ldp, rate, tauberian
from .laplace import level_data, pole_curve, residue_C
from .suspension import flow_mean

WORKERS_ENV = "FLOWLDP_WORKERS"

# fixed, append-only CSV schema shared by all experiment kinds
CSV_COLUMNS = ["experiment", "kind", "row", "a", "epsilon", "n", "q", "T",
               "method", "estimate", "ci_half_width", "prediction", "ratio",
               "seed", "wall_time", "extra"]


def atomic_write(path, data: bytes):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resolve_a(model, spec):
    return flow_mean(model) if spec in (None, "mean") else float(spec)


def _row(exp, kind, i, **kw):
    base = {c: "" for c in CSV_COLUMNS}
    base.update(experiment=exp, kind=kind, row=i)
    base.update(kw)
    return base


def run_pressure_table(name, model, params, seed):
    del seed
    from .transfer import rpf
    s_star = model.diagnostics["s_star"]
    raw_f = model.f + s_star * model.tau
    rows = [_row(name, "pressure_table", 0, method="shift_pressure",
                 estimate=rpf(model.system, raw_f, state_len=model.state_len).pressure,
                 extra="shift pressure of the configured potential f"),
            _row(name, "pressure_table", 1, method="normalization_root",
                 estimate=s_star,
                 extra="root s* of Pr(f - s tau) = 0"),
            _row(name, "pressure_table", 2, method="normalized_pressure",
                 estimate=model.base_rpf.pressure,
                 extra="shift pressure after normalization (~0)")]
    for t in params.get("t_values", []):
        rows.append(_row(name, "pressure_table", len(rows), method="beta",
                         estimate=rate.beta(model, float(t)), extra=f"t={t}"))
    return rows


def run_rate_scan(name, model, params, seed):
    del seed
    t_grid = params.get("t_grid")
    a_values = [_resolve_a(model, a) for a in params.get("a_values", ["mean"])]
    prof = rate.rate_profile(model, t_grid=t_grid, a_values=a_values)
    rows = []
    for i, (t, b, bp, bpp) in enumerate(zip(prof.t_grid, prof.beta_vals,
                                            prof.beta_prime_vals, prof.beta_second_vals)):
        rows.append(_row(name, "rate_scan", i, method="beta_profile", estimate=b,
                         prediction=bp, ratio=bpp, extra=f"t={t:.6g};cols=beta,beta',beta''"))
    for a, d in sorted(prof.levels.items()):
        rows.append(_row(name, "rate_scan", len(rows), a=a, method="level",
                         estimate=d["gamma"], prediction=d["xi"],
                         ratio=d["beta_second_at_xi"], extra="cols=gamma,xi,beta''(xi)"))
    return rows


def run_pole_curve(name, model, params, seed):
    del seed
    a = _resolve_a(model, params.get("a", "mean"))
    omega = params.get("omega_grid") or list(np.round(np.arange(-0.3, 0.30001, 0.05), 10))
    pd = pole_curve(model, a, omega)
    rows = []
    for i, (om, s) in enumerate(zip(pd.omega_grid, pd.s_of_omega)):
        rows.append(_row(name, "pole_curve", i, a=a, estimate=s.real,
                         prediction=s.imag, extra=f"omega={om:.6g};cols=Re s,Im s"))
    rows.append(_row(name, "pole_curve", len(rows), a=a, method="curvature",
                     estimate=pd.curvature, prediction=level_data(model, a)["beta_second"],
                     extra="curvature of Re s at omega=0 vs beta''(xi(a))"))
    return rows


def run_ldp_sweep(name, model, params, seed):
    a = _resolve_a(model, params.get("a", "mean"))
    eps = float(params.get("epsilon", 0.05))
    q = int(params.get("q", 0))
    N = int(params.get("N", 100_000))
    exact_cap = float(params.get("exact_T_cap", 23.0))
    tilt = bool(params.get("tilt", False))
    rows = []
    for i, T in enumerate(params.get("T_grid", [15, 17, 19, 21, 23])):
        T = float(T)
        t0 = time.perf_counter()
        pred = ldp.predicted_density(model, a, eps, n=T, q=q, T=T)
        if T <= exact_cap:
            est = ldp.exact_estimate(model, a, eps, n=T, T=T)
        else:
            est = ldp.mc_estimate(model, a, eps, n=T, T=T, N=N, seed=seed + i,
                                  tilt=tilt, calibrate_T=exact_cap if tilt else None)
        rows.append(_row(name, "ldp_sweep", i, a=a, epsilon=eps, n=T, q=q, T=T,
                         method=est.method, estimate=est.estimate,
                         ci_half_width=est.half_width, prediction=pred.value,
                         ratio=est.estimate / pred.value, seed=seed + i,
                         wall_time=round(time.perf_counter() - t0, 4)))
    return rows


def run_zeta_band(name, model, params, seed):
    a = _resolve_a(model, params.get("a", "mean"))
    eps = float(params.get("epsilon", 0.05))
    eta = float(params.get("eta", 0.25))
    rep = ldp.zeta_experiment(model, a, eps, params.get("T_grid", [15, 17, 19, 21, 23]),
                              eta=eta, N=int(params.get("N", 200_000)), seed=seed,
                              exact_T_cap=float(params.get("exact_T_cap", 23.0)))
    rows = []
    for i, r in enumerate(rep["rows"]):
        rows.append(_row(name, "zeta_band", i, a=a, epsilon=eps, n=r["T"], q=0,
                         T=r["T"], method=r["method"], estimate=r["estimate"],
                         prediction=r["prediction"], ratio=r["ratio"], seed=seed,
                         extra=f"band=[{r['lower']:.6g},{r['upper']:.6g}];in_band={r['in_band']}"))
    return rows


def run_tauberian_check(name, model, params, seed):
    del model, seed
    lam = float(params.get("lambda", 1e6))
    y = float(params.get("y", 30.0))
    rows = [_row(name, "tauberian_check", 0, method="kernel_integral",
                 estimate=tauberian.kernel_integral(lam, y), prediction=math.pi,
                 extra=f"lambda={lam:g};y={y:g}")]
    decay = float(params.get("A_decay", 0.1))
    perturb = float(params.get("perturbation", 0.5))
    fam = tauberian.LaplaceFamily(
        A=lambda n: math.exp(-decay * n),
        g=lambda n, t: math.exp(-decay * n) * math.exp(t) / math.sqrt(math.pi * t)
        * (1 + perturb * math.exp(-t / 2)),
        mu=decay, mu0=4 * decay)
    rep = tauberian.verify_tauberian(fam, q=int(params.get("q", 0)),
                                     eta=float(params.get("eta", 0.05)),
                                     n_grid=params.get("n_grid", list(range(2, 26))))
    for r in rep["rows"]:
        rows.append(_row(name, "tauberian_check", len(rows), n=r["n"], T=r["t"],
                         estimate=r["g"], prediction=r["predicted"], ratio=r["ratio"],
                         extra=f"in_band={r['in_band']}"))
    rows.append(_row(name, "tauberian_check", len(rows), method="onset_n0",
                     estimate=rep["onset_n0"]))
    return rows


KIND_RUNNERS = {
    "pressure_table": run_pressure_table,
    "rate_scan": run_rate_scan,
    "pole_curve": run_pole_curve,
    "ldp_sweep": run_ldp_sweep,
    "zeta_band": run_zeta_band,
    "tauberian_check": run_tauberian_check,
}


def _run_one(cfg, exp, seed_override):
    t0 = time.perf_counter()
    name, kind = exp["name"], exp["kind"]
    seed = int(seed_override if seed_override is not None else exp.get("seed", 0))
    model = cfg.build_model() if kind != "tauberian_check" else None
    try:
        rows = KIND_RUNNERS[kind](name, model, exp.get("params", {}), seed)
        status = "ok"
        error = ""
    except FlowLdpError as exc:
        rows, status, error = [], "error", f"{type(exc).__name__}: {exc}"
    return {"name": name, "kind": kind, "seed": seed, "status": status,
            "error": error, "rows": rows, "wall_time": round(time.perf_counter() - t0, 4)}


def run_suite(cfg, out_dir, workers=1, seed_override=None, only=None):
    exps = [e for e in cfg.experiments if only is None or e["name"] == only]
    if only is not None and not exps:
        raise ValidationError([f"no experiment named {only!r} in the config"])
    cfg.build_model()  # shared, built once before the pool fans out
    if workers > 1 and len(exps) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda e: _run_one(cfg, e, seed_override), exps))
    else:
        results = [_run_one(cfg, e, seed_override) for e in exps]
    report = {
        "version": __version__,
        "config": cfg.name or os.path.basename(cfg.path),
        "config_hash": cfg.config_hash,
        "workers": workers,
        "seed_override": seed_override,
        "experiments": [{k: r[k] for k in ("name", "kind", "seed", "status", "error", "wall_time")}
                        for r in results],
        "failed": sorted(r["name"] for r in results if r["status"] != "ok"),
    }
    atomic_write(os.path.join(out_dir, "report.json"),
                 (json.dumps(report, indent=2, sort_keys=True) + "\n").encode())
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
    wr.writeheader()
    for r in results:
        for row in r["rows"]:
            wr.writerow({k: _fmt(v) for k, v in row.items()})
    atomic_write(os.path.join(out_dir, "results.csv"), buf.getvalue().encode())
    return report


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return v


def _cmd_validate(args):
    try:
        cfg = load_config(args.config)
    except ValidationError as exc:
        print(f"invalid: {args.config}")
        for e in exc.errors:
            print(f"  - {e}")
        return 1
    print(f"ok: {args.config} (hash {cfg.config_hash}, "
          f"{len(cfg.experiments)} experiment(s))")
    return 0


def _cmd_run(args):
    cfg = load_config(args.config)
    workers = args.workers
    if os.environ.get(WORKERS_ENV):
        workers = int(os.environ[WORKERS_ENV])
    report = run_suite(cfg, args.out, workers=workers, seed_override=args.seed,
                       only=args.experiment)
    for exp in report["experiments"]:
        print(f"{exp['name']}: {exp['status']} ({exp['wall_time']}s)"
              + (f" {exp['error']}" if exp["error"] else ""))
    print(f"report: {os.path.join(args.out, 'report.json')}")
    return 1 if report["failed"] else 0


def _cmd_report(args):
    path = os.path.join(args.out, "report.json")
    with open(path) as fh:
        report = json.load(fh)
    print(f"config {report['config']} (hash {report['config_hash']}, "
          f"version {report['version']})")
    for exp in report["experiments"]:
        print(f"  {exp['name']:24s} {exp['kind']:16s} {exp['status']:6s} "
              f"seed={exp['seed']} {exp['wall_time']}s")
    if report["failed"]:
        print("failed: " + ", ".join(report["failed"]))
        return 1
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(prog="flowldp",
                                 description="suspension-flow large deviation experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd, fn in (("validate", _cmd_validate), ("run", _cmd_run), ("report", _cmd_report)):
        p = sub.add_parser(cmd)
        if cmd != "report":
            p.add_argument("--config", required=True, help="config file path")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--workers", type=int, default=1,
                       help=f"parallel experiments (env {WORKERS_ENV} overrides)")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--experiment", default=None, help="run only this experiment")
        p.set_defaults(fn=fn)
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except FlowLdpError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
