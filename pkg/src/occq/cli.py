"""Command-line front door.

Every run writes its primary artifacts (JSON/CSV) plus a manifest
recording the exact argv, input digests, seed and engine version, so
re-running the recorded argv reproduces the outputs byte for byte.
Randomness always flows from an explicit --seed.

Exit codes: 0 success, 1 domain/model error (message with a remediation
hint on stderr), 2 usage error.
"""

import argparse
import csv
import datetime
import hashlib
import json
import os
import re
import sys

import numpy as np

from . import __version__, horizon, inference, observed, simulate
from .distributions import distribution_from_json, pareto_from_mean
from .errors import ConvergenceError, EngineError
from .observed import ClassCount, ObservedState

_QUARTER_RE = re.compile(r"^(\d{4})-Q([1-4])$")


def worker_cap(default=4):
    """Parallelism cap from OCCQ_THREADS (used by the API worker pool)."""
    raw = os.environ.get("OCCQ_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


def _dump_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise EngineError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}. "
            "Fix the JSON syntax at the indicated position."
        ) from exc


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir, command, argv, inputs, seed, outputs):
    manifest = {
        "command": command,
        "argv": argv,
        "inputs": {p: _sha256(p) for p in inputs},
        "seed": seed,
        "outputs": sorted(outputs),
        "engine_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    _dump_json(os.path.join(out_dir, "manifest.json"), manifest)


def _parse_horizons(text):
    if "," in text:
        hs = [int(x) for x in text.split(",") if x.strip() != ""]
    else:
        q = int(text)
        hs = list(range(1, q + 1))
    if any(h < 0 for h in hs):
        raise EngineError("horizons must be non-negative integers")
    return hs


def _read_quarterly_csv(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["quarter", "class_id", "count"]:
            raise EngineError(
                f"{path}:1: expected header 'quarter,class_id,count'. "
                "Quarters are labelled YYYY-Qn."
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise EngineError(f"{path}:{lineno}: expected 3 columns")
            m = _QUARTER_RE.match(row[0].strip())
            if not m:
                raise EngineError(f"{path}:{lineno}: quarter {row[0]!r} is not YYYY-Qn")
            try:
                count = float(row[2])
            except ValueError as exc:
                raise EngineError(f"{path}:{lineno}: bad count {row[2]!r}") from exc
            year, q = int(m.group(1)), int(m.group(2))
            rows.append((year * 4 + (q - 1), row[1].strip(), count, row[0].strip()))
    if not rows:
        raise EngineError(f"{path}: no data rows")
    return rows


def _single_series(path, class_id=None, provenance="observed"):
    series_list = inference.read_series_csv(path, provenance)
    if class_id is not None:
        for s in series_list:
            if s.class_id == class_id:
                return s
        raise EngineError(f"class_id {class_id!r} not present in {path}")
    if len(series_list) != 1:
        raise EngineError(
            f"{path} holds {len(series_list)} classes; pass --class-id to pick one"
        )
    return series_list[0]


def _write_fan_csv(path, pred, origin):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["horizon", "month", "mean", "sd", "lo", "hi"])
        for h, mu, sd, lo, hi in zip(pred.horizons, pred.mean, pred.sd, pred.lo, pred.hi):
            month = (
                inference.index_to_month(int(pred.tau) + h, origin) if origin else int(pred.tau) + h
            )
            w.writerow([h, month, repr(float(mu)), repr(float(sd)), repr(float(lo)), repr(float(hi))])


def _mcmc_settings(args):
    if args.mcmc:
        return inference.MCMCSettings.from_json({**_load_json(args.mcmc), "seed": args.seed})
    return inference.MCMCSettings(seed=args.seed)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_synthesize(args, argv):
    rows = _read_quarterly_csv(args.quarterly)
    by_class = {}
    for key, class_id, count, label in sorted(rows):
        by_class.setdefault(class_id, []).append((key, count, label))
    series_list = []
    for class_id, entries in sorted(by_class.items()):
        keys = [k for k, _, _ in entries]
        if any(k2 != k1 + 1 for k1, k2 in zip(keys, keys[1:])):
            raise EngineError(f"class {class_id!r}: quarters are not consecutive")
        first_year, first_q = keys[0] // 4, keys[0] % 4
        origin = f"{first_year:04d}-{first_q * 3 + 1:02d}"
        series = inference.synthesize_monthly(
            [(label, c) for _, c, label in entries], args.seed, class_id, origin
        )
        series_list.append(series)
    out = os.path.join(args.out, "monthly.csv")
    inference.write_series_csv(out, series_list)
    _write_manifest(args.out, "synthesize", argv, [args.quarterly], args.seed, [out])
    return 0


def _cmd_fit(args, argv):
    series = _single_series(args.series, args.class_id)
    priors = inference.PriorSpec.from_json(_load_json(args.priors))
    settings = _mcmc_settings(args)
    draws = inference.fit(series, priors, settings)
    post_path = os.path.join(args.out, "posterior.csv")
    diag_path = os.path.join(args.out, "diagnostics.json")
    draws.to_csv(post_path)
    _dump_json(
        diag_path,
        {
            "diagnostics": draws.diagnostics,
            "chains": draws.chains,
            "draws": len(draws),
            "seed": draws.seed,
            "engine_version": __version__,
        },
    )
    inputs = [args.series, args.priors] + ([args.mcmc] if args.mcmc else [])
    _write_manifest(args.out, "fit", argv, inputs, args.seed, [post_path, diag_path])
    return 0


def _observed_state(series):
    tau, n = series.last()
    return ObservedState(tau=float(tau), classes=(ClassCount(series.class_id, n),))


def _cmd_predict(args, argv):
    series = _single_series(args.series, args.class_id)
    draws = inference.PosteriorDraws.from_csv(args.posterior, seed=args.seed)
    horizons = _parse_horizons(args.horizons)
    state = _observed_state(series)
    if args.mode == "short_term":
        if not args.actuals:
            raise EngineError("short_term mode needs --actuals with the realized counts")
        actuals = _single_series(args.actuals, args.class_id)
        priors = inference.PriorSpec.from_json(_load_json(args.priors))
        settings = _mcmc_settings(args)
        pred = inference.predict(
            draws, state, horizons, "short_term",
            refit=(series, priors, settings, actuals),
            horizon_cap=args.horizon_cap,
        )
    else:
        pred = inference.predict(
            draws, state, horizons, "long_term", horizon_cap=args.horizon_cap
        )
    out_csv = os.path.join(args.out, "predictions.csv")
    out_json = os.path.join(args.out, "predictions.json")
    _write_fan_csv(out_csv, pred, series.origin)
    _dump_json(out_json, {**pred.to_json(), "engine_version": __version__, "seed": args.seed})
    inputs = [args.series, args.posterior]
    if args.actuals:
        inputs.append(args.actuals)
    if args.priors:
        inputs.append(args.priors)
    if args.mcmc:
        inputs.append(args.mcmc)
    _write_manifest(args.out, "predict", argv, inputs, args.seed, [out_csv, out_json])
    return 0


def _cmd_scenario(args, argv):
    series = _single_series(args.series, args.class_id)
    draws = inference.PosteriorDraws.from_csv(args.posterior, seed=args.seed)
    horizons = _parse_horizons(args.horizons)
    state = _observed_state(series)
    tau, n_obs = state.tau, state.classes[0].n
    chosen = [x is not None for x in (args.es_new, args.lambda_scale)] + [args.pause]
    if sum(bool(c) for c in chosen) != 1:
        raise EngineError("pick exactly one of --es-new, --lambda-scale, --pause")
    mean, sd = [], []
    for h in horizons:
        if h == 0:
            mean.append(float(n_obs))
            sd.append(0.0)
            continue
        ms = inference._scenario_means(
            draws, n_obs, tau, float(h),
            new_mean_service=args.es_new,
            lambda_scale=0.0 if args.pause else (args.lambda_scale if args.lambda_scale is not None else 1.0),
        )
        mu, sigma = inference._mixture_moments(ms)
        mean.append(mu)
        sd.append(sigma)
    pred = inference.PredictionSeries(
        tau, tuple(horizons), np.array(mean), np.array(sd), "scenario",
        series.class_id, args.seed,
    )
    out_csv = os.path.join(args.out, "scenario.csv")
    out_json = os.path.join(args.out, "scenario.json")
    _write_fan_csv(out_csv, pred, series.origin)
    intervention = (
        {"E_S_new": args.es_new}
        if args.es_new is not None
        else {"pause": True} if args.pause else {"lambda_scale": args.lambda_scale}
    )
    _dump_json(
        out_json,
        {**pred.to_json(), "intervention": intervention,
         "engine_version": __version__, "seed": args.seed},
    )
    _write_manifest(
        args.out, "scenario", argv, [args.series, args.posterior], args.seed,
        [out_csv, out_json],
    )
    return 0


def _recovery_problem(args):
    dist = pareto_from_mean(args.e_s, args.alpha)
    return horizon.RecoveryProblem(lam=args.lam, dist=dist, n=args.n, k=args.k)


def _cmd_recover(args, argv):
    problem = _recovery_problem(args)
    if args.scale_lambda is not None and args.pause_resume is not None:
        raise EngineError("pick at most one of --scale-lambda, --pause-resume")
    result = {
        "nu": problem.nu,
        "n": problem.n,
        "k": problem.k,
        "beta_months": horizon.recovery_time(problem),
        "intervention": None,
        "engine_version": __version__,
        "seed": args.seed,
    }
    if args.scale_lambda is not None:
        result["intervention"] = {
            "scale_lambda": args.scale_lambda,
            "beta_months": horizon.recovery_with_intervention(
                problem, scale_lambda=args.scale_lambda
            ),
        }
    elif args.pause_resume is not None:
        schedule = horizon.recovery_with_intervention(
            problem, pause_then_resume=args.pause_resume
        )
        result["intervention"] = {
            "pause_then_resume": args.pause_resume,
            "schedule": schedule.to_json(),
        }
    out = os.path.join(args.out, "recovery.json")
    _dump_json(out, result)
    _write_manifest(args.out, "recover", argv, [], args.seed, [out])
    return 0


def _cmd_lastdep(args, argv):
    dist = pareto_from_mean(args.e_s, args.alpha)
    law = horizon.LastDepartureLaw.steady_state(args.lam, dist)
    times = [float(x) for x in args.times.split(",")] if args.times else []
    qs = [float(x) for x in args.quantiles.split(",")] if args.quantiles else []
    result = {
        "nu": law.nu,
        "cdf": [{"x": x, "p": law.cdf(x)} for x in times],
        "quantiles": [{"p": q, "x": law.quantile(q)} for q in qs],
        "mean": law.moment(1),
        "engine_version": __version__,
        "seed": args.seed,
    }
    out = os.path.join(args.out, "lastdep.json")
    _dump_json(out, result)
    _write_manifest(args.out, "lastdep", argv, [], args.seed, [out])
    return 0


def _cmd_simulate(args, argv):
    cfg_obj = _load_json(args.config)
    cfg_obj["seed"] = args.seed
    config = simulate.SimConfig.from_json(cfg_obj)
    probes = [float(x) for x in args.probes.split(",")]
    out = simulate.run(config, probes)
    summary = {
        "probe_times": [float(t) for t in out.probe_times],
        "mean": [float(m) for m in out.occupancy.mean(axis=0)],
        "sd": [float(s) for s in out.occupancy.std(axis=0, ddof=1)],
        "last_departure_mean": float(out.last_departure.mean()),
        "replications": config.replications,
        "engine_version": __version__,
        "seed": args.seed,
    }
    outputs = [os.path.join(args.out, "simulation.json")]
    _dump_json(outputs[0], summary)
    if args.paths_csv:
        paths_path = os.path.join(args.out, "paths.csv")
        with open(paths_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["replication"] + [repr(float(t)) for t in out.probe_times])
            for i, row in enumerate(out.occupancy):
                w.writerow([i] + [int(v) for v in row])
        outputs.append(paths_path)
    _write_manifest(args.out, "simulate", argv, [args.config], args.seed, outputs)
    return 0


def _cmd_serve(args, argv):
    import uvicorn

    from .api import build_app

    cfg = _load_json(args.config) if args.config else {}
    app = build_app(cfg)
    uvicorn.run(app, host=cfg.get("host", "127.0.0.1"), port=int(cfg.get("port", 8000)))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="occq",
        description="Occupancy analytics for infinite-server systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("synthesize", help="monthly counts from quarterly totals")
    common(p)
    p.add_argument("--quarterly", required=True, help="CSV: quarter,class_id,count")
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("fit", help="fit the occupancy model by MCMC")
    common(p)
    p.add_argument("--series", required=True, help="CSV: month,class_id,count")
    p.add_argument("--priors", required=True, help="priors JSON")
    p.add_argument("--mcmc", help="MCMC settings JSON")
    p.add_argument("--class-id")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="forecast from a fitted posterior")
    common(p)
    p.add_argument("--series", required=True)
    p.add_argument("--posterior", required=True, help="posterior CSV from fit")
    p.add_argument("--horizons", default="8", help="count q (1..q) or comma list")
    p.add_argument("--mode", choices=["long_term", "short_term"], default="long_term")
    p.add_argument("--actuals", help="realized counts CSV (short_term)")
    p.add_argument("--priors", help="priors JSON (short_term)")
    p.add_argument("--mcmc", help="MCMC settings JSON (short_term)")
    p.add_argument("--class-id")
    p.add_argument("--horizon-cap", type=int, default=inference.DEFAULT_HORIZON_CAP)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("scenario", help="what-if forecast under an intervention")
    common(p)
    p.add_argument("--series", required=True)
    p.add_argument("--posterior", required=True)
    p.add_argument("--horizons", default="8")
    p.add_argument("--es-new", type=float, help="new mean service time (months)")
    p.add_argument("--lambda-scale", type=float, help="arrival-rate factor in [0,1]")
    p.add_argument("--pause", action="store_true", help="pause arrivals entirely")
    p.add_argument("--class-id")
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("recover", help="congestion recovery time")
    common(p)
    p.add_argument("--lam", type=float, required=True, help="arrival rate per month")
    p.add_argument("--e-s", type=float, required=True, help="mean service time")
    p.add_argument("--alpha", type=float, required=True, help="Pareto shape")
    p.add_argument("--n", type=float, required=True, help="congestion level")
    p.add_argument("--k", type=float, help="recovery level (default ceil(nu)+1)")
    p.add_argument("--scale-lambda", type=float)
    p.add_argument("--pause-resume", type=float, help="resume target level j")
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("lastdep", help="last-departure law of a terminated system")
    common(p)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--e-s", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--times", help="comma list of times for cdf values")
    p.add_argument("--quantiles", help="comma list of probabilities")
    p.set_defaults(func=_cmd_lastdep)

    p = sub.add_parser("simulate", help="discrete-event simulation")
    common(p)
    p.add_argument("--config", required=True, help="simulation config JSON")
    p.add_argument("--probes", required=True, help="comma list of probe times")
    p.add_argument("--paths-csv", action="store_true", help="dump per-replication paths")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--config", help="API config JSON")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    out_dir = getattr(args, "out", None)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    try:
        return args.func(args, argv)
    except ConvergenceError as exc:
        print(
            f"occq: sampler did not converge: {exc}. "
            "Increase --mcmc iterations or widen the priors.",
            file=sys.stderr,
        )
        return 1
    except EngineError as exc:
        print(f"occq: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"occq: cannot read or write {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
