"""Thin stateless-per-request HTTP layer over the engine.

Uploaded series and fitted posteriors live in bounded in-process LRU
stores (ephemeral by design); fits run on a small worker pool off the
request path, so POST /fit returns a job handle immediately and clients
poll. Every response carries the engine version and the seed that
produced its numbers, making identical requests byte-identical.

Status codes: 400 malformed payload, 404 unknown id, 409 fit not (yet)
converged, 422 infeasible model parameters, 503 worker queue full.
"""

import threading
import uuid
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, model_validator

from . import __version__, horizon, inference
from .cli import worker_cap
from .distributions import pareto_from_mean
from .errors import ConvergenceError, EngineError
from .observed import ClassCount, ObservedState


class SessionStore:
    """Bounded LRU map; stored values are immutable once inserted."""

    def __init__(self, capacity=64):
        self.capacity = capacity
        self._lock = threading.Lock()
        self._data = OrderedDict()

    def put(self, key, value):
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.capacity:
                self._data.popitem(last=False)

    def get(self, key):
        with self._lock:
            if key not in self._data:
                return None
            self._data.move_to_end(key)
            return self._data[key]


# ---------------------------------------------------------------------------
# payload schemas
# ---------------------------------------------------------------------------

class MonthCount(BaseModel):
    month: str
    count: int = Field(ge=0)


class QuarterCount(BaseModel):
    quarter: str
    count: float = Field(ge=0)


class SeriesPayload(BaseModel):
    class_id: str = "series"
    months: list[MonthCount] | None = None
    quarterly: list[QuarterCount] | None = None
    seed: int = 0

    @model_validator(mode="after")
    def _one_source(self):
        if (self.months is None) == (self.quarterly is None):
            raise ValueError("provide exactly one of months, quarterly")
        return self


class PriorsPayload(BaseModel):
    beta0: tuple[float, float]
    beta1: tuple[float, float]
    mean_service: float = Field(gt=0)
    alpha: tuple[float, float] = (inference.ALPHA_LO_DEFAULT, inference.ALPHA_HI_DEFAULT)

    def to_spec(self):
        return inference.PriorSpec(
            beta0=self.beta0,
            beta1=self.beta1,
            mean_service=self.mean_service,
            alpha_lo=self.alpha[0],
            alpha_hi=self.alpha[1],
        )


class McmcPayload(BaseModel):
    chains: int = 2
    iterations: int = 10_000
    warmup: int | None = None
    seed: int = 0

    def to_settings(self):
        return inference.MCMCSettings(
            chains=self.chains, iterations=self.iterations, warmup=self.warmup, seed=self.seed
        )


class FitRequest(BaseModel):
    series_id: str
    priors: PriorsPayload
    mcmc: McmcPayload = McmcPayload()


class PredictRequest(BaseModel):
    session_id: str
    horizons: list[int]
    mode: str = "long_term"
    actuals: list[MonthCount] | None = None
    horizon_cap: int = inference.DEFAULT_HORIZON_CAP


class SwitchPayload(BaseModel):
    E_S_new: float = Field(gt=0)


class ScenarioRequest(BaseModel):
    session_id: str
    horizons: list[int]
    switch: SwitchPayload | None = None
    lambda_scale: float | None = Field(default=None, ge=0, le=1)
    pause: bool = False

    @model_validator(mode="after")
    def _one_intervention(self):
        picked = sum([self.switch is not None, self.lambda_scale is not None, self.pause])
        if picked != 1:
            raise ValueError("pick exactly one of switch, lambda_scale, pause")
        return self


class InterventionPayload(BaseModel):
    scale_lambda: float | None = Field(default=None, ge=0, le=1)
    pause_then_resume: float | None = None


class RecoverRequest(BaseModel):
    lam: float = Field(gt=0)
    E_S: float = Field(gt=0)
    alpha: float
    n: float
    k: float | None = None
    intervention: InterventionPayload | None = None


# ---------------------------------------------------------------------------
# app factory
# ---------------------------------------------------------------------------

def _versioned(body, seed=None):
    return {**body, "engine_version": __version__, "seed": seed}


def build_app(config=None):
    config = config or {}
    app = FastAPI(title="occq", version=__version__)
    origins = config.get("cors_origins", ["*"])
    app.add_middleware(
        CORSMiddleware, allow_origins=origins, allow_methods=["*"], allow_headers=["*"]
    )

    series_store = SessionStore(capacity=int(config.get("capacity", 64)))
    fit_store = SessionStore(capacity=int(config.get("capacity", 64)))
    workers = int(config.get("workers", worker_cap()))
    executor = ThreadPoolExecutor(max_workers=workers)
    max_pending = int(config.get("max_pending", 4 * workers))
    pending = {"n": 0}
    pending_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def bad_payload(request: Request, exc: RequestValidationError):
        errors = [
            {"loc": list(e.get("loc", ())), "msg": str(e.get("msg", "")),
             "type": str(e.get("type", ""))}
            for e in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": errors})

    @app.exception_handler(EngineError)
    async def engine_error(request: Request, exc: EngineError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    def _err(code, detail):
        return JSONResponse(status_code=code, content={"detail": detail})

    @app.get("/health")
    def health():
        return _versioned({"status": "ok"})

    @app.post("/series")
    def post_series(payload: SeriesPayload):
        if payload.months is not None:
            months = sorted(payload.months, key=lambda m: m.month)
            origin = months[0].month
            series = inference.CountSeries(
                payload.class_id,
                tuple(
                    (inference.month_to_index(m.month, origin), m.count) for m in months
                ),
                provenance="observed",
                origin=origin,
            )
        else:
            series = inference.synthesize_monthly(
                [(q.quarter, q.count) for q in payload.quarterly],
                payload.seed,
                payload.class_id,
            )
        series_id = uuid.uuid4().hex
        series_store.put(series_id, series)
        return _versioned(
            {
                "series_id": series_id,
                "class_id": series.class_id,
                "months": [[t, n] for t, n in series.months],
                "provenance": series.provenance,
            },
            seed=payload.seed,
        )

    def _run_fit(session_id, series, priors, settings):
        try:
            draws = inference.fit(series, priors, settings)
            fit_store.put(
                session_id,
                {"status": "done", "draws": draws, "series": series,
                 "priors": priors, "diagnostics": draws.diagnostics},
            )
        except ConvergenceError as exc:
            fit_store.put(
                session_id,
                {"status": "failed", "detail": str(exc), "diagnostics": exc.diagnostics},
            )
        except Exception as exc:  # surface anything else to the poller
            fit_store.put(session_id, {"status": "failed", "detail": str(exc)})
        finally:
            with pending_lock:
                pending["n"] -= 1

    @app.post("/fit", status_code=202)
    def post_fit(payload: FitRequest):
        series = series_store.get(payload.series_id)
        if series is None:
            return _err(404, f"unknown series {payload.series_id}")
        with pending_lock:
            if pending["n"] >= max_pending:
                return _err(503, "fit queue is full; retry later")
            pending["n"] += 1
        session_id = uuid.uuid4().hex
        fit_store.put(session_id, {"status": "running"})
        executor.submit(
            _run_fit, session_id, series, payload.priors.to_spec(),
            payload.mcmc.to_settings(),
        )
        return _versioned(
            {"session_id": session_id, "status": "running"}, seed=payload.mcmc.seed
        )

    def _session_or_error(session_id):
        entry = fit_store.get(session_id)
        if entry is None:
            return None, _err(404, f"unknown session {session_id}")
        if entry["status"] != "done":
            return None, _err(
                409, f"fit {session_id} is {entry['status']}; wait for convergence"
            )
        return entry, None

    @app.get("/fit/{session_id}")
    def get_fit(session_id: str):
        entry = fit_store.get(session_id)
        if entry is None:
            return _err(404, f"unknown session {session_id}")
        body = {"session_id": session_id, "status": entry["status"]}
        if "diagnostics" in entry and entry["diagnostics"]:
            body["diagnostics"] = entry["diagnostics"]
        if "detail" in entry:
            body["detail"] = entry["detail"]
        seed = entry["draws"].seed if entry["status"] == "done" else None
        return _versioned(body, seed=seed)

    @app.get("/fit/{session_id}/posterior")
    def get_posterior(session_id: str):
        entry, err = _session_or_error(session_id)
        if err is not None:
            return err
        draws = entry["draws"]
        return _versioned(
            {
                "session_id": session_id,
                "columns": ["beta0", "beta1", "alpha", "theta"],
                "draws": draws.param_matrix().tolist(),
                "diagnostics": draws.diagnostics,
            },
            seed=draws.seed,
        )

    @app.post("/predict")
    def post_predict(payload: PredictRequest):
        entry, err = _session_or_error(payload.session_id)
        if err is not None:
            return err
        draws, series = entry["draws"], entry["series"]
        tau, n = series.last()
        state = ObservedState(tau=float(tau), classes=(ClassCount(series.class_id, n),))
        if payload.mode == "short_term":
            if payload.actuals is None:
                raise EngineError("short_term mode needs realized counts in 'actuals'")
            origin = series.origin or "2000-01"
            actuals = inference.CountSeries(
                series.class_id,
                tuple(
                    sorted(
                        (inference.month_to_index(m.month, origin), m.count)
                        for m in payload.actuals
                    )
                ),
                origin=origin,
            )
            pred = inference.predict(
                draws, state, payload.horizons, "short_term",
                refit=(series, entry["priors"], inference.MCMCSettings(seed=draws.seed), actuals),
                horizon_cap=payload.horizon_cap,
            )
        else:
            pred = inference.predict(
                draws, state, payload.horizons, payload.mode, horizon_cap=payload.horizon_cap
            )
        return _versioned(pred.to_json(), seed=draws.seed)

    @app.post("/scenario")
    def post_scenario(payload: ScenarioRequest):
        entry, err = _session_or_error(payload.session_id)
        if err is not None:
            return err
        draws, series = entry["draws"], entry["series"]
        tau, n_obs = series.last()
        mean, sd = [], []
        for h in payload.horizons:
            if h < 0:
                raise EngineError("horizons must be non-negative")
            if h == 0:
                mean.append(float(n_obs))
                sd.append(0.0)
                continue
            ms = inference._scenario_means(
                draws, n_obs, float(tau), float(h),
                new_mean_service=payload.switch.E_S_new if payload.switch else None,
                lambda_scale=0.0 if payload.pause else (
                    payload.lambda_scale if payload.lambda_scale is not None else 1.0
                ),
            )
            mu, sigma = inference._mixture_moments(ms)
            mean.append(mu)
            sd.append(sigma)
        pred = inference.PredictionSeries(
            float(tau), tuple(payload.horizons), np.array(mean), np.array(sd),
            "scenario", series.class_id, draws.seed,
        )
        intervention = (
            {"E_S_new": payload.switch.E_S_new}
            if payload.switch
            else {"pause": True} if payload.pause
            else {"lambda_scale": payload.lambda_scale}
        )
        return _versioned(
            {**pred.to_json(), "intervention": intervention}, seed=draws.seed
        )

    @app.post("/recover")
    def post_recover(payload: RecoverRequest):
        dist = pareto_from_mean(payload.E_S, payload.alpha)
        problem = horizon.RecoveryProblem(
            lam=payload.lam, dist=dist, n=payload.n, k=payload.k
        )
        body = {
            "nu": problem.nu,
            "n": problem.n,
            "k": problem.k,
            "beta_months": horizon.recovery_time(problem),
            "intervention": None,
        }
        iv = payload.intervention
        if iv is not None and iv.scale_lambda is not None:
            body["intervention"] = {
                "scale_lambda": iv.scale_lambda,
                "beta_months": horizon.recovery_with_intervention(
                    problem, scale_lambda=iv.scale_lambda
                ),
            }
        elif iv is not None and iv.pause_then_resume is not None:
            schedule = horizon.recovery_with_intervention(
                problem, pause_then_resume=iv.pause_then_resume
            )
            body["intervention"] = {
                "pause_then_resume": iv.pause_then_resume,
                "schedule": schedule.to_json(),
            }
        return _versioned(body)

    return app


app = build_app()
