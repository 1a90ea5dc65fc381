"""Discrete-event simulation of the infinite-server system.

With infinitely many servers there is no contention, so a replication
is just a merge of an arrival stream and the departure times implied by
each individual's service draw. The simulator supports an initial
cohort (exact size or Poisson, with or without recorded elapsed times)
and a mid-run service-law switch, and is the brute-force oracle behind
the distributional tests of the analytic laws.

Randomness comes from a counter-based generator (Philox) with three
named streams per replication -- cohort, arrivals, services -- so adding
probe times or recording options never perturbs the drawn paths, and
replications can be evaluated in any order (results are keyed by
replication index).
"""

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from . import observed
from .arrivals import Constant, CutRate, rate_from_json, sample_nhpp
from .distributions import distribution_from_json
from .errors import DegenerateError, DomainError

_STREAMS = {"cohort": 0, "arrivals": 1, "services": 2}

STEADY_STATE_POISSON = "steady-state-poisson"


def stream_rng(seed, replication, name):
    """Independent generator for one named stream of one replication."""
    key = np.array(
        [np.uint64(seed % 2**64), np.uint64(replication * 4 + _STREAMS[name])],
        dtype=np.uint64,
    )
    return Generator(Philox(key=key))


@dataclass(frozen=True)
class ServiceSwitch:
    """Arrivals at or after ``at`` draw their service from ``new``."""

    at: float
    new: object

    def to_json(self):
        return {"at": self.at, "new": self.new.to_json()}


@dataclass(frozen=True)
class InitialState:
    """Population present at time zero.

    Either an exact head count ``n`` (optionally with recorded elapsed
    times), or the steady-state prescription: a Poisson number of
    individuals whose remaining times follow the observed
    remaining-service law at time zero.
    """

    n: int | None = None
    elapsed: tuple | None = None
    steady_state_poisson: bool = False

    def __post_init__(self):
        if self.steady_state_poisson:
            if self.n is not None or self.elapsed is not None:
                raise DomainError("steady-state initial state takes no n/elapsed")
            return
        if self.n is None or self.n < 0:
            raise DomainError("initial n must be a non-negative integer")
        if self.elapsed is not None:
            elapsed = tuple(float(e) for e in self.elapsed)
            object.__setattr__(self, "elapsed", elapsed)
            if len(elapsed) != self.n:
                raise DomainError("elapsed list must have length n")
            if any(e < 0 for e in elapsed):
                raise DomainError("elapsed times must be non-negative")

    def to_json(self):
        if self.steady_state_poisson:
            return STEADY_STATE_POISSON
        out = {"n": self.n}
        if self.elapsed is not None:
            out["elapsed"] = list(self.elapsed)
        return out

    @classmethod
    def from_json(cls, obj):
        if obj == STEADY_STATE_POISSON:
            return cls(steady_state_poisson=True)
        if isinstance(obj, dict):
            return cls(n=int(obj["n"]), elapsed=obj.get("elapsed"))
        raise DomainError("initial state must be an object or 'steady-state-poisson'")


@dataclass(frozen=True)
class SimConfig:
    rate: object
    dist: object
    initial: InitialState
    horizon: float
    replications: int
    seed: int
    switch: ServiceSwitch | None = None
    record_departures: bool = False

    def __post_init__(self):
        if not self.horizon > 0:
            raise DomainError("horizon must be positive")
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        if self.switch is not None and not 0 <= self.switch.at:
            raise DomainError("switch time must be non-negative")

    def to_json(self):
        out = {
            "rate": self.rate.to_json(),
            "dist": self.dist.to_json(),
            "initial": self.initial.to_json(),
            "horizon": self.horizon,
            "replications": self.replications,
            "seed": self.seed,
        }
        if self.switch is not None:
            out["switch"] = self.switch.to_json()
        return out

    @classmethod
    def from_json(cls, obj):
        switch = None
        if "switch" in obj and obj["switch"] is not None:
            switch = ServiceSwitch(
                at=float(obj["switch"]["at"]),
                new=distribution_from_json(obj["switch"]["new"]),
            )
        return cls(
            rate=rate_from_json(obj["rate"]),
            dist=distribution_from_json(obj["dist"]),
            initial=InitialState.from_json(obj["initial"]),
            horizon=float(obj["horizon"]),
            replications=int(obj["replications"]),
            seed=int(obj["seed"]),
            switch=switch,
        )


@dataclass
class SimOutput:
    """Per-replication occupancy at the probe times, last-departure
    times, and the conservation ledger (arrivals + initial = departures
    within the horizon + final occupancy)."""

    probe_times: np.ndarray
    occupancy: np.ndarray          # (replications, len(probe_times))
    last_departure: np.ndarray     # (replications,)
    n_initial: np.ndarray
    n_arrivals: np.ndarray
    departures_in_horizon: np.ndarray
    final_occupancy: np.ndarray
    departures: list | None = None  # per-replication arrays when recorded


def _steady_constant(rate):
    """lam if the rate is constant with support reaching the infinite past."""
    if isinstance(rate, Constant):
        return rate.lam
    if isinstance(rate, CutRate) and rate.side == "past" and isinstance(rate.base, Constant):
        return rate.base.lam
    return None


class _CohortSampler:
    """Draws remaining service times for the time-zero population."""

    def __init__(self, rate, dist):
        self.rate = rate
        self.dist = dist
        self.steady = _steady_constant(rate) is not None
        self._nu = None

    @property
    def nu(self):
        if self._nu is None:
            self._nu = observed.nu_tau(self.rate, self.dist, 0.0)
        return self._nu

    def sample_remaining(self, rng, size):
        u = rng.random(size)
        if self.steady:
            return np.asarray(self.dist.excess_quantile(u), dtype=float)
        return self._invert_survival(u)

    def _invert_survival(self, u):
        """Numeric inverse of the remaining-time cdf (bisection to 1e-10)."""
        if self.nu <= 0:
            raise DegenerateError("no population law at time zero (nu = 0)")

        def sf_many(x):
            return np.array(
                [observed.remaining_survival(self.rate, self.dist, 0.0, xi) for xi in x]
            )

        lo = np.zeros_like(u)
        hi = np.ones_like(u)
        target = 1.0 - u
        # expand brackets until the survival falls below every target
        for _ in range(200):
            mask = sf_many(hi) > target
            if not mask.any():
                break
            hi[mask] *= 2.0
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            above = sf_many(mid) > target
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return 0.5 * (lo + hi)


def run(config, probe_times):
    """Simulate the configured system, sampling occupancy at the probes."""
    probes = np.asarray(probe_times, dtype=float)
    if np.any(probes < 0) or np.any(probes > config.horizon):
        raise DomainError("probe times must lie in [0, horizon]")

    cohort = _CohortSampler(config.rate, config.dist)
    R = config.replications
    occupancy = np.empty((R, len(probes)), dtype=np.int64)
    last_departure = np.empty(R)
    n_initial = np.empty(R, dtype=np.int64)
    n_arrivals = np.empty(R, dtype=np.int64)
    deps_in_h = np.empty(R, dtype=np.int64)
    final_occ = np.empty(R, dtype=np.int64)
    dep_record = [] if config.record_departures else None

    init = config.initial
    for rep in range(R):
        crng = stream_rng(config.seed, rep, "cohort")
        if init.steady_state_poisson:
            n0 = int(crng.poisson(cohort.nu))
            remaining = cohort.sample_remaining(crng, n0)
        elif init.elapsed is not None:
            n0 = init.n
            y = np.asarray(init.elapsed, dtype=float)
            u = crng.random(n0)
            surv_at_y = np.asarray(config.dist.ccdf(y), dtype=float)
            if np.any(surv_at_y <= 0):
                raise DegenerateError("elapsed time with zero survival")
            remaining = (
                np.asarray(config.dist.quantile(1.0 - (1.0 - u) * surv_at_y)) - y
            )
        else:
            n0 = init.n
            remaining = cohort.sample_remaining(crng, n0) if n0 > 0 else np.empty(0)

        arng = stream_rng(config.seed, rep, "arrivals")
        arrivals = sample_nhpp(config.rate, (0.0, config.horizon), arng)

        srng = stream_rng(config.seed, rep, "services")
        u = srng.random(len(arrivals))
        if config.switch is not None:
            is_new = arrivals >= config.switch.at
            services = np.where(
                is_new,
                np.asarray(config.switch.new.quantile(u), dtype=float),
                np.asarray(config.dist.quantile(u), dtype=float),
            )
        else:
            services = np.asarray(config.dist.quantile(u), dtype=float)

        departures = np.sort(np.concatenate([remaining, arrivals + services]))
        arr_sorted = arrivals  # sample_nhpp returns sorted times

        occupancy[rep] = (
            np.searchsorted(arr_sorted, probes, side="right")
            + n0
            - np.searchsorted(departures, probes, side="right")
        )
        last_departure[rep] = departures[-1] if len(departures) else 0.0
        n_initial[rep] = n0
        n_arrivals[rep] = len(arrivals)
        deps_in_h[rep] = np.searchsorted(departures, config.horizon, side="right")
        final_occ[rep] = n0 + len(arrivals) - deps_in_h[rep]
        if dep_record is not None:
            dep_record.append(departures)

    return SimOutput(
        probe_times=probes,
        occupancy=occupancy,
        last_departure=last_departure,
        n_initial=n_initial,
        n_arrivals=n_arrivals,
        departures_in_horizon=deps_in_h,
        final_occupancy=final_occ,
        departures=dep_record,
    )


@dataclass(frozen=True)
class Histogram:
    """Normalized frequency table of occupancy counts at one probe time."""

    counts: np.ndarray   # counts[i] = #replications with occupancy i
    replications: int

    @property
    def freq(self):
        return self.counts / self.replications

    def total_mass(self):
        return float(self.freq.sum())


def empirical_law(output, probe_time):
    """Histogram of the occupancy at a requested probe time."""
    matches = np.nonzero(np.isclose(output.probe_times, probe_time))[0]
    if len(matches) == 0:
        raise DomainError(f"probe time {probe_time} was not requested")
    col = output.occupancy[:, matches[0]]
    counts = np.bincount(col)
    return Histogram(counts=counts, replications=len(col))
