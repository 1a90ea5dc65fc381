"""Deterministic arrival-rate functions, their integrals, and NHPP sampling.

A rate object carries a support: the time window on which the arrival
process exists. Evaluating the rate outside its support is a domain
error (a linear trend is not silently clamped to zero where it would go
negative; the caller must declare the window on which the model is
trusted). Integrals and the queueing integrands instead treat times
outside the support as contributing no arrivals, which is what cutting
and finite observation windows mean physically.

Cut operators split a rate at an observation time tau into the past
process (arrivals strictly before tau) and the future process (arrivals
from tau on); the two reconstruct the base pointwise.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedError

NEG_INF = -math.inf
POS_INF = math.inf


class ArrivalRate:
    """Common surface of a deterministic rate function lambda(t)."""

    kind = "abstract"

    @property
    def support(self):
        """(lo, hi) window on which the arrival process exists."""
        raise NotImplementedError

    def rate(self, t):
        """Pointwise intensity; domain error outside the support."""
        raise NotImplementedError

    def rate_or_zero(self, t):
        """Intensity with zero outside the support (integrand form)."""
        lo, hi = self.support
        if t < lo or t > hi:
            return 0.0
        return self.rate(t)

    def rate_or_zero_many(self, ts):
        """Vectorized ``rate_or_zero`` over a numpy array of times."""
        ts = np.asarray(ts, dtype=float)
        lo, hi = self.support
        inside = (ts >= lo) & (ts <= hi)
        out = np.zeros_like(ts)
        if np.any(inside):
            out[inside] = self._rate_values(ts[inside])
        return out

    def _rate_values(self, ts):
        """Rate at times known to lie inside the support."""
        raise NotImplementedError

    def integral(self, a, b):
        """Exact integral of the rate over [a, b] clipped to the support."""
        if a > b:
            raise DomainError("integral requires a <= b")
        lo, hi = self.support
        a, b = max(a, lo), min(b, hi)
        if a >= b:
            return 0.0
        return self._integral_inside(a, b)

    def _integral_inside(self, a, b):
        raise NotImplementedError

    def max_rate(self, a, b):
        """Supremum of the rate on [a, b] (clipped to the support)."""
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


def _require_in(t, lo, hi):
    if t < lo or t > hi:
        raise DomainError(f"t={t} outside the declared domain [{lo}, {hi}]")


@dataclass(frozen=True)
class Constant(ArrivalRate):
    """Constant rate on the whole line (the steady-state constructor)."""

    lam: float
    kind = "constant"

    def __post_init__(self):
        if self.lam < 0:
            raise DomainError("rate must be non-negative")

    @property
    def support(self):
        return (NEG_INF, POS_INF)

    def rate(self, t):
        return self.lam

    def _rate_values(self, ts):
        return np.full_like(ts, self.lam)

    def _integral_inside(self, a, b):
        return self.lam * (b - a)

    def max_rate(self, a, b):
        return self.lam

    def to_json(self):
        return {"kind": "constant", "lam": self.lam}


@dataclass(frozen=True)
class Linear(ArrivalRate):
    """Trend rate beta0 + beta1 * t on an explicit domain.

    The domain may extend to +/- infinity only where the sign of beta1
    keeps the rate non-negative; construction rejects any domain on
    which the line dips below zero.
    """

    beta0: float
    beta1: float
    domain: tuple = (0.0, POS_INF)
    kind = "linear"

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise DomainError("domain must satisfy t_lo < t_hi")
        for edge in (lo, hi):
            if math.isinf(edge):
                # the line stays non-negative toward an infinite edge only
                # if it is non-decreasing toward that edge
                going_up = self.beta1 <= 0 if edge < 0 else self.beta1 >= 0
                if not going_up:
                    raise DomainError("rate goes negative inside the declared domain")
            elif self.beta0 + self.beta1 * edge < 0:
                raise DomainError("rate goes negative inside the declared domain")
        if math.isinf(lo) and math.isinf(hi) and self.beta0 < 0:
            raise DomainError("rate goes negative inside the declared domain")

    @property
    def support(self):
        return self.domain

    def rate(self, t):
        _require_in(t, *self.domain)
        return self.beta0 + self.beta1 * t

    def _rate_values(self, ts):
        return self.beta0 + self.beta1 * ts

    def _integral_inside(self, a, b):
        return self.beta0 * (b - a) + 0.5 * self.beta1 * (b * b - a * a)

    def max_rate(self, a, b):
        lo, hi = self.support
        a, b = max(a, lo), min(b, hi)
        if a > b:
            return 0.0
        if self.beta1 == 0:
            return self.beta0
        if math.isinf(a) or math.isinf(b):
            raise UnsupportedError("rate unbounded on an infinite window")
        return max(self.beta0 + self.beta1 * a, self.beta0 + self.beta1 * b)

    def to_json(self):
        lo, hi = self.domain
        return {
            "kind": "linear",
            "beta0": self.beta0,
            "beta1": self.beta1,
            # infinite edges encode as null (JSON has no Infinity literal)
            "domain": [None if math.isinf(lo) else lo, None if math.isinf(hi) else hi],
        }


@dataclass(frozen=True)
class PiecewiseLinear(ArrivalRate):
    """Linear interpolation through ordered (t, rate) knots."""

    knots: tuple
    kind = "piecewise"

    def __post_init__(self):
        knots = tuple((float(t), float(r)) for t, r in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) < 2:
            raise DomainError("need at least two knots")
        ts = [t for t, _ in knots]
        if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
            raise DomainError("knot times must be strictly increasing")
        if any(r < 0 for _, r in knots):
            raise DomainError("rate must be non-negative at every knot")

    @property
    def support(self):
        return (self.knots[0][0], self.knots[-1][0])

    def rate(self, t):
        _require_in(t, *self.support)
        ts = np.array([k[0] for k in self.knots])
        rs = np.array([k[1] for k in self.knots])
        return float(np.interp(t, ts, rs))

    def _rate_values(self, ts_in):
        ts = np.array([k[0] for k in self.knots])
        rs = np.array([k[1] for k in self.knots])
        return np.interp(ts_in, ts, rs)

    def _integral_inside(self, a, b):
        ts = np.array([k[0] for k in self.knots])
        rs = np.array([k[1] for k in self.knots])
        grid = np.unique(np.concatenate([[a, b], ts[(ts > a) & (ts < b)]]))
        vals = np.interp(grid, ts, rs)
        return float(np.trapezoid(vals, grid))

    def max_rate(self, a, b):
        lo, hi = self.support
        a, b = max(a, lo), min(b, hi)
        if a > b:
            return 0.0
        ts = np.array([k[0] for k in self.knots])
        rs = np.array([k[1] for k in self.knots])
        inner = rs[(ts >= a) & (ts <= b)]
        edges = [np.interp(a, ts, rs), np.interp(b, ts, rs)]
        return float(max(edges + list(inner)))

    def to_json(self):
        return {"kind": "piecewise", "knots": [[t, r] for t, r in self.knots]}


PAST = "past"
FUTURE = "future"


@dataclass(frozen=True)
class CutRate(ArrivalRate):
    """A rate cut at tau: the past side lives on (-inf, tau), the future
    side on [tau, inf). past + future reconstruct the base pointwise."""

    base: ArrivalRate
    cut_at: float
    side: str
    kind = "cut"

    def __post_init__(self):
        if self.side not in (PAST, FUTURE):
            raise DomainError("side must be 'past' or 'future'")

    @property
    def support(self):
        lo, hi = self.base.support
        if self.side == PAST:
            return (lo, min(hi, self.cut_at))
        return (max(lo, self.cut_at), hi)

    def _alive(self, t):
        return t < self.cut_at if self.side == PAST else t >= self.cut_at

    def rate(self, t):
        if not self._alive(t):
            return 0.0
        return self.base.rate(t)

    def rate_or_zero(self, t):
        if not self._alive(t):
            return 0.0
        return self.base.rate_or_zero(t)

    def rate_or_zero_many(self, ts):
        ts = np.asarray(ts, dtype=float)
        alive = ts < self.cut_at if self.side == PAST else ts >= self.cut_at
        out = np.zeros_like(ts)
        if np.any(alive):
            out[alive] = self.base.rate_or_zero_many(ts[alive])
        return out

    def integral(self, a, b):
        if a > b:
            raise DomainError("integral requires a <= b")
        if self.side == PAST:
            a, b = a, min(b, self.cut_at)
        else:
            a, b = max(a, self.cut_at), b
        if a >= b:
            return 0.0
        return self.base.integral(a, b)

    def _integral_inside(self, a, b):  # pragma: no cover - integral() overridden
        return self.base.integral(a, b)

    def max_rate(self, a, b):
        if self.side == PAST:
            b = min(b, self.cut_at)
        else:
            a = max(a, self.cut_at)
        if a > b:
            return 0.0
        return self.base.max_rate(a, b)

    def to_json(self):
        return {
            "kind": "cut",
            "base": self.base.to_json(),
            "cut_at": self.cut_at,
            "side": self.side,
        }


def cut(base, tau):
    """Split a rate into its (past, future) processes at tau."""
    return CutRate(base, tau, PAST), CutRate(base, tau, FUTURE)


def started_at(lam, t0):
    """Constant rate switched on at t0 (empty system before then)."""
    return CutRate(Constant(lam), t0, FUTURE)


def sample_nhpp(rate, window, rng):
    """Arrival times of an NHPP on [a, b], by thinning against the supremum.

    ``rng`` is a seeded numpy Generator (or an int seed). The count in any
    subinterval is Poisson with mean ``rate.integral`` over it; given the
    seed the draw is reproducible.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    a, b = window
    if a > b:
        raise DomainError("window must satisfy a <= b")
    lo, hi = rate.support
    a, b = max(a, lo), min(b, hi)
    if a >= b:
        return np.empty(0)
    if math.isinf(a) or math.isinf(b):
        raise UnsupportedError("cannot sample on an unbounded window")
    sup = rate.max_rate(a, b)
    if sup <= 0.0:
        return np.empty(0)
    if math.isinf(sup):
        raise UnsupportedError("rate unbounded on the window")
    n = rng.poisson(sup * (b - a))
    times = np.sort(rng.uniform(a, b, size=n))
    if n == 0:
        return times
    vals = rate.rate_or_zero_many(times)
    keep = rng.uniform(0.0, sup, size=n) < vals
    return times[keep]


_RATE_KINDS = {"constant", "linear", "piecewise", "cut"}


def rate_from_json(obj):
    """Parse the tagged JSON encoding of an arrival rate."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise DomainError("rate JSON must be an object with a 'kind' tag")
    kind = obj["kind"]
    if kind == "constant":
        return Constant(lam=float(obj["lam"]))
    if kind == "linear":
        lo, hi = obj.get("domain", [0.0, None])
        lo = NEG_INF if lo is None else float(lo)
        hi = POS_INF if hi is None else float(hi)
        return Linear(beta0=float(obj["beta0"]), beta1=float(obj["beta1"]), domain=(lo, hi))
    if kind == "started_at":
        return started_at(float(obj["lam"]), float(obj["t0"]))
    if kind == "piecewise":
        return PiecewiseLinear(knots=tuple((t, r) for t, r in obj["knots"]))
    if kind == "cut":
        return CutRate(rate_from_json(obj["base"]), float(obj["cut_at"]), obj["side"])
    raise DomainError(f"unknown rate kind {kind!r}")
