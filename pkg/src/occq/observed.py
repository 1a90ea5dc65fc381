"""Transient laws of an infinite-server queue inspected mid-flight.

The geometric picture: each arrival is a point (arrival time u, service
length v) of a Poisson process on the plane with intensity
lambda(u) g(v). Every first-moment quantity in this module is the mass
of one region of that plane, so a single primitive, ``region_mass``,
backs the expected count present at the observation time, the survival
fraction of the observed cohort, and the expected count contributed by
later arrivals. Closed forms are used where they exist (constant rate
via the stationary-excess cdf; linear trend with Pareto services via
exact algebra); everything else goes through the house quadrature.

Conditional on n individuals being present at tau, the occupancy at
tau + delta is the independent sum of a Binomial(n, p) thinning of the
cohort and a Poisson count of post-tau arrivals; the law object exposes
the exact convolution pmf, together with the high-load Poisson
approximation that collapses both terms into a single mean.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import stats

from . import _linear_pareto as lp
from . import numerics
from .arrivals import Constant, CutRate, Linear
from .distributions import Deterministic, Pareto
from .errors import DegenerateError, DomainError, UnsupportedError

NEG_INF = -math.inf

#: Poisson tail mass discarded when truncating pmf vectors
PMF_TAIL = 1e-12


def _constant_on(rate, a, b):
    """The constant value of the rate on [a, b], or None if not constant."""
    if isinstance(rate, Constant):
        return rate.lam
    if isinstance(rate, Linear) and rate.beta1 == 0.0:
        return rate.beta0
    if isinstance(rate, CutRate):
        # [a, b] is already clipped to the cut support
        return _constant_on(rate.base, a, b)
    return None


def _linear_from_minus_inf(rate):
    """Unwrap cuts down to a Linear rate whose domain reaches -inf."""
    base = rate
    while isinstance(base, CutRate):
        base = base.base
    if isinstance(base, Linear) and math.isinf(base.domain[0]):
        return base
    return None


def region_mass(rate, dist, arrive_lo, arrive_hi, present_at, tol=1e-10):
    """Poisson mean of arrivals in [arrive_lo, arrive_hi] still in
    service at ``present_at``.

    ``arrive_lo`` may be -inf. The window is clipped to the rate's
    support and to ``present_at`` (an arrival cannot be present before
    it occurs).
    """
    lo, hi = rate.support
    a = max(arrive_lo, lo)
    b = min(arrive_hi, hi, present_at)
    if a >= b:
        return 0.0

    lam = _constant_on(rate, a, b)
    if lam is not None:
        if lam == 0.0:
            return 0.0
        if dist.moments().mean.is_finite:
            es = dist.mean()
            return lam * es * (dist.excess_cdf(present_at - a) - dist.excess_cdf(present_at - b))
        if math.isinf(a):
            raise UnsupportedError(
                "infinite-mean service with arrivals from the infinite past"
            )
        # fall through to quadrature over the finite window

    base = _linear_from_minus_inf(rate)
    if base is not None and isinstance(dist, Pareto) and dist.alpha > 2:
        b0, b1 = base.beta0, base.beta1

        def upto(c):
            return lp.alive_mass(b0, b1, dist.alpha, dist.theta, c, present_at - c)

        if math.isinf(a):
            return upto(b)
        return upto(b) - upto(a)

    if math.isinf(a) and not dist.moments().mean.is_finite:
        raise UnsupportedError(
            "infinite-mean service with arrivals from the infinite past"
        )

    # generic route: integrate in w = present_at - u (age at present_at)
    w_lo = present_at - b
    w_hi = math.inf if math.isinf(a) else present_at - a

    def integrand(w):
        return rate.rate_or_zero(present_at - w) * float(dist.ccdf(w))

    return numerics.integrate(integrand, w_lo, w_hi, tol)


def unconditional_mean(rate, dist, t):
    """Mean occupancy at t of a system left to run from the rate's start."""
    return region_mass(rate, dist, NEG_INF, t, t)


def nu_tau(rate, dist, tau):
    """Expected number present at the observation time tau."""
    return region_mass(rate, dist, NEG_INF, tau, tau)


def remaining_survival(rate, dist, tau, x):
    """P(an individual present at tau is still present at tau + x)."""
    if x < 0:
        raise DomainError("x must be non-negative")
    nu = nu_tau(rate, dist, tau)
    if nu <= 0.0:
        raise DegenerateError("no population to condition on (nu_tau = 0)")
    if x == 0:
        return 1.0
    return region_mass(rate, dist, NEG_INF, tau, tau + x) / nu


def new_arrivals_mean(rate, dist, tau, delta):
    """Expected count at tau + delta contributed by arrivals after tau."""
    if delta < 0:
        raise DomainError("delta must be non-negative")
    return region_mass(rate, dist, tau, tau + delta, tau + delta)


def departure_rate(rate, dist, t, tol=1e-10):
    """Instantaneous departure intensity at t: E[lambda(t - S)]."""
    lo, hi = rate.support
    if isinstance(dist, Deterministic):
        return rate.rate_or_zero(t - dist.d)
    u_lo = max(0.0, t - hi)
    u_hi = t - lo  # may be inf

    def integrand(u):
        return rate.rate_or_zero(t - u) * float(dist.pdf(u))

    if u_hi <= u_lo:
        return 0.0
    return numerics.integrate(integrand, u_lo, u_hi, tol)


# ---------------------------------------------------------------------------
# the conditional occupancy law
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionalOccupancyLaw:
    """Law of Q(tau + delta) given Q(tau) = n: Binomial(n, p) + Poisson(m).

    ``p`` is the cohort survival probability over the lead time and
    ``m`` the expected number of post-observation arrivals still
    present. The pmf is the exact convolution, evaluated from truncated
    component pmfs (Poisson tail below 1e-12 discarded), safe for
    populations in the tens of thousands.
    """

    n: int
    p: float
    m: float
    tau: float | None = None
    delta: float | None = None
    class_id: str | None = None

    def __post_init__(self):
        if self.n < 0 or int(self.n) != self.n:
            raise DomainError("n must be a non-negative integer")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError("p must lie in [0, 1]")
        if self.m < 0.0:
            raise DomainError("m must be non-negative")

    @cached_property
    def _pmf_vector(self):
        if self.m > 0.0:
            j_max = int(stats.poisson.isf(PMF_TAIL, self.m)) + 1
            po = stats.poisson.pmf(np.arange(j_max + 1), self.m)
        else:
            po = np.array([1.0])
        bi = stats.binom.pmf(np.arange(self.n + 1), self.n, self.p)
        return np.convolve(bi, po)

    @cached_property
    def _cdf_vector(self):
        return np.cumsum(self._pmf_vector)

    def support_upper(self):
        """Largest count with non-negligible mass."""
        return len(self._pmf_vector) - 1

    def pmf(self, y):
        y = np.asarray(y, dtype=int)
        vec = self._pmf_vector
        idx = np.clip(y, 0, len(vec) - 1)
        out = np.where((y >= 0) & (y < len(vec)), vec[idx], 0.0)
        return out if out.shape else float(out)

    def pmf_vector(self):
        return self._pmf_vector.copy()

    def cdf(self, y):
        y = np.asarray(y, dtype=int)
        vec = self._cdf_vector
        idx = np.clip(y, 0, len(vec) - 1)
        out = np.where(y < 0, 0.0, np.minimum(vec[idx], 1.0))
        out = np.where(y >= len(vec), 1.0, out)
        return out if out.shape else float(out)

    def quantile(self, q):
        if not 0.0 <= q <= 1.0:
            raise DomainError("probability outside [0, 1]")
        return int(np.searchsorted(self._cdf_vector, q, side="left"))

    def mean(self):
        return self.n * self.p + self.m

    def variance(self):
        return self.n * self.p * (1.0 - self.p) + self.m

    def poisson_approx_mean(self):
        """Mean of the high-load Poisson approximation (same first moment)."""
        return self.n * self.p + self.m

    def to_json(self):
        return {
            "n": self.n,
            "p": self.p,
            "m": self.m,
            "tau": self.tau,
            "delta": self.delta,
            "class_id": self.class_id,
        }


def conditional_law(rate, dist, tau, delta, n, class_id=None):
    """Exact law of the occupancy delta ahead of an observation of n."""
    if delta < 0:
        raise DomainError("delta must be non-negative")
    if delta == 0:
        return ConditionalOccupancyLaw(n, 1.0, 0.0, tau, 0.0, class_id)
    p = remaining_survival(rate, dist, tau, delta) if n > 0 else 0.0
    m = new_arrivals_mean(rate, dist, tau, delta)
    return ConditionalOccupancyLaw(n, p, m, tau, delta, class_id)


def poisson_approx_law(rate, dist, tau, delta, n):
    """Mean of the Poisson law approximating the conditional occupancy."""
    return conditional_law(rate, dist, tau, delta, n).poisson_approx_mean()


# ---------------------------------------------------------------------------
# observation records and elapsed-time-informed prediction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassCount:
    """Head count for one class at the observation time, with optional
    recorded elapsed service times."""

    class_id: str
    n: int
    elapsed: tuple | None = None

    def __post_init__(self):
        if self.n < 0 or int(self.n) != self.n:
            raise DomainError("n must be a non-negative integer")
        if self.elapsed is not None:
            elapsed = tuple(float(e) for e in self.elapsed)
            object.__setattr__(self, "elapsed", elapsed)
            if len(elapsed) != self.n:
                raise DomainError("elapsed list must have length n")
            if any(e < 0 for e in elapsed):
                raise DomainError("elapsed times must be non-negative")


@dataclass(frozen=True)
class ObservedState:
    """Observation time and per-class head counts (classes independent)."""

    tau: float
    classes: tuple

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        seen = set()
        for c in self.classes:
            if c.class_id in seen:
                raise DomainError(f"duplicate class_id {c.class_id!r}")
            seen.add(c.class_id)

    def class_count(self, class_id):
        for c in self.classes:
            if c.class_id == class_id:
                return c
        raise DomainError(f"unknown class_id {class_id!r}")


def elapsed_informed_prediction(rate, dist, tau, delta, elapsed):
    """Mean and variance of the occupancy delta ahead, using recorded
    elapsed service times for the observed cohort.

    Each individual with elapsed time y survives the lead time with
    probability ccdf(delta + y) / ccdf(y); post-observation arrivals add
    an independent Poisson term.
    """
    if delta < 0:
        raise DomainError("delta must be non-negative")
    elapsed = np.asarray(elapsed, dtype=float)
    surv = np.array([float(dist.conditional_remaining_ccdf(y, delta)) for y in elapsed])
    m = new_arrivals_mean(rate, dist, tau, delta)
    mean = float(surv.sum()) + m
    variance = float((surv * (1.0 - surv)).sum()) + m
    return mean, variance


def service_switch_mean(rate, old_dist, new_dist, tau, delta):
    """Mean occupancy delta after a service-law switch at tau.

    The pre-switch population (Poisson with mean nu_tau under the old
    law) keeps its old-law remaining times; arrivals after tau draw
    their service from the new law. With no actual switch this reduces
    exactly to the unconditional mean at tau + delta.
    """
    if delta < 0:
        raise DomainError("delta must be non-negative")
    cohort = nu_tau(rate, old_dist, tau)
    if delta == 0:
        return cohort
    survival = remaining_survival(rate, old_dist, tau, delta) if cohort > 0 else 0.0
    return cohort * survival + new_arrivals_mean(rate, new_dist, tau, delta)
