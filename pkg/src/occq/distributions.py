"""Service-time laws and their transforms.

Three kinds are supported: Pareto (the heavy-tailed law used in the
application path), Exponential and Deterministic (analytic oracles for
memorylessness and uniform-excess properties). Every object is immutable
and every operation is pure, so values can be shared freely across
threads. All times are in months.

Moments that do not exist are reported as tagged values rather than
raised or silently returned as NaN: a Pareto mean is infinite for
shape <= 1, its variance is infinite for 1 < shape <= 2 and undefined
below that. Callers that need a number call ``MomentValue.unwrap()``.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import DegenerateError, DomainError, UnsupportedError

FINITE = "finite"
INFINITE = "infinite"
UNDEFINED = "undefined"


@dataclass(frozen=True)
class MomentValue:
    """A moment together with its existence tag."""

    tag: str
    value: float | None = None

    @classmethod
    def finite(cls, value):
        return cls(FINITE, float(value))

    @classmethod
    def infinite(cls):
        return cls(INFINITE)

    @classmethod
    def undefined(cls):
        return cls(UNDEFINED)

    @property
    def is_finite(self):
        return self.tag == FINITE

    def unwrap(self):
        """Return the numeric value, or raise if the moment does not exist."""
        if self.tag != FINITE:
            raise UnsupportedError(f"moment is {self.tag}")
        return self.value


@dataclass(frozen=True)
class Moments:
    mean: MomentValue
    variance: MomentValue
    scv: MomentValue


def _check_nonneg(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise DomainError(f"{name} must be non-negative")
    return arr


class ServiceDistribution:
    """Common surface of a service-time law G."""

    kind = "abstract"

    # subclasses implement: ccdf, pdf, quantile, moments, excess_ccdf,
    # excess_quantile, excess_mean
    def ccdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        return 1.0 - self.ccdf(x)

    def pdf(self, x):
        raise NotImplementedError

    def quantile(self, q):
        raise NotImplementedError

    def moments(self) -> Moments:
        raise NotImplementedError

    def mean(self):
        """Finite mean, or raise UnsupportedError."""
        return self.moments().mean.unwrap()

    # -- stationary-excess transform ------------------------------------
    def excess_ccdf(self, t):
        """Survival of the stationary excess: (1/E[S]) * int_t^inf ccdf."""
        raise NotImplementedError

    def excess_cdf(self, t):
        return 1.0 - self.excess_ccdf(t)

    def excess_quantile(self, q):
        raise NotImplementedError

    def excess_mean(self):
        raise NotImplementedError

    def excess_ccdf_quadrature(self, t, tol=1e-12):
        """Excess survival by adaptive quadrature of the defining integral.

        Kept as an internal cross-check route; the closed forms are the
        production path.
        """
        m = self.mean()
        return numerics.integrate(lambda u: self.ccdf(u), float(t), math.inf, tol) / m

    # -- elapsed-time conditioning ---------------------------------------
    def conditional_remaining_ccdf(self, elapsed, t):
        """P(S > elapsed + t | S > elapsed) = ccdf(t + elapsed) / ccdf(elapsed)."""
        elapsed = float(elapsed)
        if elapsed < 0:
            raise DomainError("elapsed time must be non-negative")
        _check_nonneg(t, "t")
        denom = float(self.ccdf(elapsed))
        if denom <= 0.0:
            raise DegenerateError("zero survival at the conditioning point")
        return self.ccdf(np.asarray(t, dtype=float) + elapsed) / denom

    def conditional_remaining_quantile(self, elapsed, q):
        """Inverse of the elapsed-conditioned remaining-time cdf."""
        elapsed = float(elapsed)
        denom = float(self.ccdf(elapsed))
        if denom <= 0.0:
            raise DegenerateError("zero survival at the conditioning point")
        q = np.asarray(q, dtype=float)
        return self.quantile(1.0 - (1.0 - q) * denom) - elapsed

    # -- sampling ----------------------------------------------------------
    def sample(self, rng, size=None):
        return self.quantile(rng.random(size))

    def sample_excess(self, rng, size=None):
        return self.excess_quantile(rng.random(size))

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Pareto(ServiceDistribution):
    """Shifted Pareto law: ccdf(x) = (theta / (x + theta))^alpha for x >= 0.

    theta is the shift (scale) in months, alpha the tail shape. The tail
    decays as a power, so moments exist only above the corresponding
    alpha thresholds.
    """

    theta: float
    alpha: float
    kind = "pareto"

    def __post_init__(self):
        if not (self.theta > 0 and self.alpha > 0):
            raise DomainError("Pareto requires theta > 0 and alpha > 0")

    def ccdf(self, x):
        x = _check_nonneg(x, "x")
        out = (self.theta / (x + self.theta)) ** self.alpha
        return out if out.shape else float(out)

    def pdf(self, x):
        x = _check_nonneg(x, "x")
        out = self.alpha * self.theta**self.alpha * (x + self.theta) ** (-self.alpha - 1.0)
        return out if out.shape else float(out)

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q < 0) | (q > 1)):
            raise DomainError("probability outside [0, 1]")
        out = self.theta * ((1.0 - q) ** (-1.0 / self.alpha) - 1.0)
        return out if out.shape else float(out)

    def moments(self):
        th, al = self.theta, self.alpha
        if al <= 1:
            mean = MomentValue.infinite()
        else:
            mean = MomentValue.finite(th / (al - 1))
        if al > 2:
            var = MomentValue.finite(th * th * al / ((al - 1) ** 2 * (al - 2)))
            scv = MomentValue.finite(al / (al - 2))
        elif al > 1:
            var = MomentValue.infinite()
            scv = MomentValue.infinite()
        else:
            var = MomentValue.undefined()
            scv = MomentValue.undefined()
        return Moments(mean, var, scv)

    def excess_ccdf(self, t):
        if self.alpha <= 1:
            raise UnsupportedError("excess undefined for infinite-mean Pareto")
        t = _check_nonneg(t, "t")
        out = self.theta ** (self.alpha - 1.0) * (t + self.theta) ** (1.0 - self.alpha)
        return out if out.shape else float(out)

    def excess_quantile(self, q):
        if self.alpha <= 1:
            raise UnsupportedError("excess undefined for infinite-mean Pareto")
        q = np.asarray(q, dtype=float)
        out = self.theta * ((1.0 - q) ** (-1.0 / (self.alpha - 1.0)) - 1.0)
        return out if out.shape else float(out)

    def excess_mean(self):
        if self.alpha <= 2:
            raise UnsupportedError("excess mean requires finite variance (alpha > 2)")
        return self.theta / (self.alpha - 2.0)

    def to_json(self):
        return {"kind": "pareto", "theta": self.theta, "alpha": self.alpha}


def pareto_from_mean(mean_service, alpha):
    """Pareto with a prescribed mean: theta = mean * (alpha - 1)."""
    if alpha <= 1:
        raise DomainError("a Pareto mean exists only for alpha > 1")
    return Pareto(theta=mean_service * (alpha - 1.0), alpha=alpha)


@dataclass(frozen=True)
class Exponential(ServiceDistribution):
    """Memoryless law with the given rate (1/months)."""

    rate: float
    kind = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError("Exponential requires rate > 0")

    def ccdf(self, x):
        x = _check_nonneg(x, "x")
        out = np.exp(-self.rate * x)
        return out if out.shape else float(out)

    def pdf(self, x):
        x = _check_nonneg(x, "x")
        out = self.rate * np.exp(-self.rate * x)
        return out if out.shape else float(out)

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q < 0) | (q > 1)):
            raise DomainError("probability outside [0, 1]")
        with np.errstate(divide="ignore"):
            out = -np.log1p(-q) / self.rate
        return out if out.shape else float(out)

    def moments(self):
        m = 1.0 / self.rate
        return Moments(
            MomentValue.finite(m),
            MomentValue.finite(m * m),
            MomentValue.finite(1.0),
        )

    # the exponential is its own stationary excess
    def excess_ccdf(self, t):
        return self.ccdf(t)

    def excess_quantile(self, q):
        return self.quantile(q)

    def excess_mean(self):
        return 1.0 / self.rate

    def to_json(self):
        return {"kind": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class Deterministic(ServiceDistribution):
    """Constant service time d; its stationary excess is Uniform(0, d)."""

    d: float
    kind = "deterministic"

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError("Deterministic requires d > 0")

    def ccdf(self, x):
        x = _check_nonneg(x, "x")
        out = np.where(x < self.d, 1.0, 0.0)
        return out if out.shape else float(out)

    def pdf(self, x):
        raise UnsupportedError("point mass has no density")

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q < 0) | (q > 1)):
            raise DomainError("probability outside [0, 1]")
        out = np.where(q > 0, self.d, 0.0)
        return out if out.shape else float(out)

    def moments(self):
        return Moments(
            MomentValue.finite(self.d),
            MomentValue.finite(0.0),
            MomentValue.finite(0.0),
        )

    def excess_ccdf(self, t):
        t = _check_nonneg(t, "t")
        out = np.clip(1.0 - t / self.d, 0.0, 1.0)
        return out if out.shape else float(out)

    def excess_quantile(self, q):
        q = np.asarray(q, dtype=float)
        out = q * self.d
        return out if out.shape else float(out)

    def excess_mean(self):
        return 0.5 * self.d

    def to_json(self):
        return {"kind": "deterministic", "d": self.d}


@dataclass(frozen=True)
class ExcessDistribution:
    """The stationary excess S_e of a base service law.

    Exists whenever the base mean is finite. Its own mean equals
    E[S](c_s^2 + 1)/2 and so requires a finite base variance.
    """

    base: ServiceDistribution

    def __post_init__(self):
        if not self.base.moments().mean.is_finite:
            raise UnsupportedError("stationary excess requires a finite mean")

    def cdf(self, t):
        return self.base.excess_cdf(t)

    def ccdf(self, t):
        return self.base.excess_ccdf(t)

    def quantile(self, q):
        return self.base.excess_quantile(q)

    def mean(self):
        return self.base.excess_mean()

    def sample(self, rng, size=None):
        return self.base.sample_excess(rng, size)


# ---------------------------------------------------------------------------
# operation-style entry points
# ---------------------------------------------------------------------------

def ccdf(dist, x):
    return dist.ccdf(x)


def moments(dist):
    return dist.moments()


def excess_ccdf(dist, t):
    return dist.excess_ccdf(t)


def excess_mean(dist):
    return dist.excess_mean()


def conditional_remaining_ccdf(dist, elapsed, t):
    return dist.conditional_remaining_ccdf(elapsed, t)


_KINDS = {"pareto": Pareto, "exponential": Exponential, "deterministic": Deterministic}


def distribution_from_json(obj):
    """Parse the tagged JSON encoding of a service distribution."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise DomainError("distribution JSON must be an object with a 'kind' tag")
    kind = obj["kind"]
    if kind == "pareto":
        return Pareto(theta=float(obj["theta"]), alpha=float(obj["alpha"]))
    if kind == "exponential":
        return Exponential(rate=float(obj["rate"]))
    if kind == "deterministic":
        return Deterministic(d=float(obj["d"]))
    raise DomainError(f"unknown distribution kind {kind!r}")
