"""Long-horizon analytics: emptying times of a terminated system and
recovery from congestion events, with arrival-side interventions.

Once arrivals stop at time gamma, the residual population is Poisson
with mean nu and each member's remaining time follows the observed
remaining-service law. The time T until the system empties is the
maximum over that Poisson number of draws, giving the double-exponential
cdf exp(-nu * survival(x)) with an explicit quantile inverse.

Recovery analysis works at the mean level for a stationary system: from
congestion level n, the mean path crosses a target level k at the unique
root of excess_ccdf(t) = (k - nu) / (n - nu). Reducing the arrival rate
shrinks nu and therefore the recovery time; pausing arrivals sets nu to
zero for a first phase and re-solves after they resume.
"""

import math
from dataclasses import dataclass

from scipy import stats

from . import numerics, observed
from .distributions import Pareto
from .errors import DomainError, InfeasibleError

#: tolerance for recovery-time root finding (months)
ROOT_TOL = 1e-10


@dataclass(frozen=True)
class LastDepartureLaw:
    """Law of the time from arrival termination until the last departure.

    ``nu`` is the expected residual population at the termination time
    and ``survival`` the remaining-service ccdf of one member. The
    ``quantile_x`` inverse of that ccdf may be supplied when a closed
    form exists; otherwise it is computed by bisection.
    """

    nu: float
    survival: object        # callable x -> ccdf of one remaining time
    quantile_x: object = None  # callable q -> inverse of (1 - survival)

    def cdf(self, x):
        if x < 0:
            raise DomainError("x must be non-negative")
        return math.exp(-self.nu * float(self.survival(x)))

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def tail_asymptote(self, x):
        """nu * survival(x); the exact tail is asymptotic to this."""
        return self.nu * float(self.survival(x))

    def _quantile_of_member(self, q):
        if self.quantile_x is not None:
            return float(self.quantile_x(q))
        return numerics.bisect(lambda x: (1.0 - float(self.survival(x))) - q, 0.0)

    def quantile(self, x):
        """Quantile of the emptying time; defined for exp(-nu) < x < 1."""
        if not math.exp(-self.nu) < x < 1.0:
            raise DomainError(
                "quantile defined only for exp(-nu) < x < 1"
            )
        return self._quantile_of_member(1.0 - math.log(1.0 / x) / self.nu)

    def moment(self, k=1, tol=1e-10):
        """E[T^k] via int k x^(k-1) P[T > x] dx."""
        return numerics.integrate(
            lambda x: k * x ** (k - 1.0) * self.sf(x), 0.0, math.inf, tol
        )

    @classmethod
    def from_system(cls, rate, dist, gamma):
        """Law for a system whose arrivals terminate at time gamma."""
        nu = observed.nu_tau(rate, dist, gamma)
        return cls(
            nu=nu,
            survival=lambda x: observed.remaining_survival(rate, dist, gamma, x),
        )

    @classmethod
    def steady_state(cls, lam, dist):
        """Stationary system terminated 'now': nu = lam E[S], remaining
        times follow the stationary excess."""
        nu = lam * dist.mean()
        return cls(
            nu=nu,
            survival=dist.excess_ccdf,
            quantile_x=dist.excess_quantile,
        )


def last_departure_cdf(law, x):
    return law.cdf(x)


def last_departure_quantile(law, x):
    return law.quantile(x)


def congestion_probability(nu, n):
    """P[Poisson(nu) >= n]: how rare the observed congestion level is."""
    return float(stats.poisson.sf(n - 1, nu))


@dataclass(frozen=True)
class RecoveryProblem:
    """Recover from congestion level n down to level k under constant
    arrivals lam and the given service law; requires nu < k < n where
    nu = lam * E[S] is the steady-state mean."""

    lam: float
    dist: object
    n: float
    k: float | None = None

    def __post_init__(self):
        if self.k is None:
            object.__setattr__(self, "k", math.ceil(self.nu + 1.0))
        if not self.nu < self.k < self.n:
            raise InfeasibleError(
                f"recovery requires nu < k < n (nu={self.nu:.6g}, k={self.k}, n={self.n})"
            )

    @property
    def nu(self):
        return self.lam * self.dist.mean()

    def mean_at(self, t):
        """Mean occupancy t after observing n (stationary system)."""
        ge = self.dist.excess_cdf(t)
        return self.nu * ge + self.n * (1.0 - ge)


def _solve_recovery(dist, ratio):
    """Root of excess_ccdf(t) = ratio, closed-form for Pareto."""
    if not 0.0 < ratio < 1.0:
        raise InfeasibleError(f"recovery ratio {ratio:.6g} outside (0, 1)")
    if isinstance(dist, Pareto) and dist.alpha > 1:
        th, al = dist.theta, dist.alpha
        return (th ** (al - 1.0) / ratio) ** (1.0 / (al - 1.0)) - th
    return numerics.bisect(lambda t: dist.excess_ccdf(t) - ratio, 0.0, tol=ROOT_TOL)


def recovery_time(problem, method="auto"):
    """Months until the mean path first reaches the recovery level.

    ``method`` selects the route: "auto" prefers the Pareto closed form,
    "bisect" forces the root finder (kept as a cross-check).
    """
    ratio = (problem.k - problem.nu) / (problem.n - problem.nu)
    if method == "bisect":
        if not 0.0 < ratio < 1.0:
            raise InfeasibleError(f"recovery ratio {ratio:.6g} outside (0, 1)")
        return numerics.bisect(
            lambda t: problem.dist.excess_ccdf(t) - ratio, 0.0, tol=ROOT_TOL
        )
    if method not in ("auto", "closed_form"):
        raise DomainError(f"unknown method {method!r}")
    return _solve_recovery(problem.dist, ratio)


@dataclass(frozen=True)
class RecoverySchedule:
    """Phased recovery plan: list of (label, duration, from_level, to_level)."""

    phases: tuple

    @property
    def total(self):
        return sum(d for _, d, _, _ in self.phases)

    def to_json(self):
        return {
            "phases": [
                {"label": lab, "duration": dur, "from_level": a, "to_level": b}
                for lab, dur, a, b in self.phases
            ],
            "total": self.total,
        }


def recovery_with_intervention(problem, scale_lambda=None, pause_then_resume=None):
    """Recovery time under an arrival-side intervention.

    ``scale_lambda``: multiply the arrival rate by a factor in [0, 1],
    shrinking the steady-state mean in the recovery equation; returns
    months. ``pause_then_resume``: stop arrivals entirely until the
    population falls to k, then resume and continue down to the given
    level j (nu < j < k); returns a RecoverySchedule.
    """
    if (scale_lambda is None) == (pause_then_resume is None):
        raise DomainError("specify exactly one of scale_lambda, pause_then_resume")

    if scale_lambda is not None:
        if not 0.0 <= scale_lambda <= 1.0:
            raise DomainError("scale_lambda must lie in [0, 1]")
        nu2 = scale_lambda * problem.nu
        ratio = (problem.k - nu2) / (problem.n - nu2)
        return _solve_recovery(problem.dist, ratio)

    j = pause_then_resume
    if not problem.nu < j < problem.k:
        raise InfeasibleError(
            f"resume level must satisfy nu < j < k (nu={problem.nu:.6g}, j={j}, k={problem.k})"
        )
    # phase one: arrivals off, population decays from n toward 0
    t1 = _solve_recovery(problem.dist, problem.k / problem.n)
    # phase two: arrivals back on, recover from k down to j
    ratio2 = (j - problem.nu) / (problem.k - problem.nu)
    t2 = _solve_recovery(problem.dist, ratio2)
    return RecoverySchedule(
        phases=(
            ("paused", t1, problem.n, problem.k),
            ("resumed", t2, problem.k, j),
        )
    )
