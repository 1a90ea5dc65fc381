import math

import numpy as np
import pytest
from scipy import stats

from occq import arrivals as arr
from occq import distributions as dd
from occq import horizon as hz
from occq import simulate
from occq.errors import DomainError, InfeasibleError

# E[S] = 3 throughout; shapes picked for squared coefficients of
# variation 3 and 6 (alpha = 2 c^2 / (c^2 - 1))
PARETO_CV3 = dd.Pareto(theta=6.0, alpha=3.0)
PARETO_CV6 = dd.Pareto(theta=4.2, alpha=2.4)


# ---------------------------------------------------------------------------
# last departure law
# ---------------------------------------------------------------------------

def test_cdf_at_zero_is_all_depart_mass():
    law = hz.LastDepartureLaw.steady_state(10.0, PARETO_CV3)
    assert law.cdf(0.0) == pytest.approx(math.exp(-30.0))


def test_empty_system_departs_immediately():
    law = hz.LastDepartureLaw(nu=1e-12, survival=PARETO_CV3.excess_ccdf)
    assert law.cdf(0.0) == pytest.approx(1.0, abs=1e-11)
    assert law.cdf(5.0) == pytest.approx(1.0, abs=1e-11)


def test_quantile_cdf_round_trip():
    law = hz.LastDepartureLaw.steady_state(10.0, PARETO_CV3)
    for x in (0.5, 0.9, 0.99):
        assert law.cdf(law.quantile(x)) == pytest.approx(x, abs=1e-9)


def test_quantile_closed_form_pareto():
    # the member quantile is the excess-law inverse
    law = hz.LastDepartureLaw.steady_state(10.0, PARETO_CV3)
    x = 0.9
    inner = 1.0 - math.log(1.0 / x) / law.nu
    expected = (PARETO_CV3.theta ** (PARETO_CV3.alpha - 1.0) / (1.0 - inner)) ** (
        1.0 / (PARETO_CV3.alpha - 1.0)
    ) - PARETO_CV3.theta
    assert law.quantile(x) == pytest.approx(expected, rel=1e-12)


def test_quantile_out_of_range():
    law = hz.LastDepartureLaw.steady_state(1.0, PARETO_CV3)  # nu = 3
    with pytest.raises(DomainError):
        law.quantile(math.exp(-3.0) / 2.0)
    with pytest.raises(DomainError):
        law.quantile(1.0)


def test_quantiles_grow_with_service_variability():
    heavy = hz.LastDepartureLaw.steady_state(10.0, PARETO_CV6)
    light = hz.LastDepartureLaw.steady_state(10.0, PARETO_CV3)
    for x in (0.5, 0.9, 0.99):
        assert heavy.quantile(x) > light.quantile(x)


def test_tail_asymptote():
    # relative error of the asymptote decays like the tail itself
    law = hz.LastDepartureLaw.steady_state(10.0, PARETO_CV3)
    for x in (2000.0, 20000.0):
        assert law.sf(x) == pytest.approx(law.tail_asymptote(x), rel=1e-3)
    rel_err = lambda x: abs(law.sf(x) / law.tail_asymptote(x) - 1.0)
    assert rel_err(5000.0) < rel_err(500.0)


def test_numeric_quantile_route_matches_closed():
    closed = hz.LastDepartureLaw.steady_state(10.0, PARETO_CV3)
    numeric = hz.LastDepartureLaw(nu=closed.nu, survival=PARETO_CV3.excess_ccdf)
    for x in (0.5, 0.9):
        assert numeric.quantile(x) == pytest.approx(closed.quantile(x), abs=1e-8)


def test_mixture_identity_over_poisson_population():
    # cdf(x) = E[(1 - survival(x))^N] with N Poisson(nu), by series
    law = hz.LastDepartureLaw.steady_state(4.0, PARETO_CV3)   # nu = 12
    for x in (1.0, 5.0, 25.0):
        g = 1.0 - PARETO_CV3.excess_ccdf(x)
        ks = np.arange(0, 200)
        series = float((stats.poisson.pmf(ks, law.nu) * g**ks).sum())
        assert law.cdf(x) == pytest.approx(series, abs=1e-10)


def test_moment_against_monte_carlo():
    law = hz.LastDepartureLaw.steady_state(10.0, PARETO_CV3)
    rng = np.random.default_rng(3)
    reps = 40_000
    n = rng.poisson(law.nu, size=reps)
    total = int(n.sum())
    draws = np.asarray(PARETO_CV3.excess_quantile(rng.random(total)))
    bounds = np.concatenate([[0], np.cumsum(n)])
    maxima = np.array([
        draws[a:b].max() if b > a else 0.0 for a, b in zip(bounds[:-1], bounds[1:])
    ])
    se = maxima.std(ddof=1) / math.sqrt(reps)
    assert abs(law.moment(1) - maxima.mean()) < 3.0 * se


def test_law_from_system_and_des():
    # terminated stationary system, module-scale KS cross-check
    law = hz.LastDepartureLaw.from_system(arr.CutRate(arr.Constant(10.0), 0.0, arr.PAST),
                                          PARETO_CV3, 0.0)
    assert law.nu == pytest.approx(30.0)
    cfg = simulate.SimConfig(
        rate=arr.CutRate(arr.Constant(10.0), 0.0, arr.PAST),
        dist=PARETO_CV3,
        initial=simulate.InitialState(steady_state_poisson=True),
        horizon=1.0, replications=20_000, seed=5,
    )
    out = simulate.run(cfg, [1.0])
    res = stats.kstest(out.last_departure, lambda x: np.array([law.cdf(v) for v in x]))
    assert res.pvalue > 1e-3


def test_congestion_probability_identity():
    for nu, n in ((30.0, 45), (12.0, 13), (5.0, 30)):
        direct = float(stats.poisson.sf(n - 1, nu))
        series = float(sum(stats.poisson.pmf(k, nu) for k in range(n, n + 400)))
        assert hz.congestion_probability(nu, n) == pytest.approx(direct, abs=1e-15)
        assert hz.congestion_probability(nu, n) == pytest.approx(series, abs=1e-12)


# ---------------------------------------------------------------------------
# recovery
# ---------------------------------------------------------------------------

def scenario_grid():
    """E[S] = 3 scenarios across tail weights, congestion multiples."""
    dists = [dd.Pareto(theta=3.0, alpha=2.0), PARETO_CV6, PARETO_CV3]
    multiples = (1.5, 2.0, 3.0)
    for dist in dists:
        for mult in multiples:
            yield hz.RecoveryProblem(lam=10.0, dist=dist, n=30.0 * mult)


def test_default_recovery_level():
    p = hz.RecoveryProblem(lam=10.0, dist=PARETO_CV3, n=60.0)
    assert p.k == 31.0 and p.nu == pytest.approx(30.0)


def test_problem_ordering_enforced():
    with pytest.raises(InfeasibleError):
        hz.RecoveryProblem(lam=10.0, dist=PARETO_CV3, n=60.0, k=20.0)
    with pytest.raises(InfeasibleError):
        hz.RecoveryProblem(lam=10.0, dist=PARETO_CV3, n=60.0, k=70.0)


def test_reference_scenario_value():
    # nu = 30, k = 31, n = 60: ratio 1/30, root (theta^2 * 30)^(1/2) - theta
    p = hz.RecoveryProblem(lam=10.0, dist=PARETO_CV3, n=60.0, k=31.0)
    assert hz.recovery_time(p) == pytest.approx(math.sqrt(36.0 * 30.0) - 6.0, rel=1e-12)


def test_recovery_defining_property():
    for problem in scenario_grid():
        beta = hz.recovery_time(problem)
        assert problem.mean_at(beta) == pytest.approx(problem.k, abs=1e-9)


def test_closed_form_equals_bisection_on_grid():
    for problem in scenario_grid():
        closed = hz.recovery_time(problem, method="closed_form")
        bisect = hz.recovery_time(problem, method="bisect")
        assert closed == pytest.approx(bisect, abs=1e-10)


def test_closed_form_equals_bisection_random():
    # ratios bounded away from 0 keep the roots at planning-horizon
    # magnitudes, where the 1e-10 agreement is meaningful in doubles
    rng = np.random.default_rng(8)
    for _ in range(100):
        alpha = float(rng.uniform(1.5, 6.0))
        es = float(rng.uniform(0.5, 6.0))
        dist = dd.pareto_from_mean(es, alpha)
        lam = float(rng.uniform(1.0, 30.0))
        nu = lam * es
        n = float(nu + rng.uniform(1.0, 5.0 * nu))
        ratio = float(rng.uniform(0.02, 0.95))
        k = nu + ratio * (n - nu)
        problem = hz.RecoveryProblem(lam=lam, dist=dist, n=n, k=k)
        assert hz.recovery_time(problem, "closed_form") == pytest.approx(
            hz.recovery_time(problem, "bisect"), abs=1e-10
        )


def test_recovery_near_target_is_fast():
    base = hz.RecoveryProblem(lam=10.0, dist=PARETO_CV3, n=60.0, k=31.0)
    near = hz.RecoveryProblem(lam=10.0, dist=PARETO_CV3, n=60.0, k=59.9)
    assert hz.recovery_time(near) < 0.05 * hz.recovery_time(base)


def test_scaling_lambda_strictly_reduces_beta():
    for problem in scenario_grid():
        base = hz.recovery_time(problem)
        aided = hz.recovery_with_intervention(problem, scale_lambda=0.8)
        assert aided < base


def test_scale_factor_one_is_identity():
    p = hz.RecoveryProblem(lam=10.0, dist=PARETO_CV3, n=60.0, k=31.0)
    assert hz.recovery_with_intervention(p, scale_lambda=1.0) == pytest.approx(
        hz.recovery_time(p), rel=1e-12
    )


def test_pause_then_resume_schedule():
    p = hz.RecoveryProblem(lam=10.0, dist=PARETO_CV3, n=90.0, k=45.0)
    schedule = hz.recovery_with_intervention(p, pause_then_resume=36.0)
    (lab1, t1, from1, to1), (lab2, t2, from2, to2) = schedule.phases
    assert (lab1, from1, to1) == ("paused", 90.0, 45.0)
    assert (lab2, from2, to2) == ("resumed", 45.0, 36.0)
    # phase one solves the arrivals-off equation excess_ccdf(t) = k/n
    assert PARETO_CV3.excess_ccdf(t1) == pytest.approx(45.0 / 90.0, abs=1e-9)
    # phase two re-solves from k down to j with arrivals back on
    assert PARETO_CV3.excess_ccdf(t2) == pytest.approx(
        (36.0 - 30.0) / (45.0 - 30.0), abs=1e-9
    )
    assert schedule.total == pytest.approx(t1 + t2)
    body = schedule.to_json()
    assert body["total"] == schedule.total and len(body["phases"]) == 2


def test_pause_resume_ordering_enforced():
    p = hz.RecoveryProblem(lam=10.0, dist=PARETO_CV3, n=90.0, k=45.0)
    with pytest.raises(InfeasibleError):
        hz.recovery_with_intervention(p, pause_then_resume=20.0)   # below nu
    with pytest.raises(InfeasibleError):
        hz.recovery_with_intervention(p, pause_then_resume=50.0)   # above k
    with pytest.raises(DomainError):
        hz.recovery_with_intervention(p)
    with pytest.raises(DomainError):
        hz.recovery_with_intervention(p, scale_lambda=0.5, pause_then_resume=36.0)
    with pytest.raises(DomainError):
        hz.recovery_with_intervention(p, scale_lambda=1.3)


def test_exponential_service_recovery():
    e = dd.Exponential(rate=1.0 / 3.0)
    p = hz.RecoveryProblem(lam=10.0, dist=e, n=60.0, k=31.0)
    beta = hz.recovery_time(p)
    # memoryless: excess equals the base law, so the root is analytic
    assert beta == pytest.approx(-3.0 * math.log(1.0 / 30.0), abs=1e-8)
