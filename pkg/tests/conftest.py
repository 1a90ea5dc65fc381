"""Shared test helpers: goodness-of-fit utilities and model fixtures."""

import numpy as np
import pytest
from scipy import stats

import occq._linear_pareto as lp
from occq import inference


def chi_square_pvalue(observed_counts, expected_probs, pool_at=5.0):
    """Chi-square GOF p-value with tail pooling.

    ``observed_counts[i]`` is the number of replications with value i;
    ``expected_probs`` the model pmf over at least the same range. Bins
    are pooled left-to-right until each pooled bin has expected count of
    at least ``pool_at``.
    """
    n = observed_counts.sum()
    size = max(len(observed_counts), len(expected_probs))
    obs = np.zeros(size)
    obs[: len(observed_counts)] = observed_counts
    exp = np.zeros(size)
    exp[: len(expected_probs)] = expected_probs * n

    pooled_obs, pooled_exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= pool_at:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
            acc_o = acc_e = 0.0
    pooled_obs[-1] += acc_o
    pooled_exp[-1] += acc_e
    pooled_obs = np.array(pooled_obs)
    pooled_exp = np.array(pooled_exp)
    pooled_exp *= pooled_obs.sum() / pooled_exp.sum()
    chi2 = float(((pooled_obs - pooled_exp) ** 2 / pooled_exp).sum())
    return float(stats.chi2.sf(chi2, len(pooled_obs) - 1))


def generate_model_series(rng, priors, params, T, n0, class_id="fixture"):
    """Counts drawn from the occupancy model itself, one-step chained.

    The first month is the fixed initial condition (it carries no
    likelihood term), so fitting this series back is exactly
    well-specified.
    """
    beta0, beta1, alpha = params
    theta = priors.theta(alpha)
    months = [(0, int(n0))]
    for t in range(1, T):
        p = lp.survival_fraction(beta0, beta1, alpha, theta, t - 1.0, 1.0)
        m = lp.new_arrivals_mean(beta0, beta1, alpha, theta, t - 1.0, 1.0)
        mean = months[-1][1] * p + m
        months.append((t, int(rng.poisson(mean))))
    return inference.CountSeries(class_id, tuple(months))


@pytest.fixture(scope="session")
def theft_like_fit():
    """A converged fit on a model-generated series at the application's
    scale; shared across tests that need a realistic posterior."""
    priors = inference.PriorSpec(
        beta0=(1000.0, 30.0), beta1=(-5.0, 1.5), mean_service=5.22
    )
    rng = np.random.default_rng(314)
    series = generate_model_series(rng, priors, (1000.0, -5.0, 4.0), T=21, n0=5000)
    base = inference.CountSeries(series.class_id, series.months[:13])
    settings = inference.MCMCSettings(chains=2, iterations=1500, seed=77)
    draws = inference.fit(base, priors, settings)
    return {
        "priors": priors,
        "series": base,
        "actuals": series,
        "draws": draws,
        "settings": settings,
    }
