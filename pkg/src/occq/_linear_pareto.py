"""Closed forms for a linear arrival trend feeding Pareto services.

With rate beta0 + beta1*t over the infinite past and a Pareto service
law (shift theta, shape alpha > 2), the three transient quantities of
interest have exact algebraic forms:

* ``present_mean`` -- expected number present at tau contributed by all
  arrivals up to tau,
* ``survival_fraction`` -- probability an individual present at tau is
  still present delta later,
* ``new_arrivals_mean`` -- expected count at tau + delta from arrivals
  inside (tau, tau + delta].

Each function is pure algebra in the parameters; the quadrature of the
defining integrals is kept as an independent route in the test suite.
All three accept numpy arrays for ``delta``.
"""

import numpy as np


def present_mean(beta0, beta1, alpha, theta, tau):
    """Expected occupancy at tau (arrivals from the infinite past)."""
    return (beta0 + beta1 * tau) * theta / (alpha - 1.0) - beta1 * theta**2 / (
        (alpha - 1.0) * (alpha - 2.0)
    )


def survival_fraction(beta0, beta1, alpha, theta, tau, delta):
    """P(still present at tau + delta | present at tau)."""
    excess_sf = theta ** (alpha - 1.0) * (delta + theta) ** (1.0 - alpha)
    correction = 1.0 + beta1 * delta / (
        (beta0 + beta1 * tau) * (2.0 - alpha) + beta1 * theta
    )
    return excess_sf * correction


def alive_mass(beta0, beta1, alpha, theta, c, d):
    """Expected arrivals up to time c still in service d later.

    Algebraically equal to present_mean(c) * survival_fraction(c, d) but
    stable when the mass at c vanishes (the survival correction has a
    removable singularity there).
    """
    excess_sf = theta ** (alpha - 1.0) * (d + theta) ** (1.0 - alpha)
    return excess_sf * (
        present_mean(beta0, beta1, alpha, theta, c)
        - beta1 * d * theta / ((alpha - 1.0) * (alpha - 2.0))
    )


def new_arrivals_mean(beta0, beta1, alpha, theta, tau, delta):
    """Expected count at tau + delta from arrivals after tau."""
    first = (beta0 + beta1 * tau) / (1.0 - alpha) * (
        theta**alpha * (delta + theta) ** (1.0 - alpha) - theta
    )
    second = beta1 / ((1.0 - alpha) * (2.0 - alpha)) * (
        theta**alpha * (delta + theta) ** (2.0 - alpha)
        - theta**2
        - delta * theta * (2.0 - alpha)
    )
    return first + second
