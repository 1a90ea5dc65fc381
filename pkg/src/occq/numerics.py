"""Deterministic quadrature and root finding used across the engine.

Adaptive Simpson is the house integrator: absolute tolerance, iterative
(stack-based) subdivision with a hard cap on the number of intervals, and
semi-infinite ranges handled through the substitution u = 1/(1+t). All
results are deterministic, which keeps every quadrature-backed value
byte-reproducible across runs.
"""

import math

from .errors import DomainError

#: default absolute tolerance for adaptive Simpson
DEFAULT_TOL = 1e-10
#: cap on the number of subdivided intervals before giving up refinement
MAX_INTERVALS = 10**6


def _simpson(fa, fm, fb, h):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(f, a, b, tol=DEFAULT_TOL, max_intervals=MAX_INTERVALS):
    """Integrate ``f`` on the finite interval [a, b] to absolute tolerance.

    Iterative adaptive Simpson with Richardson extrapolation on accepted
    panels. Subdivision stops when the panel error estimate is below the
    panel's share of ``tol`` or the global interval cap is reached.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, tol, max_intervals)

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fm, fb, b - a)
    # stack entries: (a, fa, m, fm, b, fb, panel_estimate, panel_tol)
    stack = [(a, fa, m, fm, b, fb, whole, tol)]
    total = 0.0
    n_intervals = 1
    while stack:
        a0, fa0, m0, fm0, b0, fb0, est, ptol = stack.pop()
        lm = 0.5 * (a0 + m0)
        rm = 0.5 * (m0 + b0)
        flm, frm = f(lm), f(rm)
        left = _simpson(fa0, flm, fm0, m0 - a0)
        right = _simpson(fm0, frm, fb0, b0 - m0)
        err = (left + right - est) / 15.0
        if abs(err) <= ptol or n_intervals >= max_intervals:
            total += left + right + err
        else:
            n_intervals += 2
            half = 0.5 * ptol
            stack.append((a0, fa0, lm, flm, m0, fm0, left, half))
            stack.append((m0, fm0, rm, frm, b0, fb0, right, half))
    return total


def integrate(f, a, b, tol=DEFAULT_TOL):
    """Integrate ``f`` on [a, b] where ``b`` may be ``math.inf``.

    An infinite upper limit is mapped to (0, 1] by u = 1/(1+t) with
    t = x - a, so the integrand must vanish at infinity for the result
    to be meaningful.
    """
    if b == a:
        return 0.0
    if math.isinf(a):
        raise DomainError("lower integration limit must be finite")
    if not math.isinf(b):
        return adaptive_simpson(f, a, b, tol)

    def mapped(u):
        if u <= 0.0:
            return 0.0
        t = (1.0 - u) / u
        v = f(a + t)
        return v / (u * u)

    return adaptive_simpson(mapped, 0.0, 1.0, tol)


def bracket_root(f, lo, hi=None, max_doublings=200):
    """Find [lo, hi] with a sign change of ``f``, doubling ``hi`` as needed."""
    flo = f(lo)
    if flo == 0.0:
        return lo, lo
    if hi is None:
        hi = lo + 1.0 if lo > 0 else 1.0
    fhi = f(hi)
    n = 0
    while flo * fhi > 0.0:
        if n >= max_doublings:
            raise DomainError("failed to bracket a root")
        hi = lo + 2.0 * (hi - lo)
        fhi = f(hi)
        n += 1
    return lo, hi


def bisect(f, lo, hi=None, tol=1e-10, max_iter=400):
    """Root of ``f`` by bisection; brackets by doubling when ``hi`` is None."""
    lo, hi = bracket_root(f, lo, hi)
    if lo == hi:
        return lo
    flo = f(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)
