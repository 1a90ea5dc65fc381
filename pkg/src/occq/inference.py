"""Bayesian fitting of the occupancy model and forecast generation.

The model: a linear arrival trend beta0 + beta1*t feeding Pareto
services with shape alpha and shift theta tied to a known mean service
time (theta = E[S] * (alpha - 1)). Monthly head counts are linked by
the high-load Poisson approximation: each month's count is Poisson with
mean M = n_prev * p + m_new, where p is the cohort survival over the
month and m_new the expected contribution of the month's arrivals, both
in closed form. The first observation seeds the chain and contributes
no likelihood term.

Fitting is adaptive random-walk Metropolis over (beta0, beta1, alpha);
arrival-count data can be fitted separately (Poisson regression with
flat priors) to centre the occupancy priors, mirroring a two-stage
workflow where arrivals are better observed than durations.
"""

import csv
import math
import re
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import interpolate, special

from . import _linear_pareto as lp
from . import mcmc
from .errors import ConvergenceError, DomainError, UnsupportedError

ALPHA_LO_DEFAULT = 2.5
ALPHA_HI_DEFAULT = 10.0
#: months beyond the last observation that the fitted trend is trusted
DEFAULT_HORIZON_CAP = 24


# ---------------------------------------------------------------------------
# count series and CSV interchange
# ---------------------------------------------------------------------------

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


def month_to_index(label, origin):
    my, mm = _parse_month(label)
    oy, om = _parse_month(origin)
    return (my - oy) * 12 + (mm - om)


def index_to_month(index, origin):
    oy, om = _parse_month(origin)
    total = (oy * 12 + om - 1) + index
    return f"{total // 12:04d}-{total % 12 + 1:02d}"


def _parse_month(label):
    m = _MONTH_RE.match(label)
    if not m:
        raise DomainError(f"month {label!r} is not in YYYY-MM form")
    year, month = int(m.group(1)), int(m.group(2))
    if not 1 <= month <= 12:
        raise DomainError(f"month {label!r} is not a calendar month")
    return year, month


@dataclass(frozen=True)
class CountSeries:
    """Monthly head counts for one class, indexed in months since the
    series origin (t = 0 is the first ingested month)."""

    class_id: str
    months: tuple               # ((t, n), ...) with strictly increasing t
    provenance: str = "observed"
    origin: str | None = None   # ISO YYYY-MM of month index 0

    def __post_init__(self):
        months = tuple((int(t), int(n)) for t, n in self.months)
        object.__setattr__(self, "months", months)
        if self.provenance not in ("observed", "synthesized"):
            raise DomainError("provenance must be 'observed' or 'synthesized'")
        ts = [t for t, _ in months]
        if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
            raise DomainError("month indices must be strictly increasing")
        if any(n < 0 for _, n in months):
            raise DomainError("counts must be non-negative")

    def times(self):
        return np.array([t for t, _ in self.months], dtype=float)

    def counts(self):
        return np.array([n for _, n in self.months], dtype=float)

    def last(self):
        return self.months[-1]

    def extended(self, t, n):
        """New series with one more observation appended."""
        return CountSeries(self.class_id, self.months + ((t, n),), self.provenance, self.origin)

    def count_at(self, t):
        for tt, n in self.months:
            if tt == t:
                return n
        raise DomainError(f"no observation at month {t}")


def write_series_csv(path, series_list):
    """`month,class_id,count` rows, month in ISO YYYY-MM."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["month", "class_id", "count"])
        for s in series_list:
            origin = s.origin or "2000-01"
            for t, n in s.months:
                w.writerow([index_to_month(t, origin), s.class_id, n])


def read_series_csv(path, provenance="observed"):
    """Parse a monthly-count CSV into one CountSeries per class."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["month", "class_id", "count"]:
            raise DomainError(f"{path}:1: expected header 'month,class_id,count'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DomainError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            try:
                month, class_id, count = row[0].strip(), row[1].strip(), int(row[2])
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: bad count {row[2]!r}") from exc
            try:
                _parse_month(month)
            except DomainError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from exc
            rows.append((month, class_id, count))
    if not rows:
        raise DomainError(f"{path}: no data rows")
    origin = min(m for m, _, _ in rows)
    by_class = {}
    for month, class_id, count in rows:
        by_class.setdefault(class_id, []).append((month_to_index(month, origin), count))
    return [
        CountSeries(cid, tuple(sorted(pairs)), provenance, origin)
        for cid, pairs in sorted(by_class.items())
    ]


# ---------------------------------------------------------------------------
# priors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PriorSpec:
    """Priors for (beta0, beta1, alpha) plus the fixed mean service time
    that ties theta to alpha via theta = E[S] * (alpha - 1)."""

    beta0: tuple                # (mu, sigma)
    beta1: tuple                # (mu, sigma)
    mean_service: float
    alpha_lo: float = ALPHA_LO_DEFAULT
    alpha_hi: float = ALPHA_HI_DEFAULT

    def __post_init__(self):
        if self.beta0[1] <= 0 or self.beta1[1] <= 0:
            raise DomainError("prior sigmas must be positive")
        if not self.alpha_lo < self.alpha_hi:
            raise DomainError("alpha_lo must be below alpha_hi")
        if self.mean_service <= 0:
            raise DomainError("mean service time must be positive")
        if self.alpha_lo <= 2.0:
            raise DomainError("alpha_lo must exceed 2 (closed forms need alpha > 2)")
        if self.alpha_lo < ALPHA_LO_DEFAULT:
            warnings.warn(
                "alpha lower bound below 2.5 admits near-infinite-variance "
                "services; closed forms require alpha > 2",
                stacklevel=2,
            )
        if self.alpha_hi > ALPHA_HI_DEFAULT:
            warnings.warn(
                "alpha upper bounds beyond 10 are weakly identified from "
                "count data; expect poor mixing",
                stacklevel=2,
            )

    def theta(self, alpha):
        return self.mean_service * (alpha - 1.0)

    def log_prior(self, beta0, beta1, alpha):
        if not self.alpha_lo <= alpha <= self.alpha_hi:
            return -math.inf
        z0 = (beta0 - self.beta0[0]) / self.beta0[1]
        z1 = (beta1 - self.beta1[0]) / self.beta1[1]
        return -0.5 * (z0 * z0 + z1 * z1)

    def sample(self, rng):
        return np.array(
            [
                rng.normal(*self.beta0),
                rng.normal(*self.beta1),
                rng.uniform(self.alpha_lo, self.alpha_hi),
            ]
        )

    def to_json(self):
        return {
            "beta0": list(self.beta0),
            "beta1": list(self.beta1),
            "mean_service": self.mean_service,
            "alpha": [self.alpha_lo, self.alpha_hi],
        }

    @classmethod
    def from_json(cls, obj):
        alpha = obj.get("alpha", [ALPHA_LO_DEFAULT, ALPHA_HI_DEFAULT])
        return cls(
            beta0=tuple(obj["beta0"]),
            beta1=tuple(obj["beta1"]),
            mean_service=float(obj["mean_service"]),
            alpha_lo=float(alpha[0]),
            alpha_hi=float(alpha[1]),
        )


@dataclass(frozen=True)
class MCMCSettings:
    chains: int = 2
    iterations: int = 10_000
    warmup: int | None = None
    seed: int = 0
    max_restarts: int = 2

    @property
    def warmup_iters(self):
        return self.iterations // 2 if self.warmup is None else self.warmup

    def to_json(self):
        return {
            "chains": self.chains,
            "iterations": self.iterations,
            "warmup": self.warmup_iters,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            chains=int(obj.get("chains", 2)),
            iterations=int(obj.get("iterations", 10_000)),
            warmup=obj.get("warmup"),
            seed=int(obj.get("seed", 0)),
            max_restarts=int(obj.get("max_restarts", 2)),
        )


R_HAT_LIMIT = 1.05


@dataclass(frozen=True)
class PosteriorDraws:
    """Merged post-warmup draws with convergence diagnostics.

    ``alpha``/``theta`` are None for arrival-only fits (beta parameters
    alone). theta always satisfies the theta rule of the prior.
    """

    beta0: np.ndarray
    beta1: np.ndarray
    alpha: np.ndarray | None
    theta: np.ndarray | None
    chains: int
    diagnostics: dict
    seed: int

    def __len__(self):
        return len(self.beta0)

    def param_matrix(self):
        cols = [self.beta0, self.beta1]
        if self.alpha is not None:
            cols += [self.alpha, self.theta]
        return np.column_stack(cols)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if self.alpha is not None:
                w.writerow(["beta0", "beta1", "alpha", "theta"])
                for row in zip(self.beta0, self.beta1, self.alpha, self.theta):
                    w.writerow([repr(float(v)) for v in row])
            else:
                w.writerow(["beta0", "beta1"])
                for row in zip(self.beta0, self.beta1):
                    w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, seed=0):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or header[:2] != ["beta0", "beta1"]:
                raise DomainError(f"{path}:1: expected posterior CSV header")
            has_alpha = len(header) >= 4
            cols = [[] for _ in header]
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    for i, v in enumerate(row):
                        cols[i].append(float(v))
                except ValueError as exc:
                    raise DomainError(f"{path}:{lineno}: bad value") from exc
        return cls(
            beta0=np.array(cols[0]),
            beta1=np.array(cols[1]),
            alpha=np.array(cols[2]) if has_alpha else None,
            theta=np.array(cols[3]) if has_alpha else None,
            chains=1,
            diagnostics={},
            seed=seed,
        )


# ---------------------------------------------------------------------------
# closed forms and the likelihood
# ---------------------------------------------------------------------------

def closed_forms(beta0, beta1, alpha, theta, tau, delta):
    """The three transient quantities for the linear-trend Pareto model.

    Returns {"v_tau", "p_tau_delta", "m_check"}; each equals the
    defining integral of the corresponding region mass. ``delta`` may be
    an array.
    """
    if alpha <= 2:
        raise UnsupportedError("closed forms require alpha > 2")
    dmax = float(np.max(delta))
    if beta0 + beta1 * tau < 0 or beta0 + beta1 * (tau + dmax) < 0:
        raise DomainError("arrival rate negative on [tau, tau + delta]")
    return {
        "v_tau": lp.present_mean(beta0, beta1, alpha, theta, tau),
        "p_tau_delta": lp.survival_fraction(beta0, beta1, alpha, theta, tau, delta),
        "m_check": lp.new_arrivals_mean(beta0, beta1, alpha, theta, tau, delta),
    }


def _conditional_means(beta0, beta1, alpha, theta, taus, deltas, n_prev):
    """Poisson means M for each observation step; None when invalid."""
    p = lp.survival_fraction(beta0, beta1, alpha, theta, taus, deltas)
    m = lp.new_arrivals_mean(beta0, beta1, alpha, theta, taus, deltas)
    if np.any(p < 0.0) or np.any(p > 1.0) or np.any(m < 0.0):
        return None
    return n_prev * p + m


def make_log_posterior(series, priors, prior_only=False):
    """Closure evaluating the log posterior at (beta0, beta1, alpha).

    Months are linked one step at a time: each count is Poisson around
    the conditional mean given the previous observed count. The first
    month is the initial condition, not a likelihood term.
    """
    ts = series.times()
    ns = series.counts()
    if len(ts) < 2 and not prior_only:
        raise DomainError("need at least two observations to form a likelihood")
    taus = ts[:-1]
    deltas = np.diff(ts)
    n_prev = ns[:-1]
    n_curr = ns[1:]
    norm = special.gammaln(n_curr + 1.0).sum() if len(ts) >= 2 else 0.0
    t_last = ts[-1] if len(ts) else 0.0
    t_first = ts[0] if len(ts) else 0.0

    def log_post(params):
        beta0, beta1, alpha = params
        lp_prior = priors.log_prior(beta0, beta1, alpha)
        if not np.isfinite(lp_prior):
            return -math.inf
        if prior_only:
            return lp_prior
        if beta0 + beta1 * t_first < 0 or beta0 + beta1 * t_last < 0:
            return -math.inf
        theta = priors.theta(alpha)
        means = _conditional_means(beta0, beta1, alpha, theta, taus, deltas, n_prev)
        if means is None or np.any(means <= 0.0):
            return -math.inf
        loglik = float(np.sum(n_curr * np.log(means) - means)) - norm
        return lp_prior + loglik

    return log_post


def log_posterior(params, series, priors, prior_only=False):
    """Log posterior density at params = (beta0, beta1, alpha)."""
    return make_log_posterior(series, priors, prior_only)(np.asarray(params, dtype=float))


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def _diagnostics(chains_arr, rates, names):
    r_hat = mcmc.split_r_hat(chains_arr)
    ess = mcmc.effective_sample_size(chains_arr)
    return {
        "r_hat": {n: float(r) for n, r in zip(names, r_hat)},
        "ess": {n: float(e) for n, e in zip(names, ess)},
        "acceptance_rate": [float(r) for r in rates],
    }


def _run_with_restarts(log_post, make_inits, scales, settings, names):
    iterations = settings.iterations
    warmup = settings.warmup_iters
    last = None
    for attempt in range(settings.max_restarts + 1):
        seed = settings.seed + 1_000_003 * attempt
        inits = make_inits(seed)
        chains_arr, rates = mcmc.sample(
            log_post, inits, iterations, warmup, seed, scales
        )
        diags = _diagnostics(chains_arr, rates, names)
        if all(r <= R_HAT_LIMIT for r in diags["r_hat"].values()):
            return chains_arr, diags, seed
        last = (chains_arr, diags)
        iterations *= 2
        warmup *= 2
    raise ConvergenceError(
        f"r_hat above {R_HAT_LIMIT} after {settings.max_restarts} restarts: "
        f"{last[1]['r_hat']}",
        traces=last[0],
        diagnostics=last[1],
    )


def fit(series, priors, settings=MCMCSettings(), prior_only=False):
    """Posterior for (beta0, beta1, alpha, theta) given a count series."""
    log_post = make_log_posterior(series, priors, prior_only)

    def make_inits(seed):
        rng = np.random.default_rng(seed)
        inits = []
        for _ in range(settings.chains):
            for _ in range(200):
                x = priors.sample(rng)
                if np.isfinite(log_post(x)):
                    inits.append(x)
                    break
            else:
                raise DomainError("could not initialise a chain inside the support")
        return inits

    scales = np.array(
        [
            priors.beta0[1] / 4.0,
            priors.beta1[1] / 4.0,
            (priors.alpha_hi - priors.alpha_lo) / 8.0,
        ]
    )
    names = ["beta0", "beta1", "alpha"]
    chains_arr, diags, seed = _run_with_restarts(
        log_post, make_inits, scales, settings, names
    )
    merged = chains_arr.reshape(-1, 3)
    alpha = merged[:, 2]
    return PosteriorDraws(
        beta0=merged[:, 0],
        beta1=merged[:, 1],
        alpha=alpha,
        theta=priors.theta(alpha),
        chains=settings.chains,
        diagnostics=diags,
        seed=seed,
    )


def fit_arrival_counts(series, settings=MCMCSettings()):
    """Posterior for the arrival trend from monthly arrival counts.

    Counts over [t, t+1) are Poisson with mean beta0 + beta1 (t + 1/2);
    priors are flat, so this is a Poisson regression used to centre the
    occupancy priors.
    """
    ts = series.times()
    ns = series.counts()
    if len(ts) < 2:
        raise DomainError("need at least two months of arrival counts")
    mids = ts + 0.5
    norm = float(special.gammaln(ns + 1.0).sum())

    def log_post(params):
        beta0, beta1 = params
        means = beta0 + beta1 * mids
        if np.any(means <= 0.0):
            return -math.inf
        return float(np.sum(ns * np.log(means) - means)) - norm

    slope, intercept = np.polyfit(mids, ns, 1)

    def make_inits(seed):
        rng = np.random.default_rng(seed)
        inits = []
        for _ in range(settings.chains):
            for _ in range(200):
                x = np.array(
                    [
                        intercept * (1.0 + 0.1 * rng.standard_normal()),
                        slope + 0.1 * (abs(slope) + 1.0) * rng.standard_normal(),
                    ]
                )
                if np.isfinite(log_post(x)):
                    inits.append(x)
                    break
            else:
                raise DomainError("could not initialise a chain inside the support")
        return inits

    mean_count = max(float(ns.mean()), 1.0)
    scales = np.array([math.sqrt(mean_count), math.sqrt(mean_count) / max(ts[-1], 1.0)])
    names = ["beta0", "beta1"]
    chains_arr, diags, seed = _run_with_restarts(
        log_post, make_inits, scales, settings, names
    )
    merged = chains_arr.reshape(-1, 2)
    return PosteriorDraws(
        beta0=merged[:, 0],
        beta1=merged[:, 1],
        alpha=None,
        theta=None,
        chains=settings.chains,
        diagnostics=diags,
        seed=seed,
    )


def prior_from_arrival_fit(arrival_draws, mean_service, sd_scale=10.0):
    """Occupancy priors centred on the arrival-fit posterior, with the
    standard deviations inflated (default 10x) so the occupancy fit can
    explore the parameter space."""
    return PriorSpec(
        beta0=(float(arrival_draws.beta0.mean()), sd_scale * float(arrival_draws.beta0.std(ddof=1))),
        beta1=(float(arrival_draws.beta1.mean()), sd_scale * float(arrival_draws.beta1.std(ddof=1))),
        mean_service=mean_service,
    )


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PredictionSeries:
    """Per-horizon forecast moments with a +/- 2 sd central interval."""

    tau: float
    horizons: tuple
    mean: np.ndarray
    sd: np.ndarray
    mode: str
    class_id: str | None = None
    seed: int | None = None

    @property
    def lo(self):
        return self.mean - 2.0 * self.sd

    @property
    def hi(self):
        return self.mean + 2.0 * self.sd

    def to_json(self):
        return {
            "tau": self.tau,
            "horizons": list(self.horizons),
            "mean": [float(v) for v in self.mean],
            "sd": [float(v) for v in self.sd],
            "lo": [float(v) for v in self.lo],
            "hi": [float(v) for v in self.hi],
            "mode": self.mode,
            "class_id": self.class_id,
        }


def _mixture_moments(means_per_draw):
    """Exact moments of the Poisson mixture over posterior draws.

    The predictive draw is Poisson around each sampled mean, so the
    predictive variance is the mean of the Poisson means plus their
    spread (total-variance decomposition); this is the infinite-sample
    limit of sampling one Poisson value per draw.
    """
    mu = float(np.mean(means_per_draw))
    var = mu + float(np.var(means_per_draw))
    return mu, math.sqrt(var)


def _scenario_means(draws, n_obs, tau, delta, priors_mean_service=None,
                    new_mean_service=None, lambda_scale=1.0):
    """Per-draw conditional means, optionally under an intervention."""
    b0, b1, al, th = draws.beta0, draws.beta1, draws.alpha, draws.theta
    if np.any(b0 + b1 * (tau + delta) < 0):
        raise DomainError(
            "some posterior draws give a negative arrival rate at the horizon; "
            "shorten the horizon or refit"
        )
    p = lp.survival_fraction(b0, b1, al, th, tau, delta)
    if new_mean_service is not None:
        th_new = new_mean_service * (al - 1.0)
        m = lp.new_arrivals_mean(b0, b1, al, th_new, tau, delta)
    else:
        m = lp.new_arrivals_mean(b0, b1, al, th, tau, delta)
    return n_obs * p + lambda_scale * m


def predict(draws, state, horizons, mode="long_term", *, class_id=None,
            horizon_cap=DEFAULT_HORIZON_CAP, refit=None):
    """Forecast moments per horizon (steps of months past the observation).

    long_term: every horizon is computed from the one posterior, chained
    off the observed count. short_term: one-step-ahead with the
    posterior refitted on each realized observation; requires ``refit``
    = (series, priors, settings, actuals) where ``actuals`` supplies the
    realized counts at tau+1 .. tau+q-1.
    """
    if draws.alpha is None:
        raise DomainError("prediction needs a full (beta, alpha, theta) posterior")
    if len(draws) == 0:
        raise DomainError("empty posterior")
    horizons = tuple(int(h) for h in horizons)
    if any(h < 0 for h in horizons):
        raise DomainError("horizons must be non-negative")
    if horizons and max(h for h in horizons) > horizon_cap:
        raise DomainError(
            f"horizon {max(horizons)} beyond the trusted cap of {horizon_cap} "
            "months past the observation (pass horizon_cap to override)"
        )
    if class_id is None:
        if len(state.classes) != 1:
            raise DomainError("class_id required for a multi-class state")
        cls = state.classes[0]
    else:
        cls = state.class_count(class_id)
    tau, n_obs = state.tau, cls.n

    if mode == "long_term":
        mean, sd = [], []
        for h in horizons:
            if h == 0:
                mean.append(float(n_obs))
                sd.append(0.0)
                continue
            ms = _scenario_means(draws, n_obs, tau, float(h))
            mu, sigma = _mixture_moments(ms)
            mean.append(mu)
            sd.append(sigma)
        return PredictionSeries(
            tau, horizons, np.array(mean), np.array(sd), mode, cls.class_id, draws.seed
        )

    if mode != "short_term":
        raise DomainError(f"unknown mode {mode!r}")
    if refit is None:
        raise DomainError("short_term mode requires refit=(series, priors, settings, actuals)")
    series, priors, settings, actuals = refit
    mean, sd = [], []
    cur_draws = draws
    cur_series = series
    for h in sorted(horizons):
        if h == 0:
            mean.append(float(n_obs))
            sd.append(0.0)
            continue
        # posterior conditioned on everything realized before tau + h
        target_t = tau + h
        prev_t = target_t - 1
        while cur_series.last()[0] < prev_t:
            t_next = cur_series.last()[0] + 1
            cur_series = cur_series.extended(t_next, actuals.count_at(t_next))
            cur_draws = fit(cur_series, priors, settings)
        n_prev = cur_series.count_at(prev_t)
        ms = _scenario_means(cur_draws, n_prev, float(prev_t), 1.0)
        mu, sigma = _mixture_moments(ms)
        mean.append(mu)
        sd.append(sigma)
    return PredictionSeries(
        tau, tuple(sorted(horizons)), np.array(mean), np.array(sd), mode,
        cls.class_id, draws.seed,
    )


def rmse(pred, actual):
    """Root mean square error of the forecast against realized counts."""
    errors = []
    for h, mu in zip(pred.horizons, pred.mean):
        t = int(pred.tau) + h
        try:
            n = actual.count_at(t)
        except DomainError as exc:
            raise DomainError(f"no realized count at month {t} for horizon {h}") from exc
        errors.append((n - mu) ** 2)
    if not errors:
        raise DomainError("no aligned horizons")
    return math.sqrt(sum(errors) / len(errors))


# ---------------------------------------------------------------------------
# quarterly-to-monthly synthesis
# ---------------------------------------------------------------------------

def synthesize_monthly(quarterly, seed, class_id="series", origin=None):
    """Monthly counts from quarterly totals.

    Each quarterly total becomes a monthly mean anchor (total / 3) at
    the quarter's middle month; a GCV-smoothed natural cubic spline
    through the anchors is evaluated at every month; Gaussian noise with
    the residual standard error of a straight-line fit to the anchors is
    added; counts are rounded and floored at zero. Deterministic given
    the seed.
    """
    quarterly = list(quarterly)
    if len(quarterly) < 4:
        raise DomainError("need at least four quarters")
    counts = np.array([float(c) for _, c in quarterly])
    anchors_x = 3.0 * np.arange(len(quarterly)) + 1.0
    anchors_y = counts / 3.0

    if len(anchors_x) >= 5:
        # natural cubic smoothing spline, smoothing chosen by GCV
        spline = interpolate.make_smoothing_spline(anchors_x, anchors_y)
    else:
        # below the GCV minimum the smoother has no freedom to smooth;
        # interpolate the anchors with a natural cubic instead
        spline = interpolate.CubicSpline(anchors_x, anchors_y, bc_type="natural")
    months = np.arange(3 * len(quarterly), dtype=float)
    smooth = spline(months)

    coeffs = np.polyfit(anchors_x, anchors_y, 1)
    resid = anchors_y - np.polyval(coeffs, anchors_x)
    rse = math.sqrt(float(resid @ resid) / max(len(anchors_y) - 2, 1))

    rng = np.random.default_rng(seed)
    noisy = smooth + rng.normal(0.0, rse, size=len(months))
    values = np.maximum(np.rint(noisy), 0.0).astype(int)
    return CountSeries(
        class_id,
        tuple((int(t), int(v)) for t, v in zip(months.astype(int), values)),
        provenance="synthesized",
        origin=origin,
    )
