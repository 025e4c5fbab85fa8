"""Monte Carlo machinery: data generation, MSE-versus-n experiments,
asymptotic-normality checks, and the consistency-condition checker.

Reproducibility contract: every trial draws from its own substream keyed
by (seed, sample size, trial index), so results do not depend on
execution order or worker count; trial outcomes are reduced in trial
order.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import fisher, models
from .estimator import FitConfig, fit
from .exceptions import (
    ConfigError,
    DegenerateLikelihood,
    DegenerateThreshold,
    ExperimentFailure,
    NonIdentifiable,
)
from .types import CensoredDataset, DesignSet


def _substream(seed, n, trial):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(n), int(trial)]))


# ---------------------------------------------------------------------------
# Design-generation rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightsRule:
    """How per-observation known constants are produced.

    kinds: "constant" (value), "list" (values, cycled to length n),
    "iid-uniform" (low, high).  For the known-means Gaussian family this
    rule supplies the means.
    """

    kind: str
    value: float = None
    values: tuple = None
    low: float = None
    high: float = None

    def draw(self, n, rng):
        if self.kind == "constant":
            return np.full(n, float(self.value))
        if self.kind == "list":
            vals = np.asarray(self.values, dtype=float)
            reps = int(np.ceil(n / vals.shape[0]))
            return np.tile(vals, reps)[:n]
        if self.kind == "iid-uniform":
            return rng.uniform(float(self.low), float(self.high), size=n)
        raise ConfigError(f"unknown weights rule {self.kind!r}")


@dataclass(frozen=True)
class ThresholdRule:
    """How thresholds are produced: "fixed" (value), "two-point"
    (values + probabilities), "iid-uniform" (low, high) or "iid-normal"
    (mu, sd)."""

    kind: str
    value: float = None
    values: tuple = None
    probabilities: tuple = None
    low: float = None
    high: float = None
    mu: float = None
    sd: float = None

    def draw(self, n, rng):
        if self.kind == "fixed":
            return np.full(n, float(self.value))
        if self.kind == "two-point":
            vals = np.asarray(self.values, dtype=float)
            probs = np.asarray(self.probabilities, dtype=float)
            if vals.shape != probs.shape or vals.ndim != 1:
                raise ConfigError("two-point rule needs matching values/probabilities")
            if not math.isclose(float(probs.sum()), 1.0, rel_tol=0, abs_tol=1e-12):
                raise ConfigError("two-point probabilities must sum to 1")
            return rng.choice(vals, size=n, p=probs)
        if self.kind == "iid-uniform":
            return rng.uniform(float(self.low), float(self.high), size=n)
        if self.kind == "iid-normal":
            return rng.normal(float(self.mu), float(self.sd), size=n)
        raise ConfigError(f"unknown threshold rule {self.kind!r}")


# ---------------------------------------------------------------------------
# Experiment configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """A repeated-trial estimation experiment.

    ``true_params`` uses the family's reporting parameters, e.g.
    {"alpha": 2, "sigma": 1} for the two-parameter Gaussian or
    {"theta": 0.3} for the Poisson family.  ``error_metric`` selects the
    coordinates the squared error is accumulated in.
    """

    model: str
    true_params: dict
    weights: WeightsRule
    thresholds: ThresholdRule
    sample_sizes: tuple
    trials: int
    seed: int
    error_metric: str = "moment-coordinates"
    estimator: str = "censored"
    fit: FitConfig = field(default_factory=lambda: FitConfig(multistart_count=1))
    max_failure_fraction: float = 0.05

    def __post_init__(self):
        if self.model not in models.REGISTRY:
            raise ConfigError(f"unknown model {self.model!r}")
        sizes = tuple(int(n) for n in self.sample_sizes)
        object.__setattr__(self, "sample_sizes", sizes)
        if any(b <= a for a, b in zip(sizes, sizes[1:])) or not sizes:
            raise ConfigError("sample sizes must be strictly increasing and non-empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.error_metric not in ("moment-coordinates", "natural-coordinates"):
            raise ConfigError(f"unknown error metric {self.error_metric!r}")
        if self.estimator not in ("censored", "uncensored"):
            raise ConfigError(f"unknown estimator {self.estimator!r}")


def family_and_theta(config, n, rng):
    """Instantiate (family, designs, theta0) for one trial of size n."""
    w = config.weights.draw(n, rng)
    taus = config.thresholds.draw(n, rng)
    p = config.true_params
    name = config.model
    if name == "gaussian-case1":
        family = models.GaussianCase1(w, sigma=float(p["sigma"]))
        theta0 = np.array([float(p["alpha"])])
    elif name == "gaussian-case2":
        family = models.GaussianCase2(means=w)
        theta0 = np.array([1.0 / float(p["sigma"]) ** 2])
    elif name == "gaussian-case3":
        family = models.GaussianCase3(w)
        theta0 = models.GaussianCase3.natural_from_alpha_sigma2(
            float(p["alpha"]), float(p["sigma"]) ** 2
        )
    elif name == "poisson":
        family = models.PoissonModel(covariates=w)
        theta0 = np.array([float(p["theta"])])
    else:  # unreachable; config validated
        raise ConfigError(f"unknown model {name!r}")
    return family, family.design_set(taus), theta0


# ---------------------------------------------------------------------------
# Data generation
# ---------------------------------------------------------------------------

def generate_and_censor(model, theta0, designs, seed):
    """Draw one observation per design at theta0 and censor to bits,
    +1 where the draw lands at or below its threshold.

    ``seed`` may be an integer or a ready Generator; results are
    deterministic given the seed.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    designs = DesignSet.coerce(designs)
    x = model.sample(np.asarray(theta0, dtype=float), designs, rng)
    bits = np.where(x <= designs.taus, 1, -1)
    return CensoredDataset(bits, designs)


# ---------------------------------------------------------------------------
# Uncensored-baseline estimators (closed-form MLEs on the raw draws)
# ---------------------------------------------------------------------------

def uncensored_mle(family, designs, x):
    """Maximum-likelihood estimate from the raw observations.

    Closed form for the Gaussian families (sample mean; biased, i.e.
    MLE-convention, variance) and a one-dimensional Newton solve for the
    Poisson rate link.
    """
    designs = DesignSet.coerce(designs)
    x = np.asarray(x, dtype=float)
    if isinstance(family, models.GaussianCase1):
        w = designs.V[:, 0, 0] * family.sigma**2
        denom = float(w @ w)
        if denom == 0.0:
            raise NonIdentifiable("all weights are zero")
        return np.array([float(w @ x) / denom])
    if isinstance(family, models.GaussianCase2):
        ss = float(np.mean((x - designs.aux) ** 2))
        if ss <= 0.0:
            raise NonIdentifiable("zero empirical variance")
        return np.array([1.0 / ss])
    if isinstance(family, models.GaussianCase3):
        w = designs.V[:, 0, 0]
        denom = float(w @ w)
        if denom == 0.0:
            raise NonIdentifiable("all weights are zero")
        alpha = float(w @ x) / denom
        sigma2 = float(np.mean((x - w * alpha) ** 2))
        if sigma2 <= 0.0:
            raise NonIdentifiable("zero empirical variance")
        return models.GaussianCase3.natural_from_alpha_sigma2(alpha, sigma2)
    if isinstance(family, models.PoissonModel):
        v = designs.V[:, 0, 0]
        target = float(v @ x)
        if np.all(v == v[0]) and v[0] != 0.0:
            mean_x = float(np.mean(x))
            if mean_x <= 0.0:
                raise NonIdentifiable("all counts are zero")
            return np.array([math.log(mean_x) / v[0]])
        theta = 0.0
        for _ in range(100):
            lam = np.exp(v * theta)
            g = target - float(v @ lam)
            h = float((v * v) @ lam)
            if h <= 0.0:
                raise NonIdentifiable("rate link carries no information")
            step = g / h
            theta += step
            if abs(step) < 1e-12:
                return np.array([theta])
        raise NonIdentifiable("rate equation admits no finite root")
    raise TypeError(f"no uncensored baseline for {type(family).__name__}")


# ---------------------------------------------------------------------------
# MSE experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialOutcome:
    n: int
    theta_hat: np.ndarray
    squared_error: float
    status: str


@dataclass(frozen=True)
class MseRow:
    n: int
    mse: float
    mc_stderr: float
    failures: int


@dataclass(frozen=True)
class MseTable:
    """One row per sample size, in increasing-n order."""

    rows: tuple
    trials: int
    error_metric: str

    def to_csv(self):
        lines = ["n,mse,mc_stderr,failures"]
        for r in self.rows:
            lines.append(f"{r.n},{r.mse!r},{r.mc_stderr!r},{r.failures}")
        return "\n".join(lines) + "\n"

    def loglog_slope(self):
        """Least-squares slope of log(mse) against log(n)."""
        ln = np.log([r.n for r in self.rows])
        lm = np.log([r.mse for r in self.rows])
        a = np.vstack([np.ones_like(ln), ln]).T
        coef, *_ = np.linalg.lstsq(a, lm, rcond=None)
        return float(coef[1])


def _squared_error(family, theta_hat, theta0, metric):
    if metric == "natural-coordinates":
        diff = theta_hat - theta0
    else:
        diff = family.to_moment(theta_hat) - family.to_moment(theta0)
    return float(diff @ diff)


def run_trial(config, n, trial):
    """One estimation trial; returns a TrialOutcome (never raises on the
    per-trial failure modes, which are reported through ``status``)."""
    rng = _substream(config.seed, n, trial)
    family, designs, theta0 = family_and_theta(config, n, rng)
    x = family.sample(theta0, designs, rng)
    try:
        if config.estimator == "uncensored":
            theta_hat = uncensored_mle(family, designs, x)
            status = "converged"
        else:
            bits = np.where(x <= designs.taus, 1, -1)
            data = CensoredDataset(bits, designs)
            result = fit(family, data, config.fit)
            if not result.converged:
                return TrialOutcome(n, result.theta_hat.values, math.nan, result.status)
            theta_hat = result.theta_hat.values
            status = "converged"
    except (NonIdentifiable, DegenerateLikelihood, DegenerateThreshold) as err:
        return TrialOutcome(n, None, math.nan, type(err).__name__)
    err = _squared_error(family, theta_hat, theta0, config.error_metric)
    return TrialOutcome(n, theta_hat, err, status)


def run_mse_experiment(config, collect_outcomes=False):
    """Accumulate mean squared estimation error over repeated trials.

    Non-converged trials are excluded from the average and counted in the
    ``failures`` column; the experiment aborts with ExperimentFailure if
    exclusions exceed ``config.max_failure_fraction``.
    """
    rows = []
    outcomes = []
    for n in config.sample_sizes:
        errs = []
        failures = 0
        for trial in range(config.trials):
            outcome = run_trial(config, n, trial)
            if collect_outcomes:
                outcomes.append(outcome)
            if outcome.status == "converged":
                errs.append(outcome.squared_error)
            else:
                failures += 1
        if failures > config.max_failure_fraction * config.trials:
            raise ExperimentFailure(
                f"{failures}/{config.trials} trials failed at n={n}, above the "
                f"{config.max_failure_fraction:.0%} budget"
            )
        m = len(errs)
        mse = float(np.mean(errs))
        stderr = float(np.std(errs, ddof=1) / math.sqrt(m)) if m > 1 else math.nan
        rows.append(MseRow(n=n, mse=mse, mc_stderr=stderr, failures=failures))
    table = MseTable(rows=tuple(rows), trials=config.trials, error_metric=config.error_metric)
    return (table, outcomes) if collect_outcomes else table


# ---------------------------------------------------------------------------
# Asymptotic normality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalityReport:
    """Empirical distribution of sqrt(n) (theta_hat - theta0) against the
    inverse per-observation information."""

    n: int
    trials: int
    failures: int
    empirical_cov: np.ndarray
    reference_cov: np.ndarray
    rel_frobenius: float
    skewness: np.ndarray
    excess_kurtosis: np.ndarray
    abs_third_moment: np.ndarray


def check_asymptotic_normality(config, n, trials):
    """Fit ``trials`` independent datasets of size n and compare the
    scaled estimator covariance with the information-based prediction.

    Raises ExperimentFailure if more than ``config.max_failure_fraction``
    of the trials fail to converge; requires at least two trials.
    """
    if trials < 2:
        raise ValueError("need at least 2 trials to estimate a covariance")
    estimates = []
    failures = 0
    info_sum = None
    theta0 = None
    for trial in range(trials):
        rng = _substream(config.seed, n, trial)
        family, designs, theta0 = family_and_theta(config, n, rng)
        data = generate_and_censor(family, theta0, designs, rng)
        info = fisher.fim_censored(family, theta0, designs).matrix / n
        info_sum = info if info_sum is None else info_sum + info
        try:
            result = fit(family, data, config.fit)
        except (NonIdentifiable, DegenerateLikelihood, DegenerateThreshold):
            failures += 1
            continue
        if not result.converged:
            failures += 1
            continue
        estimates.append(result.theta_hat.values)
    if failures > config.max_failure_fraction * trials:
        raise ExperimentFailure(
            f"{failures}/{trials} trials failed, above the "
            f"{config.max_failure_fraction:.0%} budget"
        )
    scaled = math.sqrt(n) * (np.array(estimates) - theta0)
    emp = np.atleast_2d(np.cov(scaled.T, ddof=1))
    ref = np.linalg.inv(info_sum / trials)
    rel = float(np.linalg.norm(emp - ref) / np.linalg.norm(ref))
    centered = scaled - scaled.mean(axis=0)
    std = scaled.std(axis=0, ddof=0)
    u = centered / std
    return NormalityReport(
        n=n,
        trials=trials,
        failures=failures,
        empirical_cov=emp,
        reference_cov=ref,
        rel_frobenius=rel,
        skewness=np.mean(u**3, axis=0),
        excess_kurtosis=np.mean(u**4, axis=0) - 3.0,
        abs_third_moment=np.mean(np.abs(u) ** 3, axis=0),
    )


# ---------------------------------------------------------------------------
# Consistency / normality sufficient conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionsReport:
    """Witnessed values for the three sufficient conditions: bounded third
    moments of T, bounded designs, and a positive-definite average
    information with finite determinant (plus a prefix-stability probe)."""

    max_third_abs_moment: float
    max_design_norm: float
    avg_information: np.ndarray
    min_eigenvalue: float
    determinant: float
    prefix_drift: float
    moments_bounded: bool
    designs_bounded: bool
    information_positive: bool

    @property
    def passed(self):
        return self.moments_bounded and self.designs_bounded and self.information_positive


def check_consistency_conditions(model, theta0, designs, eig_tol=1e-10):
    """Evaluate the three sufficient conditions at theta0 for the given
    designs; the report carries the witnessed quantities per clause."""
    designs = DesignSet.coerce(designs)
    theta0 = np.asarray(theta0, dtype=float)
    n = designs.n

    t3 = model.third_abs_moment_T(theta0, designs)
    max_t3 = float(np.max(t3))

    # matrix infinity norm per design: max absolute row sum
    vnorm = float(np.max(np.sum(np.abs(designs.V), axis=2)))

    avg = fisher.fim_censored(model, theta0, designs).matrix / n
    eigs = np.linalg.eigvalsh(avg)
    det = fisher._det_small(avg)

    if n >= 2:
        half = designs.subset(slice(0, n // 2))
        avg_half = fisher.fim_censored(model, theta0, half).matrix / half.n
        prefix_drift = float(
            np.linalg.norm(avg - avg_half) / max(np.linalg.norm(avg), 1e-300)
        )
    else:
        prefix_drift = math.nan

    return ConditionsReport(
        max_third_abs_moment=max_t3,
        max_design_norm=vnorm,
        avg_information=avg,
        min_eigenvalue=float(eigs[0]),
        determinant=float(det),
        prefix_drift=prefix_drift,
        moments_bounded=bool(np.isfinite(max_t3)),
        designs_bounded=bool(np.isfinite(vnorm)),
        information_positive=bool(eigs[0] > eig_tol and np.isfinite(det)),
    )
