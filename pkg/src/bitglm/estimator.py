"""Maximum-likelihood fitting of the censored GLM.

A damped Newton ascent on the censored log-likelihood with analytic score
and Hessian.  When the negated Hessian is not positive definite (the
censored log-likelihood is not concave for every family) a diagonal
Levenberg shift is escalated until it is, falling back to plain gradient
ascent past a shift of 1e6.  Iterates never leave the parameter domain:
steps are halved until feasible.

Multistart: a method-of-moments style initial point per family plus
seeded multiplicative jitters; the winner is the candidate with the
highest log-likelihood, ties broken by smaller parameter norm and then
lexicographic order, so results are reproducible bit for bit.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from . import likelihood, models
from ._gauss import norm_ppf
from .exceptions import DegenerateLikelihood, NonIdentifiable, NumericalError
from .types import ParameterVector, satisfies_domain

#: Iterate norm beyond which a still-increasing likelihood is declared monotone.
DIVERGENCE_NORM = 1e8
#: Largest Levenberg shift before falling back to gradient ascent.
MAX_SHIFT = 1e6
#: Smallest line-search damping before giving up on a direction.
MIN_DAMPING = 1e-14


@dataclass(frozen=True)
class FitConfig:
    """Solver settings; the defaults suit all bundled model families."""

    max_iterations: int = 200
    gradient_tolerance: float = 1e-9
    initial_points: tuple = None  # explicit starts; None means auto
    backtracking_factor: float = 0.5
    sufficient_increase: float = 1e-4
    multistart_count: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (self.gradient_tolerance > 0):
            raise ValueError("gradient_tolerance must be > 0")
        if not (0 < self.backtracking_factor < 1):
            raise ValueError("backtracking_factor must lie in (0, 1)")
        if self.multistart_count < 1:
            raise ValueError("multistart_count must be >= 1")


@dataclass(frozen=True)
class FitResult:
    """Outcome of a fit.

    ``observed_information`` is the negated Hessian at the estimate;
    ``status`` is one of "converged", "max-iterations",
    "boundary-divergence" (the estimate slid into a domain wall), or
    "non-identifiable" (only seen inside failure reports; fit raises).
    """

    theta_hat: ParameterVector
    converged: bool
    iterations: int
    final_score_norm: float
    log_likelihood: float
    observed_information: np.ndarray
    status: str


def auto_initialize(model, data, multistart_count=5, seed=0):
    """Starting points: one method-of-moments style inversion per family
    plus seeded multiplicative log-normal jitters (scale 0.5).

    Returns a list of ``multistart_count`` parameter arrays, the
    deterministic base point first.
    """
    base = _moments_start(model, data)
    starts = [base]
    rng = np.random.default_rng(np.random.SeedSequence([int(seed)]))
    while len(starts) < multistart_count:
        jitter = np.exp(0.5 * rng.standard_normal(base.shape[0]))
        starts.append(base * jitter)
    return starts


def _bit_fraction(data):
    n = data.n
    p = float(np.mean(data.bits > 0))
    return min(max(p, 1.0 / (n + 1.0)), n / (n + 1.0))


def _moments_start(model, data):
    p = _bit_fraction(data)
    mean_tau = float(np.mean(data.designs.taus))
    if isinstance(model, models.GaussianCase1):
        w = data.designs.V[:, 0, 0] * model.sigma**2
        mean_w = float(np.mean(w))
        if abs(mean_w) < 1e-8:
            return np.array([0.0])
        alpha0 = (mean_tau - model.sigma * float(norm_ppf(p))) / mean_w
        return np.array([alpha0])
    if isinstance(model, models.GaussianCase2):
        spread = float(np.mean((data.designs.taus - data.designs.aux) ** 2))
        return np.array([1.0 / max(spread, 1e-4)])
    if isinstance(model, models.GaussianCase3):
        w = data.designs.V[:, 0, 0]
        mean_w = float(np.mean(w))
        if abs(mean_w) < 1e-8:
            alpha0 = 0.0
        else:
            alpha0 = (mean_tau - float(norm_ppf(p))) / mean_w
        # sigma0 = 1, so theta = (alpha0, 1)
        return np.array([alpha0, 1.0])
    if isinstance(model, models.PoissonModel):
        v = data.designs.V[:, 0, 0]
        vbar = float(np.mean(v))
        scale = float(np.mean(np.abs(v)))
        # mixed-sign covariates can average to ~0 and catapult the start
        if abs(vbar) < max(1e-8, 0.1 * scale):
            vbar = scale if scale > 1e-8 else 1.0
        return np.array([math.log(max(0.5, mean_tau)) / vbar])
    # generic fallback: ones, sign-adjusted to the domain
    out = np.ones(model.k)
    for j, kind in enumerate(model.domain):
        if kind == "negative":
            out[j] = -1.0
    return out


def _check_identifiable(model, data):
    V = data.designs.V
    for j in range(data.designs.k):
        if np.all(V[:, :, j] == 0.0):
            raise NonIdentifiable(
                f"parameter direction {j} is unconstrained (all designs zero there)"
            )
    # monotone-likelihood detection through the effective push direction of
    # each bit; exact for the scalar families, conservative for the rest
    lead = V[:, 0, 0]
    nz = lead != 0.0
    if data.designs.k == 1 and data.designs.d == 1:
        s = data.bits[nz] * np.sign(lead[nz])
        if s.size and np.all(s == s[0]):
            raise NonIdentifiable(
                "all observations push the same parameter direction "
                "(one-sided bits); the likelihood is monotone and no finite "
                "maximizer exists"
            )
    elif np.all(data.bits == data.bits[0]):
        s = data.bits[nz] * np.sign(lead[nz])
        if s.size == 0 or np.all(s == s[0]):
            raise NonIdentifiable(
                "all observed bits are equal; the likelihood is monotone and "
                "no finite maximizer exists"
            )


def _safe_ll(model, data, theta):
    try:
        return likelihood.log_likelihood(model, theta, data)
    except (DegenerateLikelihood, NumericalError):
        return -np.inf


def _ascent_direction(neg_hess, grad):
    """Newton direction with escalating diagonal shift; gradient fallback."""
    k = neg_hess.shape[0]
    shift = 0.0
    scale = max(1.0, float(np.trace(neg_hess)) / k)
    while True:
        try:
            c, low = sla.cho_factor(neg_hess + shift * np.eye(k), check_finite=False)
            return sla.cho_solve((c, low), grad, check_finite=False)
        except np.linalg.LinAlgError:
            pass
        shift = max(shift * 10.0, 1e-8 * scale) if shift else 1e-8 * scale
        if shift > MAX_SHIFT:
            return grad.copy()


def _newton(model, data, theta0, config):
    theta = np.asarray(theta0, dtype=float).copy()
    if not satisfies_domain(theta, model.domain):
        raise DegenerateLikelihood("starting point outside the parameter domain")
    ll, grad, hess = likelihood.evaluate(model, theta, data)  # may raise; caller skips start

    status = "max-iterations"
    gnorm = np.inf
    iterations = 0
    stalled = 0
    for iterations in range(1, config.max_iterations + 1):
        gnorm = float(np.max(np.abs(grad)))
        if gnorm <= config.gradient_tolerance:
            status = "converged"
            break
        direction = _ascent_direction(-hess, grad)
        slope = float(grad @ direction)
        if slope <= 0.0:  # fallback already guarantees ascent; belt and braces
            direction = grad.copy()
            slope = float(grad @ grad)

        t = 1.0
        while not satisfies_domain(theta + t * direction, model.domain):
            t *= config.backtracking_factor
            if t < MIN_DAMPING:
                status = "boundary-divergence"
                break
        if status == "boundary-divergence":
            break

        accepted = False
        while t >= MIN_DAMPING:
            cand = theta + t * direction
            cand_ll = _safe_ll(model, data, cand)
            if cand_ll >= ll + config.sufficient_increase * t * slope:
                gain = cand_ll - ll
                theta = cand
                accepted = True
                break
            t *= config.backtracking_factor
        if not accepted:
            break  # no measurable progress left at this precision

        ll, grad, hess = likelihood.evaluate(model, theta, data)

        # progress below the float resolution of the log-likelihood for many
        # consecutive steps means the line search has gone blind; give slow
        # shifted-Newton crawls room, but do not churn to the iteration cap
        if gain <= 64.0 * np.finfo(float).eps * max(1.0, abs(ll)):
            stalled += 1
            if stalled >= 25:
                break
        else:
            stalled = 0

        if float(np.linalg.norm(theta)) > DIVERGENCE_NORM:
            raise NonIdentifiable(
                "iterates diverged with increasing likelihood; the data do "
                "not pin down a finite maximizer"
            )

    return theta, ll, status, iterations, gnorm


def fit(model, data, config=None):
    """Maximize the censored log-likelihood over the model's domain.

    Runs every start from ``config.initial_points`` (or auto_initialize),
    then deterministically selects the best candidate.  Raises
    NonIdentifiable when the data admit no finite maximizer and propagates
    degenerate-data errors.
    """
    config = config or FitConfig()
    _check_identifiable(model, data)

    if config.initial_points is not None:
        starts = [np.atleast_1d(np.asarray(p, dtype=float)) for p in config.initial_points]
        if not starts:
            raise ValueError("initial_points must not be empty")
    else:
        starts = auto_initialize(model, data, config.multistart_count, config.seed)

    candidates = []
    last_error = None
    for theta0 in starts:
        try:
            candidates.append(_newton(model, data, theta0, config))
        except (DegenerateLikelihood, NumericalError) as err:
            last_error = err
    if not candidates:
        # every start was infeasible (zero-probability bits there); pull the
        # starts toward a neutral interior point until the likelihood is
        # finite, then try again
        anchor = np.array(
            [1.0 if k == "positive" else -1.0 if k == "negative" else 0.0 for k in model.domain]
        )
        for theta0 in starts:
            cur = np.asarray(theta0, dtype=float)
            for _ in range(60):
                cur = 0.5 * (cur + anchor)
                if np.isfinite(_safe_ll(model, data, cur)):
                    try:
                        candidates.append(_newton(model, data, cur, config))
                    except (DegenerateLikelihood, NumericalError) as err:
                        last_error = err
                    break
    if not candidates:
        raise last_error

    def rank(c):
        theta, ll, _, _, _ = c
        return (-ll, float(np.linalg.norm(theta)), tuple(theta))

    theta, ll, status, iterations, gnorm = min(candidates, key=rank)

    # recompute final diagnostics at the winner
    ll, grad, hess = likelihood.evaluate(model, theta, data)
    gnorm = float(np.max(np.abs(grad)))
    observed = -hess
    observed.setflags(write=False)
    # converged means a stationary point that is locally a maximum: tiny
    # score and an (up to rounding) PSD observed information
    converged = (
        status == "converged"
        and gnorm <= config.gradient_tolerance
        and float(np.linalg.eigvalsh(observed)[0]) >= -1e-8
    )
    if status == "converged" and not converged:
        status = "max-iterations"
    return FitResult(
        theta_hat=model.parameter_vector(theta),
        converged=converged,
        iterations=iterations,
        final_score_norm=gnorm,
        log_likelihood=ll,
        observed_information=observed,
        status=status,
    )
