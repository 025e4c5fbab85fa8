"""Concrete model families with closed-form conditional moments and
closed-form censored Fisher information.

Four families ship:

* ``gaussian-case1`` -- N(w_i * alpha, sigma^2), known sigma, theta = alpha.
* ``gaussian-case2`` -- N(mu_i, sigma^2), known means, theta = 1/sigma^2.
* ``gaussian-case3`` -- N(w_i * alpha, sigma^2), both unknown, natural
  coordinates theta = (alpha/sigma^2, 1/sigma^2).
* ``poisson``        -- Poisson(exp(v_i * theta)).

Each Gaussian family reduces to the standardized threshold
z = (tau - mu)/sigma and the signed hazard ratio c = b*pdf(z)/P(B=b);
every conditional deviation below is a polynomial in (z, c) times powers
of sigma, which is what keeps the far-tail evaluations stable.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import _gauss, _poisson
from .exceptions import DegenerateThreshold, DomainError, NumericalError
from .families import ModelFamily
from .types import DesignSet


def _as_1d(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# Gaussian: unknown mean, known variance
# ---------------------------------------------------------------------------

class GaussianCase1(ModelFamily):
    """X_i = w_i * alpha + noise, noise ~ N(0, sigma^2) with sigma known.

    Sufficient statistic T = x, natural parameter eta_i = (w_i/sigma^2) * alpha.
    """

    name = "gaussian-case1"
    d = 1
    k = 1

    def __init__(self, weights, sigma):
        self.weights = _as_1d(weights)
        self.sigma = float(sigma)
        if not self.sigma > 0:
            raise DomainError("sigma must be strictly positive")
        if not np.all(np.isfinite(self.weights)):
            raise DomainError("weights must be finite")

    @property
    def domain(self):
        return ("unbounded",)

    def design_set(self, taus):
        taus = _as_1d(taus)
        if taus.shape != self.weights.shape:
            raise ValueError("need one threshold per weight")
        V = (self.weights / self.sigma**2).reshape(-1, 1, 1)
        return DesignSet(V, taus)

    def check_designs(self, designs):
        DesignSet.coerce(designs)  # support is all of R; any finite tau is interior

    def _mu_z(self, theta, designs):
        theta, designs = self._coerce(theta, designs)
        eta = designs.natural_params(theta)[:, 0]
        mu = self.sigma**2 * eta
        z = (designs.taus - mu) / self.sigma
        return mu, z

    def log_partition(self, theta, designs):
        theta, designs = self._coerce(theta, designs)
        eta = designs.natural_params(theta)[:, 0]
        return 0.5 * self.sigma**2 * eta**2

    def log_base_measure(self, x, designs):
        x = _as_1d(x)
        return -0.5 * x**2 / self.sigma**2 - 0.5 * math.log(2 * math.pi * self.sigma**2)

    def prob_leq(self, theta, designs):
        _, z = self._mu_z(theta, designs)
        return _gauss.norm_cdf(z)

    def mean_T(self, theta, designs):
        mu, _ = self._mu_z(theta, designs)
        return mu[:, None]

    def cov_T(self, theta, designs):
        n = DesignSet.coerce(designs).n
        return np.full((n, 1, 1), self.sigma**2)

    def cond_mean_dev_T(self, theta, designs, bits):
        _, z = self._mu_z(theta, designs)
        c = _gauss.signed_hazard(z, bits)
        return (-self.sigma * c)[:, None]

    def cond_cov_dev_T(self, theta, designs, bits):
        _, z = self._mu_z(theta, designs)
        c = _gauss.signed_hazard(z, bits)
        return (-self.sigma**2 * c * (z + c))[:, None, None]

    def cond_devs_T(self, theta, designs, bits):
        _, z = self._mu_z(theta, designs)
        c = _gauss.signed_hazard(z, bits)
        mean_dev = (-self.sigma * c)[:, None]
        cov_dev = (-self.sigma**2 * c * (z + c))[:, None, None]
        return mean_dev, cov_dev

    def third_central_T(self, theta, designs):
        n = DesignSet.coerce(designs).n
        return np.zeros((n, 1, 1, 1))

    def cond_third_central_T(self, theta, designs, bits):
        _, z = self._mu_z(theta, designs)
        m1, m2, m3 = _gauss.truncated_std_moments(z, bits, 3)
        central = m3 - 3.0 * m1 * m2 + 2.0 * m1**3
        return (self.sigma**3 * central)[:, None, None, None]

    def third_abs_moment_T(self, theta, designs):
        mu, _ = self._mu_z(theta, designs)
        return _gauss.abs_third_moment(mu, self.sigma)

    def sample(self, theta, designs, rng):
        mu, _ = self._mu_z(theta, designs)
        return mu + self.sigma * rng.standard_normal(mu.shape[0])

    def moment_labels(self):
        return ("alpha",)


def case1_fim(model, alpha, taus):
    """Censored information for the known-variance Gaussian mean,
    sum of w^2 * pdf^2 / (F * (1 - F)) over observations."""
    taus = _as_1d(taus)
    z = (taus - model.weights * float(alpha)) / model.sigma
    terms = model.weights**2 * _gauss.fim_weight(z) / model.sigma**2
    return float(math.fsum(terms))


def case1_uncensored_fim(model):
    """Information from the raw observations: sum of w^2 / sigma^2."""
    return float(math.fsum(model.weights**2)) / model.sigma**2


def case1_optimal_thresholds(model, alpha):
    """Thresholds maximizing each censored-information term: tau_i = w_i * alpha.

    At these thresholds the censored information equals
    (2 / (pi * sigma^2)) * sum(w^2), i.e. a fraction 2/pi of the
    uncensored information.
    """
    return model.weights * float(alpha)


# ---------------------------------------------------------------------------
# Gaussian: known mean, unknown variance
# ---------------------------------------------------------------------------

class GaussianCase2(ModelFamily):
    """X_i ~ N(mu_i, sigma^2) with known means, theta = 1/sigma^2 > 0.

    Sufficient statistic T = (x - mu_i)^2, per-observation design -1/2.
    The known means ride along as the designs' ``aux`` column.
    """

    name = "gaussian-case2"
    d = 1
    k = 1

    def __init__(self, means):
        self.means = _as_1d(means)
        if not np.all(np.isfinite(self.means)):
            raise DomainError("means must be finite")

    @property
    def domain(self):
        return ("positive",)

    def design_set(self, taus):
        taus = _as_1d(taus)
        if taus.shape != self.means.shape:
            raise ValueError("need one threshold per mean")
        V = np.full((taus.shape[0], 1, 1), -0.5)
        return DesignSet(V, taus, aux=self.means)

    def check_designs(self, designs):
        designs = DesignSet.coerce(designs)
        if designs.aux is None:
            raise DomainError("gaussian-case2 designs must carry the known means as aux")

    def _sigma_z(self, theta, designs):
        theta, designs = self._coerce(theta, designs)
        self.check_designs(designs)
        sigma2 = 1.0 / theta[0]
        sigma = math.sqrt(sigma2)
        z = (designs.taus - designs.aux) / sigma
        return sigma, z

    def log_partition(self, theta, designs):
        theta, designs = self._coerce(theta, designs)
        eta = designs.natural_params(theta)[:, 0]
        return -0.5 * np.log(np.abs(2.0 * eta))

    def log_base_measure(self, x, designs):
        x = _as_1d(x)
        return np.full_like(x, -0.5 * math.log(2 * math.pi))

    def prob_leq(self, theta, designs):
        _, z = self._sigma_z(theta, designs)
        return _gauss.norm_cdf(z)

    def mean_T(self, theta, designs):
        sigma, z = self._sigma_z(theta, designs)
        return np.full((z.shape[0], 1), sigma**2)

    def cov_T(self, theta, designs):
        sigma, z = self._sigma_z(theta, designs)
        return np.full((z.shape[0], 1, 1), 2.0 * sigma**4)

    def cond_mean_dev_T(self, theta, designs, bits):
        sigma, z = self._sigma_z(theta, designs)
        c = _gauss.signed_hazard(z, bits)
        return (-sigma**2 * z * c)[:, None]

    def cond_cov_dev_T(self, theta, designs, bits):
        # Var((X-mu)^2 | b) - 2 sigma^4 = -sigma^4 * c * z * (z^2 + 1 + z*c)
        sigma, z = self._sigma_z(theta, designs)
        c = _gauss.signed_hazard(z, bits)
        dev = -c * z * (z * z + 1.0 + z * c)
        return (sigma**4 * dev)[:, None, None]

    def cond_devs_T(self, theta, designs, bits):
        sigma, z = self._sigma_z(theta, designs)
        c = _gauss.signed_hazard(z, bits)
        mean_dev = (-sigma**2 * z * c)[:, None]
        cov_dev = (sigma**4 * (-c * z * (z * z + 1.0 + z * c)))[:, None, None]
        return mean_dev, cov_dev

    def third_central_T(self, theta, designs):
        sigma, z = self._sigma_z(theta, designs)
        return np.full((z.shape[0], 1, 1, 1), 8.0 * sigma**6)

    def cond_third_central_T(self, theta, designs, bits):
        sigma, z = self._sigma_z(theta, designs)
        m = _gauss.truncated_std_moments(z, bits, 6)
        m2, m4, m6 = m[1], m[3], m[5]
        central = m6 - 3.0 * m2 * m4 + 2.0 * m2**3
        return (sigma**6 * central)[:, None, None, None]

    def third_abs_moment_T(self, theta, designs):
        sigma, z = self._sigma_z(theta, designs)
        return np.full(z.shape, 15.0 * sigma**6)

    def sample(self, theta, designs, rng):
        designs = DesignSet.coerce(designs)
        sigma, _ = self._sigma_z(theta, designs)
        return designs.aux + sigma * rng.standard_normal(designs.n)

    def to_moment(self, theta):
        theta = _as_1d(theta)
        return np.array([1.0 / math.sqrt(theta[0])])

    def from_moment(self, values):
        values = _as_1d(values)
        return np.array([1.0 / values[0] ** 2])

    def moment_labels(self):
        return ("sigma",)


def case2_fim(model, sigma, taus):
    """Censored information for the known-mean Gaussian precision,
    sum of (sigma^4/4) (tau - mu)^2 pdf^2 / (F (1 - F))."""
    sigma = float(sigma)
    taus = _as_1d(taus)
    z = (taus - model.means) / sigma
    terms = 0.25 * sigma**4 * z * z * _gauss.fim_weight(z)
    return float(math.fsum(terms))


def case2_uncensored_fim(model, sigma):
    """Information from the raw observations: n * sigma^4 / 2."""
    return 0.5 * float(sigma) ** 4 * model.means.shape[0]


# ---------------------------------------------------------------------------
# Gaussian: unknown mean and variance
# ---------------------------------------------------------------------------

class GaussianCase3(ModelFamily):
    """X_i = w_i * alpha + noise, noise ~ N(0, sigma^2), both unknown.

    Natural coordinates theta = (alpha/sigma^2, 1/sigma^2) with theta_2 > 0;
    sufficient statistic T = (x, x^2), design V_i = [[w_i, 0], [0, -1/2]].
    The solver works in natural coordinates; reports convert to (alpha, sigma).
    """

    name = "gaussian-case3"
    d = 2
    k = 2

    def __init__(self, weights):
        self.weights = _as_1d(weights)
        if not np.all(np.isfinite(self.weights)):
            raise DomainError("weights must be finite")

    @property
    def domain(self):
        return ("unbounded", "positive")

    def design_set(self, taus):
        taus = _as_1d(taus)
        if taus.shape != self.weights.shape:
            raise ValueError("need one threshold per weight")
        n = taus.shape[0]
        V = np.zeros((n, 2, 2))
        V[:, 0, 0] = self.weights
        V[:, 1, 1] = -0.5
        return DesignSet(V, taus)

    def check_designs(self, designs):
        DesignSet.coerce(designs)

    def _mu_sigma_z(self, theta, designs):
        theta, designs = self._coerce(theta, designs)
        if not theta[1] > 0:
            raise DomainError("precision coordinate must be strictly positive")
        sigma2 = 1.0 / theta[1]
        sigma = math.sqrt(sigma2)
        eta1 = designs.natural_params(theta)[:, 0]
        mu = sigma2 * eta1
        z = (designs.taus - mu) / sigma
        return mu, sigma, z, designs

    def _lin_map(self, mu, sigma):
        """Per-observation matrix A with (T - E[T]) = A (Y - E[Y], Y^2 - E[Y^2])
        for the standardized variable Y; moments of T transform through it."""
        n = mu.shape[0]
        A = np.zeros((n, 2, 2))
        A[:, 0, 0] = sigma
        A[:, 1, 0] = 2.0 * mu * sigma
        A[:, 1, 1] = sigma**2
        return A

    def log_partition(self, theta, designs):
        theta, designs = self._coerce(theta, designs)
        eta = designs.natural_params(theta)
        # -eta1^2/(4 eta2) - log(-2 eta2)/2 for eta2 < 0
        return -eta[:, 0] ** 2 / (4.0 * eta[:, 1]) - 0.5 * np.log(-2.0 * eta[:, 1])

    def log_base_measure(self, x, designs):
        x = _as_1d(x)
        return np.full_like(x, -0.5 * math.log(2 * math.pi))

    def prob_leq(self, theta, designs):
        _, _, z, _ = self._mu_sigma_z(theta, designs)
        return _gauss.norm_cdf(z)

    def mean_T(self, theta, designs):
        mu, sigma, z, _ = self._mu_sigma_z(theta, designs)
        return np.stack([mu, mu**2 + sigma**2], axis=1)

    def cov_T(self, theta, designs):
        mu, sigma, z, _ = self._mu_sigma_z(theta, designs)
        n = mu.shape[0]
        out = np.empty((n, 2, 2))
        out[:, 0, 0] = sigma**2
        out[:, 0, 1] = out[:, 1, 0] = 2.0 * mu * sigma**2
        out[:, 1, 1] = 2.0 * sigma**4 + 4.0 * mu**2 * sigma**2
        return out

    def cond_mean_dev_T(self, theta, designs, bits):
        mu, sigma, z, designs = self._mu_sigma_z(theta, designs)
        c = _gauss.signed_hazard(z, bits)
        dev = np.empty((z.shape[0], 2))
        dev[:, 0] = -sigma * c
        dev[:, 1] = -sigma * c * (designs.taus + mu)
        return dev

    def cond_cov_dev_T(self, theta, designs, bits):
        mu, sigma, z, _ = self._mu_sigma_z(theta, designs)
        c = _gauss.signed_hazard(z, bits)
        # standardized deviations: Var(Y|b)-1, Cov(Y,Y^2|b)-0, Var(Y^2|b)-2,
        # pushed through (T - E[T]) = A (Y - E[Y], Y^2 - E[Y^2]) elementwise
        d11 = -c * (z + c)
        d12 = -c * (1.0 + z * z + z * c)
        d22 = -c * z * (z * z + 1.0 + z * c)
        s2 = sigma * sigma
        n = z.shape[0]
        out = np.empty((n, 2, 2))
        out[:, 0, 0] = s2 * d11
        out[:, 0, 1] = out[:, 1, 0] = 2.0 * mu * s2 * d11 + sigma * s2 * d12
        out[:, 1, 1] = (
            4.0 * mu * mu * s2 * d11 + 4.0 * mu * sigma * s2 * d12 + s2 * s2 * d22
        )
        return out

    def cond_devs_T(self, theta, designs, bits):
        mu, sigma, z, designs = self._mu_sigma_z(theta, designs)
        c = _gauss.signed_hazard(z, bits)
        n = z.shape[0]
        mean_dev = np.empty((n, 2))
        mean_dev[:, 0] = -sigma * c
        mean_dev[:, 1] = -sigma * c * (designs.taus + mu)
        d11 = -c * (z + c)
        d12 = -c * (1.0 + z * z + z * c)
        d22 = -c * z * (z * z + 1.0 + z * c)
        s2 = sigma * sigma
        cov_dev = np.empty((n, 2, 2))
        cov_dev[:, 0, 0] = s2 * d11
        cov_dev[:, 0, 1] = cov_dev[:, 1, 0] = 2.0 * mu * s2 * d11 + sigma * s2 * d12
        cov_dev[:, 1, 1] = (
            4.0 * mu * mu * s2 * d11 + 4.0 * mu * sigma * s2 * d12 + s2 * s2 * d22
        )
        return mean_dev, cov_dev

    def third_central_T(self, theta, designs):
        mu, sigma, z, _ = self._mu_sigma_z(theta, designs)
        ky = np.zeros((z.shape[0], 2, 2, 2))
        # nonzero standard-normal third central moments of (Y, Y^2):
        # E[Y Y (Y^2-1)] = 2 and E[(Y^2-1)^3] = 8
        ky[:, 0, 0, 1] = ky[:, 0, 1, 0] = ky[:, 1, 0, 0] = 2.0
        ky[:, 1, 1, 1] = 8.0
        A = self._lin_map(mu, sigma)
        return np.einsum("nia,njb,nkc,nabc->nijk", A, A, A, ky)

    def cond_third_central_T(self, theta, designs, bits):
        mu, sigma, z, _ = self._mu_sigma_z(theta, designs)
        m1, m2, m3, m4, m5, m6 = _gauss.truncated_std_moments(z, bits, 6)
        k111 = m3 - 3.0 * m1 * m2 + 2.0 * m1**3
        k112 = m4 - 2.0 * m1 * m3 + m1**2 * m2 - m2 * m2 + m1**2 * m2
        k122 = m5 - m1 * m4 - 2.0 * m2 * m3 + 2.0 * m1 * m2 * m2
        k222 = m6 - 3.0 * m2 * m4 + 2.0 * m2**3
        n = z.shape[0]
        ky = np.empty((n, 2, 2, 2))
        ky[:, 0, 0, 0] = k111
        ky[:, 0, 0, 1] = ky[:, 0, 1, 0] = ky[:, 1, 0, 0] = k112
        ky[:, 0, 1, 1] = ky[:, 1, 0, 1] = ky[:, 1, 1, 0] = k122
        ky[:, 1, 1, 1] = k222
        A = self._lin_map(mu, sigma)
        return np.einsum("nia,njb,nkc,nabc->nijk", A, A, A, ky)

    def third_abs_moment_T(self, theta, designs):
        # ||T|| = |x| sqrt(1 + x^2); its cube has no closed Gaussian moment,
        # so integrate numerically per observation.
        mu, sigma, z, _ = self._mu_sigma_z(theta, designs)
        out = np.empty(mu.shape[0])
        for i, m in enumerate(mu):
            out[i] = _norm_t3_quad(m, sigma)
        return out

    def sample(self, theta, designs, rng):
        mu, sigma, _, _ = self._mu_sigma_z(theta, designs)
        return mu + sigma * rng.standard_normal(mu.shape[0])

    def to_moment(self, theta):
        """(alpha, sigma) from natural coordinates."""
        theta = _as_1d(theta)
        return np.array([theta[0] / theta[1], 1.0 / math.sqrt(theta[1])])

    def from_moment(self, values):
        """Natural coordinates from (alpha, sigma)."""
        alpha, sigma = map(float, values)
        return np.array([alpha / sigma**2, 1.0 / sigma**2])

    def moment_labels(self):
        return ("alpha", "sigma")

    @staticmethod
    def alpha_sigma2_from_natural(theta):
        """(alpha, sigma^2) from (alpha/sigma^2, 1/sigma^2)."""
        theta = _as_1d(theta)
        return theta[0] / theta[1], 1.0 / theta[1]

    @staticmethod
    def natural_from_alpha_sigma2(alpha, sigma2):
        return np.array([float(alpha) / float(sigma2), 1.0 / float(sigma2)])


def _norm_t3_quad(mu, sigma):
    def integrand(x):
        return abs(x) ** 3 * (1.0 + x * x) ** 1.5 * math.exp(-0.5 * ((x - mu) / sigma) ** 2)

    scale = 1.0 / (sigma * math.sqrt(2 * math.pi))
    lo, _ = quad(integrand, -np.inf, mu, limit=200)
    hi, _ = quad(integrand, mu, np.inf, limit=200)
    return scale * (lo + hi)


def case3_fim(model, alpha, sigma, taus):
    """Censored information for the two-parameter Gaussian, the sum of
    rank-one 2x2 terms weighted by sigma^2 pdf^2/(F (1-F)) per observation."""
    alpha, sigma = float(alpha), float(sigma)
    taus = _as_1d(taus)
    w = model.weights
    mu = w * alpha
    z = (taus - mu) / sigma
    cw = sigma**2 * _gauss.fim_weight(z)
    tp = taus + mu
    out = np.zeros((2, 2))
    out[0, 0] = math.fsum(cw * w * w)
    out[0, 1] = out[1, 0] = math.fsum(cw * w * (-0.5) * tp)
    out[1, 1] = math.fsum(cw * 0.25 * tp * tp)
    return out


def case3_uncensored_fim(model, alpha, sigma):
    """Information from the raw observations, V^T Cov(T) V summed."""
    alpha, sigma = float(alpha), float(sigma)
    w = model.weights
    mu = w * alpha
    s2 = sigma**2
    out = np.zeros((2, 2))
    out[0, 0] = math.fsum(w * w * s2)
    out[0, 1] = out[1, 0] = math.fsum(w * (-0.5) * 2.0 * mu * s2)
    out[1, 1] = math.fsum(np.full_like(w, 0.25) * (2.0 * s2 * s2 + 4.0 * mu**2 * s2))
    return out


# ---------------------------------------------------------------------------
# Poisson
# ---------------------------------------------------------------------------

class PoissonModel(ModelFamily):
    """X_i ~ Poisson(exp(v_i * theta)) with known covariates v_i.

    Thresholds are stored as reals; the censoring rule X <= tau makes the
    effective threshold floor(tau), and shifted CDF values are taken at
    floor(tau) - 1, etc.  Thresholds must be >= 0 to be interior to the
    support.
    """

    name = "poisson"
    d = 1
    k = 1

    def __init__(self, covariates):
        self.covariates = _as_1d(covariates)
        if not np.all(np.isfinite(self.covariates)):
            raise DomainError("covariates must be finite")

    @property
    def domain(self):
        return ("unbounded",)

    def design_set(self, taus):
        taus = _as_1d(taus)
        if taus.shape != self.covariates.shape:
            raise ValueError("need one threshold per covariate")
        V = self.covariates.reshape(-1, 1, 1)
        ds = DesignSet(V, taus)
        self.check_designs(ds)
        return ds

    def check_designs(self, designs):
        designs = DesignSet.coerce(designs)
        if np.any(designs.taus < 0):
            raise DomainError("poisson thresholds must be >= 0")

    #: rates beyond this overflow the pmf-summation machinery
    MAX_RATE = 1e6

    def _lam_t(self, theta, designs):
        theta, designs = self._coerce(theta, designs)
        self.check_designs(designs)
        lam = np.exp(designs.natural_params(theta)[:, 0])
        if not np.all(lam <= self.MAX_RATE):
            raise NumericalError(
                f"poisson rate exceeds the supported range (max {self.MAX_RATE:g})"
            )
        t = np.floor(designs.taus).astype(np.int64)
        return lam, t

    def _f_and_sf(self, lam, t):
        f = _poisson.poisson_cdf(t, lam)
        sf = _poisson.poisson_sf(t, lam)
        return f, sf

    def log_partition(self, theta, designs):
        theta, designs = self._coerce(theta, designs)
        return np.exp(designs.natural_params(theta)[:, 0])

    def log_base_measure(self, x, designs):
        from scipy.special import gammaln

        return -gammaln(_as_1d(x) + 1.0)

    def prob_leq(self, theta, designs):
        lam, t = self._lam_t(theta, designs)
        return _poisson.poisson_cdf(t, lam)

    def mean_T(self, theta, designs):
        lam, _ = self._lam_t(theta, designs)
        return lam[:, None]

    def cov_T(self, theta, designs):
        lam, _ = self._lam_t(theta, designs)
        return lam[:, None, None].copy()

    def _dev_pieces(self, theta, designs, bits):
        """Stable mean/second-moment deviations given the bit.

        With p = pmf(t), the mean deviation is -b * lam * p / P(B=b) and
        the raw-second-moment deviation is -b * num / P(B=b) with
        num = lam^2 (pmf(t) + pmf(t-1)) + lam * pmf(t); both avoid forming
        differences of nearly-equal CDF values.
        """
        lam, t = self._lam_t(theta, designs)
        bits = np.asarray(bits)
        f, sf = self._f_and_sf(lam, t)
        pb = np.where(bits > 0, f, sf)
        if np.any(pb == 0.0):
            idx = int(np.argmax(pb == 0.0))
            raise DegenerateThreshold(
                f"observation {idx}: bit has probability 0 at this parameter", index=idx
            )
        p_t = _poisson.poisson_pmf(t, lam)
        p_tm1 = _poisson.poisson_pmf(t - 1, lam)
        b = bits.astype(float)
        mean_dev = -b * lam * p_t / pb
        num = lam * lam * (p_t + p_tm1) + lam * p_t
        raw2_dev = -b * num / pb
        return lam, t, f, sf, mean_dev, raw2_dev

    def cond_mean_dev_T(self, theta, designs, bits):
        _, _, _, _, mean_dev, _ = self._dev_pieces(theta, designs, bits)
        return mean_dev[:, None]

    def cond_cov_dev_T(self, theta, designs, bits):
        lam, _, _, _, mean_dev, raw2_dev = self._dev_pieces(theta, designs, bits)
        var_dev = raw2_dev - 2.0 * lam * mean_dev - mean_dev**2
        return var_dev[:, None, None]

    def cond_devs_T(self, theta, designs, bits):
        lam, _, _, _, mean_dev, raw2_dev = self._dev_pieces(theta, designs, bits)
        var_dev = raw2_dev - 2.0 * lam * mean_dev - mean_dev**2
        return mean_dev[:, None], var_dev[:, None, None]

    def third_central_T(self, theta, designs):
        lam, _ = self._lam_t(theta, designs)
        return lam[:, None, None, None].copy()

    def cond_third_central_T(self, theta, designs, bits):
        lam, t = self._lam_t(theta, designs)
        bits = np.asarray(bits)
        f, s1, s2, s3 = _poisson.poisson_partial_moments(t, lam)
        sf = _poisson.poisson_sf(t, lam)
        pb = np.where(bits > 0, f, sf)
        if np.any(pb == 0.0):
            idx = int(np.argmax(pb == 0.0))
            raise DegenerateThreshold(
                f"observation {idx}: bit has probability 0 at this parameter", index=idx
            )
        e1 = lam
        e2 = lam * lam + lam
        e3 = lam**3 + 3.0 * lam * lam + lam
        r1 = np.where(bits > 0, s1 / pb, (e1 - s1) / pb)
        r2 = np.where(bits > 0, s2 / pb, (e2 - s2) / pb)
        r3 = np.where(bits > 0, s3 / pb, (e3 - s3) / pb)
        central = r3 - 3.0 * r1 * r2 + 2.0 * r1**3
        return central[:, None, None, None]

    def third_abs_moment_T(self, theta, designs):
        lam, _ = self._lam_t(theta, designs)
        return lam**3 + 3.0 * lam * lam + lam

    def sample(self, theta, designs, rng):
        lam, _ = self._lam_t(theta, designs)
        return rng.poisson(lam).astype(float)

    def moment_labels(self):
        return ("theta",)


def poisson_conditional_mean(lam, tau, b):
    """E[X | B=b] for X ~ Poisson(lam) and the bit of X <= tau.

    Equals lam * F(t-1) / F(t) for b = +1 and lam * S(t-1) / S(t) for
    b = -1, where t = floor(tau) and S is the survival function computed
    by direct upper summation (not as 1 - F).
    """
    lam = np.asarray(lam, dtype=float)
    t = np.floor(np.asarray(tau, dtype=float)).astype(np.int64)
    b = np.asarray(b)
    scalar = lam.ndim == 0 and t.ndim == 0 and b.ndim == 0
    lam, t, b = np.atleast_1d(lam), np.atleast_1d(t), np.atleast_1d(b)
    lam, t, b = np.broadcast_arrays(lam, t, b)
    f_t = _poisson.poisson_cdf(t, lam)
    sf_t = _poisson.poisson_sf(t, lam)
    pb = np.where(b > 0, f_t, sf_t)
    if np.any(pb == 0.0):
        idx = int(np.argmax(pb == 0.0))
        raise DegenerateThreshold(
            f"entry {idx}: conditioning event has probability 0", index=idx
        )
    f_tm1 = _poisson.poisson_cdf(t - 1, lam)
    sf_tm1 = _poisson.poisson_sf(t - 1, lam)
    out = np.where(b > 0, lam * f_tm1 / f_t, lam * sf_tm1 / sf_t)
    return float(out[0]) if scalar else out


def poisson_fim(model, theta, taus):
    """Censored information for the Poisson rate parameter,
    sum of v^2 exp(2 v theta) pmf(t)^2 / (F(t) (1 - F(t)))."""
    theta = float(np.atleast_1d(theta)[0])
    ds = model.design_set(taus)
    lam = np.exp(model.covariates * theta)
    t = np.floor(ds.taus).astype(np.int64)
    f = _poisson.poisson_cdf(t, lam)
    sf = _poisson.poisson_sf(t, lam)
    bad = (f == 0.0) | (sf == 0.0)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise DegenerateThreshold(
            f"design {idx}: censoring probability is numerically 0 or 1", index=idx
        )
    p_t = _poisson.poisson_pmf(t, lam)
    terms = model.covariates**2 * np.exp(2.0 * model.covariates * theta) * p_t * p_t / (f * sf)
    return float(math.fsum(terms))


def poisson_uncensored_fim(model, theta):
    """Information from the raw counts: sum of v^2 exp(v theta)."""
    theta = float(np.atleast_1d(theta)[0])
    return float(math.fsum(model.covariates**2 * np.exp(model.covariates * theta)))


# ---------------------------------------------------------------------------
# Standalone Gaussian conditional moments
# ---------------------------------------------------------------------------

def gaussian_conditional_moments(mu, sigma, tau, b):
    """(E[X | B=b], E[X^2 | B=b]) for X ~ N(mu, sigma^2), B the bit of X <= tau.

    E[X | B=b]   = mu - b sigma^2 pdf(tau) / P(B=b)
    E[X^2 | B=b] = sigma^2 + mu^2 - b sigma^2 pdf(tau)/P(B=b) * (tau + mu)

    Raises NumericalError once P(B=b) underflows to zero (standardized
    threshold beyond about +-38 on the conditioning side).
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    tau = np.asarray(tau, dtype=float)
    b = np.asarray(b)
    scalar = max(mu.ndim, sigma.ndim, tau.ndim, b.ndim) == 0
    mu, sigma, tau, b = np.atleast_1d(mu, sigma, tau, b)
    mu, sigma, tau, b = np.broadcast_arrays(mu, sigma, tau, b)
    if np.any(sigma <= 0):
        raise DomainError("sigma must be strictly positive")
    z = (tau - mu) / sigma
    # gate degeneracy through the log-CDF: the plain CDF flushes to zero
    # around |z| ~ 37 while exp(log CDF) keeps denormal mass out to ~38.6
    log_pb = np.where(b > 0, _gauss.norm_logcdf(z), _gauss.norm_logcdf(-z))
    if np.any(np.exp(log_pb) == 0.0):
        raise NumericalError(
            "conditioning event has probability 0 in double precision "
            "(standardized threshold beyond the tail-stability range)"
        )
    c = _gauss.signed_hazard(z, b)
    ex = mu - sigma * c
    ex2 = sigma**2 + mu**2 - sigma * c * (tau + mu)
    if scalar:
        return float(ex[0]), float(ex2[0])
    return ex, ex2


# ---------------------------------------------------------------------------
# Sufficient conditions for an invertible two-parameter Gaussian information
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InformationPositivityReport:
    """Outcome of the positive-definiteness sufficient-condition check."""

    max_abs_weight: float
    nonzero_weight_fraction: float
    min_eigenvalue: float
    weights_bounded: bool
    weights_nontrivial: bool
    information_positive: bool

    @property
    def passed(self):
        return self.weights_bounded and self.weights_nontrivial and self.information_positive


def information_positivity_check(model, theta, taus, eig_tol=1e-10):
    """Check the sufficient conditions for the averaged two-parameter
    Gaussian information matrix to be positive definite.

    Clauses: (a) weights bounded, (b) a positive fraction of weights is
    nonzero, (c) the per-observation average information has minimum
    eigenvalue above ``eig_tol``.  Returns a report with the witnessed
    values and a pass/fail flag per clause.
    """
    taus = _as_1d(taus)
    alpha, sigma2 = GaussianCase3.alpha_sigma2_from_natural(theta)
    jn = case3_fim(model, alpha, math.sqrt(sigma2), taus)
    avg = jn / taus.shape[0]
    eigs = np.linalg.eigvalsh(0.5 * (avg + avg.T))
    max_w = float(np.max(np.abs(model.weights))) if model.weights.size else 0.0
    frac = float(np.mean(model.weights != 0.0))
    return InformationPositivityReport(
        max_abs_weight=max_w,
        nonzero_weight_fraction=frac,
        min_eigenvalue=float(eigs[0]),
        weights_bounded=bool(np.isfinite(max_w)),
        weights_nontrivial=frac > 0.0,
        information_positive=float(eigs[0]) > eig_tol,
    )


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

#: Stable names for CLI/config lookup.
REGISTRY = {
    GaussianCase1.name: GaussianCase1,
    GaussianCase2.name: GaussianCase2,
    GaussianCase3.name: GaussianCase3,
    PoissonModel.name: PoissonModel,
}
