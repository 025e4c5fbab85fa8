"""Fisher information for censored and uncensored observation of a GLM.

Censored:   J_n = sum_i V_i^T Cov(E[T_i | B_i]) V_i, with the inner
covariance assembled exactly from the two-point distribution of each bit.
Uncensored: I_n = sum_i V_i^T Cov(T_i) V_i.

``fim_numeric_oracle`` is an independent verification route: it enumerates
both bit values per observation and averages the outer product of the
single-observation score.  ``negative_expected_hessian`` is a second
independent route through the curvature.  Processing a sample into a bit
cannot create information, so I_n - J_n must be positive semidefinite;
``dpi_check`` verifies that numerically.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import likelihood
from .exceptions import DegenerateThreshold
from .types import CensoredDataset, DesignSet

#: Eigenvalues above this are treated as genuinely nonnegative.
PSD_TOLERANCE = -1e-10


def _det_small(m):
    """Determinant of a small symmetric matrix; exact arithmetic for k <= 2."""
    k = m.shape[0]
    if k == 1:
        return float(m[0, 0])
    if k == 2:
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    return float(np.linalg.det(m))


@dataclass(frozen=True)
class FimResult:
    """A k x k information matrix with PSD metadata.

    ``per_observation_terms`` (optional) holds each observation's k x k
    summand in observation order.
    """

    matrix: np.ndarray
    min_eigenvalue: float
    determinant: float
    per_observation_terms: tuple = None

    @classmethod
    def from_terms(cls, terms, keep_terms=False):
        total = np.add.reduce(terms, axis=0)
        total = 0.5 * (total + total.T)
        eigs = np.linalg.eigvalsh(total)
        m = total.copy()
        m.setflags(write=False)
        return cls(
            matrix=m,
            min_eigenvalue=float(eigs[0]),
            determinant=_det_small(total),
            per_observation_terms=tuple(terms) if keep_terms else None,
        )

    @property
    def k(self):
        return self.matrix.shape[0]


def _theta_values(model, theta):
    values = np.atleast_1d(np.asarray(getattr(theta, "values", theta), dtype=float))
    model.check_theta(values)
    return values


def _check_thresholds(f, model_name):
    bad = (f <= 0.0) | (f >= 1.0)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise DegenerateThreshold(
            f"{model_name} design {idx}: censoring probability is numerically 0 or 1",
            index=idx,
        )


def fim_censored(model, theta, designs, keep_terms=False):
    """Information carried by the bits: per observation, the two-point
    covariance of E[T | B] sandwiched by the design matrix."""
    theta = _theta_values(model, theta)
    designs = DesignSet.coerce(designs)
    f = model.prob_leq(theta, designs)
    _check_thresholds(f, model.name)

    plus = np.ones(designs.n, dtype=np.int8)
    dev_p = model.cond_mean_dev_T(theta, designs, plus)   # (n, d)
    dev_m = model.cond_mean_dev_T(theta, designs, -plus)  # (n, d)
    # Cov(E[T|B]) = sum_b dev_b dev_b^T P(b)
    cov = (
        np.einsum("nd,ne->nde", dev_p, dev_p) * f[:, None, None]
        + np.einsum("nd,ne->nde", dev_m, dev_m) * (1.0 - f)[:, None, None]
    )
    terms = np.einsum("ndk,nde,nel->nkl", designs.V, cov, designs.V)
    return FimResult.from_terms(terms, keep_terms)


def fim_uncensored(model, theta, designs, keep_terms=False):
    """Information carried by the raw observations."""
    theta = _theta_values(model, theta)
    designs = DesignSet.coerce(designs)
    cov = model.cov_T(theta, designs)
    terms = np.einsum("ndk,nde,nel->nkl", designs.V, cov, designs.V)
    return FimResult.from_terms(terms, keep_terms)


def fim_numeric_oracle(model, theta, designs, keep_terms=False):
    """Independent check of the censored information: enumerate both bits
    per observation and average the outer product of the score computed by
    the likelihood module."""
    theta = _theta_values(model, theta)
    designs = DesignSet.coerce(designs)
    f = model.prob_leq(theta, designs)
    _check_thresholds(f, model.name)

    k = designs.k
    terms = np.empty((designs.n, k, k))
    for i in range(designs.n):
        design = designs.design(i)
        acc = np.zeros((k, k))
        for b, pb in ((1, f[i]), (-1, 1.0 - f[i])):
            s = likelihood.score_single(model, theta, design, b)
            acc += np.outer(s, s) * pb
        terms[i] = acc
    return FimResult.from_terms(terms, keep_terms)


def negative_expected_hessian(model, theta, designs, keep_terms=False):
    """-E[Hessian] with the expectation enumerated over both bit values;
    equals the censored information by the information-matrix equality."""
    theta = _theta_values(model, theta)
    designs = DesignSet.coerce(designs)
    f = model.prob_leq(theta, designs)
    _check_thresholds(f, model.name)

    plus = np.ones(designs.n, dtype=np.int8)
    dev_p = model.cond_cov_dev_T(theta, designs, plus)
    dev_m = model.cond_cov_dev_T(theta, designs, -plus)
    # -E[Cov(T|B) - Cov(T)] = -(dev_+ P(+1) + dev_- P(-1))
    inner = -(dev_p * f[:, None, None] + dev_m * (1.0 - f)[:, None, None])
    terms = np.einsum("ndk,nde,nel->nkl", designs.V, inner, designs.V)
    return FimResult.from_terms(terms, keep_terms)


@dataclass(frozen=True)
class DpiReport:
    """Result of the information data-processing check I_n >= J_n."""

    censored: FimResult
    uncensored: FimResult
    min_eigenvalue_gap: float

    @property
    def passed(self):
        return self.min_eigenvalue_gap >= PSD_TOLERANCE


def dpi_check(model, theta, designs):
    """Verify that censoring cannot increase information: the smallest
    eigenvalue of I_n - J_n must be nonnegative up to rounding."""
    censored = fim_censored(model, theta, designs)
    uncensored = fim_uncensored(model, theta, designs)
    gap = uncensored.matrix - censored.matrix
    eigs = np.linalg.eigvalsh(0.5 * (gap + gap.T))
    return DpiReport(
        censored=censored,
        uncensored=uncensored,
        min_eigenvalue_gap=float(eigs[0]),
    )
