"""Core value types: parameters, designs, and censored datasets.

All types are immutable after construction (arrays are made read-only),
so they can be shared freely across workers.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError

#: Allowed per-coordinate domain constraints for a parameter vector.
DOMAIN_KINDS = ("unbounded", "positive", "negative")


def _readonly(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def check_domain(values, domain):
    """Raise DomainError unless every coordinate satisfies its constraint."""
    values = np.asarray(values, dtype=float)
    if len(domain) != values.shape[0]:
        raise DomainError(
            f"parameter has {values.shape[0]} coordinates but domain lists {len(domain)}"
        )
    if not np.all(np.isfinite(values)):
        raise DomainError("parameter coordinates must be finite")
    for j, (v, kind) in enumerate(zip(values, domain)):
        if kind not in DOMAIN_KINDS:
            raise DomainError(f"unknown domain constraint {kind!r}")
        if kind == "positive" and not v > 0.0:
            raise DomainError(f"coordinate {j} must be strictly positive, got {v!r}")
        if kind == "negative" and not v < 0.0:
            raise DomainError(f"coordinate {j} must be strictly negative, got {v!r}")


def satisfies_domain(values, domain):
    """True iff check_domain would pass."""
    try:
        check_domain(values, domain)
    except DomainError:
        return False
    return True


@dataclass(frozen=True)
class ParameterVector:
    """A parameter point together with its per-coordinate domain.

    Attributes
    ----------
    values : ndarray, shape (k,)
    domain : tuple of str
        One of "unbounded", "positive", "negative" per coordinate,
        checked on construction.
    """

    values: np.ndarray
    domain: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(np.atleast_1d(self.values)))
        object.__setattr__(self, "domain", tuple(self.domain))
        if self.values.ndim != 1 or self.values.shape[0] < 1:
            raise DomainError("parameter must be a vector with k >= 1 coordinates")
        check_domain(self.values, self.domain)

    @property
    def k(self):
        return self.values.shape[0]

    def with_values(self, values):
        """Same domain, new coordinates (validated)."""
        return ParameterVector(values, self.domain)


@dataclass(frozen=True)
class ObservationDesign:
    """One observation's design: a d x k matrix V and a threshold tau.

    ``aux`` carries an optional per-observation known constant consumed by
    some model families (the known mean of a variance-only Gaussian model);
    families that do not need it ignore it.
    """

    V: np.ndarray
    tau: float
    aux: float = None

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.V, dtype=float))
        object.__setattr__(self, "V", _readonly(V))
        object.__setattr__(self, "tau", float(self.tau))
        if self.V.ndim != 2 or self.V.shape[0] < 1 or self.V.shape[1] < 1:
            raise ValueError("design matrix must be d x k with d, k >= 1")
        if not np.all(np.isfinite(self.V)):
            raise ValueError("design matrix entries must be finite")
        if not np.isfinite(self.tau):
            raise ValueError("threshold must be finite")
        if self.aux is not None:
            object.__setattr__(self, "aux", float(self.aux))

    @property
    def d(self):
        return self.V.shape[0]

    @property
    def k(self):
        return self.V.shape[1]


class DesignSet:
    """A stack of homogeneous designs, stored as contiguous arrays.

    Vectorized operations work on this form; ``ObservationDesign`` views
    are materialized on demand.
    """

    __slots__ = ("V", "taus", "aux")

    def __init__(self, V, taus, aux=None):
        V = np.asarray(V, dtype=float)
        if V.ndim != 3:
            raise ValueError("stacked designs must have shape (n, d, k)")
        taus = np.asarray(taus, dtype=float)
        if taus.shape != (V.shape[0],):
            raise ValueError("thresholds must have shape (n,)")
        if not (np.all(np.isfinite(V)) and np.all(np.isfinite(taus))):
            raise ValueError("designs must be finite")
        if V.shape[0] < 1 or V.shape[1] < 1 or V.shape[2] < 1:
            raise ValueError("need n, d, k >= 1")
        self.V = _readonly(V)
        self.taus = _readonly(taus)
        if aux is None:
            self.aux = None
        else:
            aux = np.asarray(aux, dtype=float)
            if aux.shape != taus.shape:
                raise ValueError("aux must have shape (n,)")
            self.aux = _readonly(aux)

    @classmethod
    def from_designs(cls, designs):
        """Stack a sequence of ObservationDesign (all sharing d and k)."""
        designs = list(designs)
        if not designs:
            raise ValueError("need at least one design")
        d, k = designs[0].d, designs[0].k
        for i, ds in enumerate(designs):
            if (ds.d, ds.k) != (d, k):
                raise ValueError(f"design {i} has shape {(ds.d, ds.k)}, expected {(d, k)}")
        V = np.stack([ds.V for ds in designs])
        taus = np.array([ds.tau for ds in designs])
        have_aux = [ds.aux is not None for ds in designs]
        if any(have_aux):
            if not all(have_aux):
                raise ValueError("either every design carries aux or none does")
            aux = np.array([ds.aux for ds in designs])
        else:
            aux = None
        return cls(V, taus, aux)

    @classmethod
    def coerce(cls, designs):
        """Accept a DesignSet or any sequence of ObservationDesign."""
        if isinstance(designs, cls):
            return designs
        return cls.from_designs(designs)

    @property
    def n(self):
        return self.V.shape[0]

    @property
    def d(self):
        return self.V.shape[1]

    @property
    def k(self):
        return self.V.shape[2]

    def __len__(self):
        return self.n

    def design(self, i):
        aux = None if self.aux is None else self.aux[i]
        return ObservationDesign(self.V[i], self.taus[i], aux)

    def __iter__(self):
        return (self.design(i) for i in range(self.n))

    def subset(self, idx):
        aux = None if self.aux is None else self.aux[idx]
        return DesignSet(self.V[idx], self.taus[idx], aux)

    def natural_params(self, theta):
        """eta_i = V_i theta for every observation, shape (n, d)."""
        theta = np.asarray(theta, dtype=float)
        # one flat GEMV instead of n tiny matrix products
        n, d, k = self.V.shape
        return (self.V.reshape(n * d, k) @ theta).reshape(n, d)


@dataclass(frozen=True)
class CensoredDataset:
    """Observed bits paired with their designs.

    Attributes
    ----------
    bits : ndarray of int8, shape (n,)
        Each entry -1 or +1.
    designs : DesignSet
    """

    bits: np.ndarray
    designs: DesignSet

    def __post_init__(self):
        bits = np.atleast_1d(np.asarray(self.bits))
        if bits.ndim != 1 or bits.shape[0] < 1:
            raise ValueError("need at least one observation")
        if not np.all(np.isin(bits, (-1, 1))):
            raise ValueError("bits must be -1 or +1")
        b = bits.astype(np.int8)
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)
        if not isinstance(self.designs, DesignSet):
            object.__setattr__(self, "designs", DesignSet.coerce(self.designs))
        if self.designs.n != b.shape[0]:
            raise ValueError("bits and designs must have equal length")

    @classmethod
    def from_observations(cls, observations):
        """Build from (bit, ObservationDesign) pairs."""
        observations = list(observations)
        bits = [b for b, _ in observations]
        designs = DesignSet.from_designs([ds for _, ds in observations])
        return cls(np.asarray(bits), designs)

    @property
    def n(self):
        return self.bits.shape[0]

    def __len__(self):
        return self.n

    def observations(self):
        """Iterate (bit, ObservationDesign) pairs."""
        for i in range(self.n):
            yield int(self.bits[i]), self.designs.design(i)

    def permuted(self, order):
        """Dataset with observations reordered by the given index array."""
        order = np.asarray(order)
        return CensoredDataset(self.bits[order], self.designs.subset(order))

    def single(self, i):
        """One-observation dataset (used by enumeration oracles)."""
        return CensoredDataset(self.bits[i : i + 1], self.designs.subset(slice(i, i + 1)))
