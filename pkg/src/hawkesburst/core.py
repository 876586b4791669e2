"""Domain types: event series, memory kernels, burst terms, fitted models.

All times are in seconds. Kernels are represented internally as weighted sums
of exponentials, ``phi(t) = sum_j c_j * exp(-beta_j * t)``, which is what makes
the O(N * terms) recursive likelihood possible downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "InvalidParameterError",
    "CriticalityError",
    "NotEnoughDataError",
    "FitFailureError",
    "EventSeries",
    "ApproxPowerLaw",
    "SingleExp",
    "DoubleExp",
    "KernelSpec",
    "BurstTerm",
    "ModelFit",
    "power_law_constants",
    "expected_cluster_size",
]

_MASS_TOL = 1e-6


class InvalidParameterError(ValueError):
    """A parameter violates its domain constraints."""


class CriticalityError(InvalidParameterError):
    """Branching ratio at or above the critical value 1."""


class NotEnoughDataError(ValueError):
    """Operation requires more data than is available."""


class FitFailureError(RuntimeError):
    """All optimization attempts were infeasible or failed."""


@dataclass(frozen=True)
class EventSeries:
    """Strictly increasing event times on the observation window [0, T].

    ``marks`` optionally carries a per-event price (same length as ``times``).
    """

    times: np.ndarray
    T: float
    marks: Optional[np.ndarray] = None

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=np.float64)
        object.__setattr__(self, "times", times)
        if self.T <= 0:
            raise InvalidParameterError("T must be positive")
        if times.ndim != 1:
            raise InvalidParameterError("times must be a 1-d array")
        if times.size:
            if times[0] < 0 or times[-1] > self.T:
                raise InvalidParameterError("event times must lie in [0, T]")
            if np.any(np.diff(times) <= 0):
                raise InvalidParameterError("event times must be strictly increasing")
        if self.marks is not None:
            marks = np.ascontiguousarray(self.marks, dtype=np.float64)
            if marks.shape != times.shape:
                raise InvalidParameterError("marks must match times in length")
            object.__setattr__(self, "marks", marks)

    def __len__(self) -> int:
        return self.times.size

    @property
    def mean_spacing(self) -> float:
        """Typical inter-event time delta = T / N."""
        if not len(self):
            raise NotEnoughDataError("empty series has no mean spacing")
        return self.T / len(self)

    def shifted(self, offset: float, T: Optional[float] = None) -> "EventSeries":
        return EventSeries(self.times + offset, T if T is not None else self.T,
                           self.marks)


def power_law_constants(tau0: float, p: float, m: float, K: int) -> tuple[float, float]:
    """Normalization constants (S, Z) of the approximate power-law kernel.

    S makes the kernel vanish at t=0 and Z makes it integrate to the branching
    ratio.  Raises if Z comes out nonpositive (kernel cannot be normalized).
    """
    if tau0 <= 0 or p <= 1 or m <= 1 or K < 1:
        raise InvalidParameterError("require tau0 > 0, p > 1, m > 1, K >= 1")
    scales = tau0 * m ** np.arange(K, dtype=np.float64)
    S = float(np.sum(scales ** (-p)))
    Z = float(np.sum(scales ** (1.0 - p)) - S * tau0 / m)
    if Z <= 0:
        raise InvalidParameterError(f"power-law kernel not normalizable (Z={Z})")
    return S, Z


class _ExpMixtureKernel:
    """Shared behaviour for kernels that are finite exponential mixtures."""

    n: float

    def terms(self) -> tuple[np.ndarray, np.ndarray]:
        """(weights c_j, rates beta_j) with phi(t) = sum c_j exp(-beta_j t)."""
        raise NotImplementedError

    def _check_mass(self):
        c, beta = self.terms()
        mass = float(np.sum(c / beta))
        if not math.isclose(mass, self.n, rel_tol=0, abs_tol=_MASS_TOL * max(1.0, self.n)):
            raise InvalidParameterError(
                f"kernel mass {mass} != branching ratio {self.n}")

    def eval(self, t) -> Union[float, np.ndarray]:
        """Kernel value phi(t); zero for t < 0 is a domain error."""
        t_arr = np.asarray(t, dtype=np.float64)
        if np.any(t_arr < 0):
            raise InvalidParameterError("kernel defined for t >= 0 only")
        c, beta = self.terms()
        out = np.einsum("j,...j->...", c, np.exp(-np.multiply.outer(t_arr, beta)))
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    def cumulative(self, t) -> Union[float, np.ndarray]:
        """Expected offspring count in [0, t]: the integral of phi."""
        t_arr = np.asarray(t, dtype=np.float64)
        if np.any(t_arr < 0):
            raise InvalidParameterError("kernel defined for t >= 0 only")
        c, beta = self.terms()
        out = np.einsum("j,...j->...", c / beta,
                        -np.expm1(-np.multiply.outer(t_arr, beta)))
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    def shape_terms(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit-mass terms (phi = n * h); used by the likelihood recursions."""
        c, beta = self.terms()
        return c / self.n, beta

    @property
    def max_timescale(self) -> float:
        _, beta = self.terms()
        return float(1.0 / np.min(beta))


def _check_branching(n: float):
    if n < 0:
        raise InvalidParameterError("branching ratio must be nonnegative")
    if n >= 1:
        raise CriticalityError(f"branching ratio n={n} >= 1 (non-stationary)")


@dataclass(frozen=True)
class ApproxPowerLaw(_ExpMixtureKernel):
    """Power-law-like memory kernel as a sum of K exponentials with a
    short-time cutoff term; decays like t^{-p} with ``tau0`` setting the
    position of the maximum.  Satisfies phi(0) = 0 and integral = n.
    """

    n: float
    tau0: float
    p: float = 2.0
    m: float = 5.0
    K: int = 15

    def __post_init__(self):
        _check_branching(self.n)
        # constants raise for invalid (tau0, p, m, K)
        S, Z = power_law_constants(self.tau0, self.p, self.m, self.K)
        object.__setattr__(self, "_S", S)
        object.__setattr__(self, "_Z", Z)
        self._check_mass()

    @property
    def constants(self) -> tuple[float, float]:
        return self._S, self._Z

    def terms(self):
        S, Z = self._S, self._Z
        scales = self.tau0 * self.m ** np.arange(self.K, dtype=np.float64)
        c = np.append(self.n / Z * scales ** (-self.p), -self.n / Z * S)
        beta = np.append(1.0 / scales, self.m / self.tau0)
        return c, beta


@dataclass(frozen=True)
class SingleExp(_ExpMixtureKernel):
    """Single exponential memory kernel: phi(t) = n * b * exp(-b t)."""

    n: float
    b: float

    def __post_init__(self):
        _check_branching(self.n)
        if self.b <= 0:
            raise InvalidParameterError("rate b must be positive")
        self._check_mass()

    def terms(self):
        return (np.array([self.n * self.b]), np.array([self.b]))


@dataclass(frozen=True)
class DoubleExp(_ExpMixtureKernel):
    """Mixture of two exponentials:
    phi(t) = n * (a * bA * exp(-bA t) + (1-a) * bB * exp(-bB t)).
    """

    n: float
    a: float
    bA: float
    bB: float

    def __post_init__(self):
        _check_branching(self.n)
        if not (0.0 <= self.a <= 1.0):
            raise InvalidParameterError("mixture weight a must lie in [0, 1]")
        if self.bA <= 0 or self.bB <= 0:
            raise InvalidParameterError("rates bA, bB must be positive")
        self._check_mass()

    def terms(self):
        return (np.array([self.n * self.a * self.bA,
                          self.n * (1.0 - self.a) * self.bB]),
                np.array([self.bA, self.bB]))


KernelSpec = Union[ApproxPowerLaw, SingleExp, DoubleExp]


@dataclass(frozen=True)
class BurstTerm:
    """One exogenous intensity burst: onset ``z``, amplitude ``alpha``
    (events/second) and relaxation time ``tau``.  Contributes
    alpha * exp(-(t - z)/tau) to the intensity for t > z.
    """

    z: float
    alpha: float
    tau: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise InvalidParameterError("burst amplitude must be positive")
        if self.tau <= 0:
            raise InvalidParameterError("burst relaxation time must be positive")
        if self.z < 0:
            raise InvalidParameterError("burst onset must be nonnegative")

    @property
    def fertility(self) -> float:
        """Expected number of immigrants triggered directly: f = alpha * tau."""
        return self.alpha * self.tau

    def eval(self, t) -> Union[float, np.ndarray]:
        t_arr = np.asarray(t, dtype=np.float64)
        out = np.where(t_arr > self.z,
                       self.alpha * np.exp(-np.clip(t_arr - self.z, 0, None) / self.tau),
                       0.0)
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    def cumulative(self, t) -> Union[float, np.ndarray]:
        """Integral of the burst contribution over [0, t]."""
        t_arr = np.asarray(t, dtype=np.float64)
        out = self.alpha * self.tau * -np.expm1(-np.clip(t_arr - self.z, 0, None) / self.tau)
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def expected_cluster_size(f: float, n: float) -> float:
    """Expected total event count of one exogenous cluster: f / (1 - n)."""
    if f < 0:
        raise InvalidParameterError("fertility must be nonnegative")
    _check_branching(n)
    return f / (1.0 - n)


@dataclass(frozen=True)
class ModelFit:
    """A fitted model: baseline, kernel, bursts and goodness-of-fit scores."""

    mu: float
    kernel: KernelSpec
    bursts: tuple[BurstTerm, ...]
    log_lik: float
    n_params: int
    n_events: int
    aic: float = field(init=False)
    bic: float = field(init=False)

    def __post_init__(self):
        if self.mu <= 0:
            raise InvalidParameterError("baseline intensity must be positive")
        object.__setattr__(self, "bursts", tuple(self.bursts))
        object.__setattr__(self, "aic", 2.0 * self.n_params - 2.0 * self.log_lik)
        object.__setattr__(self, "bic",
                           self.n_params * math.log(self.n_events) - 2.0 * self.log_lik)

    @property
    def n_bursts(self) -> int:
        return len(self.bursts)

    def score(self, criterion: str = "bic") -> float:
        if criterion == "bic":
            return self.bic
        if criterion == "aic":
            return self.aic
        raise InvalidParameterError(f"unknown criterion {criterion!r}")


def intensity(t, series: EventSeries, mu: float, kernel: Optional[KernelSpec],
              bursts: Sequence[BurstTerm] = ()) -> np.ndarray:
    """Conditional intensity lambda(t) given the events of ``series``.

    Direct O(N * len(t)) evaluation; meant for plots and small-sample oracles,
    not for the likelihood (see :mod:`hawkesburst.likelihood`).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    lam = np.full(t_arr.shape, float(mu))
    for b in bursts:
        lam += b.eval(t_arr)
    if kernel is not None and len(series):
        dt = t_arr[:, None] - series.times[None, :]
        mask = dt > 0
        if np.any(mask):
            c, beta = kernel.terms()
            vals = np.zeros_like(dt)
            vals[mask] = np.einsum("j,kj->k", c,
                                   np.exp(-np.multiply.outer(dt[mask], beta)))
            lam += vals.sum(axis=1)
    return lam if np.ndim(t) else float(lam[0])
