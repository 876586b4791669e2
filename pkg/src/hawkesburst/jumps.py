"""Price-jump detection with bipower-variation local volatility, and the
multi-timescale returns anchored at detected burst onsets.

A return is a theta-sigma jump when |r| / sigma_loc > theta, with sigma_loc
estimated by realized bipower variation over a trailing window of returns:
robust to a single outlier, unlike realized variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import BurstTerm, InvalidParameterError, NotEnoughDataError

__all__ = [
    "PriceSeries",
    "JumpConfig",
    "resample_prices",
    "bipower_vol",
    "realized_vol",
    "is_jump",
    "AnchoredReturns",
    "burst_anchored_returns",
    "MatchResult",
    "match_events",
]


@dataclass(frozen=True)
class PriceSeries:
    """Midprice sampled on a uniform grid t0 + i*dt."""

    prices: np.ndarray
    dt: float = 60.0
    t0: float = 0.0

    def __post_init__(self):
        prices = np.ascontiguousarray(self.prices, dtype=np.float64)
        object.__setattr__(self, "prices", prices)
        if self.dt <= 0:
            raise InvalidParameterError("dt must be positive")
        if np.any(prices <= 0):
            raise InvalidParameterError("prices must be positive")

    @property
    def log_returns(self) -> np.ndarray:
        return np.diff(np.log(self.prices))

    @property
    def t_end(self) -> float:
        return self.t0 + (len(self.prices) - 1) * self.dt

    def covers(self, t_lo: float, t_hi: float) -> bool:
        return t_lo >= self.t0 and t_hi <= self.t_end

    def price_at(self, t: float) -> float:
        """Last sampled price at or before t."""
        if t < self.t0 or t > self.t_end:
            raise NotEnoughDataError(f"time {t} outside price data")
        i = int(math.floor((t - self.t0) / self.dt + 1e-12))
        return float(self.prices[min(i, len(self.prices) - 1)])


@dataclass(frozen=True)
class JumpConfig:
    theta: float = 5.0
    K: int = 120          # bipower window length, in returns
    use_realized_variance: bool = False

    def __post_init__(self):
        if self.theta <= 0:
            raise InvalidParameterError("theta must be positive")
        if self.K < 3:
            raise InvalidParameterError("K must be >= 3")


def resample_prices(times: np.ndarray, marks: np.ndarray, dt: float = 60.0,
                    t0: float = 0.0, t_end: Optional[float] = None) -> PriceSeries:
    """Uniform-grid midprice by last observation carried forward."""
    if len(times) == 0:
        raise NotEnoughDataError("no price observations")
    if t_end is None:
        t_end = float(times[-1])
    grid = np.arange(t0, t_end + dt / 2, dt)
    idx = np.searchsorted(times, grid, side="right") - 1
    if idx[0] < 0:
        raise NotEnoughDataError("grid starts before the first observation")
    return PriceSeries(marks[idx], dt=dt, t0=t0)


def bipower_vol(returns: np.ndarray, i: int, K: int) -> float:
    """Realized-bipower-variation volatility at return index i from the K
    preceding returns:

        sigma^2 = (1/(K-2)) * sum_{j=i-K+2}^{i-1} |r_j| * |r_{j-1}|
    """
    if K < 3:
        raise InvalidParameterError("K must be >= 3")
    if i < K:
        raise NotEnoughDataError(f"need {K} returns of history, have {i}")
    r = np.abs(np.asarray(returns, dtype=np.float64))
    window = r[i - K + 1:i]  # |r_{i-K+2}| ... |r_{i-1}| paired with lag 1
    s2 = float(np.sum(window[1:] * window[:-1])) / (K - 2)
    return math.sqrt(s2)


def realized_vol(returns: np.ndarray, i: int, K: int) -> float:
    """Realized-variance alternative on the same window (cross-check only)."""
    if i < K:
        raise NotEnoughDataError(f"need {K} returns of history, have {i}")
    r = np.asarray(returns, dtype=np.float64)[i - K + 1:i]
    return math.sqrt(float(np.mean(r * r)))


def is_jump(r: float, sigma_loc: float, theta: float) -> bool:
    """theta-sigma jump test: |r| / sigma_loc > theta (strict)."""
    if sigma_loc <= 0:
        raise InvalidParameterError("local volatility must be positive")
    return abs(r) / sigma_loc > theta


@dataclass(frozen=True)
class AnchoredReturns:
    """Log-returns around a burst onset on three time scales with their
    matched volatilities; a None return means the interval left the data."""

    r1: Optional[float]
    r5: Optional[float]
    r_tau: Optional[float]
    sigma1: float
    sigma5: float
    sigma_tau: float

    def jump_flags(self, theta: float) -> tuple[Optional[bool], ...]:
        out = []
        for r, s in ((self.r1, self.sigma1), (self.r5, self.sigma5),
                     (self.r_tau, self.sigma_tau)):
            out.append(None if r is None else is_jump(r, s, theta))
        return tuple(out)


def _interval_return(prices: PriceSeries, lo: float, hi: float) -> Optional[float]:
    if not prices.covers(lo, hi):
        return None
    return math.log(prices.price_at(hi) / prices.price_at(lo))


def burst_anchored_returns(prices: PriceSeries, burst: BurstTerm,
                           sigma_loc: float) -> AnchoredReturns:
    """Returns over [z-10, z+50], [z-50, z+250] and [z-tau/6, z+5*tau/6].

    ``sigma_loc`` is the 1-minute local volatility at z; the longer scales use
    sqrt(horizon-in-minutes) * sigma_loc.
    """
    if sigma_loc <= 0:
        raise InvalidParameterError("sigma_loc must be positive")
    z, tau = burst.z, burst.tau
    tau_minutes = tau / 60.0
    return AnchoredReturns(
        r1=_interval_return(prices, z - 10.0, z + 50.0),
        r5=_interval_return(prices, z - 50.0, z + 250.0),
        r_tau=_interval_return(prices, z - tau / 6.0, z + 5.0 * tau / 6.0),
        sigma1=sigma_loc,
        sigma5=math.sqrt(5.0) * sigma_loc,
        sigma_tau=math.sqrt(tau_minutes) * sigma_loc,
    )


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[tuple[int, int], ...]   # (index in a, index in b)
    lags: tuple[float, ...]              # b_time - a_time per pair
    frac_a: float
    frac_b: float


def match_events(a: Sequence[float], b: Sequence[float],
                 tol: float) -> MatchResult:
    """Greedy nearest-neighbor matching of two sorted time lists within
    ``tol`` seconds; each event is used at most once."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    cand = [(abs(tb - ta), i, j) for i, ta in enumerate(a)
            for j, tb in enumerate(b) if abs(tb - ta) <= tol]
    cand.sort()
    used_a: set[int] = set()
    used_b: set[int] = set()
    pairs: list[tuple[int, int]] = []
    for _, i, j in cand:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        pairs.append((i, j))
    pairs.sort()
    lags = tuple(float(b[j] - a[i]) for i, j in pairs)
    return MatchResult(
        pairs=tuple(pairs),
        lags=lags,
        frac_a=len(pairs) / len(a) if len(a) else 0.0,
        frac_b=len(pairs) / len(b) if len(b) else 0.0,
    )
