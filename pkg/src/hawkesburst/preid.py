"""Pre-identification of candidate burst onsets.

Two exponential moving averages of the event rate are computed at every event
time, one looking only backward (u_L) and one only forward (u_R).  Their
difference Delta = u_R - u_L spikes where the rate suddenly increases, and
ranked local maxima of Delta (with an exclusion radius around each pick)
give the candidate onset windows handed to the likelihood stage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .core import EventSeries, InvalidParameterError, NotEnoughDataError

__all__ = ["PreIdConfig", "CandidateWindow", "delta_series", "rank_candidates"]


@dataclass(frozen=True)
class PreIdConfig:
    """Smoothing scale kappa, window/exclusion size w, candidate cap.

    Pick kappa of the same order as the expected burst relaxation time; too
    small is noisy, too large averages medium bursts away.
    """

    kappa: float = 100.0
    w: float = 300.0
    max_candidates: int = 10

    def __post_init__(self):
        if self.kappa <= 0 or self.w <= 0:
            raise InvalidParameterError("kappa and w must be positive")
        if self.max_candidates < 1:
            raise InvalidParameterError("max_candidates must be >= 1")


@dataclass(frozen=True)
class CandidateWindow:
    """A ranked candidate onset ``z_bar`` with its likelihood search window
    [z_bar - w/2, z_bar + w/2] and the Delta score that ranked it."""

    z_bar: float
    lo: float
    hi: float
    score: float
    boundary: bool = False  # within kappa of either end of the window

    @property
    def window(self) -> tuple[float, float]:
        return (self.lo, self.hi)


@njit(cache=True)
def _delta_at_events(times, kappa):
    N = times.shape[0]
    uL = np.zeros(N)
    uR = np.zeros(N)
    # forward pass: kappa*u_L(t_i) = exp(-dt/kappa) * (1 + kappa*u_L(t_{i-1}))
    acc = 0.0
    for i in range(1, N):
        acc = np.exp(-(times[i] - times[i - 1]) / kappa) * (1.0 + acc)
        uL[i] = acc / kappa
    # backward pass, mirrored
    acc = 0.0
    for i in range(N - 2, -1, -1):
        acc = np.exp(-(times[i + 1] - times[i]) / kappa) * (1.0 + acc)
        uR[i] = acc / kappa
    return uR - uL


def delta_series(series: EventSeries, kappa: float) -> np.ndarray:
    """Delta(t_i; kappa) at every event time, via the O(N) two-pass
    recursions.  The event at t_i itself enters neither average."""
    if kappa <= 0:
        raise InvalidParameterError("kappa must be positive")
    if not len(series):
        raise NotEnoughDataError("empty series")
    return _delta_at_events(series.times, kappa)


def rank_candidates(series: EventSeries, cfg: PreIdConfig) -> list[CandidateWindow]:
    """Ranked candidate onsets: the global maximum of Delta first, then the
    maximum over events farther than w from every previous pick, and so on."""
    delta = delta_series(series, cfg.kappa)
    times = series.times
    available = np.ones(len(series), dtype=bool)
    out: list[CandidateWindow] = []
    while len(out) < cfg.max_candidates and available.any():
        idx = np.flatnonzero(available)
        best = idx[np.argmax(delta[idx])]
        z_bar = float(times[best])
        lo = max(0.0, z_bar - cfg.w / 2.0)
        hi = min(series.T, z_bar + cfg.w / 2.0)
        boundary = z_bar < cfg.kappa or series.T - z_bar < cfg.kappa
        out.append(CandidateWindow(z_bar=z_bar, lo=lo, hi=hi,
                                   score=float(delta[best]), boundary=boundary))
        available &= np.abs(times - z_bar) > cfg.w
    return out
