"""Scikit-learn style front end for the burst detector.

The detector is fit-shaped: ``fit`` consumes a 1-d array of event times (or
an :class:`~hawkesburst.core.EventSeries`) and exposes the detection outcome
through trailing-underscore attributes, so it composes with sklearn's
``get_params`` / ``set_params`` and clone machinery.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .core import EventSeries, InvalidParameterError
from .detector import DetectionReport, DetectorConfig, detect
from .likelihood import FitConfig, get_family
from .preid import PreIdConfig

__all__ = ["IntensityBurstDetector"]


def _as_series(X, T: Optional[float]) -> EventSeries:
    if isinstance(X, EventSeries):
        return X
    times = np.asarray(X, dtype=np.float64)
    if times.ndim == 2 and times.shape[1] == 1:
        times = times[:, 0]
    if times.ndim != 1:
        raise InvalidParameterError("X must be a 1-d array of event times")
    if T is None:
        if times.size == 0:
            raise InvalidParameterError("cannot infer T from an empty series")
        T = float(times[-1])
    return EventSeries(times, T)


class IntensityBurstDetector(BaseEstimator):
    """Detects exogenous intensity bursts in an event-time series.

    Parameters mirror the pipeline stages: ``kappa``/``w`` drive the
    pre-identification ranking, ``kernel`` selects the endogenous family,
    and the information ``criterion`` gates model growth.

    Attributes set by :meth:`fit`: ``report_`` (full detection report),
    ``bursts_`` (accepted bursts), ``base_fit_`` and ``best_fit_``
    (model fits with 0 and all accepted bursts), ``n_bursts_``.
    """

    def __init__(self, kappa: float = 100.0, w: float = 300.0,
                 kernel: str = "powerlaw", criterion: str = "bic",
                 max_bursts: int = 5, n_starts: int = 8, lookahead: int = 0,
                 min_events: int = 100, tau_cap: Optional[float] = None,
                 fix_exponent: bool = True, random_state: Optional[int] = None):
        self.kappa = kappa
        self.w = w
        self.kernel = kernel
        self.criterion = criterion
        self.max_bursts = max_bursts
        self.n_starts = n_starts
        self.lookahead = lookahead
        self.min_events = min_events
        self.tau_cap = tau_cap
        self.fix_exponent = fix_exponent
        self.random_state = random_state

    def _config(self) -> DetectorConfig:
        return DetectorConfig(
            preid=PreIdConfig(kappa=self.kappa, w=self.w,
                              max_candidates=max(self.max_bursts + self.lookahead + 1, 2)),
            fit=FitConfig(n_starts=self.n_starts, seed=self.random_state,
                          fix_exponent=self.fix_exponent),
            criterion=self.criterion,
            lookahead=self.lookahead,
            max_bursts=self.max_bursts,
            min_events=self.min_events,
            tau_cap=self.tau_cap,
        )

    def fit(self, X, y=None, T: Optional[float] = None):
        series = _as_series(X, T)
        kwargs = {"fix_exponent": self.fix_exponent} \
            if self.kernel == "powerlaw" else {}
        family = get_family(self.kernel, **kwargs)
        report: DetectionReport = detect(series, self._config(), family=family)
        self.report_ = report
        self.bursts_ = report.accepted
        self.base_fit_ = report.base_fit
        self.best_fit_ = report.best_fit
        self.n_bursts_ = report.n_accepted
        return self

    def predict(self, X=None) -> np.ndarray:
        """Accepted burst onsets (seconds), in acceptance order."""
        if not hasattr(self, "report_"):
            raise InvalidParameterError("call fit() first")
        return np.array([b.z for b in self.bursts_])

    def score(self, X=None, y=None) -> float:
        """Log-likelihood of the selected model."""
        if not hasattr(self, "report_"):
            raise InvalidParameterError("call fit() first")
        return self.best_fit_.log_lik
