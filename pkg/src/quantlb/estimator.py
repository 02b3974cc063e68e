"""scikit-learn style wrapper around the streaming summaries."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, column_or_1d

from .summaries import SUMMARY_NAMES, make_summary
from .universe import item, to_fraction


def check_stream(X) -> List[Fraction]:
    """Validate a 1-D (or single-column) batch of values and convert it exactly.

    Floats are converted through their shortest repr, so ``0.1`` becomes
    ``1/10``; NaN and infinities are rejected.
    """
    values = column_or_1d(np.asarray(X, dtype=object), warn=False)
    out = []
    for v in values:
        if isinstance(v, (float, np.floating)):
            if not math.isfinite(v):
                raise ValueError(f"non-finite value {v!r} in input")
            out.append(to_fraction(float(v)))
        elif isinstance(v, (bool, np.bool_)):
            raise TypeError("boolean values are not valid items")
        elif isinstance(v, np.integer):
            out.append(Fraction(int(v)))
        else:
            out.append(item(v))
    return out


def check_phis(phis) -> List[Fraction]:
    out = []
    for p in np.atleast_1d(np.asarray(phis, dtype=object)).ravel():
        phi = to_fraction(float(p) if isinstance(p, np.floating) else p)
        if not 0 <= phi <= 1:
            raise ValueError(f"quantile {p!r} outside [0, 1]")
        out.append(phi)
    return out


def check_eps_inv(eps_inv) -> int:
    if isinstance(eps_inv, bool) or not isinstance(eps_inv, (int, np.integer)) or eps_inv < 2:
        raise ValueError(f"eps_inv must be an integer >= 2, got {eps_inv!r}")
    return int(eps_inv)


class QuantileSketch(BaseEstimator):
    """Approximate quantiles of a stream with rank error at most ``n / eps_inv``.

    ``fit`` starts a new summary, ``partial_fit`` keeps feeding it.
    ``predict(phis)`` returns approximate quantiles, ``transform(X)`` the
    approximate number of processed values ``<= x`` for each ``x``.

    Example::

        sk = QuantileSketch(eps_inv=50).fit(np.random.default_rng(0).normal(size=5000))
        sk.predict([0.5, 0.99])
    """

    def __init__(self, eps_inv: int = 100, summary: str = "gk", exact: bool = False):
        self.eps_inv = eps_inv
        self.summary = summary
        self.exact = exact

    def _check_params(self) -> None:
        check_eps_inv(self.eps_inv)
        if self.summary not in SUMMARY_NAMES:
            raise ValueError(f"summary must be one of {SUMMARY_NAMES}, got {self.summary!r}")

    def fit(self, X, y=None) -> "QuantileSketch":
        self._check_params()
        self.summary_ = make_summary(self.summary, int(self.eps_inv))
        self.n_seen_ = 0
        return self.partial_fit(X)

    def partial_fit(self, X, y=None) -> "QuantileSketch":
        if not hasattr(self, "summary_"):
            return self.fit(X)
        for x in check_stream(X):
            self.summary_.process(x)
        self.n_seen_ = self.summary_.n
        return self

    def _out(self, values):
        if self.exact:
            return np.asarray(values, dtype=object)
        return np.asarray([float(v) for v in values], dtype=float)

    def predict(self, phis):
        check_is_fitted(self, "summary_")
        return self._out([self.summary_.query(phi)[1] for phi in check_phis(phis)])

    def transform(self, X):
        check_is_fitted(self, "summary_")
        return np.asarray([self.summary_.rank(x) for x in check_stream(X)], dtype=np.int64)

    @property
    def n_stored_(self) -> int:
        check_is_fitted(self, "summary_")
        return len(self.summary_.stored)
