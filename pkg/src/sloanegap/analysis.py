"""Log-log regression of the occurrence cloud and the complexity envelope.

The cloud of (n, N(n)) points follows a power law: ordinary least
squares of ln N(n) on ln n gives slope, intercept and r^2, and the
derived constant k = e^intercept so that the fitted curve is
N_hat(n) = k * n^slope.

The envelope curves bound where an algorithmic-probability cloud can
live: counts proportional to 2^-K(n) sit between h/(n (log2 n)^2) and
h/n, because K(n) for most n lies between log2 n and
log2 n + 2 log2 log2 n + c'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ingest import OccurrenceTable


class InsufficientData(ValueError):
    """Fewer than three usable (nonzero-count) points in the fit range."""


class DegenerateX(ValueError):
    """All usable abscissae coincide; the regression is undefined."""


class DomainError(ValueError):
    """Envelope requested below n = 3, where log2 log2 n is not positive."""


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    r2: float
    k: float
    n_used: int

    def __post_init__(self):
        if not (-1e-12 <= self.r2 <= 1 + 1e-12):
            raise ValueError(f"r2 out of [0, 1]: {self.r2}")
        if not math.isclose(self.k, math.exp(self.intercept), rel_tol=1e-9):
            raise ValueError("k must equal exp(intercept)")

    def to_json_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "k": self.k,
            "n_used": self.n_used,
        }


@dataclass(frozen=True)
class EnvelopePoint:
    n: int
    upper: float
    lower: float
    k_upper_bound: float


def fit_power_law(
    table: OccurrenceTable,
    n_range: tuple[int, int] = (1, 10000),
) -> PowerLawFit:
    """OLS of ln N(n) on ln n over n in n_range with N(n) >= 1.

    Zero-count n carry no usable ordinate (ln 0) and are excluded.
    r^2 on zero-variance ordinates is reported as 0.
    """
    n_lo, n_hi = n_range
    if not (1 <= n_lo <= n_hi <= table.n_max):
        raise ValueError(f"range {n_range} outside [1, {table.n_max}]")
    counts = table.counts[n_lo : n_hi + 1]
    usable = np.nonzero(counts >= 1)[0]
    if usable.size < 3:
        raise InsufficientData(
            f"need >= 3 points with N(n) >= 1 in {n_range}, found {usable.size}"
        )
    n_vals = usable + n_lo
    if np.all(n_vals == n_vals[0]):
        raise DegenerateX("all usable n coincide")
    x = np.log(n_vals.astype(np.float64))
    y = np.log(counts[usable].astype(np.float64))
    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    sxy = float(np.sum((x - x_mean) * (y - y_mean)))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    sst = float(np.sum((y - y_mean) ** 2))
    if sst == 0.0:
        r2 = 0.0
    else:
        residuals = y - (slope * x + intercept)
        r2 = 1.0 - float(np.sum(residuals**2)) / sst
        r2 = min(max(r2, 0.0), 1.0)
    return PowerLawFit(
        slope=slope,
        intercept=intercept,
        r2=r2,
        k=math.exp(intercept),
        n_used=int(usable.size),
    )


def predict(fit: PowerLawFit, n: int) -> float:
    """Fitted occurrence count k * n^slope at a positive integer n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return fit.k * float(n) ** fit.slope


def theory_envelope(
    n_range: tuple[int, int],
    h: float,
    c_prime: float = 0.0,
) -> list[EnvelopePoint]:
    """Evaluate the three envelope formulas for every n in n_range.

    upper = h/n, lower = h/(n (log2 n)^2), and the complexity bound
    log2 n + 2 log2 log2 n + c'.  Requires n_lo >= 3.
    """
    n_lo, n_hi = n_range
    if n_lo < 3:
        raise DomainError(f"n_lo must be >= 3, got {n_lo}")
    if n_hi < n_lo:
        raise ValueError(f"empty range {n_range}")
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    points = []
    for n in range(n_lo, n_hi + 1):
        log2n = math.log2(n)
        points.append(
            EnvelopePoint(
                n=n,
                upper=h / n,
                lower=h / (n * log2n**2),
                k_upper_bound=log2n + 2.0 * math.log2(log2n) + c_prime,
            )
        )
    return points
