"""Next-access prediction for files from their timestamped access history.

The predictor combines two estimates: the next access *time* is the last
sample time plus the mean inter-sample interval, and the access *count* at
that time is the polynomial interpolant through the trailing window of
(time, cumulative count) samples, evaluated by the Lagrange basis-product
form

    G(x) = sum_i f_i * prod_{j != i} (x - x_j) / (x_i - x_j).

A small trailing window (default 4 samples, so degree <= 3) keeps the
extrapolation from oscillating on long noisy histories.  Window times are
shifted so the first node sits at zero before evaluating, which is a no-op
for the interpolant but conditions the products.  Negative extrapolations
clamp to zero; counts are counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "PredictionError",
    "DuplicateAbscissa",
    "EmptyPointSet",
    "InsufficientHistory",
    "AccessSample",
    "AccessHistory",
    "PredictedAccess",
    "DEFAULT_WINDOW",
    "lagrange_eval",
    "average_interval",
    "predict_next",
]

DEFAULT_WINDOW = 4


class PredictionError(Exception):
    pass


class DuplicateAbscissa(PredictionError):
    pass


class EmptyPointSet(PredictionError):
    pass


class InsufficientHistory(PredictionError):
    pass


@dataclass(frozen=True)
class AccessSample:
    """Cumulative access count observed by time ``t``."""

    t: float
    count: float

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError("access count must be >= 0")


@dataclass
class AccessHistory:
    """Time-ordered cumulative access samples for one file.

    Sample times must be strictly increasing and counts non-decreasing;
    same-tick accesses must be aggregated by the caller before appending.
    """

    file_id: int
    samples: list[AccessSample] = field(default_factory=list)

    def __post_init__(self) -> None:
        for prev, cur in zip(self.samples, self.samples[1:]):
            _check_successor(prev, cur)

    def append(self, sample: AccessSample) -> None:
        if self.samples:
            _check_successor(self.samples[-1], sample)
        self.samples.append(sample)


def _check_successor(prev: AccessSample, cur: AccessSample) -> None:
    if cur.t <= prev.t:
        raise ValueError(f"sample times must strictly increase ({cur.t} after {prev.t})")
    if cur.count < prev.count:
        raise ValueError("cumulative counts must be non-decreasing")


@dataclass(frozen=True)
class PredictedAccess:
    t_next: float
    count_next: float
    window_used: int


def lagrange_eval(points: list[tuple[float, float]], x_query: float) -> float:
    """Value at ``x_query`` of the unique polynomial through ``points``.

    Uses the basis-product form directly.  A single point yields the constant
    polynomial.  Raises :class:`EmptyPointSet` on no points and
    :class:`DuplicateAbscissa` when two x values coincide (the basis
    denominators would vanish).
    """
    if not points:
        raise EmptyPointSet("interpolation needs at least one point")
    xs = [x for x, _ in points]
    if len(set(xs)) != len(xs):
        raise DuplicateAbscissa("interpolation nodes must have distinct x values")
    total = 0.0
    for i, (xi, fi) in enumerate(points):
        basis = 1.0
        for j, (xj, _) in enumerate(points):
            if j != i:
                basis *= (x_query - xj) / (xi - xj)
        total += fi * basis
    return total


def average_interval(history: AccessHistory) -> float:
    """Mean spacing between samples: (t_last - t_first) / (n - 1)."""
    samples = history.samples
    if len(samples) < 2:
        raise InsufficientHistory("need at least 2 samples to average intervals")
    return (samples[-1].t - samples[0].t) / (len(samples) - 1)


def predict_next(history: AccessHistory, window: int = DEFAULT_WINDOW) -> PredictedAccess:
    """Predict the next access time and the cumulative count at that time.

    Interpolates the trailing ``min(window, len(samples))`` samples and
    extrapolates to ``t_last + average_interval(history)``.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    samples = history.samples
    if len(samples) < 2:
        raise InsufficientHistory("need at least 2 samples to predict")
    t_next = samples[-1].t + average_interval(history)
    tail = samples[-min(window, len(samples)):]
    t0 = tail[0].t
    value = lagrange_eval([(s.t - t0, s.count) for s in tail], t_next - t0)
    return PredictedAccess(t_next=t_next, count_next=max(0.0, value), window_used=len(tail))
