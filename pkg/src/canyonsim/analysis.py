"""Statistics over simulated observation streams: reception modes, delay
distributions, gamma fits and the satellite-count to median-delay model.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import digamma, polygamma

from .errors import (
    DegenerateDistributionError,
    InsufficientDataError,
    ParameterError,
    SingularFitError,
)
from .geometry import rice_mean
from .simulate import EpochObservation, ReceptionMode

MODE_ORDER = (ReceptionMode.SPLOS, ReceptionMode.MP, ReceptionMode.NLOS, ReceptionMode.BLOCKED)
GAMMA_MIN_SAMPLES = 30

# Published coefficients of the median-delay model, meters.
PUBLISHED_COEFFICIENTS = (-0.23, 5.08, -4.08)


@dataclass(frozen=True)
class EnvironmentSummary:
    nu_h: float
    mu_h: float
    mean_received_Ns: float
    mode_fractions: dict[str, float]
    pooled_delays: np.ndarray = field(repr=False, compare=False)
    median_delay_dm: float | None
    gamma_shape: float | None
    gamma_scale: float | None
    reflections_per_epoch: float
    epoch_count: int
    observation_count: int

    @property
    def delay_count(self) -> int:
        return int(self.pooled_delays.size)

    def to_dict(self) -> dict:
        return {
            "nu_h_m": self.nu_h,
            "mu_h_m": self.mu_h,
            "mean_received_Ns": self.mean_received_Ns,
            "mode_fractions": {m.value: self.mode_fractions[m.value] for m in MODE_ORDER},
            "pooled_delay_count": self.delay_count,
            "median_delay_dm_m": self.median_delay_dm,
            "gamma_shape": self.gamma_shape,
            "gamma_scale": self.gamma_scale,
            "reflections_per_epoch": self.reflections_per_epoch,
            "epoch_count": self.epoch_count,
            "observation_count": self.observation_count,
        }


@dataclass(frozen=True)
class QuadraticModel:
    """``d_m = c2 * Ns**2 + c1 * Ns + c0``."""

    c2: float
    c1: float
    c0: float
    rms_error: float = 0.0
    training_points: tuple[tuple[float, float], ...] = ()

    def __call__(self, ns):
        ns = np.asarray(ns, dtype=float)
        return (self.c2 * ns + self.c1) * ns + self.c0

    def to_dict(self) -> dict:
        return {
            "c2": self.c2,
            "c1": self.c1,
            "c0": self.c0,
            "rms_error_m": self.rms_error,
            "training_points": [{"Ns": n, "d_m": d} for n, d in self.training_points],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuadraticModel":
        return cls(
            float(data["c2"]),
            float(data["c1"]),
            float(data["c0"]),
            float(data.get("rms_error_m", 0.0)),
            tuple((float(p["Ns"]), float(p["d_m"])) for p in data.get("training_points", ())),
        )


PUBLISHED_MODEL = QuadraticModel(*PUBLISHED_COEFFICIENTS, rms_error=0.33)


def median(values) -> float:
    """Median; mean of the two middle values for even counts."""
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        raise ParameterError("median of an empty sequence")
    mid = n // 2
    if n % 2:
        return float(v[mid])
    return float(0.5 * (v[mid - 1] + v[mid]))


def fit_gamma(delays, tol: float = 1e-10, max_iter: int = 100) -> tuple[float, float]:
    """Maximum-likelihood (shape, scale) of a two-parameter gamma distribution.

    Solves ``ln(k) - digamma(k) = ln(mean) - mean(ln x)`` by Newton's method
    from Minka's closed-form starting point.
    """
    x = np.asarray(delays, dtype=float).ravel()
    if x.size < GAMMA_MIN_SAMPLES:
        raise InsufficientDataError(f"gamma fit needs >= {GAMMA_MIN_SAMPLES} samples, got {x.size}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise ParameterError("gamma fit needs finite, strictly positive samples")
    mean = float(x.mean())
    s = math.log(mean) - float(np.log(x).mean())
    if not s > 0.0:
        raise DegenerateDistributionError("all samples are identical")
    k = (3.0 - s + math.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)
    for _ in range(max_iter):
        f = math.log(k) - float(digamma(k)) - s
        fprime = 1.0 / k - float(polygamma(1, k))
        step = f / fprime
        new_k = k - step
        while new_k <= 0.0:
            step *= 0.5
            new_k = k - step
        if abs(new_k - k) <= tol * max(1.0, new_k):
            k = new_k
            break
        k = new_k
    return k, mean / k


def summarize_environment(
    observations: Sequence[EpochObservation],
    nu_h: float,
    sigma_h: float,
    epoch_count: int | None = None,
) -> EnvironmentSummary:
    """Aggregate one environment's observations.

    ``epoch_count`` is the number of (repetition, sample) pairs simulated;
    when omitted it is taken from the distinct pairs present in
    ``observations``.
    """
    if not observations:
        raise ParameterError("observations must not be empty")
    if epoch_count is None:
        epoch_count = len({(o.repetition, o.epoch) for o in observations})
    counts = Counter(o.mode for o in observations)
    total = len(observations)
    fractions = {m.value: counts.get(m, 0) / total for m in MODE_ORDER}
    received = sum(counts.get(m, 0) for m in MODE_ORDER if m.received)
    delays = np.array([e.delay_d for o in observations for e in o.reflections], dtype=float)
    med = median(delays) if delays.size else None
    shape = scale = None
    if delays.size >= GAMMA_MIN_SAMPLES:
        try:
            shape, scale = fit_gamma(delays)
        except DegenerateDistributionError:
            pass
    return EnvironmentSummary(
        nu_h=float(nu_h),
        mu_h=rice_mean(float(nu_h), float(sigma_h)),
        mean_received_Ns=received / epoch_count,
        mode_fractions=fractions,
        pooled_delays=delays,
        median_delay_dm=med,
        gamma_shape=shape,
        gamma_scale=scale,
        reflections_per_epoch=delays.size / epoch_count,
        epoch_count=int(epoch_count),
        observation_count=total,
    )


def rms_error(predicted, actual) -> float:
    p = np.asarray(predicted, dtype=float).ravel()
    a = np.asarray(actual, dtype=float).ravel()
    if p.size == 0 or p.size != a.size:
        raise ParameterError(f"need equal non-zero lengths, got {p.size} and {a.size}")
    return float(np.sqrt(np.mean((p - a) ** 2)))


def fit_quadratic(points: Iterable[tuple[float, float]]) -> QuadraticModel:
    """Least-squares quadratic through ``(Ns, d_m)`` points."""
    pts = [(float(n), float(d)) for n, d in points]
    if len(pts) < 3 or len({n for n, _ in pts}) < 3:
        raise SingularFitError("quadratic fit needs at least 3 distinct Ns values")
    ns = np.array([p[0] for p in pts])
    dm = np.array([p[1] for p in pts])
    design = np.column_stack([ns**2, ns, np.ones_like(ns)])
    coef, _, rank, _ = np.linalg.lstsq(design, dm, rcond=None)
    if rank < 3:
        raise SingularFitError("design matrix is rank deficient")
    model = QuadraticModel(float(coef[0]), float(coef[1]), float(coef[2]))
    return QuadraticModel(
        model.c2, model.c1, model.c0, rms_error(model(ns), dm), tuple(pts)
    )


def estimate_median_delay(model: QuadraticModel, ns: float) -> float:
    """Model prediction clamped at zero."""
    if ns < 0:
        raise ParameterError(f"Ns must be >= 0, got {ns}")
    return max(0.0, float(model(ns)))


@dataclass(frozen=True)
class DelayHistogram:
    bin_low: np.ndarray
    bin_high: np.ndarray
    density: np.ndarray
    overflow: int
    total: int


def histogram_delays(delays, bin_width: float, max_delay: float) -> DelayHistogram:
    """Density over ``[0, max_delay)``; delays at or beyond ``max_delay`` go to ``overflow``.

    Densities are normalized by the total count, so the area equals the
    fraction of delays that landed in a bin.
    """
    if not bin_width > 0.0:
        raise ParameterError("bin_width must be > 0")
    if not max_delay > 0.0:
        raise ParameterError("max_delay must be > 0")
    d = np.asarray(delays, dtype=float).ravel()
    nbins = int(math.ceil(max_delay / bin_width - 1e-12))
    low = np.arange(nbins) * bin_width
    high = low + bin_width
    inside = d[d < max_delay]
    idx = np.minimum((inside // bin_width).astype(np.int64), nbins - 1)
    counts = np.bincount(idx, minlength=nbins).astype(float)
    density = counts / (d.size * bin_width) if d.size else counts
    return DelayHistogram(low, high, density, int(d.size - inside.size), int(d.size))


def sweep_points(summaries: Sequence[EnvironmentSummary]) -> list[tuple[float, float]]:
    return [(s.mean_received_Ns, s.median_delay_dm) for s in summaries if s.median_delay_dm is not None]
