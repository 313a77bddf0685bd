"""Poisson point fields, fading marks, interference, and guard-zone predicates.

One ``PointField`` is one sampled realization of a homogeneous PPP inside a
disc, carrying per-point unit-mean exponential power gains (one independent
draw per slot). All operations are pure given an ``RngStream``, so parallel
workers owning disjoint stream ids reproduce identical results regardless of
scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Distance clamp in path loss: a PPP point a.s. never coincides with a
# receiver, but floating-point underflow near 0 must not produce infinities.
EPS_MIN = 1e-6

ORIGIN = np.zeros(2)


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream addressed by (seed, stream_id).

    The same pair yields the same draws no matter in which order or on which
    worker the stream is consumed.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(ss)


def as_generator(rng) -> np.random.Generator:
    """Accept either an RngStream or an already-built numpy Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()


@dataclass
class PointField:
    """One realization of a marked PPP: 2-D points plus per-slot fading gains.

    ``points`` has shape (n, 2) in meters; ``marks`` has shape
    (n, slot_count) with independent unit-mean exponential entries.
    Fields are treated as immutable once sampled.
    """

    points: np.ndarray
    marks: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def slot_count(self) -> int:
        return self.marks.shape[1]

    def distances_to(self, at) -> np.ndarray:
        """Euclidean distances from each point to ``at``, clamped to EPS_MIN."""
        if self.n == 0:
            return np.empty(0)
        delta = self.points - np.asarray(at, dtype=float)
        return np.maximum(np.hypot(delta[:, 0], delta[:, 1]), EPS_MIN)


def sample_disc_ppp(density: float, radius: float, center, rng,
                    slot_count: int = 1) -> PointField:
    """Sample a homogeneous PPP of the given density on a disc.

    The count is Poisson(density * pi * radius^2); conditioned on the count,
    points are uniform on the disc (polar sampling with radius ~ sqrt(u)).
    """
    if density < 0:
        raise ValueError(f"density must be >= 0, got {density}")
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    gen = as_generator(rng)
    n = int(gen.poisson(density * math.pi * radius * radius))
    radii = radius * np.sqrt(gen.random(n))
    angles = 2.0 * math.pi * gen.random(n)
    points = np.asarray(center, dtype=float) + np.column_stack(
        (radii * np.cos(angles), radii * np.sin(angles)))
    marks = gen.standard_exponential((n, slot_count))
    return PointField(points=points, marks=marks)


def sample_plane_ppp(density: float, r_max: float, center, rng,
                     slot_count: int = 1) -> PointField:
    """Sample the truncated "infinite" plane process: a disc of radius r_max."""
    return sample_disc_ppp(density, r_max, center, rng, slot_count=slot_count)


def interference_sum(points: np.ndarray, gains: np.ndarray, at,
                     tx_power: float, alpha: float) -> float:
    """tx_power * sum_i gains_i * max(||X_i - at||, EPS_MIN)^(-alpha).

    Summation order is fixed (point index), so repeated evaluation is
    bit-identical for the same inputs.
    """
    if points.shape[0] == 0:
        return 0.0
    delta = points - np.asarray(at, dtype=float)
    dist = np.maximum(np.hypot(delta[:, 0], delta[:, 1]), EPS_MIN)
    return float(tx_power * np.sum(gains * dist ** (-alpha)))


def aggregate_interference(field: PointField, slot: int, at,
                           tx_power: float, alpha: float) -> float:
    """Total received power at ``at`` from every point of the field in a slot."""
    if not 0 <= slot < field.slot_count:
        raise ValueError(f"slot {slot} out of range for slot_count {field.slot_count}")
    return interference_sum(field.points, field.marks[:, slot], at, tx_power, alpha)


def is_clear_of_guard_zones(at, pr_field: PointField, r_gz: float) -> bool:
    """True iff every guard-zone center is strictly farther than r_gz from ``at``."""
    if r_gz < 0:
        raise ValueError(f"r_gz must be >= 0, got {r_gz}")
    if pr_field.n == 0:
        return True
    delta = pr_field.points - np.asarray(at, dtype=float)
    return bool(np.min(np.hypot(delta[:, 0], delta[:, 1])) > r_gz)


def empirical_laplace(samples, s: float) -> float:
    """Mean of exp(-s*x) over a nonempty sample of nonnegative values."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("empirical_laplace needs a nonempty sample")
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    return float(np.mean(np.exp(-s * samples)))


def write_field_csv(field: PointField, fh) -> None:
    """Debug dump of one realization: index, x, y, one column per slot mark."""
    slots = ",".join(f"mark_{k}" for k in range(field.slot_count))
    fh.write(f"index,x,y,{slots}\n")
    for i in range(field.n):
        marks = ",".join(format(v, ".9g") for v in field.marks[i])
        fh.write(f"{i},{format(field.points[i, 0], '.9g')},"
                 f"{format(field.points[i, 1], '.9g')},{marks}\n")


# ---------------------------------------------------------------------------
# Batched shot-noise oracles. These sample many independent fields at once for
# receivers at the disc center, where only point radii matter; they are used
# by calibration tests and by the harvest-probability Monte Carlo.
# ---------------------------------------------------------------------------

def shot_noise_batch(density: float, r_max: float, alpha: float,
                     n_samples: int, rng) -> np.ndarray:
    """Per-sample sum of g_i * r_i^(-alpha) over independent disc PPPs.

    Returns an array of length n_samples; multiply by a transmit power to get
    interference, or combine two batches with slot weights to get a harvested
    sum.
    """
    gen = as_generator(rng)
    counts = gen.poisson(density * math.pi * r_max * r_max, n_samples)
    total = int(counts.sum())
    radii = np.maximum(r_max * np.sqrt(gen.random(total)), EPS_MIN)
    gains = gen.standard_exponential(total)
    values = gains * radii ** (-alpha)
    owner = np.repeat(np.arange(n_samples), counts)
    return np.bincount(owner, weights=values, minlength=n_samples)


def clearance_batch(density: float, r_gz: float, r_max: float,
                    n_samples: int, rng) -> np.ndarray:
    """Per-sample guard-zone clearance of the disc center (boolean array)."""
    gen = as_generator(rng)
    counts = gen.poisson(density * math.pi * r_max * r_max, n_samples)
    total = int(counts.sum())
    radii = r_max * np.sqrt(gen.random(total))
    owner = np.repeat(np.arange(n_samples), counts)
    blocking = np.bincount(owner[radii <= r_gz], minlength=n_samples)
    return blocking == 0
