"""Exact Monte Carlo of the three-slot harvest/relay protocol.

Each realization draws its own random stream from (seed, trial index), so
results are independent of scheduling and worker count. Within a realization
the draw order is fixed and identical for every scheme and for the direct
link being on or off; paired comparisons across those switches therefore see
the same network.

Slot structure per realization: two harvesting contributions (the dedicated
slot plus the opportunistically reused forwarding slot), then the
transmitter-to-relay slot, then the relay-to-destination slot. Primary
transmitter positions are redrawn per slot under the ``independent`` position
model and shared under ``static``; fading is always link-specific. Guard-zone
events for the transmitter and the forwarding relay are evaluated against
the same receiver field, so they are correlated (unlike the analytic product
form; the acceptance tolerance absorbs the gap).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, harvest_threshold
from .geometry import (EPS_MIN, ORIGIN, PointField, RngStream, as_generator,
                       aggregate_interference, interference_sum,
                       is_clear_of_guard_zones)

SCHEMES = ("bcc", "bsir", "bstd", "random_baseline")
# random_baseline is a uniform-pick reference, not part of the analyzed
# selection rules; outputs must keep it clearly flagged by this name.

FLAG_NAMES = ("harvest_ok", "st_clear", "relay_nonempty", "sr_decode_ok",
              "sr_clear", "sd_decode_ok", "direct_decode_ok", "success")


@dataclass
class RealizationOutcome:
    """Per-trial event record for one network realization."""

    harvest_ok: bool
    st_clear: bool
    relay_count: int
    selected_relay: int | None
    sr_decode_ok: bool
    sr_clear: bool
    sd_decode_ok: bool
    direct_decode_ok: bool
    success: bool
    harvested_energy: float   # mJ
    k_value: float            # normalized harvested sum
    decode_count: int         # relays that decoded hop one (selection pool for bstd)


@dataclass(frozen=True)
class EstimateCI:
    """Bernoulli estimate with a Wilson score interval."""

    p_hat: float
    trials: int
    ci_low: float
    ci_high: float
    seed: int


@dataclass
class SimulationResult:
    scheme: str
    trials: int
    seed: int
    estimate: EstimateCI
    flag_counts: dict
    flag_frequencies: dict


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """Score confidence interval for a Bernoulli proportion."""
    if trials <= 0:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


def harvested_energy(pt_fields, cfg: SystemConfig):
    """Energy (mJ) scavenged from the two harvesting contributions, plus K.

    ``pt_fields`` holds the dedicated-slot field and the reused
    forwarding-slot field, each with the transmitter-side gains in slot 0.
    K weights their path-loss sums by a and (1-a)/2; the energy is
    eta * p_t * t_block * K.
    """
    slot_field, reused_field = pt_fields
    s1 = aggregate_interference(slot_field, 0, ORIGIN, 1.0, cfg.alpha)
    s2 = aggregate_interference(reused_field, 0, ORIGIN, 1.0, cfg.alpha)
    k = cfg.a * s1 + (1.0 - cfg.a) / 2.0 * s2
    e_h = cfg.eta * cfg.p_t_mw * cfg.t_block * k
    return e_h, k


def sir(tx_power: float, gain: float, distance: float, interference: float,
        alpha: float) -> float:
    """Signal-to-interference ratio of one link; +inf when the plane is empty."""
    signal = tx_power * gain * max(distance, EPS_MIN) ** (-alpha)
    if interference > 0.0:
        return signal / interference
    return math.inf if signal > 0.0 else 0.0


def _safe_ratio(signal: np.ndarray, interference: np.ndarray) -> np.ndarray:
    """Elementwise signal/interference with +inf where interference is 0."""
    out = np.full(signal.shape, math.inf)
    positive = interference > 0.0
    out[positive] = signal[positive] / interference[positive]
    return out


def select_relay(scheme: str, relays: PointField, relay_interference,
                 sd_interference: float, cfg: SystemConfig, rng):
    """Pick the forwarding relay; returns (index or None, selection metric).

    Relay marks carry the first-hop gain in slot 0 and the second-hop gain in
    slot 1. Ties resolve to the lowest index. One uniform draw is always
    consumed so the stream position does not depend on the scheme.
    """
    gen = as_generator(rng)
    pick = gen.random()
    n = relays.n
    if n == 0:
        return None, None
    if scheme == "random_baseline":
        idx = min(int(pick * n), n - 1)
        return idx, float(pick)

    d_hop1 = relays.distances_to(ORIGIN)
    if scheme == "bcc":
        metric = relays.marks[:, 0] * d_hop1 ** (-cfg.alpha)
    elif scheme == "bsir":
        metric = _safe_ratio(
            cfg.p_st_mw * relays.marks[:, 0] * d_hop1 ** (-cfg.alpha),
            np.asarray(relay_interference, dtype=float))
    elif scheme == "bstd":
        sir_hop1 = _safe_ratio(
            cfg.p_st_mw * relays.marks[:, 0] * d_hop1 ** (-cfg.alpha),
            np.asarray(relay_interference, dtype=float))
        decoders = np.flatnonzero(sir_hop1 >= cfg.gamma_th_lin)
        if decoders.size == 0:
            return None, None
        d_hop2 = relays.distances_to((cfg.d_sd, 0.0))
        if sd_interference > 0.0:
            metric_all = (cfg.p_st_mw * relays.marks[:, 1]
                          * d_hop2 ** (-cfg.alpha) / sd_interference)
        else:
            metric_all = np.full(n, math.inf)
        best = decoders[int(np.argmax(metric_all[decoders]))]
        return int(best), float(metric_all[best])
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    idx = int(np.argmax(metric))
    return idx, float(metric[idx])


def _sample_pt_positions(gen, cfg):
    """Positions of the four per-slot primary fields, honoring the slot model."""
    mean = cfg.lambda_p * math.pi * cfg.r_max ** 2

    def one():
        n = int(gen.poisson(mean))
        radii = cfg.r_max * np.sqrt(gen.random(n))
        angles = 2.0 * math.pi * gen.random(n)
        return np.column_stack((radii * np.cos(angles), radii * np.sin(angles)))

    if cfg.slot_position_model == "static":
        shared = one()
        return shared, shared, shared, shared
    return one(), one(), one(), one()


def run_realization(cfg: SystemConfig, scheme: str, rng) -> RealizationOutcome:
    """Simulate one block: harvest, guard gating, selection, per-hop decoding."""
    gen = as_generator(rng)
    sd_pos = np.array([cfg.d_sd, 0.0])

    # Fixed draw order; every branch below consumes the same stream prefix.
    pts_h1, pts_h2, pts_s2, pts_s3 = _sample_pt_positions(gen, cfg)
    n_pr = int(gen.poisson(cfg.lambda_p * math.pi * (cfg.r_disc + cfg.r_gz) ** 2))
    pr_radii = (cfg.r_disc + cfg.r_gz) * np.sqrt(gen.random(n_pr))
    pr_angles = 2.0 * math.pi * gen.random(n_pr)
    pr_field = PointField(
        points=np.column_stack((pr_radii * np.cos(pr_angles),
                                pr_radii * np.sin(pr_angles))),
        marks=np.empty((n_pr, 0)))
    n_rel = int(gen.poisson(cfg.lambda_sr * math.pi * cfg.r_disc ** 2))
    rel_radii = cfg.r_disc * np.sqrt(gen.random(n_rel))
    rel_angles = 2.0 * math.pi * gen.random(n_rel)
    rel_points = np.column_stack((rel_radii * np.cos(rel_angles),
                                  rel_radii * np.sin(rel_angles)))

    marks_h1 = gen.standard_exponential(pts_h1.shape[0])
    marks_h2 = gen.standard_exponential(pts_h2.shape[0])
    gains_hop1 = gen.standard_exponential(n_rel)
    gains_relay_itf = gen.standard_exponential((n_rel, pts_s2.shape[0]))
    gains_sd_s2 = gen.standard_exponential(pts_s2.shape[0])
    gains_sd_s3 = gen.standard_exponential(pts_s3.shape[0])
    gains_hop2 = gen.standard_exponential(n_rel)
    gain_direct = float(gen.standard_exponential())

    relays = PointField(points=rel_points,
                        marks=np.column_stack((gains_hop1, gains_hop2)))

    field_h1 = PointField(points=pts_h1, marks=marks_h1[:, None])
    field_h2 = PointField(points=pts_h2, marks=marks_h2[:, None])
    e_h, k_value = harvested_energy((field_h1, field_h2), cfg)
    harvest_ok = k_value >= harvest_threshold(cfg)

    st_clear = is_clear_of_guard_zones(ORIGIN, pr_field, cfg.r_gz)

    i_sd_s2 = interference_sum(pts_s2, gains_sd_s2, sd_pos, cfg.p_t_mw, cfg.alpha)
    i_sd_s3 = interference_sum(pts_s3, gains_sd_s3, sd_pos, cfg.p_t_mw, cfg.alpha)
    direct_ok = sir(cfg.p_st_mw, gain_direct, cfg.d_sd, i_sd_s2, cfg.alpha) >= cfg.gamma_th_lin

    if n_rel > 0:
        delta = rel_points[:, None, :] - pts_s2[None, :, :]
        dist = np.maximum(np.hypot(delta[..., 0], delta[..., 1]), EPS_MIN)
        relay_itf = cfg.p_t_mw * np.sum(gains_relay_itf * dist ** (-cfg.alpha), axis=1)
        d_hop1 = relays.distances_to(ORIGIN)
        d_hop2 = relays.distances_to(sd_pos)
        sir_hop1 = _safe_ratio(
            cfg.p_st_mw * gains_hop1 * d_hop1 ** (-cfg.alpha), relay_itf)
        sir_hop2 = (cfg.p_st_mw * gains_hop2 * d_hop2 ** (-cfg.alpha) / i_sd_s3
                    if i_sd_s3 > 0 else np.full(n_rel, math.inf))
        decode_count = int(np.count_nonzero(sir_hop1 >= cfg.gamma_th_lin))
    else:
        relay_itf = np.empty(0)
        sir_hop1 = np.empty(0)
        sir_hop2 = np.empty(0)
        decode_count = 0

    selected, _ = select_relay(scheme, relays, relay_itf, i_sd_s3, cfg, gen)

    if scheme == "bstd":
        sr_decode_ok = decode_count > 0
    else:
        sr_decode_ok = selected is not None and bool(
            sir_hop1[selected] >= cfg.gamma_th_lin)
    if selected is not None:
        sr_clear = is_clear_of_guard_zones(rel_points[selected], pr_field, cfg.r_gz)
        sd_decode_ok = bool(sir_hop2[selected] >= cfg.gamma_th_lin)
    else:
        sr_clear = False
        sd_decode_ok = False

    relay_branch = (n_rel >= 1 and sr_decode_ok and sr_clear and sd_decode_ok)
    if not cfg.direct_link:
        success = harvest_ok and st_clear and relay_branch
    elif cfg.direct_literal_events:
        # Exact decomposed event set: the direct branch only counts alongside a
        # decoding, guard-cleared relay or when no relay decoded at all.
        combined = (sr_decode_ok and sr_clear and (direct_ok or sd_decode_ok))
        relay_failed = (not sr_decode_ok) and n_rel >= 1 and direct_ok
        empty = n_rel == 0 and direct_ok
        success = harvest_ok and st_clear and (combined or relay_failed or empty)
    else:
        success = harvest_ok and st_clear and (direct_ok or relay_branch)

    return RealizationOutcome(
        harvest_ok=bool(harvest_ok),
        st_clear=st_clear,
        relay_count=n_rel,
        selected_relay=selected,
        sr_decode_ok=bool(sr_decode_ok),
        sr_clear=bool(sr_clear),
        sd_decode_ok=bool(sd_decode_ok),
        direct_decode_ok=bool(direct_ok),
        success=bool(success),
        harvested_energy=float(e_h),
        k_value=float(k_value),
        decode_count=decode_count,
    )


def _outcome_flags(out: RealizationOutcome):
    return (out.harvest_ok, out.st_clear, out.relay_count >= 1, out.sr_decode_ok,
            out.sr_clear, out.sd_decode_ok, out.direct_decode_ok, out.success)


def _count_chunk(cfg: SystemConfig, scheme: str, seed: int, start: int,
                 stop: int) -> np.ndarray:
    counts = np.zeros(len(FLAG_NAMES), dtype=np.int64)
    for trial in range(start, stop):
        out = run_realization(cfg, scheme, RngStream(seed, trial))
        counts += np.fromiter(_outcome_flags(out), dtype=np.int64,
                              count=len(FLAG_NAMES))
    return counts


def default_workers() -> int:
    env = os.environ.get("EHRELAY_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def simulate(cfg: SystemConfig, scheme: str, trials: int, seed: int,
             workers: int | None = None) -> SimulationResult:
    """Estimate the success probability and every intermediate-flag frequency.

    Counting is integer-exact per trial, and each trial owns stream
    (seed, trial), so the result is bit-identical for any worker count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    if not cfg.validated:
        raise ValueError("config must pass validate() before simulation")
    workers = workers if workers is not None else default_workers()

    if workers <= 1:
        counts = _count_chunk(cfg, scheme, seed, 0, trials)
    else:
        chunk = max(256, -(-trials // (workers * 4)))
        spans = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
        counts = np.zeros(len(FLAG_NAMES), dtype=np.int64)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_count_chunk, cfg, scheme, seed, a, b)
                       for a, b in spans]
            for fut in futures:
                counts += fut.result()

    flag_counts = dict(zip(FLAG_NAMES, (int(c) for c in counts)))
    flag_freq = {name: flag_counts[name] / trials for name in FLAG_NAMES}
    lo, hi = wilson_interval(flag_counts["success"], trials)
    estimate = EstimateCI(p_hat=flag_freq["success"], trials=trials,
                          ci_low=lo, ci_high=hi, seed=seed)
    return SimulationResult(scheme=scheme, trials=trials, seed=seed,
                            estimate=estimate, flag_counts=flag_counts,
                            flag_frequencies=flag_freq)
