"""Analytical success-probability machinery.

Everything here is a pure function of a validated ``SystemConfig`` and a
``QuadratureSpec``: Laplace transforms of the harvested sum, inversion of its
characteristic function, the per-scheme decode factors, their path-loss-4
closed forms, and the composed success probabilities with guard-zone and
empty-disc corrections applied exactly as the factorizations are written
(intermediate factors stay inspectable even where they cancel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import SystemConfig, harvest_threshold


class QuadratureFailure(RuntimeError):
    """Quadrature did not reach the requested tolerance.

    ``achieved`` is the last observed relative change.
    """

    def __init__(self, context: str, achieved: float):
        self.context = context
        self.achieved = achieved
        super().__init__(f"{context}: quadrature stalled at relative change {achieved:.3g}")


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts and tolerances for the numeric integration paths."""

    nodes: int = 128           # starting Gauss-Legendre node count
    rel_tol: float = 1e-9      # doubling stops once relative change is below this
    osc_tol: float = 1e-12     # envelope cutoff for the oscillatory inversion
    max_doublings: int = 7

    def __post_init__(self):
        if self.nodes < 16:
            raise ValueError(f"node count must be >= 16, got {self.nodes}")
        if self.rel_tol <= 0 or self.osc_tol <= 0:
            raise ValueError("tolerances must be positive")


DEFAULT_QUAD = QuadratureSpec()


@lru_cache(maxsize=32)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def _gl_integrate(f, a: float, b: float, n: int) -> float:
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * x
    return float(half * np.sum(w * f(nodes)))


def integrate_doubling(f, a: float, b: float, quad: QuadratureSpec,
                       context: str = "integral") -> float:
    """Gauss-Legendre on [a, b], doubling nodes until the value settles."""
    n = quad.nodes
    value = _gl_integrate(f, a, b, n)
    for _ in range(quad.max_doublings):
        n *= 2
        refined = _gl_integrate(f, a, b, n)
        change = abs(refined - value)
        value = refined
        if change <= quad.rel_tol * max(abs(refined), 1e-300):
            return value
    raise QuadratureFailure(context, change / max(abs(value), 1e-300))


def integrate_semi_infinite(f, quad: QuadratureSpec,
                            context: str = "semi-infinite integral") -> float:
    """Integrate f on [0, inf) via the substitution x = t/(1-t)."""

    def mapped(t):
        x = t / (1.0 - t)
        return f(x) / (1.0 - t) ** 2

    return integrate_doubling(mapped, 0.0, 1.0, quad, context=context)


def gamma_pair(alpha: float) -> float:
    """Gamma(1+2/alpha)*Gamma(1-2/alpha) via the reflection identity.

    Equals (2*pi/alpha)/sin(2*pi/alpha); at alpha=4 this is pi/2, which the
    tests use as a self-check constant. Requires alpha > 2.
    """
    if alpha <= 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    x = 2.0 * math.pi / alpha
    return x / math.sin(x)


def interference_integral(beta: float, alpha: float) -> float:
    """Closed form of the path-loss integral int_0^inf x/(1 + x^alpha/beta) dx.

    Evaluates to (pi/alpha) * beta^(2/alpha) / sin(2*pi/alpha); this is the
    primitive behind every decode factor below.
    """
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    if alpha <= 2:
        raise ValueError(f"alpha must exceed 2 for convergence, got {alpha}")
    if beta == 0.0:
        return 0.0
    return (math.pi / alpha) * beta ** (2.0 / alpha) / math.sin(2.0 * math.pi / alpha)


def interference_integral_quad(beta: float, alpha: float,
                               quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Quadrature cross-check of ``interference_integral``."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    if alpha <= 2:
        raise ValueError(f"alpha must exceed 2 for convergence, got {alpha}")
    if beta == 0.0:
        return 0.0
    return integrate_semi_infinite(
        lambda x: x / (1.0 + x ** alpha / beta), quad,
        context="interference integral")


def laplace_K(s: float, cfg: SystemConfig) -> float:
    """Laplace transform of the normalized harvested sum K at s >= 0.

    exp(-lambda_p*pi*Gamma(1+2/alpha)*Gamma(1-2/alpha)
        * [a^(2/alpha) + ((1-a)/2)^(2/alpha)] * s^(2/alpha)),
    the product of the two independent slot contributions.
    """
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if s == 0.0 or cfg.lambda_p == 0.0:
        return 1.0
    return math.exp(-levy_scale(cfg) * s ** (2.0 / cfg.alpha))


def levy_scale(cfg: SystemConfig) -> float:
    """Coefficient C in laplace_K(s) = exp(-C * s^(2/alpha))."""
    weights = cfg.a ** (2.0 / cfg.alpha) + ((1.0 - cfg.a) / 2.0) ** (2.0 / cfg.alpha)
    return cfg.lambda_p * math.pi * gamma_pair(cfg.alpha) * weights


def p_h_levy_erf(cfg: SystemConfig) -> float:
    """Harvest probability via the alpha=4 stable-law tail: erf(C/(2*sqrt(sigma))).

    At alpha=4 the harvested sum follows a one-sided 1/2-stable law whose
    upper tail beyond sigma is erf(C/(2*sqrt(sigma))).
    """
    if cfg.alpha != 4.0:
        raise ValueError("closed form requires alpha = 4")
    sigma = harvest_threshold(cfg)
    if sigma <= 0.0:
        return 1.0
    if cfg.lambda_p == 0.0:
        return 0.0
    return math.erf(levy_scale(cfg) / (2.0 * math.sqrt(sigma)))


def p_h_gil_pelaez(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Harvest probability by characteristic-function inversion.

    Pr(K >= sigma) = 1/2 + (1/pi) * int_0^inf Im[e^(-j*w*sigma) Phi_K(w)]/w dw
    with Phi_K(w) = exp(-C*(-j*w)^(2/alpha)). Substituting w = v^(alpha/2)
    removes the integrable singularity at 0 and turns the envelope into a
    plain exponential; panels are sized to at most ~pi of local phase change.
    """
    sigma = harvest_threshold(cfg)
    if sigma <= 0.0:
        return 1.0
    if cfg.lambda_p == 0.0:
        return 0.0

    alpha = cfg.alpha
    c_scale = levy_scale(cfg)
    cosf = math.cos(math.pi / alpha)
    sinf = math.sin(math.pi / alpha)
    half_alpha = alpha / 2.0

    # In v-space the integrand is
    #   (alpha/2) * exp(-C*cos(pi/alpha)*v) * sin(C*sin(pi/alpha)*v - sigma*v^(alpha/2)) / v
    decay = c_scale * cosf
    v_end = math.log(1.0 / quad.osc_tol) / decay

    # Panel boundaries: width ~ pi / (local phase rate), evaluated conservatively
    # at the panel's far edge so no panel spans much more than half a cycle.
    bounds = [0.0]
    v = 0.0
    max_panels = 400_000
    while v < v_end:
        rate = c_scale * sinf + half_alpha * sigma * max(v, 1e-12) ** (half_alpha - 1.0)
        width = math.pi / rate
        rate = c_scale * sinf + half_alpha * sigma * (v + width) ** (half_alpha - 1.0)
        width = math.pi / rate
        v = min(v + width, v_end)
        bounds.append(v)
        if len(bounds) > max_panels:
            raise QuadratureFailure("gil-pelaez panels", float("inf"))
    bounds = np.asarray(bounds)

    def total(n_nodes: int) -> float:
        x, w = _leggauss(n_nodes)
        half = 0.5 * (bounds[1:] - bounds[:-1])
        mid = 0.5 * (bounds[1:] + bounds[:-1])
        nodes = mid[:, None] + half[:, None] * x[None, :]
        phase = c_scale * sinf * nodes - sigma * nodes ** half_alpha
        vals = (half_alpha * np.exp(-decay * nodes) * np.sin(phase) / nodes)
        return float(np.sum(half[:, None] * w[None, :] * vals))

    value = total(16)
    refined = total(32)
    if abs(refined - value) > 1e-9 * max(abs(refined), 1.0):
        finer = total(64)
        if abs(finer - refined) > 1e-9 * max(abs(finer), 1.0):
            raise QuadratureFailure(
                "gil-pelaez inversion", abs(finer - refined) / max(abs(finer), 1e-300))
        refined = finer
    return min(1.0, max(0.0, 0.5 + refined / math.pi))


def guard_zone_prob(lambda_p: float, r_gz: float) -> float:
    """Probability that no guard-zone center falls within r_gz of a transmitter."""
    if lambda_p < 0 or r_gz < 0:
        raise ValueError("lambda_p and r_gz must be >= 0")
    return math.exp(-math.pi * lambda_p * r_gz * r_gz)


def p_nonempty(cfg: SystemConfig) -> float:
    """Probability that the relay disc holds at least one relay."""
    return -math.expm1(-math.pi * cfg.lambda_sr * cfg.r_disc ** 2)


# ---------------------------------------------------------------------------
# Per-scheme decode factors. Each factor has a general-alpha quadrature path
# and, at alpha = 4, a closed form; the two must agree to ~1e-8 relative.
# ---------------------------------------------------------------------------

def _resolve_method(cfg: SystemConfig, method: str) -> str:
    if method == "auto":
        return "closed" if cfg.alpha == 4.0 else "quad"
    if method not in ("closed", "quad"):
        raise ValueError(f"method must be auto/closed/quad, got {method!r}")
    return method


@lru_cache(maxsize=32)
def _standard_pathloss_integral(alpha: float, nodes: int, rel_tol: float,
                                max_doublings: int) -> float:
    """Numeric value of int_0^inf y/(1 + y^alpha) dy.

    The substitution x = beta^(1/alpha)*y reduces the path-loss integral at
    any beta to beta^(2/alpha) times this standardized integral, so the
    quadrature path needs it only once per alpha.
    """
    quad = QuadratureSpec(nodes=nodes, rel_tol=rel_tol, max_doublings=max_doublings)
    return integrate_semi_infinite(lambda y: y / (1.0 + y ** alpha), quad,
                                   context="standardized path-loss integral")


def _decode_kernel(cfg: SystemConfig, tx_power: float, distances, method: str,
                   quad: QuadratureSpec):
    """Per-link decode probability at the given distances.

    exp(-2*pi*lambda_p * II(gamma*p_t*d^alpha / tx_power)) where II is the
    path-loss integral; this is the interference-averaged chance that one
    Rayleigh link at distance d clears the SIR threshold.
    """
    distances = np.asarray(distances, dtype=float)
    beta = cfg.gamma_th_lin * cfg.p_t_mw * distances ** cfg.alpha / tx_power
    if method == "quad":
        scale = _standard_pathloss_integral(cfg.alpha, quad.nodes, quad.rel_tol,
                                            quad.max_doublings)
    else:
        scale = (math.pi / cfg.alpha) / math.sin(2.0 * math.pi / cfg.alpha)
    return np.exp(-2.0 * math.pi * cfg.lambda_p * scale * beta ** (2.0 / cfg.alpha))


def _alpha4_rate(cfg: SystemConfig, tx_power: float) -> float:
    """q in exp(-q*d^2), the alpha=4 decode kernel exponent per squared meter."""
    return (math.pi ** 2 / 2.0) * cfg.lambda_p * math.sqrt(
        cfg.gamma_th_lin * cfg.p_t_mw / tx_power)


def _all_fail_bound(cfg: SystemConfig, tx_power: float, method: str,
                    quad: QuadratureSpec, context: str) -> float:
    """Probability that no relay in the disc clears the first-hop threshold.

    exp(-2*pi*lambda_sr * int_0^R kernel(l) * l dl); shared by the composite
    channel and best-SIR selection rules, which coincide under a single
    secondary transmit power.
    """
    if cfg.lambda_sr == 0.0:
        return 1.0
    if method == "closed":
        q = _alpha4_rate(cfg, tx_power)
        if q == 0.0:
            inner = cfg.r_disc ** 2 / 2.0
        else:
            inner = -math.expm1(-q * cfg.r_disc ** 2) / (2.0 * q)
    else:
        inner = integrate_doubling(
            lambda l: _decode_kernel(cfg, tx_power, l, method, quad) * l,
            0.0, cfg.r_disc, quad, context=context)
    return math.exp(-2.0 * math.pi * cfg.lambda_sr * inner)


def psi31_bound(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUAD,
                method: str = "auto") -> float:
    """Chance the best composite-channel relay fails to decode hop one."""
    method = _resolve_method(cfg, method)
    return _all_fail_bound(cfg, cfg.p_st_mw, method, quad, "psi31")


def psi3(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUAD,
         method: str = "auto") -> float:
    """Chance the best composite-channel relay decodes hop one."""
    return 1.0 - psi31_bound(cfg, quad, method)


def omega1(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUAD,
           method: str = "auto") -> float:
    """Chance that every relay's instantaneous first-hop SIR is below threshold."""
    method = _resolve_method(cfg, method)
    return _all_fail_bound(cfg, cfg.p_st_mw, method, quad, "omega1")


def psi4_far_field(cfg: SystemConfig, tx_power: float | None = None,
                   quad: QuadratureSpec = DEFAULT_QUAD,
                   method: str = "auto") -> float:
    """Far-field second-hop decode probability at the destination.

    The forwarding distance is approximated by the transmitter-destination
    separation d_sd; parameterizing tx_power lets the same expression serve
    the relayed hop and the direct link.
    """
    method = _resolve_method(cfg, method)
    if tx_power is None:
        tx_power = cfg.p_st_mw
    if tx_power <= 0:
        raise ValueError(f"tx_power must be > 0, got {tx_power}")
    return float(_decode_kernel(cfg, tx_power, cfg.d_sd, method, quad))


def delta_decode(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUAD,
                 method: str = "auto") -> float:
    """Chance a uniformly placed relay decodes hop one with the transmitter
    outside every guard zone (the guard factor is part of the definition)."""
    method = _resolve_method(cfg, method)
    guard = guard_zone_prob(cfg.lambda_p, cfg.r_gz)
    if method == "closed":
        q = _alpha4_rate(cfg, cfg.p_st_mw)
        if q == 0.0:
            body = 1.0
        else:
            body = -math.expm1(-q * cfg.r_disc ** 2) / (q * cfg.r_disc ** 2)
    else:
        body = integrate_doubling(
            lambda r: _decode_kernel(cfg, cfg.p_st_mw, r, method, quad)
            * 2.0 * r / cfg.r_disc ** 2,
            0.0, cfg.r_disc, quad, context="delta")
    return body * guard


def xi_bstd(r, theta, cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUAD,
            method: str = "auto"):
    """Interference-averaged decode chance of one decoding relay at polar
    (r, theta) forwarding to the destination over its exact distance."""
    method = _resolve_method(cfg, method)
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    f_sq = r ** 2 + cfg.d_sd ** 2 - 2.0 * r * cfg.d_sd * np.cos(theta)
    dist = np.sqrt(np.maximum(f_sq, 0.0))
    return _decode_kernel(cfg, cfg.p_st_mw, dist, method, quad)


def chi_integral(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUAD,
                 method: str = "auto") -> float:
    """Tensor-product quadrature of xi(r, theta)*r over the relay disc."""
    method = _resolve_method(cfg, method)

    def evaluate(n_r: int, n_t: int) -> float:
        xr, wr = _leggauss(n_r)
        xt, wt = _leggauss(n_t)
        r_nodes = 0.5 * cfg.r_disc * (xr + 1.0)
        r_weights = 0.5 * cfg.r_disc * wr
        t_nodes = math.pi * (xt + 1.0)
        t_weights = math.pi * wt
        grid_r = r_nodes[:, None]
        grid_t = t_nodes[None, :]
        vals = xi_bstd(grid_r, grid_t, cfg, quad, method) * grid_r
        return float(r_weights @ vals @ t_weights)

    n = max(32, quad.nodes // 2)
    value = evaluate(n, n)
    for _ in range(quad.max_doublings):
        n *= 2
        refined = evaluate(n, n)
        change = abs(refined - value)
        value = refined
        if change <= quad.rel_tol * max(abs(refined), 1e-300):
            return value
    raise QuadratureFailure("chi double integral", change / max(abs(value), 1e-300))


def chi_bstd(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUAD,
             method: str = "auto") -> float:
    """Chance that no relay in the decoding set reaches the destination.

    exp(-lambda_sr * Delta * intint xi r dr dtheta) over the thinned field of
    relays that decoded hop one.
    """
    if cfg.lambda_sr == 0.0:
        return 1.0
    delta = delta_decode(cfg, quad, method)
    return math.exp(-cfg.lambda_sr * delta * chi_integral(cfg, quad, method))


# ---------------------------------------------------------------------------
# Composed success probabilities.
# ---------------------------------------------------------------------------

BREAKDOWN_FIELDS = (
    "p_h", "guard_st", "guard_sr", "p_nonempty",
    "psi31", "psi3", "psi4",
    "omega1", "omega", "phi",
    "delta", "lambda_eff", "chi", "p_dsucc_sd",
    "pr_direct_fail", "p11", "p12", "p22", "p32", "pr_n1_zero",
    "p_dsucc_dir", "p_succ",
)


@dataclass
class AnalyticBreakdown:
    """Every analytic factor of one scheme's success probability.

    Fields that do not participate in the scheme stay ``None``; all populated
    probability fields lie in [0, 1]. ``lambda_eff`` is a density (relays per
    unit area), not a probability.
    """

    scheme: str
    p_h: float | None = None
    guard_st: float | None = None
    guard_sr: float | None = None
    p_nonempty: float | None = None
    psi31: float | None = None
    psi3: float | None = None
    psi4: float | None = None
    omega1: float | None = None
    omega: float | None = None
    phi: float | None = None
    delta: float | None = None
    lambda_eff: float | None = None
    chi: float | None = None
    p_dsucc_sd: float | None = None
    pr_direct_fail: float | None = None
    p11: float | None = None
    p12: float | None = None
    p22: float | None = None
    p32: float | None = None
    pr_n1_zero: float | None = None
    p_dsucc_dir: float | None = None
    p_succ: float | None = None


class UnsupportedScheme(ValueError):
    """Raised for schemes with no analytic expression (the random baseline)."""


def _common(cfg: SystemConfig, quad: QuadratureSpec, scheme: str) -> AnalyticBreakdown:
    b = AnalyticBreakdown(scheme=scheme)
    b.p_h = p_h_gil_pelaez(cfg, quad)
    b.guard_st = guard_zone_prob(cfg.lambda_p, cfg.r_gz)
    b.guard_sr = guard_zone_prob(cfg.lambda_p, cfg.r_gz)
    b.p_nonempty = p_nonempty(cfg)
    return b


def p_succ_bcc(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> AnalyticBreakdown:
    """Composite-channel selection: p_h * psi3 * psi4 * both guard factors.

    The empty-disc conditioning divides and re-multiplies Pr(N >= 1), which
    cancels; both the conditional and the product are recorded.
    """
    b = _common(cfg, quad, "bcc")
    b.psi31 = psi31_bound(cfg, quad)
    b.psi3 = 1.0 - b.psi31
    b.psi4 = psi4_far_field(cfg, cfg.p_st_mw, quad)
    conditional = (b.psi3 * b.psi4 / b.p_nonempty) if b.p_nonempty > 0 else 0.0
    b.p_dsucc_sd = conditional * b.p_nonempty * b.guard_st * b.guard_sr
    b.p_succ = b.p_h * b.p_dsucc_sd
    return b


def p_succ_bsir(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> AnalyticBreakdown:
    """Best first-hop SIR selection: p_h * (1-omega1) * phi * guard factors."""
    b = _common(cfg, quad, "bsir")
    b.omega1 = omega1(cfg, quad)
    b.omega = 1.0 - b.omega1
    b.phi = psi4_far_field(cfg, cfg.p_st_mw, quad)
    conditional = (b.omega * b.phi / b.p_nonempty) if b.p_nonempty > 0 else 0.0
    b.p_dsucc_sd = conditional * b.p_nonempty * b.guard_st * b.guard_sr
    b.p_succ = b.p_h * b.p_dsucc_sd
    return b


def p_succ_bstd(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> AnalyticBreakdown:
    """Best second-hop SIR among decoders: p_h * (1 - chi) * relay guard.

    The transmitter guard factor is already inside the decode-probability
    thinning (delta), so it is not applied again.
    """
    b = _common(cfg, quad, "bstd")
    b.delta = delta_decode(cfg, quad)
    b.lambda_eff = b.delta * cfg.lambda_sr
    b.chi = chi_bstd(cfg, quad)
    b.p_dsucc_sd = (1.0 - b.chi) * b.guard_sr
    b.p_succ = b.p_h * b.p_dsucc_sd
    return b


def p_succ_direct(cfg: SystemConfig, scheme: str,
                  quad: QuadratureSpec = DEFAULT_QUAD) -> AnalyticBreakdown:
    """Success probability with the direct link and selection combining.

    Three-term decomposition: a selection-combining term where both the
    transmitter and the forwarding relay are outside guard zones (squared
    guard factor), a relay-failed term, and an empty-disc term (single guard
    factor each). Hop-one joint factors are used directly so the empty-disc
    division and re-multiplication cancel without 0/0 at lambda_sr = 0.
    """
    if not cfg.direct_link:
        raise ValueError("p_succ_direct requires cfg.direct_link = True")
    phi_dir = psi4_far_field(cfg, cfg.p_st_mw, quad)
    guard = guard_zone_prob(cfg.lambda_p, cfg.r_gz)

    if scheme in ("bcc", "bsir"):
        b = _common(cfg, quad, scheme)
        b.phi = phi_dir
        b.pr_direct_fail = 1.0 - phi_dir
        p0 = 1.0 - b.p_nonempty
        if scheme == "bcc":
            b.psi31 = psi31_bound(cfg, quad)
            b.psi3 = 1.0 - b.psi31
            hop1_joint = b.psi3
            b.psi4 = psi4_far_field(cfg, cfg.p_st_mw, quad)
            hop2 = b.psi4
        else:
            b.omega1 = omega1(cfg, quad)
            b.omega = 1.0 - b.omega1
            hop1_joint = b.omega
            hop2 = phi_dir
        failed_joint = max(1.0 - hop1_joint - p0, 0.0)
        if b.p_nonempty > 0:
            cond_pass = hop1_joint / b.p_nonempty
            cond_fail = failed_joint / b.p_nonempty
        else:
            cond_pass = cond_fail = 0.0
        if scheme == "bcc":
            b.p11, b.p12 = cond_pass, cond_fail
        else:
            b.p22, b.p32 = cond_pass, cond_fail
        combining = 1.0 - (1.0 - phi_dir) * (1.0 - hop2)
        term_both = combining * hop1_joint * guard * guard
        term_failed = phi_dir * failed_joint * guard
        term_empty = phi_dir * p0 * guard
        b.p_dsucc_dir = term_both + term_failed + term_empty
        b.p_succ = b.p_h * b.p_dsucc_dir
        return b

    if scheme == "bstd":
        b = _common(cfg, quad, scheme)
        b.phi = phi_dir
        b.pr_direct_fail = 1.0 - phi_dir
        b.delta = delta_decode(cfg, quad)
        b.lambda_eff = b.delta * cfg.lambda_sr
        b.chi = chi_bstd(cfg, quad)
        b.pr_n1_zero = math.exp(-math.pi * b.lambda_eff * cfg.r_disc ** 2)
        # The decoding-set void chance never exceeds the all-fail chance chi.
        some_decoder = 1.0 - b.pr_n1_zero
        fail_with_decoders = max(b.chi - b.pr_n1_zero, 0.0)
        term_relay = (some_decoder - (1.0 - phi_dir) * fail_with_decoders) * guard
        term_empty = phi_dir * b.pr_n1_zero * guard
        b.p_dsucc_dir = term_relay + term_empty
        b.p_succ = b.p_h * b.p_dsucc_dir
        return b

    raise UnsupportedScheme(f"no analytic expression for scheme {scheme!r}")


def analyze(cfg: SystemConfig, scheme: str,
            quad: QuadratureSpec = DEFAULT_QUAD) -> AnalyticBreakdown:
    """Full analytic breakdown for one scheme under one configuration."""
    if scheme == "random_baseline":
        raise UnsupportedScheme(
            "random_baseline is a simulation-only reference; no analytic expression")
    if cfg.direct_link:
        return p_succ_direct(cfg, scheme, quad)
    if scheme == "bcc":
        return p_succ_bcc(cfg, quad)
    if scheme == "bsir":
        return p_succ_bsir(cfg, quad)
    if scheme == "bstd":
        return p_succ_bstd(cfg, quad)
    raise UnsupportedScheme(f"unknown scheme {scheme!r}")


def alpha4_selfcheck(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUAD):
    """Closed-form vs quadrature agreement at alpha = 4.

    Returns (name, closed, quadrature, relative difference) tuples; callers
    surface entries whose difference exceeds their tolerance as warnings.
    """
    if cfg.alpha != 4.0:
        return []
    checks = []

    def rel(a, b):
        return abs(a - b) / max(abs(a), abs(b), 1e-300)

    pairs = [
        ("psi31", psi31_bound(cfg, quad, "closed"), psi31_bound(cfg, quad, "quad")),
        ("omega1", omega1(cfg, quad, "closed"), omega1(cfg, quad, "quad")),
        ("delta", delta_decode(cfg, quad, "closed"), delta_decode(cfg, quad, "quad")),
        ("psi4", psi4_far_field(cfg, cfg.p_st_mw, quad, "closed"),
         psi4_far_field(cfg, cfg.p_st_mw, quad, "quad")),
        ("xi", float(xi_bstd(cfg.r_disc / 2.0, 1.0, cfg, quad, "closed")),
         float(xi_bstd(cfg.r_disc / 2.0, 1.0, cfg, quad, "quad"))),
    ]
    for name, closed, quad_val in pairs:
        checks.append((name, closed, quad_val, rel(closed, quad_val)))
    return checks
