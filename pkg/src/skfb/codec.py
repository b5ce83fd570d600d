"""The SK feedback-coding recursion in both algebraic forms.

One trial transmits a PAM message point theta over n_total channel uses:
the first use sends sqrt(gamma) * theta, every later use sends a scaled
version of the transmitter's view of the receiver's current estimation
error.  The receiver refines its estimate with a linear MMSE correction
whose gain follows the analytically tracked error variance, which
contracts by sigma^2 / (P_rest + sigma^2) per use.

The two variants differ only in how the transmitter forms the error
signal U_n:

  * estimate-difference: U_n = theta_hat_tx_{n-1} - theta, where
    theta_hat_tx is the transmitter's feedback-tracked copy of the
    receiver estimate;
  * error-recursion:     U_n = U_{n-1} - beta_{n-1} * Ytilde_{n-1},
    seeded by U_1 = (Ytilde_0 - X_0) / sqrt(gamma).

The two are algebraically identical at infinite precision with noiseless
feedback but accumulate rounding differently, which is exactly what the
precision experiments measure.  All state arithmetic is routed through
the configured PrecisionMode; channel noise is drawn at full precision
and receipt of a channel output rounds it into the state's precision.

State fields are arrays over a block of trials; a block of one gives the
single-trial view.  Trials whose state goes non-finite are flagged
failed, transmit zeros from then on, and decode to position 0.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from . import channel as _channel
from .core import (
    BitMapping,
    PamSymbol,
    SkConfig,
    SkVariant,
    int_to_bits,
    label_of_index,
    pam_step,
    popcount_u64,
    value_to_index,
)
from .precision import q_add, q_div, q_mul, q_sqrt, q_sub, quantize

SIGNAL_POWER = 1.0  # per-symbol power constraint P


@dataclass(frozen=True)
class Schedule:
    """Per-step scaling constants shared by transmitter and receiver.

    Derived from the configuration alone (never from trial data), under
    the configured precision: alpha[n] scales the error signal to the
    per-use power budget, beta[n] is the linear MMSE gain
    alpha_n * u_var_n / (P_rest + sigma^2), and u_var[n] is the tracked
    Var(U_n) before the step-n correction (u_var[n_total] is terminal).
    """

    sigma2: float
    p_rest: float
    sqrt_gamma: float
    alpha: np.ndarray
    beta: np.ndarray
    u_var: np.ndarray


def residual_power(cfg: SkConfig) -> float:
    """Per-use power of the correction steps under the energy constraint.

    Total block energy is held at n_total * P while the first use takes
    gamma * P, so the remaining n_total - 1 uses share the residual.
    """
    if cfg.n_total == 1:
        return 0.0
    return SIGNAL_POWER * (cfg.n_total - cfg.gamma) / (cfg.n_total - 1)


@functools.lru_cache(maxsize=128)
def schedule(cfg: SkConfig) -> Schedule:
    """Precompute alpha/beta/u_var for every step of ``cfg``."""
    mode = cfg.precision
    n = cfg.n_total
    sigma2 = quantize(_channel.snr_db_to_noise_std(cfg.forward_snr_db) ** 2, mode)
    p_rest = quantize(residual_power(cfg), mode)
    sqrt_gamma = q_sqrt(quantize(cfg.gamma, mode), mode)

    alpha = np.full(n, np.nan)
    beta = np.full(n, np.nan)
    u_var = np.full(n + 1, np.nan)

    if sigma2 == 0.0:
        # noiseless forward channel: the estimate is exact after the
        # first use, so nothing is sent or corrected afterwards
        alpha[1:] = 0.0
        beta[1:] = 0.0
        u_var[1:] = 0.0
        return Schedule(sigma2, p_rest, sqrt_gamma, alpha, beta, u_var)

    denom = q_add(p_rest, sigma2, mode)
    ratio = q_div(sigma2, denom, mode)
    u_var[1] = q_div(sigma2, quantize(cfg.gamma, mode), mode)
    for i in range(1, n):
        alpha[i] = q_sqrt(q_div(p_rest, u_var[i], mode), mode)
        beta[i] = q_div(q_mul(alpha[i], u_var[i], mode), denom, mode)
        u_var[i + 1] = q_mul(u_var[i], ratio, mode)
    return Schedule(sigma2, p_rest, sqrt_gamma, alpha, beta, u_var)


@dataclass
class SkState:
    """Recursion state over a block of trials after channel use ``step``."""

    theta: np.ndarray  # quantized message points
    u: np.ndarray  # last error signal U_n
    theta_hat_rx: np.ndarray  # receiver estimate
    theta_hat_tx: np.ndarray  # transmitter's tracked copy
    prev_y_fb: np.ndarray  # last feedback output Ytilde_n (quantized)
    failed: np.ndarray  # trials that went non-finite
    alpha: float  # power scaling used at this step
    prev_beta: float  # MMSE gain used at this step
    u_var: float  # tracked Var(U) entering the next step
    step: int  # index of the last channel use, in [0, n_total)


def sk_init(theta, cfg: SkConfig, channels) -> SkState:
    """Run the first channel use: X_0 = sqrt(gamma) * theta.

    ``theta`` may be a PamSymbol, a scalar amplitude, or an array of
    amplitudes (one per trial).  ``channels`` is the (forward, feedback)
    pair from :func:`skfb.channel.make_channels`.
    """
    if isinstance(theta, PamSymbol):
        theta = theta.value
    mode = cfg.precision
    sched = schedule(cfg)
    forward, feedback = channels

    theta_q = np.atleast_1d(quantize(np.asarray(theta, dtype=np.float64), mode))
    x0 = q_mul(sched.sqrt_gamma, theta_q, mode)
    y0 = quantize(forward.transmit(x0), mode)
    theta_hat_rx = q_div(y0, sched.sqrt_gamma, mode)
    y0_fb = quantize(feedback.transmit(y0), mode)
    theta_hat_tx = q_div(y0_fb, sched.sqrt_gamma, mode)
    # error-recursion seed U_1 = (Ytilde_0 - X_0) / sqrt(gamma)
    u = q_div(q_sub(y0_fb, x0, mode), sched.sqrt_gamma, mode)

    failed = ~(
        np.isfinite(theta_hat_rx) & np.isfinite(theta_hat_tx) & np.isfinite(u)
    )
    return SkState(
        theta=theta_q,
        u=u,
        theta_hat_rx=theta_hat_rx,
        theta_hat_tx=theta_hat_tx,
        prev_y_fb=y0_fb,
        failed=failed,
        alpha=sched.sqrt_gamma,
        prev_beta=0.0,
        u_var=float(sched.u_var[1]),
        step=0,
    )


def _advance(state: SkState, u_n: np.ndarray, cfg: SkConfig, channels) -> SkState:
    mode = cfg.precision
    sched = schedule(cfg)
    forward, feedback = channels
    n = state.step + 1
    alpha = float(sched.alpha[n])
    beta = float(sched.beta[n])

    with np.errstate(invalid="ignore", over="ignore"):
        x = q_mul(alpha, u_n, mode)
    failed = state.failed | ~np.isfinite(x)
    x = np.where(failed, 0.0, x)

    y = quantize(forward.transmit(x), mode)
    with np.errstate(invalid="ignore", over="ignore"):
        theta_hat_rx = q_sub(state.theta_hat_rx, q_mul(beta, y, mode), mode)
        y_fb = quantize(feedback.transmit(y), mode)
        theta_hat_tx = q_sub(state.theta_hat_tx, q_mul(beta, y_fb, mode), mode)
    failed = failed | ~(np.isfinite(theta_hat_rx) & np.isfinite(theta_hat_tx))

    return replace(
        state,
        u=u_n,
        theta_hat_rx=theta_hat_rx,
        theta_hat_tx=theta_hat_tx,
        prev_y_fb=y_fb,
        failed=failed,
        alpha=alpha,
        prev_beta=beta,
        u_var=float(sched.u_var[n + 1]),
        step=n,
    )


def sk_step_estimate_difference(state: SkState, cfg: SkConfig, channels) -> SkState:
    """One correction step with U_n = theta_hat_tx_{n-1} - theta."""
    _check_can_step(state, cfg)
    mode = cfg.precision
    u_n = q_sub(state.theta_hat_tx, state.theta, mode)
    return _advance(state, u_n, cfg, channels)


def sk_step_error_recursion(state: SkState, cfg: SkConfig, channels) -> SkState:
    """One correction step with U_n = U_{n-1} - beta_{n-1} * Ytilde_{n-1}."""
    _check_can_step(state, cfg)
    mode = cfg.precision
    if state.step == 0:
        u_n = state.u  # seeded at init from (Ytilde_0 - X_0) / sqrt(gamma)
    else:
        with np.errstate(invalid="ignore", over="ignore"):
            u_n = q_sub(state.u, q_mul(state.prev_beta, state.prev_y_fb, mode), mode)
    return _advance(state, u_n, cfg, channels)


def sk_step(state: SkState, cfg: SkConfig, channels) -> SkState:
    """Dispatch one correction step according to ``cfg.variant``."""
    if cfg.variant is SkVariant.ESTIMATE_DIFFERENCE:
        return sk_step_estimate_difference(state, cfg, channels)
    return sk_step_error_recursion(state, cfg, channels)


def _check_can_step(state: SkState, cfg: SkConfig) -> None:
    if state.step >= cfg.n_total - 1:
        raise ValueError(
            f"all {cfg.n_total} channel uses already consumed (step={state.step})"
        )


def decode_indices(state: SkState, cfg: SkConfig) -> tuple[np.ndarray, np.ndarray]:
    """Minimum-distance indices and failure flags after the final use."""
    if state.step != cfg.n_total - 1:
        raise ValueError(
            f"decoding requires step {cfg.n_total - 1}, state is at {state.step}"
        )
    failed = state.failed | ~np.isfinite(state.theta_hat_rx)
    safe = np.where(failed, 0.0, state.theta_hat_rx)
    idx = value_to_index(safe, cfg.k)
    idx = np.where(failed, np.uint64(0), idx)
    return idx, failed


def sk_decode(state: SkState, cfg: SkConfig) -> np.ndarray:
    """Decoded bits, shape (trials, k); failed trials give position 0."""
    idx, _ = decode_indices(state, cfg)
    labels = label_of_index(idx, cfg.k, cfg.bit_mapping)
    return np.array([int_to_bits(int(v), cfg.k) for v in np.atleast_1d(labels)])


def run_block(cfg: SkConfig, theta, channels) -> tuple[np.ndarray, np.ndarray]:
    """Full encode-transmit-decode pass; returns (indices, failed)."""
    state = sk_init(theta, cfg, channels)
    for _ in range(cfg.n_total - 1):
        state = sk_step(state, cfg, channels)
    return decode_indices(state, cfg)


def terminal_estimate_std(cfg: SkConfig) -> float:
    """Closed-form std of theta_hat - theta at full precision.

    Independent of the recursion path: evaluates the variance contraction
    (sigma^2 / gamma) * (sigma^2 / (P_rest + sigma^2))^(n_total - 1)
    directly in double precision.
    """
    sigma2 = _channel.snr_db_to_noise_std(cfg.forward_snr_db) ** 2
    if sigma2 == 0.0:
        return 0.0
    p_rest = residual_power(cfg)
    var = (sigma2 / cfg.gamma) * (sigma2 / (p_rest + sigma2)) ** (cfg.n_total - 1)
    return math.sqrt(var)


def adjacent_bitflip_total(k: int, mapping: BitMapping) -> int:
    """Sum of bit flips over all ordered adjacent constellation pairs.

    Enumerated directly for small constellations; for larger ones the
    label structure gives the total in closed form (natural binary:
    2*(2M - 2 - k); Gray: 2*(M - 1), one flip per gap).
    """
    m_points = 1 << k
    if k <= 16:
        labels = label_of_index(np.arange(m_points, dtype=np.uint64), k, mapping)
        return 2 * int(popcount_u64(labels[1:] ^ labels[:-1]).sum())
    if mapping is BitMapping.NATURAL:
        return 2 * (2 * m_points - 2 - k)
    return 2 * (m_points - 1)


def analytic_ber_oracle(cfg: SkConfig) -> float:
    """Closed-form BER estimate for noiseless feedback at full precision.

    Adjacent-neighbor approximation: each gap is crossed with probability
    Q(delta_k / sigma_N), weighted by the bit flips of the configured
    mapping.  Rejects noisy-feedback configurations (no closed form).
    """
    if cfg.feedback_snr_db != math.inf:
        raise ValueError("analytic oracle requires noiseless feedback")
    sigma_n = terminal_estimate_std(cfg)
    if sigma_n == 0.0:
        return 0.0
    q = float(ndtr(-pam_step(cfg.k) / sigma_n))
    total = adjacent_bitflip_total(cfg.k, cfg.bit_mapping)
    return q * total / (cfg.k * (1 << cfg.k))


def optimize_gamma(cfg: SkConfig, grid) -> tuple[float, float]:
    """Grid-minimize the oracle BER over first-use power fractions.

    The energy constraint is applied through ``residual_power``: raising
    gamma drains the later uses.  Grid points are ranked by the terminal
    estimate spread, the strictly monotone core of the oracle, so the
    ordering stays meaningful even where the BER itself underflows to
    zero.  Ties go to the smaller gamma.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("gamma grid must be non-empty")
    if any(g <= 0 for g in grid):
        raise ValueError("gamma grid values must be positive")
    if cfg.feedback_snr_db != math.inf:
        raise ValueError("gamma optimization requires noiseless feedback")
    best_gamma, best_spread = None, math.inf
    for g in sorted(grid):
        spread = terminal_estimate_std(replace(cfg, gamma=float(g)))
        if spread < best_spread:
            best_gamma, best_spread = float(g), spread
    return best_gamma, analytic_ber_oracle(replace(cfg, gamma=best_gamma))
