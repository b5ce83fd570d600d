"""Monte Carlo engine: determinism, intervals, sweeps, comparisons."""

import math

import numpy as np
import pytest

from skfb.codec import analytic_ber_oracle
from skfb.core import SkConfig, SkVariant
from skfb.engine import (
    CHUNK_TRIALS,
    BerEstimate,
    ReferenceTable,
    best_block_length,
    cfg_for_sweep_k,
    classify_cell,
    derive_seed,
    estimate_ber,
    measure_symbol_power,
    sweep_block_length,
    sweep_feedback_snr,
    sweep_precision_grid,
    wilson_interval,
    REFERENCE_WINS,
    SK_WINS,
    TIE,
    UNAVAILABLE,
)


def test_noiseless_channels_give_zero_errors():
    est = estimate_ber(SkConfig(k=4, n_total=12, forward_snr_db=math.inf), 5000)
    assert est.bit_errors == 0
    assert est.ber == 0.0
    assert est.failed_trials == 0


def test_k1_matches_analytic_oracle():
    cfg = SkConfig(k=1, n_total=3, seed=2024)
    oracle = analytic_ber_oracle(cfg)
    est = estimate_ber(cfg, 200_000)
    assert est.ber == pytest.approx(oracle, rel=0.1)


def test_worker_count_does_not_change_results():
    cfg = SkConfig(k=6, n_total=18, feedback_snr_db=25.0, seed=55)
    trials = 3 * CHUNK_TRIALS + 17  # force several chunks plus a ragged tail
    results = [estimate_ber(cfg, trials, workers=w) for w in (1, 2, 8)]
    assert results[0] == results[1] == results[2]


def test_repeat_runs_are_identical():
    cfg = SkConfig(k=3, n_total=9, seed=808)
    assert estimate_ber(cfg, 40_000) == estimate_ber(cfg, 40_000)


def test_trials_validation():
    with pytest.raises(ValueError):
        estimate_ber(SkConfig(k=1), 0)


def test_early_stop_is_deterministic_and_recorded():
    cfg = SkConfig(k=2, n_total=6, forward_snr_db=-10.0, seed=3)  # high BER
    full = estimate_ber(cfg, 5 * CHUNK_TRIALS)
    stopped = estimate_ber(cfg, 5 * CHUNK_TRIALS, stop_at_errors=100)
    assert stopped.trials < full.trials
    assert stopped.trials % CHUNK_TRIALS == 0  # cut at a chunk boundary
    assert stopped.bit_errors >= 100
    again = estimate_ber(cfg, 5 * CHUNK_TRIALS, stop_at_errors=100, workers=4)
    assert stopped == again


def test_wilson_interval_basics():
    lo, hi = wilson_interval(0, 1000)
    assert lo == 0.0
    assert hi == pytest.approx(1.96**2 / (1000 + 1.96**2), rel=1e-3)
    lo, hi = wilson_interval(500, 1000)
    assert lo < 0.5 < hi
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


def test_wilson_interval_calibration():
    # synthetic Bernoulli source: 95% interval must cover p >= 93% of runs
    rng = np.random.default_rng(1234)
    p, n, covered = 0.02, 2000, 0
    reps = 1000
    for _ in range(reps):
        errors = rng.binomial(n, p)
        lo, hi = wilson_interval(int(errors), n)
        covered += lo <= p <= hi
    assert covered / reps >= 0.93


def test_estimate_fields_are_consistent():
    cfg = SkConfig(k=2, n_total=6, seed=17)
    est = estimate_ber(cfg, 30_000)
    assert est.trials == 30_000
    assert est.ber == est.bit_errors / (30_000 * 2)
    assert est.ci_low <= est.ber <= est.ci_high


def test_sweep_block_length_single_k_equals_estimate():
    base = SkConfig(k=1, seed=5)
    rows = sweep_block_length(base, [1], rate=1.0 / 3.0, trials=20_000)
    assert len(rows) == 1
    k, est = rows[0]
    assert k == 1
    assert est == estimate_ber(cfg_for_sweep_k(base, 1, 1.0 / 3.0), 20_000)


def test_sweep_block_length_rejects_empty_range():
    with pytest.raises(ValueError):
        sweep_block_length(SkConfig(k=1), [], trials=10)


def test_derive_seed_is_stable_and_spread():
    a = derive_seed(7, 101, 3)
    assert a == derive_seed(7, 101, 3)
    assert a != derive_seed(7, 101, 4)
    assert a != derive_seed(8, 101, 3)


def test_classify_cell_rules():
    est = BerEstimate(k=1, trials=100, bit_errors=10, failed_trials=0, ber=0.1, ci_low=0.05, ci_high=0.18)
    assert classify_cell(est, None) == UNAVAILABLE
    assert classify_cell(est, 0.5) == SK_WINS
    assert classify_cell(est, 0.01) == REFERENCE_WINS
    assert classify_cell(est, 0.1) == TIE


def test_sweep_precision_grid_trivial_reference():
    # a reference of 1.0 everywhere loses to any observed BER
    table = ReferenceTable(rows={(64, math.inf): 1.0, (32, math.inf): 1.0})
    base = SkConfig(k=1, seed=6)
    diagram = sweep_precision_grid(base, [64, 32], [1, 2], table, trials=5000)
    assert len(diagram.cells) == 4
    for cell in diagram.cells:
        assert cell.verdict == SK_WINS


def test_sweep_precision_grid_missing_reference_row():
    table = ReferenceTable(rows={(64, math.inf): 1e-6})
    diagram = sweep_precision_grid(SkConfig(k=1, seed=6), [64, 8], [1], table, trials=2000)
    assert diagram.verdict(64, 1) in (SK_WINS, REFERENCE_WINS, TIE)
    assert diagram.verdict(8, 1) == UNAVAILABLE


def test_best_block_length_tie_prefers_smaller_k():
    # noiseless forward channel: every candidate scores exactly zero
    base = SkConfig(k=1, forward_snr_db=math.inf, seed=9)
    res = best_block_length(base, math.inf, [3, 1, 2], trials=2000)
    assert res.k_star == 1
    assert [k for k, _ in res.table] == [1, 2, 3]
    assert all(est.ber == 0.0 for _, est in res.table)


def test_best_block_length_rejects_empty():
    with pytest.raises(ValueError):
        best_block_length(SkConfig(k=1), 23.0, [], trials=10)


def test_sweep_feedback_snr_single_point():
    base = SkConfig(k=1, seed=77)
    rows = sweep_feedback_snr(base, [25.0], [1, 2], trials=20_000)
    assert len(rows) == 1
    snr, res = rows[0]
    assert snr == 25.0
    direct = best_block_length(base, 25.0, [1, 2], trials=20_000)
    assert res == direct


def test_sweep_feedback_infinite_entry_matches_noiseless():
    base = SkConfig(k=1, seed=4)
    rows = sweep_feedback_snr(base, [math.inf], [1, 2, 3], trials=20_000)
    _, res = rows[0]
    assert res.estimate.bit_errors == res.estimate.ber * res.estimate.trials * res.k_star
    direct = best_block_length(base, math.inf, [1, 2, 3], trials=20_000)
    assert res == direct


def test_monotone_in_forward_and_feedback_snr():
    trials = 30_000
    fwd = [
        estimate_ber(SkConfig(k=2, n_total=6, forward_snr_db=s, seed=1), trials).ber
        for s in (-3.0, 0.0, 3.0)
    ]
    assert fwd[0] >= fwd[1] >= fwd[2]
    fb = [
        estimate_ber(SkConfig(k=4, n_total=12, feedback_snr_db=s, seed=1), trials).ber
        for s in (20.0, 30.0, math.inf)
    ]
    assert fb[0] >= fb[1] >= fb[2]


def test_measure_symbol_power_validates_steps():
    with pytest.raises(ValueError):
        measure_symbol_power(SkConfig(k=2, n_total=6), 100, [0])
    with pytest.raises(ValueError):
        measure_symbol_power(SkConfig(k=2, n_total=6), 100, [6])


def test_measure_symbol_power_near_unit():
    power = measure_symbol_power(SkConfig(k=5, n_total=15, seed=44), 40_000, (1, 3))
    for step, (mean, se) in power.items():
        assert abs(mean - 1.0) < 4 * se, f"step {step}"
