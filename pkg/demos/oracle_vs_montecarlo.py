"""Does the simulator agree with the closed form where one exists?

For noiseless feedback at full precision the terminal estimate error is
Gaussian with a known variance, so the BER follows from the Q-function
and the adjacent-neighbor bit-flip weights of the mapping.  This script
runs the Monte Carlo engine against that oracle over a few small
configurations and reports the gap in standard errors (|z| under 3 is
statistical agreement).

Runtime: a few seconds.
"""

import math
import sys

from skfb import SkConfig, analytic_ber_oracle, estimate_ber
from skfb.core import BitMapping

CASES = [
    dict(k=1, n_total=3, trials=400_000),
    dict(k=2, n_total=6, trials=400_000),
    dict(k=3, n_total=9, trials=1_000_000),
    dict(k=3, n_total=9, trials=1_000_000, bit_mapping=BitMapping.GRAY),
    dict(k=4, n_total=10, trials=400_000),
]


def main() -> int:
    print("k,n_total,bit_mapping,trials,oracle_ber,mc_ber,z_score")
    worst = 0.0
    for case in CASES:
        trials = case.pop("trials")
        cfg = SkConfig(seed=2024, **case)
        oracle = analytic_ber_oracle(cfg)
        est = estimate_ber(cfg, trials)
        se = math.sqrt(oracle * (1 - oracle) / (trials * cfg.k))
        z = (est.ber - oracle) / se if se else 0.0
        worst = max(worst, abs(z))
        print(
            f"{cfg.k},{cfg.n_total},{cfg.bit_mapping.value},{trials},"
            f"{oracle!r},{est.ber!r},{z:.2f}"
        )
    print()
    print(f"largest |z| = {worst:.2f} (agreement holds below 3)")
    return 0 if worst < 3.0 else 1


if __name__ == "__main__":
    sys.exit(main())
