"""Monte Carlo simulator for SK feedback coding over AWGN channels.

Library layout:

    core       message bits, 2^K-ary PAM mapping, configuration
    precision  emulated reduced-precision floating point
    channel    AWGN channels with counter-based reproducible noise
    codec      the SK recursion (both variants), analytic BER oracle
    engine     parallel BER estimation and the sweep experiments
    records    CSV records and the external reference-BER table
    cli        the ``skfb`` command-line tool
"""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    BitMapping,
    MAX_K,
    PamSymbol,
    SkConfig,
    SkVariant,
    bit_errors,
    decode_symbol,
    encode_message,
    pam_step,
)
from .precision import PrecisionMode, q_add, q_div, q_mul, q_sqrt, q_sub, quantize  # noqa: F401
from .channel import AwgnChannel, feedback_transmit, make_channels, transmit  # noqa: F401
from .codec import (  # noqa: F401
    SkState,
    analytic_ber_oracle,
    optimize_gamma,
    sk_decode,
    sk_init,
    sk_step,
    sk_step_error_recursion,
    sk_step_estimate_difference,
)
from .engine import (  # noqa: F401
    BerEstimate,
    BestBlockLength,
    PhaseCell,
    PhaseDiagram,
    ReferenceTable,
    best_block_length,
    estimate_ber,
    measure_symbol_power,
    sweep_block_length,
    sweep_feedback_snr,
    sweep_precision_grid,
)
from .records import (  # noqa: F401
    RunRecord,
    make_run_record,
    read_reference_table,
    write_csv,
)
