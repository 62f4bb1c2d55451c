"""Finite-alphabet rate-splitting multiple access: GMI-based rate
evaluation, precoder optimization under a decoding-complexity budget, and
ergodic sweeps."""
from .alphabet import (
    CONSTELLATION_NAMES,
    Alphabet,
    TransmissionMode,
    VectorAlphabet,
    make_constellation,
    mode_from_name,
    modes_for_complexity,
    product_alphabet,
)
from .channel import (
    ChannelRealization,
    CovarianceFactor,
    CovarianceVariant,
    OneRingParams,
    load_channels_csv,
    one_ring_covariance,
    sample_channels,
    save_channels_csv,
)
from .estimator import RSMAPrecoderOptimizer
from .gmi import (
    EffectiveChannel,
    GmiEstimate,
    StackedPrecoder,
    gmi_approx,
    gmi_approx_grad,
    gmi_exact,
)
from .optimize import (
    BarrierConfig,
    Objective,
    OptResult,
    Precoder,
    adaptive_mode_search,
    allocate_common_mmf,
    init_precoders,
    maximize_mmf,
    maximize_sum_rate,
    mmf_subgradient,
    sr_subgradient,
)
from .rates import (
    RateMethod,
    SchemeKind,
    StreamRates,
    decoding_complexity,
    feasible,
    min_rate,
    stream_rates,
    sum_rate,
    user_rates,
)

__version__ = "0.1.0"
