"""GLRT-MLSD receiver simulation for Gray-coded M-PAM over FSO fading channels."""

from .channel import (
    ChannelModel,
    PointingModel,
    TurbulenceModel,
    bessel_k,
    composite_pdf,
    gain_moment,
    gammagamma_pdf,
    lognormal_pdf,
    pointing_pdf,
    sample_gain,
    scintillation_index,
)
from .modem import PamScheme, gray_decode, gray_encode, min_distance, transmit
from .glrt import (
    TrellisDetector,
    estimate_gain,
    exhaustive_glrt,
    glrt_metric,
    pcsi_detect,
)
from .analysis import (
    PairwiseScenario,
    effective_snr,
    genie_bep,
    genie_sep,
    pairwise_error_prob,
    pairwise_limit,
    pairwise_stats,
    q_function,
    sep_pam_awgn,
)
from .harness import BerRecord, SimConfig, StopRule, run_point, run_sweep, write_results

__version__ = "0.1.0"
