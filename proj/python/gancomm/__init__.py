"""GAN-bridged end-to-end transceiver lab: Python bindings."""

from ._core import (  # noqa: F401
    BerPoint,
    Config,
    ConfigError,
    ContractError,
    DimensionError,
    DomainError,
    Error,
    FramingError,
    NumericalError,
    Trainer,
    baseline_curve,
    fft,
    gradcheck,
    hamming74_encode,
    hamming74_mld,
    ifft,
    learned_curve,
    parse_config,
    qam_demod,
    qam_mod,
    rsc_encode,
    snr_to_noise_var,
    viterbi_decode,
    wilson_halfwidth,
)
