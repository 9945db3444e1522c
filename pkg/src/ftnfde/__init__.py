"""Faster-than-Nyquist single-carrier link with overlap frequency-domain equalization."""

from .channel import (
    DiscreteChannel,
    TapDelayLine,
    combined_response,
    discretize,
    identity_channel,
    rayleigh_channel,
)
from .equalizer import (
    BlockConfig,
    CirculantSpectrum,
    SpectralNullError,
    WeightSet,
    build_spectrum,
    cp_fde_chain,
    detect_bpsk,
    noise_psd,
    overlap_fde,
    weight_colored_diag,
    weight_colored_full,
    weight_white,
)
from .ftnlink import (
    NoiseCovarianceError,
    NoiseModel,
    SymbolStream,
    colored_noise,
    modulate_bpsk,
    noise_model,
    synthesize_received,
    waveform_oracle,
)
from .harness import ExperimentConfig, ResultRow, ebn0_to_n0, run_ber, run_rmse, spectral_efficiency
from .pulse import PulseSpec, nyquist_autocorr, rrc_impulse

__version__ = "0.1.0"
