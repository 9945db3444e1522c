"""Transmit symbols, symbol-rate received samples, and a waveform-level oracle."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import fft as sfft
from scipy.signal import fftconvolve

from .channel import combined_response, index_bounds
from .pulse import nyquist_autocorr, rrc_impulse


class NoiseCovarianceError(ValueError):
    """The requested noise covariance is not positive semidefinite."""


@dataclass(frozen=True)
class SymbolStream:
    symbols: np.ndarray
    sigma2: float = 1.0

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        object.__setattr__(self, "symbols", np.asarray(self.symbols, dtype=complex))

    def __len__(self):
        return len(self.symbols)


@dataclass(frozen=True)
class NoiseModel:
    """Sampled matched-filter noise: E{eta[n] eta*[n-d]} = cov_lags[d], zero past the last lag."""

    n0: float
    cov_lags: np.ndarray

    def __post_init__(self):
        lags = np.asarray(self.cov_lags, dtype=float)
        if self.n0 < 0:
            raise ValueError("n0 must be non-negative")
        if lags.ndim != 1 or len(lags) == 0:
            raise ValueError("cov_lags must be a non-empty vector")
        if not np.isclose(lags[0], self.n0, rtol=1e-12, atol=0.0):
            raise ValueError("cov_lags[0] must equal n0")
        object.__setattr__(self, "cov_lags", lags)


def noise_model(spec, gamma, n0, max_lag=1024):
    """Noise model with lags N0*g(dT), d = 0..max_lag (g not truncated at nu)."""
    d = np.arange(max_lag + 1)
    return NoiseModel(n0=n0, cov_lags=n0 * np.asarray(nyquist_autocorr(spec, d * gamma * spec.t0)))


def modulate_bpsk(bits, sigma2=1.0):
    """Bit 0 -> +sqrt(sigma2), bit 1 -> -sqrt(sigma2)."""
    bits = np.asarray(bits, dtype=np.int8)
    amp = np.sqrt(sigma2)
    return SymbolStream(symbols=amp * (1 - 2 * bits.astype(float)), sigma2=sigma2)


def _circulant_eigs(model, length):
    lags = model.cov_lags[: length]
    d = len(lags) - 1
    size = sfft.next_fast_len(length + d)
    row = np.zeros(size)
    row[: d + 1] = lags
    if d:
        row[-d:] = lags[1:][::-1]
    eigs = sfft.rfft(row).real
    floor = -1e-8 * model.n0
    if eigs.min() < floor:
        raise NoiseCovarianceError(
            f"noise covariance has eigenvalue {eigs.min():.3e} < {floor:.3e}; check g or T"
        )
    return size, np.clip(eigs, 0.0, None)


def colored_noise(model, length, rng_seed):
    """Circularly-symmetric complex Gaussian vector with Toeplitz covariance from ``model``.

    The Toeplitz covariance is embedded in a circulant of size >= length + D,
    so the first ``length`` samples carry the exact lags. Eigenvalues in
    [-1e-8*N0, 0) are clipped to zero; anything below raises
    :class:`NoiseCovarianceError`.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    rng = np.random.default_rng(rng_seed)
    if model.n0 == 0:
        return np.zeros(length, dtype=complex)
    size, eigs = _circulant_eigs(model, length)
    # full spectrum from the half spectrum of a real even sequence
    full = np.empty(size)
    full[: len(eigs)] = eigs
    full[len(eigs):] = eigs[1 : size - len(eigs) + 1][::-1]
    z = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * np.sqrt(0.5)
    x = sfft.fft(np.sqrt(full) * z) / np.sqrt(size)
    return x[:length]


def synthesize_received(sym, dch, model, rng_seed):
    """r[n] = sum_l q[l] s[n-l] + eta[n] over the full support of the convolution.

    Element i of the result is r[i + dch.n_min], so the returned array covers
    n = n_min .. len(s)-1+n_max and symbols outside the stream count as zero.
    """
    s = sym.symbols if isinstance(sym, SymbolStream) else np.asarray(sym, dtype=complex)
    if len(s) < dch.span:
        raise ValueError(f"symbol stream of length {len(s)} shorter than channel span {dch.span}")
    r = np.convolve(s, dch.taps)
    return r + colored_noise(model, len(r), rng_seed)


def _rationalize(gamma, max_den=64):
    frac = Fraction(gamma).limit_denominator(max_den) if not isinstance(gamma, Fraction) else gamma
    if frac.denominator > max_den or abs(float(frac) - float(gamma)) > 1e-12:
        raise ValueError(f"gamma={gamma} is not a ratio a/b with b <= {max_den}")
    return frac


def waveform_oracle(sym, spec, ch, gamma, n0, rng_seed, oversample=None, h_span=32):
    """Received samples from an oversampled continuous-time simulation.

    Impulses at spacing T = gamma*T0 are shaped by h and the channel taps on
    a fine grid of step T0/L, white noise of variance N0/step is added per
    fine sample, the result is matched-filtered with h (Riemann sum) and
    decimated at t = nT. ``gamma`` must be a ratio a/b with b <= 64; L
    defaults to 16b. The output index convention matches
    :func:`synthesize_received` for the same (spec, ch, gamma).
    """
    frac = _rationalize(gamma)
    a, b = frac.numerator, frac.denominator
    lfine = oversample if oversample is not None else 16 * b
    if lfine % b:
        raise ValueError("oversample must be a multiple of the gamma denominator")
    step = spec.t0 / lfine
    sps = a * lfine // b  # fine samples per FTN symbol

    s = sym.symbols if isinstance(sym, SymbolStream) else np.asarray(sym, dtype=complex)
    half = h_span * lfine
    h = np.asarray(rrc_impulse(spec, np.arange(-half, half + 1) * step))

    # transmit filter followed by the channel, sampled exactly on the fine grid
    j0 = -half + int(np.floor(ch.t_min / step))
    j1 = half + int(np.ceil(ch.t_max / step))
    tj = np.arange(j0, j1 + 1) * step
    shaped = np.zeros(len(tj), dtype=complex)
    for tau, c in zip(ch.delays, ch.gains):
        shaped += c * np.asarray(rrc_impulse(spec, tj - tau))

    train = np.zeros((len(s) - 1) * sps + 1, dtype=complex)
    train[::sps] = s
    v = fftconvolve(train, shaped)  # index i <-> time (i + j0) * step

    rng = np.random.default_rng(rng_seed)
    if n0 > 0:
        v = v + np.sqrt(n0 / step / 2) * (rng.standard_normal(len(v)) + 1j * rng.standard_normal(len(v)))

    y = step * fftconvolve(v, h)  # index i <-> time (i + j0 - half) * step

    n_min, n_max = index_bounds(spec, ch, float(frac))
    n = np.arange(n_min, len(s) + n_max)
    idx = n * sps - j0 + half
    if idx[0] < 0 or idx[-1] >= len(y):
        raise ValueError("h_span too short for the requested output range")
    return y[idx]
