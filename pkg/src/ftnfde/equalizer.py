"""Block channel model, MMSE frequency-domain weights, and the two FDE receivers.

Conventions: a received block r[k] = (r[k], ..., r[k+N-1]) is modelled as
Q s[k] plus inter-block terms, with s[k] = (s[k-ref], ..., s[k-ref+N-1])
and Q the N x N circulant whose first column holds q[l] at index
(l - ref) mod N. Lambda is the unnormalized DFT of that column, so that
Q = D^H diag(Lambda) D for the unitary DFT matrix D. The default lead
ref = n_max puts q[n_max] on the diagonal (Q0 upper triangular); ref = 0
puts q[0] there, so a memoryless channel gives Q = I.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.linalg import dft, toeplitz

from .ftnlink import SymbolStream, synthesize_received
from .pulse import nyquist_autocorr

WEIGHT_KINDS = ("white", "colored_diag", "colored_full")
# bins with |Lambda|^2 + noise below this fraction of max |Lambda|^2 get regularized
_NULL_REL = 1e-12


class SpectralNullError(ArithmeticError):
    """A weight would divide by an exactly-zero bin (no noise, no signal)."""


@dataclass(frozen=True)
class BlockConfig:
    n: int
    p: int = 0
    q_discard: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 0 or self.q_discard < 0:
            raise ValueError("need n >= 1, p >= 0, q_discard >= 0")
        if self.m < 1:
            raise ValueError(f"output stride M = n - p - q_discard must be >= 1 (got {self.m})")

    @property
    def m(self):
        return self.n - self.p - self.q_discard

    def check_channel(self, dch):
        if self.n < dch.span:
            raise ValueError(f"block size {self.n} shorter than channel span {dch.span}")


@dataclass(frozen=True)
class CirculantSpectrum:
    lam: np.ndarray
    ref: int = 0

    @property
    def n(self):
        return len(self.lam)

    def matrix(self):
        """Q = D^H diag(lam) D with the unitary DFT."""
        d = dft(self.n, scale="sqrtn")
        return d.conj().T @ np.diag(self.lam) @ d


@dataclass(frozen=True)
class WeightSet:
    kind: str
    diag: np.ndarray = None
    full: np.ndarray = None
    psd: np.ndarray = None
    ref: int = 0

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if (self.full is None) == (self.kind == "colored_full"):
            raise ValueError("colored_full needs a full matrix; diagonal kinds need a diag vector")

    @property
    def n(self):
        return len(self.diag) if self.full is None else self.full.shape[0]


def _ref(dch, ref):
    ref = dch.n_max if ref is None else int(ref)
    if not dch.n_min <= ref <= dch.n_max:
        raise ValueError(f"ref must lie in [n_min, n_max], got {ref}")
    return ref


def first_column(dch, n, ref=None):
    if n < dch.span:
        raise ValueError(f"block size {n} shorter than channel span {dch.span}")
    ref = _ref(dch, ref)
    col = np.zeros(n, dtype=complex)
    col[(np.arange(dch.n_min, dch.n_max + 1) - ref) % n] = dch.taps
    return col


def build_spectrum(dch, n, ref=None):
    """Circulant spectrum of the block channel; ``ref`` defaults to n_max."""
    ref = _ref(dch, ref)
    return CirculantSpectrum(lam=sfft.fft(first_column(dch, n, ref)), ref=ref)


def block_matrices(dch, n, ref=None):
    """Explicit (Q_prev, Q0, Q1): r[k] = Q_prev s[k-N] + Q0 s[k] + Q1 s[k+N] + eta[k].

    Q_prev is zero for the default ref = n_max, leaving the two-term model.
    """
    if n < dch.span:
        raise ValueError(f"block size {n} shorter than channel span {dch.span}")
    ref = _ref(dch, ref)
    mats = np.zeros((3, n, n), dtype=complex)
    for i in range(n):
        for l in range(dch.n_min, dch.n_max + 1):
            col = i + ref - l
            which, col = divmod(col, n)
            mats[which + 1, i, col] = dch.tap(l)
    return mats[0], mats[1], mats[2]


def noise_covariance(spec, gamma, n0, n):
    """Block noise covariance C[a, b] = N0 g((a-b)T)."""
    lags = n0 * np.asarray(nyquist_autocorr(spec, np.arange(n) * gamma * spec.t0))
    return toeplitz(lags)


def noise_psd(spec, gamma, n0, n):
    """Diagonal of D C D^H: (N0/N) sum_d (N-|d|) g(dT) exp(-j 2 pi d k / N)."""
    d = np.arange(n)
    c = (n - d) * np.asarray(nyquist_autocorr(spec, d * gamma * spec.t0))
    # g is even and real, so the two-sided sum folds onto 2 Re FFT(c) - c[0]
    psd = (n0 / n) * (2.0 * sfft.fft(c).real - c[0])
    return np.clip(psd, 0.0, None)


def _one_tap(lam, noise_term):
    power = np.abs(lam) ** 2
    den = power + noise_term
    if np.any(den == 0):
        raise SpectralNullError("spectral null at zero noise")
    floor = _NULL_REL * power.max()
    weak = den < floor
    if np.any(weak):
        warnings.warn(f"{weak.sum()} near-singular bins regularized", RuntimeWarning, stacklevel=3)
        den = np.where(weak, den + floor, den)
    return np.conj(lam) / den


def weight_white(spectrum, n0, sigma2=1.0):
    lam = spectrum.lam
    return WeightSet(
        kind="white", diag=_one_tap(lam, n0 / sigma2), psd=np.full(len(lam), float(n0)), ref=spectrum.ref
    )


def weight_colored_diag(spectrum, psd, sigma2=1.0):
    psd = np.asarray(psd, dtype=float)
    return WeightSet(kind="colored_diag", diag=_one_tap(spectrum.lam, psd / sigma2), psd=psd, ref=spectrum.ref)


def weight_colored_full(spectrum, spec, gamma, n0, sigma2=1.0, n=None):
    """Non-diagonal MMSE weight Lambda^H (Lambda Lambda^H + D C D^H / sigma2)^-1."""
    lam = spectrum.lam
    n = spectrum.n if n is None else n
    if n != spectrum.n:
        raise ValueError("n must match the spectrum length")
    d = dft(n, scale="sqrtn")
    a = d @ noise_covariance(spec, gamma, n0, n) @ d.conj().T / sigma2
    a[np.diag_indices(n)] += np.abs(lam) ** 2
    try:
        # W A = diag(conj(lam))  <=>  A^T W^T = diag(conj(lam))
        w = np.linalg.solve(a.T, np.diag(np.conj(lam))).T
    except np.linalg.LinAlgError as exc:
        raise SpectralNullError("singular colored MMSE system") from exc
    if not np.all(np.isfinite(w)):
        raise SpectralNullError("singular colored MMSE system")
    return WeightSet(kind="colored_full", full=w, psd=noise_psd(spec, gamma, n0, n), ref=spectrum.ref)


def make_weight(kind, spectrum, spec, gamma, n0, sigma2=1.0):
    if kind == "white":
        return weight_white(spectrum, n0, sigma2)
    if kind == "colored_diag":
        return weight_colored_diag(spectrum, noise_psd(spec, gamma, n0, spectrum.n), sigma2)
    if kind == "colored_full":
        return weight_colored_full(spectrum, spec, gamma, n0, sigma2)
    raise ValueError(f"unknown weight kind {kind!r}")


def apply_weight(windows, w):
    """D^H W D applied to each row of ``windows`` (shape (..., N))."""
    spec_rows = sfft.fft(windows, axis=-1)
    if w.full is None:
        spec_rows = spec_rows * w.diag
    else:
        spec_rows = spec_rows @ w.full.T
    return sfft.ifft(spec_rows, axis=-1)


def fde_blocks(r, n, w, starts):
    """Untrimmed FDE outputs for windows r[start:start+n], one row per start."""
    r = np.asarray(r)
    starts = np.asarray(starts)
    if starts.size and (starts.min() < 0 or starts.max() + n > len(r)):
        raise ValueError("block window runs outside the received samples")
    windows = r[starts[:, None] + np.arange(n)]
    return apply_weight(windows, w)


def overlap_starts(num_samples, cfg, offset=0):
    count = (num_samples - offset - cfg.n) // cfg.m + 1
    if count < 1:
        raise ValueError(f"need at least {offset + cfg.n} samples for one block, got {num_samples}")
    return offset + cfg.m * np.arange(count)


def overlap_symbol_start(cfg, dch, offset=0, ref=None):
    """Symbol index estimated by the first output of :func:`overlap_fde`.

    Assumes ``r`` follows the :func:`synthesize_received` convention
    (r[0] is the sample at index n_min); ``ref`` is the weight's lead.
    """
    return offset + dch.n_min - _ref(dch, ref) + cfg.p


def overlap_fde(r, cfg, w, dch, offset=0, num_blocks=None):
    """Overlap FDE: equalize N-sample windows advancing by M, keep outputs [p, p+M).

    Block j starts at r[offset + j*M]; its kept output i estimates
    s[overlap_symbol_start(cfg, dch, offset, w.ref) + j*M + i], so consecutive blocks
    tile the symbol stream without gaps or repeats. With the default lead
    ref = n_max this is s[k - n_max + p + i] for block start r-index k.
    """
    cfg.check_channel(dch)
    if w.n != cfg.n:
        raise ValueError("weight size does not match block size")
    starts = overlap_starts(len(r), cfg, offset)
    if num_blocks is not None:
        starts = starts[:num_blocks]
    out = fde_blocks(r, cfg.n, w, starts)
    return out[:, cfg.p : cfg.p + cfg.m].reshape(-1)


def add_cyclic_prefix(symbols, n, cp_len):
    blocks = np.asarray(symbols).reshape(-1, n)
    if cp_len:
        blocks = np.concatenate([blocks[:, n - cp_len :], blocks], axis=1)
    return blocks.reshape(-1)


def cp_fde_chain(sym, dch, n, cp_len, w, model, rng_seed):
    """CP-FDE baseline: symbol-level cyclic prefix, stream channel, one-tap or full FDE.

    Each run of N symbols is sent as [last cp_len symbols, N symbols]; the
    channel memory crosses block boundaries. The receiver drops the first
    cp_len samples of each extended block (taken from the sample aligned so
    the anti-causal taps stay inside the block) and equalizes N samples.
    Returns one estimate per input symbol.
    """
    s = sym.symbols if isinstance(sym, SymbolStream) else np.asarray(sym, dtype=complex)
    if len(s) % n:
        raise ValueError("symbol count must be a multiple of the block size")
    if w.n != n:
        raise ValueError("weight size does not match block size")
    if cp_len > n:
        raise ValueError("cp_len must not exceed the block size")
    x = add_cyclic_prefix(s, n, cp_len)
    r = synthesize_received(x, dch, model, rng_seed)
    num_blocks = len(s) // n
    # array index i of r is r-index i + n_min; window r-index j(N+cp) + cp + n_min
    starts = np.arange(num_blocks) * (n + cp_len) + cp_len
    out = fde_blocks(r, n, w, starts)
    # output i estimates block symbol (i + n_min - ref) mod N
    return np.roll(out, dch.n_min - w.ref, axis=1).reshape(-1)


def detect_bpsk(estimates):
    """Bit 0 when Re >= 0 (ties go to 0), else bit 1."""
    return (np.real(np.asarray(estimates)) < 0).astype(np.int8)
