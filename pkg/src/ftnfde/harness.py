"""Monte Carlo drivers: BER sweeps for CP and overlap FDE, per-position RMSE."""

import dataclasses
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .channel import discretize, identity_channel, rayleigh_channel
from .equalizer import (
    BlockConfig,
    SpectralNullError,
    WEIGHT_KINDS,
    build_spectrum,
    cp_fde_chain,
    detect_bpsk,
    fde_blocks,
    make_weight,
    noise_psd,
    overlap_fde,
    overlap_symbol_start,
    weight_colored_diag,
)
from .ftnlink import NoiseCovarianceError, modulate_bpsk, noise_model, synthesize_received
from .pulse import PulseSpec

log = logging.getLogger(__name__)

MODES = ("ber_cp", "ber_overlap", "rmse_position")
CHANNELS = ("awgn", "rayleigh")
BLOCK_REFS = ("center", "n_max")
CSV_HEADER = ("mode", "gamma", "rate_bps_hz", "ebn0_db", "bits", "errors", "ber", "seconds")
RMSE_HEADER = ("position", "rmse")


class ConfigError(ValueError):
    pass


def _tuple_of_floats(value, name):
    values = value if isinstance(value, (list, tuple)) else [value]
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: expected a number or list of numbers, got {value!r}") from exc
    if not out:
        raise ConfigError(f"{name}: empty list")
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    gamma: tuple = (1.0,)
    ebn0_db: tuple = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    n: int = 512
    nu: int = 10
    rolloff: float = 0.5
    p: int = None
    q: int = None
    cp_len: int = None
    channel: str = "awgn"
    num_taps: int = 10
    delay_span_symbols: float = 16.0
    blocks_per_draw: int = 50
    min_channel_draws: int = 200
    frame_blocks: int = 64
    weight_kind: str = "colored_diag"
    min_bits: int = 200_000
    max_errors: int = 200
    rng_seed: int = 0
    sigma2: float = 1.0
    n0: float = None
    rmse_blocks: int = 1000
    block_ref: str = "center"

    def __post_init__(self):
        object.__setattr__(self, "gamma", _tuple_of_floats(self.gamma, "gamma"))
        object.__setattr__(self, "ebn0_db", _tuple_of_floats(self.ebn0_db, "ebn0_db"))
        self.validate()

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode: must be one of {MODES}, got {self.mode!r}")
        for g in self.gamma:
            if not 0.0 < g <= 1.0:
                raise ConfigError(f"gamma: values must be in (0, 1], got {g}")
        if not 0.0 < self.rolloff <= 1.0:
            raise ConfigError(f"rolloff: must be in (0, 1], got {self.rolloff}")
        for name in ("n", "nu", "num_taps", "blocks_per_draw", "min_channel_draws", "frame_blocks",
                     "min_bits", "max_errors", "rmse_blocks"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name}: must be a positive integer, got {value!r}")
        if not isinstance(self.rng_seed, int) or self.rng_seed < 0:
            raise ConfigError(f"rng_seed: must be a non-negative integer, got {self.rng_seed!r}")
        if self.channel not in CHANNELS:
            raise ConfigError(f"channel: must be one of {CHANNELS}, got {self.channel!r}")
        if self.weight_kind not in WEIGHT_KINDS:
            raise ConfigError(f"weight_kind: must be one of {WEIGHT_KINDS}, got {self.weight_kind!r}")
        if self.block_ref not in BLOCK_REFS:
            raise ConfigError(f"block_ref: must be one of {BLOCK_REFS}, got {self.block_ref!r}")
        if self.sigma2 <= 0:
            raise ConfigError("sigma2: must be positive")
        if self.n0 is not None and self.n0 < 0:
            raise ConfigError("n0: must be non-negative")
        if self.delay_span_symbols <= 0:
            raise ConfigError("delay_span_symbols: must be positive")

        if self.mode == "ber_cp":
            if self.cp_len is None or self.cp_len < 0 or self.cp_len > self.n:
                raise ConfigError("cp_len: ber_cp needs 0 <= cp_len <= n")
            if self.p is not None or self.q is not None:
                raise ConfigError("p/q: only valid for ber_overlap and rmse_position")
        else:
            if self.cp_len is not None:
                raise ConfigError("cp_len: only valid for ber_cp")
            p, q = self.p or 0, self.q or 0
            if p < 0 or q < 0 or self.n - p - q < 1:
                raise ConfigError(f"p/q: need p, q >= 0 and p + q < n (p={p}, q={q}, n={self.n})")
        if self.mode == "rmse_position" and self.channel != "awgn":
            raise ConfigError("channel: rmse_position runs on the flat channel only")

    @property
    def pulse(self):
        return PulseSpec(rolloff=self.rolloff, t0=1.0, nu=self.nu)

    @property
    def block(self):
        return BlockConfig(n=self.n, p=self.p or 0, q_discard=self.q or 0)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["gamma"] = list(self.gamma)
        d["ebn0_db"] = list(self.ebn0_db)
        return d

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        if "mode" not in doc:
            raise ConfigError("mode: required")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class ResultRow:
    mode: str
    gamma: float
    rate_bps_hz: float
    ebn0_db: float
    bits_simulated: int
    bit_errors: int
    ber: float
    wall_seconds: float
    error: str = field(default=None, compare=False)

    def csv_fields(self):
        return (self.mode, f"{self.gamma:g}", f"{self.rate_bps_hz:.4f}", f"{self.ebn0_db:g}",
                self.bits_simulated, self.bit_errors, f"{self.ber:.6e}", f"{self.wall_seconds:.3f}")


def ebn0_to_n0(ebn0_db, sigma2=1.0):
    """N0 for BPSK with E_b = sigma2 (unit-energy pulse, no FTN rescaling)."""
    return sigma2 / 10.0 ** (ebn0_db / 10.0)


def spectral_efficiency(gamma, beta, n=None, cp_len=None):
    """BPSK bits/s/Hz: 1/(gamma (1+beta)), times N/(N+cp_len) when a CP is sent."""
    rate = 1.0 / (gamma * (1.0 + beta))
    if cp_len:
        rate *= n / (n + cp_len)
    return rate


def bpsk_awgn_ber(ebn0_db):
    return norm.sf(np.sqrt(2.0 * 10.0 ** (np.asarray(ebn0_db) / 10.0)))


def ber_std(ber, bits):
    return math.sqrt(max(ber * (1.0 - ber), 0.0) / bits)


def wilson_interval(errors, bits, z=1.96):
    p = errors / bits
    den = 1.0 + z * z / bits
    centre = (p + z * z / (2 * bits)) / den
    half = z * math.sqrt(p * (1 - p) / bits + z * z / (4 * bits * bits)) / den
    return centre - half, centre + half


def block_ref(config, dch):
    """Lead of the s-window relative to the r-window used for the circulant model."""
    if config.block_ref == "n_max":
        return dch.n_max
    # middle of the physical delay spread, in symbol periods
    return int(np.clip(round((dch.n_min + dch.n_max) / 2), dch.n_min, dch.n_max))


def _frame_rngs(config, frame):
    seq = np.random.SeedSequence([config.rng_seed, frame])
    bits_seq, noise_seq, chan_seq = seq.spawn(3)
    return np.random.default_rng(bits_seq), noise_seq, chan_seq


def _channel_for(config, gamma, chan_seq):
    if config.channel == "awgn":
        return identity_channel()
    span = config.delay_span_symbols * gamma * config.pulse.t0
    return rayleigh_channel(config.num_taps, span, chan_seq)


class _Receiver:
    """Channel discretization and weight for one (gamma, N0, channel draw)."""

    def __init__(self, config, gamma, n0, ch):
        self.spec = config.pulse
        self.dch = discretize(self.spec, ch, gamma)
        self.config = config
        if config.n < self.dch.span:
            raise ConfigError(f"n: block size {config.n} shorter than channel span {self.dch.span}")
        spectrum = build_spectrum(self.dch, config.n, block_ref(config, self.dch))
        self.weight = make_weight(config.weight_kind, spectrum, self.spec, gamma, n0, config.sigma2)
        self.noise = noise_model(self.spec, gamma, n0)

    def run_frame(self, bits_rng, noise_seq, num_blocks):
        cfg, dch = self.config, self.dch
        if cfg.mode == "ber_cp":
            bits = bits_rng.integers(0, 2, num_blocks * cfg.n, dtype=np.int8)
            sym = modulate_bpsk(bits, cfg.sigma2)
            est = cp_fde_chain(sym, dch, cfg.n, cfg.cp_len, self.weight, self.noise, noise_seq)
            return bits, detect_bpsk(est)
        block = cfg.block
        length = (num_blocks - 1) * block.m + block.n + dch.n_max - dch.n_min
        bits = bits_rng.integers(0, 2, length, dtype=np.int8)
        sym = modulate_bpsk(bits, cfg.sigma2)
        r = synthesize_received(sym, dch, self.noise, noise_seq)
        # first block at r-index n_max: every sample in every window sees a full symbol history
        offset = dch.n_max - dch.n_min
        est = overlap_fde(r, block, self.weight, dch, offset=offset, num_blocks=num_blocks)
        first = overlap_symbol_start(block, dch, offset, self.weight.ref)
        return bits[first : first + len(est)], detect_bpsk(est)


def _done(config, bits, errors, draws):
    if bits < config.min_bits:
        return False
    if config.channel == "rayleigh" and draws < config.min_channel_draws:
        return False
    return errors >= config.max_errors or bits >= 100 * config.min_bits


def run_point(config, gamma, ebn0_db):
    """Simulate one (gamma, Eb/N0) point until the stopping rule holds."""
    start = time.perf_counter()
    n0 = config.n0 if config.n0 is not None else ebn0_to_n0(ebn0_db, config.sigma2)
    cp_len = config.cp_len if config.mode == "ber_cp" else None
    rate = spectral_efficiency(gamma, config.rolloff, config.n, cp_len)
    blocks = config.blocks_per_draw if config.channel == "rayleigh" else config.frame_blocks
    bits_total = errors = frames = 0
    receiver = None
    try:
        while not _done(config, bits_total, errors, frames):
            bits_rng, noise_seq, chan_seq = _frame_rngs(config, frames)
            if receiver is None or config.channel == "rayleigh":
                receiver = _Receiver(config, gamma, n0, _channel_for(config, gamma, chan_seq))
            sent, got = receiver.run_frame(bits_rng, noise_seq, blocks)
            bits_total += len(sent)
            errors += int(np.count_nonzero(sent != got))
            frames += 1
    except (SpectralNullError, NoiseCovarianceError, np.linalg.LinAlgError) as exc:
        log.warning("gamma=%g Eb/N0=%g dB failed: %s", gamma, ebn0_db, exc)
        return ResultRow(config.mode, gamma, rate, ebn0_db, bits_total, errors, float("nan"),
                         time.perf_counter() - start, error=str(exc))
    ber = errors / bits_total
    row = ResultRow(config.mode, gamma, rate, ebn0_db, bits_total, errors, ber, time.perf_counter() - start)
    log.info("gamma=%g Eb/N0=%g dB: %d/%d errors, BER %.3e (%.1fs)",
             gamma, ebn0_db, errors, bits_total, ber, row.wall_seconds)
    return row


def run_ber(config):
    if config.mode not in ("ber_cp", "ber_overlap"):
        raise ConfigError(f"mode: run_ber needs ber_cp or ber_overlap, got {config.mode!r}")
    return [run_point(config, g, e) for g in config.gamma for e in config.ebn0_db]


def rmse_profile(config, gamma):
    """Per-position RMSE of untrimmed FDE blocks against the aligned symbols."""
    spec = config.pulse
    n0 = config.n0 if config.n0 is not None else 0.0
    dch = discretize(spec, identity_channel(), gamma)
    n = config.n
    spectrum = build_spectrum(dch, n, block_ref(config, dch))
    # weight (c) with the noise PSD at the configured N0 (zero by default)
    w = weight_colored_diag(spectrum, noise_psd(spec, gamma, n0, n), config.sigma2)

    stride = config.block.m
    offset = dch.n_max - dch.n_min
    length = (config.rmse_blocks - 1) * stride + n + offset
    bits_rng, noise_seq, _ = _frame_rngs(config, 0)
    sym = modulate_bpsk(bits_rng.integers(0, 2, length, dtype=np.int8), config.sigma2)
    r = synthesize_received(sym, dch, noise_model(spec, gamma, n0), noise_seq)
    starts = offset + stride * np.arange(config.rmse_blocks)
    out = fde_blocks(r, n, w, starts)
    # window at array index a is r-index a + n_min; its output i estimates s[a + n_min - ref + i]
    idx = starts[:, None] + dch.n_min - w.ref + np.arange(n)
    return np.sqrt(np.mean(np.abs(out - sym.symbols[idx]) ** 2, axis=0))


def run_rmse(config):
    """One length-N RMSE vector per configured gamma."""
    if config.mode != "rmse_position":
        raise ConfigError(f"mode: run_rmse needs rmse_position, got {config.mode!r}")
    return [rmse_profile(config, g) for g in config.gamma]
