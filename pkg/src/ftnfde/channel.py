"""Tapped-delay-line channels and their symbol-rate equivalent response."""

import json
import math
from dataclasses import dataclass

import numpy as np

from .pulse import nyquist_autocorr

# slack for floor/ceil of delay ratios that should land on an integer
_INDEX_EPS = 1e-9


@dataclass(frozen=True)
class TapDelayLine:
    """c(t) = sum_k gains[k] * delta(t - delays[k])."""

    delays: tuple
    gains: tuple

    def __post_init__(self):
        delays = tuple(float(d) for d in self.delays)
        gains = tuple(complex(g) for g in self.gains)
        if len(delays) == 0 or len(delays) != len(gains):
            raise ValueError("delays and gains must be non-empty and of equal length")
        if delays[0] < 0 or any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError("delays must be non-negative and strictly increasing")
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "gains", gains)

    @property
    def t_min(self):
        return self.delays[0]

    @property
    def t_max(self):
        return self.delays[-1]

    def to_json(self):
        gains = np.asarray(self.gains)
        return json.dumps(
            {
                "delays_s": list(self.delays),
                "gains_re": gains.real.tolist(),
                "gains_im": gains.imag.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        gains = np.asarray(doc["gains_re"], dtype=float) + 1j * np.asarray(doc["gains_im"], dtype=float)
        return cls(delays=tuple(doc["delays_s"]), gains=tuple(gains))


@dataclass(frozen=True)
class DiscreteChannel:
    """Symbol-spaced taps q[n], n = n_min..n_max, sampled at period ``t``."""

    taps: np.ndarray
    n_min: int
    n_max: int
    t: float

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=complex)
        if len(taps) != self.n_max - self.n_min + 1:
            raise ValueError("taps length must equal n_max - n_min + 1")
        if not self.n_min <= 0 <= self.n_max:
            raise ValueError("need n_min <= 0 <= n_max")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def span(self):
        return self.n_max - self.n_min + 1

    def tap(self, n):
        """q[n], zero outside [n_min, n_max]."""
        if self.n_min <= n <= self.n_max:
            return self.taps[n - self.n_min]
        return 0.0


def identity_channel():
    return TapDelayLine(delays=(0.0,), gains=(1.0,))


def rayleigh_channel(num_taps, span, rng_seed):
    """Uniformly spaced taps over [0, span] with i.i.d. CN(0, 1/num_taps) gains."""
    if num_taps < 2:
        raise ValueError("rayleigh_channel needs num_taps >= 2")
    if not span > 0:
        raise ValueError("span must be positive")
    rng = np.random.default_rng(rng_seed)
    delays = np.arange(num_taps) * (span / (num_taps - 1))
    std = np.sqrt(0.5 / num_taps)
    gains = std * (rng.standard_normal(num_taps) + 1j * rng.standard_normal(num_taps))
    return TapDelayLine(delays=tuple(delays), gains=tuple(gains))


def combined_response(spec, ch, t, truncate_at=None):
    """q(t) = sum_k c_k g(t - tau_k).

    With ``truncate_at`` set, terms with |t - tau_k| > truncate_at are dropped.
    """
    t = np.asarray(t, dtype=float)
    q = np.zeros(t.shape, dtype=complex)
    for tau, c in zip(ch.delays, ch.gains):
        lag = t - tau
        term = c * np.asarray(nyquist_autocorr(spec, lag))
        if truncate_at is not None:
            term = np.where(np.abs(lag) > truncate_at * (1 + _INDEX_EPS), 0.0, term)
        q = q + term
    return q.item() if q.ndim == 0 else q


def index_bounds(spec, ch, gamma):
    """(n_min, n_max) = (-nu + ceil(T_min/T), nu + floor(T_max/T))."""
    t = gamma * spec.t0
    n_min = -spec.nu + math.ceil(ch.t_min / t - _INDEX_EPS)
    n_max = spec.nu + math.floor(ch.t_max / t + _INDEX_EPS)
    return n_min, n_max


def discretize(spec, ch, gamma):
    """Sample q(t) at t = nT, T = gamma*T0, over the truncated index range."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    t = gamma * spec.t0
    n_min, n_max = index_bounds(spec, ch, gamma)
    n = np.arange(n_min, n_max + 1)
    taps = combined_response(spec, ch, n * t, truncate_at=spec.nu * t)
    return DiscreteChannel(taps=taps, n_min=n_min, n_max=n_max, t=t)
