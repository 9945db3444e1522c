"""Brute-force references for the fast paths, small sizes only.

Each check returns the max-abs discrepancy; ``run_selfcheck`` compares them
against fixed tolerances.
"""

from fractions import Fraction

import numpy as np
from scipy.linalg import dft

from .channel import DiscreteChannel, discretize, identity_channel
from .equalizer import (
    block_matrices,
    build_spectrum,
    noise_covariance,
    noise_psd,
    weight_colored_full,
)
from .ftnlink import colored_noise, modulate_bpsk, noise_model, synthesize_received, waveform_oracle
from .pulse import PulseSpec, nyquist_autocorr


def psd_double_sum(spec, gamma, n0, n):
    """Noise PSD per bin as the literal double sum over (l, m)."""
    l = np.arange(n)
    lag = l[:, None] - l[None, :]
    g = np.asarray(nyquist_autocorr(spec, lag * gamma * spec.t0))
    k = np.arange(n)
    phase = np.exp(-2j * np.pi * lag[None, :, :] * k[:, None, None] / n)
    return (n0 / n) * np.sum(g[None, :, :] * phase, axis=(1, 2))


def time_domain_mmse(q, cov, sigma2=1.0):
    """sigma2 Q^H (sigma2 Q Q^H + C)^-1."""
    qh = q.conj().T
    return sigma2 * qh @ np.linalg.inv(sigma2 * q @ qh + cov)


def random_channel(rng, n_min=-3, n_max=4):
    taps = rng.standard_normal(n_max - n_min + 1) + 1j * rng.standard_normal(n_max - n_min + 1)
    return DiscreteChannel(taps=taps, n_min=n_min, n_max=n_max, t=1.0)


def circulant_error(n, rng, ref=None):
    dch = random_channel(rng)
    _, q0, q1 = block_matrices(dch, n, ref)
    return np.abs(build_spectrum(dch, n, ref).matrix() - (q0 + q1)).max()


def mmse_equivalence_error(n, gamma=0.8, n0=0.5, nu=4, sigma2=1.0):
    spec = PulseSpec(rolloff=0.5, nu=nu)
    dch = discretize(spec, identity_channel(), gamma)
    spectrum = build_spectrum(dch, n)
    w = weight_colored_full(spectrum, spec, gamma, n0, sigma2)
    _, q0, q1 = block_matrices(dch, n)
    oracle = time_domain_mmse(q0 + q1, noise_covariance(spec, gamma, n0, n), sigma2)
    d = dft(n, scale="sqrtn")
    return np.abs(d.conj().T @ w.full @ d - oracle).max()


def psd_error(n, gamma=0.8, n0=1.0):
    spec = PulseSpec(rolloff=0.5)
    return np.abs(noise_psd(spec, gamma, n0, n) - psd_double_sum(spec, gamma, n0, n)).max()


def waveform_error(gamma, num_symbols=120, nu=40, seed=0):
    """Deterministic-path gap between the symbol-rate model and the waveform oracle.

    A wide nu keeps the g-tail truncation out of the comparison.
    """
    frac = Fraction(gamma).limit_denominator(64)
    spec = PulseSpec(rolloff=0.5, nu=nu)
    rng = np.random.default_rng(seed)
    sym = modulate_bpsk(rng.integers(0, 2, num_symbols))
    dch = discretize(spec, identity_channel(), float(frac))
    fast = synthesize_received(sym, dch, noise_model(spec, float(frac), 0.0), seed)
    slow = waveform_oracle(sym, spec, identity_channel(), frac, 0.0, seed)
    return np.abs(fast - slow).max()


def noise_lag_error(gamma=0.8, n0=1.0, draws=100_000, max_lag=3, seed=0):
    """Max |sample lag covariance - N0 g(dT)| / N0 for d <= max_lag."""
    spec = PulseSpec(rolloff=0.5)
    model = noise_model(spec, gamma, n0)
    x = colored_noise(model, draws, seed)
    est = np.array([np.mean(x[d:] * np.conj(x[: len(x) - d])).real for d in range(max_lag + 1)])
    return np.abs(est - model.cov_lags[: max_lag + 1]).max() / n0


CHECKS = (
    ("circulant reconstruction N=8,16,32", 1e-10,
     lambda: max(circulant_error(n, np.random.default_rng(n)) for n in (8, 16, 32))),
    ("frequency vs time-domain colored MMSE N=16,32", 1e-9,
     lambda: max(mmse_equivalence_error(n) for n in (16, 32))),
    ("noise PSD single vs double sum N<=128", 1e-10,
     lambda: max(psd_error(n) for n in (8, 64, 128))),
    ("symbol-rate model vs waveform oracle", 1e-3,
     lambda: max(waveform_error(g) for g in (1.0, 0.909, 0.833, 0.8, 0.765, 0.714))),
    ("colored noise lags d<=3 (relative to N0)", 0.05,
     lambda: noise_lag_error()),
)


def run_selfcheck(report=print):
    ok = True
    for name, tol, check in CHECKS:
        err = check()
        passed = bool(err <= tol)
        ok &= passed
        report(f"{'PASS' if passed else 'FAIL'}  {name}: {err:.3e} (tol {tol:g})")
    return ok
