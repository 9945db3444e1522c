import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad, trapezoid

from ftnfde.pulse import PulseSpec, nyquist_autocorr, rrc_impulse


def rc_spectrum(f, beta, t0=1.0):
    """Raised-cosine frequency response, unit area."""
    f = abs(f)
    lo, hi = (1 - beta) / (2 * t0), (1 + beta) / (2 * t0)
    if f <= lo:
        return t0
    if f <= hi:
        return 0.5 * t0 * (1 + np.cos(np.pi * t0 / beta * (f - lo)))
    return 0.0


def numeric_autocorr(spec, t, samples_per_t0=64, width=40):
    """g(t) = integral h(tau) h(tau - t) dtau by trapezoidal quadrature."""
    tau = np.arange(-width * samples_per_t0, width * samples_per_t0 + 1) / samples_per_t0 * spec.t0
    h = rrc_impulse(spec, tau)
    return np.array([trapezoid(h * rrc_impulse(spec, tau - ti), tau) for ti in np.atleast_1d(t)])


def test_rrc_peak_matches_closed_form_and_spectrum_quadrature():
    spec = PulseSpec(rolloff=0.5, t0=1.0)
    assert rrc_impulse(spec, 0.0) == pytest.approx(1 - 0.5 + 4 * 0.5 / np.pi, abs=1e-12)
    # h(0) = integral of sqrt(G(f)) df
    peak, _ = quad(lambda f: np.sqrt(rc_spectrum(f, 0.5)), -0.75, 0.75, points=[-0.25, 0.25], epsabs=1e-12)
    assert rrc_impulse(spec, 0.0) == pytest.approx(peak, abs=1e-9)
    assert rrc_impulse(spec, 0.0) == pytest.approx(1.136620, abs=1e-6)


def test_tails_beyond_ten_periods():
    spec = PulseSpec(rolloff=0.5)
    t = np.linspace(10.001, 60, 20000)
    # h decays like 1/(4 pi beta t^2): 1.6e-3 just past t = 10, below 1e-3 from t = 13
    assert np.abs(rrc_impulse(spec, t)).max() < 2e-3
    assert np.abs(rrc_impulse(spec, t[t > 13])).max() < 1e-3
    # g decays like 1/t^3, which is what makes truncation at nu = 10 harmless
    assert np.abs(nyquist_autocorr(spec, t)).max() < 1e-3
    assert np.abs(nyquist_autocorr(spec, -t)).max() < 1e-3


def test_rrc_amplitude_scales_with_period():
    assert rrc_impulse(PulseSpec(0.5, 2.0), 0.0) == pytest.approx(1.136620 / np.sqrt(2), abs=1e-6)


@pytest.mark.parametrize("beta", [0.22, 0.5, 1.0])
def test_rrc_unit_energy(beta):
    spec = PulseSpec(rolloff=beta, nu=10)
    t = np.arange(-40 * 64, 40 * 64 + 1) / 64
    assert trapezoid(rrc_impulse(spec, t) ** 2, t) == pytest.approx(1.0, abs=1e-6)


def test_autocorr_peak_and_nyquist_zeros():
    spec = PulseSpec(rolloff=0.5)
    assert nyquist_autocorr(spec, 0.0) == 1.0
    k = np.array([1, 2, 3, -1, -2, -3])
    assert np.abs(nyquist_autocorr(spec, k)).max() < 1e-12
    zeros = np.arange(1, spec.nu + 1)
    assert np.abs(nyquist_autocorr(spec, np.concatenate([zeros, -zeros]))).max() < 1e-12


def test_autocorr_at_ftn_lag():
    spec = PulseSpec(rolloff=0.5)
    value = nyquist_autocorr(spec, 0.8)
    assert value == pytest.approx(0.20075, abs=1e-5)
    assert value == pytest.approx(numeric_autocorr(spec, 0.8)[0], abs=1e-4)


@pytest.mark.parametrize("beta", [0.3, 0.5, 1.0])
def test_autocorr_matches_numeric_autocorrelation_of_rrc(beta):
    spec = PulseSpec(rolloff=beta)
    t = np.linspace(-5, 5, 41)
    assert np.abs(numeric_autocorr(spec, t) - nyquist_autocorr(spec, t)).max() < 1e-4


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=20, max_size=20),
       st.sampled_from([0.1, 0.25, 0.5, 0.9, 1.0]))
def test_evenness(ts, beta):
    spec = PulseSpec(rolloff=beta)
    t = np.array(ts)
    assert np.array_equal(rrc_impulse(spec, t), rrc_impulse(spec, -t))
    assert np.array_equal(nyquist_autocorr(spec, t), nyquist_autocorr(spec, -t))


def test_evenness_thousand_points():
    spec = PulseSpec(rolloff=0.5)
    t = np.random.default_rng(7).uniform(-30, 30, 1000)
    assert np.array_equal(rrc_impulse(spec, t), rrc_impulse(spec, -t))
    assert np.array_equal(nyquist_autocorr(spec, t), nyquist_autocorr(spec, -t))


@pytest.mark.parametrize("beta", [0.25, 0.5, 0.7, 1.0])
def test_singular_points_equal_two_sided_limit(beta):
    spec = PulseSpec(rolloff=beta)
    delta = 1e-6
    for func, point in ((rrc_impulse, 0.0), (rrc_impulse, 1 / (4 * beta)), (nyquist_autocorr, 1 / (2 * beta))):
        at = func(spec, point)
        limit = 0.5 * (func(spec, point - delta) + func(spec, point + delta))
        assert np.isfinite(at)
        assert at == pytest.approx(limit, abs=1e-9)


def test_scalar_in_scalar_out():
    spec = PulseSpec()
    assert isinstance(rrc_impulse(spec, 0.3), float)
    assert isinstance(nyquist_autocorr(spec, 0.3), float)
    assert rrc_impulse(spec, [0.1, 0.2]).shape == (2,)


@pytest.mark.parametrize("kwargs", [dict(rolloff=0.0), dict(rolloff=1.5), dict(t0=0.0), dict(nu=0), dict(nu=2.5)])
def test_pulse_spec_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        PulseSpec(**kwargs)
