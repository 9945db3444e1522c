"""Root raised-cosine shaping pulse and its raised-cosine autocorrelation.

Both functions are closed forms evaluated on arbitrary (scalar or array)
time arguments. Nothing here truncates; callers that need g(t) = 0 beyond
``nu * T`` apply that themselves.
"""

from dataclasses import dataclass

import numpy as np

# relative closeness to a removable singularity that switches to the limit value
_SINGULAR_TOL = 1e-8


@dataclass(frozen=True)
class PulseSpec:
    """Root-RC shaping parameters.

    rolloff: excess bandwidth factor beta in (0, 1]
    t0: Nyquist symbol period in seconds
    nu: truncation half-width of g(t), counted in FTN symbol periods
    """

    rolloff: float = 0.5
    t0: float = 1.0
    nu: int = 10

    def __post_init__(self):
        if not 0.0 < self.rolloff <= 1.0:
            raise ValueError(f"rolloff must be in (0, 1], got {self.rolloff}")
        if not self.t0 > 0.0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if int(self.nu) != self.nu or self.nu < 1:
            raise ValueError(f"nu must be a positive integer, got {self.nu}")
        object.__setattr__(self, "nu", int(self.nu))


def _as_output(x, values):
    return values.item() if np.ndim(x) == 0 else values


def rrc_impulse(spec, t):
    """Unit-energy root raised-cosine impulse response h(t).

    The removable singularities at t = 0 and |t| = T0 / (4 beta) are
    replaced by their limits.
    """
    beta = spec.rolloff
    x = np.asarray(t, dtype=float) / spec.t0
    scale = 1.0 / np.sqrt(spec.t0)

    denom = np.pi * x * (1.0 - (4.0 * beta * x) ** 2)
    at_zero = np.abs(x) < _SINGULAR_TOL
    at_edge = np.abs(np.abs(4.0 * beta * x) - 1.0) < _SINGULAR_TOL
    regular = ~(at_zero | at_edge)

    safe = np.where(regular, denom, 1.0)
    num = np.sin(np.pi * x * (1.0 - beta)) + 4.0 * beta * x * np.cos(np.pi * x * (1.0 + beta))
    h = np.where(regular, num / safe, 0.0)

    h = np.where(at_zero, 1.0 - beta + 4.0 * beta / np.pi, h)
    edge_value = (beta / np.sqrt(2.0)) * (
        (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * beta))
        + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * beta))
    )
    h = np.where(at_edge, edge_value, h)
    return _as_output(t, scale * h)


def nyquist_autocorr(spec, t):
    """Raised-cosine pulse g(t), the autocorrelation of :func:`rrc_impulse`.

    g(t) = sinc(t/T0) cos(pi beta t/T0) / (1 - (2 beta t/T0)^2) with
    sinc(x) = sin(pi x)/(pi x). g(0) = 1 and g(k T0) = 0 for k != 0.
    """
    x = np.asarray(t, dtype=float) / spec.t0
    u = np.abs(2.0 * spec.rolloff * x)
    # cos(pi u/2) / (1 - u^2) == (pi/2) sinc((1 - u)/2) / (1 + u); no 0/0 at u = 1
    g = np.sinc(x) * (np.pi / 2.0) * np.sinc((1.0 - u) / 2.0) / (1.0 + u)
    return _as_output(t, g)
