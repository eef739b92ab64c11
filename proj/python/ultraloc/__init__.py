"""Log-domain phase-space transforms, localisation operators and property suites.

Specs (windows, symbols, weight sequences, phase grids) are plain dicts in the
same JSON form the command-line tool reads.
"""

import json

from . import _core
from ._core import UltralocError, plateau_cutoff, set_threads

__all__ = [
    "UltralocError",
    "assoc",
    "assoc_exponent_fit",
    "check_conditions",
    "divergence_demo",
    "locop",
    "plateau_cutoff",
    "property_suite",
    "set_threads",
    "stft",
    "threshold_scan",
    "window_eval",
]


def _s(spec):
    return spec if isinstance(spec, str) else json.dumps(spec)


def assoc(sequence, rho):
    return _core.assoc(_s(sequence), rho)


def assoc_exponent_fit(sequence, rho_lo=10.0, rho_hi=1e4, samples=64):
    return json.loads(_core.assoc_exponent_fit(_s(sequence), rho_lo, rho_hi, samples))


def check_conditions(sequence):
    return json.loads(_core.check_conditions(_s(sequence)))


def window_eval(window, x):
    """(logmag, phase) arrays of the window at the points x."""
    return _core.window_eval(_s(window), list(map(float, x)))


def stft(signal, window, radius, step, phase_grid):
    """(x, xi, logmag, phase, truncation_warning); logmag and phase are flat, x outer."""
    return _core.stft(_s(signal), _s(window), radius, step, _s(phase_grid))


def locop(symbol, w1, w2, psi, theta, route="weyl"):
    """<A_a psi, theta> by the direct ("direct") or convolution ("weyl") route."""
    return json.loads(_core.locop(_s(symbol), _s(w1), _s(w2), _s(psi), _s(theta), route))


def property_suite(name, samples=10000, seed=0):
    return json.loads(_core.property_suite(name, samples, seed))


def divergence_demo(l, q=1.0, n_max=8):
    return json.loads(_core.divergence_demo(l, q, n_max))


def threshold_scan(r, q=1.0, ls=()):
    return json.loads(_core.threshold_scan(r, q, list(ls)))
