"""Independent reference implementations used only by the tests.

The interferometer is rebuilt from 2x2 matrices: the splitter is the
rotation ``expm(i * atan2(sqrt(r), sqrt(1 - r)) * sigma_x)``, which reproduces the
i-on-reflection convention without sharing any code with the library.
"""

import math

import numpy as np
from scipy.linalg import expm

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


def splitter(r):
    return expm(1j * math.atan2(math.sqrt(r), math.sqrt(1.0 - r)) * SIGMA_X)


def phase(theta):
    return np.diag([1.0, np.exp(1j * theta)])


def attenuator(l1, l2):
    return np.diag([math.sqrt(1 - l1), math.sqrt(1 - l2)])


def populations(r1, r2, theta, l1=0.0, l2=0.0, placement="none", second=True, path=1):
    """Port probabilities ``(p1, p2, lost)`` from plain matrix products."""
    psi = np.array([1, 0], dtype=complex) if path == 1 else np.array([0, 1], dtype=complex)
    m = splitter(r1)
    if placement == "inside":
        m = attenuator(l1, l2) @ m
    m = phase(theta) @ m
    if second:
        m = splitter(r2) @ m
    if placement == "outside":
        m = attenuator(l1, l2) @ m
    out = m @ psi
    p1, p2 = abs(out[0]) ** 2, abs(out[1]) ** 2
    return p1, p2, 1.0 - p1 - p2


def dense_visibility(r1, r2, l1=0.0, l2=0.0, placement="none", path=1, n=7200):
    """Contrast of the raw path-1 port from a dense brute-force phase scan."""
    p = np.array(
        [populations(r1, r2, t, l1, l2, placement, True, path)[0]
         for t in np.linspace(0, 2 * math.pi, n, endpoint=False)]
    )
    return (p.max() - p.min()) / (p.max() + p.min())
