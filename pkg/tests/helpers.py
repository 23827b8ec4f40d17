"""Small shared helpers for the test modules."""
import math

import numpy as np

THETA = {
    "0": 0.0, "pi/4": math.pi / 4, "-pi/4": -math.pi / 4, "pi/3": math.pi / 3,
    "pi/2": math.pi / 2, "2pi/3": 2 * math.pi / 3, "3pi/4": 3 * math.pi / 4, "pi": math.pi,
}


def pair_separation(z):
    z = np.asarray(z)
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())
