"""Compensated summation with a fixed term order."""
import math

import numpy as np

from ._accel import njit


@njit(cache=True)
def neumaier_sum(values):
    """Neumaier's variant of Kahan summation over a 1-d float array."""
    s = 0.0
    c = 0.0
    for i in range(values.shape[0]):
        x = values[i]
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c


def csum(values):
    """Correctly rounded sum of ``values`` (any shape), independent of order."""
    arr = np.asarray(values, dtype=float).ravel()
    return math.fsum(arr.tolist())
