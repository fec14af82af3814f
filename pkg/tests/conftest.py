import numpy as np
import pytest

from persym.grid import Grid1D, GridFunctionND, StepFunction


def random_circle_function(rng, n=8, levels=None, vmax=3.0):
    """Random nonnegative step function on the standard periodic grid."""
    if levels is not None:
        vals = rng.integers(0, levels, size=n).astype(float)
    else:
        vals = vmax * rng.random(n)
    return StepFunction(Grid1D.circle(n), vals)


def random_interval_function(rng, n=12, lo=-2.0, hi=2.0, vmax=2.0, pad=0):
    vals = vmax * rng.random(n)
    if pad:
        vals[:pad] = 0.0
        vals[-pad:] = 0.0
    return StepFunction(Grid1D.interval(n, lo, hi), vals)


def random_nd_function(rng, n1=8, n2=8, length2=4.0, vmax=2.0, levels=None):
    """Random 2D grid function: periodic x1, centered compact box in x2."""
    if levels is not None:
        vals = rng.integers(0, levels, size=(n1, n2)).astype(float)
    else:
        vals = vmax * rng.random((n1, n2))
    vals[:, 0] = 0.0
    vals[:, -1] = 0.0
    return GridFunctionND(
        Grid1D.circle(n1), (Grid1D.centered_interval(n2, length2),), vals
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
