import math

import numpy as np
import pytest

from octoport.errors import BoundaryAtomWarning, ConfigurationError, NumericalAccuracyError
from octoport.quadrature import integrate_1d, integrate_2d
from octoport.sets import Interval, Rectangle, as_intervals, union_contains, warn_boundary_atoms


def test_half_open():
    iv = Interval(-1, 2)
    assert list(iv.contains([-1, 0, 2])) == [True, True, False]
    r = Rectangle(0, 1, 0, 1)
    assert r.contains(0, 0) and not r.contains(1, 0.5)


def test_interval_forms():
    assert as_intervals((0, 1)) == (Interval(0.0, 1.0),)
    assert as_intervals(None)[0].length == math.inf
    two = as_intervals([(0, 1), Interval(2, 3)])
    assert list(union_contains(two, [0.5, 1.5, 2.5])) == [True, False, True]
    with pytest.raises(ConfigurationError):
        as_intervals([(0, 2), (1, 3)])
    with pytest.raises(ConfigurationError):
        Interval(2, 1)


def test_atom_warning():
    with pytest.warns(BoundaryAtomWarning):
        assert warn_boundary_atoms([0.0, 0.5], [Interval(0.5, 1.0)])
    assert not warn_boundary_atoms([0.25], [Interval(0.5, 1.0)])


def test_integrate_1d_gaussian():
    val = integrate_1d(lambda x: np.exp(-(x**2)), -6, 6)
    assert val == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    vec = integrate_1d(lambda x: np.stack([x, x**2]), 0, 1)
    assert np.allclose(vec, [0.5, 1 / 3])
    assert integrate_1d(lambda x: x, 1, 1) == 0


def test_integrate_2d_gaussian():
    val = integrate_2d(lambda q, p: np.exp(-(q**2 + p**2) / 2) / (2 * math.pi), -7, 7, -7, 7)
    assert val == pytest.approx(1, abs=1e-10)


def test_quadrature_failure_reported():
    with pytest.raises(NumericalAccuracyError):
        integrate_1d(lambda x: np.sin(1 / np.maximum(x, 1e-9)), 0, 1, max_doublings=2)
    with pytest.raises(NumericalAccuracyError):
        integrate_2d(lambda q, p: np.sin(400 * q * p), 0, 4, 0, 4, max_halvings=1)
