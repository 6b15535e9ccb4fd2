import math

import numpy as np
import pytest
from scipy.special import erf

from octoport.errors import AccuracyWarning
from octoport.fock import DensityOperator, coherent_state, displacement, fock_state
from octoport.phasespace import (
    PhaseSpaceMeasure,
    conjugate_state,
    density,
    lemma2_rhs,
    quadrature_mean,
    rectangle_probability,
    safe_window,
)
from octoport.sets import REAL_LINE, Interval, Rectangle
from octoport.states import StateSpec

FAMILY = ["vacuum", "fock(1)", "coherent(1)"]


def husimi_vacuum(q, p):
    return np.exp(-(q**2 + p**2) / 2) / (2 * math.pi)


def gauss_square(a, b, c, d):
    # mass of N(0, 1) x N(0, 1) on [a, b) x [c, d)
    f = lambda x: 0.5 * erf(x / math.sqrt(2))  # noqa: E731
    return (f(b) - f(a)) * (f(d) - f(c))


def test_conjugate_state():
    vac = StateSpec("vacuum").density()
    assert np.array_equal(conjugate_state(vac).matrix, vac.matrix)
    a = 1 + 0.5j
    c = conjugate_state(coherent_state(a, 40).projector())
    target = coherent_state(np.conj(a), 40).coeffs
    assert np.vdot(target, c.matrix @ target).real >= 1 - 1e-10
    f = fock_state(3, 6).projector()
    assert np.array_equal(conjugate_state(f).matrix, f)


def test_conjugation_involution():
    rho = np.array([[0.6, 0.2 - 0.1j], [0.2 + 0.1j, 0.4]])
    assert np.array_equal(conjugate_state(conjugate_state(rho)).matrix, rho)


def test_vacuum_husimi_points():
    assert density("vacuum", "vacuum", 0, 0) == pytest.approx(1 / (2 * math.pi), abs=1e-8)
    assert density("vacuum", "vacuum", 1, 1) == pytest.approx(math.exp(-1) / (2 * math.pi), abs=1e-8)
    g = np.linspace(-3, 3, 5)
    Q, P = np.meshgrid(g, g)
    meas = PhaseSpaceMeasure(StateSpec("vacuum").density(), StateSpec("vacuum").density())
    assert np.abs(meas.density(Q, P) - husimi_vacuum(Q, P)).max() <= 1e-8


def test_coherent_husimi_closed_form():
    # Q-function of |alpha>: exp(-|w - alpha|^2)/(2 pi) with w = (q + ip)/sqrt2
    a = 0.7 - 0.4j
    meas = PhaseSpaceMeasure(coherent_state(a, 30).projector(), StateSpec("vacuum").density())
    q, p = np.meshgrid(np.linspace(-2, 3, 7), np.linspace(-3, 2, 7))
    w = (q + 1j * p) / math.sqrt(2)
    assert np.abs(meas.density(q, p) - np.exp(-np.abs(w - a) ** 2) / (2 * math.pi)).max() <= 1e-8


def test_density_nonnegative():
    rng = np.random.default_rng(11)
    pts = rng.uniform(-5, 5, size=(100, 2))
    meas = PhaseSpaceMeasure(fock_state(1, 3).projector(), StateSpec("vacuum").density())
    assert meas.density(pts[:, 0], pts[:, 1]).min() >= 0


def test_outside_window_warns():
    with pytest.warns(AccuracyWarning):
        density("vacuum", "vacuum", 40.0, 0.0)


def test_window_includes_mean():
    w0 = safe_window("vacuum", "vacuum")
    assert safe_window("coherent(2)", "vacuum") > w0 + 2.8


@pytest.mark.parametrize("T", FAMILY)
@pytest.mark.parametrize("S", ["vacuum", "fock(1)"])
def test_normalization(T, S):
    meas = PhaseSpaceMeasure(StateSpec.parse(T).density(), StateSpec.parse(S).density())
    total = meas.rectangle_probability(Rectangle.plane())
    assert 1 - 1e-4 <= total <= 1 + 1e-6


def test_vacuum_square_oracle():
    p = rectangle_probability("vacuum", "vacuum", Rectangle(-1, 1, -1, 1))
    assert p == pytest.approx(gauss_square(-1, 1, -1, 1), abs=1e-6)
    p2 = rectangle_probability("vacuum", "vacuum", Rectangle(-0.3, 2.1, 0.4, 1.7))
    assert p2 == pytest.approx(gauss_square(-0.3, 2.1, 0.4, 1.7), abs=1e-6)


def test_monotone_under_inclusion():
    small = rectangle_probability("fock(1)", "vacuum", Rectangle(-0.5, 0.5, -0.5, 0.5))
    big = rectangle_probability("fock(1)", "vacuum", Rectangle(-1.5, 0.5, -0.5, 1.0))
    assert small <= big


def test_displacement_covariance():
    q0, p0 = 0.5, -0.5
    d = displacement((q0 + 1j * p0) / math.sqrt(2), 40)
    T = fock_state(1, 40).projector()
    shifted_T = DensityOperator(d @ T @ d.conj().T)
    S = StateSpec.parse("coherent(0.3)").density(40)
    Z = Rectangle(-0.7, 1.4, -1.1, 0.2)
    lhs = rectangle_probability(shifted_T, S, Z)
    rhs = rectangle_probability(T, S, Z.shifted(-q0, -p0))
    assert abs(lhs - rhs) <= 1e-6
    # the shift matters
    assert abs(lhs - rectangle_probability(T, S, Z)) > 1e-2


@pytest.mark.parametrize("Z", [Rectangle(-1, 1, -1, 1), Rectangle(-0.4, 1.3, 0.2, 2.0)])
def test_symmetry_relation(Z):
    # Tr[T E^{S'}(Z)] = Tr[S' E^T(-Z)]
    T = StateSpec.parse("coherent(0.6+0.2j)").density()
    Sp = fock_state(1, 3).projector()
    neg = Rectangle(-Z.qmax, -Z.qmin, -Z.pmax, -Z.pmin)
    assert abs(rectangle_probability(T, Sp, Z) - rectangle_probability(Sp, T, neg)) <= 1e-6


def test_generator_overlap_full_line():
    assert lemma2_rhs("fock(1)", "coherent(1)", REAL_LINE, REAL_LINE) == pytest.approx(1, abs=1e-6)


@pytest.mark.parametrize("T", FAMILY)
@pytest.mark.parametrize("S", FAMILY)
def test_generator_overlap_matches_measure(T, S):
    X = Y = Interval(-1, 1)
    lhs = lemma2_rhs(T, S, X, Y)
    rhs = rectangle_probability(StateSpec.parse(T), conjugate_state(StateSpec.parse(S)), Rectangle(-1, 1, -1, 1))
    assert abs(lhs - rhs) <= 1e-4


def test_generator_overlap_complex():
    # a non-real S makes the conjugation visible
    T, S = "coherent(0.5)", "coherent(0.4+0.8j)"
    X, Y = Interval(-0.7, 1.4), Interval(-1.2, 0.9)
    lhs = lemma2_rhs(T, S, X, Y)
    Z = Rectangle(-0.7, 1.4, -1.2, 0.9)
    good = rectangle_probability(T, conjugate_state(StateSpec.parse(S)), Z)
    bad = rectangle_probability(T, StateSpec.parse(S), Z)
    assert abs(lhs - good) <= 1e-4
    assert abs(lhs - bad) > 1e-2


def test_quadrature_mean():
    assert quadrature_mean("coherent(1)") == pytest.approx(math.sqrt(2), abs=1e-10)
    assert quadrature_mean("coherent(1)", math.pi / 2) == pytest.approx(0, abs=1e-10)
