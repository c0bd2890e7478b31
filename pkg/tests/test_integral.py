import math

import numpy as np
import pytest

from expkorovkin.exceptions import DomainError
from expkorovkin.functions import phi, rational
from expkorovkin.integral import (
    IntegralKernel,
    QuadratureSpec,
    f_operator_closed,
    f_operator_closed_many,
    f_operator_quadrature,
    f_operator_quadrature_many,
    kernel_mass,
    m_bound_estimate,
    preset_abel_kernel,
    v_operator,
)
from expkorovkin.operators import family
from expkorovkin.summability import ApproachSchedule, preset_abel, preset_borel

from oracles import ALTERNATING_F9, BOREL_MASKED_Y10, MASKED_ERROR, MASKED_F9_PHI1_XI1

K = preset_abel_kernel()
BOREL = preset_borel()


def test_kernel_values():
    assert K(1.0, 1e-300) == pytest.approx(1.0)
    assert K(2.0, 2.0) == pytest.approx(0.5 * math.exp(-1), rel=1e-15)


@pytest.mark.parametrize("s", [0.1, 1.0, 10.0, 100.0])
def test_kernel_mass(s):
    assert abs(kernel_mass(K, s) - 1.0) < 1e-8


def test_zero_kernel_mass():
    z = IntegralKernel(lambda s, y: 0.0 * np.asarray(y), "zero")
    assert kernel_mass(z, 3.0, QuadratureSpec(y_cutoff=50.0)) == 0.0
    with pytest.raises(DomainError):
        kernel_mass(z, 3.0)


def test_kernel_is_nonnegative():
    ys = np.linspace(0, 500, 1001)
    for s in (0.1, 1, 10, 1000):
        assert np.all(K(s, ys) >= 0)


def test_v_operator_examples():
    assert v_operator(BOREL, family("szasz_shifted"), 3.0, phi(0), 1.0) == pytest.approx(1.0, abs=1e-12)
    assert v_operator(BOREL, family("alternating"), 5.0, phi(0), 2.0) == \
        pytest.approx(1 + math.exp(-10), abs=1e-12)
    assert v_operator(BOREL, family("masked"), 10.0, phi(0), 0.0) == \
        pytest.approx(BOREL_MASKED_Y10, abs=1e-12)


def test_quadrature_examples():
    q = QuadratureSpec(abs_tolerance=1e-9)
    v = f_operator_quadrature(K, BOREL, family("szasz_shifted"), 5.0, phi(0), 1.0, q)
    assert abs(v - 1.0) < q.abs_tolerance
    v = f_operator_quadrature(K, BOREL, family("alternating"), 9.0, phi(0), 0.5, q)
    assert v == pytest.approx(ALTERNATING_F9, abs=1e-8)
    v = f_operator_quadrature(K, BOREL, family("masked"), 9.0, phi(0), 1.0, q)
    assert v == pytest.approx(f_operator_closed(family("masked"), 9.0, phi(0), 1.0), abs=1e-6)


def test_closed_form_examples():
    for s in (9, 99, 999):
        v = f_operator_closed(family("masked"), s, phi(0), 1.5)
        assert v == pytest.approx(1 - MASKED_ERROR[s], abs=1e-12)
    assert f_operator_closed(family("szasz_shifted"), 50.0, phi(0), 3.0) == pytest.approx(1.0, abs=1e-12)
    assert f_operator_closed(family("masked"), 9.0, phi(1), 1.0) == \
        pytest.approx(MASKED_F9_PHI1_XI1, abs=1e-12)


def test_s_zero_reduces_to_first_operator():
    fam = family("alternating")
    v = f_operator_closed(fam, 0.0, phi(1), 1.0)
    assert v == pytest.approx(2 * math.exp(math.expm1(-1.0)), abs=1e-14)
    w = f_operator_quadrature(K, BOREL, fam, 0.0, phi(1), 1.0)
    assert v == pytest.approx(w, abs=1e-14)


def test_closed_form_is_linear():
    fam = family("masked")
    f, g = phi(1), rational()
    for xi in (0.0, 1.0, 4.0):
        lhs = f_operator_closed(fam, 9.0, f + g.scaled(-3.0), xi)
        rhs = f_operator_closed(fam, 9.0, f, xi) - 3.0 * f_operator_closed(fam, 9.0, g, xi)
        assert abs(lhs - rhs) < 1e-10


def test_m_bound_estimates():
    assert m_bound_estimate(BOREL, family("szasz_shifted")) == pytest.approx(1.0, abs=1e-12)
    alt = m_bound_estimate(BOREL, family("alternating"), ApproachSchedule((1, 2, 4)))
    assert alt == pytest.approx(1 + math.exp(-2), abs=1e-12)
    assert alt <= 2.0
    assert m_bound_estimate(BOREL, family("masked")) <= 1.0 + 1e-12


def test_quadrature_respects_positivity_and_bound():
    fam = family("alternating")
    q = QuadratureSpec(abs_tolerance=1e-9)
    vals = f_operator_quadrature_many(K, BOREL, fam, 3.0, rational(), [0.0, 0.5, 2.0, 8.0], q)
    assert np.all(vals >= -q.abs_tolerance)
    M = m_bound_estimate(BOREL, fam, ApproachSchedule((0.01, 0.1, 1.0)))
    assert np.all(np.abs(vals) <= M * 1.0 * kernel_mass(K, 3.0) + 1e-8)


def test_quadrature_with_abel_inner_method_is_rejected_past_radius():
    with pytest.raises(DomainError):
        f_operator_quadrature(K, preset_abel(), family("masked"), 9.0, phi(0), 1.0)
