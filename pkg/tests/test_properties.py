"""Property-based checks of the stated invariants."""

import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from expkorovkin.config import parse_config
from expkorovkin.exceptions import ConfigError
from expkorovkin.functions import HalfLineGrid, exp_combination, phi, rational
from expkorovkin.integral import f_operator_closed
from expkorovkin.korovkin import ErrorTable, beta, eth, modulus_hat, mu_sup
from expkorovkin.operators import family, szasz_eval, szasz_exp_closed, szasz_many
from expkorovkin.report import read_error_csv, write_error_csv
from expkorovkin.summability import preset_abel, preset_borel, ps_transform

ABEL, BOREL = preset_abel(), preset_borel()
FAST = settings(max_examples=40, deadline=None,
                suppress_health_check=[HealthCheck.function_scoped_fixture])

points = st.floats(0.0, 20.0, allow_nan=False)
coef = st.floats(-5.0, 5.0, allow_nan=False)
methods = st.sampled_from([("abel", 0.0, 0.995), ("borel", 0.01, 40.0)])


def _method_and_y(draw_method, frac):
    name, lo, hi = draw_method
    return (ABEL if name == "abel" else BOREL), lo + (hi - lo) * frac


def _seq(seed):
    rng = np.random.default_rng(seed)
    table = rng.uniform(-1, 1, 4096)
    return lambda m: table[np.asarray(m) % table.size]


@FAST
@given(methods, st.floats(0.05, 1.0), st.integers(0, 2**31), st.integers(0, 2**31), coef, coef)
def test_transform_linear(meth, frac, s1, s2, a, b):
    method, y = _method_and_y(meth, frac)
    x1, x2 = _seq(s1), _seq(s2)
    lhs = ps_transform(method, lambda m: a * x1(m) + b * x2(m), y, envelope=abs(a) + abs(b))
    rhs = a * ps_transform(method, x1, y, envelope=1.0) + b * ps_transform(method, x2, y, envelope=1.0)
    assert abs(lhs - rhs) < 1e-10


@FAST
@given(methods, st.floats(0.05, 1.0), coef)
def test_transform_of_constant(meth, frac, c):
    method, y = _method_and_y(meth, frac)
    v = ps_transform(method, lambda m: np.full(np.shape(m), c), y, envelope=abs(c) + 1e-300)
    assert abs(v - c) <= 1e-12 * max(1.0, abs(c)) + 1e-15


@FAST
@given(st.integers(1, 300), points, st.sampled_from([0, 1, 2]))
def test_szasz_closed_form(m, x, nu):
    assert abs(szasz_eval(m, phi(nu), x) - szasz_exp_closed(m, nu, x)) < 1e-11


@FAST
@given(st.integers(1, 400), points, st.floats(0.01, 10.0))
def test_szasz_positive_and_bounded(m, x, a):
    f = rational(a)
    v = szasz_many([m], f, x)[0]
    assert -1e-12 <= v <= 1.0 + 1e-12
    assert abs(v - szasz_eval(m, f, x)) < 1e-11


@FAST
@given(coef, coef, coef, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_modulus_monotone_in_delta(c0, c1, c2, d1, d2):
    f = exp_combination(c0, c1, c2)
    lo, hi = sorted((d1, d2))
    assert modulus_hat(f, lo) <= modulus_hat(f, hi) + 1e-15
    assert modulus_hat(f, 0.0) == 0.0


@FAST
@given(st.floats(0.0, 30.0), st.floats(0.0, 200.0))
def test_mu_dominates(t, x):
    assert (math.exp(-t) - math.exp(-x)) ** 2 <= mu_sup(t) + 1e-15


@FAST
@given(st.integers(1, 10**6), st.floats(0.0, 60.0))
def test_holhos_chains(m, x):
    b, d = beta(m), eth(m)
    left = math.exp(-x * b) - math.exp(-x)
    mid = 0.5 * (1 - b) * (x * math.exp(-x * b) + x * math.exp(-x))
    assert left <= mid + 1e-12 and mid <= (1 - b * b) / (2 * math.e * b) + 1e-12
    left = math.exp(-2 * x * d) - math.exp(-2 * x)
    mid = 0.5 * (2 - d) * (x * math.exp(-x * d) + x * math.exp(-2 * x))
    assert left <= mid + 1e-12 and mid <= (4 - d * d) / (4 * math.e * d) + 1e-12


@FAST
@given(st.sampled_from(["szasz_shifted", "alternating", "masked"]), st.floats(0.0, 200.0),
       points, coef, coef)
def test_closed_operator_linear(kind, s, x, a, b):
    fam = family(kind)
    lhs = f_operator_closed(fam, s, phi(1).scaled(a) + phi(2).scaled(b), x)
    rhs = a * f_operator_closed(fam, s, phi(1), x) + b * f_operator_closed(fam, s, phi(2), x)
    assert abs(lhs - rhs) < 1e-10


@FAST
@given(st.integers(0, 10**7))
def test_masked_scalars(m):
    want = 0.0 if math.isqrt(m) ** 2 == m else 1.0
    assert family("masked").scalar(m) == want


@FAST
@given(st.lists(st.floats(0.0, 1e6, allow_nan=False), min_size=1, max_size=6, unique=True),
       st.data())
def test_csv_round_trip(tmp_path_factory, params, data):
    params = sorted(params)
    errs = np.array([[data.draw(st.floats(0.0, 1e3, allow_nan=False)) for _ in range(2)]
                     for _ in params])
    t = ErrorTable(params, ["phi0", "rational"], errs,
                   {"phi0": "converging", "rational": "not-converging"})
    path = tmp_path_factory.mktemp("csv") / "t.csv"
    back = read_error_csv(write_error_csv(t, path))
    assert back.parameters == params and np.array_equal(back.errors, errs)


@FAST
@given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz_", min_size=1, max_size=12))
def test_unknown_keys_rejected(key):
    allowed = {"family", "mode", "method", "kernel", "route", "functions", "horizon", "workers"}
    doc = {"experiment": {"family": "masked", key: 1}}
    if key in allowed:
        return
    try:
        parse_config(doc)
    except ConfigError as exc:
        assert key in str(exc)
    else:
        raise AssertionError("unknown key accepted")


@FAST
@given(st.floats(0.1, 0.9), st.integers(3, 30))
def test_grid_refinement_keeps_nodes(cut, n):
    g = HalfLineGrid.uniform(cut * 10, n)
    r = g.refined()
    assert set(g.nodes.tolist()) <= set(r.nodes.tolist())
    assert r.nodes[0] == 0.0 and np.all(np.diff(r.nodes) > 0)
