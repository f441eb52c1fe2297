import random

import pytest
from hypothesis import given, settings, strategies as st

from dgbv.mc import random_series
from dgbv.series import (ParamSpec, SuperSeries, apply_operator, bracket_series,
                         bracket_series_direct, format_series, integrate, left_partial,
                         series_multiply)

from conftest import structure

D = structure("ddbar(1)")
ALG = D.algebra
SPEC = ParamSpec(("t0", "t1", "t2"), (0, 1, 1), 4)
seeds = st.integers(0, 10 ** 6)


def rs(rng, parity=None):
    return random_series(rng, SPEC, ALG, terms=5, parity=parity)


def scalar(rng, parity=None):
    terms = {}
    for _ in range(5):
        m = rng.choice(SPEC.all_monomials())
        if parity is None or SPEC.parity(m) == parity:
            terms[m] = rng.randint(-3, 3)
    return SuperSeries(SPEC, None, terms)


def sgn(k):
    return -1 if k % 2 else 1


@given(seeds, st.integers(0, 1), st.integers(0, 1))
@settings(max_examples=80, deadline=None)
def test_supercommutative_and_associative(seed, p, q):
    rng = random.Random(seed)
    f, g, h = rs(rng, p), rs(rng, q), rs(rng)
    assert series_multiply(f, g) == series_multiply(g, f).scale(sgn(p * q))
    assert series_multiply(series_multiply(f, g), h) == series_multiply(f, series_multiply(g, h))
    a = scalar(rng, p)
    assert series_multiply(a, g) == series_multiply(g, a).scale(sgn(p * q))


@given(seeds, st.integers(0, 1))
@settings(max_examples=80, deadline=None)
def test_delta_leibniz_and_bracket_oracle(seed, p):
    rng = random.Random(seed)
    f, g = rs(rng, p), rs(rng)
    lhs = apply_operator(D.delta, series_multiply(f, g))
    rhs = (series_multiply(apply_operator(D.delta, f), g)
           + series_multiply(f, apply_operator(D.delta, g)).scale(sgn(p)))
    assert lhs == rhs
    assert bracket_series(D, f, g) == bracket_series_direct(D, f, g)


@given(seeds)
@settings(max_examples=50, deadline=None)
def test_operators_pass_parameters_with_sign(seed):
    rng = random.Random(seed)
    f = rs(rng)
    for a in range(SPEC.n):
        ta = SuperSeries(SPEC, None, {SPEC.var(a): 1})
        lhs = apply_operator(D.Delta, series_multiply(ta, f))
        assert lhs == series_multiply(ta, apply_operator(D.Delta, f)).scale(sgn(SPEC.parities[a]))


@given(seeds, st.integers(0, 1))
@settings(max_examples=50, deadline=None)
def test_left_partial_derivation_and_mixed(seed, p):
    rng = random.Random(seed)
    a, b = scalar(rng, p), scalar(rng)
    for i in range(SPEC.n):
        for j in range(SPEC.n):
            assert (left_partial(left_partial(a, i), j)
                    == left_partial(left_partial(a, j), i).scale(sgn(SPEC.parities[i] * SPEC.parities[j])))
        pi = SPEC.parities[i]
        lhs = left_partial(series_multiply(a, b), i)
        rhs = (series_multiply(left_partial(a, i), b)
               + series_multiply(a, left_partial(b, i)).scale(sgn(pi * p)))
        assert lhs == rhs.truncate(SPEC.order - 1)


def test_truncation_and_odd_squares():
    e = ParamSpec.epsilon()
    v = ALG.element(("v", 1))
    E = SuperSeries(e, ALG, {(1,): v})
    assert series_multiply(E, E).is_zero()
    t = ParamSpec.even("t", 2)
    x = SuperSeries(t, None, {(1,): 1})
    assert series_multiply(x, series_multiply(x, x)).is_zero()
    assert series_multiply(x, x).coefficient((2,)) == 1


def test_format_and_integrate():
    f = SuperSeries(SPEC, None, {(1, 0, 0): 1, (0, 1, 1): -2, (0, 0, 0): "1/2"})
    assert format_series(f) == "1/2 + t0 - 2*t1*t2"
    g = SuperSeries(SPEC, ALG, {(1, 0, 0): {ALG.basis.index("x"): 3}})
    s = integrate(g, {ALG.basis.index("x"): 1})
    assert s.coefficient((1, 0, 0)) == 3 and s.algebra is None


def test_odd_exponent_rejected_or_dropped():
    f = SuperSeries(SPEC, None, {(0, 2, 0): 1})
    assert f.is_zero()
