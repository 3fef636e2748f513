import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsx.errors import DomainError, EvaluationError
from nsx.symexpr import (
    DEFAULT_REGISTRY,
    ONE,
    PI,
    ZERO,
    Equal,
    NotEqual,
    OpaqueRegistry,
    Undecided,
    compile_numpy,
    cos_of,
    evaluate,
    exp_of,
    opaque_fn,
    rat,
    semantically_equal,
    sin_of,
    sym,
)

x, y, z = sym("x"), sym("y"), sym("z")


# -- strategies -------------------------------------------------------

rationals = st.fractions(
    min_value=Fraction(-4), max_value=Fraction(4), max_denominator=8
)


@st.composite
def polynomials(draw, names=("x", "y", "z"), max_terms=4):
    e = ZERO
    for _ in range(draw(st.integers(1, max_terms))):
        t = rat(draw(rationals))
        for n in names:
            t = t * sym(n) ** draw(st.integers(0, 3))
        e = e + t
    return e


def _poly_env(rng):
    return {n: Fraction(rng.randint(-40, 40), rng.randint(1, 9)) for n in "xyz"}


# -- canonical arithmetic ---------------------------------------------


def test_constants():
    assert ZERO.is_zero
    assert ONE.as_fraction() == 1
    assert (PI - PI).is_zero
    assert not PI.is_rational


def test_rational_arithmetic_matches_fraction():
    rng = random.Random(7)
    for _ in range(100):
        a = Fraction(rng.randint(-30, 30), rng.randint(1, 12))
        b = Fraction(rng.randint(-30, 30), rng.randint(1, 12))
        assert (rat(a) + rat(b)).as_fraction() == a + b
        assert (rat(a) * rat(b)).as_fraction() == a * b
        assert (rat(a) - rat(b)).as_fraction() == a - b


@given(polynomials(), polynomials(), polynomials())
@settings(max_examples=60, deadline=None)
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c


def test_mixed_scalar_operands():
    assert x + 1 == 1 + x
    assert 2 * x == x * 2
    assert x - Fraction(1, 2) == -(Fraction(1, 2) - x)
    assert x / 2 == Fraction(1, 2) * x


def test_power_rules():
    assert x**0 == ONE
    assert x**3 * x**2 == x**5
    assert (x * y) ** 2 == x**2 * y**2
    m = rat(3) * x**2
    assert m**-1 == rat(Fraction(1, 3)) * x**-2
    assert m * m**-1 == ONE


def test_division_requires_monomial():
    assert (x**2 / x).single_monomial()
    with pytest.raises(DomainError):
        _ = ONE / (x + y)
    with pytest.raises(DomainError):
        _ = (x + y) ** -1


def test_exp_merge():
    # at most one exponential atom survives per monomial
    e = exp_of(x) * exp_of(y)
    assert e == exp_of(x + y)
    assert exp_of(ZERO) == ONE
    assert exp_of(x) * exp_of(-x) == ONE


def test_trig_special_values():
    assert sin_of(ZERO).is_zero
    assert cos_of(ZERO) == ONE


def test_pythagorean_collapse():
    u = x + y
    e = rat(3) * z * sin_of(u) ** 2 + rat(3) * z * cos_of(u) ** 2
    assert e == rat(3) * z
    # unequal coefficients must not collapse
    e2 = rat(3) * z * sin_of(u) ** 2 + rat(2) * z * cos_of(u) ** 2
    assert e2 != rat(3) * z
    assert e2 != rat(2) * z


def test_str_roundtrip_stability():
    e = rat(2) * x**2 * sin_of(y) - exp_of(z) / 3
    assert str(e) == str(e + ZERO)


# -- differentiation --------------------------------------------------


@given(polynomials(), polynomials())
@settings(max_examples=40, deadline=None)
def test_diff_product_rule(a, b):
    lhs = (a * b).diff("x")
    rhs = a.diff("x") * b + a * b.diff("x")
    assert lhs == rhs


@given(polynomials())
@settings(max_examples=40, deadline=None)
def test_diff_linearity(a):
    assert (a + a).diff("y") == rat(2) * a.diff("y")


def test_diff_chain_rules():
    u = x**2 * y
    assert exp_of(u).diff("x") == rat(2) * x * y * exp_of(u)
    assert sin_of(u).diff("y") == x**2 * cos_of(u)
    assert cos_of(u).diff("y") == -(x**2) * sin_of(u)
    assert PI.diff("x").is_zero
    assert (PI * x).diff("x") == PI


def test_diff_opaque_uses_primed_name():
    f = opaque_fn("chi", "x")
    d = f.diff("x")
    assert d.opaque_names() == {"chi'"}
    assert f.diff("y").is_zero


def _central_difference(fn, env, name, h=1e-5):
    up = dict(env)
    dn = dict(env)
    up[name] = float(up[name]) + h
    dn[name] = float(dn[name]) - h
    return (fn(up) - fn(dn)) / (2 * h)


def test_diff_against_finite_differences_spot():
    # The full 200-expression sweep lives in the acceptance module; this
    # is the cheap always-on version.
    e = rat(2) * x**3 * y - sin_of(x * y) + exp_of(rat(1, 3) * x) + PI * y**2
    rng = random.Random(3)
    for name in ("x", "y"):
        d = e.diff(name)
        for _ in range(10):
            env = {n: rng.uniform(-1, 1) for n in ("x", "y")}
            got = float(evaluate(d, env))
            want = _central_difference(lambda v: float(evaluate(e, v)), env, name)
            assert math.isclose(got, want, rel_tol=1e-6, abs_tol=1e-6)


# -- substitution -----------------------------------------------------


@given(polynomials(), polynomials())
@settings(max_examples=40, deadline=None)
def test_subs_matches_composed_evaluation(a, b):
    rng = random.Random(11)
    composed = a.subs({"x": b})
    for _ in range(5):
        env = _poly_env(rng)
        inner = evaluate(b, env)
        assert evaluate(composed, env) == evaluate(a, {**env, "x": inner})


def test_subs_with_numbers():
    e = x**2 + y
    assert e.subs({"x": 3, "y": Fraction(1, 2)}).as_fraction() == Fraction(19, 2)


def test_subs_opaque_argument_renaming():
    f = opaque_fn("chi", "x") * y
    assert f.subs({"x": sym("t")}) == opaque_fn("chi", "t") * y
    with pytest.raises(DomainError):
        f.subs({"x": x + y})
    with pytest.raises(DomainError):
        f.subs({"x": rat(2)})


def test_subs_untouched_opaque_survives():
    f = opaque_fn("chi", "t") + x
    assert f.subs({"x": rat(1)}) == opaque_fn("chi", "t") + 1


# -- structure queries ------------------------------------------------


def test_free_coords_and_opaque_names():
    e = opaque_fn("chi", "t") * x + PI * y
    assert e.free_coords() == {"t", "x", "y"}
    assert e.opaque_names() == {"chi"}
    assert e.is_polynomial() is False
    assert (x * y + 1).is_polynomial() is True
    # pi stays inside the polynomial fragment: exact and closed under diff
    assert (PI * x).is_polynomial() is True
    assert not exp_of(x).is_polynomial()


def test_single_monomial_and_as_fraction():
    assert rat(Fraction(7, 3)).as_fraction() == Fraction(7, 3)
    with pytest.raises(DomainError):
        (x + y).as_fraction()
    assert (rat(2) * x * y).single_monomial() is not None
    with pytest.raises(DomainError):
        (x + y).single_monomial()


# -- evaluation -------------------------------------------------------


def test_evaluate_exact_fraction_path():
    e = x**2 - y / 2
    v = evaluate(e, {"x": Fraction(3, 2), "y": Fraction(1, 3)})
    assert isinstance(v, Fraction) and v == Fraction(25, 12)


def test_evaluate_float_path():
    v = evaluate(PI * x + exp_of(y), {"x": 2, "y": 0.5})
    assert isinstance(v, float)
    assert math.isclose(v, 2 * math.pi + math.exp(0.5), rel_tol=1e-12)


def test_evaluate_zero_factor_keeps_exactness():
    # the x factor kills the term before the opaque contributes a float,
    # so the result stays an exact Fraction
    e = x * opaque_fn("chi", "t")
    v = evaluate(e, {"x": Fraction(0), "t": Fraction(1, 2)}, DEFAULT_REGISTRY)
    assert isinstance(v, Fraction) and v == 0


def test_evaluate_unknown_opaque_rejected_up_front():
    e = x * opaque_fn("mystery", "t")
    with pytest.raises(EvaluationError):
        evaluate(e, {"x": Fraction(0), "t": Fraction(2)}, DEFAULT_REGISTRY)


def test_evaluate_missing_coordinate():
    with pytest.raises(EvaluationError):
        evaluate(x + y, {"x": 1})


def test_evaluate_registry_default_bump():
    v = evaluate(opaque_fn("chi", "t"), {"t": Fraction(0)}, DEFAULT_REGISTRY)
    assert math.isclose(v, 1.0)
    v = evaluate(opaque_fn("chi", "t"), {"t": 2}, DEFAULT_REGISTRY)
    assert v == 0.0
    with pytest.raises(EvaluationError):
        evaluate(opaque_fn("nope", "t"), {"t": 1}, DEFAULT_REGISTRY)


def test_evaluate_exact_trig_folding():
    # sin at an argument that evaluates to exactly zero stays a Fraction
    e = rat(5) * sin_of(x - 1) + y
    v = evaluate(e, {"x": Fraction(1), "y": Fraction(3)})
    assert isinstance(v, Fraction) and v == 3


@given(polynomials())
@settings(max_examples=30, deadline=None)
def test_compile_numpy_agrees_with_evaluate(e):
    import numpy as np

    fn = compile_numpy(e)
    rng = random.Random(5)
    envs = [_poly_env(rng) for _ in range(6)]
    vec = {n: np.array([float(env[n]) for env in envs]) for n in "xyz"}
    out = fn(vec)
    for i, env in enumerate(envs):
        want = float(evaluate(e, env))
        got = float(out[i]) if getattr(out, "ndim", 0) else float(out)
        assert math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-9)


def test_compile_numpy_transcendentals():
    import numpy as np

    e = sin_of(x) * exp_of(y) + PI
    fn = compile_numpy(e)
    xs = np.linspace(-1, 1, 7)
    ys = np.linspace(0, 2, 7)
    out = fn({"x": xs, "y": ys})
    want = np.sin(xs) * np.exp(ys) + np.pi
    assert np.allclose(out, want)


def test_compile_numpy_registry():
    import numpy as np

    e = opaque_fn("chi", "t") * x
    fn = compile_numpy(e, DEFAULT_REGISTRY)
    ts = np.array([0.0, 0.5, 2.0])
    xs = np.ones(3)
    out = fn({"t": ts, "x": xs})
    assert out[2] == 0.0 and out[0] == pytest.approx(1.0)


# -- semantic equality ------------------------------------------------


def test_semantically_equal_exact():
    assert isinstance(semantically_equal((x + y) ** 2, x**2 + 2 * x * y + y**2), Equal)


def test_semantically_equal_polynomial_separation():
    v = semantically_equal(x * y, x + y)
    assert isinstance(v, NotEqual)
    assert v.witness is not None


def test_semantically_equal_transcendental_witness():
    v = semantically_equal(exp_of(x), exp_of(y))
    assert isinstance(v, NotEqual)


def test_semantically_equal_undecided_on_unknown_opaque():
    v = semantically_equal(opaque_fn("f", "x"), opaque_fn("g", "x"))
    assert isinstance(v, Undecided)


def test_semantically_equal_sampled_match_is_undecided():
    # exp(x)*exp(-x) merges exactly; an opaque pair can only ever sample
    reg = OpaqueRegistry()
    reg.register("h", lambda t: t * 0 + 1.0)
    reg.register("k", lambda t: t * 0 + 1.0)
    v = semantically_equal(
        opaque_fn("h", "x"), opaque_fn("k", "x"), registry=reg
    )
    assert isinstance(v, Undecided)
    assert v.samples > 0


def test_semantically_equal_seed_stability():
    a, b = x * y, x + y
    v1 = semantically_equal(a, b, seed=4)
    v2 = semantically_equal(a, b, seed=4)
    assert v1.witness == v2.witness
