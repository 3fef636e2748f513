import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsx.charts import Chart, DForm, coord_differential
from nsx.errors import DomainError
from nsx.sympl import (
    SymplecticChart,
    graph_straightening,
    hamiltonian_vector_field,
    poisson_bracket,
    standard_symplectic_chart,
)
from nsx.symexpr import ONE, ZERO, rat, sym

S2 = standard_symplectic_chart(("p", "q"))
S4 = standard_symplectic_chart(("y1", "y2", "y3", "y4"))


@st.composite
def quadratics(draw, coords=("y1", "y2", "y3", "y4")):
    e = rat(draw(st.integers(-3, 3)))
    for _ in range(draw(st.integers(1, 3))):
        term = rat(Fraction(draw(st.integers(-4, 4)), draw(st.integers(1, 3))))
        for c in draw(st.lists(st.sampled_from(coords), min_size=1, max_size=2)):
            term = term * sym(c)
        e = e + term
    return e


# -- chart construction ---------------------------------------------------


def test_standard_chart_layout():
    assert S4.chart.coords == ("y1", "y2", "y3", "y4")
    assert S4.omega.comps == {(0, 1): ONE, (2, 3): ONE}


def test_standard_chart_rejects_odd():
    with pytest.raises(DomainError):
        standard_symplectic_chart(("a", "b", "c"))


def test_symplectic_chart_rejects_degenerate():
    c = Chart("c", ("u", "v", "w", "s"))
    om = DForm.build(c, 2, [((0, 1), rat(1))])
    with pytest.raises(DomainError):
        SymplecticChart(c, om)


def test_symplectic_chart_rejects_nonconstant():
    c = Chart("c", ("u", "v"))
    om = DForm.build(c, 2, [((0, 1), sym("u"))])
    with pytest.raises(DomainError):
        SymplecticChart(c, om)


def test_symplectic_chart_rejects_foreign_form():
    c = Chart("c", ("u", "v"))
    with pytest.raises(DomainError):
        SymplecticChart(c, S2.omega)


# -- Hamiltonian fields ---------------------------------------------------


def test_field_convention_on_standard_pair():
    xp = hamiltonian_vector_field(sym("p"), S2)
    xq = hamiltonian_vector_field(sym("q"), S2)
    assert xp.comps == {1: -ONE}
    assert xq.comps == {0: ONE}
    assert poisson_bracket(sym("p"), sym("q"), S2) == ONE


def test_field_of_constant_is_zero():
    assert hamiltonian_vector_field(rat(7), S4).comps == {}


def test_field_rejects_foreign_coordinates():
    with pytest.raises(DomainError):
        hamiltonian_vector_field(sym("z"), S2)


@settings(max_examples=40, deadline=None)
@given(quadratics())
def test_defining_identity(h):
    # i_{X_H} omega = dH, coefficient by coefficient.
    x = hamiltonian_vector_field(h, S4)
    lhs = S4.omega.interior(x)
    rhs = sum(
        (coord_differential(S4.chart, c) * h.diff(c) for c in S4.chart.coords),
        start=coord_differential(S4.chart, "y1") * ZERO,
    )
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(quadratics(), quadratics())
def test_bracket_antisymmetry(f, g):
    assert poisson_bracket(f, g, S4) == -poisson_bracket(g, f, S4)


@settings(max_examples=40, deadline=None)
@given(quadratics(), quadratics(), quadratics())
def test_bracket_leibniz(f, g, h):
    lhs = poisson_bracket(f, g * h, S4)
    rhs = g * poisson_bracket(f, h, S4) + poisson_bracket(f, g, S4) * h
    assert lhs == rhs


@settings(max_examples=25, deadline=None)
@given(quadratics(), quadratics(), quadratics())
def test_bracket_jacobi(f, g, h):
    total = (
        poisson_bracket(f, poisson_bracket(g, h, S4), S4)
        + poisson_bracket(g, poisson_bracket(h, f, S4), S4)
        + poisson_bracket(h, poisson_bracket(f, g, S4), S4)
    )
    assert total.is_zero


def test_bracket_of_coordinates_table():
    ys = [sym(c) for c in S4.chart.coords]
    expect = {(0, 1): ONE, (2, 3): ONE}
    for i in range(4):
        for j in range(i + 1, 4):
            assert poisson_bracket(ys[i], ys[j], S4) == expect.get((i, j), ZERO)


# -- graph straightening --------------------------------------------------


def test_straightening_flat_graph():
    res = graph_straightening(ZERO, 4)
    assert res.passed
    assert res.names == ["p1", "q1", "p2", "q2"]
    assert res.exprs["p1"] == sym("y3")
    assert res.exprs["q1"] == sym("y4")
    assert res.exprs["p2"] == sym("y1")
    assert res.exprs["q2"] == sym("y2")
    assert res.brackets[("p1", "q1")] == ONE
    assert res.brackets[("p1", "p2")] == ZERO
    assert res.offending == []
    assert res.q1_vanishes_on_graph
    assert res.pullback_is_standard
    assert res.reindexing_identical
    assert res.notes


def test_straightening_parabolic_graph():
    res = graph_straightening(sym("y1") ** 2, 2)
    assert res.passed
    assert res.names == ["p1", "q1"]
    assert res.exprs["q1"] == sym("y2") - sym("y1") ** 2
    assert res.brackets[("p1", "q1")] == ONE
    assert res.q1_vanishes_on_graph
    assert res.pullback_is_standard


def test_straightening_mixed_quadratic_fails():
    h = sym("y1") * sym("y2") + sym("y3") ** 2
    res = graph_straightening(h, 4)
    assert not res.passed
    assert len(res.offending) == 2
    na, nb, got, expected = res.offending[0]
    assert (na, nb) == ("q1", "p2")
    assert got == sym("y1")
    assert expected == 0
    assert res.offending[1][:2] == ("q1", "q2")
    # q1 still vanishes on the graph; the pullback is no longer standard
    # because dh picks up a dy2 component that survives against dy3.
    assert res.q1_vanishes_on_graph
    assert not res.pullback_is_standard


def test_straightening_six_dim_pairs():
    res = graph_straightening(ZERO, 6)
    assert res.names == ["p1", "q1", "p2", "q2", "p3", "q3"]
    assert res.exprs["p1"] == sym("y5")
    assert res.exprs["p2"] == sym("y1")
    assert res.exprs["q3"] == sym("y4")
    assert res.passed and res.reindexing_identical


def test_straightening_rejects_bad_input():
    with pytest.raises(DomainError):
        graph_straightening(ZERO, 3)
    with pytest.raises(DomainError):
        graph_straightening(sym("y4"), 4)
    with pytest.raises(DomainError):
        graph_straightening(sym("x"), 4)
