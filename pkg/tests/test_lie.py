"""Derivation of S, u, and the Lie equation constraints."""

import dataclasses

import pytest

import lagrforge as lf
from lagrforge import (ConventionViolationError, Equivalence,
                       ResidualCoordinatesError, Power, Rational, Role, Sym,
                       canonicalize)

SCALE = """
group scale {
  params: g;
  coords: X1;
  identity: (1);
  inverse: (1/g);
  multiply: (lhs.g * rhs.g);
  action: (g*X1);
}
"""

TRIVIAL = """
group trivial {
  params: t;
  coords: X1;
  identity: (0);
  inverse: (-t);
  multiply: (lhs.t + rhs.t);
  action: (X1);
}
"""


def test_so2_infinitesimal_coefficients(so2_spec, so2_lie):
    x1, x2 = Sym(so2_spec.coords[0]), Sym(so2_spec.coords[1])
    assert so2_lie.S == [[-x2], [x1]]
    assert so2_lie.u == [[Rational(1)]]


def test_so2_fields_and_jets(so2_lie):
    assert [f.name for f in so2_lie.fields] == ["X1'", "X2'"]
    assert so2_lie.fields[0].role == Role.FIELD_VARIABLE
    assert so2_lie.fields[0].index == (1,)
    assert [[j.name for j in row] for row in so2_lie.jets] == \
        [["X1'_g"], ["X2'_g"]]
    assert so2_lie.jets[1][0].index == (2, 1)
    assert so2_lie.jets[0][0].role == Role.JET_VARIABLE


def test_so2_constraints(so2_lie):
    f1, f2 = (Sym(f) for f in so2_lie.fields)
    j1, j2 = Sym(so2_lie.jets[0][0]), Sym(so2_lie.jets[1][0])
    assert so2_lie.phi[0][0] == j1 + f2
    assert so2_lie.phi[1][0] == j2 - f1
    assert str(so2_lie.phi[0][0]) == "X2' + X1'_g"
    assert str(so2_lie.phi[1][0]) == "-X1' + X2'_g"
    assert so2_lie.onshell[so2_lie.jets[0][0]] == -f2
    assert so2_lie.onshell[so2_lie.jets[1][0]] == f1


def test_so2_constraints_vanish_on_action(so2_lie):
    # trig derivatives cancel exactly, so the check is fully symbolic
    assert all(v == Equivalence.PROVED_EQUAL
               for row in so2_lie.on_action for v in row)
    assert any("phi[a][j]" in note for note in so2_lie.notes)


def test_affine_auxiliary_functions(affine_spec, affine_lie):
    g1, g2 = (Sym(p) for p in affine_spec.params)
    assert affine_lie.u == [[canonicalize(Power(g1, -1)), Rational(0)],
                           [-g2 / g1, Rational(1)]]
    identity = {p: e for p, e in zip(affine_spec.params,
                                     affine_spec.identity)}
    at_identity = [[lf.substitute(entry, identity) for entry in row]
                   for row in affine_lie.u]
    assert at_identity == [[Rational(1), Rational(0)],
                          [Rational(0), Rational(1)]]


def test_affine_constraints(affine_spec, affine_lie):
    g1, g2 = (Sym(p) for p in affine_spec.params)
    x1 = Sym(affine_spec.coords[0])
    f1 = Sym(affine_lie.fields[0])
    j = affine_lie.jets
    assert affine_lie.S == [[x1, Rational(1)], [Rational(0), Rational(0)]]
    assert affine_lie.phi[0][0] == Sym(j[0][0]) - f1 / g1 + g2 / g1
    assert affine_lie.phi[0][1] == Sym(j[0][1]) - Rational(1)
    assert affine_lie.phi[1][0] == Sym(j[1][0])
    assert affine_lie.phi[1][1] == Sym(j[1][1])
    assert affine_lie.onshell[j[0][0]] == f1 / g1 - g2 / g1
    assert affine_lie.onshell[j[0][1]] == Rational(1)
    assert affine_lie.onshell[j[1][0]] == Rational(0)
    assert affine_lie.onshell[j[1][1]] == Rational(0)
    assert [j_.name for j_ in affine_lie.jet_list()] == \
        ["X1'_g1", "X1'_g2", "X2'_g1", "X2'_g2"]


def test_affine_constraints_vanish_on_action(affine_lie):
    assert all(v == Equivalence.PROVED_EQUAL
               for row in affine_lie.on_action for v in row)


def test_scale_group():
    lie = lf.constraints(lf.parse(SCALE))
    g = Sym(lie.spec.params[0])
    f1 = Sym(lie.fields[0])
    assert lie.S == [[Sym(lie.spec.coords[0])]]
    assert lie.u == [[canonicalize(Power(g, -1))]]
    assert lie.onshell[lie.jets[0][0]] == f1 / g
    assert lie.on_action[0][0] == Equivalence.PROVED_EQUAL


def test_trivial_group():
    lie = lf.constraints(lf.parse(TRIVIAL))
    assert lie.S == [[Rational(0)]]
    assert lie.phi[0][0] == Sym(lie.jets[0][0])
    assert lie.onshell[lie.jets[0][0]] == Rational(0)


def test_residual_coordinates_error():
    spec = lf.parse(SCALE)
    g = Sym(spec.params[0])
    x1 = Sym(spec.coords[0])
    broken = dataclasses.replace(spec, inverse=(canonicalize(1 / g + x1),))
    with pytest.raises(ResidualCoordinatesError) as err:
        lf.auxiliary_functions(broken)
    assert "X1" in str(err.value)


def test_convention_violation():
    source = TRIVIAL.replace("multiply: (lhs.t + rhs.t);",
                             "multiply: (2*lhs.t + rhs.t);")
    source = source.replace("action: (X1);", "action: (X1 + t);")
    with pytest.raises(ConventionViolationError):
        lf.constraints(lf.parse(source))
