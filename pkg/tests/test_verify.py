"""Forward and converse Euler-Lagrange checks, diagnostics, and orbits."""

import dataclasses
import math
import random
from fractions import Fraction

import pytest

import lagrforge as lf
from lagrforge import (Equivalence, Rational, SecondOrderJetError,
                       ShapeMismatchError, Sym, canonicalize)

SHEAR = """
group shear {
  params: g;
  coords: X1, X2;
  identity: (0);
  inverse: (-g);
  multiply: (lhs.g + rhs.g);
  action: (X1 + g*X2, X2);
}
"""


def test_strong_el_so2(so2_family):
    els = lf.strong_el(so2_family.lie, so2_family.lagrangians[0])
    assert [str(e) for e in els] == ["2*a2*X1' - 2*a2*X2'_g",
                                    "2*a2*X2' + 2*a2*X1'_g"]
    assert lf.strong_el(so2_family.lie, Rational(7)) == \
        [Rational(0), Rational(0)]


def test_strong_el_rejects_second_order(so2_lie):
    j1 = Sym(so2_lie.jets[0][0])
    with pytest.raises(SecondOrderJetError):
        lf.strong_el(so2_lie, j1 ** 2)


def test_forward_check(so2_family, affine_family):
    for family in (so2_family, affine_family):
        grid = lf.forward_check(family)
        assert len(grid) == family.lie.r
        assert all(v == Equivalence.PROVED_EQUAL for row in grid for v in row)


def test_el_system_is_linear_in_jets(so2_family, affine_family):
    for family in (so2_family, affine_family):
        lie = family.lie
        jets = lie.jet_list()
        for L in family.lagrangians:
            for e in lf.strong_el(lie, L):
                for J in jets:
                    second = lf.free_symbols(lf.differentiate(e, J))
                    assert not (second & set(jets))


def test_converse_match(so2_family):
    lie = so2_family.lie
    f1, f2 = (Sym(f) for f in lie.fields)
    result = lf.converse_check(so2_family, {"a1": 0, "a2": 1})
    assert result.status == "Match"
    assert result.params == {"a1": Fraction(0), "a2": Fraction(1)}
    assert result.solved[lie.jets[0][0]] == -f2
    assert result.solved[lie.jets[1][0]] == f1
    assert result.unsolved == ()
    assert all(v != Equivalence.PROVED_UNEQUAL for _, v in result.comparisons)
    assert len(result.equations) == 2


def test_converse_underdetermined(so2_family):
    result = lf.converse_check(so2_family, {"a1": 1, "a2": 0})
    assert result.status == "Underdetermined"
    assert result.unsolved == ("X1'_g", "X2'_g")
    assert result.solved == {}
    # a generic mix is non-degenerate again
    assert lf.converse_check(so2_family, {"a1": 1, "a2": 1}).status == "Match"


def test_converse_mismatch_produces_witness(so2_family):
    lie = so2_family.lie
    f1, f2 = (Sym(f) for f in lie.fields)
    j1, j2 = Sym(lie.jets[0][0]), Sym(lie.jets[1][0])
    # flipping the sign of the squares sends the E-L solve to the
    # opposite rotation direction
    bad = canonicalize(-f1 * j2 - f1 ** 2 + f2 * j1 - f2 ** 2)
    tampered = dataclasses.replace(so2_family, lagrangians=[bad],
                                   free_params=(), members=[],
                                   multipliers={})
    result = lf.converse_check(tampered, {})
    assert result.status == "Mismatch"
    assert result.witness["jet"] == "X1'_g"
    assert set(result.witness) == {"jet", "solved", "expected", "point",
                                   "magnitude"}
    assert result.witness["magnitude"] > 1e-9


def test_degeneracy_scan(so2_family):
    report = lf.degeneracy_scan(so2_family)
    assert [e.label for e in report.entries] == \
        ["a1 alone", "a2 alone", "generic combination"]
    assert [e.status for e in report.entries] == \
        ["Underdetermined", "Match", "Match"]
    assert report.degenerate == ["a1 alone"]
    generic = report.entries[-1].assignment
    assert generic == {"a1": Fraction(3), "a2": Fraction(2, 7)}


def test_degeneracy_scan_caps_parameters(affine_family):
    with pytest.raises(ValueError) as err:
        lf.degeneracy_scan(affine_family)
    assert "limited to 4 free parameters" in str(err.value)
    assert "40" in str(err.value)


def test_kinetic_identity(so2_lie, so2_family):
    kin = lf.kinetic_identity_check(so2_lie, so2_family)
    f1, f2 = (Sym(f) for f in so2_lie.fields)
    assert kin.verdict == Equivalence.PROVED_EQUAL
    assert kin.momentum_onshell == f1 ** 2 + f2 ** 2
    assert kin.energy_onshell == f1 ** 2 + f2 ** 2
    assert str(kin.special_lagrangian) == \
        "1/2*X1'*X2'_g - 1/2*X1'^2 - 1/2*X2'*X1'_g - 1/2*X2'^2"
    assert kin.family_match == Equivalence.PROVED_EQUAL


def test_kinetic_identity_is_rotation_specific():
    lie = lf.constraints(lf.parse(SHEAR))
    kin = lf.kinetic_identity_check(lie)
    assert kin.verdict == Equivalence.PROVED_UNEQUAL
    assert kin.family_match is None


def test_kinetic_identity_shape(affine_lie):
    with pytest.raises(ShapeMismatchError):
        lf.kinetic_identity_check(affine_lie)


def test_orbit_full_turn(so2_lie):
    orbit = lf.numeric_orbit_check(so2_lie, (1.0, 0.0), 2 * math.pi)
    assert orbit.max_deviation <= 1e-6
    assert orbit.steps == 6284
    assert orbit.final_state == pytest.approx((1.0, 0.0), abs=1e-9)


def test_orbit_quarter_turn_and_edge_cases(so2_lie):
    orbit = lf.numeric_orbit_check(so2_lie, (1.0, 0.0), math.pi / 2)
    assert orbit.final_state == pytest.approx((0.0, 1.0), abs=1e-9)
    assert orbit.final_exact == pytest.approx((0.0, 1.0), abs=1e-12)
    # the origin is a fixed point; a zero-length orbit takes no steps
    assert lf.numeric_orbit_check(so2_lie, (0.0, 0.0),
                                  2 * math.pi).max_deviation == 0.0
    zero = lf.numeric_orbit_check(so2_lie, (1.0, 0.0), 0.0)
    assert zero.steps == 0 and zero.max_deviation == 0.0
    # the radius is arbitrary: the comparison tracks the exact action
    assert lf.numeric_orbit_check(so2_lie, (2.0, 0.0),
                                  1.0).max_deviation <= 1e-6


def test_orbit_rejects_bad_input(so2_lie, affine_lie):
    with pytest.raises(ValueError):
        lf.numeric_orbit_check(so2_lie, (1.0, 0.0), 1.0, step=0.0)
    with pytest.raises(ValueError):
        lf.numeric_orbit_check(so2_lie, (1.0,), 1.0)
    with pytest.raises(ShapeMismatchError):
        lf.numeric_orbit_check(affine_lie, (1.0, 0.0), 1.0)


def test_build_report_so2(so2_family):
    report = lf.build_report(so2_family, {"a1": 0, "a2": 1}, numeric=True,
                             x0=(1.0, 0.0), g_end=2 * math.pi)
    assert report.ok
    assert report.converse.status == "Match"
    assert report.orbit.max_deviation <= 1e-6
    assert report.kinetic.family_match == Equivalence.PROVED_EQUAL
    assert report.degeneracy.degenerate == ["a1 alone"]
    assert any("phi[a][j]" in note for note in report.notes)

    degenerate = lf.build_report(so2_family, {"a2": 0})
    assert not degenerate.ok
    assert degenerate.converse.status == "Underdetermined"


def test_build_report_needs_orbit_window(so2_family):
    with pytest.raises(ValueError):
        lf.build_report(so2_family, {"a2": 1}, numeric=True)


def test_build_report_affine(affine_family):
    rng = random.Random(lf.DEFAULT_SEED)
    params = {p.name: Fraction(rng.randint(1, 9), rng.randint(1, 9))
              for p in affine_family.free_params}
    report = lf.build_report(affine_family, params, numeric=True)
    assert report.ok
    assert report.orbit is None and report.kinetic is None
    assert report.degeneracy is None
    notes = " | ".join(report.notes)
    assert "degeneracy scan skipped" in notes
    assert "kinetic identity check skipped" in notes
    assert "orbit integration skipped" in notes
