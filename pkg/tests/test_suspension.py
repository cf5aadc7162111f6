import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from _gen import engineered_surface_points, smooth_sample
from conftest import SURFACES, load
from toricflex import polys
from toricflex.errors import DomainError, FieldExtensionError
from toricflex.suspension import (
    EXACT,
    FIX_V,
    SURFACE_STEPS,
    Letter,
    Lift,
    Shear,
    SuspensionVariety,
    SuspensionWord,
    SymbolicDerivation,
    build_suspension,
    candidate_derivations,
    check_lnd,
    derivation_velocity,
    field_for,
    flexibility_matrix,
    hu,
    hu_action,
    hv,
    hv_action,
    lift_lnd,
    partial,
    regularity_witness,
    sample_points,
    smoothness_check,
    standard_tuple,
    surface_postconditions,
    surface_solve,
    suspension_solve,
)

NUMERIC = field_for("numeric")
Z = (0, 1)


def on(X, p):
    return X.contains(p)


# construction


def test_surface_x2():
    X = build_suspension(1, "x^2")
    assert X.is_surface and X.dim == 2 and X.ambient_dim == 3
    assert str(X.relations[0]) == "u1*v1 - x0**2"


def test_tower_has_two_relations():
    X = build_suspension(build_suspension(1, "x0^2 - x0"), "u1 + x0")
    assert X.level == 2 and len(X.relations) == 2 and X.dim == 3
    assert X.base.is_surface


@pytest.mark.parametrize("f", ["3", "0", "x0 - x0 + 2"])
def test_constant_f_rejected(f):
    with pytest.raises(DomainError):
        build_suspension(1, f)


def test_constant_modulo_relations_rejected():
    with pytest.raises(DomainError):
        build_suspension(build_suspension(1, "x0^2"), "u1*v1 - x0^2 + 5")


@pytest.mark.parametrize("f", ["1/x0", "y^2", "u1 + x0", "x0^"])
def test_bad_f_rejected(f):
    with pytest.raises(DomainError):
        build_suspension(1, f)


def test_reduced_forms_have_no_uv_monomial():
    X = load("tower2")
    red = X.reduce(X.us[0] ** 2 * X.vs[0] * X.xs[0])
    assert not (red.has(X.us[0]) and red.has(X.vs[0]) and any(
        m[1] and m[2] for m in sympy.Poly(red, *X.gens[:3]).monoms()
    ))


def test_json_round_trip(susp):
    again = SuspensionVariety.from_json(susp.to_json())
    assert again.fs == susp.fs and again.k == susp.k


# smoothness


def test_smoothness_examples():
    X = load("susp_x2")
    assert not smoothness_check(X, (0, 0, 0))
    assert X.jacobian((0, 0, 0)) == [[0, 0, 0]]
    assert smoothness_check(X, (1, 1, 1))
    assert X.jacobian((1, 1, 1)) == [[2, -1, -1]]
    with pytest.raises(DomainError):
        smoothness_check(X, (1, 1, 2))


def test_points_off_the_vertex_are_smooth(rng):
    X = load("susp_x2")
    for p in sample_points(X, 200, rng):
        assert X.is_smooth(p) == any(p)


def test_regularity_witness_columns(susp, rng):
    for p in sample_points(susp, 50, rng):
        w = regularity_witness(susp, p)
        if w is not None:
            assert w[1] != 0 and susp.is_smooth(p)


# letters on surfaces


def test_hu_example():
    X = load("susp_x2")
    assert hu_action(X, Z, 1, (1, 1, 1)) == (2, 1, 4)
    assert hu_action(X, Z, 0, (1, 1, 1)) == (1, 1, 1)
    assert hv_action(X, Z, 1, (1, 1, 1)) == (2, 4, 1)


def test_divided_difference_at_u_zero():
    X = load("susp_x2mx")
    # f'(0) = -1 and f'(1) = 1: v moves by -t and +t, x stays
    assert hu_action(X, Z, 2, (0, 0, 5)) == (0, 0, 3)
    assert hu_action(X, Z, 2, (1, 0, 5)) == (1, 0, 7)


@pytest.mark.parametrize("name", SURFACES)
@given(seed=st.integers(0, 10**6))
def test_letters_preserve_the_relation(name, seed):
    X = load(name)
    rng = random.Random(seed)
    q = (0,) + tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(rng.randint(1, 3)))
    t = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
    for p in sample_points(X, 3, rng):
        assert on(X, hu_action(X, q, t, p))
        assert on(X, hv_action(X, q, t, p))


@pytest.mark.parametrize("name", SURFACES)
@given(seed=st.integers(0, 10**6), s=st.fractions(-4, 4, max_denominator=3), t=st.fractions(-4, 4, max_denominator=3))
def test_group_law_and_invariants(name, seed, s, t):
    X = load(name)
    rng = random.Random(seed)
    q = (0,) + tuple(Fraction(rng.randint(-3, 3)) for _ in range(2))
    p = sample_points(X, 1, rng)[0]
    for act in (hu_action, hv_action):
        assert act(X, q, s + t, p) == act(X, q, s, act(X, q, t, p))
    assert hu_action(X, q, t, p)[1] == p[1]
    assert hv_action(X, q, t, p)[2] == p[2]


def test_numeric_letters_preserve_relation(rng):
    X = load("susp_x3px")
    for p in sample_points(X, 30, rng, NUMERIC):
        img = hv(Z, complex(0.5, -1.25)).apply(X, hu((0, 1, 2), complex(-1, 0.5)).apply(X, p))
        assert X.contains(img, NUMERIC)


def test_letter_json_round_trip():
    X = load("susp_x2")
    g = hv((0, 2, Fraction(1, 3)), Fraction(-5, 2), FIX_V)
    obj = g.to_json()
    assert obj == {"side": "v", "q": ["0", "2", "1/3"], "t": "-5/2", "step": FIX_V}
    assert Letter.from_json(obj, X) == g
    w = SuspensionWord((g, g.inverse()))
    assert SuspensionWord.from_json(w.to_json(), X) == w
    assert w.apply(X, (1, 1, 1)) == (1, 1, 1)


def test_multiplier_must_vanish_at_zero():
    with pytest.raises(DomainError):
        hu((1, 1), 1)
    with pytest.raises(DomainError):
        Lift(partial(1, 0), (0, 1), "w")


# lifted derivations


def test_lift_images_example():
    X = load("susp_x2")
    D = lift_lnd(X, partial(1, 0), Z, "v")
    imgs = {str(g): str(e) for g, e in D.images(X).items()}
    assert imgs == {"x0": "v1", "u1": "2*x0", "v1": "0"}


def test_lift_of_invariant_derivation_fixes_u():
    X = load("susp_a2")
    D = lift_lnd(X, {"x0": 1, "x1": "-2*x0"}, Z, "v")
    assert D.images(X)[X.us[0]] == 0


def test_non_triangular_base_rejected():
    with pytest.raises(DomainError):
        SymbolicDerivation.from_images(load("susp_a2").base, {"x0": "x1", "x1": "x0"})


def _lift_family(X):
    out = []
    for D in candidate_derivations(X.base):
        for q in [(0, 1), (0, 0, 1), (0, 2, -1), (0, 1, 0, 3)]:
            for side in ("u", "v"):
                out.append(Lift(D, tuple(Fraction(c) for c in q), side))
    return out


def test_lift_identity_holds_symbolically(susp):
    for D in _lift_family(susp):
        check_lnd(D, susp)


def test_velocity_matches_symbolic_images(susp, rng):
    pts = sample_points(susp, 5, rng)
    for D in _lift_family(susp)[:8]:
        imgs = D.images(susp)
        for p in pts:
            sub = dict(zip(susp.gens, [sympy.Rational(x.numerator, x.denominator) for x in p]))
            expect = [Fraction(str(imgs[g].subs(sub))) for g in susp.gens]
            assert [Fraction(v) for v in derivation_velocity(D, susp, p)] == expect


def test_tower_letters_preserve_relations(rng):
    X = load("tower2")
    pts = sample_points(X, 20, rng)
    for D in _lift_family(X):
        g = Letter(D, Fraction(rng.randint(-4, 4), 3))
        for p in pts:
            assert on(X, g.apply(X, p))


def test_affine_shear():
    X = SuspensionVariety(2, [])
    g = Letter(Shear(1, ((Fraction(1), (2, 0)),)), Fraction(3))
    assert g.apply(X, (2, 5)) == (2, 17)
    with pytest.raises(DomainError):
        Shear(0, ((Fraction(1), (1, 0)),))


# surface solver


@pytest.mark.parametrize("name", SURFACES)
def test_numeric_surface_solve(name):
    X = load(name)
    rng = random.Random(name)
    for m in (1, 2, 3):
        for _ in range(3):
            pts = smooth_sample(X, m, rng, NUMERIC)
            sol = surface_solve(X, pts, mode="numeric")
            assert sol.residual < 1e-9
            assert all(sol.postconditions["points"].values())


def test_exact_engineered_instances():
    X = load("susp_x2mx")
    rng = random.Random(7)
    for _ in range(5):
        pts = engineered_surface_points(X, 3, rng)
        sol = surface_solve(X, pts, mode="exact")
        assert sol.word.replay(X, pts) == [tuple(S) for S in standard_tuple(X, 3)]
        assert set(surface_postconditions(X, pts, sol.word)) == set(SURFACE_STEPS)


def test_exact_mode_reports_irrational_root():
    # reaching v = 1 from u = 2 needs x with x^2 = 2
    X = load("susp_x2")
    with pytest.raises(FieldExtensionError) as exc:
        surface_solve(X, [(1, 2, Fraction(1, 2))])
    assert exc.value.step == FIX_V


def test_identity_instance():
    X = load("susp_x2")
    pts = [(1, 1, 1), (2, 1, 4)]
    sol = surface_solve(X, pts, pts, mode="numeric")
    assert sol.residual < 1e-9


def test_solver_rejects_bad_input():
    X = load("susp_x2")
    with pytest.raises(DomainError):
        surface_solve(X, [(0, 0, 0)], mode="numeric")
    with pytest.raises(DomainError):
        surface_solve(X, [(1, 1, 1), (1, 1, 1)])
    with pytest.raises(DomainError):
        surface_solve(load("tower2"), [(1, 1, 0, 1, 2)])


def test_numeric_targets(rng):
    X = load("susp_x3px")
    pts, tgt = smooth_sample(X, 2, rng, NUMERIC), smooth_sample(X, 2, rng, NUMERIC)
    sol = surface_solve(X, pts, tgt, mode="numeric")
    assert sol.residual < 1e-9
    assert all(all(v.values()) for v in sol.postconditions.values())


def test_freezing_level_sets(rng):
    # a letter with q vanishing at c leaves every point with v = c (resp. u = c) fixed
    X = load("susp_x2mx")
    cs = [Fraction(2), Fraction(-1, 2)]
    q = polys.mul([0, 1], polys.from_roots(cs))
    for c in cs:
        for _ in range(10):
            x = Fraction(rng.randint(-9, 9), rng.randint(1, 3))
            p = (x, polys.evaluate(X.f_coeffs, x) / c, c)
            assert hv(q, Fraction(rng.randint(1, 9))).apply(X, p) == p


# towers


def test_tower_exact_solve_over_affine_plane(rng):
    X = load("susp_a2")
    pts = [p for p in sample_points(X, 6, rng) if X.is_smooth(p)][:3]
    sol = suspension_solve(X, pts)
    assert sol.word.replay(X, pts) == standard_tuple(X, len(pts))


def test_tower_numeric_solve(rng):
    X = load("tower2")
    pts = smooth_sample(X, 2, rng, NUMERIC, special=0.0)
    sol = suspension_solve(X, pts, mode="numeric", tol=1e-7)
    assert sol.residual < 1e-7


# flexibility


def test_flexibility_matrix_surface():
    X = load("susp_x2")
    E = flexibility_matrix(X, (1, 1, 1))
    assert E.matrix == ((1, 2, 0), (1, 0, 2))
    assert E.rank == 2 and E.check(X)


def test_flexibility_preconditions():
    with pytest.raises(DomainError):
        flexibility_matrix(load("susp_x2"), (0, 0, 5))
    with pytest.raises(DomainError):
        flexibility_matrix(load("susp_x2mx"), (Fraction(1, 2), -1, Fraction(1, 4)))


def test_flexibility_level_two(rng):
    X = load("tower2")
    # the base derivation d/dx must move f at the base point, so f'(x) != 0
    hyper = [
        p for p in sample_points(X, 60, rng)
        if X.is_hyperbolic(p) and X.base.is_hyperbolic(X.project(p)) and p[0] != Fraction(1, 2)
    ]
    assert hyper
    for p in hyper[:5]:
        E = flexibility_matrix(X, p)
        assert E.rank == 3 and E.check(X)


def test_standard_tuples_lie_on_the_variety(susp):
    for p in standard_tuple(susp, 3):
        assert susp.contains(p, EXACT) and susp.is_smooth(p)
