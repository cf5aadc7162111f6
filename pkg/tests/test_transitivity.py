import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from _gen import nonzero_fraction, random_open_point, random_tuple
from conftest import TORIC, load
from toricflex.demazure import Root, distinguished_ray, exp_action, root_for_ray
from toricflex.errors import CapabilityError, DomainError, FieldExtensionError
from toricflex.lattice import lattice_index
from toricflex.toric import point_from_torus
from toricflex.transitivity import (
    STAGE_OPEN,
    STAGE_SEPARATE,
    STAGE_STANDARD,
    AutomorphismWord,
    TupleState,
    kappa_equivalent,
    make_r1_orbits_distinct,
    move_to_open_orbit,
    normalize_to_standard,
    orbit_key,
    separating_invariant,
    solve,
    stab_shift,
    standard_labels,
    standard_tuple,
)


def a2_point(X, x, y):
    vals = {(1, 0): Fraction(x), (0, 1): Fraction(y)}
    return X.from_values([vals[h] for h in X.hilb])


# kappa


def test_kappa_is_lattice_index(toric):
    assert toric.kappa == lattice_index([toric.rays[i] for i in toric.ray_basis], toric.n)
    assert load("x21").kappa == 2 and load("x31").kappa == 3 and load("a3").kappa == 1


def test_kappa_equivalence():
    assert kappa_equivalent(3, 3, 1)
    assert not kappa_equivalent(3, -3, 1)
    assert kappa_equivalent(3, -3, 2)
    assert not kappa_equivalent(3, -3, 3)
    assert not kappa_equivalent(2, 3, 4)
    with pytest.raises(DomainError):
        kappa_equivalent(0, 1, 2)


def test_standard_labels_avoid_kappa_collisions():
    assert standard_labels(4, 2) == [1, 2, 3, 4]
    for X in map(load, TORIC):
        pts = standard_tuple(X, 4)
        assert len(set(pts)) == 4


# stage 1


def test_open_points_need_no_letters(toric, rng):
    state = TupleState(toric, [random_open_point(toric, rng) for _ in range(3)])
    word, _ = move_to_open_orbit(state)
    assert len(word) == 0


def test_a2_axis_point_lifts_in_one_letter():
    X = load("a2")
    word, state = move_to_open_orbit(TupleState(X, [a2_point(X, 3, 0)]))
    assert len(word) == 1
    assert state.points[0].face == X.open_face
    g = word.letters[0]
    assert g.stage == STAGE_OPEN and g.root.e[1] == -1 and g.root.e[0] > 0


def test_open_orbit_stage_is_monotone(toric, rng):
    for _ in range(5):
        state = TupleState(toric, random_tuple(toric, 3, rng))
        word, out = move_to_open_orbit(state)
        codim = sum(toric.n - d for d in state.dims)
        assert len(word) <= codim
        pts = list(state.points)
        total = sum(toric.faces[p.face].dim for p in pts)
        for g in word.letters:
            pts = [exp_action(toric, g, p) for p in pts]
            new_total = sum(toric.faces[p.face].dim for p in pts)
            assert new_total > total
            total = new_total
        assert all(p.face == toric.open_face for p in out.points)


def test_singular_point_rejected():
    X = load("x21")
    with pytest.raises(DomainError):
        move_to_open_orbit(TupleState(X, [X.distinguished_point(X.vertex_face)]))


def test_duplicate_points_rejected():
    X = load("a2")
    with pytest.raises(DomainError):
        TupleState(X, [X.base_point, X.base_point])


# separating invariants


def test_separating_invariant_a2():
    X = load("a2")
    e = Root((0, -1), distinguished_ray(X, (0, -1)))
    q = separating_invariant(X, e, [a2_point(X, 1, 5), a2_point(X, 2, 7)])
    assert dict((m, c) for c, m in q.terms) == {(0, 0): 2, (1, 0): -1}


def test_separating_invariant_trivial_and_products(rng):
    X = load("x21")
    e = root_for_ray(X, 0)
    assert separating_invariant(X, e, [X.base_point]).is_one()
    reps = []
    while len(reps) < 3:
        p = random_open_point(X, rng)
        if all(orbit_key(X, p, 0) != orbit_key(X, r, 0) for r in reps):
            reps.append(p)
    q = separating_invariant(X, e, reps)
    assert q.evaluate(X, reps[0]) == 1
    assert q.evaluate(X, reps[1]) == 0 and q.evaluate(X, reps[2]) == 0


def test_stab_shift_freezes_and_moves(toric, rng):
    e = root_for_ray(toric, toric.ray_basis[0])
    reps = []
    while len(reps) < 3:
        p = random_open_point(toric, rng)
        if all(orbit_key(toric, p, e.ray) != orbit_key(toric, r, e.ray) for r in reps):
            reps.append(p)
    q = separating_invariant(toric, e, reps)
    g = stab_shift(toric, e, q, Fraction(5, 2))
    for r in reps[1:]:
        assert exp_action(toric, g, r) == r
    assert exp_action(toric, g, reps[0]) == exp_action(toric, stab_shift(toric, e, type(q).one(toric.n), Fraction(5, 2)), reps[0])


# stages 2 and 3


def test_separation_a2_shared_x():
    X = load("a2")
    state = TupleState(X, [a2_point(X, 2, 3), a2_point(X, 2, 5)])
    word, out = make_r1_orbits_distinct(state)
    r1 = X.ray_basis[0]
    assert orbit_key(X, out.points[0], r1) != orbit_key(X, out.points[1], r1)
    assert all(g.stage == STAGE_SEPARATE for g in word.letters)


def test_already_separated_needs_no_letters():
    X = load("a2")
    word, _ = make_r1_orbits_distinct(TupleState(X, [a2_point(X, 2, 3), a2_point(X, 5, 7)]))
    r1 = X.rays[X.ray_basis[0]]
    if all(v == 0 for v in r1[1:]):
        assert len(word) == 0


def test_normalize_single_point_a2():
    X = load("a2")
    word, out = normalize_to_standard(TupleState(X, [a2_point(X, 3, -4)]))
    assert out.points == (a2_point(X, 1, 1),)
    assert all(g.stage == STAGE_STANDARD for g in word.letters)
    word, _ = normalize_to_standard(out)
    assert len(word) == 0


# solve


def test_solve_identity(toric, rng):
    pts = random_tuple(toric, 3, rng)
    sol = solve(toric, pts, pts)
    assert sol.word.replay(toric, pts) == pts


def test_solve_a2_single_point():
    X = load("a2")
    sol = solve(X, [a2_point(X, 2, 3)], [a2_point(X, 5, 7)])
    assert sol.word.replay(X, [a2_point(X, 2, 3)]) == [a2_point(X, 5, 7)]


@pytest.mark.parametrize("name", TORIC)
@pytest.mark.parametrize("m", [1, 2, 3])
def test_solve_random_tuples(name, m):
    X = load(name)
    rng = random.Random(f"{name}-{m}")
    for _ in range(4):
        pts, tgt = random_tuple(X, m, rng), random_tuple(X, m, rng)
        sol = solve(X, pts, tgt)
        assert sol.word.replay(X, pts) == tgt
        assert sol.word.inverse().replay(X, tgt) == pts
        assert set(sol.stages["points"]) == {STAGE_OPEN, STAGE_SEPARATE, STAGE_STANDARD}
        assert sol.basis == X.ray_basis and sol.kappa == X.kappa


def test_solve_to_standard(toric, rng):
    pts = random_tuple(toric, 3, rng)
    assert solve(toric, pts).word.replay(toric, pts) == standard_tuple(toric, 3)


def test_word_json_round_trip(toric, rng):
    pts, tgt = random_tuple(toric, 2, rng), random_tuple(toric, 2, rng)
    word = solve(toric, pts, tgt).word
    again = AutomorphismWord.from_json(word.to_json(), toric)
    assert again == word
    assert (word + word.inverse()).replay(toric, pts) == pts


@given(seed=st.integers(0, 10**6))
def test_inverse_word_is_identity(seed):
    X = load("x21")
    rng = random.Random(seed)
    pts, tgt = random_tuple(X, 2, rng), random_tuple(X, 2, rng)
    w = solve(X, pts, tgt).word
    assert (w + w.inverse()).replay(X, pts) == pts


def test_length_mismatch_and_singular_targets():
    X = load("x21")
    with pytest.raises(DomainError):
        solve(X, [X.base_point], [])
    with pytest.raises(DomainError):
        solve(X, [X.base_point], [X.distinguished_point(X.vertex_face)])


def test_rational_obstruction_is_reported():
    # reaching the values (2, 2, 2) from the base point needs a square root of 2
    X = load("x21")
    p = X.from_values([Fraction(v) for v in (1, 1, 1)])
    q = X.from_values([Fraction(v) for v in (2, 2, 2)])
    with pytest.raises(FieldExtensionError) as exc:
        solve(X, [p], [q])
    assert exc.value.step


def test_torus_points_are_solvable_on_x31(rng):
    X = load("x31")
    for _ in range(5):
        t = [nonzero_fraction(rng) for _ in range(2)]
        p = point_from_torus(X, X.ray_basis, t)
        assert solve(X, [p]).word.replay(X, [p]) == standard_tuple(X, 1)


def test_one_dimensional_separation_is_a_capability_limit():
    from toricflex.toric import ToricVariety

    X = ToricVariety([(1,)])
    a, b = X.from_values([2]), X.from_values([3])
    with pytest.raises(CapabilityError):
        solve(X, [a, b])
