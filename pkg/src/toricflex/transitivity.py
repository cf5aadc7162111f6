"""Words in root subgroups that move tuples of smooth points to each other.

The pipeline for one tuple:

1. open-orbit: push every point into the open torus orbit with root
   subgroups that raise the orbit dimension of one point at a time;
2. separate: shift along the second basis ray until the points lie on
   pairwise distinct orbits of the first basis ray subgroup;
3. standardize: rescale the torus coordinates ray by ray, one point at a
   time, to reach theta(j, ..., j).x0 for the j-th point.

Solving P -> Q composes the word for P with the inverse word for Q.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .demazure import (
    GeneratorApplication,
    KernelElement,
    Root,
    exp_action,
    generator,
    root_for_ray,
    trace_h_orbit,
)
from .errors import CapabilityError, DomainError, InconsistencyError, InfeasibleError
from .lattice import pairing, rational_roots, solve_integer
from .toric import point_from_torus

STAGE_OPEN = "open-orbit"
STAGE_SEPARATE = "separate"
STAGE_STANDARD = "standardize"

RATIONAL_NOTE = (
    "scalars are rational; the word is verified on rational points only and "
    "transitivity is certified for the orbit of the rational points of the "
    "generated subgroup, not for points over an algebraic closure"
)


@dataclass(frozen=True)
class AutomorphismWord:
    """Letters applied left to right."""

    letters: tuple = ()

    def __len__(self):
        return len(self.letters)

    def __add__(self, other):
        return AutomorphismWord(self.letters + other.letters)

    def inverse(self):
        return AutomorphismWord(tuple(g.inverse() for g in reversed(self.letters)))

    def replay(self, X, points):
        points = list(points)
        for g in self.letters:
            points = [exp_action(X, g, p) for p in points]
        return points

    def stage_counts(self):
        out = {}
        for g in self.letters:
            out[g.stage] = out.get(g.stage, 0) + 1
        return out

    def to_json(self):
        return [g.to_json() for g in self.letters]

    @classmethod
    def from_json(cls, obj, X):
        return cls(tuple(GeneratorApplication.from_json(g, X) for g in obj))


@dataclass
class TupleState:
    """m distinct points with cached orbit data."""

    X: object
    points: tuple
    basis: tuple = field(default=None)

    def __post_init__(self):
        self.points = tuple(self.points)
        if self.basis is None:
            self.basis = self.X.ray_basis
        if len(set(self.points)) != len(self.points):
            raise DomainError("points are not pairwise distinct")

    @property
    def kappa(self):
        return self.X.kappa

    @property
    def faces(self):
        return tuple(p.face for p in self.points)

    @property
    def dims(self):
        return tuple(self.X.faces[p.face].dim for p in self.points)

    @property
    def total_dim(self):
        return sum(self.dims)

    def torus_coordinates(self, i):
        """Some t with theta(t).x0 equal to point i (open orbit only)."""
        return torus_coordinates(self.X, self.points[i], self.basis)

    def with_points(self, points):
        return TupleState(self.X, points, self.basis)


def torus_coordinates(X, p, basis, step=None):
    from .lattice import multiplicative_solve

    if p.face != X.open_face:
        raise DomainError("torus coordinates need an open-orbit point")
    rays = [X.rays[i] for i in basis]
    c = [[r[k] for r in rays] for k in range(X.n)]
    return multiplicative_solve(c, p.char, X.n, step)


def kappa_equivalent(t, t2, kappa):
    """t2/t is a kappa-th root of unity, decided inside the rationals."""
    t, t2 = Fraction(t), Fraction(t2)
    if t == 0 or t2 == 0:
        raise DomainError("torus coordinates are nonzero")
    ratio = t2 / t
    return ratio == 1 or (ratio == -1 and kappa % 2 == 0)


def _apply(X, g, points, step):
    return tuple(exp_action(X, g, p, step) for p in points)


def check_smooth(X, points, what="point"):
    for i, p in enumerate(points):
        if not X.is_smooth(p):
            raise DomainError(f"{what} {i} ({p}) is not a smooth point")


# stage 1

def raising_root(X, face):
    """Root e whose subgroup moves points of O_face into a one-dimension-larger orbit."""
    fd = X.faces[face]
    xi = fd.xi
    if not xi:
        raise DomainError("point is already in the open orbit")
    if not fd.smooth:
        raise DomainError("singular orbit cannot be left")
    first, rest = xi[0], xi[1:]
    e1 = solve_integer([list(X.rays[i]) for i in xi], [-1] + [0] * len(rest), X.n)
    if e1 is None:
        raise InconsistencyError("smooth dual face without a dual basis vector")
    w = (0,) * X.n
    for h in fd.hilb:
        w = tuple(a + b for a, b in zip(w, X.hilb[h]))
    k = 0
    for j, r in enumerate(X.rays):
        if j not in xi:
            a, b = pairing(r, e1), pairing(r, w)
            # need a + k*b > 0 with b > 0
            k = max(k, (-a) // b + 1 if a <= 0 else 0)
    e = tuple(a + k * b for a, b in zip(e1, w))
    root = Root(e, first)
    if not root.is_valid(X):
        raise InconsistencyError("raising construction produced an invalid root")
    upper = X.face_of_xi(rest)
    return root, upper


def move_to_open_orbit(state):
    X = state.X
    check_smooth(X, state.points)
    points = state.points
    letters = []
    while True:
        pending = [i for i, p in enumerate(points) if p.face != X.open_face]
        if not pending:
            break
        j = pending[0]
        root, upper = raising_root(X, points[j].face)
        bad = {Fraction(0)}
        for p in points:
            try:
                tr = trace_h_orbit(X, root, p)
            except DomainError:
                continue
            if tr.rational and p.face == tr.generic_face:
                bad.add(tr.exceptional_t)
        t = _first_integer_outside(bad)
        g = generator(X, root, t, stage=STAGE_OPEN)
        new = _apply(X, g, points, STAGE_OPEN)
        old_dims = [X.faces[p.face].dim for p in points]
        new_dims = [X.faces[p.face].dim for p in new]
        if any(a < b for a, b in zip(new_dims, old_dims)) or new_dims[j] != old_dims[j] + 1:
            raise InconsistencyError(f"{STAGE_OPEN}: parameter {t} lowered an orbit dimension")
        if new[j].face != upper:
            raise InconsistencyError(f"{STAGE_OPEN}: point {j} did not reach the expected orbit")
        letters.append(g)
        points = new
    return AutomorphismWord(tuple(letters)), state.with_points(points)


def _first_integer_outside(bad):
    t = 1
    while Fraction(t) in bad:
        t += 1
    return Fraction(t)


# orbit keys and separating invariants

def orbit_key(X, p, ray):
    """Values of p on a basis of rho^perp ∩ M: equal keys <=> same R_rho-orbit (open points)."""
    fd = X.faces[X.face_of_xi([ray])]
    return tuple(X.evaluate_unit(p, b) for b in fd.lattice.basis)


def separating_invariant(X, root, reps):
    """q in ker d_e with q = 1 on the orbit of reps[0] and q = 0 on the others."""
    facet = X.faces[X.face_of_xi([root.ray])]
    hs = [X.hilb[i] for i in facet.hilb]
    terms = [(Fraction(1), (0,) * X.n)]
    l0 = reps[0]
    for lj in reps[1:]:
        m = next((h for h in hs if X.evaluate(l0, h) != X.evaluate(lj, h)), None)
        if m is None:
            raise InfeasibleError("representatives share an R_e-orbit; no kernel character separates them")
        a, b = X.evaluate(l0, m), X.evaluate(lj, m)
        factor = [(1 / (a - b), m), (-b / (a - b), (0,) * X.n)]
        terms = [(c1 * c2, tuple(x + y for x, y in zip(m1, m2))) for c1, m1 in terms for c2, m2 in factor]
    q = KernelElement.build(terms)
    if q.evaluate(X, l0) != 1 or any(q.evaluate(X, l) != 0 for l in reps[1:]):
        raise InconsistencyError("separating invariant failed its own check")
    return q


def stab_shift(X, root, q, t, stage=""):
    return generator(X, root, t, q, stage)


def _groups(X, points, ray, indices=None):
    """Partition point indices by their R_ray-orbit, in order of first appearance."""
    groups = {}
    for i in indices if indices is not None else range(len(points)):
        groups.setdefault(orbit_key(X, points[i], ray), []).append(i)
    return list(groups.values())


# stage 2

def _ratio_solutions(X, p, p2, ray_fixed, ray_move):
    """Rational y with rho_move(y).p on the same R_fixed-orbit as p2."""
    fd = X.faces[X.face_of_xi([ray_fixed])]
    rho = X.rays[ray_move]
    cands = None
    for b in fd.lattice.basis:
        c = pairing(rho, b)
        r = X.evaluate_unit(p2, b) / X.evaluate_unit(p, b)
        if c == 0:
            if r != 1:
                return set()
            continue
        ys = set(rational_roots(r if c > 0 else 1 / r, abs(c)))
        cands = ys if cands is None else cands & ys
    return cands or set()


def make_r1_orbits_distinct(state, basis=None):
    X = state.X
    basis = basis or state.basis
    points = state.points
    if any(p.face != X.open_face for p in points):
        raise DomainError("all points must be in the open orbit")
    letters = []
    if len(points) < 2:
        return AutomorphismWord(), state.with_points(points)
    if X.n < 2:
        raise CapabilityError("orbit separation needs dimension at least 2")
    r1, r2 = basis[0], basis[1]
    root = root_for_ray(X, r2)
    e = root.e
    while True:
        clash = next(
            ((i, k) for i, k in combinations(range(len(points)), 2)
             if orbit_key(X, points[i], r1) == orbit_key(X, points[k], r1)),
            None,
        )
        if clash is None:
            break
        groups = _groups(X, points, r2)
        group = next(g for g in groups if clash[1] in g)
        others = [g for g in groups if g is not group]
        q = separating_invariant(X, root, [points[group[0]]] + [points[g[0]] for g in others])
        u = [X.evaluate_unit(p, tuple(-x for x in e)) for p in points]
        bad = {Fraction(0)}
        moving = set(group)
        for i in moving:
            bad.add(-u[i])
        for i, k in combinations(range(len(points)), 2):
            if i not in moving and k not in moving:
                continue
            if k in moving and i not in moving:
                i, k = k, i
            # i moves; y = s_i / s_k must avoid the collision set
            ys = _ratio_solutions(X, points[i], points[k], r1, r2)
            for y in ys:
                if k not in moving:
                    bad.add(u[i] * (y - 1))
                elif u[k] != y * u[i]:
                    bad.add(u[i] * u[k] * (y - 1) / (u[k] - y * u[i]))
        t = _first_integer_outside(bad)
        g = stab_shift(X, root, q, t, STAGE_SEPARATE)
        new = _apply(X, g, points, STAGE_SEPARATE)
        if any(p.face != X.open_face for p in new):
            raise InconsistencyError(f"{STAGE_SEPARATE}: a point left the open orbit")
        before = _clashes(X, points, r1)
        after = _clashes(X, new, r1)
        if not after < before:
            raise InconsistencyError(f"{STAGE_SEPARATE}: parameter {t} did not reduce orbit collisions")
        for i in range(len(points)):
            if i not in moving and new[i] != points[i]:
                raise InconsistencyError(f"{STAGE_SEPARATE}: a frozen point moved")
        letters.append(g)
        points = new
    return AutomorphismWord(tuple(letters)), state.with_points(points)


def _clashes(X, points, ray):
    keys = [orbit_key(X, p, ray) for p in points]
    return {(i, k) for i, k in combinations(range(len(keys)), 2) if keys[i] == keys[k]}


# stage 3

def standard_labels(m, kappa):
    """First m positive integers that are pairwise not kappa-equivalent."""
    labels = []
    j = 1
    while len(labels) < m:
        if not any(kappa_equivalent(j, i, kappa) for i in labels):
            labels.append(j)
        j += 1
    return labels


def standard_tuple(X, m, basis=None):
    basis = basis or X.ray_basis
    labels = standard_labels(m, X.kappa)
    pts = [point_from_torus(X, basis, [j] * X.n) for j in labels]
    if len(set(pts)) != m:
        raise InconsistencyError("standard tuple points collide")
    return pts


def normalize_to_standard(state, basis=None):
    X = state.X
    basis = basis or state.basis
    points = state.points
    m = len(points)
    if any(p.face != X.open_face for p in points):
        raise DomainError("all points must be in the open orbit")
    if _clashes(X, points, basis[0]):
        raise DomainError("points must lie on distinct orbits of the first basis ray")
    targets = standard_tuple(X, m, basis)
    rays = [X.rays[i] for i in basis]
    c = [[r[k] for r in rays] for k in range(X.n)]
    from .lattice import multiplicative_solve

    scales = []
    for p, q0 in zip(points, targets):
        psi = [a / b for a, b in zip(q0.char, p.char)]
        scales.append(multiplicative_solve(c, psi, X.n, STAGE_STANDARD))
    letters = []
    for l, ray in enumerate(basis):
        root = root_for_ray(X, ray)
        minus_e = tuple(-x for x in root.e)
        for j in range(m):
            s = scales[j][l]
            if s == 1:
                continue
            groups = _groups(X, points, ray)
            mine = next(g for g in groups if j in g)
            if len(mine) != 1:
                raise InconsistencyError(f"{STAGE_STANDARD}: orbits of ray {ray} are not distinct")
            others = [points[g[0]] for g in groups if g is not mine]
            q = separating_invariant(X, root, [points[j]] + others)
            t = (s - 1) * X.evaluate_unit(points[j], minus_e)
            g = stab_shift(X, root, q, t, STAGE_STANDARD)
            new = _apply(X, g, points, STAGE_STANDARD)
            expected = X.scale(points[j], X.rays[ray], s)
            if new[j] != expected or any(new[i] != points[i] for i in range(m) if i != j):
                raise InconsistencyError(f"{STAGE_STANDARD}: shift did not act as the expected torus scaling")
            letters.append(g)
            points = new
    if list(points) != targets:
        raise InconsistencyError(f"{STAGE_STANDARD}: did not reach the standard tuple")
    return AutomorphismWord(tuple(letters)), state.with_points(points)


def pipeline(X, points, basis=None):
    """Word sending `points` to the standard tuple, with per-stage words."""
    state = TupleState(X, points, basis)
    w1, state = move_to_open_orbit(state)
    w2, state = make_r1_orbits_distinct(state)
    w3, state = normalize_to_standard(state)
    return w1 + w2 + w3, state, {STAGE_OPEN: len(w1), STAGE_SEPARATE: len(w2), STAGE_STANDARD: len(w3)}


@dataclass(frozen=True)
class Solution:
    word: AutomorphismWord
    stages: dict
    basis: tuple
    kappa: int


def solve(X, points, targets=None, basis=None):
    """Word mapping points to targets (or to the standard tuple)."""
    points = tuple(points)
    basis = tuple(basis or X.ray_basis)
    check_smooth(X, points)
    wp, _, sp = pipeline(X, points, basis)
    stages = {"points": sp}
    word = wp
    if targets is not None:
        targets = tuple(targets)
        if len(targets) != len(points):
            raise DomainError("points and targets differ in length")
        check_smooth(X, targets, "target")
        wq, _, sq = pipeline(X, targets, basis)
        stages["targets"] = sq
        word = wp + wq.inverse()
        expect = list(targets)
    else:
        expect = standard_tuple(X, len(points), basis)
    if word.replay(X, points) != expect:
        raise InconsistencyError("replay of the solved word does not reach the targets")
    return Solution(word, stages, basis, X.kappa)
