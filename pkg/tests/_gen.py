"""Seeded generators of random inputs shared by the test modules."""

from fractions import Fraction

from toricflex import polys
from toricflex.suspension import sample_points
from toricflex.toric import point_from_torus, torus_translate


def nonzero_fraction(rng, num=6, den=4):
    while True:
        x = Fraction(rng.randint(-num, num), rng.randint(1, den))
        if x:
            return x


def random_face_point(X, rng, face=None):
    """theta(t) applied to the distinguished point of a random smooth orbit."""
    if face is None:
        smooth = [fd.index for fd in X.faces if fd.smooth]
        face = X.open_face if rng.random() < 0.5 else rng.choice(smooth)
    rays = [X.rays[i] for i in X.ray_basis]
    return torus_translate(X, X.distinguished_point(face), rays, [nonzero_fraction(rng) for _ in rays])


def random_open_point(X, rng):
    return point_from_torus(X, X.ray_basis, [nonzero_fraction(rng) for _ in range(X.n)])


def random_tuple(X, m, rng):
    out = []
    while len(out) < m:
        p = random_face_point(X, rng)
        if p not in out:
            out.append(p)
    return out


def engineered_surface_points(X, m, rng):
    """Points of uv = f(x) for which the exact surface solver only meets rational roots.

    With u_i = f(a_i)/i distinct and nonzero and every v_i nonzero, the
    solver goes straight to fixing v, where it must solve f(x) = f(a_i).
    """
    f = X.f_coeffs
    while True:
        a = [Fraction(rng.randint(-9, 9), rng.randint(1, 2)) for _ in range(m)]
        us = [polys.evaluate(f, x) / (i + 1) for i, x in enumerate(a)]
        if all(us) and len(set(us)) == m:
            break
    out = []
    for u in us:
        while True:
            x = Fraction(rng.randint(-9, 9), rng.randint(1, 3))
            fx = polys.evaluate(f, x)
            if fx:
                out.append((x, u, fx / u))
                break
    return out


def smooth_sample(X, count, rng, F, special=0.3):
    """Distinct smooth points from sample_points."""
    out = []
    while len(out) < count:
        for p in sample_points(X, 1, rng, F, special):
            if X.is_smooth(p, F) and all(any(F.generic(a - b) for a, b in zip(p, q)) for q in out):
                out.append(p)
    return out
