"""Affine toric varieties, their points and torus orbits.

A point is stored as its support face tau of the dual cone together with
the values of its character on a basis of the lattice spanned by tau.
Every other view (values on the Hilbert basis, on arbitrary characters)
is derived from that.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .errors import DomainError, InconsistencyError
from .lattice import (
    Cone,
    MultiplicativeSystem,
    Sublattice,
    dual_face,
    hilbert_basis,
    identity,
    nullspace,
    pairing,
    rank,
    saturated_sublattice,
    smooth_face_test,
    det,
)
from itertools import combinations


@dataclass(frozen=True)
class FaceData:
    """Per-face catalog entry: tau (face of the dual cone) and its dual face in sigma."""

    index: int
    face: object
    dual: object
    hilb: tuple
    lattice: Sublattice
    xi: tuple
    smooth: bool
    solver: MultiplicativeSystem = field(repr=False, compare=False)

    @property
    def dim(self):
        return self.face.dim


@dataclass(frozen=True)
class Point:
    face: int
    char: tuple

    def __post_init__(self):
        object.__setattr__(self, "char", tuple(Fraction(x) for x in self.char))


class ToricVariety:
    """X = Spec k[sigma^vee ∩ M] for a pointed full-dimensional cone sigma."""

    def __init__(self, sigma, name=None):
        if not isinstance(sigma, Cone):
            sigma = Cone(sigma)
        if not sigma.is_pointed or not sigma.is_full_dimensional:
            raise DomainError("sigma must be pointed and full-dimensional")
        self.sigma = sigma
        self.name = name
        self.n = sigma.n
        self.rays = sigma.rays
        self.dual = sigma.dual
        self.hilb = tuple(hilbert_basis(self.dual))
        faces = []
        for idx, f in enumerate(self.dual.faces):
            hidx = tuple(i for i, h in enumerate(self.hilb) if f.contains(h))
            if f.dim == self.n:
                lat = Sublattice(self.n, tuple(map(tuple, identity(self.n))), tuple(map(tuple, identity(self.n))), (1,) * self.n)
            else:
                lat = saturated_sublattice(f.vectors, self.n)
            d = dual_face(f)
            xi = d.indices
            coords = [lat.coords(self.hilb[i]) for i in hidx]
            faces.append(
                FaceData(idx, f, d, hidx, lat, xi, smooth_face_test(d), MultiplicativeSystem(coords, lat.dim))
            )
        self.faces = tuple(faces)
        self._by_support = {frozenset(fd.hilb): fd.index for fd in self.faces}
        self.open_face = next(fd.index for fd in self.faces if fd.dim == self.n)
        self.vertex_face = next(fd.index for fd in self.faces if fd.dim == 0)

    @classmethod
    def from_json(cls, obj):
        return cls(Cone.from_json(obj), obj.get("name") if isinstance(obj, dict) else None)

    def to_json(self):
        out = self.sigma.to_json()
        if self.name:
            out["name"] = self.name
        return out

    def __repr__(self):
        return f"ToricVariety({self.name or [list(r) for r in self.rays]})"

    @property
    def base_point(self):
        return Point(self.open_face, (1,) * self.n)

    def face_of_rays(self, dual_ray_indices):
        """Face index from the indices of the dual cone rays spanning it."""
        target = frozenset(dual_ray_indices)
        for fd in self.faces:
            if fd.face.rays == target:
                return fd.index
        raise DomainError(f"{sorted(target)} do not span a face of the dual cone")

    def face_of_xi(self, ray_indices):
        """Face index tau whose dual face in sigma has exactly these rays."""
        target = tuple(sorted(ray_indices))
        for fd in self.faces:
            if fd.xi == target:
                return fd.index
        raise DomainError(f"rays {list(target)} do not span a face of sigma")

    @cached_property
    def ray_basis(self):
        """First lexicographic n-subset of the rays with nonzero determinant."""
        for sub in combinations(range(len(self.rays)), self.n):
            if det([self.rays[i] for i in sub]) != 0:
                return sub
        raise InconsistencyError("a full-dimensional cone has n independent rays")

    @cached_property
    def kappa(self):
        return abs(det([self.rays[i] for i in self.ray_basis]))

    # characters

    def in_dual(self, m):
        return all(pairing(r, m) >= 0 for r in self.rays)

    def on_face(self, fd, m):
        return all(pairing(self.rays[i], m) == 0 for i in fd.xi)

    def evaluate(self, p, m):
        if not self.in_dual(m):
            raise DomainError(f"{tuple(m)} is not in the dual cone")
        fd = self.faces[p.face]
        if not self.on_face(fd, m):
            return Fraction(0)
        out = Fraction(1)
        for c, x in zip(fd.lattice.coords(m), p.char):
            if c:
                out *= x ** c
        return out

    def evaluate_unit(self, p, m):
        """chi^m(p) for any m in the lattice of the support face (a Laurent character)."""
        fd = self.faces[p.face]
        if not fd.lattice.contains(m):
            raise DomainError(f"{tuple(m)} is not in the lattice of the support face")
        out = Fraction(1)
        for c, x in zip(fd.lattice.coords(m), p.char):
            if c:
                out *= x ** c
        return out

    def hilbert_values(self, p):
        fd = self.faces[p.face]
        vals = [Fraction(0)] * len(self.hilb)
        for i in fd.hilb:
            vals[i] = self.evaluate(p, self.hilb[i])
        return tuple(vals)

    def point(self, face, char):
        fd = self.faces[face]
        if len(char) != fd.lattice.dim or any(Fraction(x) == 0 for x in char):
            raise DomainError("character needs one nonzero value per basis vector of the face lattice")
        return Point(face, char)

    def from_values(self, values, step=None):
        """Rebuild a point from its Hilbert-basis values."""
        values = [Fraction(v) for v in values]
        support = frozenset(i for i, v in enumerate(values) if v != 0)
        face = self._by_support.get(support)
        if face is None:
            raise InconsistencyError(f"support {sorted(support)} is not a face")
        fd = self.faces[face]
        char = fd.solver.solve([values[i] for i in fd.hilb], step)
        return Point(face, tuple(char))

    def scale(self, p, v, s):
        """Act by the one-parameter subgroup of v in N at s: chi^m -> s^<v,m> chi^m."""
        s = Fraction(s)
        if s == 0:
            raise DomainError("torus parameter must be nonzero")
        fd = self.faces[p.face]
        return Point(p.face, tuple(x * s ** pairing(v, b) for x, b in zip(p.char, fd.lattice.basis)))

    def is_smooth(self, p):
        return self.faces[p.face].smooth

    def distinguished_point(self, face):
        return Point(face, (1,) * self.faces[face].lattice.dim)


def build_variety(sigma, name=None):
    return ToricVariety(sigma, name)


def point_from_torus(X, basis, t):
    """theta(t).x_0 for rays `basis` (indices into X.rays or vectors)."""
    rays = [X.rays[b] if isinstance(b, int) else tuple(b) for b in basis]
    if len(rays) != X.n or rank(rays, X.n) != X.n:
        raise DomainError("need n linearly independent rays")
    t = [Fraction(x) for x in t]
    if len(t) != X.n or any(x == 0 for x in t):
        raise DomainError("need n nonzero torus coordinates")
    return torus_translate(X, X.base_point, rays, t)


def torus_translate(X, p, rays, t):
    for r, s in zip(rays, t):
        p = X.scale(p, r, s)
    return p


def evaluate_character(X, p, m):
    return X.evaluate(p, m)


def orbit_of(X, p):
    return X.faces[p.face].face


def orbit_dim(face):
    return face.dim


def stabilizer_subtorus(X, face_index):
    """Cocharacter lattice of the stabilizer: the saturated span of the dual face rays."""
    fd = X.faces[face_index]
    return saturated_sublattice([X.rays[i] for i in fd.xi], X.n)


@dataclass(frozen=True)
class FlexibilityCertificate:
    point: Point
    roots: tuple
    matrix: tuple
    rank: int

    def check(self, X):
        from .demazure import velocity

        mat = tuple(tuple(velocity(X, r, self.point)) for r in self.roots)
        return (
            mat == self.matrix
            and all(r.is_valid(X) for r in self.roots)
            and rank(mat, len(X.hilb)) == X.n == self.rank
        )


def flexibility_certificate(X, p=None):
    """n roots whose velocity vectors at an open-orbit point span the tangent space."""
    from .demazure import root_for_ray, velocity

    p = X.base_point if p is None else p
    if p.face != X.open_face:
        raise DomainError("flexibility certificate needs an open-orbit point")
    roots = tuple(root_for_ray(X, i) for i in X.ray_basis)
    mat = tuple(tuple(velocity(X, r, p)) for r in roots)
    rk = rank(mat, len(X.hilb))
    if rk != X.n:
        raise InconsistencyError(f"velocity matrix has rank {rk} < {X.n}")
    return FlexibilityCertificate(p, roots, mat, rk)


@dataclass(frozen=True)
class MLCertificate:
    """Kernels rho_i^perp ∩ sigma^vee of the root derivations meet only in 0."""

    facets: tuple
    kernel_ranks: tuple
    intersection: tuple
    common_face: int

    def check(self, X):
        fresh = ml_trivial_certificate(X)
        return fresh == self and not self.intersection and X.faces[self.common_face].dim == 0


def ml_trivial_certificate(X):
    facets = []
    ranks = []
    common = frozenset(range(len(X.dual.rays)))
    for i in range(len(X.rays)):
        fi = X.face_of_xi([i])
        facets.append(fi)
        fd = X.faces[fi]
        ranks.append(fd.lattice.dim)
        common &= fd.face.rays
    inter = tuple(nullspace([list(r) for r in X.rays], X.n))
    return MLCertificate(tuple(facets), tuple(ranks), inter, X.face_of_rays(common))
