"""Exact lattice and rational cone arithmetic.

Vectors are tuples of Python ints. Cones are stored by their primitive
extremal ray generators in a canonical sorted order; a cone with a
lineality space lists a canonical basis of that space with both signs.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from itertools import combinations
from math import gcd

import gmpy2
import numpy as np

from . import _kernels
from .errors import CapabilityError, DomainError, FieldExtensionError

HILBERT_RANK_BOUND = 4


def pairing(v, m):
    if len(v) != len(m):
        raise ValueError(f"rank mismatch: {len(v)} vs {len(m)}")
    return sum(a * b for a, b in zip(v, m))


def primitive(v):
    g = reduce(gcd, v, 0)
    if g == 0:
        raise DomainError("the zero vector has no primitive form")
    return tuple(a // g for a in v)


def is_primitive(v):
    return reduce(gcd, v, 0) == 1


def _integral(v):
    """Smallest positive rescaling of a rational vector to a primitive integer vector."""
    den = reduce(lambda a, b: a * b // gcd(a, b), (Fraction(x).denominator for x in v), 1)
    return primitive(tuple(int(Fraction(x) * den) for x in v))


# rational and integer linear algebra

def rref(rows, ncols):
    """Reduced row echelon form over Q. Returns (rows, pivot columns)."""
    a = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def rank(rows, ncols=None):
    rows = list(rows)
    if not rows:
        return 0
    return len(rref(rows, ncols if ncols is not None else len(rows[0]))[1])


def nullspace(rows, ncols):
    """Canonical primitive integer basis of {x : rows @ x = 0} (from the RREF)."""
    red, piv = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r, p in zip(red, piv):
            x[p] = -r[f]
        basis.append(_integral(x))
    return basis


def mat_mul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def det(a):
    """Exact determinant of a square integer matrix (Bareiss)."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(r) for r in a]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            p = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if p is None:
                return 0
            m[k], m[p] = m[p], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def adjugate(a):
    """Integer adjugate, so that adjugate(a) @ a = det(a) * I."""
    n = len(a)
    d = det(a)
    if d == 0:
        raise DomainError("singular matrix has no usable adjugate here")
    inv = rational_inverse(a)
    return [[int(inv[i][j] * d) for j in range(n)] for i in range(n)]


def rational_inverse(a):
    n = len(a)
    aug = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a)]
    red, piv = rref(aug, 2 * n)
    if piv[:n] != list(range(n)) or len(red) < n:
        raise DomainError("matrix is singular")
    return [r[n:] for r in red]


@dataclass(frozen=True)
class SmithForm:
    """U @ A @ V = D with U, V unimodular; Vinv is the inverse of V."""

    diagonal: tuple
    U: tuple
    V: tuple
    Vinv: tuple

    @property
    def rank(self):
        return len(self.diagonal)


def smith_normal_form(a, ncols=None):
    m = len(a)
    n = len(a[0]) if m else (ncols or 0)
    d = [list(r) for r in a]
    u, v, vi = identity(m), identity(n), identity(n)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for mat in (d, v):
            for r in mat:
                r[i], r[j] = r[j], r[i]
        vi[i], vi[j] = vi[j], vi[i]

    def add_row(dst, src, q):
        d[dst] = [x + q * y for x, y in zip(d[dst], d[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, q):
        for mat in (d, v):
            for r in mat:
                r[dst] += q * r[src]
        vi[src] = [x - q * y for x, y in zip(vi[src], vi[dst])]

    diag = []
    for t in range(min(m, n)):
        entries = [(abs(d[i][j]), i, j) for i in range(t, m) for j in range(t, n) if d[i][j]]
        if not entries:
            break
        _, i, j = min(entries)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            dirty = False
            for i in range(t + 1, m):
                if d[i][t]:
                    add_row(i, t, -(d[i][t] // d[t][t]))
                    dirty = dirty or d[i][t] != 0
            for j in range(t + 1, n):
                if d[t][j]:
                    add_col(j, t, -(d[t][j] // d[t][t]))
                    dirty = dirty or d[t][j] != 0
            if dirty:
                cand = [(abs(d[i][t]), i, t) for i in range(t, m) if d[i][t]]
                cand += [(abs(d[t][j]), t, j) for j in range(t, n) if d[t][j]]
                _, i, j = min(cand)
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if d[i][j] % d[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
        diag.append(d[t][t])
    freeze = lambda mat: tuple(tuple(r) for r in mat)
    return SmithForm(tuple(diag), freeze(u), freeze(v), freeze(vi))


def elementary_divisors(a, ncols=None):
    return smith_normal_form(a, ncols).diagonal


def lattice_index(vectors, n):
    """Index of the span of `vectors` (n of them, independent) in Z^n."""
    if rank(vectors, n) != n or len(vectors) != n:
        raise DomainError("need n independent vectors")
    return abs(det(vectors))


@dataclass(frozen=True)
class Sublattice:
    """Saturated sublattice spanned by some vectors, with a coordinate map.

    basis rows span the saturation; coords(x) gives integer coordinates of
    x in that basis (x must lie in the span).
    """

    n: int
    basis: tuple
    coord_map: tuple
    divisors: tuple

    @property
    def dim(self):
        return len(self.basis)

    def coords(self, x):
        c = tuple(sum(a * b for a, b in zip(x, col)) for col in self.coord_map)
        return c

    def contains(self, x):
        c = self.coords(x)
        return tuple(sum(ci * b[k] for ci, b in zip(c, self.basis)) for k in range(self.n)) == tuple(x)

    def vector(self, c):
        return tuple(sum(ci * b[k] for ci, b in zip(c, self.basis)) for k in range(self.n))


def saturated_sublattice(vectors, n):
    vectors = [tuple(v) for v in vectors]
    if not vectors:
        return Sublattice(n, (), (), ())
    snf = smith_normal_form(vectors, n)
    r = snf.rank
    basis = snf.Vinv[:r]
    coord_map = tuple(tuple(snf.V[k][j] for k in range(n)) for j in range(r))
    return Sublattice(n, tuple(basis), coord_map, snf.diagonal)


def solve_integer(a, b, ncols):
    """An integer solution x of a @ x = b, or None."""
    snf = smith_normal_form(a, ncols)
    ub = [sum(x * y for x, y in zip(row, b)) for row in snf.U]
    y = [0] * ncols
    for i, di in enumerate(snf.diagonal):
        if ub[i] % di:
            return None
        y[i] = ub[i] // di
    if any(ub[i] for i in range(snf.rank, len(ub))):
        return None
    return tuple(sum(snf.V[k][j] * y[j] for j in range(ncols)) for k in range(ncols))


def rational_roots(value, d):
    """All rational x with x**d == value (d >= 1)."""
    value = Fraction(value)
    if d == 1:
        return [value]
    if value == 0:
        return [Fraction(0)]
    num, den = abs(value.numerator), value.denominator
    rn, en = gmpy2.iroot(num, d)
    rd, ed = gmpy2.iroot(den, d)
    if not (en and ed):
        return []
    root = Fraction(int(rn), int(rd))
    if value < 0:
        return [-root] if d % 2 else []
    return [root, -root] if d % 2 == 0 else [root]


class MultiplicativeSystem:
    """Solver for prod_j x_j**c[s][j] == values[s] over the nonzero rationals.

    The Smith form of c is computed once; solve() raises FieldExtensionError
    when a needed root is irrational and DomainError when the system is
    inconsistent.
    """

    def __init__(self, c, nvars):
        self.c = tuple(tuple(r) for r in c)
        self.nvars = nvars
        self.snf = smith_normal_form(self.c, nvars)

    def solve(self, values, step=None):
        values = [Fraction(v) for v in values]
        if any(v == 0 for v in values):
            raise DomainError("multiplicative system with a zero value")
        snf = self.snf
        w = [_monomial(row, values) for row in snf.U]
        z = [Fraction(1)] * self.nvars
        for i, di in enumerate(snf.diagonal):
            roots = rational_roots(w[i], di)
            if not roots:
                raise FieldExtensionError(f"{w[i]} has no rational root of order {di}", step)
            z[i] = roots[0]
        if any(w[i] != 1 for i in range(snf.rank, len(w))):
            raise DomainError("inconsistent multiplicative system")
        x = [_monomial(row, z) for row in snf.V]
        if any(_monomial(row, x) != v for row, v in zip(self.c, values)):
            raise DomainError("inconsistent multiplicative system")
        return x


def _monomial(exps, vals):
    out = Fraction(1)
    for e, x in zip(exps, vals):
        if e:
            out *= x ** e
    return out


def multiplicative_solve(c, values, nvars, step=None):
    return MultiplicativeSystem(c, nvars).solve(values, step)


# cones

def _dual_generators(gens, n):
    """Canonical generators of the dual of cone(gens): pointed rays then +-lineality."""
    rows = sorted({tuple(g) for g in gens if any(g)})
    lin = nullspace(rows, n) if rows else [tuple(int(i == j) for j in range(n)) for i in range(n)]
    d = rank(rows, n) if rows else 0
    rays = set()
    if d >= 1:
        for sub in combinations(range(len(rows)), d - 1):
            system = [rows[i] for i in sub] + list(lin)
            ker = nullspace(system, n)
            if len(ker) != 1:
                continue
            v = ker[0]
            vals = [pairing(r, v) for r in rows]
            if all(x >= 0 for x in vals):
                rays.add(v)
            elif all(x <= 0 for x in vals):
                rays.add(tuple(-x for x in v))
    out = sorted(rays)
    lineality = []
    for v in lin:
        lineality += [v, tuple(-x for x in v)]
    return out, lineality


class Cone:
    """Rational polyhedral cone in Z^n given by generators."""

    def __init__(self, generators, n=None):
        generators = [tuple(int(x) for x in g) for g in generators]
        if n is None:
            if not generators:
                raise ValueError("rank needed for a cone without generators")
            n = len(generators[0])
        if any(len(g) != n for g in generators):
            raise ValueError("generator of wrong rank")
        self.n = n
        dual_rays, dual_lin = _dual_generators(generators, n)
        pointed, lin = _dual_generators(dual_rays + dual_lin, n)
        self.rays = tuple(pointed) + tuple(lin)
        self.lineality = tuple(lin)
        self._dual_gens = (dual_rays, dual_lin)

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or "rays" not in obj:
            raise DomainError("cone JSON needs a 'rays' list")
        rays = obj["rays"]
        n = obj.get("rank", len(rays[0]) if rays else None)
        return cls(rays, n)

    def to_json(self):
        return {"rank": self.n, "rays": [list(r) for r in self.rays]}

    def __eq__(self, other):
        return isinstance(other, Cone) and (self.n, self.rays) == (other.n, other.rays)

    def __hash__(self):
        return hash((self.n, self.rays))

    def __repr__(self):
        return f"Cone({[list(r) for r in self.rays]}, n={self.n})"

    @property
    def is_pointed(self):
        return not self.lineality

    @cached_property
    def dim(self):
        return rank(self.rays, self.n) if self.rays else 0

    @property
    def is_full_dimensional(self):
        return self.dim == self.n

    def contains(self, m):
        return all(pairing(w, m) >= 0 for w in self.dual.rays)

    def in_relative_interior(self, m):
        return self.contains(m) and all(
            pairing(w, m) > 0 for w in self.dual.rays if any(pairing(w, r) for r in self.rays)
        )

    @cached_property
    def dual(self):
        rays, lin = self._dual_gens
        d = Cone.__new__(Cone)
        d.n = self.n
        d.rays = tuple(rays) + tuple(lin)
        d.lineality = tuple(lin)
        d._dual_gens = ([r for r in self.rays if r not in self.lineality], list(self.lineality))
        d.__dict__["dual"] = self
        return d

    @cached_property
    def faces(self):
        """All faces, sorted by dimension then ray indices."""
        everything = frozenset(range(len(self.rays)))
        tight = []
        for w in self.dual.rays:
            tight.append(frozenset(i for i, r in enumerate(self.rays) if pairing(w, r) == 0))
        found = {everything}
        for t in tight:
            found |= {t & f for f in found}
        out = [Face(self, f) for f in found]
        out.sort(key=lambda f: (f.dim, sorted(f.rays)))
        return tuple(out)

    @cached_property
    def facets(self):
        return tuple(f for f in self.faces if f.dim == self.dim - 1)

    def face(self, rays):
        rays = frozenset(rays)
        for f in self.faces:
            if f.rays == rays:
                return f
        raise DomainError(f"{sorted(rays)} is not a face of {self!r}")

    def hilbert_basis(self, rank_bound=HILBERT_RANK_BOUND):
        return hilbert_basis(self, rank_bound)


class Face:
    """Face of a cone, recorded by the indices of the rays it contains."""

    def __init__(self, cone, rays):
        self.cone = cone
        self.rays = frozenset(rays)

    @cached_property
    def vectors(self):
        return tuple(self.cone.rays[i] for i in sorted(self.rays))

    @cached_property
    def dim(self):
        return rank(self.vectors, self.cone.n) if self.rays else 0

    @property
    def indices(self):
        return tuple(sorted(self.rays))

    def __eq__(self, other):
        return isinstance(other, Face) and self.cone == other.cone and self.rays == other.rays

    def __hash__(self):
        return hash((self.cone, self.rays))

    def __le__(self, other):
        return self.cone == other.cone and self.rays <= other.rays

    def __lt__(self, other):
        return self.cone == other.cone and self.rays < other.rays

    def __repr__(self):
        return f"Face({self.indices}, dim={self.dim})"

    def contains(self, m):
        return self.cone.contains(m) and all(pairing(r, m) == 0 for r in self.orthogonal_rays())

    def orthogonal_rays(self):
        """Rays of the dual cone vanishing on this face."""
        return dual_face(self).vectors


def dual_cone(c):
    return c.dual


def faces(c):
    return list(c.faces)


def dual_face(f):
    d = f.cone.dual
    idx = frozenset(j for j, w in enumerate(d.rays) if all(pairing(w, r) == 0 for r in f.vectors))
    return d.face(idx)


def smooth_face_test(f):
    """True iff the ray generators of f extend to a basis of the lattice."""
    vecs = f.vectors
    if not vecs:
        return True
    if rank(vecs, f.cone.n) != len(vecs):
        return False
    return all(x == 1 for x in elementary_divisors(vecs, f.cone.n))


def _triangulate(cone, face):
    """Pulling triangulation of a face into simplicial ray subsets."""
    if len(face.rays) == face.dim:
        return [face.indices]
    apex = min(face.rays)
    out = []
    for g in cone.faces:
        if g.dim == face.dim - 1 and g.rays < face.rays and apex not in g.rays:
            out += [tuple(sorted(s + (apex,))) for s in _triangulate(cone, g)]
    return out


def hilbert_basis(c, rank_bound=HILBERT_RANK_BOUND):
    """Minimal generating set of the semigroup c ∩ Z^n, sorted lexicographically."""
    if c.n > rank_bound:
        raise CapabilityError(f"Hilbert bases are limited to rank <= {rank_bound}")
    if not c.is_pointed:
        raise DomainError("Hilbert basis needs a pointed cone")
    if not c.rays:
        return []
    sub = saturated_sublattice(c.rays, c.n)
    d = sub.dim
    local = Cone([sub.coords(r) for r in c.rays], d)
    cands = {tuple(r) for r in local.rays}
    top = local.faces[-1]
    for simplex in _triangulate(local, top):
        cols = [local.rays[i] for i in simplex]
        mat = [[cols[j][i] for j in range(d)] for i in range(d)]
        dt = det(mat)
        adj = adjugate(mat)
        if dt < 0:
            dt, adj = -dt, [[-x for x in r] for r in adj]
        lo = [sum(min(0, v[k]) for v in cols) for k in range(d)]
        hi = [sum(max(0, v[k]) for v in cols) for k in range(d)]
        for p in _kernels.parallelepiped_points(adj, dt, lo, hi):
            if any(p):
                cands.add(tuple(int(x) for x in p))
    cands = sorted(cands)
    arr = np.array(cands, dtype=np.int64).reshape(len(cands), d)
    mask = _kernels.reducible_mask(arr, np.array(local.dual.rays, dtype=np.int64).reshape(-1, d))
    keep = [x for x, red in zip(cands, mask) if not red]
    return sorted(sub.vector(x) for x in keep)
