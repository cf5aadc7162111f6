"""Demazure roots, their derivations and the unipotent subgroups they generate."""

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

from . import _kernels
from .errors import DomainError, InconsistencyError
from .lattice import pairing, solve_integer


def _add(a, b, k=1):
    return tuple(x + k * y for x, y in zip(a, b))


@dataclass(frozen=True)
class Root:
    """Character e with <rho_ray, e> = -1 and <rho_j, e> >= 0 for j != ray."""

    e: tuple
    ray: int

    def is_valid(self, X):
        pairs = [pairing(r, self.e) for r in X.rays]
        return pairs[self.ray] == -1 and all(p >= 0 for j, p in enumerate(pairs) if j != self.ray)

    def rho(self, X):
        return X.rays[self.ray]

    def to_json(self):
        return {"e": list(self.e), "ray": self.ray}

    @classmethod
    def from_json(cls, obj, X=None):
        e = tuple(int(x) for x in obj["e"])
        ray = obj.get("ray")
        if ray is None:
            if X is None:
                raise DomainError("root JSON without 'ray' needs a variety")
            ray = distinguished_ray(X, e)
        root = cls(e, int(ray))
        if X is not None and not root.is_valid(X):
            raise DomainError(f"{list(e)} is not a root for ray {ray}")
        return root


def distinguished_ray(X, e):
    neg = [j for j, r in enumerate(X.rays) if pairing(r, e) < 0]
    if len(neg) != 1 or pairing(X.rays[neg[0]], e) != -1:
        raise DomainError(f"{list(e)} is not a Demazure root")
    return neg[0]


@dataclass(frozen=True)
class KernelElement:
    """Finite sum of coefficient * chi^m with every m orthogonal to rho_e."""

    terms: tuple

    @classmethod
    def one(cls, n):
        return cls(((Fraction(1), (0,) * n),))

    @classmethod
    def build(cls, terms):
        acc = {}
        for c, m in terms:
            m = tuple(m)
            acc[m] = acc.get(m, Fraction(0)) + Fraction(c)
        return cls(tuple((c, m) for m, c in sorted(acc.items()) if c != 0))

    def is_one(self):
        return len(self.terms) == 1 and self.terms[0][0] == 1 and not any(self.terms[0][1])

    def check(self, X, root):
        rho = root.rho(X)
        return all(X.in_dual(m) and pairing(rho, m) == 0 for _, m in self.terms)

    def evaluate(self, X, p):
        return sum((c * X.evaluate(p, m) for c, m in self.terms), Fraction(0))

    def to_json(self):
        return [[_frac_str(c), list(m)] for c, m in self.terms]

    @classmethod
    def from_json(cls, obj):
        return cls.build((Fraction(c), tuple(int(x) for x in m)) for c, m in obj)


def _frac_str(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class GeneratorApplication:
    """exp(t * q * d_e) with q a kernel element."""

    root: Root
    q: KernelElement
    t: Fraction
    stage: str = ""

    def inverse(self):
        return GeneratorApplication(self.root, self.q, -self.t, self.stage)

    def apply(self, X, p):
        return exp_action(X, self, p)

    def to_json(self):
        out = {"e": list(self.root.e), "ray": self.root.ray, "q": self.q.to_json(), "t": _frac_str(self.t)}
        if self.stage:
            out["stage"] = self.stage
        return out

    @classmethod
    def from_json(cls, obj, X):
        root = Root.from_json(obj, X)
        q = KernelElement.from_json(obj["q"]) if "q" in obj else KernelElement.one(X.n)
        if not q.check(X, root):
            raise DomainError("kernel multiplier has a term outside the kernel")
        return cls(root, q, Fraction(obj.get("t", 0)), obj.get("stage", ""))


def generator(X, root, t, q=None, stage=""):
    q = KernelElement.one(X.n) if q is None else q
    return GeneratorApplication(root, q, Fraction(t), stage)


def enumerate_roots(X, bound=5):
    """All roots with sup-norm at most `bound`, ordered by distinguished ray then e."""
    if bound < 1:
        raise DomainError("bound must be at least 1")
    rows = _kernels.root_scan([list(r) for r in X.rays], bound)
    roots = [Root(tuple(int(x) for x in row[:-1]), int(row[-1])) for row in rows]
    return sorted(roots, key=lambda r: (r.ray, r.e))


def root_classes(roots):
    out = {}
    for r in roots:
        out.setdefault(r.ray, []).append(r)
    return out


def root_for_ray(X, i):
    """Smallest-k root e0 + k*v0 with distinguished ray i."""
    rho = X.rays[i]
    e0 = solve_integer([list(rho)], [-1], X.n)
    if e0 is None:
        raise InconsistencyError("primitive ray without a -1 character")
    facet = X.faces[X.face_of_xi([i])]
    v0 = (0,) * X.n
    for h in facet.hilb:
        v0 = _add(v0, X.hilb[h])
    k = 0
    for j, r in enumerate(X.rays):
        if j != i:
            a, b = pairing(r, e0), pairing(r, v0)
            if a < 0:
                k = max(k, ceil(Fraction(-a, b)))
    root = Root(_add(e0, v0, k), i)
    if not root.is_valid(X):
        raise InconsistencyError(f"constructed {root} is not a root")
    return root


def lnd_apply(X, root, m):
    """One step of d_e on chi^m: (coefficient, exponent)."""
    return pairing(root.rho(X), m), _add(m, root.e)


def lnd_power(X, root, m, k):
    coef, exp = 1, tuple(m)
    for _ in range(k):
        c, exp = lnd_apply(X, root, exp)
        coef *= c
        if coef == 0:
            return 0, exp
    return coef, exp


def velocity(X, root, p):
    """Values of d_e(chi^h) at p for all Hilbert basis elements h."""
    out = []
    for h in X.hilb:
        c, m = lnd_apply(X, root, h)
        out.append(c * X.evaluate(p, m) if c else Fraction(0))
    return tuple(out)


def _series(X, root, p):
    """Coefficient lists c_h with value(exp(s d_e).p)(h) = sum_k c_h[k] s^k."""
    rho = root.rho(X)
    polys = []
    for h in X.hilb:
        a = pairing(rho, h)
        coeffs = []
        binom = 1
        for k in range(a + 1):
            if k:
                binom = binom * (a - k + 1) // k
            coeffs.append(binom * X.evaluate(p, _add(h, root.e, k)))
        polys.append(coeffs)
    return polys


def _eval(coeffs, s):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * s + c
    return acc


def exp_action(X, g, p, step=None):
    """Image of p under exp(t q d_e); q is evaluated at p since it is invariant."""
    s = Fraction(g.t) * g.q.evaluate(X, p)
    if s == 0:
        return p
    vals = [_eval(c, s) for c in _series(X, g.root, p)]
    return X.from_values(vals, step or g.stage or None)


def re_action(X, root, t, p):
    """Action of the one-parameter torus subgroup R_e at t."""
    return X.scale(p, root.rho(X), t)


def h_connected(X, root, face1, face2):
    """Decide whether (O_face1, O_face2) is an H_e-connected pair.

    face2 must be contained in face1. Returns (verdict, witness) where the
    witness lists <rho, e> for the rays of the dual face of face2.
    """
    f1, f2 = X.faces[face1], X.faces[face2]
    if not f2.face.rays <= f1.face.rays:
        raise DomainError("faces are not incident")
    pairs = {j: pairing(X.rays[j], root.e) for j in f2.xi}
    nonpos = all(v <= 0 for v in pairs.values())
    cut = tuple(j for j in f2.xi if pairs[j] == 0)
    facet = f1.dual.dim == f2.dual.dim - 1
    ok = nonpos and facet and cut == f1.xi
    witness = {"pairings": pairs, "cut": list(cut), "dual_face_1": list(f1.xi), "dual_face_2": list(f2.xi)}
    return ok, witness


def stability_witness(X, root, face):
    """A lattice m violating H_e-stability of the orbit closure, or None."""
    fd = X.faces[face]
    mask = [j in fd.xi for j in range(len(X.rays))]
    bound = max((abs(x) for h in X.hilb for x in h), default=0) + max(abs(x) for x in root.e) + 2
    hits = _kernels.stability_violations([list(r) for r in X.rays], root.ray, list(root.e), mask, bound)
    if len(hits):
        return tuple(int(x) for x in hits[0])
    # a violation, if any, can also be taken of the form c*w - e with w interior to the face
    w = (0,) * X.n
    for h in fd.hilb:
        w = _add(w, X.hilb[h])
    top = max([pairing(r, root.e) for r in X.rays] + [0])
    for c in range(top + 1):
        m = tuple(c * a - b for a, b in zip(w, root.e))
        if _violates(X, fd, root, m):
            return m
    return None


def _violates(X, fd, root, m):
    if not X.in_dual(m) or pairing(root.rho(X), m) <= 0 or X.on_face(fd, m):
        return False
    shifted = _add(m, root.e)
    return X.in_dual(shifted) and X.on_face(fd, shifted)


def stable_under(X, root, face):
    return stability_witness(X, root, face) is None


@dataclass(frozen=True)
class OrbitTrace:
    faces: tuple
    generic_face: int
    special_face: int
    exceptional_t: object
    rational: bool
    special_point: object
    polynomials: tuple


def trace_h_orbit(X, root, p):
    """Follow exp(t d_e).p: the two torus orbits it meets and where it changes."""
    polys = _series(X, root, p)
    moving = [c for c in polys if any(x != 0 for x in c[1:])]
    if not moving:
        raise DomainError("point is fixed by H_e")
    moving = [c[: max(k for k, x in enumerate(c) if x != 0) + 1] for c in moving]
    low = min(moving, key=len)
    a = len(low) - 1
    t_star = -low[a - 1] / (a * low[a])
    rational = all(_eval(c, t_star) == 0 for c in moving)
    generic = exp_action(X, generator(X, root, (t_star if rational else 0) + 1), p)
    special = exp_action(X, generator(X, root, t_star), p) if rational else None
    faces = (generic.face,) + ((special.face,) if special is not None else ())
    return OrbitTrace(
        faces,
        generic.face,
        special.face if special is not None else None,
        t_star if rational else None,
        rational,
        special,
        tuple(tuple(c) for c in polys),
    )
