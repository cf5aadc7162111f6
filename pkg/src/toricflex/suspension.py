"""Suspensions u v = f over affine space, and towers of them.

A variety of level l over A^k has ambient coordinates
(x0, ..., x_{k-1}, u1, v1, ..., ul, vl) and relations u_i v_i = f_i, where
f_i only involves the coordinates of level i-1. Level 0 is A^k itself.

Automorphisms are exponentials of derivations of two kinds:

* ``Shear``: p * d/dx_j on A^k, with p free of x_j;
* ``Lift``: a derivation of the base lifted along one side. For side "v"
  and multiplier q (q(0) = 0) it sends base coordinates g to q(v) d(g),
  v to 0 and u to (q(v)/v) d(f); side "u" swaps the roles of u and v.

Flows are computed from the base trajectory, so the divided difference
(f(x + s) - f(x)) / u is always taken as a polynomial and never as a
division by a coordinate.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product

import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from . import polys
from .errors import (
    CapabilityError,
    DomainError,
    FieldExtensionError,
    InconsistencyError,
    InfeasibleError,
    ToricflexError,
)
from .lattice import rank as exact_rank

SIDES = ("u", "v")

# step tags
NONZERO_V = "nonzero-v"
SEPARATE_U = "separate-u"
FIX_V = "fix-v"
FIX_X = "fix-x"
SURFACE_STEPS = (NONZERO_V, SEPARATE_U, FIX_V, FIX_X)
AFFINE = "affine"
HYPERBOLIZE = "hyperbolize"
UNIT_LEVEL = "unit-level"
STANDARDIZE = "standardize"


class ResidualError(ToricflexError):
    """Numeric replay missed the targets by more than the tolerance."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


# scalar fields


@dataclass(frozen=True)
class Field:
    """Exact rationals, or complex doubles with a tolerance."""

    exact: bool = True
    tol: float = 1e-9
    gap: float = 1e-3

    def convert(self, x):
        if self.exact:
            if isinstance(x, complex):
                raise DomainError("complex value in exact mode")
            return Fraction(x)
        return complex(x)

    def is_zero(self, x):
        return x == 0 if self.exact else abs(x) <= self.tol

    def equal(self, a, b):
        return self.is_zero(a - b)

    def close(self, a, b):
        """Equality up to a tolerance relative to the magnitudes involved."""
        if self.exact:
            return a == b
        return abs(a - b) <= self.tol * max(1.0, abs(a), abs(b))

    def generic(self, x):
        """Safely nonzero: exactly nonzero, or bounded away from 0 numerically."""
        return x != 0 if self.exact else abs(x) > self.gap


EXACT = Field()


def field_for(mode, tol=1e-9):
    if mode == "exact":
        return EXACT
    if mode == "numeric":
        return Field(False, tol)
    raise DomainError(f"unknown mode {mode!r}")


def _distinct(values, F):
    out = []
    for v in values:
        if not any(F.equal(v, w) for w in out):
            out.append(v)
    return out


# compiled polynomials: ((coef, ((var, exp), ...)), ...)


def _coef(c):
    if c.is_Rational:
        return Fraction(int(c.p), int(c.q))
    return complex(c)


def _compile(expr, gens):
    if expr == 0:
        return ()
    poly = sympy.Poly(expr, *gens)
    out = []
    for mon, c in poly.terms():
        out.append((_coef(c), tuple((i, e) for i, e in enumerate(mon) if e)))
    return tuple(out)


def _eval(terms, vals):
    acc = 0
    for c, mon in terms:
        term = c
        for i, e in mon:
            term = term * vals[i] ** e
        acc = acc + term
    return acc


def _eval_series(terms, trajs):
    """Compose compiled terms with univariate polynomials (one per variable)."""
    acc = []
    cache = {}
    for c, mon in terms:
        term = [c]
        for i, e in mon:
            key = (i, e)
            if key not in cache:
                cache[key] = polys.power(trajs[i], e)
            term = polys.mul(term, cache[key])
        acc = polys.add(acc, term)
    return acc


_TRANSFORMS = standard_transformations + (convert_xor,)


class SuspensionVariety:
    """Level-l tower of suspensions over A^k (level 0 is A^k)."""

    def __init__(self, k, fs=(), name=None):
        if k < 1:
            raise DomainError("base affine space needs k >= 1")
        self.k = k
        self.name = name
        self.level = len(fs)
        self.xs = sympy.symbols(f"x0:{k}")
        self.us = tuple(sympy.Symbol(f"u{i}") for i in range(1, self.level + 1))
        self.vs = tuple(sympy.Symbol(f"v{i}") for i in range(1, self.level + 1))
        gens = list(self.xs)
        for u, v in zip(self.us, self.vs):
            gens += [u, v]
        self.gens = tuple(gens)
        self.texts = tuple(str(f) for f in fs)
        self.fs = tuple(self._parse(f, i) for i, f in enumerate(fs))
        for i, f in enumerate(self.fs):
            red = self.reduce(f, i)
            if not red.free_symbols:
                raise DomainError(f"f{i + 1} = {f} is constant modulo the earlier relations")
        self.relations = tuple(u * v - f for u, v, f in zip(self.us, self.vs, self.fs))

    def _parse(self, f, i):
        allowed = self.gens[: self.k + 2 * i]
        names = {str(g): g for g in allowed}
        if self.k == 1:
            names.setdefault("x", self.xs[0])
        if isinstance(f, str):
            try:
                expr = parse_expr(f, local_dict=names, transformations=_TRANSFORMS)
            except (SyntaxError, TypeError, sympy.SympifyError) as exc:
                raise DomainError(f"cannot parse f{i + 1} = {f!r}: {exc}") from None
        else:
            expr = sympy.sympify(f)
        expr = sympy.expand(expr)
        extra = expr.free_symbols - set(allowed)
        if extra:
            raise DomainError(f"f{i + 1} uses {sorted(map(str, extra))}, not coordinates of the base")
        if not expr.is_polynomial(*allowed):
            raise DomainError(f"f{i + 1} is not a polynomial")
        return expr

    def reduce(self, expr, upto=None):
        """Normal form modulo u_j v_j = f_j for j < upto: no monomial contains u_j v_j."""
        upto = self.level if upto is None else upto
        expr = sympy.expand(expr)
        for j in reversed(range(upto)):
            u, v, f = self.us[j], self.vs[j], self.fs[j]
            if not expr.has(u) or not expr.has(v):
                continue
            out = 0
            for (a, b), c in sympy.Poly(expr, u, v).terms():
                m = min(a, b)
                out += c * u ** (a - m) * v ** (b - m) * f**m
            expr = sympy.expand(out)
        return expr

    # structure

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or obj.get("base", "affine") != "affine":
            raise DomainError("suspension JSON needs base 'affine'")
        try:
            return cls(int(obj["k"]), list(obj.get("fs", [])), obj.get("name"))
        except KeyError as exc:
            raise DomainError(f"suspension JSON is missing {exc}") from None

    def to_json(self):
        out = {"base": "affine", "k": self.k, "fs": [str(f).replace("**", "^") for f in self.fs]}
        if self.name:
            out["name"] = self.name
        return out

    def __repr__(self):
        return f"SuspensionVariety(k={self.k}, fs={[str(f) for f in self.fs]})"

    @property
    def dim(self):
        return self.k + self.level

    @property
    def ambient_dim(self):
        return len(self.gens)

    @property
    def is_surface(self):
        return self.k == 1 and self.level == 1

    @cached_property
    def base(self):
        if self.level == 0:
            raise DomainError("affine space has no base")
        return SuspensionVariety(self.k, self.fs[:-1])

    @cached_property
    def f_terms(self):
        """Top relation's f compiled over the base coordinates."""
        return _compile(self.fs[-1], self.gens[:-2])

    @cached_property
    def f_coeffs(self):
        """Coefficients of f for a surface uv = f(x)."""
        if not self.is_surface:
            raise DomainError("univariate f only exists for surfaces")
        return [_coef(c) for c in reversed(sympy.Poly(self.fs[0], self.xs[0]).all_coeffs())]

    @cached_property
    def _f_all(self):
        return tuple(_compile(f, self.gens) for f in self.fs)

    @cached_property
    def _grads(self):
        return tuple(tuple(_compile(sympy.diff(f, g), self.gens) for g in self.gens) for f in self.fs)

    def f_value(self, p, i=None):
        i = self.level - 1 if i is None else i
        return _eval(self._f_all[i], p)

    def f_series(self, trajs):
        """f (top level) along base trajectories, as a polynomial in time."""
        return _eval_series(self.f_terms, trajs)

    # points

    def check_point(self, p, F=EXACT):
        p = tuple(F.convert(x) for x in p)
        if len(p) != self.ambient_dim:
            raise DomainError(f"point needs {self.ambient_dim} coordinates, got {len(p)}")
        for i in range(self.level):
            uv, f = p[self.k + 2 * i] * p[self.k + 2 * i + 1], self.f_value(p, i)
            if not F.close(uv, f):
                raise DomainError(f"point violates u{i + 1} v{i + 1} = f{i + 1} (residual {uv - f})")
        return p

    def contains(self, p, F=EXACT):
        try:
            self.check_point(p, F)
        except DomainError:
            return False
        return True

    def project(self, p):
        return tuple(p[:-2])

    def uv(self, p):
        return p[-2], p[-1]

    def jacobian(self, p):
        """Rows (df_i/dg, ..., -v_i, -u_i) for every relation, over all ambient coordinates."""
        rows = []
        for i in range(self.level):
            row = [_eval(t, p) for t in self._grads[i]]
            iu = self.k + 2 * i
            row[iu] = -p[iu + 1]
            row[iu + 1] = -p[iu]
            rows.append(row)
        return rows

    def is_smooth(self, p, F=EXACT):
        if self.level == 0:
            return True
        jac = self.jacobian(p)
        if F.exact:
            return exact_rank(jac, self.ambient_dim) == self.level
        return int(np.linalg.matrix_rank(np.array(jac, dtype=complex), tol=F.tol)) == self.level

    def is_hyperbolic(self, p, F=EXACT):
        return self.level > 0 and not F.is_zero(p[-2]) and not F.is_zero(p[-1])

    def from_params(self, xs, us):
        """Point with given x and nonzero u's; each v_i = f_i / u_i."""
        p = list(xs)
        for i, u in enumerate(us):
            if u == 0:
                raise DomainError("parametrized points need nonzero u")
            fi = _eval(self._f_all[i], p + [0] * (self.ambient_dim - len(p)))
            p += [u, fi / u]
        return tuple(p)

    @cached_property
    def _param_expr(self):
        """f_top as a rational function of the base parameters (x's and base u's)."""
        B = self.base
        sub = {}
        for i in range(B.level):
            sub[B.vs[i]] = B.fs[i].subs(sub) / B.us[i]
        params = B.xs + B.us
        return sympy.together(self.fs[-1].subs(sub)), params


def smoothness_check(X, p, F=EXACT):
    """Jacobian rank equals the number of relations at p."""
    return X.is_smooth(X.check_point(p, F), F)


def build_suspension(base, f):
    """Suspension over A^k (base an int) or over an existing tower."""
    if isinstance(base, int):
        return SuspensionVariety(base, [f])
    return SuspensionVariety(base.k, list(base.texts) + [f if isinstance(f, str) else str(f)])


def affine_space(k):
    return SuspensionVariety(k, ())


# derivations


def _frac_json(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _scalar(obj, F=None):
    if isinstance(obj, (list, tuple)):
        if len(obj) != 2:
            raise DomainError("complex scalars are [re, im]")
        val = complex(float(obj[0]), float(obj[1]))
        if F is not None and F.exact:
            raise DomainError("complex value in exact mode")
        return val
    val = Fraction(obj)
    return val if F is None or F.exact else complex(val)


@dataclass(frozen=True)
class Shear:
    """poly * d/dx_target on A^k; poly is ((coef, exponents), ...) free of x_target."""

    target: int
    poly: tuple

    def __post_init__(self):
        if any(len(e) and e[self.target] for _, e in self.poly):
            raise DomainError("shear polynomial involves its own coordinate")

    def value(self, p):
        acc = 0
        for c, e in self.poly:
            term = c
            for x, a in zip(p, e):
                if a:
                    term = term * x**a
            acc = acc + term
        return acc

    def trajectory(self, X, p):
        if X.level != 0:
            raise DomainError("shears act on affine space")
        out = [[x] for x in p]
        out[self.target] = [p[self.target], self.value(p)]
        return out

    def images(self, X):
        expr = sum(
            (sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction) else sympy.sympify(c))
            * sympy.Mul(*[g**a for g, a in zip(X.xs, e)])
            for c, e in self.poly
        )
        return {g: (expr if i == self.target else sympy.Integer(0)) for i, g in enumerate(X.gens)}

    def to_json(self):
        return {"shear": self.target, "poly": [[_frac_json(c), list(e)] for c, e in self.poly]}


def partial(k, j):
    """d/dx_j on A^k."""
    return Shear(j, ((Fraction(1), (0,) * k),))


@dataclass(frozen=True)
class Lift:
    """Base derivation lifted along `side` with multiplier q (coefficients, q[0] = 0)."""

    base: object
    q: tuple
    side: str

    def __post_init__(self):
        if self.side not in SIDES:
            raise DomainError(f"side must be 'u' or 'v', got {self.side!r}")
        object.__setattr__(self, "q", tuple(polys.trim(self.q)))
        if self.q and self.q[0] != 0:
            raise DomainError("lift multiplier needs q(0) = 0")

    def trajectory(self, X, p):
        if X.level == 0:
            raise DomainError("lifts act on suspensions")
        u, v = p[-2], p[-1]
        w = v if self.side == "v" else u
        qw = polys.evaluate(self.q, w) if self.q else 0 * w
        qt = polys.evaluate(self.q[1:], w) if len(self.q) > 1 else 0 * w
        base = self.base.trajectory(X.base, p[:-2])
        g = X.f_series(base)
        other = [u if self.side == "v" else v]
        for k in range(1, len(g)):
            other.append(qt * qw ** (k - 1) * g[k])
        scaled = [[c * qw**k for k, c in enumerate(tr)] for tr in base]
        if self.side == "v":
            return scaled + [other, [v]]
        return scaled + [[u], other]

    def images(self, X):
        """Symbolic images of the ambient generators."""
        B = X.base
        d0 = self.base.images(B)
        u, v = X.us[-1], X.vs[-1]
        w = v if self.side == "v" else u
        q = sum((_sym(c) * w**i for i, c in enumerate(self.q)), sympy.Integer(0))
        qt = sympy.expand(sympy.cancel(q / w)) if self.q else sympy.Integer(0)
        df = sympy.expand(sum((d0[g] * sympy.diff(X.fs[-1], g) for g in B.gens), sympy.Integer(0)))
        out = {g: sympy.expand(q * d0[g]) for g in B.gens}
        out[u if self.side == "v" else v] = sympy.expand(qt * df)
        out[w] = sympy.Integer(0)
        return out

    def to_json(self):
        return {"side": self.side, "q": [_frac_json(c) for c in self.q], "base": self.base.to_json()}


def _sym(c):
    if isinstance(c, Fraction):
        return sympy.Rational(c.numerator, c.denominator)
    return sympy.sympify(c)


def derivation_from_json(obj, X, F=None):
    """Parse a derivation for X; a lift without 'base' over A^1 means d/dx."""
    if "shear" in obj:
        if X.level != 0:
            raise DomainError("shear given where a lift is needed")
        target = int(obj["shear"])
        if not 0 <= target < X.k:
            raise DomainError("shear target out of range")
        poly = tuple((_scalar(c, F), tuple(int(a) for a in e)) for c, e in obj["poly"])
        if any(len(e) != X.k for _, e in poly):
            raise DomainError("shear exponents need one entry per coordinate")
        return Shear(target, poly)
    if X.level == 0:
        raise DomainError("lift given on affine space")
    if "base" in obj:
        base = derivation_from_json(obj["base"], X.base, F)
    elif X.base.level == 0 and X.k == 1:
        base = partial(1, 0)
    else:
        raise DomainError("lift needs a 'base' derivation")
    return Lift(base, tuple(_scalar(c, F) for c in obj["q"]), obj["side"])


def derivation_velocity(D, X, p):
    return [tr[1] if len(tr) > 1 else 0 * tr[0] for tr in D.trajectory(X, p)]


def check_lnd(D, X):
    """Symbolic check that D kills every relation and is triangular (hence locally nilpotent)."""
    images = D.images(X)
    for rel in X.relations:
        val = sympy.expand(sum((images[g] * sympy.diff(rel, g) for g in X.gens), sympy.Integer(0)))
        if val != 0:
            raise InconsistencyError(f"derivation does not preserve {rel}: gives {val}")
    deps = {g: images[g].free_symbols for g in X.gens}
    done, seen = set(), set()

    def visit(g):
        if g in done:
            return
        if g in seen:
            raise DomainError("derivation is not triangular")
        seen.add(g)
        for h in deps[g]:
            visit(h)
        done.add(g)

    for g in X.gens:
        visit(g)
    return images


def lift_lnd(X, base, q, side="v"):
    """Lift a base derivation to X and verify that it preserves u v - f."""
    if isinstance(base, dict):
        base = SymbolicDerivation.from_images(X.base, base)
    D = Lift(base, tuple(q), side)
    check_lnd(D, X)
    return D


@dataclass(frozen=True)
class SymbolicDerivation:
    """Triangular derivation of affine space given by coordinate images."""

    texts: tuple

    @classmethod
    def from_images(cls, X, images):
        if X.level != 0:
            raise CapabilityError("symbolic base derivations are supported over affine space only")
        names = {str(g): g for g in X.gens}
        if X.k == 1:
            names["x"] = X.xs[0]
        texts = []
        for g in X.gens:
            val = images.get(str(g), images.get(g, 0))
            if str(g) == "x0" and X.k == 1 and "x" in images:
                val = images["x"]
            expr = parse_expr(str(val), local_dict=names, transformations=_TRANSFORMS)
            texts.append(str(sympy.expand(expr)))
        D = cls(tuple(texts))
        check_lnd(D, X)
        return D

    def images(self, X):
        names = {str(g): g for g in X.gens}
        return {g: sympy.sympify(t, locals=names) for g, t in zip(X.gens, self.texts)}

    def trajectory(self, X, p):
        s = sympy.Symbol("_s")
        imgs = self.images(X)
        out = []
        for g in X.gens:
            series, term, k = sympy.Integer(0), g, 0
            while term != 0:
                series += s**k * term / sympy.factorial(k)
                term = sympy.expand(sum((imgs[h] * sympy.diff(term, h) for h in X.gens), sympy.Integer(0)))
                k += 1
                if k > 64:
                    raise DomainError("derivation is not locally nilpotent within 64 steps")
            terms = _compile(sympy.expand(series), X.gens + (s,))
            coeffs = {}
            for c, mon in terms:
                deg = dict(mon).get(len(X.gens), 0)
                val = c
                for i, e in mon:
                    if i < len(X.gens):
                        val = val * p[i] ** e
                coeffs[deg] = coeffs.get(deg, 0) + val
            out.append([coeffs.get(d, 0) for d in range(max(coeffs, default=0) + 1)] or [0])
        return out

    def to_json(self):
        return {"images": list(self.texts)}


# letters and words


@dataclass(frozen=True)
class Letter:
    """exp(t D) for a derivation D."""

    derivation: object
    t: object
    step: str = ""

    def apply(self, X, p):
        if self.t == 0:
            return tuple(p)
        return tuple(polys.evaluate(tr, self.t) for tr in self.derivation.trajectory(X, p))

    def inverse(self):
        return Letter(self.derivation, -self.t, self.step)

    def to_json(self):
        D = self.derivation
        if isinstance(D, Lift) and D.base == partial(1, 0):
            out = {"side": D.side, "q": [_frac_json(c) for c in D.q]}
        else:
            out = D.to_json()
        out["t"] = _frac_json(self.t)
        if self.step:
            out["step"] = self.step
        return out

    @classmethod
    def from_json(cls, obj, X, F=None):
        if not isinstance(obj, dict) or "t" not in obj:
            raise DomainError("letter needs a derivation and 't'")
        return cls(derivation_from_json(obj, X, F), _scalar(obj["t"], F), obj.get("step", ""))


def hu(q, t, step=""):
    """Surface letter fixing u: x -> x + t q(u)."""
    return Letter(Lift(partial(1, 0), tuple(q), "u"), t, step)


def hv(q, t, step=""):
    """Surface letter fixing v: x -> x + t q(v)."""
    return Letter(Lift(partial(1, 0), tuple(q), "v"), t, step)


def hu_action(X, q, t, p):
    return hu(q, t).apply(X, p)


def hv_action(X, q, t, p):
    return hv(q, t).apply(X, p)


@dataclass(frozen=True)
class SuspensionWord:
    letters: tuple = ()

    def __len__(self):
        return len(self.letters)

    def __add__(self, other):
        return SuspensionWord(self.letters + other.letters)

    def inverse(self):
        return SuspensionWord(tuple(g.inverse() for g in reversed(self.letters)))

    def apply(self, X, p):
        for g in self.letters:
            p = g.apply(X, p)
        return p

    def replay(self, X, points):
        return [self.apply(X, p) for p in points]

    def step_counts(self):
        out = {}
        for g in self.letters:
            out[g.step] = out.get(g.step, 0) + 1
        return out

    def to_json(self):
        return [g.to_json() for g in self.letters]

    @classmethod
    def from_json(cls, obj, X, F=None):
        if not isinstance(obj, list):
            raise DomainError("word must be a list of letters")
        return cls(tuple(Letter.from_json(g, X, F) for g in obj))


# standard tuples


def standard_tuple(X, m):
    if X.level == 0:
        return [(Fraction(i),) * X.k for i in range(1, m + 1)]
    if X.is_surface:
        f = X.f_coeffs
        return [(Fraction(i), polys.evaluate(f, Fraction(i)) / i, Fraction(i)) for i in range(1, m + 1)]
    out = []
    for P in standard_tuple(X.base, m):
        out.append(P + (Fraction(1), X.f_value(P + (0, 0))))
    return out


def _normalized(q, c0):
    val = polys.evaluate(q, c0)
    return polys.scale(q, 1 / val)


def _vanishing_q(frozen, c0=None):
    """q = alpha z prod (z - c_s), with q(c0) = 1 when c0 is given."""
    q = polys.mul([0, 1], polys.from_roots(frozen))
    return _normalized(q, c0) if c0 is not None else q


# affine space


def _affine_to_standard(X, pts, F):
    k, m = X.k, len(pts)
    if k < 2:
        raise CapabilityError("affine line: only translations, not multiply transitive")
    target = [tuple(F.convert(x) for x in S) for S in standard_tuple(X, m)]
    word = []
    pts = [tuple(p) for p in pts]

    def push(D, t=1):
        g = Letter(D, F.convert(t), AFFINE)
        word.append(g)
        return [g.apply(X, p) for p in pts]

    if len(_distinct([p[0] for p in pts], F)) < m or not _well_separated([p[0] for p in pts], F):
        for c in range(1, 200):
            poly = tuple((F.convert(c ** (j - 1)), tuple(int(i == j) for i in range(k))) for j in range(1, k))
            D = Shear(0, poly)
            firsts = [p[0] + D.value(p) for p in pts]
            if _well_separated(firsts, F):
                pts = push(D)
                break
        else:
            raise InfeasibleError("no separating shear found")
    nodes = [p[0] for p in pts]
    for j in range(1, k):
        vals = [S[j] - p[j] for S, p in zip(target, pts)]
        if all(F.is_zero(x) for x in vals):
            continue
        coeffs = polys.interpolate(nodes, vals)
        pts = push(Shear(j, tuple((c, tuple(d if i == 0 else 0 for i in range(k))) for d, c in enumerate(coeffs))))
    vals = [S[0] - p[0] for S, p in zip(target, pts)]
    if not all(F.is_zero(x) for x in vals):
        coeffs = polys.interpolate([S[1] for S in target], vals)
        pts = push(Shear(0, tuple((c, tuple(d if i == 1 else 0 for i in range(k))) for d, c in enumerate(coeffs))))
    return word, pts


def _well_separated(vals, F):
    return all(F.generic(a - b) for i, a in enumerate(vals) for b in vals[:i])


# surfaces


def _q_candidates():
    out = []
    for deg in range(1, 5):
        for rest in product((0, 1, 2), repeat=deg - 1):
            out.append((0,) + rest + (1,))
    return out


_NUMERIC_TS = tuple(
    Fraction(sign * a, b) for a in range(1, 6) for b in range(1, 5) for sign in (1, -1) if a == 1 or b == 1
)


def _best_t(values_at, F, limit=40, reach=1):
    """First integer t >= 1 with a score (exact), or the best-scoring small t (numeric).

    `reach` is the largest displacement per unit t; numeric candidates are
    also tried after dividing by it so large coordinates do not force large moves.
    """
    if F.exact:
        for t in range(1, limit + 1):
            if values_at(F.convert(t)) is not None:
                return F.convert(t)
        return None
    ts = [F.convert(t) for t in _NUMERIC_TS]
    if reach > 1:
        ts += [t / reach for t in ts]
    best = None
    for t in ts:
        score = values_at(t)
        if score is not None and (best is None or score > best[0]):
            best = (score, t)
    return None if best is None else best[1]


def _separation(vals, F, nonzero=True):
    """Smallest |v_i| and |v_i - v_j|, damped by the largest |v_i|; None if one vanishes."""
    sizes = [abs(v) for v in vals] if nonzero else []
    sizes += [abs(a - b) for i, a in enumerate(vals) for b in vals[:i]]
    if F.exact:
        return None if any(s == 0 for s in sizes) else 1
    if not sizes:
        return 1.0
    s = min(sizes)
    return None if s <= F.gap else s / max([1.0] + [abs(v) for v in vals]) ** 2


def _surface_to_standard(X, pts, F):
    m = len(pts)
    std = [tuple(F.convert(x) for x in S) for S in standard_tuple(X, m)]
    word = []
    pts = [tuple(p) for p in pts]

    def push(g):
        word.append(g)
        return [g.apply(X, p) for p in pts]

    # all v nonzero
    if any(not F.generic(p[2]) for p in pts):
        reach = max(abs(p[1]) for p in pts)
        t = _best_t(lambda t: _separation([hu((0, 1), t).apply(X, p)[2] for p in pts], F, True), F, reach=reach)
        if t is None:
            raise InfeasibleError("no t makes every v nonzero")
        pts = push(hu((0, 1), t, NONZERO_V))
    # u nonzero and distinct
    if _separation([p[1] for p in pts], F) is None:
        best = None
        for qc in _q_candidates():
            q = tuple(F.convert(c) for c in qc)
            if any(not F.generic(polys.evaluate(q, p[2])) for p in pts):
                continue
            traj = [Lift(partial(1, 0), q, "v").trajectory(X, p)[1] for p in pts]
            if any(not _poly_differs(a, b, F) for i, a in enumerate(traj) for b in traj[:i]):
                continue
            reach = max(abs(polys.evaluate(q, p[2])) for p in pts)
            t = _best_t(lambda t: _separation([polys.evaluate(tr, t) for tr in traj], F), F, reach=reach)
            if t is None:
                continue
            score = _separation([polys.evaluate(tr, t) for tr in traj], F)
            if best is None or score > best[0]:
                best = (score, q, t)
            if F.exact or len(qc) > 3:
                break
        if best is None:
            raise InfeasibleError("no multiplier separates the u coordinates")
        pts = push(hv(best[1], best[2], SEPARATE_U))
    # v to standard
    us = [p[1] for p in pts]
    for i in range(m):
        if F.equal(pts[i][2], std[i][2]):
            continue
        q = _vanishing_q([u for j, u in enumerate(us) if j != i])
        c = us[i] * std[i][2]
        eq = polys.add(X.f_coeffs, [-c])
        if F.exact:
            roots = polys.rational_roots(eq)
            if not roots:
                raise FieldExtensionError(f"f(x) = {c} has no rational root", FIX_V)
            a = roots[0]
        else:
            roots = polys.numeric_roots(eq)
            a = min(roots, key=lambda r: abs(r - pts[i][0]))
        t = (a - pts[i][0]) / polys.evaluate(q, us[i])
        pts = push(hu(tuple(q), t, FIX_V))
    # x to standard
    vals = [S[0] - p[0] for S, p in zip(std, pts)]
    if not all(F.is_zero(x) for x in vals):
        q = polys.interpolate_through_zero([S[2] for S in std], vals)
        pts = push(hv(tuple(q), F.convert(1), FIX_X))
    return word, pts


def _poly_differs(a, b, F):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return any(F.generic(x - y) for x, y in zip(a, b))


def surface_postconditions(X, points, word, F=EXACT):
    """Re-verify after replay that each stage of the surface algorithm reached its goal."""
    std = [tuple(F.convert(x) for x in S) for S in standard_tuple(X, len(points))]
    pts = [tuple(F.convert(x) for x in p) for p in points]
    out = {}
    letters = list(word.letters)
    for step in SURFACE_STEPS:
        for g in [g for g in letters if g.step == step]:
            pts = [g.apply(X, p) for p in pts]
        if step == NONZERO_V:
            out[step] = all(not F.is_zero(p[2]) for p in pts)
        elif step == SEPARATE_U:
            us = [p[1] for p in pts]
            out[step] = all(not F.is_zero(u) for u in us) and len(_distinct(us, F)) == len(us)
        elif step == FIX_V:
            out[step] = all(F.equal(p[2], S[2]) for p, S in zip(pts, std))
        else:
            out[step] = all(F.equal(a, b) for p, S in zip(pts, std) for a, b in zip(p, S))
    return out


# towers


def candidate_derivations(X):
    """Derivations tried when some base motion must change f: partials, lifted with q = z."""
    if X.level == 0:
        return [partial(X.k, j) for j in range(X.k)]
    out = []
    for D in candidate_derivations(X.base):
        out += [Lift(D, (0, 1), "v"), Lift(D, (0, 1), "u")]
    return out


def _df(X, D, P):
    """Derivative of the top f of X along the base derivation D at base point P."""
    g = X.f_series(D.trajectory(X.base, P))
    return g[1] if len(g) > 1 else 0


def _to_standard(X, pts, F, rng):
    if X.level == 0:
        return _affine_to_standard(X, pts, F)
    if X.is_surface:
        return _surface_to_standard(X, pts, F)
    if X.dim < 2:
        raise CapabilityError("tower solver needs a base of dimension at least 2")
    word = []
    pts = [tuple(p) for p in pts]
    pts = _hyperbolize(X, pts, F, rng, word)
    pts = _unit_level(X, pts, F, rng, word)
    base_pts = [X.project(p) for p in pts]
    base_word, _ = _to_standard(X.base, base_pts, F, rng)
    letters = _lift_word(base_word, (F.convert(0), F.convert(1)), "u", STANDARDIZE)
    word.extend(letters)
    return word, _apply_all(X, letters, pts)


def _base_solve(B, P, Q, F, rng):
    wp, _ = _to_standard(B, P, F, rng)
    wq, _ = _to_standard(B, Q, F, rng)
    return list((SuspensionWord(tuple(wp)) + SuspensionWord(tuple(wq)).inverse()).letters)


def _lift_word(base_word, q, side, step):
    return [Letter(Lift(g.derivation, tuple(q), side), g.t, step) for g in base_word]


def _apply_all(X, letters, pts):
    w = SuspensionWord(tuple(letters))
    return [w.apply(X, p) for p in pts]


def _hyperbolize(X, pts, F, rng, word):
    B = X.base
    for _ in range(4 * len(pts) + 4):
        bad = [j for j, p in enumerate(pts) if not X.is_hyperbolic(p, F)]
        if not bad:
            return pts
        j = bad[0]
        u, v = pts[j][-2], pts[j][-1]
        hyper = [i for i in range(len(pts)) if i not in bad]
        if F.is_zero(u) and F.is_zero(v):
            frozen = _distinct([pts[i][-1] for i in hyper], F)
            q = polys.mul([F.convert(0), F.convert(1)], polys.from_roots(frozen, F.convert(1)))
            P = X.project(pts[j])
            D = next((d for d in candidate_derivations(B) if F.generic(_df(X, d, P))), None)
            if D is None:
                raise CapabilityError("no candidate base derivation moves f at this point")
            lift = Lift(D, tuple(q), "v")
            t = _best_t(lambda t: 1 if F.generic(Letter(lift, t).apply(X, pts[j])[-2]) else None, F)
            g = Letter(lift, t, HYPERBOLIZE)
            word.append(g)
            pts = [g.apply(X, p) for p in pts]
            continue
        side, wi = ("v", -1) if F.is_zero(u) else ("u", -2)
        c0 = pts[j][wi]
        group = [i for i in hyper if F.equal(pts[i][wi], c0)] + [j]
        frozen = _distinct([pts[i][wi] for i in hyper if not F.equal(pts[i][wi], c0)], F)
        P0 = [X.project(pts[i]) for i in group]
        extra = _random_base_point(X, F, rng, P0)
        letters = _lift_word(_base_solve(B, P0, P0[:-1] + [extra], F, rng), _vanishing_q(frozen, c0), side, HYPERBOLIZE)
        word.extend(letters)
        pts = _apply_all(X, letters, pts)
        if not X.is_hyperbolic(pts[j], F):
            raise InconsistencyError("point is still not hyperbolic after the move")
    raise InfeasibleError("hyperbolization did not terminate")


def _unit_level(X, pts, F, rng, word):
    B = X.base
    levels = _distinct([p[-1] for p in pts], F)
    for c in levels:
        group = [i for i, p in enumerate(pts) if F.equal(p[-1], c)]
        if all(F.equal(pts[i][-2], 1) for i in group):
            continue
        targets = _level_points(X, c, len(group), F, rng)
        base_word = _base_solve(B, [X.project(pts[i]) for i in group], targets, F, rng)
        letters = _lift_word(base_word, _vanishing_q([d for d in levels if not F.equal(d, c)], c), "v", UNIT_LEVEL)
        word.extend(letters)
        pts = _apply_all(X, letters, pts)
    return pts


def _random_base_point(X, F, rng, avoid):
    B = X.base
    for _ in range(500):
        xs = [F.convert(rng.randint(-4, 4)) for _ in range(B.k)]
        us = [F.convert(rng.choice([-3, -2, -1, 1, 2, 3])) for _ in range(B.level)]
        P = B.from_params(xs, us)
        if F.generic(X.f_value(P + (0, 0))) and all(
            any(F.generic(a - b) for a, b in zip(P, Q)) for Q in avoid
        ):
            return P
    raise InfeasibleError("no base point with f != 0 found")


def _level_points(X, c, count, F, rng):
    """`count` distinct smooth base points with f = c."""
    B = X.base
    expr, params = X._param_expr
    num = sympy.numer(expr - _sym(c) if F.exact else expr - sympy.sympify(complex(c)))
    out = []
    for attempt in range(400):
        idx = attempt % len(params)
        vals = [F.convert(rng.randint(-4, 4)) for _ in range(B.k)]
        vals += [F.convert(rng.choice([-3, -2, -1, 1, 2, 3])) for _ in range(B.level)]
        sub = {params[i]: _sym(vals[i]) if F.exact else sympy.sympify(vals[i]) for i in range(len(params)) if i != idx}
        uni = sympy.expand(num.subs(sub))
        z = params[idx]
        if not uni.has(z):
            continue
        coeffs = [_coef(a) for a in reversed(sympy.Poly(uni, z).all_coeffs())]
        roots = polys.rational_roots(coeffs) if F.exact else polys.numeric_roots(coeffs)
        for r in roots:
            vals2 = list(vals)
            vals2[idx] = F.convert(r)
            if idx >= B.k and F.is_zero(vals2[idx]):
                continue
            try:
                P = B.from_params(vals2[: B.k], vals2[B.k:])
            except (DomainError, ZeroDivisionError):
                continue
            if not F.equal(X.f_value(P + (0, 0)), c):
                continue
            if all(any(F.generic(a - b) for a, b in zip(P, Q)) for Q in out):
                out.append(P)
                if len(out) == count:
                    return out
    if F.exact:
        raise FieldExtensionError(f"no rational base point found on the level set f = {c}", UNIT_LEVEL)
    raise InfeasibleError(f"could not sample the level set f = {c}")


# public solver


@dataclass
class SuspensionSolution:
    word: SuspensionWord
    forward: SuspensionWord
    backward: SuspensionWord
    targets: list
    residual: float
    mode: str
    postconditions: dict = field(default_factory=dict)


def _validate(X, points, F):
    pts = [X.check_point(p, F) for p in points]
    for p in pts:
        if not X.is_smooth(p, F):
            raise DomainError(f"point {_show(p)} is singular")
    for i, p in enumerate(pts):
        for q in pts[:i]:
            if all(F.equal(a, b) for a, b in zip(p, q)):
                raise DomainError("points must be distinct")
    return pts


def _show(p):
    return "(" + ", ".join(str(_frac_json(x)) for x in p) + ")"


def suspension_solve(X, points, targets=None, mode="exact", tol=1e-9):
    """Word moving `points` to `targets` (default: the standard tuple), verified by replay."""
    F = field_for(mode, tol)
    if X.level == 0:
        raise DomainError("not a suspension")
    pts = _validate(X, points, F)
    rng = random.Random(0)
    fwd, _ = _to_standard(X, pts, F, rng)
    fwd = SuspensionWord(tuple(fwd))
    if targets is None:
        tg = [tuple(F.convert(x) for x in S) for S in standard_tuple(X, len(pts))]
        bwd = SuspensionWord()
    else:
        if len(targets) != len(pts):
            raise DomainError("points and targets differ in length")
        tg = _validate(X, targets, F)
        bw, _ = _to_standard(X, tg, F, random.Random(0))
        bwd = SuspensionWord(tuple(bw))
    word = fwd + bwd.inverse()
    images = word.replay(X, pts)
    residual = max((abs(complex(a - b)) for p, q in zip(images, tg) for a, b in zip(p, q)), default=0.0)
    if F.exact and residual != 0:
        raise InconsistencyError("exact replay missed the targets")
    if not F.exact and residual > tol:
        raise ResidualError(f"replay residual {residual:.3e} exceeds tolerance {tol:g}", residual)
    post = {}
    if X.is_surface:
        post["points"] = surface_postconditions(X, pts, fwd, F)
        if targets is not None:
            post["targets"] = surface_postconditions(X, tg, bwd, F)
        if not all(all(v.values()) for v in post.values()):
            raise InconsistencyError(f"postcondition failed: {post}")
    return SuspensionSolution(word, fwd, bwd, tg, float(residual), mode, post)


def surface_solve(X, points, targets=None, mode="exact", tol=1e-9):
    if not X.is_surface:
        raise DomainError("surface_solve needs uv = f(x) over the affine line")
    return suspension_solve(X, points, targets, mode, tol)


def replay_residual(X, word, points, targets):
    images = word.replay(X, points)
    return max((abs(complex(a - b)) for p, q in zip(images, targets) for a, b in zip(p, q)), default=0.0)


# flexibility


@dataclass(frozen=True)
class FlexibilityMatrix:
    point: tuple
    derivations: tuple
    matrix: tuple
    rank: int

    def check(self, X, F=EXACT):
        mat = tuple(tuple(derivation_velocity(D, X, self.point)) for D in self.derivations)
        rk = _rank(mat, X.ambient_dim, F)
        return mat == self.matrix and rk == X.dim == self.rank


def _rank(mat, ncols, F):
    if F.exact:
        return exact_rank(mat, ncols)
    return int(np.linalg.matrix_rank(np.array(mat, dtype=complex), tol=F.tol))


def flexibility_derivations(X, p, F=EXACT):
    """dim X derivations whose velocities at p are independent (p hyperbolic at every level)."""
    if X.level == 0:
        return [partial(X.k, j) for j in range(X.k)]
    if not X.is_hyperbolic(p, F):
        raise DomainError("flexibility matrix needs a hyperbolic point (u v != 0)")
    P = X.project(p)
    base = flexibility_derivations(X.base, P, F)
    i = next((i for i, D in enumerate(base) if F.generic(_df(X, D, P))), None)
    if i is None:
        raise DomainError("no base derivation has a nonzero derivative of f at the base point")
    one = (F.convert(0), F.convert(1))
    return [Lift(D, one, "v") for D in base] + [Lift(base[i], one, "u")]


def flexibility_matrix(X, p, F=EXACT):
    p = X.check_point(p, F)
    ds = tuple(flexibility_derivations(X, p, F))
    mat = tuple(tuple(derivation_velocity(D, X, p)) for D in ds)
    rk = _rank(mat, X.ambient_dim, F)
    if rk != X.dim:
        raise InconsistencyError(f"velocity matrix has rank {rk} < {X.dim}")
    return FlexibilityMatrix(p, ds, mat, rk)


# smoothness of the tower


def _det(rows):
    a = [[Fraction(x) for x in r] for r in rows]
    n, out = len(a), Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            out = -out
        out *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return out


def regularity_witness(X, p):
    """Columns of a nonsingular maximal minor of the Jacobian, built level by level.

    Needs every projection of p to have (u_i, v_i) != (0, 0); returns
    (columns, determinant) or None when that fails at some level.
    """
    cols = []
    for i in range(X.level):
        iu = X.k + 2 * i
        u, v = p[iu], p[iu + 1]
        if v != 0:
            cols.append(iu)
        elif u != 0:
            cols.append(iu + 1)
        else:
            return None
    jac = X.jacobian(p)
    d = _det([[row[c] for c in cols] for row in jac])
    return tuple(cols), d


def sample_points(X, count, rng, F=EXACT, special=0.3):
    """Random points of X; a share `special` of them sits on u = 0 or v = 0 where possible."""
    out = []
    while len(out) < count:
        xs = [F.convert(Fraction(rng.randint(-9, 9), rng.randint(1, 3))) for _ in range(X.k)]
        p = list(xs)
        if X.is_surface and rng.random() < special:
            roots = polys.rational_roots(X.f_coeffs) if F.exact else polys.numeric_roots(X.f_coeffs)
            if roots:
                p = [F.convert(rng.choice(roots))]
        for i in range(X.level):
            fi = _eval(X._f_all[i], p + [0] * (X.ambient_dim - len(p)))
            if F.is_zero(fi) and rng.random() < 0.75:
                kind = rng.choice(["u0", "v0", "both"])
                r = F.convert(rng.choice([-3, -2, -1, 1, 2, 3]))
                p += {"u0": [0 * r, r], "v0": [r, 0 * r], "both": [0 * r, 0 * r]}[kind]
            else:
                u = F.convert(Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 2)))
                p += [u, fi / u]
        out.append(tuple(p))
    return out
