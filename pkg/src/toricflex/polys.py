"""Dense univariate polynomials as coefficient lists, lowest degree first.

Coefficients may be Fractions (exact mode) or complex numbers (numeric
mode); every routine here only uses ring operations and division by
nonzero scalars so it works for both.
"""

from fractions import Fraction

import numpy as np


def trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def degree(c):
    return len(trim(c)) - 1


def evaluate(c, x):
    acc = 0 * x
    for a in reversed(c):
        acc = acc * x + a
    return acc


def add(a, b):
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def scale(a, s):
    return trim([x * s for x in a])


def mul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return trim(out)


def power(a, k):
    out = [1]
    for _ in range(k):
        out = mul(out, a)
    return out


def derivative(c):
    return trim([i * c[i] for i in range(1, len(c))])


def taylor(c, x):
    """Coefficients T_k with f(x + s) = sum_k T_k s^k (so T_k = f^(k)(x)/k!)."""
    c = list(c)
    out = []
    while c:
        out.append(evaluate(c, x))
        # synthetic division by (z - x)
        quo = []
        carry = 0 * x
        for a in reversed(c[1:]):
            carry = carry * x + a
            quo.append(carry)
        c = list(reversed(quo))
    return out


def from_roots(roots, lead=1):
    out = [lead]
    for r in roots:
        out = mul(out, [-r, 1])
    return out


def interpolate(nodes, values):
    """Polynomial of degree < len(nodes) through (nodes[i], values[i]) (Newton form, expanded)."""
    n = len(nodes)
    coef = list(values)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (nodes[i] - nodes[i - j])
    out = [coef[-1]] if n else []
    for i in range(n - 2, -1, -1):
        out = add(mul(out, [-nodes[i], 1]), [coef[i]])
    return trim(out)


def interpolate_through_zero(nodes, values):
    """q with q(0) = 0 and q(nodes[i]) = values[i]; nodes nonzero and distinct."""
    zero = 0 * nodes[0] if nodes else 0
    return interpolate([zero] + list(nodes), [zero] + list(values))


def rational_roots(c):
    """Distinct rational roots of a polynomial with rational coefficients, sorted."""
    import sympy

    c = [Fraction(x) for x in trim(c)]
    if len(c) <= 1:
        return []
    z = sympy.Symbol("z")
    poly = sympy.Poly([sympy.Rational(x.numerator, x.denominator) for x in reversed(c)], z, domain="QQ")
    roots = set()
    for fac, _ in poly.factor_list()[1]:
        if fac.degree() == 1:
            a, b = fac.all_coeffs()
            r = -sympy.Rational(b) / sympy.Rational(a)
            roots.add(Fraction(int(r.p), int(r.q)))
    return sorted(roots)


def numeric_roots(c, polish=3):
    """All complex roots, refined by a few Newton steps."""
    c = [complex(x) for x in trim(c)]
    if len(c) <= 1:
        return []
    roots = np.roots(list(reversed(c)))
    d = derivative(c)
    out = []
    for r in roots:
        r = complex(r)
        for _ in range(polish):
            dv = evaluate(d, r)
            if dv == 0:
                break
            r = r - evaluate(c, r) / dv
        out.append(r)
    return out
