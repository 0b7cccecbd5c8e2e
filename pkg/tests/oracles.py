"""Independent oracles: exact-rational symbolic expansion and brute-force SVD.

Nothing here imports the residual or norm code under test.
"""

from fractions import Fraction

import numpy as np
import sympy as sp

X, Y, Z, RHO = sp.symbols("x y z rho")

DEGREE = {"linear": 1, "quadratic": 2, "cubic": 3, "even_quartic": 4, "constant": 0}


def exact(v):
    """float/complex/Fraction -> exact sympy number (floats are dyadic rationals)."""
    if isinstance(v, Fraction):
        return sp.Rational(v.numerator, v.denominator)
    v = complex(v)
    return sp.Rational(Fraction(v.real)) + sp.I * sp.Rational(Fraction(v.imag))


def polynomial(terms):
    """Callable t -> sum c t^k for catalog terms given as (name, c)."""
    def f(t):
        return sum(exact(c) * t ** DEGREE[name] for name, c in terms)
    return f


def symbolic_residual(f, j):
    """E^j f as an expanded polynomial in x, y, z, rho."""
    s = (-1) ** j
    lhs = (
        3**j * f((X + Y + Z) / 3) + f(X) + f(Y) + s * f(Z)
        - 2**j * f((X + Y) / 2) - 2**j * f((Y + Z) / 2) - s * 2**j * f((X + Z) / 2)
    )
    bracket = j * f(X + Y + Z) + j * f(X) - f(X + Y) - f(X + Z) - (j - 1) * f(Y + Z)
    return sp.expand(lhs - RHO * bracket)


def evaluate(expr, x, y, z, rho):
    val = expr.subs({X: exact_point(x), Y: exact_point(y), Z: exact_point(z), RHO: exact(rho)})
    return complex(sp.N(sp.expand(val), 30))


def exact_point(p):
    if isinstance(p, tuple):
        return exact(p[0]) + sp.I * exact(p[1])
    return exact(p)


def to_complex(p):
    if isinstance(p, tuple):
        return complex(float(p[0]), float(p[1]))
    return complex(p)


def operator_norm(mat):
    return float(np.linalg.svd(mat, compute_uv=False)[0])
