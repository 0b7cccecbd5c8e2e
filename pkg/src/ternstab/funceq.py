"""Function handles, the residual operator E^j and defect measures.

A handle is any object with an ``algebra`` attribute and ``__call__(x)``
returning an element of that algebra. :class:`FunctionHandle` is the
serialisable catalog handle; other modules add derived handles (halving
operator, extracted limits) that follow the same protocol.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .algebra import AlgebraInstance
from .errors import DimensionError, ParityError, PreconditionError

PARITIES = ("odd", "even", "none")
DIRECTION_RULES = ("odd", "even", "fixed")

DEFAULT_RHO = 2 + 0j
RATIO_FLOOR = 1e-300


def check_j(j) -> int:
    if j not in (1, 2) or isinstance(j, bool):
        raise ValueError(f"j must be 1 or 2, got {j!r}")
    return int(j)


def check_rho(rho) -> complex:
    rho = complex(rho)
    if rho in (0, 1, -1):
        raise ValueError(f"rho must avoid 0 and +-1, got {rho!r}")
    return rho


def _pair(c) -> list:
    c = complex(c)
    return [c.real, c.imag]


def parse_scalar(v) -> complex:
    if isinstance(v, (list, tuple)):
        re, im = v
        return complex(re, im)
    return complex(v)


# --- catalog terms -------------------------------------------------------

@dataclass(frozen=True)
class Linear:
    c: complex = 1
    name = "linear"
    parity = "odd"

    def __call__(self, algebra, x):
        return self.c * x

    def to_dict(self):
        return {"term": self.name, "c": _pair(self.c)}


@dataclass(frozen=True)
class Quadratic:
    """x -> c x^2 through the binary product."""

    c: complex = 1
    name = "quadratic"
    parity = "even"

    def __call__(self, algebra, x):
        return self.c * algebra.bproduct(x, x)

    def to_dict(self):
        return {"term": self.name, "c": _pair(self.c)}


@dataclass(frozen=True)
class Cubic:
    c: complex = 1
    name = "cubic"
    parity = "odd"

    def __call__(self, algebra, x):
        return self.c * algebra.power(x, 3)

    def to_dict(self):
        return {"term": self.name, "c": _pair(self.c)}


@dataclass(frozen=True)
class EvenQuartic:
    c: complex = 1
    name = "even_quartic"
    parity = "even"

    def __call__(self, algebra, x):
        return self.c * algebra.power(x, 4)

    def to_dict(self):
        return {"term": self.name, "c": _pair(self.c)}


@dataclass(frozen=True)
class Constant:
    """x -> c times the unit; the only catalog term with f(0) != 0."""

    c: complex = 1
    name = "constant"
    parity = "even"

    def __call__(self, algebra, x):
        return self.c * algebra.unit()

    def to_dict(self):
        return {"term": self.name, "c": _pair(self.c)}


@dataclass(frozen=True)
class PowerPerturbation:
    """x -> s ||x||^r u(x) with ``u(x)`` a unit element.

    The direction ``u`` has a pseudo-random phase per coordinate, derived by
    hashing ``seed`` together with the coordinates of ``x``. Rule ``odd``
    makes ``u(-x) = -u(x)``, ``even`` makes ``u(-x) = u(x)``; ``fixed`` uses
    one direction for every ``x``.
    """

    s: float
    r: float
    direction: str = "odd"
    seed: int = 0
    name = "power_perturbation"

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("perturbation scale s must be nonnegative")
        if self.direction not in DIRECTION_RULES:
            raise ValueError(f"unknown direction rule {self.direction!r}")

    @property
    def parity(self):
        return "odd" if self.direction == "odd" else "even"

    def unit_direction(self, algebra, x) -> np.ndarray:
        sign = 1.0
        key = b""
        if self.direction != "fixed":
            flat = x.view(np.float64)
            nz = np.flatnonzero(flat)
            if nz.size and flat[nz[0]] < 0:
                sign = -1.0
            # + 0.0 folds -0.0 into 0.0 so x and -x share one key
            key = (sign * x + 0.0).tobytes()
        dim = algebra.dimension
        digest = hashlib.shake_256(struct.pack("<Q", self.seed) + key).digest(8 * dim)
        phases = np.frombuffer(digest, dtype="<u8") * (2 * math.pi / 2.0**64)
        u = np.exp(1j * phases)
        u = u / algebra.norm(u)
        if self.direction == "odd":
            return sign * u
        return u

    def __call__(self, algebra, x):
        return (self.s * algebra.norm(x) ** self.r) * self.unit_direction(algebra, x)

    def to_dict(self):
        return {
            "term": self.name,
            "s": self.s,
            "r": self.r,
            "direction": self.direction,
            "seed": self.seed,
        }


TERMS = {t.name: t for t in (Linear, Quadratic, Cubic, EvenQuartic, Constant)}


def term_from_dict(d: dict):
    name = d["term"]
    if name == PowerPerturbation.name:
        return PowerPerturbation(
            float(d["s"]), float(d["r"]), d.get("direction", "odd"), int(d.get("seed", 0))
        )
    if name not in TERMS:
        raise ValueError(f"unknown catalog term {name!r}")
    return TERMS[name](parse_scalar(d.get("c", 1)))


@dataclass(frozen=True)
class FunctionHandle:
    """Deterministic map X -> X: the sum of its catalog terms, in order.

    ``parity`` is declared; when omitted it is inferred from the terms.
    """

    algebra: AlgebraInstance
    terms: Tuple = ()
    declared_parity: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.declared_parity is not None and self.declared_parity not in PARITIES:
            raise ValueError(f"unknown parity {self.declared_parity!r}")

    @property
    def parity(self) -> str:
        if self.declared_parity is not None:
            return self.declared_parity
        kinds = {t.parity for t in self.terms if getattr(t, "s", 1) != 0}
        if not kinds:
            return "odd"  # the zero map is odd (and even)
        return kinds.pop() if len(kinds) == 1 else "none"

    def __call__(self, x) -> np.ndarray:
        self.algebra.check(x)
        out = self.algebra.zero()
        for term in self.terms:
            if getattr(term, "s", 1) == 0:
                continue
            out = out + term(self.algebra, x)
        return out

    def plus(self, *terms) -> "FunctionHandle":
        return FunctionHandle(self.algebra, self.terms + tuple(terms), self.declared_parity)

    def to_dict(self) -> dict:
        d = {"algebra": self.algebra.name, "terms": [t.to_dict() for t in self.terms]}
        if self.declared_parity is not None:
            d["parity"] = self.declared_parity
        return d

    @classmethod
    def from_dict(cls, d: dict, algebra: AlgebraInstance = None) -> "FunctionHandle":
        if algebra is None:
            algebra = AlgebraInstance.parse(d["algebra"])
        return cls(algebra, tuple(term_from_dict(t) for t in d["terms"]), d.get("parity"))


class Combination:
    """The handle x -> alpha f(x) + beta g(x)."""

    def __init__(self, alpha, f, beta, g):
        if f.algebra != g.algebra:
            raise ValueError("cannot combine handles on different algebras")
        self.algebra = f.algebra
        self.alpha, self.f, self.beta, self.g = complex(alpha), f, complex(beta), g
        self.parity = f.parity if f.parity == g.parity else "none"

    def __call__(self, x):
        return self.alpha * self.f(x) + self.beta * self.g(x)


# --- residual operator -----------------------------------------------------

def residual(f, j: int, rho, x, y, z) -> np.ndarray:
    """E^j f(x, y, z), accumulated term by term in the printed order."""
    j = check_j(j)
    rho = check_rho(rho)
    A = f.algebra
    for name, p in (("x", x), ("y", y), ("z", z)):
        if np.ndim(p) != 1 or np.shape(p)[0] != A.dimension:
            raise DimensionError(name, A.dimension, np.size(p))
    sgn = (-1) ** j
    two = 2**j
    acc = 3**j * f((x + y + z) / 3)
    acc = acc + f(x)
    acc = acc + f(y)
    acc = acc + sgn * f(z)
    acc = acc - two * f((x + y) / 2)
    acc = acc - two * f((y + z) / 2)
    acc = acc - sgn * two * f((x + z) / 2)
    bracket = j * f(x + y + z)
    bracket = bracket + j * f(x)
    bracket = bracket - f(x + y)
    bracket = bracket - f(x + z)
    bracket = bracket - (j - 1) * f(y + z)
    return acc - rho * bracket


@dataclass
class DefectReport:
    """Worst defect over a grid, with the point where it occurred.

    ``max_relative`` is the worst of defect / (1 + scale), where the scale is
    the largest norm among the quantities being compared at that point.
    ``rows`` keeps the per-point defects for CSV output.
    """

    label: str
    max_defect: float = 0.0
    argmax_index: Optional[int] = None
    argmax_point: Optional[tuple] = None
    samples_checked: int = 0
    max_relative: float = 0.0
    max_ratio: Optional[float] = None
    tol: Optional[float] = None
    grid: dict = field(default_factory=dict)
    rows: List[tuple] = field(default_factory=list, repr=False)

    def record(self, index: int, point: tuple, defect: float, scale: float = 0.0, ratio=None):
        self.samples_checked += 1
        rel = defect / (1.0 + scale)
        self.rows.append((index, point, defect, rel, ratio))
        if self.argmax_index is None or defect > self.max_defect:
            self.max_defect = defect
            self.argmax_index = index
            self.argmax_point = point
        if rel > self.max_relative:
            self.max_relative = rel
        if ratio is not None and (self.max_ratio is None or ratio > self.max_ratio):
            self.max_ratio = ratio

    @property
    def passed(self) -> Optional[bool]:
        if self.tol is None:
            return None
        return self.max_relative <= self.tol

    def to_dict(self) -> dict:
        return {
            "kind": "defect",
            "label": self.label,
            "max_defect": self.max_defect,
            "max_relative": self.max_relative,
            "max_ratio": self.max_ratio,
            "argmax_index": self.argmax_index,
            "argmax_point": None if self.argmax_point is None else [_coords(p) for p in self.argmax_point],
            "samples_checked": self.samples_checked,
            "tol": self.tol,
            "pass": self.passed,
            "grid": self.grid,
        }

    def csv_rows(self):
        arity = len(self.rows[0][1]) if self.rows else 0
        dim = len(self.rows[0][1][0]) if self.rows else 0
        header = ["index"]
        for a in "xyz"[:arity]:
            for k in range(dim):
                header += [f"{a}{k}_re", f"{a}{k}_im"]
        header += ["defect", "relative", "ratio"]
        out = []
        for index, point, defect, rel, ratio in self.rows:
            row = [index]
            for p in point:
                for c in p:
                    row += [c.real, c.imag]
            out.append(row + [defect, rel, ratio])
        return header, out


def _coords(p) -> list:
    return [[c.real, c.imag] for c in np.asarray(p)]


def _describe(grid) -> dict:
    return grid.describe() if hasattr(grid, "describe") else {}


def residual_sup(f, j: int, rho, grid, control=None) -> DefectReport:
    """Largest ||E^j f|| over the grid's triples.

    With a control, also tracks the worst ratio ||E^j f|| / control, skipping
    triples where the control is below 1e-300.
    """
    A = f.algebra
    rep = DefectReport(f"residual_j{j}", grid=_describe(grid))
    for i, (x, y, z) in enumerate(grid.triples(A)):
        e = A.norm(residual(f, j, rho, x, y, z))
        ratio = None
        if control is not None:
            c = control(A, x, y, z)
            if c >= RATIO_FLOOR:
                ratio = e / c
        rep.record(i, (x, y, z), e, ratio=ratio)
    return rep


# --- proof-chain specialisations --------------------------------------------

IDENTITIES = {
    "a": "zero_zero_z",
    "b": "odd_pair",
    "c": "even_pair",
    "d": "origin_j1",
    "e": "origin_j2",
}


def sampled_parity_witness(f, parity: str, points, tol: float):
    """First grid point where f breaks ``parity`` beyond ``tol``, else None."""
    A = f.algebra
    sign = -1 if parity == "odd" else 1
    for i, x in enumerate(points):
        fx = f(x)
        gap = A.norm(f(-x) - sign * fx)
        if gap > tol * (1 + A.norm(fx)):
            return i, x, gap
    return None


def _require_parity(f, parity: str, points, tol: float):
    if f.parity != parity:
        raise ParityError(f"identity needs an {parity} handle, declared parity is {f.parity!r}")
    hit = sampled_parity_witness(f, parity, points, tol)
    if hit is not None:
        i, x, gap = hit
        raise ParityError(
            f"handle declared {parity} but f(-x) differs by {gap:.3g} at grid point {i}",
            witness=x,
            value=gap,
        )


def _require_origin(f, tol: float):
    f0 = f.algebra.norm(f(f.algebra.zero()))
    if f0 > tol:
        raise PreconditionError(f"identity needs f(0) = 0, got ||f(0)|| = {f0:.3g}", value=f0)


def verify_specialization(identity: str, f, rho=DEFAULT_RHO, grid=None, tol: float = 1e-9) -> DefectReport:
    """Check one of the substitutions used to solve E^j f = 0.

    ``identity`` is ``a``..``e`` or its long name:

    a. zero_zero_z  E^1 f(0,0,z) = 3 f(z/3) - f(z)          (f(0) = 0)
    b. odd_pair     E^1 f(0,y,-y) = 2 [f(y) - 2 f(y/2)]      (f odd)
    c. even_pair    E^2 f(x,0,-x) = 2 [f(x) - 4 f(x/2)]      (f even, f(0) = 0)
    d. origin_j1    E^1 f(0,0,0) = 2 f(0)
    e. origin_j2    E^2 f(0,0,0) = -rho f(0)

    The report passes when every relative violation is within ``tol``.
    """
    ident = IDENTITIES.get(identity, identity)
    if ident not in IDENTITIES.values():
        raise ValueError(f"unknown identity {identity!r}")
    rho = check_rho(rho)
    A = f.algebra
    zero = A.zero()
    nrm = A.norm
    rep = DefectReport(f"specialization_{ident}", tol=tol, grid=_describe(grid) if grid else {})

    if ident in ("origin_j1", "origin_j2"):
        f0 = f(zero)
        if ident == "origin_j1":
            lhs, rhs = residual(f, 1, rho, zero, zero, zero), 2 * f0
        else:
            lhs, rhs = residual(f, 2, rho, zero, zero, zero), -rho * f0
        rep.record(0, (zero,), nrm(lhs - rhs), max(nrm(lhs), nrm(rhs), nrm(f0)))
        return rep

    points = grid.points(A)
    if ident == "zero_zero_z":
        _require_origin(f, tol)
    elif ident == "odd_pair":
        _require_parity(f, "odd", points, tol)
    else:
        _require_parity(f, "even", points, tol)
        _require_origin(f, tol)

    for i, p in enumerate(points):
        if ident == "zero_zero_z":
            lhs = residual(f, 1, rho, zero, zero, p)
            a, b = f(p / 3), f(p)
            rhs = 3 * a - b
        elif ident == "odd_pair":
            lhs = residual(f, 1, rho, zero, p, -p)
            a, b = f(p), f(p / 2)
            rhs = 2 * (a - 2 * b)
        else:
            lhs = residual(f, 2, rho, p, zero, -p)
            a, b = f(p), f(p / 2)
            rhs = 2 * (a - 4 * b)
        scale = max(nrm(lhs), nrm(rhs), nrm(a), nrm(b))
        rep.record(i, (p,), nrm(lhs - rhs), scale)
    return rep


# --- structural defects ------------------------------------------------------

def j_mapping_defect(f, j: int, grid) -> DefectReport:
    """Additive (j=1) or quadratic (j=2) defect over the grid's pairs."""
    j = check_j(j)
    A = f.algebra
    nrm = A.norm
    rep = DefectReport(f"j_mapping_defect_j{j}", grid=_describe(grid))
    for i, (x, y) in enumerate(grid.pairs(A)):
        fx, fy, fs = f(x), f(y), f(x + y)
        if j == 1:
            d = fs - fx - fy
            scale = max(nrm(fs), nrm(fx), nrm(fy))
        else:
            fd = f(x - y)
            d = fs + fd - 2 * fx - 2 * fy
            scale = max(nrm(fs), nrm(fd), nrm(fx), nrm(fy))
        rep.record(i, (x, y), nrm(d), scale)
    return rep


def hom_residual(f, grid) -> DefectReport:
    """||f(xyz) - f(x) f(y) f(z)|| with the ternary product on both sides."""
    A = f.algebra
    nrm = A.norm
    rep = DefectReport("hom_residual", grid=_describe(grid))
    for i, (x, y, z) in enumerate(grid.triples(A)):
        fx, fy, fz = f(x), f(y), f(z)
        lhs = f(A.tproduct(x, y, z))
        rhs = A.tproduct(fx, fy, fz)
        rep.record(i, (x, y, z), nrm(lhs - rhs), max(nrm(lhs), nrm(fx) * nrm(fy) * nrm(fz)))
    return rep


def homder_residual(D, h, j: int, grid) -> DefectReport:
    """Leibniz-type defect of D relative to h, powers of h taken to order j."""
    j = check_j(j)
    A = D.algebra
    if h.algebra != A:
        raise ValueError("D and h must act on the same algebra")
    if j == 2 and not A.binary_product:
        raise PreconditionError(f"j = 2 needs a binary product, {A.name} has none")
    T = A.tproduct
    nrm = A.norm

    def pw(v):
        return v if j == 1 else A.bproduct(v, v)

    rep = DefectReport(f"homder_residual_j{j}", grid=_describe(grid))
    for i, (x, y, z) in enumerate(grid.triples(A)):
        dx, dy, dz = D(x), D(y), D(z)
        hx, hy, hz = pw(h(x)), pw(h(y)), pw(h(z))
        lhs = D(T(x, y, z))
        t1 = T(dx, hy, hz)
        t2 = T(hx, dy, hz)
        t3 = T(hx, hy, dz)
        d = lhs - t1 - t2 - t3
        scale = max(nrm(lhs), nrm(t1), nrm(t2), nrm(t3))
        rep.record(i, (x, y, z), nrm(d), scale)
    return rep
