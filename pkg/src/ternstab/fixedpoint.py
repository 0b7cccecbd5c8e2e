"""Contraction machinery: the Diaz-Margolis iteration and the direct method.

The direct method builds an exact j-mapping from an approximate one as the
pointwise limit of 2^{jn} f(x / 2^n), i.e. the orbit of f under the halving
operator Q_j g(x) = 2^j g(x/2). Distances between handles use the weighted
sup metric d_j(g, h) = sup ||g(x) - h(x)|| / delta(...), which may be +inf
(plain ``math.inf`` plays that role throughout).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import DivergenceError, InadmissibleError, PreconditionError
from .funceq import check_j

DEFAULT_TOL = 1e-12
DEFAULT_NMAX = 200
DENOM_FLOOR = 1e-300
RATIO_SLACK = 1e-9


@dataclass(frozen=True)
class ControlFunction:
    """A nonnegative control on triples.

    ``family`` is ``"power"`` (s (||x||^r + ||y||^r + ||z||^r)) or
    ``"constant"`` (c everywhere). ``role`` is ``"delta"`` for the residual
    control or ``"sigma"`` for the homomorphism control, which must contract
    by 2^{3j} instead of 2^j under halving.
    """

    family: str = "power"
    s: float = 0.0
    r: float = 2.0
    c: float = 0.0
    role: str = "delta"

    def __post_init__(self):
        if self.family not in ("power", "constant"):
            raise ValueError(f"unknown control family {self.family!r}")
        if self.role not in ("delta", "sigma"):
            raise ValueError(f"unknown control role {self.role!r}")
        if self.s < 0 or self.c < 0:
            raise ValueError("control parameters must be nonnegative")

    @classmethod
    def power(cls, s, r, role="delta"):
        return cls("power", s=float(s), r=float(r), role=role)

    @classmethod
    def constant(cls, c, role="delta"):
        return cls("constant", c=float(c), role=role)

    def at_norms(self, a: float, b: float, c: float) -> float:
        if self.family == "constant":
            return self.c
        return self.s * (a**self.r + b**self.r + c**self.r)

    def __call__(self, algebra, x, y, z) -> float:
        return self.at_norms(algebra.norm(x), algebra.norm(y), algebra.norm(z))

    def structured(self, algebra, x, j: int) -> float:
        """delta(0, x, -x) for j = 1 and delta(x, 0, -x) for j = 2."""
        n = algebra.norm(x)
        if j == 1:
            return self.at_norms(0.0, n, n)
        return self.at_norms(n, 0.0, n)

    def exponent(self, j: int) -> int:
        return j if self.role == "delta" else 3 * j

    def k_analytic(self, j: int) -> Optional[float]:
        if self.family != "power":
            return None
        return 2.0 ** (self.exponent(j) - self.r)

    def to_dict(self) -> dict:
        if self.family == "constant":
            return {"family": "constant", "c": self.c, "role": self.role}
        return {"family": "power", "s": self.s, "r": self.r, "role": self.role}

    @classmethod
    def from_dict(cls, d: dict, role: str = None) -> "ControlFunction":
        role = role or d.get("role", "delta")
        if d.get("family", "power") == "constant":
            return cls.constant(d["c"], role)
        return cls.power(d["s"], d["r"], role)


@dataclass
class ContractionEstimate:
    k_hat: float
    k_analytic: Optional[float]
    exponent: int
    samples: int

    @property
    def admissible(self) -> bool:
        return self.k_hat < 1

    def to_dict(self) -> dict:
        return {
            "k_hat": self.k_hat,
            "k_analytic": self.k_analytic,
            "exponent": self.exponent,
            "samples": self.samples,
            "admissible": self.admissible,
        }


@dataclass
class ConvergenceCertificate:
    """Trace of one fixed-point run.

    ``increments[n]`` is the distance between the n-th and (n+1)-th iterates;
    ``n_steps`` is the index of the last increment recorded, so a start that
    is already fixed converges at step 0.
    """

    n_steps: int
    increments: List[float]
    limit: object
    aposteriori_bound: float
    converged: bool
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        lim = self.limit
        if isinstance(lim, np.ndarray):
            lim = [[c.real, c.imag] for c in lim]
        elif isinstance(lim, complex):
            lim = [lim.real, lim.imag]
        return {
            "n_steps": self.n_steps,
            "increments": list(self.increments),
            "limit": lim,
            "aposteriori_bound": self.aposteriori_bound,
            "converged": self.converged,
            "flags": list(self.flags),
        }


def diaz_margolis_iterate(
    F: Callable,
    start,
    metric: Callable,
    L: float,
    n_max: int = DEFAULT_NMAX,
    tol: float = DEFAULT_TOL,
) -> ConvergenceCertificate:
    """Iterate a strict contraction with Lipschitz constant ``L`` from ``start``.

    Stops at the first increment d(F^n s, F^{n+1} s) <= tol, or after
    ``n_max`` increments. The a-posteriori bound d(s, F(s)) / (1 - L) holds
    for the distance from ``start`` to the fixed point. Observed step ratios
    above L are flagged, not raised.
    """
    if not 0 < L < 1:
        raise InadmissibleError(f"Lipschitz constant must lie in (0, 1), got {L!r}")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    flags = []
    increments = []
    cur = start
    converged = False
    for n in range(n_max):
        nxt = F(cur)
        inc = float(metric(cur, nxt))
        if not math.isfinite(inc):
            raise DivergenceError(f"infinite increment at step {n}", step=n)
        if increments and increments[-1] > 0 and inc > (L + RATIO_SLACK) * increments[-1]:
            flags.append(f"contraction violated at step {n}: ratio {inc / increments[-1]:.6g} > L")
        increments.append(inc)
        cur = nxt
        if inc <= tol:
            converged = True
            break
    return ConvergenceCertificate(
        n_steps=len(increments) - 1,
        increments=increments,
        limit=cur,
        aposteriori_bound=increments[0] / (1 - L),
        converged=converged,
        flags=flags,
    )


def direct_method_point(
    f,
    j: int,
    x,
    n_max: int = DEFAULT_NMAX,
    tol: float = DEFAULT_TOL,
    lipschitz: Optional[float] = None,
) -> ConvergenceCertificate:
    """Follow a_n = 2^{jn} f(x / 2^n) until ||a_{n+1} - a_n|| <= tol.

    Without ``lipschitz`` the a-posteriori bound is the sum of increments (a
    triangle-inequality bound on ||a_0 - limit||); with it, the geometric
    bound increments[0] / (1 - L).
    """
    j = check_j(j)
    if n_max < 1 or tol <= 0:
        raise ValueError("need n_max >= 1 and tol > 0")
    A = f.algebra
    A.check(x)
    f0 = A.norm(f(A.zero()))
    if f0 != 0:
        raise PreconditionError(f"direct method needs f(0) = 0, got ||f(0)|| = {f0:.3g}", value=f0)

    scale = 2**j
    with np.errstate(over="ignore", invalid="ignore"):
        prev = f(x)
    if not np.all(np.isfinite(prev)):
        raise DivergenceError("non-finite value at step 0", step=0, point=x)
    increments = []
    converged = False
    arg, weight = x, 1.0
    for n in range(n_max):
        arg = arg / 2
        weight = weight * scale
        with np.errstate(over="ignore", invalid="ignore"):
            cur = weight * f(arg)
        if not np.all(np.isfinite(cur)):
            raise DivergenceError(f"non-finite iterate at step {n + 1}", step=n + 1, point=x)
        inc = A.norm(cur - prev)
        increments.append(inc)
        prev = cur
        if inc <= tol:
            converged = True
            break
    if lipschitz is not None and 0 < lipschitz < 1:
        bound = increments[0] / (1 - lipschitz)
    else:
        bound = math.fsum(increments)
    return ConvergenceCertificate(len(increments) - 1, increments, prev, bound, converged)


class HalvingOperator:
    """Q_j g : x -> 2^j g(x/2)."""

    def __init__(self, g, j: int):
        self.g = g
        self.j = check_j(j)
        self.algebra = g.algebra
        self.parity = getattr(g, "parity", "none")

    def __call__(self, x):
        return 2**self.j * self.g(x / 2)


class ExtractedMapping:
    """The direct-method limit h(x) = lim 2^{jn} f(x/2^n), evaluated lazily.

    Certificates are cached per point, keyed by the point's bytes.
    """

    def __init__(self, f, j: int, n_max: int = DEFAULT_NMAX, tol: float = DEFAULT_TOL, lipschitz=None):
        self.f = f
        self.j = check_j(j)
        self.algebra = f.algebra
        self.parity = getattr(f, "parity", "none")
        self.n_max, self.tol, self.lipschitz = n_max, tol, lipschitz
        self.certificates = {}

    def certificate(self, x) -> ConvergenceCertificate:
        key = (np.asarray(x) + 0.0).tobytes()
        cert = self.certificates.get(key)
        if cert is None:
            cert = direct_method_point(self.f, self.j, x, self.n_max, self.tol, self.lipschitz)
            self.certificates[key] = cert
        return cert

    def __call__(self, x):
        return self.certificate(x).limit

    @property
    def all_converged(self) -> bool:
        return all(c.converged for c in self.certificates.values())

    @property
    def max_steps(self) -> int:
        return max((c.n_steps + 1 for c in self.certificates.values()), default=0)


def generalized_distance(g, h, j: int, delta: ControlFunction, grid, tol: float = DEFAULT_TOL) -> float:
    """Grid surrogate of d_j(g, h) = inf{alpha : ||g - h|| <= alpha delta(...)}.

    Points where the structured control value is below 1e-300 contribute +inf
    unless g and h agree there (within tol (1 + ||g||)), in which case they
    are skipped.
    """
    j = check_j(j)
    A = g.algebra
    points = grid.points(A)
    if not points:
        raise ValueError("empty grid")
    worst = 0.0
    for x in points:
        gx = g(x)
        gap = A.norm(gx - h(x))
        denom = delta.structured(A, x, j)
        if denom < DENOM_FLOOR:
            if gap > tol * (1 + A.norm(gx)):
                return math.inf
            continue
        worst = max(worst, gap / denom)
    return worst


def contraction_constant_estimate(delta: ControlFunction, j: int, grid, algebra) -> ContractionEstimate:
    """Sampled sup of 2^e delta(x/2, y/2, z/2) / delta(x, y, z), e = j or 3j."""
    j = check_j(j)
    e = delta.exponent(j)
    k_hat = -math.inf
    used = 0
    for x, y, z in grid.triples(algebra):
        den = delta(algebra, x, y, z)
        if den < DENOM_FLOOR:
            continue
        num = delta(algebra, x / 2, y / 2, z / 2)
        k_hat = max(k_hat, 2**e * num / den)
        used += 1
    if not used:
        raise PreconditionError("control vanishes on every grid triple; no contraction estimate")
    return ContractionEstimate(k_hat, delta.k_analytic(j), e, used)


def stability_bound(k: float, delta_value: float) -> float:
    """k / (2 (1 - k)) * delta_value."""
    if not 0 < k < 1:
        raise InadmissibleError(f"contraction constant must lie in (0, 1), got {k!r}")
    if delta_value < 0:
        raise ValueError("control value must be nonnegative")
    return k / (2 * (1 - k)) * delta_value


@dataclass
class ExtractionReport:
    j: int
    grid: dict
    points: list
    certificates: List[ConvergenceCertificate]

    @property
    def passed(self) -> bool:
        return all(c.converged for c in self.certificates)

    def to_dict(self) -> dict:
        return {
            "kind": "extraction",
            "j": self.j,
            "grid": self.grid,
            "pass": self.passed,
            "points": [
                {"index": i, "point": [[c.real, c.imag] for c in p], "certificate": cert.to_dict()}
                for i, (p, cert) in enumerate(zip(self.points, self.certificates))
            ],
        }

    def csv_rows(self):
        header = ["index", "n_steps", "last_increment", "aposteriori_bound", "converged"]
        rows = [
            [i, c.n_steps, c.increments[-1], c.aposteriori_bound, c.converged]
            for i, c in enumerate(self.certificates)
        ]
        return header, rows


def extract_on_grid(f, j: int, grid, n_max: int = DEFAULT_NMAX, tol: float = DEFAULT_TOL) -> ExtractionReport:
    """Run the direct method at every grid point."""
    points = grid.points(f.algebra)
    certs = [direct_method_point(f, j, x, n_max, tol) for x in points]
    return ExtractionReport(j, grid.describe(), points, certs)
