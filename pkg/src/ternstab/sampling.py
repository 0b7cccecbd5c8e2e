"""Seeded sample grids standing in for "for all x, y, z in X".

A grid is regenerated from its seed on demand, so two grids with equal fields
produce bit-identical points for the same algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from .algebra import AlgebraInstance

# independent streams per use of the grid
_SAMPLES, _TRIPLES, _AXIOMS = 0, 1, 2

DYADIC_LEVELS = 2


def _stream(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag]))


def random_element(rng: np.random.Generator, algebra: AlgebraInstance, band) -> np.ndarray:
    """Random direction rescaled to a norm drawn log-uniformly from ``band``."""
    lo, hi = band
    dim = algebra.dimension
    g = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    if lo > 0:
        target = math.exp(rng.uniform(math.log(lo), math.log(hi)))
    else:
        target = rng.uniform(lo, hi)
    return g * (target / algebra.norm(g))


@dataclass(frozen=True)
class SampleGrid:
    seed: int = 0
    count: int = 64
    radius_band: Tuple[float, float] = (0.25, 8.0)
    includes_structured: bool = True

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("grid count must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("grid seed must be a 64-bit unsigned integer")
        lo, hi = self.radius_band
        if not 0 <= lo <= hi:
            raise ValueError(f"bad radius band {self.radius_band!r}")
        object.__setattr__(self, "radius_band", (float(lo), float(hi)))

    def describe(self) -> dict:
        return {
            "seed": self.seed,
            "count": self.count,
            "band": list(self.radius_band),
            "structured": self.includes_structured,
        }

    def samples(self, algebra: AlgebraInstance) -> List[np.ndarray]:
        return list(_samples(self, algebra))

    def points(self, algebra: AlgebraInstance) -> List[np.ndarray]:
        """Random samples, then 0, dyadic halvings x/2^m and negations -x."""
        return list(_points(self, algebra))

    def triples(self, algebra: AlgebraInstance) -> List[tuple]:
        return list(_triples(self, algebra))

    def pairs(self, algebra: AlgebraInstance) -> List[tuple]:
        return [(x, y) for x, y, _ in _triples(self, algebra)]

    def axiom_tuples(self, algebra: AlgebraInstance):
        """Yield (x, y, z, w, v, a, b): five elements and two complex scalars."""
        rng = _stream(self.seed, _AXIOMS)
        for x, y, z in _triples(self, algebra):
            w = random_element(rng, algebra, self.radius_band)
            v = random_element(rng, algebra, self.radius_band)
            a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            yield x, y, z, w, v, complex(a), complex(b)


@lru_cache(maxsize=64)
def _samples(grid: SampleGrid, algebra: AlgebraInstance) -> tuple:
    rng = _stream(grid.seed, _SAMPLES)
    return tuple(random_element(rng, algebra, grid.radius_band) for _ in range(grid.count))


@lru_cache(maxsize=64)
def _points(grid: SampleGrid, algebra: AlgebraInstance) -> tuple:
    base = _samples(grid, algebra)
    if not grid.includes_structured:
        return base
    out = list(base)
    out.append(algebra.zero())
    for m in range(1, DYADIC_LEVELS + 1):
        out.extend(x / 2**m for x in base)
    out.extend(-x for x in base)
    return tuple(out)


@lru_cache(maxsize=64)
def _triples(grid: SampleGrid, algebra: AlgebraInstance) -> tuple:
    rng = _stream(grid.seed, _TRIPLES)
    band = grid.radius_band
    rand = [
        tuple(random_element(rng, algebra, band) for _ in range(3))
        for _ in range(grid.count)
    ]
    if not grid.includes_structured:
        return tuple(rand)
    zero = algebra.zero()
    out = list(rand)
    out.append((zero, zero, zero))
    out.extend((x / 2, y / 2, z / 2) for x, y, z in rand)
    for x in _samples(grid, algebra):
        out.append((zero, x, -x))
        out.append((x, zero, -x))
        out.append((zero, zero, x))
    return tuple(out)


class ExplicitGrid:
    """A grid given point by point, for pinned examples and edge cases.

    If ``triples`` is omitted, consecutive cyclic triples of ``points`` are used.
    """

    def __init__(self, points: Sequence, triples: Sequence = None, scalars=(1.5 - 0.5j, -0.25 + 2j)):
        self._points = [np.asarray(p, dtype=complex).ravel() for p in points]
        if not self._points and not triples:
            raise ValueError("explicit grid must not be empty")
        if triples is None:
            n = len(self._points)
            triples = [
                (self._points[i], self._points[(i + 1) % n], self._points[(i + 2) % n])
                for i in range(n)
            ]
        self._triples = [tuple(np.asarray(p, dtype=complex).ravel() for p in t) for t in triples]
        if not self._points:
            self._points = [p for t in self._triples for p in t]
        self._scalars = scalars
        self.count = len(self._points)

    def describe(self) -> dict:
        return {"explicit": True, "points": len(self._points), "triples": len(self._triples)}

    def points(self, algebra):
        for i, p in enumerate(self._points):
            algebra.check(p, f"point {i}")
        return list(self._points)

    def samples(self, algebra):
        return self.points(algebra)

    def triples(self, algebra):
        for t in self._triples:
            for p in t:
                algebra.check(p)
        return list(self._triples)

    def pairs(self, algebra):
        return [(x, y) for x, y, _ in self.triples(algebra)]

    def axiom_tuples(self, algebra):
        a, b = self._scalars
        for x, y, z in self.triples(algebra):
            yield x, y, z, y, x, a, b
