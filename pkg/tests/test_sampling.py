import numpy as np

from ternstab import AlgebraInstance, ExplicitGrid, SampleGrid


def test_samples_reproducible(algebra):
    a = SampleGrid(seed=5, count=12).samples(algebra)
    b = SampleGrid(seed=5, count=12).samples(algebra)
    assert all(x.tobytes() == y.tobytes() for x, y in zip(a, b))
    c = SampleGrid(seed=6, count=12).samples(algebra)
    assert a[0].tobytes() != c[0].tobytes()


def test_samples_inside_band(algebra):
    for x in SampleGrid(seed=1, count=40, radius_band=(0.5, 2.0)).samples(algebra):
        assert 0.5 * (1 - 1e-12) <= algebra.norm(x) <= 2.0 * (1 + 1e-12)


def test_structured_points_included():
    A = AlgebraInstance.parse("complex")
    grid = SampleGrid(seed=2, count=4)
    pts = grid.points(A)
    x = grid.samples(A)[0]
    keys = {p.tobytes() for p in pts}
    for want in (A.zero(), x / 2, x / 4, -x):
        assert want.tobytes() in keys
    triples = grid.triples(A)
    assert any(not np.any(t[0]) and not np.any(t[1]) and not np.any(t[2]) for t in triples)
    assert any(not np.any(t[0]) and np.array_equal(t[2], -t[1]) and np.any(t[1]) for t in triples)


def test_unstructured_grid_sizes(algebra):
    grid = SampleGrid(seed=3, count=7, includes_structured=False)
    assert len(grid.points(algebra)) == 7
    assert len(grid.triples(algebra)) == 7
    assert len(grid.pairs(algebra)) == 7


def test_describe_round_trips():
    d = SampleGrid(seed=9, count=3).describe()
    assert d == {"seed": 9, "count": 3, "band": [0.25, 8.0], "structured": True}


def test_explicit_grid_cycles_triples():
    A = AlgebraInstance.parse("complex")
    pts = [np.array([1 + 0j]), np.array([2 + 0j]), np.array([3 + 0j])]
    triples = ExplicitGrid(pts).triples(A)
    assert [t[1][0] for t in triples] == [2, 3, 1]
