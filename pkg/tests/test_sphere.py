import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zfnet.sphere import (
    PointCloud,
    PointsFileError,
    Rotation,
    SpherePoint,
    antipodal_closure,
    cap_measure,
    generate,
    geodesic,
    hemisphere_fibonacci,
    load_points,
    mesh_norm,
    product_nodes,
    prune_close,
    rotate,
    save_points,
    separation,
    surface_area,
)

E1, E2 = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])


def test_geodesic_examples():
    assert geodesic(E1, E1) == 0.0
    assert geodesic(E1, -E1) == pytest.approx(math.pi)
    assert geodesic(SpherePoint(E1), SpherePoint(E2)) == pytest.approx(math.pi / 2)
    with pytest.raises(ValueError):
        geodesic(E1, np.ones(4))


def test_surface_area():
    assert surface_area(1) == pytest.approx(2 * math.pi, rel=1e-15)
    assert surface_area(2) == pytest.approx(4 * math.pi, rel=1e-15)
    assert surface_area(3) == pytest.approx(2 * math.pi**2, rel=1e-15)


def test_cap_measure():
    assert cap_measure(2, math.pi) == pytest.approx(4 * math.pi)
    assert cap_measure(2, 0.3) == pytest.approx(2 * math.pi * (1 - math.cos(0.3)))


def test_sphere_point_normalizes():
    p = SpherePoint([3.0, 4.0])
    assert np.allclose(p.coords, [0.6, 0.8]) and p.q == 1
    with pytest.raises(ValueError):
        SpherePoint([0.0, 0.0, 0.0])


def test_fibonacci_mesh_norm():
    c = generate(2, "fibonacci-s2", 400)
    assert len(c) == 400 and np.allclose(np.linalg.norm(c.points, axis=1), 1.0)
    d = mesh_norm(c)
    assert d <= 0.18
    # the spiral covers with d sqrt(M) close to 2.7 at every size
    c4 = generate(2, "fibonacci-s2", 1600)
    assert mesh_norm(c4) * 40 == pytest.approx(d * 20, rel=0.1)


def test_single_and_pair():
    one = generate(2, "uniform-random", 1, seed=4)
    assert len(one) == 1 and mesh_norm(one) == pytest.approx(math.pi)
    pair = PointCloud(np.array([[0, 0, 1.0], [0, 0, -1.0]]))
    assert mesh_norm(pair) == pytest.approx(math.pi / 2, abs=1e-12)
    assert separation(pair) == pytest.approx(math.pi)


def test_generator_rules():
    a = generate(3, "uniform-random", 50, seed=1)
    b = generate(3, "uniform-random", 50, seed=1)
    assert np.array_equal(a.points, b.points)
    with pytest.raises(ValueError):
        generate(2, "uniform-random", 5)
    with pytest.raises(ValueError):
        generate(3, "fibonacci-s2", 5)
    with pytest.raises(ValueError):
        generate(2, "lattice", 5)
    t = generate(2, "tensor-design", 30)
    assert len(t) >= 30


def test_separation_duplicate():
    c = PointCloud(np.array([E1, E1, E2]))
    assert separation(c) == 0.0


def test_prune_examples():
    c = generate(2, "fibonacci-s2", 400)
    p = prune_close(c)
    assert p is c
    eta, delta = separation(p), mesh_norm(p)
    assert eta <= 2 * delta <= 4 * eta
    dup = PointCloud(np.concatenate([c.points, c.points[:1]]))
    assert len(prune_close(dup)) == 400


def test_prune_random():
    c = generate(2, "uniform-random", 1000, seed=7)
    p = prune_close(c)
    eta, delta = separation(p), mesh_norm(p)
    assert eta <= 2 * delta <= 4 * eta


@given(st.integers(0, 10_000))
def test_rotation_isometry(seed):
    U = Rotation.random(2, seed)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((5, 3))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    Y = rotate(X, U)
    assert np.allclose(Y @ Y.T, X @ X.T, atol=1e-13)
    assert np.linalg.det(U.matrix) == pytest.approx(1.0)


def test_rotation_types():
    U = Rotation.identity(2)
    c = generate(2, "fibonacci-s2", 20)
    assert np.array_equal(rotate(c, U).points, c.points)
    assert isinstance(rotate(SpherePoint(E1), Rotation.random(2, 3)), SpherePoint)
    with pytest.raises(ValueError):
        Rotation(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(ValueError):
        Rotation(np.ones((3, 3)))


def test_antipodal_sets():
    h = PointCloud(hemisphere_fibonacci(101))
    assert len(h) == 102 and h.is_antipodal()
    p = h.antipodal_pairs()
    assert np.allclose(h.points[p], -h.points)
    assert not generate(2, "fibonacci-s2", 11).is_antipodal()
    assert PointCloud(antipodal_closure(E1[None])).is_antipodal()


@pytest.mark.parametrize("q,m", [(1, 3), (2, 4), (3, 3)])
def test_product_nodes_exact(q, m):
    pts, w = product_nodes(q, m)
    assert w.sum() == pytest.approx(surface_area(q), rel=1e-13)
    # second moment of one coordinate is omega_q / (q+1)
    assert (w * pts[:, 0] ** 2).sum() == pytest.approx(surface_area(q) / (q + 1), rel=1e-12)


def test_points_roundtrip(tmp_path):
    c = generate(2, "uniform-random", 17, seed=2)
    f = tmp_path / "p.csv"
    save_points(f, c)
    back = load_points(f)
    assert np.allclose(back.points, c.points, rtol=0, atol=1e-15)


def test_points_file_errors(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("# header\n0,0,1\n1,zz,0\n")
    with pytest.raises(PointsFileError, match=":3"):
        load_points(f)
    f.write_text("0,0,1\n0,0,2\n")
    with pytest.raises(PointsFileError, match=":2"):
        load_points(f)
    f.write_text("0,0,1\n0,1\n")
    with pytest.raises(PointsFileError, match=":2"):
        load_points(f)
