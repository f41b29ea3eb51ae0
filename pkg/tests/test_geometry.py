import itertools

import cvxpy as cp
import numpy as np
import pytest
from scipy.optimize import nnls

from crs.geometry import PolyhedralCone, min_norm_point, wolfe_min_norm
from crs.separation import hull_distance


def _qp_projection(G, x):
    w = cp.Variable(len(G), nonneg=True)
    cp.Problem(cp.Minimize(cp.sum_squares(G.T @ w - x))).solve(solver=cp.CLARABEL)
    return G.T @ w.value


def test_projection_matches_qp(rng):
    for _ in range(20):
        G = rng.standard_normal((4, 3))
        K = PolyhedralCone(G)
        X = rng.standard_normal((5, 3)) * 3
        P = K.project(X)
        for x, p in zip(X, P):
            q = _qp_projection(G, x)
            assert np.linalg.norm(x - p) == pytest.approx(np.linalg.norm(x - q), abs=1e-6)


def test_projection_on_nearly_parallel_generators():
    # a case where an active-set NNLS may stop early; face enumeration is exact
    G = np.array([[1.0, 1e-7], [1.0, -1e-7], [0.0, 1.0]])
    K = PolyhedralCone(G)
    x = np.array([3.0, -2.0])
    p = K.project(x)[0]
    q = _qp_projection(G, x)
    assert np.linalg.norm(x - p) <= np.linalg.norm(x - q) + 1e-7
    assert np.linalg.norm(x - p) <= np.linalg.norm(x - G.T @ nnls(G.T, x)[0]) + 1e-12


def test_orthant_facets_and_signed_distance():
    K = PolyhedralCone(np.eye(2))
    assert K.full_dim and K.pointed
    assert len(K.normals) == 2
    assert K.signed_distance([[1.0, 2.0]])[0] == pytest.approx(1.0)
    assert K.signed_distance([[-3.0, 4.0]])[0] == pytest.approx(-3.0)
    assert K.signed_distance([[-1.0, -1.0]])[0] == pytest.approx(-np.sqrt(2))


def test_non_pointed_cone():
    K = PolyhedralCone([[1, 0], [-1, 0], [0, 1]])
    assert not K.pointed


def test_min_norm_point_brute_force(rng):
    # oracle: minimum over all affine faces whose min-norm point is a convex combination
    for _ in range(30):
        P = rng.standard_normal((5, 2)) + rng.standard_normal(2) * 2
        _, d = min_norm_point(P)
        best = np.inf
        for k in (1, 2, 3):
            for idx in itertools.combinations(range(5), k):
                S = P[list(idx)]
                w = cp.Variable(k, nonneg=True)
                cp.Problem(cp.Minimize(cp.sum_squares(S.T @ w)), [cp.sum(w) == 1]).solve(solver=cp.CLARABEL)
                best = min(best, float(np.linalg.norm(S.T @ w.value)))
        assert d == pytest.approx(best, abs=1e-6)


def test_wolfe_reports_gap():
    P = np.array([[2.0, 1.0], [2.0, -1.0]])
    x, gap, corral, w = wolfe_min_norm(lambda v: (P[int(np.argmin(P @ v))], int(np.argmin(P @ v))), (P[0], 0))
    assert np.allclose(x, [2.0, 0.0])
    assert gap <= 1e-9
    assert w.sum() == pytest.approx(1.0)


def test_hull_distance_examples():
    d, w = hull_distance([[1.0, 0.0]], [[0.0, 0.0]])
    assert d == pytest.approx(1.0) and np.allclose(w, [1.0, 0.0])
    P = np.random.default_rng(0).standard_normal((6, 3))
    assert hull_distance(P, P).distance == 0.0


def test_hull_distance_orthant_chord():
    # the chord between the two unit directions has coordinate sum < 1, arc points >= 1
    th = np.linspace(0, np.pi / 2, 400)
    P = np.column_stack([np.cos(th), np.sin(th)])
    a = np.array([1, -0.2]) / np.hypot(1, -0.2)
    b = np.array([-0.2, 1]) / np.hypot(1, -0.2)
    Q = np.array([[0.0, 0.0], a, b])
    assert a.sum() == pytest.approx(0.7845, abs=1e-4)
    hd = hull_distance(P, Q)
    # brute-force oracle: the gap along (1,1)/sqrt2 between the chord and the arc
    assert hd.distance == pytest.approx((1 - a.sum()) / np.sqrt(2), abs=1e-6)
    assert np.min(P @ hd.witness) > np.max(Q @ hd.witness)
