"""Polyhedral cones and minimum-norm points of convex hulls.

Both pieces work in Euclidean coordinates; callers renormalize into the
space's own norm where that matters.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import nnls

from .errors import InvalidInput

_FACET_TOL = 1e-10
_MAX_FACES = 4096


class PolyhedralCone:
    """Cone generated by the rows of ``generators``.

    When the cone is full-dimensional its inward facet normals (unit, l2) are
    enumerated once, which gives an exact signed distance to the boundary
    for interior points.
    """

    def __init__(self, generators):
        G = np.atleast_2d(np.asarray(generators, dtype=float))
        if G.shape[0] == 0:
            raise InvalidInput("a generated cone needs at least one generator")
        if np.any(np.linalg.norm(G, axis=1) == 0):
            raise InvalidInput("cone generators must be nonzero")
        self.generators = G
        self.dim = G.shape[1]
        self.rank = int(np.linalg.matrix_rank(G))
        self.full_dim = self.rank == self.dim
        self.normals, self.facet_members = self._facets() if self.full_dim else (None, [])

    def _facets(self):
        G = self.generators
        d = self.dim
        unit = G / np.linalg.norm(G, axis=1)[:, None]
        if d == 1:
            signs = np.sign(G[:, 0])
            if np.all(signs > 0):
                return np.array([[1.0]]), [np.arange(len(G))]
            if np.all(signs < 0):
                return np.array([[-1.0]]), [np.arange(len(G))]
            return np.zeros((0, 1)), []
        normals = []
        for idx in itertools.combinations(range(len(G)), d - 1):
            sub = unit[list(idx)]
            if np.linalg.matrix_rank(sub, tol=1e-9) < d - 1:
                continue
            n = np.linalg.svd(sub)[2][-1]
            s = unit @ n
            if np.all(s >= -_FACET_TOL):
                normals.append(n)
            elif np.all(s <= _FACET_TOL):
                normals.append(-n)
        uniq: list[np.ndarray] = []
        for n in normals:
            if not any(np.allclose(n, m, atol=1e-9) for m in uniq):
                uniq.append(n)
        N = np.array(uniq).reshape(-1, d)
        members = [np.flatnonzero(np.abs(unit @ n) <= 1e-9) for n in N]
        return N, members

    @property
    def pointed(self) -> bool:
        # pointed iff the origin is not in the hull of the normalized generators
        unit = self.generators / np.linalg.norm(self.generators, axis=1)[:, None]
        return min_norm_point(unit)[1] > 1e-9

    # -- distances ------------------------------------------------------------

    @property
    def _face_maps(self):
        """Least-squares maps onto the spans of independent generator subsets.

        The projection onto the cone lies in the cone of some linearly
        independent subset (Caratheodory), so the nearest nonnegative
        least-squares candidate over all such subsets is exact.
        """
        if not hasattr(self, "_faces"):
            G = self.generators
            m = len(G)
            total = sum(math.comb(m, k) for k in range(1, min(m, self.dim) + 1))
            faces = None
            if total <= _MAX_FACES:
                faces = []
                for k in range(1, min(m, self.dim) + 1):
                    for idx in itertools.combinations(range(m), k):
                        sub = G[list(idx)]
                        if np.linalg.matrix_rank(sub, tol=1e-10) == k:
                            faces.append((sub, np.linalg.pinv(sub.T)))
            self._faces = faces
        return self._faces

    def project(self, X) -> np.ndarray:
        """Euclidean projection of each row of ``X`` onto the cone."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        faces = self._face_maps
        if faces is None:
            out = np.empty_like(X)
            A = self.generators.T
            for i, x in enumerate(X):
                w, _ = nnls(A, x)
                out[i] = A @ w
            return out
        best = np.zeros_like(X)
        best_d = np.einsum("ij,ij->i", X, X)
        for sub, pinv in faces:
            W = X @ pinv.T
            ok = np.all(W >= -1e-12, axis=1)
            if not ok.any():
                continue
            P = np.maximum(W[ok], 0.0) @ sub
            r = X[ok] - P
            d = np.einsum("ij,ij->i", r, r)
            better = d < best_d[ok]
            rows = np.flatnonzero(ok)[better]
            best[rows] = P[better]
            best_d[rows] = d[better]
        return best

    def distance(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.linalg.norm(X - self.project(X), axis=1)

    def signed_distance(self, X) -> np.ndarray:
        """Depth inside (distance to the boundary), minus distance outside."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if not self.full_dim:
            return -self.distance(X)
        if len(self.normals) == 0:  # the whole space
            return np.full(len(X), np.inf)
        depth = (X @ self.normals.T).min(axis=1)
        out = depth.copy()
        outside = depth < 0
        if np.any(outside):
            out[outside] = -self.distance(X[outside])
        return out

    # -- sampling -------------------------------------------------------------

    def sample_directions(self, n: int, rng) -> np.ndarray:
        """Conic combinations of the generators; the generators come first."""
        G = self.generators
        m = len(G)
        W = rng.exponential(size=(n, m))
        # sparsify half the draws so faces get visited too
        sparse = rng.random((n, m)) < 0.3
        sparse[rng.random(n) < 0.5] = False
        W[sparse] = 0.0
        W[W.sum(axis=1) == 0, 0] = 1.0
        W[: min(n, m)] = np.eye(m)[: min(n, m)]
        D = W @ G
        return D / np.linalg.norm(D, axis=1)[:, None]

    def sample_boundary_directions(self, n: int, rng) -> np.ndarray:
        if not self.full_dim or len(self.facet_members) == 0:
            return self.sample_directions(n, rng)
        G = self.generators
        on_facet = np.unique(np.concatenate(self.facet_members))
        head = G[on_facet][:n]
        out = np.empty((n, self.dim))
        out[: len(head)] = head / np.linalg.norm(head, axis=1)[:, None]
        which = rng.integers(len(self.facet_members), size=n)
        for k in range(len(head), n):
            members = self.facet_members[which[k]]
            d = rng.exponential(size=len(members)) @ G[members]
            out[k] = d / np.linalg.norm(d)
        return out


def affine_min_norm(S: np.ndarray) -> np.ndarray:
    """Coefficients (summing to one) of the min-norm point of aff(rows of S)."""
    k = len(S)
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = S @ S.T
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:k]


def wolfe_min_norm(support, start, tol: float = 1e-12, max_iter: int = 500):
    """Wolfe's minimum-norm-point algorithm driven by a support oracle.

    ``support(x)`` must return ``(q, key)`` with ``q`` minimizing ``<x, q>``
    over the (implicit) point set and ``key`` a hashable identifier.

    Returns ``(x, gap, corral, weights)`` where ``gap`` bounds
    ``||x|| - dist(0, hull)`` from above.
    """
    q0, key0 = start
    S = [np.asarray(q0, float)]
    keys = [key0]
    lam = np.array([1.0])
    x = S[0].copy()
    gap = np.inf
    for _ in range(max_iter):
        nx = float(np.linalg.norm(x))
        if nx <= 1e-14:
            gap = 0.0
            break
        q, key = support(x)
        gap = (x @ x - x @ q) / nx
        scale = max(1.0, max(float(s @ s) for s in S))
        if x @ x - x @ q <= tol * scale or key in keys:
            break
        S.append(np.asarray(q, float))
        keys.append(key)
        lam = np.append(lam, 0.0)
        while True:
            A = np.array(S)
            alpha = affine_min_norm(A)
            if np.all(alpha > 1e-12):
                lam = alpha
                x = alpha @ A
                break
            neg = alpha <= 1e-12
            denom = lam[neg] - alpha[neg]
            ratios = np.where(denom > 0, lam[neg] / np.where(denom > 0, denom, 1.0), np.inf)
            theta = min(1.0, float(ratios.min()))
            lam = theta * alpha + (1 - theta) * lam
            keep = lam > 1e-12
            if keep.all():
                keep[int(np.argmin(lam))] = False
            S = [s for s, kk in zip(S, keep) if kk]
            keys = [k for k, kk in zip(keys, keep) if kk]
            lam = lam[keep] / lam[keep].sum()
            x = lam @ np.array(S)
    return x, max(gap, 0.0), np.array(S), lam


def min_norm_point(points) -> tuple[np.ndarray, float]:
    """Min-norm point of the convex hull of ``points`` and its l2 norm."""
    P = np.atleast_2d(np.asarray(points, dtype=float))

    def support(x):
        i = int(np.argmin(P @ x))
        return P[i], i

    i0 = int(np.argmin(np.linalg.norm(P, axis=1)))
    x, _, _, _ = wolfe_min_norm(support, (P[i0], i0))
    return x, float(np.linalg.norm(x))
