"""Co-radiant sets and cones in R^n.

A co-radiant set ``C`` satisfies ``x in C, t >= 1  =>  t x in C``.  Each
representation below answers membership queries in batches through
``margins``: a signed slack that is positive inside, negative outside and
NaN when the query could not be decided.  Margins within ``GEOM_TOL`` of
zero are reported as boundary points; whether those belong to the set is
decided by the ``closed`` flag of the representation.

Cones are handled through their closures, so boundary directions always
count as members of a cone.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .errors import Inconclusive, InvalidInput, NoMemberFound
from .geometry import PolyhedralCone
from .space import GEOM_TOL, NormKind, Space, _lp_norm


class Verdict(enum.IntEnum):
    OUT = 0
    IN = 1
    BOUNDARY = 2
    UNKNOWN = 3


@dataclass(frozen=True)
class MembershipVerdict:
    status: Verdict
    margin: float
    closed: bool = True

    @property
    def is_member(self) -> bool:
        if self.status is Verdict.UNKNOWN:
            raise Inconclusive("membership could not be decided")
        return self.status is Verdict.IN or (self.status is Verdict.BOUNDARY and self.closed)


def classify(margins: np.ndarray, tol: float = GEOM_TOL) -> np.ndarray:
    m = np.asarray(margins, dtype=float)
    out = np.full(m.shape, int(Verdict.UNKNOWN))
    out[m > tol] = Verdict.IN
    out[m < -tol] = Verdict.OUT
    out[np.abs(m) <= tol] = Verdict.BOUNDARY
    return out


def _as_batch(space: Space, X) -> np.ndarray:
    return np.atleast_2d(space.point(X))


def _unit_rows(space: Space, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = _lp_norm(space.norm_kind, X)
    safe = np.where(n > 0, n, 1.0)
    return X / safe[:, None], n


def _ray_distance(space: Space, X: np.ndarray, g: np.ndarray, lo: float = 0.0) -> np.ndarray:
    """``min_{t >= lo} ||x - t g||`` for every row ``x`` of ``X`` (exact)."""
    kind = space.norm_kind
    if kind is NormKind.L2:
        t = np.maximum(lo, X @ g / (g @ g))
        return np.linalg.norm(X - t[:, None] * g, axis=1)
    # piecewise linear and convex in t: the minimum sits on a kink or at lo
    nz = np.flatnonzero(g)
    cands = [np.full(len(X), lo)] + [X[:, i] / g[i] for i in nz]
    if kind is NormKind.LINF:
        d = len(g)
        for i in range(d):
            for j in range(i + 1, d):
                for s in (1.0, -1.0):
                    den = g[i] - s * g[j]
                    if den != 0:
                        cands.append((X[:, i] - s * X[:, j]) / den)
    T = np.maximum(lo, np.stack(cands, axis=1))
    vals = _lp_norm(kind, X[:, None, :] - T[..., None] * g)
    return vals.min(axis=1)


def _bisect_boundary(space: Space, member, inside: np.ndarray, outside: np.ndarray, iters: int = 30):
    """Walk chords between member and non-member directions down to the boundary."""
    a = inside.copy()
    b = outside.copy()
    ok = np.linalg.norm(a + b, axis=1) > 1e-6
    a, b = a[ok], b[ok]
    for _ in range(iters):
        mid, _ = _unit_rows(space, a + b)
        m = member(mid)
        a[m] = mid[m]
        b[~m] = mid[~m]
    return a


_NORM_ARG = {NormKind.L1: 1, NormKind.L2: 2, NormKind.LINF: "inf"}


def _segment_min(dist, X: np.ndarray, iters: int = 80) -> np.ndarray:
    """``min_{0 <= mu <= 1} dist(mu x)`` for convex ``dist``, row-wise.

    Golden-section search; the distance to a convex set is convex along any
    line, so the bracket always keeps the minimizer.
    """
    inv = (np.sqrt(5.0) - 1.0) / 2.0
    a = np.zeros(len(X))
    b = np.ones(len(X))
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc = dist(c[:, None] * X)
    fd = dist(d[:, None] * X)
    for _ in range(iters):
        left = fc < fd  # minimizer lies in [a, d]
        a, b = np.where(left, a, c), np.where(left, d, b)
        probe = np.where(left, b - inv * (b - a), a + inv * (b - a))
        fp = dist(probe[:, None] * X)
        c, d, fc, fd = (
            np.where(left, probe, d),
            np.where(left, c, probe),
            np.where(left, fp, fd),
            np.where(left, fc, fp),
        )
    ends = np.minimum(dist(0.0 * X), dist(X))
    return np.minimum(np.minimum(fc, fd), ends)


class _DistanceProgram:
    """``min ||mu x - c||`` over ``0 <= mu <= mu_max`` and ``c`` in a convex piece."""

    def __init__(self, space: Space, builder, mu_max: float | None):
        self.x = cp.Parameter(space.dim)
        self.mu = cp.Variable(nonneg=True)
        self.c = cp.Variable(space.dim)
        cons = list(builder(self.c))
        if mu_max is not None:
            cons.append(self.mu <= mu_max)
        obj = cp.norm(self.mu * self.x - self.c, _NORM_ARG[space.norm_kind])
        self.problem = cp.Problem(cp.Minimize(obj), cons)

    def __call__(self, x: np.ndarray) -> float:
        self.x.value = np.asarray(x, dtype=float)
        try:
            self.problem.solve(solver=cp.CLARABEL)
        except cp.error.SolverError:
            return float("nan")
        if self.problem.status != cp.OPTIMAL:
            return float("nan")
        return max(0.0, float(self.problem.value))


# =============================================================================
# Co-radiant sets
# =============================================================================


class CoradiantSet:
    """Common interface; subclasses are immutable dataclasses."""

    space: Space
    closed: bool = True

    # -- membership -----------------------------------------------------------

    def margins(self, X) -> np.ndarray:
        raise NotImplementedError

    def verdicts(self, X) -> tuple[np.ndarray, np.ndarray]:
        m = self.margins(X)
        return classify(m), m

    def contains(self, X) -> np.ndarray:
        status, _ = self.verdicts(X)
        if np.any(status == Verdict.UNKNOWN):
            raise Inconclusive(f"{int(np.sum(status == Verdict.UNKNOWN))} membership verdict(s) Unknown")
        return (status == Verdict.IN) | ((status == Verdict.BOUNDARY) & self.closed)

    def member(self, x) -> MembershipVerdict:
        status, m = self.verdicts(x)
        return MembershipVerdict(Verdict(int(status[0])), float(m[0]), self.closed)

    # -- sampling -------------------------------------------------------------

    def _members_raw(self, n: int, rng) -> np.ndarray:
        raise NotImplementedError

    def _boundary_raw(self, n: int, rng) -> np.ndarray:
        raise NotImplementedError

    def sample_members(self, n: int, seed=None) -> np.ndarray:
        """Up to ``n`` points verified to lie in the set."""
        rng = np.random.default_rng(seed)
        X = self._members_raw(n, rng)
        status, _ = self.verdicts(X)
        keep = (status == Verdict.IN) | ((status == Verdict.BOUNDARY) & self.closed)
        return X[keep][:n]

    def sample_boundary(self, n: int, seed=None) -> np.ndarray:
        """Up to ``n`` points whose defining margin is within ``GEOM_TOL``."""
        rng = np.random.default_rng(seed)
        X = self._boundary_raw(n, rng)
        status, _ = self.verdicts(X)
        return X[status == Verdict.BOUNDARY][:n]

    # -- the generated cone ---------------------------------------------------

    def _cone_margins(self, X: np.ndarray) -> np.ndarray:
        """Ray scan fallback: ``x`` is in cone(C) when some ``t x`` is in C."""
        U, nrm = _unit_rows(self.space, X)
        ts = np.geomspace(1e-3, 1e4, 64)
        best = np.full(len(X), -np.inf)
        for t in ts:
            m = self.margins(t * U)
            best = np.fmax(best, m)
        best[nrm == 0] = 0.0
        return best

    def _cone_boundary_raw(self, n: int, rng) -> np.ndarray | None:
        return None

    def _polyhedral_cone(self) -> PolyhedralCone | None:
        return None

    # -- convex description for distance programs -----------------------------

    def _cvx_pieces(self):
        """Builders ``c -> constraints`` whose union is the closure, or None."""
        return None

    @functools.cached_property
    def _corad_programs(self):
        pieces = self._cvx_pieces()
        return None if pieces is None else [_DistanceProgram(self.space, b, 1.0) for b in pieces]

    @functools.cached_property
    def _cone_programs(self):
        pieces = self._cvx_pieces()
        return None if pieces is None else [_DistanceProgram(self.space, b, None) for b in pieces]

    def l2_distance(self, Y: np.ndarray) -> np.ndarray | None:
        """Exact Euclidean distance from each row of ``Y`` to the closure, if cheap."""
        return None

    def distance_to_corad(self, x, cone: bool = False) -> float:
        """``min_{0 <= mu <= 1} dist(mu x, C)`` (or ``mu >= 0`` when ``cone``)."""
        progs = self._cone_programs if cone else self._corad_programs
        if progs is None:
            return float("nan")
        vals = [p(x) for p in progs]
        return float(np.nanmin(vals)) if not all(np.isnan(vals)) else float("nan")


def _verified(space: Space, arr) -> np.ndarray:
    a = np.atleast_2d(np.asarray(arr, dtype=float))
    if a.shape[1] != space.dim:
        raise InvalidInput(f"generators must have {space.dim} coordinates")
    return a


@dataclass(frozen=True, eq=False)
class ConeTruncated(CoradiantSet):
    """``{x in cone(G) : g(x) >= level}`` with ``g > 0`` on every generator."""

    space: Space
    cone_generators: np.ndarray
    level_functional: np.ndarray
    level: float

    def __post_init__(self):
        G = _verified(self.space, self.cone_generators)
        g = self.space.functional(self.level_functional)
        object.__setattr__(self, "cone_generators", G)
        object.__setattr__(self, "level_functional", g)
        if not self.level > 0:
            raise InvalidInput("level must be positive")
        if np.any(G @ g <= 0):
            raise InvalidInput("level functional must be positive on every generator")
        object.__setattr__(self, "poly", PolyhedralCone(G))

    def margins(self, X) -> np.ndarray:
        X = _as_batch(self.space, X)
        return np.minimum(self.poly.signed_distance(X), X @ self.level_functional - self.level)

    def _onto_level(self, U: np.ndarray) -> np.ndarray:
        return U * (self.level / (U @ self.level_functional))[:, None]

    def _members_raw(self, n, rng):
        base = self._onto_level(self.poly.sample_directions(n, rng))
        s = np.ones(n)
        tail = rng.random(n) < 0.7
        tail[: len(self.cone_generators)] = False
        s[tail] = 1.0 + rng.exponential(1.0, tail.sum())
        return base * s[:, None]

    def _boundary_raw(self, n, rng):
        k = n // 2
        level_pts = self._onto_level(self.poly.sample_directions(k, rng)) if k else np.zeros((0, self.space.dim))
        facet = self._onto_level(self.poly.sample_boundary_directions(n - k, rng))
        facet = facet * (1.0 + rng.exponential(1.0, n - k))[:, None]
        return np.vstack([level_pts, facet])

    def _cone_margins(self, X):
        U = X / np.maximum(np.linalg.norm(X, axis=1), 1e-300)[:, None]
        return self.poly.signed_distance(U)

    def _cone_boundary_raw(self, n, rng):
        return _unit_rows(self.space, self.poly.sample_boundary_directions(n, rng))[0]

    def _polyhedral_cone(self):
        return self.poly

    @functools.cached_property
    def _l2_faces(self):
        """Affine pieces whose nearest feasible candidate is the projection.

        The projection onto ``C = cone(G) ∩ {g >= level}`` lies in the
        relative interior of a face: either a face of the cone meeting the
        open halfspace, or the hull of some truncated vertices on the level
        hyperplane.  Every candidate below is a point of C, so the closest
        one is exact.
        """
        cone_faces = self.poly._face_maps
        if cone_faces is None:
            return None
        G, g, L = self.cone_generators, self.level_functional, self.level
        V = G * (L / (G @ g))[:, None]
        top = []
        for k in range(1, min(len(V), self.space.dim) + 1):
            for idx in itertools.combinations(range(len(V)), k):
                v0 = V[idx[0]]
                E = V[list(idx[1:])] - v0
                if k > 1 and np.linalg.matrix_rank(E, tol=1e-10) < k - 1:
                    continue
                top.append((v0, E, np.linalg.pinv(E.T) if k > 1 else None))
        return cone_faces, top

    def l2_distance(self, Y):
        faces = self._l2_faces
        if faces is None:
            return None
        cone_faces, top = faces
        Y = np.atleast_2d(Y)
        g, L = self.level_functional, self.level
        best = np.full(len(Y), np.inf)
        for sub, pinv in cone_faces:
            W = Y @ pinv.T
            ok = np.all(W >= -1e-12, axis=1)
            if not ok.any():
                continue
            P = np.maximum(W[ok], 0.0) @ sub
            dist = np.linalg.norm(Y[ok] - P, axis=1)
            dist[P @ g < L * (1 - 1e-12)] = np.inf
            best[ok] = np.minimum(best[ok], dist)
        for v0, E, pinv in top:
            if pinv is None:
                best = np.minimum(best, np.linalg.norm(Y - v0, axis=1))
                continue
            cf = (Y - v0) @ pinv.T
            ok = np.all(cf >= -1e-12, axis=1) & (cf.sum(axis=1) <= 1 + 1e-12)
            if ok.any():
                P = v0 + cf[ok] @ E
                best[ok] = np.minimum(best[ok], np.linalg.norm(Y[ok] - P, axis=1))
        return best

    def _cvx_pieces(self):
        G, g, lvl = self.cone_generators, self.level_functional, self.level

        def build(c):
            w = cp.Variable(len(G), nonneg=True)
            return [c == G.T @ w, g @ c >= lvl]

        return [build]


@dataclass(frozen=True, eq=False)
class BishopPhelps(CoradiantSet):
    """``{x : f(x) - alpha ||x|| > lam}`` (strict) or ``>= lam``."""

    space: Space
    f: np.ndarray
    alpha: float
    lam: float
    strict: bool = True

    def __post_init__(self):
        f = self.space.functional(self.f)
        object.__setattr__(self, "f", f)
        fn = self.space.dual_norm(f)
        if not 0.0 < self.alpha < fn:
            raise InvalidInput(f"need 0 < alpha < ||f||_* = {fn:.6g}, got alpha = {self.alpha}")
        if not self.lam > 0:
            raise InvalidInput("lam must be positive")

    @property
    def closed(self) -> bool:  # type: ignore[override]
        return not self.strict

    def value(self, X) -> np.ndarray:
        X = _as_batch(self.space, X)
        return X @ self.f - self.alpha * _lp_norm(self.space.norm_kind, X)

    def margins(self, X):
        return self.value(X) - self.lam

    def _directions(self, n, rng):
        out = []
        total = 0
        peak = self.space.peak_direction(self.f)
        for _ in range(200):
            k = max(n, 16)
            A = self.space.sample_sphere(k, rng)
            sig = rng.exponential(0.5, k)
            B = peak + sig[:, None] * rng.standard_normal((k, self.space.dim))
            B = B[_lp_norm(self.space.norm_kind, B) > 0]
            D = np.vstack([A, _unit_rows(self.space, B)[0]])
            h = D @ self.f - self.alpha
            D, h = D[h > 1e-12], h[h > 1e-12]
            out.append((D, h))
            total += len(D)
            if total >= n:
                break
        D = np.vstack([d for d, _ in out])[:n]
        h = np.concatenate([h for _, h in out])[:n]
        D[0], h[0] = peak, self.f @ peak - self.alpha
        return D, h

    def _members_raw(self, n, rng):
        D, h = self._directions(n, rng)
        s = 1.0 + rng.exponential(1.0, len(D))
        if self.strict:
            s += 1e-3
        else:
            s[rng.random(len(D)) < 0.3] = 1.0
        return D * (self.lam / h * s)[:, None]

    def _boundary_raw(self, n, rng):
        D, h = self._directions(n, rng)
        return D * (self.lam / h)[:, None]

    def _cone_margins(self, X):
        U, nrm = _unit_rows(self.space, X)
        m = U @ self.f - self.alpha
        m[nrm == 0] = 0.0
        return m

    def _cvx_pieces(self):
        f, a, lam, p = self.f, self.alpha, self.lam, _NORM_ARG[self.space.norm_kind]
        return [lambda c: [f @ c - a * cp.norm(c, p) >= lam]]


@dataclass(frozen=True, eq=False)
class GeneratorRays(CoradiantSet):
    """``{t g : t >= 1, g in G}``."""

    space: Space
    generators: np.ndarray

    def __post_init__(self):
        G = _verified(self.space, self.generators)
        if np.any(np.linalg.norm(G, axis=1) == 0):
            raise InvalidInput("generators must be nonzero")
        object.__setattr__(self, "generators", G)

    def margins(self, X):
        X = _as_batch(self.space, X)
        return -np.min([_ray_distance(self.space, X, g, 1.0) for g in self.generators], axis=0)

    def _members_raw(self, n, rng):
        G = self.generators
        k = rng.integers(len(G), size=n)
        s = 1.0 + rng.exponential(1.0, n)
        s[: len(G)] = 1.0
        k[: len(G)] = np.arange(min(n, len(G)))
        return G[k] * s[:, None]

    _boundary_raw = _members_raw

    def _cone_margins(self, X):
        U, nrm = _unit_rows(self.space, X)
        m = -np.min([_ray_distance(self.space, U, g, 0.0) for g in self.generators], axis=0)
        m[nrm == 0] = 0.0
        return m

    def _cone_boundary_raw(self, n, rng):
        G = _unit_rows(self.space, self.generators)[0]
        return G[np.arange(n) % len(G)]

    def l2_distance(self, Y):
        Y = np.atleast_2d(Y)
        out = np.full(len(Y), np.inf)
        for g in self.generators:
            t = np.maximum(1.0, Y @ g / (g @ g))
            out = np.minimum(out, np.linalg.norm(Y - t[:, None] * g, axis=1))
        return out

    def _cvx_pieces(self):
        def ray(g):
            def build(c):
                t = cp.Variable()
                return [c == t * g, t >= 1]

            return build

        return [ray(g) for g in self.generators]


@dataclass(frozen=True, eq=False)
class TranslatedCone(CoradiantSet):
    """``apex + cone(G)``; co-radiant because the apex lies in the cone."""

    space: Space
    apex: np.ndarray
    cone_generators: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "apex", self.space.point(self.apex))
        G = _verified(self.space, self.cone_generators)
        object.__setattr__(self, "cone_generators", G)
        poly = PolyhedralCone(G)
        if poly.signed_distance(self.apex[None])[0] < -GEOM_TOL:
            raise InvalidInput("apex must lie in the cone, otherwise the set is not co-radiant")
        object.__setattr__(self, "poly", poly)

    def margins(self, X):
        X = _as_batch(self.space, X)
        return self.poly.signed_distance(X - self.apex)

    def _heavy(self, W_shape, rng):
        W = 10.0 ** rng.uniform(-3, 4, W_shape)
        W[rng.random(W_shape) < 0.3] = 0.0
        return W

    def _members_raw(self, n, rng):
        G = self.cone_generators
        X = self.apex + self._heavy((n, len(G)), rng) @ G
        X[0] = self.apex
        X[1 : 1 + len(G)][: max(0, n - 1)] = (self.apex + G)[: max(0, n - 1)]
        return X

    def _boundary_raw(self, n, rng):
        poly = self.poly
        out = np.empty((n, self.space.dim))
        for k in range(n):
            members = poly.facet_members[rng.integers(len(poly.facet_members))] if poly.facet_members else np.arange(len(self.cone_generators))
            w = self._heavy((len(members),), rng)
            out[k] = self.apex + w @ self.cone_generators[members]
        if n:
            out[0] = self.apex
        return out

    def _cone_margins(self, X):
        U = X / np.maximum(np.linalg.norm(X, axis=1), 1e-300)[:, None]
        return self.poly.signed_distance(U)

    def _cone_boundary_raw(self, n, rng):
        return _unit_rows(self.space, self.poly.sample_boundary_directions(n, rng))[0]

    def _polyhedral_cone(self):
        return self.poly

    def l2_distance(self, Y):
        return self.poly.distance(np.atleast_2d(Y) - self.apex)

    def _cvx_pieces(self):
        G, a = self.cone_generators, self.apex

        def build(c):
            w = cp.Variable(len(G), nonneg=True)
            return [c == a + G.T @ w]

        return [build]


@dataclass(frozen=True, eq=False)
class HyperbolaFixture(CoradiantSet):
    """``{(x, y) : x > 0, y >= 1/x}`` in the plane."""

    space: Space

    def __post_init__(self):
        if self.space.dim != 2:
            raise InvalidInput("the hyperbola fixture lives in dimension 2")

    def margins(self, X):
        X = _as_batch(self.space, X)
        x, y = X[:, 0], X[:, 1]
        pos = (x > 0) & (y > 0)
        return np.where(pos, x * y - 1.0, -1.0 - np.abs(np.minimum(x, y)))

    def _members_raw(self, n, rng):
        x = np.exp(rng.uniform(-7, 7, n))
        s = 1.0 + rng.exponential(1.0, n)
        s[rng.random(n) < 0.3] = 1.0
        X = np.column_stack([x, s / x])
        X[0] = (1.0, 1.0)
        return X

    def _boundary_raw(self, n, rng):
        x = np.exp(rng.uniform(-7, 7, n))
        return np.column_stack([x, 1.0 / x])

    def _cone_margins(self, X):
        U, nrm = _unit_rows(self.space, X)
        m = U.min(axis=1)
        m[nrm == 0] = 0.0
        return m

    def _cone_boundary_raw(self, n, rng):
        return np.eye(2)[np.arange(n) % 2]

    def _cvx_pieces(self):
        return [lambda c: [c[0] >= 0, c[1] >= cp.inv_pos(c[0])]]


@dataclass(frozen=True, eq=False)
class Scaled(CoradiantSet):
    """``eps * base``."""

    base: CoradiantSet
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidInput("eps must be positive")

    @property
    def space(self) -> Space:  # type: ignore[override]
        return self.base.space

    @property
    def closed(self) -> bool:  # type: ignore[override]
        return self.base.closed

    def margins(self, X):
        return self.base.margins(_as_batch(self.space, X) / self.eps)

    def _members_raw(self, n, rng):
        return self.eps * self.base._members_raw(n, rng)

    def _boundary_raw(self, n, rng):
        return self.eps * self.base._boundary_raw(n, rng)

    def _cone_margins(self, X):
        return self.base._cone_margins(X)

    def _cone_boundary_raw(self, n, rng):
        return self.base._cone_boundary_raw(n, rng)

    def _polyhedral_cone(self):
        return self.base._polyhedral_cone()

    def l2_distance(self, Y):
        d = self.base.l2_distance(np.atleast_2d(Y) / self.eps)
        return None if d is None else self.eps * d

    def _cvx_pieces(self):
        pieces = self.base._cvx_pieces()
        if pieces is None:
            return None
        return [(lambda b: (lambda c: b(c / self.eps)))(b) for b in pieces]


@dataclass(frozen=True, eq=False)
class SliceGeq(CoradiantSet):
    """``{x in base : ||x|| >= a}``; ``base`` may be a set or a cone."""

    base: object
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidInput("a must be positive")

    @property
    def space(self) -> Space:  # type: ignore[override]
        return self.base.space

    @property
    def closed(self) -> bool:  # type: ignore[override]
        return getattr(self.base, "closed", True)

    def margins(self, X):
        X = _as_batch(self.space, X)
        return np.minimum(self.base.margins(X), _lp_norm(self.space.norm_kind, X) - self.a)

    def _members_raw(self, n, rng):
        if isinstance(self.base, Cone):
            U = self.base._unit_raw(n, rng)
            return U * (self.a * (1.0 + rng.exponential(1.0, len(U))))[:, None]
        X = self.base._members_raw(n, rng)
        nrm = _lp_norm(self.space.norm_kind, X)
        s = np.maximum(1.0, self.a / nrm) * (1.0 + rng.exponential(0.5, len(X)))
        return X * s[:, None]

    def _boundary_raw(self, n, rng):
        if isinstance(self.base, Cone):
            return self.a * self.base._unit_raw(n, rng)
        X = self.base._boundary_raw(n, rng)
        nrm = _lp_norm(self.space.norm_kind, X)
        return X * np.maximum(1.0, self.a / nrm)[:, None]

    def _cone_margins(self, X):
        if isinstance(self.base, Cone):
            return self.base.margins(X)
        return self.base._cone_margins(X)

    def _cone_boundary_raw(self, n, rng):
        if isinstance(self.base, Cone):
            return self.base._boundary_unit_raw(n, rng)
        return self.base._cone_boundary_raw(n, rng)


@dataclass(frozen=True, eq=False)
class RadialNeighborhood(CoradiantSet):
    """Smallest co-radiant superset of ``base + delta B``.

    Membership solves ``min_{0 <= mu <= 1} dist(mu x, base)`` as a single
    convex program per convex piece of the base; bases without a convex
    description give Unknown verdicts.
    """

    base: CoradiantSet
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise InvalidInput("delta must be positive")

    @property
    def space(self) -> Space:  # type: ignore[override]
        return self.base.space

    def margins(self, X):
        X = _as_batch(self.space, X)
        out = np.full(len(X), float(self.delta))
        rest = np.flatnonzero(self.base.margins(X) < -GEOM_TOL)
        if len(rest) == 0:
            return out
        if self.space.norm_kind is NormKind.L2 and self.base.l2_distance(X[:1]) is not None:
            out[rest] = self.delta - _segment_min(self.base.l2_distance, X[rest])
        else:
            out[rest] = [self.delta - self.base.distance_to_corad(x) for x in X[rest]]
        return out

    def _members_raw(self, n, rng):
        C = self.base._members_raw(n, rng)
        B = self.space.sample_ball(len(C), rng)
        s = 1.0 + rng.exponential(1.0, len(C))
        s[rng.random(len(C)) < 0.5] = 1.0
        return (C + self.delta * B) * s[:, None]

    def _boundary_raw(self, n, rng):
        # bisect along rays from members toward the origin (never a member)
        X = self._members_raw(n, rng)
        lo = np.zeros(len(X))
        hi = np.ones(len(X))
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            m = self.margins(X * mid[:, None]) >= 0
            hi[m] = mid[m]
            lo[~m] = mid[~m]
        return X * hi[:, None]

    def _cone_margins(self, X):
        U, nrm = _unit_rows(self.space, X)
        out = np.array([self.delta - self.base.distance_to_corad(u, cone=True) for u in U])
        out[nrm == 0] = 0.0
        return out


@dataclass(frozen=True, eq=False)
class KnSlice(CoradiantSet):
    """``K^n = K ∩ cone(K ∩ n S_X)``.

    ``x`` lies in ``cone(K ∩ n S_X)`` exactly when ``n x / ||x||`` lies in K,
    so both conditions are plain membership queries on the base.
    """

    base: CoradiantSet
    n: float

    def __post_init__(self):
        if not self.n > 0:
            raise InvalidInput("n must be positive")

    @property
    def space(self) -> Space:  # type: ignore[override]
        return self.base.space

    @property
    def closed(self) -> bool:  # type: ignore[override]
        return self.base.closed

    def margins(self, X):
        X = _as_batch(self.space, X)
        return np.minimum(self.base.margins(X), self._cone_margins(X))

    def _members_raw(self, n, rng):
        X = self.base._members_raw(3 * n, rng)
        U, _ = _unit_rows(self.space, X)
        ok = self.base.contains(self.n * U)
        X, U = X[ok], U[ok]
        # rays through the norm-n slice, rescaled both ways
        s = np.exp(rng.uniform(-1, 2, len(U)))
        Y = np.vstack([X, self.n * U * s[:, None]])
        return Y[self.base.contains(Y)][:n]

    def _boundary_raw(self, n, rng):
        X = self.base._boundary_raw(3 * n, rng)
        U, _ = _unit_rows(self.space, X)
        return X[self.base.contains(self.n * U)][:n]

    def _cone_margins(self, X):
        U, nrm = _unit_rows(self.space, X)
        m = self.base.margins(self.n * U)
        m[nrm == 0] = 0.0
        return m


# =============================================================================
# Cones
# =============================================================================


class Cone:
    """Closed cone interface: margins are scale-free and boundary counts in."""

    space: Space
    closed = True

    def margins(self, X) -> np.ndarray:
        raise NotImplementedError

    def verdicts(self, X):
        m = self.margins(_as_batch(self.space, X))
        return classify(m), m

    def contains(self, X) -> np.ndarray:
        status, _ = self.verdicts(X)
        if np.any(status == Verdict.UNKNOWN):
            raise Inconclusive("cone membership Unknown")
        return status != Verdict.OUT

    def member(self, x) -> MembershipVerdict:
        status, m = self.verdicts(x)
        return MembershipVerdict(Verdict(int(status[0])), float(m[0]), True)

    def _unit_raw(self, n, rng) -> np.ndarray:
        raise NotImplementedError

    def _boundary_unit_raw(self, n, rng) -> np.ndarray:
        inside = self._unit_raw(n, rng)
        out = self.space.sample_sphere(8 * n, rng)
        out = out[self.margins(out) < -GEOM_TOL]
        if len(out) == 0:
            return np.zeros((0, self.space.dim))
        k = min(len(inside), len(out))
        return _bisect_boundary(self.space, lambda U: self.margins(U) >= 0, inside[:k], out[:k])

    def sample_unit(self, n: int, seed=None) -> np.ndarray:
        """Points of ``K ∩ S_X``."""
        return self._unit_raw(n, np.random.default_rng(seed))

    def sample_boundary_unit(self, n: int, seed=None) -> np.ndarray:
        """Points of ``bd(K) ∩ S_X``."""
        return self._boundary_unit_raw(n, np.random.default_rng(seed))

    def _polyhedral_cone(self) -> PolyhedralCone | None:
        return None


@dataclass(frozen=True, eq=False)
class GeneratedCone(Cone):
    space: Space
    generators: np.ndarray

    def __post_init__(self):
        G = _verified(self.space, self.generators)
        object.__setattr__(self, "generators", G)
        object.__setattr__(self, "poly", PolyhedralCone(G))

    def margins(self, X):
        X = _as_batch(self.space, X)
        U = X / np.maximum(np.linalg.norm(X, axis=1), 1e-300)[:, None]
        return self.poly.signed_distance(U)

    def _unit_raw(self, n, rng):
        return _unit_rows(self.space, self.poly.sample_directions(n, rng))[0]

    def _boundary_unit_raw(self, n, rng):
        return _unit_rows(self.space, self.poly.sample_boundary_directions(n, rng))[0]

    def _polyhedral_cone(self):
        return self.poly


@dataclass(frozen=True, eq=False)
class ConeOfSet(Cone):
    """``cone(base) = {t y : t >= 0, y in base}``."""

    base: CoradiantSet

    @property
    def space(self) -> Space:  # type: ignore[override]
        return self.base.space

    def margins(self, X):
        return self.base._cone_margins(_as_batch(self.space, X))

    def _unit_raw(self, n, rng):
        X = self.base._members_raw(n, rng)
        X = X[_lp_norm(self.space.norm_kind, X) > 0]
        return _unit_rows(self.space, X)[0]

    def _boundary_unit_raw(self, n, rng):
        B = self.base._cone_boundary_raw(n, rng)
        return super()._boundary_unit_raw(n, rng) if B is None else B

    def _polyhedral_cone(self):
        return self.base._polyhedral_cone()


@dataclass(frozen=True, eq=False)
class DilatedCone(Cone):
    """``cone({y : d(y, K ∩ S_X) <= delta})``.

    ``x`` is a member when some ``t x`` (``t >= 0``) is within ``delta`` of
    ``K ∩ S_X``.  For l2 and a polyhedral base this distance is the l2
    distance from ``x / ||x||`` to K; otherwise it is estimated against a
    dense sample of ``K ∩ S_X`` with a local refinement.
    """

    base: Cone
    delta: float
    n_reference: int = 4096
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise InvalidInput("delta must lie in (0, 1)")

    @property
    def space(self) -> Space:  # type: ignore[override]
        return self.base.space

    @functools.cached_property
    def _reference(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        return np.vstack([self.base._unit_raw(self.n_reference, rng), self.base._boundary_unit_raw(self.n_reference // 4, rng)])

    def ray_gap(self, X) -> np.ndarray:
        """``min_{t >= 0, s in K ∩ S_X} ||t u - s||`` for ``u = x / ||x||``."""
        X = _as_batch(self.space, X)
        U, _ = _unit_rows(self.space, X)
        poly = self.base._polyhedral_cone()
        if self.space.norm_kind is NormKind.L2 and poly is not None:
            return poly.distance(U)
        R = self._reference
        out = np.empty(len(U))
        for i, u in enumerate(U):
            d = _ray_distance(self.space, R, u, 0.0)
            j = int(np.argmin(d))
            out[i] = self._refine(u, R[j], d[j])
        return out

    def _refine(self, u, s, best):
        step = 0.5
        for _ in range(60):
            cand = s + step * (u - s)
            nrm = _lp_norm(self.space.norm_kind, cand)
            if nrm > 0:
                cand = cand / nrm
                if self.base.margins(cand[None])[0] >= 0:
                    d = _ray_distance(self.space, cand[None], u, 0.0)[0]
                    if d < best:
                        s, best = cand, d
                        continue
            step *= 0.5
            if step < 1e-12:
                break
        return best

    def margins(self, X):
        X = _as_batch(self.space, X)
        nrm = _lp_norm(self.space.norm_kind, X)
        m = self.delta - self.ray_gap(X)
        m[nrm == 0] = self.delta
        return m

    def _unit_raw(self, n, rng):
        S = self.base._unit_raw(n, rng)
        B = self.space.sample_ball(len(S), rng)
        edge = rng.random(len(S)) < 0.3
        B[edge] = _unit_rows(self.space, B[edge])[0] if edge.any() else B[edge]
        return _unit_rows(self.space, S + self.delta * B)[0]


# =============================================================================
# Queries
# =============================================================================


def member(C, x) -> MembershipVerdict:
    return C.member(x)


def member_cone(K: Cone, x) -> MembershipVerdict:
    return K.member(x)


def scale(C: CoradiantSet, eps: float) -> CoradiantSet:
    if isinstance(C, Scaled):
        return Scaled(C.base, C.eps * eps)
    return Scaled(C, eps)


def cone_of(C: CoradiantSet) -> Cone:
    return ConeOfSet(C)


def slice_geq(C, a: float) -> SliceGeq:
    return SliceGeq(C, a)


def conic_neighborhood(K: Cone, delta: float, seed: int = 0) -> DilatedCone:
    return DilatedCone(K, delta, seed=seed)


def decompose_kn(K: CoradiantSet, n: float) -> KnSlice:
    """Membership oracle for ``K^n``; empty when ``K ∩ n S_X`` is."""
    return KnSlice(K, n)


def sample_members(C, n: int, seed=None) -> np.ndarray:
    return C.sample_members(n, seed)


def sample_boundary(C, n: int, seed=None) -> np.ndarray:
    return C.sample_boundary(n, seed)


def slice_nonempty(K: CoradiantSet, n: float, budget: int = 2000, seed=None) -> bool:
    """Whether sampling finds a member of ``K`` with norm exactly ``n``."""
    X = K.sample_members(budget, seed)
    if len(X) == 0:
        return False
    U, _ = _unit_rows(K.space, X)
    return bool(np.any(K.contains(n * U)))


def refine_min(C: CoradiantSet, objective, starts: np.ndarray, rng, iters: int = 300, batch: int = 16):
    """Local search for ``min objective`` over members of ``C``.

    A (1+1)-style pattern search with step adaptation, run for all starts in
    lockstep: every candidate must stay a member, so results are always
    feasible upper estimates.
    """
    space = C.space
    X = np.array(np.atleast_2d(starts), dtype=float)
    k, d = X.shape
    V = np.asarray(objective(X), dtype=float)
    step = 0.1 * np.maximum(_lp_norm(space.norm_kind, X), 1e-3)
    live = np.ones(k, dtype=bool)
    for _ in range(iters):
        rows = np.flatnonzero(live)
        if len(rows) == 0:
            break
        Z = rng.standard_normal((len(rows), batch, d))
        Z /= np.linalg.norm(Z, axis=2)[:, :, None]
        x = X[rows]
        st = step[rows]
        shrink = x * (1 - st / np.maximum(np.linalg.norm(x, axis=1), 1e-12))[:, None]
        cand = np.concatenate([x[:, None, :] + st[:, None, None] * Z, shrink[:, None, :]], axis=1)
        flat = cand.reshape(-1, d)
        ok = C.contains(flat)
        vals = np.full(len(flat), np.inf)
        if ok.any():
            vals[ok] = objective(flat[ok])
        vals = vals.reshape(len(rows), batch + 1)
        j = np.argmin(vals, axis=1)
        best = vals[np.arange(len(rows)), j]
        better = best < V[rows]
        up = rows[better]
        X[up] = cand[better, j[better]]
        V[up] = best[better]
        step[up] *= 1.5
        down = rows[~better]
        step[down] *= 0.6
        live[down] = step[down] >= 1e-11 * np.maximum(1.0, np.linalg.norm(X[down], axis=1))
    i = int(np.argmin(V))
    return X[i], float(V[i])


@dataclass(frozen=True)
class DInf:
    value: float
    point: np.ndarray
    samples: int


def d_inf(C: CoradiantSet, budget: int = 10_000, seed=0) -> DInf:
    """Estimate of ``d_C = inf{||c|| : c in C}`` with an achieving point.

    Sampled minimum, refined by a membership-preserving local search; when
    the set has a convex description the minimum-norm program is solved as
    well and the smaller certified value wins.
    """
    rng = np.random.default_rng(seed)
    X = C.sample_members(budget, rng)
    if len(X) == 0:
        raise NoMemberFound(f"no member among {budget} samples")
    space = C.space
    nrm = _lp_norm(space.norm_kind, X)
    starts = X[np.argsort(nrm)[:10]]

    def obj(Y):
        return _lp_norm(space.norm_kind, Y)

    x, v = refine_min(C, obj, starts, rng)
    progs = C._corad_programs
    if progs is not None:
        for p in progs:
            val = p(np.zeros(space.dim))
            if np.isfinite(val) and val < v:
                # the program certifies the infimum of the closure
                v, x = val, np.asarray(p.c.value, dtype=float)
    return DInf(float(v), np.asarray(x, dtype=float), len(X))


@dataclass(frozen=True)
class NormBaseResult:
    confirmed: bool
    samples_checked: int
    witness: np.ndarray | None = None


def _unit_members(C: CoradiantSet, budget: int, seed) -> tuple[np.ndarray, np.ndarray]:
    Y = C.sample_members(budget, seed)
    if len(Y) == 0:
        raise NoMemberFound(f"no member among {budget} samples")
    U, _ = _unit_rows(C.space, Y)
    return Y, U


def _norm_base_check(C, Y, U, t) -> NormBaseResult:
    ok = C.contains(t * U)
    if ok.all():
        return NormBaseResult(True, len(Y))
    return NormBaseResult(False, len(Y), Y[int(np.argmin(ok))])


def is_norm_base(C: CoradiantSet, t: float, budget: int = 10_000, seed=0) -> NormBaseResult:
    """Test whether ``C ∩ t S_X`` is a norm base of ``C``.

    Uses the pointwise form: the slice is a norm base iff ``t y / ||y||`` lies
    in C for every member ``y``.  Refutations carry a witness ``y``;
    confirmations are only as strong as the sample.
    """
    if not t > 0:
        raise InvalidInput("t must be positive")
    Y, U = _unit_members(C, budget, seed)
    return _norm_base_check(C, Y, U, t)


@dataclass(frozen=True)
class RadiusResult:
    finite: bool
    estimate: float | None
    bracket: tuple[float, float] | None
    t_max: float
    pattern: list = field(default_factory=list)

    @property
    def upper(self) -> float:
        return self.bracket[1]


DEFAULT_T_GRID = tuple(np.geomspace(1e-3, 100.0, 51))


def radius_inf(C: CoradiantSet, t_grid=DEFAULT_T_GRID, budget: int = 10_000, seed=0, width: float = 1e-4) -> RadiusResult:
    """Bracket ``I_C``, the infimal radius of a norm base.

    Scans the ascending grid, then bisects between the largest refuted and
    the smallest confirmed radius.  The same member sample serves every
    radius, which keeps the pattern monotone for the shipped representations.
    """
    grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(grid) <= 0) or np.any(grid <= 0):
        raise InvalidInput("t_grid must be positive and ascending")
    Y, U = _unit_members(C, budget, seed)
    pattern = [(float(t), _norm_base_check(C, Y, U, t).confirmed) for t in grid]
    confirmed = [t for t, ok in pattern if ok]
    if not confirmed:
        return RadiusResult(False, None, None, float(grid[-1]), pattern)
    hi = confirmed[0]
    refuted = [t for t, ok in pattern if not ok and t < hi]
    lo = refuted[-1] if refuted else 0.0
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if _norm_base_check(C, Y, U, mid).confirmed:
            hi = mid
        else:
            lo = mid
    return RadiusResult(True, 0.5 * (lo + hi), (lo, hi), float(grid[-1]), pattern)


def radial_neighborhood(C: CoradiantSet, delta: float, budget: int = 10_000, seed=0) -> RadialNeighborhood:
    if not delta > 0:
        raise InvalidInput("delta must be positive")
    d = d_inf(C, budget, seed).value
    if delta >= d:
        raise InvalidInput(f"delta = {delta} must be below d_C ≈ {d:.6g}")
    return RadialNeighborhood(C, delta)
