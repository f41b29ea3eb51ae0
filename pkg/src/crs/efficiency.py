"""Approximate efficiency of finite point sets.

``x0`` in ``A`` is eps-efficient with respect to a co-radiant set ``C`` when
no other point of ``A`` lies in ``x0 - eps C``.  Everything here is exact
pairwise brute force over ``A``; the sampled parts are the checks on the
(infinite) set ``C``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlphaOutOfRange,
    EnclosureFailed,
    HypothesisUnmet,
    InvalidInput,
    NoBoundedBase,
    NoMemberFound,
    NotEfficientInK,
    PreconditionFailed,
    TheoremViolation,
    UnresolvedPairs,
)
from .separation import Mode, hull_distance, separate_coradiant
from .sets import (
    BishopPhelps,
    Cone,
    CoradiantSet,
    RadialNeighborhood,
    Verdict,
    cone_of,
    d_inf,
    refine_min,
    scale,
    slice_nonempty,
)
from .space import GEOM_TOL, Space, _lp_norm

DEDUP_TOL = 1e-9


def _points(space: Space, A) -> np.ndarray:
    A = np.atleast_2d(space.point(A))
    if len(A) == 0:
        raise InvalidInput("A must be nonempty")
    return A


def _differences(space: Space, A: np.ndarray):
    """``D[i, j] = A[i] - A[j]`` and the mask of numerically equal pairs."""
    D = A[:, None, :] - A[None, :, :]
    same = _lp_norm(space.norm_kind, D) <= DEDUP_TOL
    return D, same


@dataclass(frozen=True)
class AeResult:
    efficient_indices: tuple[int, ...]
    exclusions: dict = field(default_factory=dict)

    def __contains__(self, i) -> bool:
        return i in self.efficient_indices


def ae(A, C: CoradiantSet, eps: float) -> AeResult:
    """``AE(A, C, eps)``: indices ``i`` with ``(A - A[i]) ∩ (-eps C) ⊂ {0}``.

    An excluded index maps to its witness ``A[j] - A[i]``, a nonzero element
    of ``-eps C``.  Unknown membership verdicts raise ``UnresolvedPairs``.
    """
    if not eps > 0:
        raise InvalidInput("eps must be positive")
    space = C.space
    A = _points(space, A)
    m, d = A.shape
    D, same = _differences(space, A)
    status, _ = scale(C, eps).verdicts(D.reshape(-1, d))
    status = status.reshape(m, m)
    unknown = (status == Verdict.UNKNOWN) & ~same
    if unknown.any():
        raise UnresolvedPairs([tuple(map(int, p)) for p in np.argwhere(unknown)])
    hit = ((status == Verdict.IN) | ((status == Verdict.BOUNDARY) & C.closed)) & ~same
    keep, excl = [], {}
    for i in range(m):
        if hit[i].any():
            j = int(np.argmax(hit[i]))
            excl[i] = -D[i, j]
        else:
            keep.append(i)
    return AeResult(tuple(keep), excl)


def efficient(A, K: Cone) -> tuple[int, ...]:
    """Indices not dominated under the closed pointed cone ``K``."""
    space = K.space
    A = _points(space, A)
    m, d = A.shape
    D, same = _differences(space, A)
    inside = K.contains(D.reshape(-1, d)).reshape(m, m) & ~same
    return tuple(i for i in range(m) if not inside[i].any())


def _bp_check(space: Space, f, alpha: float, lam: float) -> np.ndarray:
    f = space.functional(f)
    if not 0 < alpha < space.dual_norm(f):
        raise AlphaOutOfRange(f"need 0 < alpha < ||f||_* = {space.dual_norm(f):.6g}, got {alpha}")
    if not lam > 0:
        raise InvalidInput("lam must be positive")
    return f


def ae_bp(space: Space, A, f, alpha: float, lam: float) -> tuple[int, ...]:
    """Scalarized form: keep ``x`` iff ``p_{f,alpha}(x' - x) >= -lam`` for all ``x'``.

    Ties inside the geometric tolerance band count as kept, matching the
    open Bishop-Phelps set.  The result is compared against the brute-force
    ``ae(A, K_{f,alpha}, lam)``, computed along the same arithmetic path so
    the two agree bit for bit; a mismatch raises ``TheoremViolation``.
    """
    f = _bp_check(space, f, alpha, lam)
    A = _points(space, A)
    m, d = A.shape
    D, same = _differences(space, A)
    # D[i, j] = x_i - x_j; P[i, j] = p_{f,alpha}(x_j - x_i) / lam
    Y = -(D / lam).reshape(-1, d)
    P = Y @ f + alpha * _lp_norm(space.norm_kind, Y)
    # -P - 1 is bit-identical to the Bishop-Phelps margin of (x_i - x_j)/lam
    slack = (-P - 1.0).reshape(m, m)
    bad = (slack > GEOM_TOL) & ~same
    kept = tuple(i for i in range(m) if not bad[i].any())
    ref = ae(A, BishopPhelps(space, f, alpha, 1.0, strict=True), lam).efficient_indices
    if kept != ref:
        raise TheoremViolation("scalarized and brute-force efficient sets differ", witness=(kept, ref))
    return kept


def amin(space: Space, f, alpha: float, A, eps: float) -> tuple[int, ...]:
    """eps-approximate minimizers of ``p_{f,alpha}`` over ``A`` (all ties kept).

    For ``eps > 0`` the inclusion in ``ae_bp(A, f, alpha, eps)`` is asserted.
    """
    if eps < 0:
        raise InvalidInput("eps must be nonnegative")
    A = _points(space, A)
    v = space.p_sublinear(f, alpha, A)
    v = np.atleast_1d(v)
    best = float(v.min())
    kept = tuple(int(i) for i in np.flatnonzero(v <= best + eps + space.tol * max(1.0, abs(best))))
    if eps > 0 and 0 < alpha < space.dual_norm(f):
        outer = set(ae_bp(space, A, f, alpha, eps))
        missing = [i for i in kept if i not in outer]
        if missing:
            raise TheoremViolation("AMin point outside the scalarized efficient set", witness=missing)
    return kept


# -----------------------------------------------------------------------------
# augmented duals
# -----------------------------------------------------------------------------


class DualKind(str, enum.Enum):
    WEAK = "weak"
    STRICT = "strict"


@dataclass(frozen=True)
class AugDualQuery:
    f: np.ndarray
    alpha: float
    lam: float
    eps: float
    kind: DualKind = DualKind.WEAK


@dataclass(frozen=True)
class AugDualResult:
    member: bool
    min_margin: float
    samples: int
    witness: np.ndarray | None = None
    positive_on_C: bool = True


def check_aug_dual(C: CoradiantSet, q: AugDualQuery, budget: int = 10_000, seed=0) -> AugDualResult:
    """Sampled test of ``f - alpha ||.|| >= lam`` (weak) or ``> lam`` (strict) on ``eps C``.

    Also checks ``f > 0`` on ``C``.  The margin is refined from the ten
    worst samples by a membership-preserving local search, so a Member
    verdict reports the best lower estimate found, not a proof.
    """
    space = C.space
    f = space.functional(q.f)
    if not np.any(f):
        raise InvalidInput("f must be nonzero")
    if q.alpha < 0 or not q.lam > 0 or not q.eps > 0:
        raise InvalidInput("need alpha >= 0, lam > 0, eps > 0")
    kind = DualKind(q.kind)
    rng = np.random.default_rng(seed)
    Ce = scale(C, q.eps)
    Y = np.vstack([Ce.sample_members(budget, rng), Ce.sample_boundary(max(budget // 10, 16), rng)])
    if len(Y) == 0:
        raise NoMemberFound("no members of C(eps) sampled")

    def margin(Z):
        return Z @ f - q.alpha * _lp_norm(space.norm_kind, Z) - q.lam

    mg = margin(Y)
    starts = Y[np.argsort(mg)[:10]]
    x_ref, v_ref = refine_min(Ce, margin, starts, rng, iters=100)
    lo = float(min(mg.min(), v_ref))
    w = x_ref if v_ref < mg.min() else Y[int(mg.argmin())]
    positive = bool(np.all(Y @ f > 0))
    # samples are members up to the GEOM_TOL band, which moves the margin by
    # at most GEOM_TOL (||f||_* + alpha) ||y|| at the worst point
    band = max(space.tol, GEOM_TOL * (space.dual_norm(f) + q.alpha) * float(_lp_norm(space.norm_kind, w[None, :])[0]))
    ok = lo >= -band if kind is DualKind.WEAK else lo > space.tol
    ok = ok and positive
    return AugDualResult(ok, lo, len(Y), None if ok else np.asarray(w), positive)


@dataclass(frozen=True)
class AugDualSynthesis:
    f: np.ndarray
    alpha: float
    lam: float
    gamma: float
    d_C: float
    eps: float
    weak: AugDualResult
    strict: AugDualResult


def _base_hull_check(space: Space, K: Cone, budget: int, rng) -> np.ndarray:
    """Unit directions of ``K``; raises when their hull reaches the origin."""
    poly = K._polyhedral_cone()
    U = K._unit_raw(budget, rng)
    if poly is not None:
        G = poly.generators / _lp_norm(space.norm_kind, poly.generators)[:, None]
        U = np.vstack([G, U])
        probe = G
    else:
        probe = U
    hd = hull_distance(probe, np.zeros((1, space.dim)))
    if hd.distance <= 1e-9:
        raise NoBoundedBase("the hull of the normalized cone directions contains 0")
    return U


def synth_aug_dual(C: CoradiantSet, eps: float, budget: int = 10_000, seed=0, iters: int = 200) -> AugDualSynthesis:
    """Produce ``(f, gamma/2, gamma eps d_C / 2)`` in the weak augmented dual.

    ``f`` maximizes the sampled ``min f`` over ``cone(C) ∩ S_X`` by projected
    subgradient ascent from the hull-distance witness, renormalized to unit
    dual norm after each step.
    """
    space = C.space
    rng = np.random.default_rng(seed)
    U = _base_hull_check(space, cone_of(C), budget, rng)
    f = hull_distance(U, np.zeros((1, space.dim)), space).witness
    best_f, best_g = f, float(np.min(U @ f))
    for k in range(iters):
        u = U[int(np.argmin(U @ f))]
        f = f + (0.2 / np.sqrt(k + 1.0)) * u
        f = f / space.dual_norm(f)
        g = float(np.min(U @ f))
        if g > best_g:
            best_f, best_g = f, g
    if best_g <= 0:
        raise NoBoundedBase("no functional is positive on the sampled base")
    dc = d_inf(C, budget, seed=int(rng.integers(2**31))).value
    alpha, lam = best_g / 2.0, best_g * eps * dc / 2.0
    weak = check_aug_dual(C, AugDualQuery(best_f, alpha, lam, eps, DualKind.WEAK), budget, int(rng.integers(2**31)))
    strict = check_aug_dual(C, AugDualQuery(best_f, alpha, lam / 2, eps, DualKind.STRICT), budget, int(rng.integers(2**31)))
    if not (weak.member and strict.member):
        raise TheoremViolation("synthesized pair fails an augmented dual check", witness=(weak, strict))
    return AugDualSynthesis(best_f, alpha, lam, best_g, dc, eps, weak, strict)


# -----------------------------------------------------------------------------
# sufficient conditions and proper efficiency
# -----------------------------------------------------------------------------


def _require(C, f, alpha, lam, eps, kind, budget, seed) -> AugDualResult:
    res = check_aug_dual(C, AugDualQuery(np.asarray(f, float), alpha, lam, eps, kind), budget, seed)
    if not res.member:
        raise PreconditionFailed(f"({kind.value}) augmented dual check failed, min margin {res.min_margin:.3g}")
    return res


@dataclass(frozen=True)
class InclusionResult:
    indices: tuple[int, ...]
    ae_indices: tuple[int, ...]
    dual: AugDualResult


def sufficient_ae(A, C: CoradiantSet, eps: float, f, alpha: float, lam: float, budget: int = 10_000, seed=0) -> InclusionResult:
    """``ae_bp(A, f, alpha, lam)``, asserted to lie inside ``AE(A, C, eps)``."""
    dual = _require(C, f, alpha, lam, eps, DualKind.STRICT, budget, seed)
    S = ae_bp(C.space, A, f, alpha, lam)
    E = ae(A, C, eps).efficient_indices
    extra = sorted(set(S) - set(E))
    if extra:
        raise TheoremViolation("scalarized point is not eps-efficient", witness=extra)
    return InclusionResult(S, E, dual)


def shifted_sublevel_ae(A, C: CoradiantSet, eps: float, f, alpha: float, lam: float, x0: int, budget: int = 10_000, seed=0) -> InclusionResult:
    """``{a in A : p(a - x0) < 0}``, asserted to lie inside ``AE(A, C, eps)``."""
    space = C.space
    dual = _require(C, f, alpha, lam, eps, DualKind.WEAK, budget, seed)
    A = _points(space, A)
    if x0 not in ae_bp(space, A, f, alpha, lam):
        raise PreconditionFailed(f"x0 = {A[x0].tolist()} is not in AE(A, K_f,alpha, lam)")
    S = tuple(int(i) for i in np.flatnonzero(np.atleast_1d(space.p_sublinear(f, alpha, A - A[x0])) < 0))
    E = ae(A, C, eps).efficient_indices
    extra = sorted(set(S) - set(E))
    if extra:
        raise TheoremViolation("shifted sublevel point is not eps-efficient", witness=extra)
    return InclusionResult(S, E, dual)


@dataclass(frozen=True)
class PaeCertificate:
    f: np.ndarray
    alpha: float
    lam: float
    eps: float
    x0: int
    enclosing_level: float
    checks: dict = field(default_factory=dict)


def check_pae(A, C: CoradiantSet, cert: PaeCertificate, budget: int = 10_000, seed=0) -> dict:
    """Re-verify a PAE certificate: ``C ⊂ int K`` on samples and ``x0 ∈ AE(A, K, eps)``."""
    space = C.space
    rng = np.random.default_rng(seed)
    K = BishopPhelps(space, cert.f, cert.alpha, cert.enclosing_level, strict=True)
    Y = np.vstack([C.sample_members(budget, rng), C.sample_boundary(max(budget // 10, 16), rng)])
    m = K.margins(Y)
    if m.min() <= 0:
        raise EnclosureFailed("a member of C lies outside the open enclosing set", witness=Y[int(m.argmin())].tolist())
    res = ae(A, K, cert.eps)
    if cert.x0 not in res.efficient_indices:
        raise NotEfficientInK("x0 is dominated in the enclosing set", witness=res.exclusions[cert.x0].tolist())
    return {"enclosure_min_margin": float(m.min()), "samples": len(Y), "x0_efficient_in_K": True}


def certify_pae(A, C: CoradiantSet, eps: float, f, alpha: float, lam: float, x0: int, budget: int = 10_000, seed=0) -> PaeCertificate:
    """Certify ``x0`` as eps-properly efficient through ``K = {f - alpha||.|| > lam/eps}``."""
    space = C.space
    _require(C, f, alpha, lam, eps, DualKind.STRICT, budget, seed)
    A = _points(space, A)
    if x0 not in ae_bp(space, A, f, alpha, lam):
        raise PreconditionFailed("x0 is not in AE(A, K_f,alpha, lam)")
    cert = PaeCertificate(np.asarray(f, float), float(alpha), float(lam), float(eps), int(x0), lam / eps)
    checks = check_pae(A, C, cert, budget, seed)
    object.__setattr__(cert, "checks", checks)
    return cert


# -----------------------------------------------------------------------------
# necessary conditions
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class NecessaryReport:
    f: np.ndarray
    alpha1: float
    alpha2: float
    lam: float
    eta: float
    ae_dilated: tuple[int, ...]
    ae_C: tuple[int, ...]
    probes: tuple[float, ...]
    checks: int
    min_slack: float
    certificate: object = None


def necessary_pipeline(
    A,
    C: CoradiantSet,
    delta: float,
    n: float,
    eps: float,
    resolution: int = 256,
    seed=0,
    lam_samples: int = 20_000,
    verify_samples: int = 4_000,
) -> NecessaryReport:
    """Run the SSP-based necessary condition end to end.

    Builds ``C_delta``, separates ``C`` from it in general mode, then for
    every ``x0 ∈ AE(A, C_delta(eta), eps)`` and every probe ``alpha`` strictly
    between ``alpha1`` and ``alpha2`` asserts

    * ``p_{f,alpha}(x - x0) > -lam eps`` for all ``x`` in ``A``;
    * ``{a : p(a - x0) < 0} ⊂ AE(A, C, eps)``.

    Violations raise ``TheoremViolation`` carrying ``(x0, x, alpha)``.
    """
    space = C.space
    if not 0 < eps < 1:
        raise InvalidInput("eps must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    dC = d_inf(C, 2000, seed=int(rng.integers(2**31))).value
    if not 0 < delta < dC:
        raise HypothesisUnmet(f"need 0 < delta < d_C ≈ {dC:.6g}")
    if not slice_nonempty(C, n, seed=int(rng.integers(2**31))):
        raise HypothesisUnmet(f"C has no sampled member of norm {n}")
    A = _points(space, A)
    Cd = RadialNeighborhood(C, delta)
    cert = separate_coradiant(
        C, Cd, Mode.GENERAL, resolution, int(rng.integers(2**31)), n=n, lam_samples=lam_samples, verify_samples=verify_samples
    )
    if not cert.alpha2 <= 1.0:
        raise TheoremViolation(f"alpha2 = {cert.alpha2} exceeds 1")
    lam, eta = cert.lam, cert.eta
    dil = ae(A, scale(Cd, eta), eps).efficient_indices
    base = ae(A, C, eps).efficient_indices
    # C ⊂ C_delta(eta) for eta <= 1, so the dilated set excludes at least as much
    if not set(dil) <= set(base):
        raise TheoremViolation("efficient for the dilated set but not for C", witness=sorted(set(dil) - set(base)))
    probes = tuple(cert.alpha1 + s * (cert.alpha2 - cert.alpha1) for s in (0.25, 0.5, 0.75))
    checks, slack = 0, np.inf
    for i in dil:
        D = A - A[i]
        for a in probes:
            p = np.atleast_1d(space.p_sublinear(cert.f, a, D))
            s = p + lam * eps
            checks += len(p)
            slack = min(slack, float(s.min()))
            if not np.all(s > 0):
                j = int(s.argmin())
                raise TheoremViolation("p(x - x0) > -lam eps fails", witness=(A[i].tolist(), A[j].tolist(), a))
            sub = set(int(j) for j in np.flatnonzero(p < 0))
            if not sub <= set(base):
                raise TheoremViolation("shifted sublevel point not eps-efficient", witness=(A[i].tolist(), sorted(sub - set(base)), a))
    return NecessaryReport(cert.f, cert.alpha1, cert.alpha2, lam, eta, dil, base, probes, checks, slack, cert)
