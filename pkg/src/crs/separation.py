"""Strict separation of cones and hyperbolic separation of co-radiant sets.

The pipeline is constructive throughout:

1. ``ssp_check`` samples ``C ∩ S_X`` and ``bd(K) ∩ S_X``, and measures the
   distance between the two convex hulls (the second with the origin
   appended).  A positive distance yields a linear separating functional.
2. ``cone_witness`` turns that functional into ``(f, alpha1, alpha2)`` with
   ``f(u) > alpha`` on ``C ∩ S_X`` and ``f(v) < alpha`` on ``bd(K) ∩ S_X``.
3. ``separate_coradiant`` lifts the cone witness to co-radiant sets: it
   estimates ``lam = inf_C f - alpha2 ||.||`` and an admissible scaling
   ``eta`` of ``K``, then checks the two strict inequalities on fresh samples.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateCone,
    EmptySlice,
    HypothesisUnmet,
    Inconclusive,
    LambdaNotPositive,
    MixtureDetected,
    SspFailed,
    TheoremViolation,
    WitnessGapEmpty,
)
from .geometry import wolfe_min_norm
from .sets import (
    Cone,
    CoradiantSet,
    KnSlice,
    Verdict,
    cone_of,
    conic_neighborhood,
    d_inf,
    radius_inf,
    refine_min,
    scale,
    slice_nonempty,
)
from .space import GEOM_TOL, Space, _lp_norm

SSP_MARGIN = 1e-4
WITNESS_MARGIN = 1e-6
CO_MARGIN = 1e-6


# -----------------------------------------------------------------------------
# hull distance
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class HullDistance:
    distance: float
    witness: np.ndarray | None
    gap: float
    iterations_corral: int = 0

    def __iter__(self):
        yield self.distance
        yield self.witness


def hull_distance(P, Q, space: Space | None = None) -> HullDistance:
    """Euclidean distance between ``co(P)`` and ``co(Q)``.

    Runs Wolfe's minimum-norm-point method on the Minkowski difference
    ``co(P) - co(Q)`` through its support oracle, never forming the
    ``|P| x |Q|`` difference cloud.  When the distance is positive the
    witness ``f`` satisfies ``min f(P) > max f(Q)``; it is normalized to unit
    dual norm in ``space`` (Euclidean when ``space`` is None).
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if P.size == 0 or Q.size == 0:
        raise ValueError("both point sets must be nonempty")

    def support(x):
        i = int(np.argmin(P @ x))
        j = int(np.argmax(Q @ x))
        return P[i] - Q[j], (i, j)

    x, gap, corral, _ = wolfe_min_norm(support, (P[0] - Q[0], (0, 0)))
    dist = float(np.linalg.norm(x))
    if dist <= 1e-12:
        return HullDistance(0.0, None, gap, len(corral))
    w = x / dist
    if space is not None:
        w = w / space.dual_norm(w)
    return HullDistance(dist, w, gap, len(corral))


# -----------------------------------------------------------------------------
# SSP and cone witnesses
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class SspReport:
    holds: bool
    hull_distance: float
    witness: np.ndarray | None
    samples_C: int
    samples_K: int
    resolution: int
    t: float = 1.0
    margin: float = SSP_MARGIN


def ssp_check(C: Cone, K: Cone, resolution: int = 2000, seed=0, t: float = 1.0, margin: float = SSP_MARGIN) -> SspReport:
    """Decide the strict separation property for the cone pair ``(C, K)``.

    Both clouds are sampled on the sphere of radius ``t``; the verdict does
    not depend on ``t`` because hull distances scale linearly with it.
    """
    rng = np.random.default_rng(seed)
    P = C._unit_raw(resolution, rng)
    B = K._boundary_unit_raw(resolution, rng)
    if len(P) == 0 or len(B) == 0:
        raise DegenerateCone(f"no unit samples ({len(P)} in C, {len(B)} on bd K)")
    Q = np.vstack([B, np.zeros(C.space.dim)])
    hd = hull_distance(t * P, t * Q, C.space)
    holds = hd.distance > margin * t
    return SspReport(holds, hd.distance / t, hd.witness if holds else None, len(P), len(B), resolution, t, margin)


@dataclass(frozen=True)
class ConeWitness:
    f: np.ndarray
    alpha1: float
    alpha2: float
    gamma: float
    beta: float
    margins: dict = field(default_factory=dict)

    @property
    def alpha_mid(self) -> float:
        return 0.5 * (self.alpha1 + self.alpha2)


def _witness_margins(space: Space, f, U: np.ndarray, V: np.ndarray, alphas) -> dict:
    """Worst slack of the two witness inequalities on ``-U`` and ``-V``."""
    X, Y = -U, -V
    nx, ny = _lp_norm(space.norm_kind, X), _lp_norm(space.norm_kind, Y)
    out = {}
    for a in alphas:
        # f(x) + a||x|| < 0 on -C,  f(y) + a||y|| > 0 on -bd K
        out[float(a)] = (float(-np.max(X @ f + a * nx)), float(np.min(Y @ f + a * ny)))
    return out


def verify_witness(C: Cone, K: Cone, f, alphas, samples: int = 10_000, seed=0, margin: float = WITNESS_MARGIN) -> dict:
    rng = np.random.default_rng(seed)
    U = C._unit_raw(samples, rng)
    V = K._boundary_unit_raw(samples, rng)
    res = _witness_margins(C.space, np.asarray(f, float), U, V, alphas)
    for a, (mc, mk) in res.items():
        if min(mc, mk) < margin:
            raise TheoremViolation(f"witness inequality fails at alpha={a}: margins {mc:.3g}, {mk:.3g}", witness=(a, mc, mk))
    return res


def cone_witness(C: Cone, K: Cone, report: SspReport, resolution: int = 10_000, seed=0) -> ConeWitness:
    """Synthesize ``(f, alpha1, alpha2)`` from an SSP report.

    ``gamma`` is the sampled infimum of ``f`` on ``C ∩ S_X`` and ``beta`` the
    sampled supremum on ``bd(K) ∩ S_X``; the alphas sit at the quartiles of
    ``(max(beta, 0), gamma)``.
    """
    if not report.holds or report.witness is None:
        raise SspFailed("the SSP report does not hold")
    rng = np.random.default_rng(seed)
    U = C._unit_raw(resolution, rng)
    V = K._boundary_unit_raw(resolution, rng)
    for f in (report.witness, -report.witness):
        gamma = float(np.min(U @ f))
        beta = float(np.max(V @ f))
        lo = max(beta, 0.0)
        if lo < gamma:
            break
    else:
        raise WitnessGapEmpty(f"beta = {beta:.6g} >= gamma = {gamma:.6g}")
    a1 = lo + 0.25 * (gamma - lo)
    a2 = lo + 0.75 * (gamma - lo)
    margins = verify_witness(C, K, f, (a1, 0.5 * (a1 + a2), a2), resolution, rng)
    return ConeWitness(np.asarray(f, float), a1, a2, gamma, beta, margins)


def delta_margin(w: ConeWitness, space: Space) -> float:
    """Largest safe dilation: ``(alpha2 - alpha0) / (2 (||f||_* + alpha0))``."""
    a0 = 0.5 * (w.alpha1 + w.alpha2)
    return (w.alpha2 - a0) / (2.0 * (space.dual_norm(w.f) + a0))


def verify_dilated_pair(C: Cone, K: Cone, w: ConeWitness, delta: float, samples: int = 10_000, seed=0) -> dict:
    """Check the witness on ``(C_delta, K)`` with the range ``[alpha1, alpha0]``.

    Besides random points of the dilation, each base sample is pushed by
    ``delta`` against the peak direction of ``f``, which is where the
    dilation hurts the inequality most.
    """
    space = C.space
    rng = np.random.default_rng(seed)
    D = conic_neighborhood(C, delta, seed=int(rng.integers(2**31)))
    S = C._unit_raw(samples // 2, rng)
    worst = S - delta * space.peak_direction(w.f)
    worst = worst / _lp_norm(space.norm_kind, worst)[:, None]
    U = np.vstack([D._unit_raw(samples - len(S), rng), worst])
    V = K._boundary_unit_raw(samples, rng)
    a0 = 0.5 * (w.alpha1 + w.alpha2)
    res = _witness_margins(space, w.f, U, V, (w.alpha1, 0.5 * (w.alpha1 + a0), a0))
    for a, (mc, mk) in res.items():
        if min(mc, mk) < WITNESS_MARGIN:
            raise TheoremViolation(f"dilated pair fails at alpha={a}, delta={delta}", witness=(a, mc, mk))
    return res


# -----------------------------------------------------------------------------
# co-radiant separation
# -----------------------------------------------------------------------------


class Mode(str, enum.Enum):
    BOUNDARY_ONLY = "boundary-only"
    COMPLEMENT = "complement"
    GENERAL = "general"


@dataclass(frozen=True)
class SeparationCertificate:
    f: np.ndarray
    alpha1: float
    alpha2: float
    lam: float
    eta_max: float
    eta: float
    mode: Mode
    n: float | None = None
    radius_K: float | None = None
    margins: dict = field(default_factory=dict)
    budgets: dict = field(default_factory=dict)

    @property
    def alphas(self) -> tuple[float, float, float]:
        return (self.alpha1, 0.5 * (self.alpha1 + self.alpha2), self.alpha2)


def hyperbolic(space: Space, f, alpha: float, X) -> np.ndarray:
    """``f(x) - alpha ||x||`` row-wise."""
    X = np.atleast_2d(X)
    return X @ np.asarray(f, float) - alpha * _lp_norm(space.norm_kind, X)


def sample_co(C: CoradiantSet, n: int, rng, pool: int | None = None) -> np.ndarray:
    """Random convex combinations of up to ``dim + 1`` members of ``C``."""
    d = C.space.dim
    M = C.sample_members(pool or max(4 * n, 64), rng)
    if len(M) == 0:
        raise HypothesisUnmet("no members of C to combine")
    k = rng.integers(1, d + 2, size=n)
    idx = rng.integers(len(M), size=(n, d + 1))
    # flat Dirichlet weights on the first k slots of each row
    W = rng.exponential(size=(n, d + 1))
    W[np.arange(d + 1)[None, :] >= k[:, None]] = 0.0
    W /= W.sum(axis=1, keepdims=True)
    out = np.einsum("nk,nkd->nd", W, M[idx])
    out[: min(n, len(M))] = M[: min(n, len(M))]
    return out


def infimum_hyperbolic(C: CoradiantSet, f, alpha: float, samples: int = 100_000, seed=0):
    """Sampled ``inf_{y in C} f(y) - alpha ||y||`` with a local refinement."""
    rng = np.random.default_rng(seed)
    X = np.vstack([C.sample_members(samples, rng), C.sample_boundary(max(samples // 10, 16), rng)])
    if len(X) == 0:
        raise HypothesisUnmet("no members of C")
    v = hyperbolic(C.space, f, alpha, X)
    starts = X[np.argsort(v)[:10]]
    x, val = refine_min(C, lambda Y: hyperbolic(C.space, f, alpha, Y), starts, rng)
    return float(min(val, v.min())), x


def _complement_samples(K_eta: CoradiantSet, co_pts: np.ndarray, n: int, rng) -> np.ndarray:
    """Points of ``X \\ int(K_eta)``: box rejection plus shrunken co(C) points."""
    space = K_eta.space
    R = 10.0 * float(np.max(_lp_norm(space.norm_kind, co_pts)))
    box = rng.uniform(-R, R, size=(n, space.dim))
    # pull co(C) points toward the origin, where they leave K(eta)
    t = 10.0 ** rng.uniform(-4, 0, size=n)
    pulled = co_pts[rng.integers(len(co_pts), size=n)] * t[:, None]
    cand = np.vstack([box, pulled, K_eta.sample_boundary(max(n // 4, 8), rng), np.zeros((1, space.dim))])
    status, _ = K_eta.verdicts(cand)
    if np.any(status == Verdict.UNKNOWN):
        cand = cand[status != Verdict.UNKNOWN]
        status = status[status != Verdict.UNKNOWN]
    return cand[status != Verdict.IN]


def verify_certificate(C: CoradiantSet, K: CoradiantSet, cert: SeparationCertificate, samples: int = 100_000, seed=0, eta: float | None = None) -> dict:
    """Check both strict inequalities of a certificate on fresh samples.

    ``co(C)`` points must satisfy ``f - alpha ||.|| >= lam - 1e-6`` and the
    points of ``bd K(eta)`` (or of ``X \\ int K(eta)``) must stay strictly
    below ``lam``, for ``alpha`` in {alpha1, midpoint, alpha2}.
    """
    rng = np.random.default_rng(seed)
    eta = cert.eta if eta is None else eta
    space = C.space
    co_pts = sample_co(C, samples, rng)
    K_eta = scale(K, eta)
    if cert.mode is Mode.BOUNDARY_ONLY:
        other = K_eta.sample_boundary(samples, rng)
    else:
        other = _complement_samples(K_eta, co_pts, samples, rng)
    if len(other) == 0:
        raise Inconclusive("no samples on the K side")
    margins = {}
    for a in cert.alphas:
        vc = hyperbolic(space, cert.f, a, co_pts)
        vk = hyperbolic(space, cert.f, a, other)
        lo, hi = float(vc.min()), float(vk.max())
        margins[float(a)] = {"co_C_min_minus_lam": lo - cert.lam, "K_side_max_minus_lam": hi - cert.lam}
        if lo < cert.lam - CO_MARGIN:
            raise TheoremViolation(f"co(C) point below lam at alpha={a}", witness=co_pts[int(vc.argmin())].tolist())
        if not hi < cert.lam:
            raise TheoremViolation(f"K-side point reaches lam at alpha={a}", witness=other[int(vk.argmax())].tolist())
    margins["samples"] = {"co_C": len(co_pts), "K_side": len(other), "eta": eta}
    return margins


def separate_coradiant(
    C: CoradiantSet,
    K: CoradiantSet,
    mode: Mode | str = Mode.BOUNDARY_ONLY,
    resolution: int = 2000,
    seed=0,
    n: float | None = None,
    lam_samples: int = 100_000,
    verify_samples: int = 100_000,
    eta_fraction: float = 0.9,
) -> SeparationCertificate:
    """Build and verify a hyperbolic separation certificate for ``(C, K)``.

    Modes
    -----
    ``boundary-only``
        ``K`` needs a norm base; separates ``co(C)`` from ``bd K(eta)``.
    ``complement``
        Additionally needs a common point of ``co(C)`` and ``K``; separates
        ``co(C)`` from ``X \\ int K(eta)``.
    ``general``
        No norm base needed; the SSP is tested against ``cone(K ∩ n S_X)``
        and ``eta <= 1``.
    """
    mode = Mode(mode)
    rng = np.random.default_rng(seed)
    seeds = rng.integers(2**31, size=6)
    if d_inf(C, budget=2000, seed=int(seeds[0])).value <= C.space.tol:
        raise HypothesisUnmet("d_C is not positive")

    if mode is not Mode.BOUNDARY_ONLY:
        pts = sample_co(C, 2000, rng)
        if not np.any(K.contains(pts)):
            raise HypothesisUnmet("no sampled common point of co(C) and K")

    rK = None
    if mode is Mode.GENERAL:
        if n is None:
            raise HypothesisUnmet("general mode needs n")
        if not slice_nonempty(K, n, seed=int(seeds[1])):
            raise EmptySlice(f"no member of K with norm {n}")
        cone_K = cone_of(KnSlice(K, n))
    else:
        r = radius_inf(K, seed=int(seeds[1]))
        if not r.finite:
            raise HypothesisUnmet(f"K shows no norm base up to t = {r.t_max}")
        rK = r.upper
        cone_K = cone_of(K)
    cone_C = cone_of(C)

    report = ssp_check(cone_C, cone_K, resolution, int(seeds[2]))
    if not report.holds:
        raise SspFailed(f"hull distance {report.hull_distance:.3g} <= {report.margin}")
    w = cone_witness(cone_C, cone_K, report, resolution, int(seeds[3]))
    lam, _ = infimum_hyperbolic(C, w.f, w.alpha2, lam_samples, int(seeds[4]))
    if lam <= C.space.tol:
        raise LambdaNotPositive(f"sampled lam = {lam:.3g}")
    if mode is Mode.GENERAL:
        # K_n is a norm base of K^n, so I_{K^n} <= n
        eta_max = min(1.0, lam / n)
    else:
        eta_max = lam / rK
    cert = SeparationCertificate(
        f=w.f,
        alpha1=w.alpha1,
        alpha2=w.alpha2,
        lam=lam,
        eta_max=eta_max,
        eta=eta_fraction * eta_max,
        mode=mode,
        n=n,
        radius_K=rK,
        budgets={"resolution": resolution, "lam_samples": lam_samples, "verify_samples": verify_samples},
    )
    margins = verify_certificate(C, K, cert, verify_samples, int(seeds[5]))
    margins["witness"] = {str(a): list(m) for a, m in w.margins.items()}
    margins["hull_distance"] = report.hull_distance
    object.__setattr__(cert, "margins", margins)
    return cert


def verify_dichotomy(C: CoradiantSet, K: CoradiantSet, cert: SeparationCertificate, samples: int = 10_000, seed=0, eta: float | None = None) -> str:
    """Classify ``co(C)`` against ``K(eta)``: all inside or all outside.

    A mixture, or any sample on the boundary band, falsifies the run.
    """
    rng = np.random.default_rng(seed)
    eta = cert.eta if eta is None else eta
    pts = sample_co(C, samples, rng)
    status, _ = scale(K, eta).verdicts(pts)
    if np.any(status == Verdict.UNKNOWN):
        raise Inconclusive("Unknown membership while classifying co(C)")
    inside = status == Verdict.IN
    outside = status == Verdict.OUT
    if inside.all():
        return "AllInside"
    if outside.all():
        return "AllOutside"
    a = pts[int(np.argmax(inside))] if inside.any() else pts[int(np.argmax(status == Verdict.BOUNDARY))]
    b = pts[int(np.argmax(~inside))]
    raise MixtureDetected("co(C) straddles K(eta)", witness=(a.tolist(), b.tolist()))


__all__ = [
    "GEOM_TOL",
    "ConeWitness",
    "HullDistance",
    "Mode",
    "SeparationCertificate",
    "SspReport",
    "cone_witness",
    "delta_margin",
    "hull_distance",
    "hyperbolic",
    "infimum_hyperbolic",
    "sample_co",
    "separate_coradiant",
    "ssp_check",
    "verify_certificate",
    "verify_dichotomy",
    "verify_dilated_pair",
    "verify_witness",
]
