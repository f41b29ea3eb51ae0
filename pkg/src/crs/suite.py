"""Theorem-verification suite shared by ``crs suite`` and the acceptance tests.

Each ``criterion_k(seed)`` returns a detail dict with a ``passed`` flag;
``run_criterion`` wraps it in a timed ``Check``, and a raised library error
counts as a failure recorded in the detail.  Budgets are fixed here so runs
are reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .efficiency import (
    AugDualQuery,
    DualKind,
    ae,
    ae_bp,
    amin,
    check_aug_dual,
    necessary_pipeline,
    shifted_sublevel_ae,
    sufficient_ae,
    synth_aug_dual,
)
from .errors import CrsError, SspFailed, TheoremViolation
from .geometry import min_norm_point
from .instance import FAMILIES, dumps, load_fixture, parse_instance, random_instance, random_pointed_cone
from .separation import (
    Mode,
    cone_witness,
    delta_margin,
    separate_coradiant,
    ssp_check,
    verify_dichotomy,
    verify_dilated_pair,
    verify_witness,
)
from .sets import BishopPhelps, ConeTruncated, cone_of, is_norm_base, radius_inf, scale
from .space import NormKind, Space

T_NO_BASE = (0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0)
NORMS = (NormKind.L2, NormKind.L1, NormKind.LINF)


@dataclass
class Check:
    criterion: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.criterion:2d} {self.name} ({self.seconds:.1f}s)"


def _close(a, b, tol) -> bool:
    return bool(np.all(np.abs(np.asarray(a, float) - np.asarray(b, float)) <= tol))


# -----------------------------------------------------------------------------
# norm bases
# -----------------------------------------------------------------------------


def criterion_1(seed: int = 42) -> dict:
    E3 = load_fixture("example3").set("C")
    d = {}
    for t in (1.0, 1.5, 5.0):
        r = is_norm_base(E3, t, 10_000, seed)
        d[f"t={t}"] = r.confirmed
    r = is_norm_base(E3, 0.5, 10_000, seed)
    # the witness must be checkable by hand: y in C but 0.5 y/||y|| is not
    w = r.witness
    d["t=0.5 refuted"] = (not r.confirmed) and w is not None and bool(E3.contains(w)[0]) and not bool(E3.contains(0.5 * w / np.linalg.norm(w))[0])
    rad = radius_inf(E3, seed=seed)
    d["radius"] = rad.estimate
    d["passed"] = all(d[f"t={t}"] for t in (1.0, 1.5, 5.0)) and d["t=0.5 refuted"] and rad.finite and abs(rad.estimate - 1.0) <= 1e-3
    return d


def criterion_2(seed: int = 42) -> dict:
    inst = load_fixture("no_norm_base")
    d, ok = {}, True
    for name in ("K1", "K2", "K3"):
        K = inst.set(name)
        for t in T_NO_BASE:
            r = is_norm_base(K, t, 10_000, seed)
            w = r.witness
            good = (not r.confirmed) and w is not None and bool(K.contains(w)[0]) and not bool(K.contains(t * w / K.space.norm(w))[0])
            d[f"{name} t={t}"] = None if w is None else w.tolist()
            ok &= good
    d["passed"] = bool(ok)
    return d


def criterion_3(seed: int = 42) -> dict:
    E3 = load_fixture("example3").set("C")
    base = radius_inf(E3, seed=seed).estimate
    d = {"I_K": base}
    ok = True
    for eta in (0.25, 0.5, 2.0):
        r = radius_inf(scale(E3, eta), seed=seed).estimate
        d[f"eta={eta}"] = r
        ok &= r is not None and abs(r - eta * base) <= 1e-3
    d["passed"] = bool(ok)
    return d


# -----------------------------------------------------------------------------
# scalarization
# -----------------------------------------------------------------------------


def bp_instances(seed: int, count: int = 200):
    """Seeded (space, A, f, alpha, lam) draws with dim <= 4 and |A| <= 50."""
    rng = np.random.default_rng(seed)
    for i in range(count):
        dim = 1 + i % 4
        space = Space(dim, NORMS[i % 3])
        f = rng.standard_normal(dim)
        alpha = float(rng.uniform(0.1, 0.9)) * space.dual_norm(f)
        lam = float(rng.uniform(0.2, 3.0))
        A = rng.uniform(-5, 5, size=(int(rng.integers(2, 51)), dim))
        if i % 5 == 0:  # integer grids produce exact ties on the boundary
            A = np.round(A)
        yield space, A, f, alpha, lam


def criterion_4(seed: int = 42) -> dict:
    mismatches = 0
    for space, A, f, alpha, lam in bp_instances(seed):
        left = ae(A, BishopPhelps(space, f, alpha, 1.0, strict=True), lam).efficient_indices
        right = ae_bp(space, A, f, alpha, lam)
        mismatches += left != right
    hand = load_fixture("bp_hand")
    idx = ae_bp(hand.space, hand.pts("A"), hand.functional("f"), hand.param("alpha"), hand.param("lambda"))
    pts = hand.pts("A")[list(idx)].tolist()
    return {"instances": 200, "mismatches": int(mismatches), "hand": pts, "passed": mismatches == 0 and pts == [[-3.0, 0.0], [0.0, 5.0]]}


def criterion_5(seed: int = 42, count: int = 100, budget: int = 1000) -> dict:
    violations, inclusions, skipped = 0, 0, 0
    for i in range(count):
        inst = random_instance(seed * 1000 + i, 2 + i % 2, FAMILIES[i % 3], 20)
        C, A, eps = inst.set("C"), inst.pts("A"), inst.param("eps")
        try:
            s = synth_aug_dual(C, eps, budget, seed + i, iters=100)
            sufficient_ae(A, C, eps, s.f, s.alpha, s.lam / 2, budget, seed + i)
            inclusions += 1
            for x0 in ae_bp(C.space, A, s.f, s.alpha, s.lam):
                shifted_sublevel_ae(A, C, eps, s.f, s.alpha, s.lam, x0, budget, seed + i)
                inclusions += 1
        except CrsError as e:
            if isinstance(e, TheoremViolation):
                violations += 1
            else:
                skipped += 1
    return {"instances": count, "inclusions_checked": inclusions, "violations": violations, "skipped": skipped, "passed": violations == 0 and skipped == 0}


def criterion_6(seed: int = 42) -> dict:
    d, ok = {}, True
    for name, lam_over_eps in (("orthant2", 0.25), ("orthant3", 1 / 6)):
        C = load_fixture(name).set("C")
        for eps in (1.0, 0.5):
            s = synth_aug_dual(C, eps, 10_000, seed)
            dim = C.space.dim
            good = abs(s.lam - lam_over_eps * eps) <= 1e-4
            if dim == 2:
                good &= _close(s.f, np.ones(2) / np.sqrt(2), 1e-4) and abs(s.alpha - 1 / (2 * np.sqrt(2))) <= 1e-4
            weak = check_aug_dual(C, AugDualQuery(s.f, s.alpha, s.lam, eps, DualKind.WEAK), 10_000, seed + 1)
            strict = check_aug_dual(C, AugDualQuery(s.f, s.alpha, s.lam / 2, eps, DualKind.STRICT), 10_000, seed + 2)
            good &= weak.member and strict.member and min(weak.min_margin, strict.min_margin) >= -1e-9
            d[f"{name} eps={eps}"] = {"f": s.f.tolist(), "alpha": s.alpha, "lam": s.lam, "weak": weak.min_margin, "strict": strict.min_margin}
            ok &= bool(good)
    d["passed"] = bool(ok)
    return d


# -----------------------------------------------------------------------------
# separation
# -----------------------------------------------------------------------------


def criterion_7(seed: int = 42) -> tuple[dict, object]:
    pair = load_fixture("orthant_pair")
    C, K = cone_of(pair.set("C")), cone_of(pair.set("K"))
    rep = ssp_check(C, K, 2000, seed)
    w = cone_witness(C, K, rep, 10_000, seed + 1)
    fresh = verify_witness(C, K, w.f, (w.alpha1, w.alpha_mid, w.alpha2), 10_000, seed + 2)
    worst = min(min(v) for v in fresh.values())
    oo = load_fixture("orthant_orthant")
    Co, Ko = oo.set("C"), oo.set("K")
    fails = not ssp_check(Co, Ko, 2000, seed).holds
    invariant = all(ssp_check(C, K, 2000, seed, t=t).holds and not ssp_check(Co, Ko, 2000, seed, t=t).holds for t in (1.0, 2.0, 5.0))
    d = {
        "hull_distance": rep.hull_distance,
        "witness_f": w.f.tolist(),
        "alphas": [w.alpha1, w.alpha2],
        "fresh_min_margin": worst,
        "orthant_orthant_fails": fails,
        "t_invariant": invariant,
    }
    d["passed"] = bool(rep.holds and rep.hull_distance > 0 and worst >= 1e-6 and fails and invariant)
    return d, (C, K, w)


def random_separated_pair(seed: int):
    """Co-radiant pair ``(C, K)`` with ``cone(C)`` inside ``int cone(K)``.

    ``C`` truncates a random simplicial cone; ``K`` truncates the cone whose
    cross-section is the cross-section of ``cone(C)`` pushed outward from its
    centroid.  Pairs failing the SSP are redrawn.
    """
    rng = np.random.default_rng(seed)
    for _ in range(100):
        dim = int(rng.integers(2, 4))
        space = Space(dim, NORMS[int(rng.integers(3))])
        G, axis = random_pointed_cone(rng, dim, m=dim, spread=0.6)
        P = G / (G @ axis)[:, None]
        centre = P.mean(axis=0)
        GK = centre + (1.0 + rng.uniform(0.2, 0.6)) * (P - centre)
        if np.any(GK @ axis <= 0) or min_norm_point(GK / np.linalg.norm(GK, axis=1)[:, None])[1] <= 0.05:
            continue
        C = ConeTruncated(space, G, axis, float(rng.uniform(0.5, 2.0)))
        K = ConeTruncated(space, GK, axis, float(rng.uniform(0.5, 2.0)))
        if ssp_check(cone_of(C), cone_of(K), 1000, int(rng.integers(2**31))).holds:
            return C, K
    raise SspFailed("no separated pair drawn")


def criterion_9(seed: int = 42, count: int = 20) -> tuple[dict, list]:
    rows, ok, pairs = [], True, []
    for i in range(count):
        C, K = random_separated_pair(seed * 100 + i)
        pairs.append((C, K))
        try:
            cert = separate_coradiant(C, K, Mode.BOUNDARY_ONLY, 2000, seed + i, lam_samples=100_000, verify_samples=100_000)
            cls = verify_dichotomy(C, K, cert, 10_000, seed + i)
            rows.append({"dim": C.space.dim, "norm": C.space.norm_kind.value, "lam": cert.lam, "eta": cert.eta, "dichotomy": cls})
        except CrsError as e:
            ok = False
            rows.append({"error": f"{type(e).__name__}: {e}"})
    return {"pairs": rows, "passed": bool(ok)}, pairs


def criterion_8(seed: int = 42, witnesses=None) -> dict:
    """Dilated-pair check at delta'/2 for the orthant witness and the pair witnesses."""
    if witnesses is None:
        _, w7 = criterion_7(seed)
        _, pairs = criterion_9(seed)
        witnesses = [w7] + [(cone_of(C), cone_of(K), None) for C, K in pairs]
    rows, ok = [], True
    for i, (C, K, w) in enumerate(witnesses):
        try:
            if w is None:
                w = cone_witness(C, K, ssp_check(C, K, 2000, seed + i), 10_000, seed + i)
            dp = delta_margin(w, C.space)
            res = verify_dilated_pair(C, K, w, dp / 2, 10_000, seed + i)
            rows.append({"delta_prime": dp, "min_margin": min(min(v) for v in res.values())})
        except CrsError as e:
            ok = False
            rows.append({"error": f"{type(e).__name__}: {e}"})
    return {"witnesses": rows, "passed": bool(ok)}


# -----------------------------------------------------------------------------
# necessary conditions, AMin, monotonicity, determinism
# -----------------------------------------------------------------------------


def criterion_10(seed: int = 42) -> dict:
    inst = load_fixture("necessary2d")
    r = necessary_pipeline(inst.pts("A"), inst.set("C"), inst.param("delta"), inst.param("n"), inst.param("eps"), seed=seed)
    return {
        "alpha2": r.alpha2,
        "lam": r.lam,
        "eta": r.eta,
        "checks": r.checks,
        "min_slack": r.min_slack,
        "ae_dilated": list(r.ae_dilated),
        "passed": bool(r.alpha2 <= 1.0 and r.min_slack > 0 and r.checks > 0),
    }


def criterion_11(seed: int = 42) -> dict:
    violations = 0
    for space, A, f, alpha, lam in bp_instances(seed + 1):
        a = set(amin(space, f, alpha, A, lam))
        violations += not a <= set(ae_bp(space, A, f, alpha, lam))
    hand = load_fixture("bp_hand")
    A, f, al, eps = hand.pts("A"), hand.functional("f"), hand.param("alpha"), hand.param("eps")
    am, bp = amin(hand.space, f, al, A, eps), ae_bp(hand.space, A, f, al, eps)
    strict = set(am) < set(bp)
    return {"violations": violations, "fixture_amin": list(am), "fixture_ae_bp": list(bp), "passed": violations == 0 and strict}


def criterion_12(seed: int = 42) -> dict:
    from .cli import default_budgets, run

    bad = 0
    rng = np.random.default_rng(seed)
    for i in range(100):
        inst = random_instance(seed * 7919 + i, 2 + i % 3, FAMILIES[i % 3], 25)
        e1, e2 = np.sort(rng.uniform(0.05, 3.0, 2))
        C, A = inst.set("C"), inst.pts("A")
        bad += not set(ae(A, C, e1).efficient_indices) <= set(ae(A, C, e2).efficient_indices)
    budgets = default_budgets(2000)
    same = True
    for cmd, fx in (("ae", "ae_worked"), ("separate", "orthant_pair"), ("augdual-synth", "orthant2"), ("ssp", "orthant_orthant")):
        inst = load_fixture(fx)
        r1, r2 = run(cmd, inst, seed, budgets), run(cmd, parse_instance(inst.text()), seed, budgets)
        same &= r1.exit_code == 0 and dumps(r1.without_time()) == dumps(r2.without_time())
    return {"monotonicity_violations": int(bad), "records_identical": bool(same), "passed": bad == 0 and same}


NAMES = {
    1: "norm base of the x+y+z >= 1 set",
    2: "no norm base for K1, K2, K3",
    3: "scaling law of I_K",
    4: "scalarization equivalence",
    5: "sufficient conditions",
    6: "augmented dual synthesis",
    7: "SSP and cone witness",
    8: "delta' dilation margin",
    9: "separation certificates",
    10: "necessary-condition pipeline",
    11: "AMin inclusion",
    12: "eps-monotonicity and determinism",
}


def _timed(k: int, fn) -> Check:
    t0 = time.perf_counter()
    try:
        d = fn()
        passed = bool(d.pop("passed"))
    except CrsError as e:
        d, passed = {"error": f"{type(e).__name__}: {e}"}, False
    return Check(k, NAMES[k], passed, d, time.perf_counter() - t0)


def run_criterion(k: int, seed: int = 42) -> Check:
    if k == 7:
        return _timed(7, lambda: criterion_7(seed)[0])
    if k == 9:
        return _timed(9, lambda: criterion_9(seed)[0])
    return _timed(k, lambda: globals()[f"criterion_{k}"](seed))


def run_suite(seed: int = 42) -> list[Check]:
    """All twelve criteria; criterion 8 reuses the witnesses of 7 and 9."""
    out = {}
    ctx = {}

    def c7():
        d, ctx["w7"] = criterion_7(seed)
        return d

    def c9():
        d, ctx["pairs"] = criterion_9(seed)
        return d

    for k in range(1, 13):
        if k == 7:
            out[k] = _timed(7, c7)
        elif k == 9:
            out[k] = _timed(9, c9)
        elif k != 8:
            out[k] = run_criterion(k, seed)
    ws = ([ctx["w7"]] if "w7" in ctx else []) + [(cone_of(C), cone_of(K), None) for C, K in ctx.get("pairs", [])]
    out[8] = _timed(8, lambda: criterion_8(seed, ws))
    return [out[k] for k in range(1, 13)]
