import dataclasses
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crs import EnclosureFailed, HypothesisUnmet, InvalidInput, NormKind, PreconditionFailed, Space
from crs.efficiency import (
    AugDualQuery,
    DualKind,
    ae,
    ae_bp,
    amin,
    certify_pae,
    check_aug_dual,
    check_pae,
    efficient,
    necessary_pipeline,
    shifted_sublevel_ae,
    sufficient_ae,
    synth_aug_dual,
)
from crs.instance import FAMILIES, load_fixture, random_instance
from crs.sets import BishopPhelps, ConeTruncated, GeneratedCone, cone_of, scale

F2 = np.array([1.0, 1.0]) / np.sqrt(2)
A4 = np.array([[0, 0], [1, 0], [0, 1], [2, 2]], dtype=float)
HAND = np.array([[0, 0], [-3, 0], [0, 5]], dtype=float)


@pytest.fixture
def O2(l2):
    return ConeTruncated(l2, np.eye(2), np.ones(2), 1.0)


def oracle_ae_orthant(A, eps):
    """Brute force over ordered pairs for C = {x >= 0, x1 + x2 >= 1}."""
    keep = []
    for i, x in enumerate(A):
        dominated = False
        for j, y in enumerate(A):
            d = x - y  # y in x - eps C  iff  x - y in eps C
            if i != j and np.all(d >= 0) and d.sum() >= eps:
                dominated = True
        if not dominated:
            keep.append(i)
    return tuple(keep)


def oracle_ae_bp(space, A, f, alpha, lam):
    return tuple(i for i, x in enumerate(A) if all(space.p_sublinear(f, alpha, y - x) >= -lam for y in A))


# -- ae ---------------------------------------------------------------------------


def test_ae_examples(O2):
    assert oracle_ae_orthant(A4, 1.0) == (0,)
    assert oracle_ae_orthant(A4, 2.0) == (0, 1, 2)
    r = ae(A4, O2, 1.0)
    assert r.efficient_indices == (0,)
    # (1,0) is excluded: (0,0) - (1,0) = (-1,0) lies in -C(1)
    assert O2.contains(-np.array([-1.0, 0.0])).all()
    assert ae(A4, O2, 2.0).efficient_indices == (0, 1, 2)
    w = ae(A4, O2, 2.0).exclusions[3]
    assert scale(O2, 2.0).contains(-np.asarray(w)).all()
    assert scale(O2, 2.0).contains(np.array([2.0, 2.0])).all()
    assert ae(A4[:1], O2, 1.0).efficient_indices == (0,)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 5.0))
def test_ae_matches_brute_force(seed, eps):
    space = Space(2)
    C = ConeTruncated(space, np.eye(2), np.ones(2), 1.0)
    A = np.round(np.random.default_rng(seed).uniform(-3, 3, (12, 2)), 1)
    A = np.unique(A, axis=0)
    assert ae(A, C, eps).efficient_indices == oracle_ae_orthant(A, eps)


def test_efficient_examples(l2):
    K = GeneratedCone(l2, np.eye(2))
    assert efficient(np.array([[0, 0], [1, 1]], float), K) == (0,)
    th = np.linspace(np.pi + 0.05, 1.5 * np.pi - 0.05, 15)
    arc = np.column_stack([np.cos(th), np.sin(th)])
    assert efficient(arc, K) == tuple(range(15))


def test_cone_efficiency_implies_ae(O2, rng):
    for _ in range(10):
        A = rng.uniform(-4, 4, (25, 2))
        E = set(efficient(A, cone_of(O2)))
        for eps in (0.1, 0.5, 1.0, 3.0):
            assert E <= set(ae(A, O2, eps).efficient_indices)


# -- Bishop-Phelps scalarization ----------------------------------------------------


def test_ae_bp_hand(l2):
    f = np.array([1.0, 0.0])
    assert oracle_ae_bp(l2, HAND, f, 0.5, 1.0) == (1, 2)
    assert l2.p_sublinear(f, 0.5, HAND[1] - HAND[0]) == pytest.approx(-1.5)
    assert ae_bp(l2, HAND, f, 0.5, 1.0) == (1, 2)
    assert ae_bp(l2, HAND[:1], f, 0.5, 1.0) == (0,)


def test_ae_bp_large_lambda_keeps_all(l2, rng):
    A = rng.uniform(-5, 5, (30, 2))
    f = np.array([0.3, -1.2])
    lam = l2.dual_norm(f) * max(np.linalg.norm(a - b) for a, b in itertools.combinations(A, 2))
    assert ae_bp(l2, A, f, 0.4, lam) == tuple(range(30))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(list(NormKind)), st.integers(1, 4))
def test_ae_bp_matches_both_sides(seed, kind, dim):
    rng = np.random.default_rng(seed)
    space = Space(dim, kind)
    f = rng.standard_normal(dim)
    alpha = rng.uniform(0.1, 0.9) * space.dual_norm(f)
    lam = rng.uniform(0.2, 3)
    A = rng.uniform(-3, 3, (rng.integers(1, 20), dim))
    got = ae_bp(space, A, f, alpha, lam)
    assert got == oracle_ae_bp(space, A, f, alpha, lam)
    assert got == ae(A, BishopPhelps(space, f, alpha, 1.0, strict=True), lam).efficient_indices


def test_ae_bp_alpha_range(l2):
    with pytest.raises(InvalidInput):
        ae_bp(l2, HAND, np.array([1.0, 0.0]), 1.0, 1.0)


# -- AMin ---------------------------------------------------------------------------


def test_amin_examples(l2):
    f = np.array([1.0, 0.0])
    p = [l2.p_sublinear(f, 0.5, a) for a in HAND]
    assert p == pytest.approx([0.0, -1.5, 2.5])
    assert amin(l2, f, 0.5, HAND, 1.0) == (1,)
    assert set(amin(l2, f, 0.5, HAND, 1.0)) < set(ae_bp(l2, HAND, f, 0.5, 1.0))
    assert amin(l2, f, 0.5, HAND, 0.0) == (1,)
    assert amin(l2, f, 0.5, HAND, 4.0) == (0, 1, 2)


# -- augmented duals ------------------------------------------------------------------


def oracle_dual_margin(C, f, alpha, lam, eps):
    X = np.stack(np.meshgrid(np.linspace(0, 3, 601), np.linspace(0, 3, 601)), axis=-1).reshape(-1, 2)
    X = X[scale(C, eps).contains(X)]
    return float(np.min(X @ f - alpha * np.linalg.norm(X, axis=1) - lam))


def test_check_aug_dual_examples(O2):
    a = 1 / (2 * np.sqrt(2))
    # oracle: the margin at lam = 1/4 is smallest on the axes, (1/sqrt2 - 1/(2 sqrt2)) - 1/4
    m = oracle_dual_margin(O2, F2, a, 0.25, 1.0)
    assert m == pytest.approx(1 / (2 * np.sqrt(2)) - 0.25, abs=1e-9)
    r = check_aug_dual(O2, AugDualQuery(F2, a, 0.25, 1.0, DualKind.WEAK))
    assert r.member and r.min_margin == pytest.approx(m, abs=1e-5)
    r = check_aug_dual(O2, AugDualQuery(F2, a, 0.5, 1.0, DualKind.WEAK))
    assert not r.member
    assert O2.contains(r.witness).all()
    assert r.witness @ F2 - a * np.linalg.norm(r.witness) < 0.5
    # alpha = 0 with f positive on C and lam below inf f on C(eps)
    assert check_aug_dual(O2, AugDualQuery(F2, 0.0, 0.7, 1.0, DualKind.STRICT)).member


def test_synth_examples():
    for name, f, lam in (("orthant2", np.ones(2) / np.sqrt(2), 0.25), ("orthant3", np.ones(3) / np.sqrt(3), 1 / 6)):
        C = load_fixture(name).set("C")
        s = synth_aug_dual(C, 1.0)
        assert np.allclose(s.f, f, atol=1e-4)
        assert s.gamma == pytest.approx(f[0], abs=1e-4) and s.d_C == pytest.approx(f[0], abs=1e-4)
        assert s.lam == pytest.approx(lam, abs=1e-4)
        assert s.alpha == pytest.approx(s.gamma / 2)


def test_synth_passes_checks_on_random_instances():
    for i in range(20):
        inst = random_instance(500 + i, 2 + i % 2, FAMILIES[i % 3], 5)
        C, eps = inst.set("C"), inst.param("eps")
        s = synth_aug_dual(C, eps, 2000, seed=i, iters=100)
        assert check_aug_dual(C, AugDualQuery(s.f, s.alpha, s.lam, eps, DualKind.WEAK), 2000, i + 1).member
        assert check_aug_dual(C, AugDualQuery(s.f, s.alpha, s.lam / 2, eps, DualKind.STRICT), 2000, i + 2).member


# -- sufficient conditions ----------------------------------------------------------------


def test_sufficient_orthant(O2, rng):
    A = rng.uniform(-3, 3, (30, 2))
    s = synth_aug_dual(O2, 1.0)
    r = sufficient_ae(A, O2, 1.0, s.f, s.alpha, s.lam / 2)
    assert set(r.indices) <= set(oracle_ae_orthant(A, 1.0))
    with pytest.raises(PreconditionFailed):
        sufficient_ae(A, O2, 1.0, s.f, s.alpha, 10 * s.lam)


def test_sufficient_deep_interior(O2):
    x0 = np.array([0.5, -0.5])
    A = np.vstack([x0, x0 + [[3, 4], [5, 2], [6, 6]]])
    s = synth_aug_dual(O2, 1.0)
    r = sufficient_ae(A, O2, 1.0, s.f, s.alpha, s.lam / 2)
    assert r.indices == (0,) and r.ae_indices == (0,)


def test_shifted_sublevel_worked_instance(l2):
    f = np.array([1.0, 0.0])
    C = BishopPhelps(l2, f, 0.5, 1.0, strict=False)
    cand = [i for i, a in enumerate(HAND) if l2.p_sublinear(f, 0.5, a - HAND[1]) < 0]
    assert cand == []
    r = shifted_sublevel_ae(HAND, C, 1.0, f, 0.5, 1.0, x0=1)
    assert r.indices == () and set(r.indices) <= set(r.ae_indices)


def test_shifted_sublevel_random(O2, rng):
    s = synth_aug_dual(O2, 1.0)
    for _ in range(5):
        A = rng.uniform(-3, 3, (25, 2))
        for x0 in ae_bp(O2.space, A, s.f, s.alpha, s.lam):
            r = shifted_sublevel_ae(A, O2, 1.0, s.f, s.alpha, s.lam, x0, 2000)
            brute = {i for i, a in enumerate(A) if O2.space.p_sublinear(s.f, s.alpha, a - A[x0]) < 0}
            assert set(r.indices) == brute and brute <= set(oracle_ae_orthant(A, 1.0))


# -- proper efficiency ----------------------------------------------------------------------


def test_pae_certificate_and_tamper(O2, rng):
    A = rng.uniform(-3, 3, (20, 2))
    eps = 0.5
    s = synth_aug_dual(O2, eps)
    lam = s.lam / 2
    x0 = ae_bp(O2.space, A, s.f, s.alpha, lam)[0]
    cert = certify_pae(A, O2, eps, s.f, s.alpha, lam, x0)
    assert cert.enclosing_level == pytest.approx(lam / eps)
    assert cert.checks["enclosure_min_margin"] > 0
    # every sampled y in C has f(y) - alpha ||y|| > lam / eps
    Y = O2.sample_members(5000, 3)
    assert np.min(Y @ s.f - s.alpha * np.linalg.norm(Y, axis=1)) > lam / eps
    bad = dataclasses.replace(cert, enclosing_level=10.0)
    with pytest.raises(EnclosureFailed):
        check_pae(A, O2, bad)


# -- necessary conditions ----------------------------------------------------------------------


def test_necessary_fixture():
    inst = load_fixture("necessary2d")
    r = necessary_pipeline(inst.pts("A"), inst.set("C"), 0.05, 3, 0.5, seed=1)
    assert 0 < r.alpha1 < r.alpha2 <= 1
    assert 0 < r.eta <= 1 and r.lam > 0
    assert set(r.ae_dilated) <= set(r.ae_C)
    assert r.checks > 0 and r.min_slack > 0


def test_necessary_rejects_bad_parameters(O2):
    with pytest.raises(InvalidInput):
        necessary_pipeline(A4, O2, 0.05, 3, 1.5)
    with pytest.raises(HypothesisUnmet):
        necessary_pipeline(A4, O2, 5.0, 3, 0.5)


def test_cone_dual_alpha_must_be_positive(l2):
    from crs import AlphaOutOfRange

    with pytest.raises(AlphaOutOfRange):
        ae_bp(l2, HAND, [1.0, 0.0], 0.0, 1.0)
    with pytest.raises(AlphaOutOfRange):
        ae_bp(l2, HAND, [1.0, 0.0], 1.0, 1.0)
    with pytest.raises(InvalidInput):
        check_aug_dual(ConeTruncated(l2, np.eye(2), np.ones(2), 1.0), AugDualQuery(F2, -0.1, 0.2, 1.0, DualKind.WEAK))
