import dataclasses

import numpy as np
import pytest

from crs import HypothesisUnmet, SspFailed, TheoremViolation
from crs.instance import load_fixture
from crs.separation import (
    ConeWitness,
    Mode,
    cone_witness,
    delta_margin,
    infimum_hyperbolic,
    separate_coradiant,
    ssp_check,
    verify_certificate,
    verify_dichotomy,
    verify_dilated_pair,
    verify_witness,
)
from crs.sets import ConeTruncated, GeneratedCone, GeneratorRays, HyperbolaFixture, cone_of
from crs.suite import random_separated_pair

F = np.array([1.0, 1.0]) / np.sqrt(2)


@pytest.fixture
def pair():
    inst = load_fixture("orthant_pair")
    return inst.set("C"), inst.set("K")


@pytest.fixture
def cones(pair):
    return cone_of(pair[0]), cone_of(pair[1])


def test_ssp_examples(cones):
    C, K = cones
    r = ssp_check(C, K)
    assert r.holds and r.hull_distance > 0
    O = GeneratedCone(C.space, np.eye(2))
    assert not ssp_check(O, O).holds


@pytest.mark.parametrize("t", [1.0, 2.0, 5.0])
def test_ssp_t_invariance(cones, t):
    C, K = cones
    O = GeneratedCone(C.space, np.eye(2))
    r = ssp_check(C, K, t=t)
    assert r.holds and r.hull_distance == pytest.approx(ssp_check(C, K).hull_distance, rel=1e-9)
    assert not ssp_check(O, O, t=t).holds


def test_cone_witness_values(cones):
    C, K = cones
    # oracle: f on dense arcs of C ∩ S and on the two boundary rays of K
    th = np.linspace(0, np.pi / 2, 100_001)
    gamma = np.min(np.column_stack([np.cos(th), np.sin(th)]) @ F)
    b = np.array([[1, -0.2], [-0.2, 1]]) / np.hypot(1, 0.2)
    beta = np.max(b @ F)
    assert gamma == pytest.approx(0.70711, abs=1e-5) and beta == pytest.approx(0.5547, abs=1e-4)
    w = cone_witness(C, K, ssp_check(C, K))
    assert np.allclose(w.f, F, atol=1e-6)
    assert w.gamma == pytest.approx(gamma, abs=1e-6) and w.beta == pytest.approx(beta, abs=1e-6)
    assert beta < w.alpha1 < w.alpha2 < gamma
    fresh = verify_witness(C, K, w.f, (w.alpha1, w.alpha_mid, w.alpha2), 10_000, seed=99)
    assert min(min(v) for v in fresh.values()) >= 1e-6


def test_witness_arithmetic():
    x = -np.array([1.0, 0.0])
    assert F @ x + 0.63 * np.linalg.norm(x) < 0
    y = -np.array([1.0, -0.2]) / np.hypot(1, 0.2)
    assert F @ y == pytest.approx(-0.5547, abs=1e-4)
    assert F @ y + 0.63 * np.linalg.norm(y) > 0


def test_delta_margin_arithmetic(l2):
    w = ConeWitness(F, 0.56, 0.70, 0.7071, 0.5547)
    assert delta_margin(w, l2) == pytest.approx(0.07 / (2 * 1.63), abs=1e-12)
    assert delta_margin(w, l2) == pytest.approx(0.02147, abs=1e-5)
    narrow = ConeWitness(F, 0.60, 0.66, 0.7071, 0.5547)
    assert delta_margin(narrow, l2) < delta_margin(w, l2)


def test_dilated_pair_at_half_delta(cones):
    C, K = cones
    w = cone_witness(C, K, ssp_check(C, K))
    d = delta_margin(w, C.space)
    res = verify_dilated_pair(C, K, w, d / 2, 10_000, seed=5)
    assert min(min(v) for v in res.values()) >= 1e-6


def test_separate_boundary_and_complement(pair):
    C, K = pair
    for mode in (Mode.BOUNDARY_ONLY, Mode.COMPLEMENT):
        cert = separate_coradiant(C, K, mode, seed=1, lam_samples=20_000, verify_samples=20_000)
        assert cert.lam > 0 and 0 < cert.eta < cert.eta_max
        assert cert.alpha1 < cert.alpha2
        assert verify_dichotomy(C, K, cert) in {"AllInside", "AllOutside"}


def test_separate_against_generator_rays(l2):
    C = ConeTruncated(l2, np.eye(2), np.ones(2), 1.0)
    G = np.array([[1.0, -0.05], [-0.05, 1.0]])
    K = GeneratorRays(l2, G / np.linalg.norm(G, axis=1)[:, None])
    cert = separate_coradiant(C, K, Mode.BOUNDARY_ONLY, seed=2, lam_samples=100_000, verify_samples=100_000)
    assert cert.lam > 0
    for a, m in cert.margins.items():
        if isinstance(a, float):
            assert m["co_C_min_minus_lam"] > 0 and m["K_side_max_minus_lam"] < 0


def test_lambda_infimum_oracle(l2):
    C = ConeTruncated(l2, np.eye(2), np.ones(2), 1.0)
    # grid oracle over the edge x + y = 1 and beyond; the infimum sits at the axes
    X = np.stack(np.meshgrid(np.linspace(0, 3, 601), np.linspace(0, 3, 601)), axis=-1).reshape(-1, 2)
    X = X[C.contains(X)]
    oracle = np.min(X @ F - 0.6 * np.linalg.norm(X, axis=1))
    assert oracle == pytest.approx(1 / np.sqrt(2) - 0.6, abs=1e-9)
    lam, _ = infimum_hyperbolic(C, F, 0.6, 20_000, seed=0)
    assert lam == pytest.approx(oracle, abs=1e-5)
    # the value at the norm-minimal point (0.5, 0.5) is larger
    y = np.array([0.5, 0.5])
    assert F @ y - 0.6 * np.linalg.norm(y) == pytest.approx(0.4 / np.sqrt(2))
    assert F @ y - 0.6 * np.linalg.norm(y) > lam


def test_general_mode(pair):
    C, K = pair
    cert = separate_coradiant(C, K, Mode.GENERAL, seed=3, n=3.0, lam_samples=20_000, verify_samples=20_000)
    assert cert.eta <= 1.0 and cert.lam > 0


def test_eta_sweep(pair):
    C, K = pair
    cert = separate_coradiant(C, K, seed=4, lam_samples=20_000, verify_samples=20_000)
    for frac in (0.1, 0.5, 0.9):
        verify_certificate(C, K, cert, 20_000, seed=7, eta=frac * cert.eta_max)


def test_tampered_certificate_fails(pair):
    C, K = pair
    cert = separate_coradiant(C, K, seed=4, lam_samples=20_000, verify_samples=20_000)
    bad = dataclasses.replace(cert, lam=cert.lam * 10)
    with pytest.raises(TheoremViolation):
        verify_certificate(C, K, bad, 20_000, seed=8)


def test_dichotomy_examples(l2):
    C = ConeTruncated(l2, np.eye(2), np.ones(2), 2.0)
    K = ConeTruncated(l2, np.array([[1.0, -0.2], [-0.2, 1.0]]), np.ones(2), 1.0)
    cert = separate_coradiant(C, K, seed=5, lam_samples=20_000, verify_samples=20_000)
    assert verify_dichotomy(C, K, cert) == "AllInside"
    far = GeneratorRays(l2, -np.array([[1.0, 0.2], [0.2, 1.0]]) / np.hypot(1, 0.2))
    C1 = ConeTruncated(l2, np.eye(2), np.ones(2), 1.0)
    cert = separate_coradiant(C1, far, seed=6, lam_samples=20_000, verify_samples=20_000)
    assert verify_dichotomy(C1, far, cert) == "AllOutside"


def test_dichotomy_never_mixture_over_seeds():
    outcomes = set()
    for s in range(100):
        C, K = random_separated_pair(10_000 + s)
        cert = separate_coradiant(C, K, seed=s, resolution=500, lam_samples=3000, verify_samples=3000)
        outcomes.add(verify_dichotomy(C, K, cert, 2000, seed=s))
    assert outcomes <= {"AllInside", "AllOutside"}


def test_separation_errors(l2):
    O = ConeTruncated(l2, np.eye(2), np.ones(2), 1.0)
    with pytest.raises(SspFailed):
        separate_coradiant(O, O, seed=0, lam_samples=5000, verify_samples=5000)
    with pytest.raises(HypothesisUnmet):
        separate_coradiant(O, HyperbolaFixture(l2), seed=0, lam_samples=5000, verify_samples=5000)
    with pytest.raises(HypothesisUnmet):
        separate_coradiant(O, O, Mode.GENERAL, seed=0)
