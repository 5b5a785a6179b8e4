import math

import numpy as np
import pytest

from kmpar.diagnostics import (
    GroundTruthTracer,
    SettledReport,
    ClusterStat,
    brute_force_optimal,
    classify,
    exact_d2_mean,
    exact_uniform_mean,
    gamma_of,
    settled_report,
    settling_battery,
    verify_d2_lemma,
    verify_settling_bound,
    verify_uniform_lemma,
)
from kmpar.geometry import CenterSet, Dataset, GroundTruth, centroid, cost
from kmpar.overseed import OverseedConfig, overseed
from kmpar.sampling import DegenerateDistribution, RngStream


def two_cluster_ds():
    pts = np.array([[0.0], [1.0], [10.0], [11.0]])
    centers = np.array([[0.5], [10.5]])
    gt = GroundTruth(np.array([0, 0, 1, 1]), centers, cost(pts, centers))
    return Dataset(pts, ground_truth=gt)


# --- settled reports -------------------------------------------------------

def test_all_settled_when_reference_centers_used():
    ds = two_cluster_ds()
    rep = settled_report(ds, ds.ground_truth.centers)
    assert all(c.settled for c in rep.clusters)
    assert rep.phi_u == 0.0
    assert rep.k_unsettled == 0


def test_settled_boundary_arithmetic():
    # direct check of the factor-10 rule
    stats = [
        ClusterStat(0, 25.0, 2.0, 25.0 <= 10 * 2.0),
        ClusterStat(1, 5.0, 1.0, 5.0 <= 10 * 1.0),
    ]
    assert stats[0].settled is False  # 25 > 20
    assert stats[1].settled is True   # 5 <= 10


def test_settled_report_values():
    ds = two_cluster_ds()
    rep = settled_report(ds, CenterSet.from_array([[0.5]]))
    by_id = {c.cluster: c for c in rep.clusters}
    assert by_id[0].settled            # exactly covered by its centroid
    assert not by_id[1].settled        # far cluster unsettled
    assert rep.k_unsettled == 1
    assert rep.phi_u == pytest.approx(by_id[1].cost_current)


def test_zero_reference_cost_cluster_needs_exact_cover():
    pts = np.array([[0.0], [0.0], [5.0]])
    centers = np.array([[0.0], [5.0]])
    gt = GroundTruth(np.array([0, 0, 1]), centers, 0.0)
    ds = Dataset(pts, ground_truth=gt)
    rep = settled_report(ds, CenterSet.from_array([[0.0]]))
    by_id = {c.cluster: c for c in rep.clusters}
    assert by_id[0].settled
    assert not by_id[1].settled
    rep2 = settled_report(ds, CenterSet.from_array([[0.0], [5.0]]))
    assert all(c.settled for c in rep2.clusters)


def test_settled_requires_ground_truth():
    ds = Dataset(np.array([[0.0]]))
    with pytest.raises(ValueError):
        settled_report(ds, CenterSet.from_array([[0.0]]))


def test_settled_monotone_along_run():
    from kmpar.instances import SimplexParams, gen_simplex
    ds = gen_simplex(SimplexParams(k=4, points_per_cluster=10, noise_sigma=0.08),
                     RngStream(2))
    tracer = GroundTruthTracer(ds, 4)
    overseed(ds, OverseedConfig(k=4, ell=4.0, rounds=6), RngStream(3),
             tracer=tracer)
    settled_sets = []
    for _, rep, _ in tracer.history:
        settled_sets.append({c.cluster for c in rep.clusters if c.settled})
    for a, b in zip(settled_sets, settled_sets[1:]):
        assert a <= b


# --- classification ---------------------------------------------------------

def make_report(costs, opt=None):
    opt = opt if opt is not None else [0.0] * len(costs)
    clusters = [ClusterStat(i, c, o, False) for i, (c, o) in enumerate(zip(costs, opt))]
    return SettledReport(clusters, math.fsum(costs), len(costs))


def test_classify_equal_costs_all_heavy():
    k = 5
    rep = make_report([2.0] * k)
    cls = classify(rep, k, gamma=1e6)
    assert all(tag in ("heavy", "massive") for tag in cls.tags.values())
    assert cls.alpha == 0.0


def test_classify_single_unsettled_is_massive_when_zeta_below_cost():
    rep = make_report([7.0])
    # zeta = (log2 gamma)^0.1 * phi_u / k ~ 3.28 <= phi_u, so massive
    cls = classify(rep, k=3, gamma=1e9)
    assert list(cls.tags.values()) == ["massive"]
    assert cls.alpha == 0.0
    # tiny k pushes zeta above the cluster cost: merely heavy
    assert list(classify(rep, k=1, gamma=1e9).tags.values()) == ["heavy"]


def test_classify_boundary_inclusive():
    # costs (0.9, 0.1) * phi_u with k = 10: the small one sits exactly on
    # phi_u / 10 and is therefore heavy, not light
    rep = make_report([0.9, 0.1])
    cls = classify(rep, k=10, gamma=100.0)
    assert cls.tags[1] in ("heavy", "massive")


def test_classify_light_share():
    rep = make_report([10.0, 0.5, 0.5])
    cls = classify(rep, k=3, gamma=None)
    assert cls.tags[0] == "heavy"
    assert cls.tags[1] == "light" and cls.tags[2] == "light"
    assert cls.alpha == pytest.approx(1.0 / 11.0)
    light_sum = sum(c for i, c in enumerate([10.0, 0.5, 0.5])
                    if cls.tags[i] == "light")
    assert light_sum == pytest.approx(cls.alpha * rep.phi_u)


def test_classify_empty_when_phi_u_zero():
    rep = SettledReport([], 0.0, 0)
    cls = classify(rep, k=3, gamma=10.0)
    assert cls.tags == {}


def test_classify_heavy_threshold_variant():
    rep = make_report([0.6, 0.4])
    default = classify(rep, k=4, gamma=None)
    halved = classify(rep, k=4, gamma=None, heavy_threshold=rep.phi_u / 8.0)
    assert default.tags[1] == "heavy"  # 0.4 >= 0.25
    assert halved.tags[1] == "heavy"   # 0.4 >= 0.125
    rep2 = make_report([0.9, 0.2])
    assert classify(rep2, k=5, gamma=None).tags[1] == "light"
    assert classify(rep2, k=5, gamma=None,
                    heavy_threshold=rep2.phi_u / 10.0).tags[1] == "heavy"


def test_classify_massive_implies_heavy():
    rep = make_report([5.0, 1.0, 0.1])
    cls = classify(rep, k=3, gamma=1e4)
    for cid, tag in cls.tags.items():
        if tag == "massive":
            cost_c = rep.clusters[cid].cost_current
            assert cost_c >= cls.heavy_threshold


# --- uniform lemma verifier ---------------------------------------------------

def test_uniform_verifier_coincident_points():
    rep = verify_uniform_lemma(np.zeros((5, 2)), 2000, RngStream(0))
    assert rep.passed and rep.bound == 0.0 and rep.empirical == 0.0


def test_uniform_verifier_tight_two_point_case():
    A = np.array([[0.0], [2.0]])
    assert exact_uniform_mean(A) == 4.0
    bound = 2.0 * cost(A, [centroid(A)])
    assert bound == 4.0
    rep = verify_uniform_lemma(A, 50000, RngStream(1))
    assert rep.passed
    assert abs(rep.empirical - 4.0) <= 4 * rep.sigma


def test_uniform_verifier_three_point_enumeration():
    A = np.array([[0.0], [1.0], [4.0]])
    exact = exact_uniform_mean(A)
    assert exact == pytest.approx((17.0 + 10.0 + 25.0) / 3.0, rel=1e-12)
    assert exact <= 2.0 * (26.0 / 3.0) + 1e-12
    rep = verify_uniform_lemma(A, 50000, RngStream(2))
    assert rep.passed
    assert abs(rep.empirical - exact) <= 3 * rep.sigma + 1e-9


def test_uniform_enumeration_matches_twice_centroid_cost():
    gen = np.random.default_rng(4)
    for _ in range(10):
        A = gen.normal(size=(gen.integers(2, 9), 2))
        assert exact_uniform_mean(A) == pytest.approx(
            2.0 * cost(A, [centroid(A)]), rel=1e-9)


# --- d2 lemma verifier ----------------------------------------------------------

def test_d2_verifier_single_point():
    A = np.array([[3.0, 3.0]])
    rep = verify_d2_lemma(A, [[0.0, 0.0]], 1000, RngStream(0))
    assert rep.passed
    assert rep.empirical == 0.0


def test_d2_verifier_two_point_enumeration():
    A = np.array([[0.0], [2.0]])
    C = [[-10.0]]
    assert exact_d2_mean(A, C) == pytest.approx(4.0, rel=1e-12)
    rep = verify_d2_lemma(A, C, 20000, RngStream(3))
    assert rep.passed
    assert rep.bound == pytest.approx(16.0)
    assert abs(rep.empirical - 4.0) <= 4 * rep.sigma + 1e-9


def test_d2_verifier_random_instance():
    gen = np.random.default_rng(9)
    A = gen.normal(size=(20, 3))
    C = gen.normal(loc=4.0, size=(3, 3))
    rep = verify_d2_lemma(A, C, 100000, RngStream(4))
    assert rep.passed


def test_d2_verifier_degenerate():
    A = np.array([[1.0], [1.0]])
    with pytest.raises(DegenerateDistribution):
        verify_d2_lemma(A, [[1.0]], 100, RngStream(0))


def test_verifier_report_text_block():
    rep = verify_uniform_lemma(np.array([[0.0], [2.0]]), 2000, RngStream(5))
    text = rep.as_text()
    for key in ("name ", "empirical ", "bound ", "sigma ", "pass "):
        assert key in text


# --- settling-rate verifier -------------------------------------------------------

def test_settling_battery_shapes():
    configs = settling_battery()
    assert len(configs) == 5
    for cfgd in configs:
        ds = cfgd["dataset"]
        assert ds.ground_truth is not None
        phi_x = cost(ds, cfgd["centers"])
        assert phi_x >= 20.0 * ds.ground_truth.phi_star


def test_settling_bound_holds_quick():
    cfgd = settling_battery()[0]
    rep = verify_settling_bound(cfgd["dataset"], cfgd["centers"],
                                cfgd["cluster"], cfgd["ell"], 2000, RngStream(1))
    assert rep.passed


def test_settling_rejects_settled_cluster():
    cfgd = settling_battery()[0]
    ds = cfgd["dataset"]
    with pytest.raises(ValueError):
        verify_settling_bound(ds, CenterSet.from_array(ds.ground_truth.centers),
                              cfgd["cluster"], cfgd["ell"], 10, RngStream(0))


# --- brute force oracle --------------------------------------------------------------

def test_brute_force_two_pairs():
    C, phi = brute_force_optimal(np.array([[0.0], [1.0], [4.0], [5.0]]), 2)
    assert phi == pytest.approx(1.0, rel=1e-12)
    assert sorted(C.as_array().ravel().tolist()) == pytest.approx([0.5, 4.5])


def test_brute_force_enough_centers_zero():
    pts = np.array([[0.0], [0.0], [3.0]])
    _, phi = brute_force_optimal(pts, 2)
    assert phi == 0.0


def test_brute_force_k1_is_variance():
    pts = np.array([[0.0], [1.0], [4.0], [5.0]])
    _, phi = brute_force_optimal(pts, 1)
    assert phi == pytest.approx(cost(pts, [centroid(pts)]), rel=1e-12)


def test_brute_force_refuses_large():
    with pytest.raises(ValueError):
        brute_force_optimal(np.zeros((13, 1)), 2)
    with pytest.raises(ValueError):
        brute_force_optimal(np.zeros((5, 1)), 5)


def test_brute_force_never_above_any_candidate_partition():
    gen = np.random.default_rng(3)
    for seed in range(5):
        pts = gen.normal(size=(8, 2))
        _, phi = brute_force_optimal(pts, 3)
        for _ in range(50):
            labels = gen.integers(0, 3, size=8)
            total = 0.0
            for b in range(3):
                blk = pts[labels == b]
                if len(blk):
                    total += cost(blk, [centroid(blk)])
            assert phi <= total + 1e-9


# --- gamma -------------------------------------------------------------------------------

def test_gamma_of_line_instance():
    pts = np.array([[0.0], [1.0], [4.0], [5.0]])
    _, phi = brute_force_optimal(pts, 2)
    ds = Dataset(pts)
    g = gamma_of(ds, phi_star=phi)
    assert cost(pts, [centroid(pts)]) == pytest.approx(17.0)
    assert g == pytest.approx(17.0, rel=1e-9)


def test_gamma_undefined_for_zero_optimum():
    from kmpar.instances import LowerBoundParams, gen_lower_bound
    ds = gen_lower_bound(LowerBoundParams(k=4, L=2.0, T=2))
    assert gamma_of(ds) is None


def test_gamma_invariant_under_duplication():
    pts = np.array([[0.0], [1.0], [4.0], [5.0]])
    _, phi = brute_force_optimal(pts, 2)
    doubled = np.vstack([pts, pts])
    _, phi2 = brute_force_optimal(doubled, 2)
    g1 = gamma_of(Dataset(pts), phi_star=phi)
    g2 = gamma_of(Dataset(doubled), phi_star=phi2)
    assert g1 == pytest.approx(g2, rel=1e-9)
