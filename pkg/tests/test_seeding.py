import numpy as np
import pytest

from kmpar.geometry import CenterSet, Dataset, cost
from kmpar.sampling import RngStream
from kmpar.seeding import WeightedInstance, kmeanspp, lloyd, weighted_cost


def test_kmeanspp_takes_every_distinct_point():
    pts = np.array([[0.0], [2.0], [5.0], [9.0]])
    inst = WeightedInstance.unweighted(pts)
    res = kmeanspp(inst, 4, RngStream(3))
    assert len(res.centers) == 4
    assert not res.shortfall
    assert cost(pts, res.centers) == 0.0


def test_kmeanspp_first_center_frequency():
    inst = WeightedInstance.unweighted(np.array([[0.0], [10.0]]))
    hits = 0
    for i in range(20000):
        res = kmeanspp(inst, 1, RngStream(0).child(i))
        hits += res.centers.sources[0] == 0
    assert 0.48 <= hits / 20000 <= 0.52


def test_kmeanspp_second_center_conditional_frequency():
    # With the first center at 0, the second is 10 with probability 100/101.
    inst = WeightedInstance.unweighted(np.array([[0.0], [1.0], [10.0]]))
    conditioned = 0
    second_is_far = 0
    for i in range(30000):
        res = kmeanspp(inst, 2, RngStream(1).child(i))
        if res.centers.sources[0] != 0:
            continue
        conditioned += 1
        second_is_far += res.centers.sources[1] == 2
    assert conditioned > 5000
    freq = second_is_far / conditioned
    expected = 100.0 / 101.0
    sigma = (expected * (1 - expected) / conditioned) ** 0.5
    assert abs(freq - expected) <= 4 * sigma + 0.005


def test_kmeanspp_shortfall_flag():
    pts = np.array([[0.0], [0.0], [1.0]])
    inst = WeightedInstance.unweighted(pts)
    res = kmeanspp(inst, 3, RngStream(0))
    assert res.shortfall
    assert len(res.centers) == 2  # two distinct locations only
    assert cost(pts, res.centers) == 0.0


def test_kmeanspp_zero_weight_points_excluded():
    pts = np.array([[0.0], [5.0], [9.0]])
    inst = WeightedInstance(pts, np.array([1.0, 0.0, 1.0]))
    for i in range(50):
        res = kmeanspp(inst, 2, RngStream(i))
        assert 1 not in res.centers.sources


def test_kmeanspp_centers_subset_of_instance():
    gen = np.random.default_rng(8)
    pts = gen.normal(size=(12, 2))
    inst = WeightedInstance(pts, gen.uniform(0.5, 2.0, size=12))
    res = kmeanspp(inst, 5, RngStream(4))
    rows = {tuple(r) for r in pts}
    for i in range(len(res.centers)):
        assert tuple(res.centers.coords(i)) in rows


def test_weighted_reduction_fidelity_bound():
    # relaxed triangle-style bound on the two-phase pipeline
    from kmpar.overseed import OverseedConfig, overseed, weigh_centers
    gen = np.random.default_rng(2)
    for seed in range(10):
        pts = gen.normal(size=(20, 2)) * gen.uniform(0.5, 2.0)
        ds = Dataset(pts)
        res = overseed(ds, OverseedConfig(k=3, ell=3.0, rounds=3), RngStream(seed))
        inst = weigh_centers(ds, res.centers)
        seeded = kmeanspp(inst, 3, RngStream(seed).child(99))
        lhs = cost(pts, seeded.centers)
        rhs = cost(pts, res.centers) + weighted_cost(inst, seeded.centers)
        assert lhs <= 4.0 * rhs + 1e-12


# --- lloyd --------------------------------------------------------------

def test_lloyd_fixed_point():
    pts = np.array([[0.0], [1.0], [4.0], [5.0]])
    C = CenterSet.from_array([[0.5], [4.5]])
    out = lloyd(Dataset(pts), C, max_iters=20)
    assert np.allclose(out.as_array(), [[0.5], [4.5]])


def test_lloyd_converges_to_halves():
    pts = np.array([[0.0], [1.0], [4.0], [5.0]])
    C = CenterSet.from_array([[1.0], [4.0]])
    out = lloyd(Dataset(pts), C, max_iters=50)
    assert np.allclose(sorted(out.as_array().ravel()), [0.5, 4.5])
    assert cost(pts, out) == pytest.approx(1.0, rel=1e-12)


def test_lloyd_zero_iters_unchanged():
    pts = np.array([[0.0], [9.0]])
    C = CenterSet.from_array([[3.0], [8.0]])
    out = lloyd(Dataset(pts), C, max_iters=0)
    assert np.array_equal(out.as_array(), C.as_array())


def test_lloyd_cost_monotone_in_iteration_budget():
    gen = np.random.default_rng(12)
    pts = gen.normal(size=(30, 2))
    ds = Dataset(pts)
    C = CenterSet.from_array(pts[:4])
    costs = [cost(pts, lloyd(ds, C, max_iters=i)) for i in range(6)]
    for a, b in zip(costs, costs[1:]):
        assert b <= a + 1e-12


def test_lloyd_empty_cluster_keeps_center():
    # the far center owns nothing and must survive untouched
    pts = np.array([[0.0], [1.0]])
    C = CenterSet.from_array([[0.5], [100.0]])
    out = lloyd(Dataset(pts), C, max_iters=10)
    assert 100.0 in out.as_array().ravel().tolist()


# --- weighted instance --------------------------------------------------

def test_weighted_instance_validation():
    with pytest.raises(ValueError):
        WeightedInstance(np.array([[0.0]]), np.array([-1.0]))
    with pytest.raises(ValueError):
        WeightedInstance(np.array([[0.0]]), np.array([1.0, 2.0]))


def test_unweighted_defaults_to_ones():
    inst = WeightedInstance.unweighted(np.array([[0.0], [1.0]]))
    assert inst.weights.tolist() == [1.0, 1.0]
