import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppnmm_unmix.mrf import (
    PottsParams,
    gibbs_label_sweep,
    neighbor_counts,
    neighbors4,
    potts_conditional_weights,
    potts_log_prior,
    same_label_fraction,
    same_label_pairs,
    sample_potts_field,
    scan_order,
)


def joint_log_density(labels, beta):
    """Potts log joint up to a constant, by explicit double loop over pixels."""
    H, W = labels.shape
    total = 0
    for p in range(H * W):
        for q in neighbors4(p, W, H):
            if q > p and labels.flat[p] == labels.flat[q]:
                total += 1
    return beta * total


class TestNeighborhoods:
    def test_examples(self):
        assert sorted(neighbors4(4, 3, 3)) == [1, 3, 5, 7]
        assert sorted(neighbors4(0, 3, 3)) == [1, 3]
        assert neighbors4(0, 1, 1) == []

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            neighbors4(9, 3, 3)
        with pytest.raises(ValueError):
            neighbors4(-1, 3, 3)

    @given(w=st.integers(1, 7), h=st.integers(1, 7), data=st.data())
    def test_symmetric(self, w, h, data):
        p = data.draw(st.integers(0, w * h - 1))
        for q in neighbors4(p, w, h):
            assert p in neighbors4(q, w, h)
        n = len(neighbors4(p, w, h))
        x, y = p % w, p // w
        assert n == (x > 0) + (x < w - 1) + (y > 0) + (y < h - 1)

    def test_params(self):
        with pytest.raises(NotImplementedError):
            PottsParams(neighborhood=8)
        with pytest.raises(ValueError):
            PottsParams(neighborhood=6)
        with pytest.raises(ValueError):
            PottsParams(beta=-1.0)


class TestConditional:
    def test_all_neighbors_one_class(self):
        labels = np.zeros((3, 3), dtype=int)
        labels[[0, 1, 1, 2], [1, 0, 2, 1]] = 1
        w = potts_conditional_weights(labels, 4, PottsParams(1.1, 3))
        np.testing.assert_allclose(w, [1.0, np.exp(4.4), 1.0])
        assert w[1] / w.sum() == pytest.approx(0.976, abs=5e-4)

    def test_zero_beta_flat(self, rng):
        labels = rng.integers(0, 3, (4, 4))
        w = potts_conditional_weights(labels, 5, PottsParams(0.0, 3))
        np.testing.assert_array_equal(w, np.ones(3))

    def test_ratios_match_joint_5x5(self, rng):
        labels = rng.integers(0, 3, (5, 5))
        params = PottsParams(0.9, 3)
        for p in range(25):
            w = potts_conditional_weights(labels, p, params)
            logs = []
            for k in range(3):
                c = labels.copy()
                c.flat[p] = k
                logs.append(joint_log_density(c, params.beta))
            np.testing.assert_allclose(np.log(w / w[0]), np.array(logs) - logs[0], atol=1e-12)

    def test_conditional_vs_joint_enumeration(self):
        """Exact conditionals of every pixel from the full 2^16-state 4x4 joint."""
        beta = 1.1
        rng = np.random.default_rng(7)
        field = rng.integers(0, 2, (4, 4))
        states = np.array(list(itertools.product([0, 1], repeat=16))).reshape(-1, 4, 4)
        pairs = (states[:, :, 1:] == states[:, :, :-1]).sum(axis=(1, 2)) + (states[:, 1:, :] == states[:, :-1, :]).sum(
            axis=(1, 2)
        )
        log_joint = beta * pairs
        flat_states = states.reshape(len(states), 16)
        params = PottsParams(beta, 2)
        for p in range(16):
            rest = np.delete(np.arange(16), p)
            match = np.all(flat_states[:, rest] == field.ravel()[rest], axis=1)
            sel = log_joint[match]
            lab = flat_states[match, p]
            exact = np.exp(sel - sel.max())
            exact = np.array([exact[lab == k].sum() for k in range(2)])
            exact /= exact.sum()
            w = potts_conditional_weights(field, p, params)
            np.testing.assert_allclose(w / w.sum(), exact, rtol=0, atol=1e-10)

    def test_neighbor_counts(self):
        labels = np.array([[0, 1], [1, 1]])
        np.testing.assert_array_equal(neighbor_counts(labels, 0, 2), [0, 2])
        np.testing.assert_array_equal(neighbor_counts(labels, 3, 2), [0, 2])


class TestPairs:
    def test_counts(self):
        labels = np.array([[0, 0], [1, 0]])
        assert same_label_pairs(labels) == 2
        assert same_label_fraction(labels) == 0.5
        assert potts_log_prior(labels, 1.5) == 3.0

    def test_joint_matches_loop(self, rng):
        labels = rng.integers(0, 3, (6, 5))
        assert potts_log_prior(labels, 0.7) == pytest.approx(joint_log_density(labels, 0.7))


class TestSweeps:
    def test_checkerboard_is_permutation(self):
        order = scan_order(5, 4, "checkerboard")
        assert sorted(order) == list(range(20))
        half = (order % 5 + order // 5) % 2
        assert np.all(half[:10] == 0) and np.all(half[10:] == 1)
        with pytest.raises(ValueError):
            scan_order(3, 3, "spiral")

    def test_sweep_matches_python_reference(self, rng):
        W, H, K = 5, 4, 3
        labels = rng.integers(0, K, W * H).astype(np.int64)
        log_lik = rng.normal(size=(W * H, K))
        u = rng.random(W * H)
        order = scan_order(W, H)
        ref = labels.copy()
        for i, p in enumerate(order):
            w = log_lik[p] + 0.8 * neighbor_counts(ref.reshape(H, W), p, K)
            w = np.exp(w - w.max())
            ref[p] = np.searchsorted(np.cumsum(w), u[i] * w.sum(), side="right")
        gibbs_label_sweep(labels, log_lik, W, H, 0.8, order, u)
        np.testing.assert_array_equal(labels, ref)

    def test_independence_limit(self):
        labels = sample_potts_field(100, 100, PottsParams(1e-6, 3), 1, np.random.default_rng(0))
        counts = np.bincount(labels.ravel(), minlength=3)
        sd = np.sqrt(10_000 * (1 / 3) * (2 / 3))
        assert np.all(np.abs(counts - 10_000 / 3) < 3 * sd)

    def test_homogeneous_regions(self):
        fr = [
            same_label_fraction(sample_potts_field(25, 25, PottsParams(1.1, 3), 200, np.random.default_rng(s)))
            for s in range(5)
        ]
        assert np.mean(fr) > 0.8

    def test_beta_monotone(self):
        means, sds = [], []
        for beta in (0.1, 0.6, 1.1):
            fr = [
                same_label_fraction(sample_potts_field(25, 25, PottsParams(beta, 3), 50, np.random.default_rng(s)))
                for s in range(8)
            ]
            means.append(np.mean(fr))
            sds.append(np.std(fr) / np.sqrt(len(fr)))
        for i in range(2):
            assert means[i + 1] >= means[i] - 2 * np.hypot(sds[i], sds[i + 1])

    def test_deterministic(self):
        a = sample_potts_field(10, 8, PottsParams(), 5, np.random.default_rng(9))
        b = sample_potts_field(10, 8, PottsParams(), 5, np.random.default_rng(9))
        np.testing.assert_array_equal(a, b)
        assert a.shape == (8, 10)

    def test_checkerboard_stationary(self):
        # same stationary law: the mean pair fraction agrees with raster within noise
        def frac(schedule, s):
            lab = sample_potts_field(12, 12, PottsParams(0.6, 2), 100, np.random.default_rng(s), schedule)
            return same_label_fraction(lab)

        raster = [frac("raster", s) for s in range(10)]
        cb = [frac("checkerboard", s) for s in range(10, 20)]
        se = np.hypot(np.std(raster), np.std(cb)) / np.sqrt(10)
        assert abs(np.mean(raster) - np.mean(cb)) < 4 * se + 1e-3

    def test_requires_a_sweep(self, rng):
        with pytest.raises(ValueError):
            sample_potts_field(3, 3, PottsParams(), 0, rng)
