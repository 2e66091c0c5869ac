import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ppnmm_unmix.core import (
    HyperCube,
    SpectralLibrary,
    active_pairs,
    add_noise,
    check_simplex,
    gbm_forward,
    linear_mix,
    ppnm_forward,
    quadratic_term,
)

def simplex_points(R):
    return arrays(np.float64, R, elements=st.floats(0.01, 1.0)).map(lambda v: v / v.sum())


class TestTypes:
    def test_library_validation(self):
        with pytest.raises(ValueError):
            SpectralLibrary(np.ones(5))
        with pytest.raises(ValueError):
            SpectralLibrary(np.ones((1, 3)))
        with pytest.raises(ValueError):
            SpectralLibrary(np.array([[1.0, -0.1], [0.2, 0.3]]))
        with pytest.raises(ValueError):
            SpectralLibrary(np.array([[1.0, np.nan], [0.2, 0.3]]))

    def test_library_default_names(self):
        lib = SpectralLibrary(np.ones((4, 3)))
        assert lib.names == ["em1", "em2", "em3"]
        assert (lib.bands, lib.n_endmembers) == (4, 3)

    def test_cube_shape_checked(self):
        with pytest.raises(ValueError):
            HyperCube(2, 2, np.zeros((3, 5)))
        cube = HyperCube(3, 2, np.arange(30.0).reshape(6, 5))
        assert cube.image().shape == (2, 3, 5)
        np.testing.assert_array_equal(cube.image()[1, 0], cube.data[3])

    def test_check_simplex(self):
        check_simplex([0.2, 0.8])
        with pytest.raises(ValueError):
            check_simplex([0.5, 0.6])
        with pytest.raises(ValueError):
            check_simplex([1.1, -0.1])


class TestForward:
    def test_linear_mix_is_matrix_product(self, small_lib):
        a = np.array([0.1, 0.2, 0.3, 0.4])
        np.testing.assert_allclose(linear_mix(small_lib, a), small_lib.values @ a, rtol=1e-14)

    def test_dimension_mismatch(self, small_lib):
        with pytest.raises(ValueError):
            linear_mix(small_lib, [0.5, 0.5])
        with pytest.raises(ValueError):
            ppnm_forward(small_lib, [0.5, 0.5], 0.1)

    def test_quadratic_term_examples(self):
        # both columns equal, so M a = [0.5, 0.2] for any simplex point
        M = np.array([[0.5, 0.5], [0.2, 0.2]])
        np.testing.assert_allclose(quadratic_term(M, [0.5, 0.5]), [0.25, 0.04])
        np.testing.assert_array_equal(quadratic_term(M, [0.0, 0.0]), [0.0, 0.0])

    def test_ppnm_example(self):
        M = np.array([[0.5, 0.5], [0.2, 0.2]])
        np.testing.assert_allclose(ppnm_forward(M, [0.5, 0.5], 0.1), [0.525, 0.204], rtol=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(a=simplex_points(4), b=st.floats(-1, 1))
    def test_ppnm_properties(self, a, b):
        M = np.linspace(0.05, 1.0, 24).reshape(6, 4)
        lin = linear_mix(M, a)
        np.testing.assert_array_equal(ppnm_forward(M, a, 0.0), lin)
        np.testing.assert_allclose(quadratic_term(M, a), lin**2, rtol=1e-14)
        # exactly linear in b
        diff = ppnm_forward(M, a, b) - lin
        np.testing.assert_allclose(diff, b * (ppnm_forward(M, a, 1.0) - lin), atol=1e-15)
        assert np.all(np.isfinite(ppnm_forward(M, a, b)))

    def test_ppnm_batch_matches_rows(self, small_lib, rng):
        A = rng.dirichlet(np.ones(4), size=5)
        batch = ppnm_forward(small_lib, A, 0.3)
        for k in range(5):
            np.testing.assert_allclose(batch[k], ppnm_forward(small_lib, A[k], 0.3), rtol=1e-14)


class TestGBM:
    def test_zero_gamma_is_linear(self, small_lib):
        a = np.array([0.2, 0.3, 0.5, 0.0])
        np.testing.assert_allclose(gbm_forward(small_lib, a, [0, 0, 0]), linear_mix(small_lib, a), rtol=1e-15)

    def test_single_active_is_linear(self, small_lib):
        a = np.array([0.0, 1.0, 0.0, 0.0])
        np.testing.assert_array_equal(gbm_forward(small_lib, a, []), linear_mix(small_lib, a))

    def test_three_active_hand_expansion(self, small_lib):
        M = small_lib.values
        a = np.array([0.6, 0.1, 0.3, 0.0])
        g = [0.5, 0.1, 0.3]
        expected = (
            M @ a
            + 0.5 * a[0] * a[1] * M[:, 0] * M[:, 1]
            + 0.1 * a[0] * a[2] * M[:, 0] * M[:, 2]
            + 0.3 * a[1] * a[2] * M[:, 1] * M[:, 2]
        )
        np.testing.assert_allclose(gbm_forward(small_lib, a, g), expected, rtol=1e-14)
        np.testing.assert_allclose(gbm_forward(small_lib, a, g, active=[0, 1, 2]), expected, rtol=1e-14)

    def test_gamma_arity(self, small_lib):
        with pytest.raises(ValueError):
            gbm_forward(small_lib, [0.6, 0.1, 0.3, 0.0], [0.5, 0.1])

    def test_active_pairs_order(self):
        assert active_pairs([2, 0, 1]) == [(0, 1), (0, 2), (1, 2)]


class TestNoise:
    def test_tiny_variance_is_identity(self, rng):
        x = rng.random(50)
        np.testing.assert_allclose(add_noise(x, 1e-30, rng), x, atol=1e-12)

    def test_nonpositive_variance(self, rng):
        with pytest.raises(ValueError):
            add_noise(np.zeros(3), 0.0, rng)
        with pytest.raises(ValueError):
            add_noise(np.zeros(3), -1.0, rng)

    def test_empirical_variance(self):
        x = np.zeros(10**6)
        d = add_noise(x, 0.001, np.random.default_rng(0)) - x
        assert abs(d.var() / 0.001 - 1) < 0.01

    def test_deterministic(self):
        x = np.ones(20)
        a = add_noise(x, 0.01, np.random.default_rng(3))
        b = add_noise(x, 0.01, np.random.default_rng(3))
        np.testing.assert_array_equal(a, b)
