import numpy as np
import pytest

from semirandom.errors import ParameterError
from semirandom.features import (
    RandomDirection,
    activation,
    sample_direction,
    sample_first_layer_gates,
    seeded_stream,
    semi_random_feature,
)


class TestActivation:
    def test_hard_gate_open(self):
        assert activation(0, 2.5) == 1.0

    def test_ramp_closed(self):
        assert activation(1, -1.0) == 0.0

    def test_quadratic(self):
        assert activation(2, 3.0) == 9.0

    def test_closed_at_zero_for_every_order(self):
        for order in range(5):
            assert activation(order, 0.0) == 0.0

    def test_vectorized(self):
        z = np.array([-1.0, 0.0, 2.0])
        np.testing.assert_array_equal(activation(0, z), [0.0, 0.0, 1.0])
        np.testing.assert_array_equal(activation(1, z), [0.0, 0.0, 2.0])

    def test_gate_ignores_positive_scaling(self):
        rng = np.random.default_rng(0)
        z = rng.standard_normal(100)
        for c in (0.5, 3.0, 1e6):
            np.testing.assert_array_equal(activation(0, c * z), activation(0, z))

    def test_homogeneity_for_positive_orders(self):
        rng = np.random.default_rng(1)
        z = rng.standard_normal(100)
        for order in (1, 2, 3):
            for c in (0.5, 2.0):
                np.testing.assert_allclose(activation(order, c * z),
                                           c ** order * activation(order, z),
                                           rtol=1e-12)

    def test_negative_order_rejected(self):
        with pytest.raises(ParameterError):
            activation(-1, 1.0)


class TestSampling:
    def test_one_dimensional_sphere_is_signs(self):
        rng = seeded_stream(0, "test")
        values = {float(sample_direction(1, rng)[0]) for _ in range(50)}
        assert values <= {1.0, -1.0}
        assert len(values) == 2

    def test_unit_norm(self):
        rng = seeded_stream(1, "test")
        for dim in (1, 2, 3, 7):
            v = sample_direction(dim, rng)
            assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)

    def test_mean_near_zero(self):
        rng = seeded_stream(2, "test")
        total = np.zeros(3)
        count = 100_000
        for _ in range(count):
            total += sample_direction(3, rng)
        assert np.all(np.abs(total / count) < 0.02)

    def test_single_unit_is_basis_vector(self):
        gates = sample_first_layer_gates(3, 1, 2.0, seeded_stream(3, "test"))
        np.testing.assert_array_equal(gates[:, 0], [1.0, 0.0, 0.0, 0.0])

    def test_column_structure(self):
        radius = 5.0
        gates = sample_first_layer_gates(4, 8, radius, seeded_stream(4, "test"))
        for k in range(1, 8):
            assert abs(gates[0, k]) <= radius
            assert np.linalg.norm(gates[1:, k]) == pytest.approx(1.0, abs=1e-12)

    def test_deterministic_given_seed(self):
        a = sample_first_layer_gates(3, 5, 1.5, seeded_stream(7, "gates"))
        b = sample_first_layer_gates(3, 5, 1.5, seeded_stream(7, "gates"))
        np.testing.assert_array_equal(a, b)

    def test_streams_are_label_specific(self):
        a = sample_first_layer_gates(3, 5, 1.5, seeded_stream(7, "gates"))
        b = sample_first_layer_gates(3, 5, 1.5, seeded_stream(7, "other"))
        assert not np.array_equal(a, b)

    def test_bad_radius(self):
        with pytest.raises(ParameterError):
            sample_first_layer_gates(2, 3, 0.0, seeded_stream(0, "test"))

    def test_negative_seed(self):
        with pytest.raises(ParameterError):
            seeded_stream(-1, "test")


class TestSingleFeature:
    def test_hand_evaluation(self):
        direction = RandomDirection(offset=0.0, direction=np.array([1.0]))
        value = semi_random_feature([2.0], direction, [1.0, 3.0], 0)
        assert value == 7.0

    def test_basis_direction_gives_affine_response(self):
        direction = RandomDirection(offset=1.0, direction=np.zeros(3))
        rng = np.random.default_rng(5)
        w = rng.standard_normal(4)
        for order in (0, 1, 2):
            for _ in range(10):
                x = rng.standard_normal(3)
                expected = w[0] + w[1:] @ x
                assert semi_random_feature(x, direction, w, order) == pytest.approx(expected)

    def test_closed_gate_kills_response(self):
        direction = RandomDirection(offset=-10.0, direction=np.array([0.0, 1.0]))
        assert semi_random_feature([1.0, 2.0], direction, [5.0, 5.0, 5.0], 0) == 0.0

    def test_linear_in_weights(self):
        rng = np.random.default_rng(6)
        direction = RandomDirection(offset=0.3, direction=sample_direction(3, rng))
        x = rng.standard_normal(3)
        w1 = rng.standard_normal(4)
        w2 = rng.standard_normal(4)
        combined = semi_random_feature(x, direction, 2.0 * w1 - 0.5 * w2, 1)
        parts = (2.0 * semi_random_feature(x, direction, w1, 1)
                 - 0.5 * semi_random_feature(x, direction, w2, 1))
        assert combined == pytest.approx(parts, rel=1e-12)
