"""Tests for the numpy networks, their gradients and the Adam optimizer."""

import gc
import json

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from markerrally.exceptions import ShapeMismatch, StaleCache
from markerrally.nn_core import (
    AdamState, Gradients, LINEAR, RELU, TANH, adam_step, backward, forward,
    mlp_init, mse_loss, params_from_dict, params_to_dict,
)
from . import FastTestCase

DQN_NET = ([12, 1024, 512, 2], [RELU, RELU, LINEAR])
ACTOR_NET = ([12, 64, 64, 32, 1], [RELU, RELU, RELU, TANH])
CRITIC_NET = ([13, 64, 64, 32, 1], [RELU, RELU, RELU, LINEAR])


def perturbed(params, direction, eps):
    twin = params.copy()
    for array, step in zip(twin.arrays(), direction):
        array += eps * step
    return twin


def relu_pattern(params, x):
    _, cache = forward(params, x)
    return [z > 0 for z in cache.preacts]


class TestGradients(FastTestCase):
    """Compare reverse-mode gradients with central differences in float64."""

    def check_directional(self, sizes, activations, draws=100, eps=1e-6):
        checked = 0
        for seed in range(draws):
            rng = np.random.default_rng(seed)
            params = mlp_init(sizes, activations, seed).astype(np.float64)
            x = rng.normal(size=(4, sizes[0]))
            g_out = rng.normal(size=(4, sizes[-1]))
            direction = [rng.normal(size=a.shape) for a in params.arrays()]
            norm = np.sqrt(sum(np.sum(d * d) for d in direction))
            direction = [d / norm for d in direction]

            plus = perturbed(params, direction, eps)
            minus = perturbed(params, direction, -eps)
            pattern = relu_pattern(params, x)
            if any(
                not all(np.array_equal(a, b) for a, b in
                        zip(pattern, relu_pattern(p, x)))
                for p in (plus, minus)
            ):
                continue  # the step crossed a relu kink
            out, cache = forward(params, x)
            grads = backward(params, cache, g_out)
            analytic = sum(
                np.sum(g * d) for g, d in zip(grads.arrays(), direction))
            numeric = (
                np.sum(forward(plus, x)[0] * g_out)
                - np.sum(forward(minus, x)[0] * g_out)
            ) / (2 * eps)
            scale = max(abs(analytic), abs(numeric))
            assert abs(analytic - numeric) <= 1e-4 * scale + 1e-9, \
                (seed, analytic, numeric)
            checked += 1
        assert checked >= draws * 0.9

    def test_dqn_architecture(self):
        self.check_directional(*DQN_NET)

    def test_actor_architecture(self):
        self.check_directional(*ACTOR_NET)

    def test_critic_architecture(self):
        self.check_directional(*CRITIC_NET, draws=20)

    def test_every_parameter_of_a_small_net(self):
        rng = np.random.default_rng(1)
        params = mlp_init([3, 5, 4, 2], [TANH, RELU, LINEAR], 7).astype(np.float64)
        x = rng.normal(size=(6, 3))
        g_out = rng.normal(size=(6, 2))
        _, cache = forward(params, x)
        grads = backward(params, cache, g_out)
        eps = 1e-6
        for array, grad in zip(params.arrays(), grads.arrays()):
            for index in np.ndindex(array.shape):
                saved = array[index]
                array[index] = saved + eps
                high = np.sum(forward(params, x)[0] * g_out)
                array[index] = saved - eps
                low = np.sum(forward(params, x)[0] * g_out)
                array[index] = saved
                assert abs((high - low) / (2 * eps) - grad[index]) < 1e-6

    def test_input_gradient(self):
        params = mlp_init([4, 6, 1], [TANH, LINEAR], 3).astype(np.float64)
        x = np.random.default_rng(2).normal(size=4)
        _, cache = forward(params, x)
        grads = backward(params, cache, np.ones(1))
        eps = 1e-6
        for i in range(4):
            step = np.zeros(4)
            step[i] = eps
            numeric = (forward(params, x + step)[0][0]
                       - forward(params, x - step)[0][0]) / (2 * eps)
            assert abs(numeric - grads.input[i]) < 1e-7


class TestForward(FastTestCase):

    def test_shapes(self):
        params = mlp_init(*ACTOR_NET, seed=0)
        out, _ = forward(params, np.zeros(12))
        assert out.shape == (1,)
        out, _ = forward(params, np.zeros((5, 12)))
        assert out.shape == (5, 1)
        assert out.dtype == np.float32

    def test_tanh_output_is_bounded(self):
        params = mlp_init(*ACTOR_NET, seed=0)
        out, _ = forward(params, 100 * np.random.default_rng(0).normal(size=(50, 12)))
        assert np.all(np.abs(out) <= 1)

    def test_wrong_input_size(self):
        params = mlp_init(*ACTOR_NET, seed=0)
        with self.assertRaises(ShapeMismatch):
            forward(params, np.zeros(11))

    def test_activation_count(self):
        with self.assertRaises(ShapeMismatch):
            mlp_init([2, 3, 1], [RELU], 0)

    def test_unknown_activation(self):
        with self.assertRaises(ShapeMismatch):
            mlp_init([2, 1], ["sigmoid"], 0)

    def test_init_is_seeded(self):
        one, two = mlp_init(*DQN_NET, seed=5), mlp_init(*DQN_NET, seed=5)
        assert one.same_as(two)
        assert not one.same_as(mlp_init(*DQN_NET, seed=6))
        assert all(not b.any() for b in one.biases)

    def test_stale_cache(self):
        params = mlp_init([3, 4, 1], [RELU, LINEAR], 0)
        _, cache = forward(params, np.ones(3))
        grads = backward(params, cache, np.ones(1))
        adam_step(params, grads, AdamState(params, 1e-3))
        with self.assertRaises(StaleCache):
            backward(params, cache, np.ones(1))

    def test_cache_of_another_network(self):
        one = mlp_init([3, 1], [LINEAR], 0)
        _, cache = forward(one, np.ones(3))
        with self.assertRaises(StaleCache):
            backward(one.copy(), cache, np.ones(1))

    def test_cache_outlives_its_network(self):
        one = mlp_init([3, 1], [LINEAR], 0)
        _, cache = forward(one, np.ones(3))
        del one
        gc.collect()
        # a fresh network at the same version may reuse the old address
        for seed in range(20):
            other = mlp_init([3, 1], [LINEAR], seed)
            assert other.version == cache.version
            with self.assertRaises(StaleCache):
                backward(other, cache, np.ones(1))

    def test_blend_and_load(self):
        online = mlp_init([3, 4, 1], [RELU, LINEAR], 0)
        target = mlp_init([3, 4, 1], [RELU, LINEAR], 1)
        before = target.copy()
        target.blend(online, 0.25)
        for t, b, o in zip(target.arrays(), before.arrays(), online.arrays()):
            assert_allclose(t, 0.25 * o + 0.75 * b, rtol=1e-6, atol=1e-7)
        target.load(online)
        assert target.same_as(online)


class TestAdamAndLoss(FastTestCase):

    def test_first_step_moves_by_learning_rate(self):
        params = mlp_init([3, 4, 2], [RELU, LINEAR], 0).astype(np.float64)
        before = params.copy()
        grads = Gradients(
            [np.full_like(w, 0.5) for w in params.weights],
            [np.full_like(b, -2.0) for b in params.biases],
            None,
        )
        state = AdamState(params, 0.01)
        adam_step(params, grads, state)
        assert state.step == 1
        for new, old, g in zip(params.arrays(), before.arrays(), grads.arrays()):
            assert_allclose(new - old, -0.01 * np.sign(g), rtol=1e-6)

    def test_fits_a_line(self):
        params = mlp_init([1, 1], [LINEAR], 0)
        state = AdamState(params, 0.05)
        x = np.linspace(-1, 1, 21)[:, None]
        y = 2 * x + 1
        for _ in range(2000):
            pred, cache = forward(params, x)
            loss, grad = mse_loss(pred, y)
            adam_step(params, backward(params, cache, grad), state)
        assert loss < 1e-3
        assert abs(params.weights[0][0, 0] - 2) < 0.05
        assert abs(params.biases[0][0] - 1) < 0.05

    def test_mismatched_gradients(self):
        params = mlp_init([3, 1], [LINEAR], 0)
        other = mlp_init([4, 1], [LINEAR], 0)
        _, cache = forward(other, np.ones(4))
        with self.assertRaises(ShapeMismatch):
            adam_step(params, backward(other, cache, np.ones(1)),
                      AdamState(params, 1e-3))

    def test_state_round_trip(self):
        params = mlp_init([3, 2], [LINEAR], 0)
        state = AdamState(params, 1e-3)
        _, cache = forward(params, np.ones(3))
        adam_step(params, backward(params, cache, np.ones(2)), state)
        fresh = AdamState(params, 1e-3)
        fresh.restore(state.to_arrays())
        assert fresh.step == 1
        for a, b in zip(fresh.first + fresh.second, state.first + state.second):
            assert_array_equal(a, b)

    def test_mse(self):
        loss, grad = mse_loss(np.array([1.0, 2.0]), np.array([1.0, 4.0]))
        assert loss == 2.0
        assert_allclose(grad, [0.0, -2.0])
        with self.assertRaises(ShapeMismatch):
            mse_loss(np.zeros(2), np.zeros(3))


class TestCheckpointDocument(FastTestCase):

    def test_round_trip_is_bit_identical(self):
        for sizes, activations in (DQN_NET, ACTOR_NET):
            params = mlp_init(sizes, activations, 3)
            # move away from the initial values
            for array in params.arrays():
                array += np.float32(1e-3)
            text = json.dumps(params_to_dict(params, "td3", 10, "abc"))
            loaded = params_from_dict(json.loads(text))
            assert loaded.same_as(params)
            x = np.random.default_rng(0).normal(size=(8, sizes[0]))
            assert_array_equal(forward(loaded, x)[0], forward(params, x)[0])

    def test_document(self):
        params = mlp_init([3, 2], [LINEAR], 0)
        adict = params_to_dict(params, "dqn", 7, "digest")
        assert adict["layer_sizes"] == [3, 2]
        assert adict["activations"] == ["linear"]
        assert len(adict["weights"][0]) == 6
        assert adict["episode"] == 7
        assert adict["format_version"] == 1
