import numpy as np
import pytest

from formfind import mlp


def numeric_param_grads(params, x, spec, cot, eps=1e-6):
    """Central-difference gradients of sum(cot * mlp(x)) for every parameter."""
    grads = []
    for idx, (w, b) in enumerate(params):
        gw = np.zeros_like(w)
        gb = np.zeros_like(b)
        for arr, garr in ((w, gw), (b, gb)):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                k = it.multi_index
                orig = arr[k]
                arr[k] = orig + eps
                hi, _ = mlp.mlp_forward(params, x, spec)
                arr[k] = orig - eps
                lo, _ = mlp.mlp_forward(params, x, spec)
                arr[k] = orig
                garr[k] = np.sum(cot * (hi - lo)) / (2 * eps)
        grads.append((gw, gb))
    return grads


class TestActivations:
    def test_elu_values(self):
        assert mlp.elu(np.array([2.0]))[0] == pytest.approx(2.0)
        assert mlp.elu(np.array([-1.0]))[0] == pytest.approx(np.expm1(-1.0))
        assert mlp.elu(np.array([0.0]))[0] == pytest.approx(0.0)

    def test_elu_grad_matches_fd(self):
        z = np.linspace(-3, 3, 13)
        numeric = (mlp.elu(z + 1e-6) - mlp.elu(z - 1e-6)) / 2e-6
        np.testing.assert_allclose(mlp.elu_grad(z), numeric, atol=1e-6)

    def test_softplus_stable_and_correct(self):
        z = np.array([-800.0, -1.0, 0.0, 1.0, 800.0])
        out = mlp.softplus(z)
        assert np.all(np.isfinite(out))
        assert out[2] == pytest.approx(np.log(2.0))
        assert out[4] == pytest.approx(800.0)

    def test_sigmoid_extremes(self):
        z = np.array([-800.0, 0.0, 800.0])
        out = mlp.sigmoid(z)
        np.testing.assert_allclose(out, [0.0, 0.5, 1.0], atol=1e-12)


class TestInit:
    def test_bounds_follow_input_size(self):
        spec = mlp.MlpSpec(layer_sizes=(100, 50, 10))
        params = mlp.init_mlp(spec, seed=0)
        for (w, b), rho in zip(params, (100, 50)):
            bound = 1.0 / np.sqrt(rho)
            assert np.all(np.abs(w) < bound)
            assert np.all(np.abs(b) < bound)

    def test_deterministic_per_seed(self):
        spec = mlp.MlpSpec(layer_sizes=(4, 3))
        a = mlp.init_mlp(spec, seed=7)
        b = mlp.init_mlp(spec, seed=7)
        np.testing.assert_array_equal(a[0][0], b[0][0])

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            mlp.MlpSpec(layer_sizes=(4,))
        with pytest.raises(ValueError):
            mlp.MlpSpec(layer_sizes=(4, 2), output_activation="relu")


class TestForwardBackward:
    @pytest.mark.parametrize("out_act", ["identity", "softplus"])
    def test_backward_matches_finite_differences(self, out_act):
        spec = mlp.MlpSpec(layer_sizes=(5, 7, 4), output_activation=out_act)
        params = mlp.init_mlp(spec, seed=1)
        rng = np.random.default_rng(1)
        x = rng.normal(size=(3, 5))
        out, cache = mlp.mlp_forward(params, x, spec)
        cot = rng.normal(size=out.shape)
        analytic, d_in = mlp.mlp_backward(params, cache, cot, spec)
        numeric = numeric_param_grads(params, x, spec, cot)
        for (aw, ab), (nw, nb) in zip(analytic, numeric):
            np.testing.assert_allclose(aw, nw, rtol=1e-5, atol=1e-7)
            np.testing.assert_allclose(ab, nb, rtol=1e-5, atol=1e-7)

    def test_input_gradient_matches_finite_differences(self):
        spec = mlp.MlpSpec(layer_sizes=(4, 6, 2), output_activation="softplus")
        params = mlp.init_mlp(spec, seed=2)
        rng = np.random.default_rng(2)
        x = rng.normal(size=4)
        out, cache = mlp.mlp_forward(params, x, spec)
        cot = rng.normal(size=out.shape)
        _, d_in = mlp.mlp_backward(params, cache, cot, spec)
        eps = 1e-6
        numeric = np.zeros_like(x)
        for m in range(4):
            hi, lo = x.copy(), x.copy()
            hi[m] += eps
            lo[m] -= eps
            o_hi, _ = mlp.mlp_forward(params, hi, spec)
            o_lo, _ = mlp.mlp_forward(params, lo, spec)
            numeric[m] = np.sum(cot * (o_hi - o_lo)) / (2 * eps)
        np.testing.assert_allclose(d_in, numeric, rtol=1e-5, atol=1e-8)

    def test_softplus_output_is_positive(self):
        spec = mlp.MlpSpec(layer_sizes=(3, 8, 5), output_activation="softplus")
        params = mlp.init_mlp(spec, seed=3)
        out, _ = mlp.mlp_forward(params, np.random.default_rng(3).normal(size=(10, 3)), spec)
        assert np.all(out > 0)

    def test_batched_matches_single(self):
        spec = mlp.MlpSpec(layer_sizes=(3, 5, 2))
        params = mlp.init_mlp(spec, seed=4)
        x = np.random.default_rng(4).normal(size=(6, 3))
        batch, _ = mlp.mlp_forward(params, x, spec)
        singles = np.stack([mlp.mlp_forward(params, row, spec)[0] for row in x])
        np.testing.assert_allclose(batch, singles, atol=1e-12)


class TestClipping:
    def test_no_op_below_threshold(self):
        grads = [(np.full((2, 2), 0.1), np.zeros(2))]
        clipped = mlp.clip_global_norm(grads, 10.0)
        np.testing.assert_array_equal(clipped[0][0], grads[0][0])

    def test_rescales_to_threshold(self):
        grads = [(np.full((2, 2), 3.0), np.full(2, 4.0))]
        clipped = mlp.clip_global_norm(grads, 1.0)
        assert mlp.global_norm(clipped) == pytest.approx(1.0)

    def test_none_disables(self):
        grads = [(np.full((1, 1), 1e6), np.zeros(1))]
        assert mlp.clip_global_norm(grads, None) is grads


class TestAdam:
    def test_first_step_matches_closed_form(self):
        # with zero state, one Adam step moves by -lr * sign(g) exactly
        params = [(np.zeros((2, 2)), np.zeros(2))]
        g = np.array([[1.0, -2.0], [0.5, 0.0]])
        grads = [(g, np.array([3.0, -1.0]))]
        state = mlp.AdamState.zeros_like(params)
        lr = 0.1
        new = mlp.adam_step(params, grads, state, lr)
        expected_w = -lr * np.sign(g) * (np.abs(g) / (np.abs(g) + 1e-8))
        np.testing.assert_allclose(new[0][0], expected_w, atol=1e-9)

    def test_matches_reference_implementation(self):
        # independent re-implementation of bias-corrected Adam as the oracle
        rng = np.random.default_rng(5)
        w = rng.normal(size=(3, 2))
        params = [(w.copy(), np.zeros(2))]
        state = mlp.AdamState.zeros_like(params)
        m = np.zeros_like(w)
        v = np.zeros_like(w)
        lr, b1, b2, eps = 1e-2, 0.9, 0.999, 1e-8
        current = w.copy()
        for t in range(1, 6):
            g = rng.normal(size=(3, 2))
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            m_hat = m / (1 - b1**t)
            v_hat = v / (1 - b2**t)
            current = current - lr * m_hat / (np.sqrt(v_hat) + eps)
            params = mlp.adam_step(params, [(g, np.zeros(2))], state, lr)
        np.testing.assert_allclose(params[0][0], current, atol=1e-12)

    def test_step_counter_advances(self):
        params = [(np.zeros((1, 1)), np.zeros(1))]
        state = mlp.AdamState.zeros_like(params)
        mlp.adam_step(params, [(np.ones((1, 1)), np.ones(1))], state, 0.1)
        assert state.step == 1


class TestParameterCount:
    def test_counts_weights_and_biases(self):
        spec = mlp.MlpSpec(layer_sizes=(4, 3, 2))
        params = mlp.init_mlp(spec, seed=0)
        assert mlp.num_parameters(params) == 4 * 3 + 3 + 3 * 2 + 2
