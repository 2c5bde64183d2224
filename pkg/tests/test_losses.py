import numpy as np
import pytest

from formfind.losses import (
    ShapeTarget,
    physics_loss,
    physics_loss_grad,
    regularization_loss,
    regularization_loss_grad,
    shape_loss,
    shape_loss_grad,
)
from formfind.structures import InvalidArgumentError


def fd_grad(fn, x, eps=1e-6):
    """Central-difference gradient of a scalar function of an array."""
    g = np.zeros_like(x, dtype=float)
    flat = g.ravel()
    xf = x.ravel().astype(float)
    for m in range(xf.size):
        hi, lo = xf.copy(), xf.copy()
        hi[m] += eps
        lo[m] -= eps
        flat[m] = (fn(hi.reshape(x.shape)) - fn(lo.reshape(x.shape))) / (2 * eps)
    return g


class TestShapeTarget:
    def test_rejects_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            ShapeTarget(positions=np.zeros((3, 3)), mask=np.ones((2, 3)))

    def test_rejects_non_binary_mask(self):
        with pytest.raises(InvalidArgumentError):
            ShapeTarget(positions=np.zeros((2, 3)), mask=np.full((2, 3), 0.5))


class TestShapeLoss:
    def test_hand_computed_l1(self):
        target = ShapeTarget(positions=np.zeros((2, 3)), mask=np.ones((2, 3)))
        positions = np.array([[1.0, -2.0, 0.0], [0.0, 0.0, 3.0]])
        assert shape_loss(positions, target, p=1) == pytest.approx(6.0)

    def test_hand_computed_l2(self):
        target = ShapeTarget(positions=np.zeros((1, 3)), mask=np.ones((1, 3)))
        positions = np.array([[3.0, 4.0, 0.0]])
        assert shape_loss(positions, target, p=2) == pytest.approx(25.0)

    def test_mask_zeroes_contributions(self):
        mask = np.ones((2, 3))
        mask[0, :] = 0.0
        target = ShapeTarget(positions=np.zeros((2, 3)), mask=mask)
        positions = np.array([[9.0, 9.0, 9.0], [0.0, 1.0, 0.0]])
        assert shape_loss(positions, target, p=1) == pytest.approx(1.0)

    def test_zero_at_target(self):
        pos = np.random.default_rng(0).normal(size=(4, 3))
        target = ShapeTarget(positions=pos, mask=np.ones((4, 3)))
        assert shape_loss(pos, target, p=1) == 0.0

    def test_rejects_nonpositive_p(self):
        target = ShapeTarget(positions=np.zeros((1, 3)), mask=np.ones((1, 3)))
        with pytest.raises(InvalidArgumentError):
            shape_loss(np.zeros((1, 3)), target, p=0)

    @pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
    def test_grad_matches_finite_differences(self, p):
        rng = np.random.default_rng(int(p))
        target = ShapeTarget(positions=rng.normal(size=(3, 3)), mask=np.ones((3, 3)))
        # keep coordinates away from the p=1 kink
        positions = target.positions + rng.choice([-1.0, 1.0], size=(3, 3)) * rng.uniform(
            0.1, 1.0, size=(3, 3)
        )
        grad = shape_loss_grad(positions, target, p)
        numeric = fd_grad(lambda x: shape_loss(x, target, p), positions)
        np.testing.assert_allclose(grad, numeric, rtol=1e-6, atol=1e-8)

    def test_l1_subgradient_zero_at_kink(self):
        target = ShapeTarget(positions=np.ones((1, 3)), mask=np.ones((1, 3)))
        grad = shape_loss_grad(np.ones((1, 3)), target, p=1)
        np.testing.assert_array_equal(grad, np.zeros((1, 3)))


class TestPhysicsLoss:
    def test_frobenius_norm(self):
        r = np.array([[3.0, 0.0, 0.0], [0.0, 4.0, 0.0]])
        assert physics_loss(r) == pytest.approx(5.0)

    def test_grad_matches_finite_differences(self):
        r = np.random.default_rng(2).normal(size=(4, 3))
        numeric = fd_grad(physics_loss, r)
        np.testing.assert_allclose(physics_loss_grad(r), numeric, rtol=1e-6, atol=1e-8)

    def test_grad_at_zero_is_zero(self):
        np.testing.assert_array_equal(physics_loss_grad(np.zeros((2, 3))), np.zeros((2, 3)))


class TestRegularizationLoss:
    def test_matches_numpy_var_oracle(self):
        rng = np.random.default_rng(3)
        signs = rng.choice([-1.0, 1.0], size=10)
        q = rng.normal(size=(4, 10))
        expected = np.var(q[:, signs > 0]) + np.var(q[:, signs < 0])
        assert regularization_loss(q, signs) == pytest.approx(expected)

    def test_constant_class_has_zero_variance(self):
        signs = np.array([1.0, 1.0, -1.0])
        q = np.array([[2.0, 2.0, -5.0], [2.0, 2.0, -5.0]])
        assert regularization_loss(q, signs) == pytest.approx(0.0)

    def test_single_sign_class(self):
        signs = -np.ones(4)
        q = -np.abs(np.random.default_rng(4).normal(size=(2, 4)))
        assert regularization_loss(q, signs) == pytest.approx(np.var(q))

    def test_grad_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        signs = rng.choice([-1.0, 1.0], size=6)
        q = rng.normal(size=(3, 6))
        numeric = fd_grad(lambda x: regularization_loss(x, signs), q)
        np.testing.assert_allclose(
            regularization_loss_grad(q, signs), numeric, rtol=1e-6, atol=1e-8
        )
