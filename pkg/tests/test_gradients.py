import numpy as np
import pytest

from formfind import fdm
from formfind.gradients import (
    finite_difference_gradient,
    vjp_residual,
    vjp_solve_wrt_q,
)
from formfind.losses import shape_loss, shape_loss_grad
from formfind.structures import BoundaryConditions
from formfind.tasks import ShellTask, TowerTask


def relative_error(analytic, numeric):
    scale = max(np.max(np.abs(numeric)), 1e-12)
    return np.max(np.abs(analytic - numeric)) / scale


def shell_setup(seed):
    task = ShellTask(grid_side=5)
    case = task.sample_case(seed)
    rng = np.random.default_rng(seed)
    q = -rng.uniform(0.5, 5.0, size=task.topology.num_bars)
    return task, case, q


class TestVjpSolve:
    @pytest.mark.parametrize("seed", range(3))
    def test_matches_finite_differences_on_shell(self, seed):
        task, case, q = shell_setup(seed)
        topo = task.topology
        # smooth objective: p=2 avoids finite-difference noise at L1 kinks
        def objective(qv):
            state = fdm.solve_equilibrium(topo, qv, case.bc)
            return shape_loss(state.positions, case.target, p=2)

        state = fdm.solve_equilibrium(topo, q, case.bc)
        cot = shape_loss_grad(state.positions, case.target, p=2)[topo.free]
        analytic = vjp_solve_wrt_q(state, cot, topo, q, case.bc)
        numeric = finite_difference_gradient(objective, q)
        assert relative_error(analytic, numeric) <= 1e-5

    def test_matches_finite_differences_on_tower(self):
        task = TowerTask(num_rings=4, points_per_ring=6)
        case = task.sample_case(0)
        rng = np.random.default_rng(0)
        q = task.signs * rng.uniform(1.0, 5.0, size=task.topology.num_bars)
        topo = task.topology

        def objective(qv):
            state = fdm.solve_equilibrium(topo, qv, case.bc)
            return shape_loss(state.positions, case.target, p=2)

        state = fdm.solve_equilibrium(topo, q, case.bc)
        cot = shape_loss_grad(state.positions, case.target, p=2)[topo.free]
        analytic = vjp_solve_wrt_q(state, cot, topo, q, case.bc)
        numeric = finite_difference_gradient(objective, q)
        assert relative_error(analytic, numeric) <= 1e-5

    def test_random_cotangent(self):
        task, case, q = shell_setup(9)
        topo = task.topology
        rng = np.random.default_rng(9)
        cot = rng.normal(size=(topo.num_free, 3))

        def objective(qv):
            state = fdm.solve_equilibrium(topo, qv, case.bc)
            return float(np.sum(cot * state.positions[topo.free]))

        state = fdm.solve_equilibrium(topo, q, case.bc)
        analytic = vjp_solve_wrt_q(state, cot, topo, q, case.bc)
        numeric = finite_difference_gradient(objective, q)
        assert relative_error(analytic, numeric) <= 1e-5

    def test_reuses_factorization(self):
        task, case, q = shell_setup(10)
        topo = task.topology
        system = fdm.factorize(topo, q)
        state = fdm.solve_equilibrium(topo, q, case.bc, system)
        cot = np.ones((topo.num_free, 3))
        a = vjp_solve_wrt_q(state, cot, topo, q, case.bc, system)
        b = vjp_solve_wrt_q(state, cot, topo, q, case.bc)
        np.testing.assert_allclose(a, b, atol=1e-12)


class TestVjpResidual:
    def test_matches_finite_differences(self):
        task, case, q = shell_setup(4)
        topo = task.topology
        rng = np.random.default_rng(4)
        positions = case.target.positions + rng.normal(scale=0.1, size=case.target.positions.shape)
        cot = rng.normal(size=(topo.num_free, 3))

        def objective_q(qv):
            r = fdm.residual_forces(positions, qv, case.bc, topo)
            return float(np.sum(cot * r))

        d_xu, d_q = vjp_residual(positions, cot, topo, q)
        numeric_q = finite_difference_gradient(objective_q, q)
        assert relative_error(d_q, numeric_q) <= 1e-6

        # positions branch, one free coordinate at a time
        free = topo.free
        eps = 1e-6
        numeric_x = np.zeros_like(d_xu)
        for a in range(len(free)):
            for c in range(3):
                hi, lo = positions.copy(), positions.copy()
                hi[free[a], c] += eps
                lo[free[a], c] -= eps
                r_hi = fdm.residual_forces(hi, q, case.bc, topo)
                r_lo = fdm.residual_forces(lo, q, case.bc, topo)
                numeric_x[a, c] = np.sum(cot * (r_hi - r_lo)) / (2 * eps)
        assert relative_error(d_xu, numeric_x) <= 1e-6


class TestFiniteDifferenceHelper:
    def test_exact_on_quadratic(self):
        # central differences are exact for quadratics up to roundoff
        h = np.array([2.0, -1.0, 0.5])
        numeric = finite_difference_gradient(lambda x: float(x @ x), h)
        np.testing.assert_allclose(numeric, 2 * h, atol=1e-8)

    def test_names_failing_coordinate(self):
        def bad(x):
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError, match="coordinate 0"):
            finite_difference_gradient(bad, np.ones(2))
