import numpy as np
import pytest

from formfind.tasks import ShellTask, TowerTask, make_task
from formfind.tasks import test_seeds as held_out_seeds


class TestShellTask:
    def test_sampling_is_deterministic(self, shell_task):
        a = shell_task.sample_case(42)
        b = shell_task.sample_case(42)
        np.testing.assert_array_equal(a.target.positions, b.target.positions)

    def test_delta_zero_is_symmetric(self, shell_task):
        case = shell_task.sample_case(7, delta=0.0)
        g = shell_task.grid_side
        pts = case.target.positions.reshape(g, g, 3)
        # mirror the row axis (y) and the column axis (x)
        np.testing.assert_allclose(
            pts, pts[::-1] * np.array([1.0, -1.0, 1.0]), atol=1e-9
        )
        np.testing.assert_allclose(
            pts, pts[:, ::-1] * np.array([-1.0, 1.0, 1.0]), atol=1e-9
        )

    def test_delta_changes_target_continuously(self, shell_task):
        base = shell_task.sample_case(7, delta=0.0)
        near = shell_task.sample_case(7, delta=0.01)
        far = shell_task.sample_case(7, delta=1.0)
        d_near = np.abs(near.target.positions - base.target.positions).max()
        d_far = np.abs(far.target.positions - base.target.positions).max()
        assert 0 < d_near < d_far

    def test_encoder_input_is_flat_target(self, shell_task):
        case = shell_task.sample_case(3)
        np.testing.assert_array_equal(
            case.encoder_input, case.target.positions.ravel()
        )
        assert shell_task.encoder_in_size == case.encoder_input.size

    def test_signs_all_compression(self, shell_task):
        assert np.all(shell_task.signs == -1.0)


class TestTowerTask:
    def test_sampling_is_deterministic(self, tower_task):
        a = tower_task.sample_case(42)
        b = tower_task.sample_case(42)
        np.testing.assert_array_equal(a.target.positions, b.target.positions)

    def test_encoder_input_size(self, tower_task):
        case = tower_task.sample_case(0)
        assert case.encoder_input.size == 9 * tower_task.points_per_ring
        assert tower_task.encoder_in_size == case.encoder_input.size

    def test_sign_pattern_mixed(self, tower_task):
        signs = tower_task.signs
        assert np.sum(signs < 0) == tower_task.points_per_ring
        assert np.sum(signs > 0) == signs.size - tower_task.points_per_ring

    def test_case_params_round_trip(self, tower_task):
        case = tower_task.sample_case(5)
        from formfind.datagen import TowerParams

        rebuilt = tower_task.case_from_params(TowerParams.from_dict(case.params))
        np.testing.assert_array_equal(rebuilt.target.positions, case.target.positions)


class TestPresets:
    def test_desk_and_paper_scales(self):
        assert make_task("shells", "desk").grid_side == 6
        assert make_task("shells", "paper").grid_side == 10
        desk = make_task("towers", "desk")
        assert (desk.num_rings, desk.points_per_ring) == (5, 8)
        paper = make_task("towers", "paper")
        assert (paper.num_rings, paper.points_per_ring) == (21, 16)

    def test_unknown_task_rejected(self):
        with pytest.raises(ValueError):
            make_task("bridges")

    def test_opt_methods(self):
        assert make_task("shells").opt_method == "slsqp"
        assert make_task("towers").opt_method == "lbfgsb"


class TestHeldOutSeeds:
    def test_disjoint_from_training_range(self):
        from formfind.amortizer import TRAIN_SEED_BOUND

        seeds = held_out_seeds(100)
        assert seeds.min() >= TRAIN_SEED_BOUND
        assert len(np.unique(seeds)) == 100
