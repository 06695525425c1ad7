"""
Unit tests for projectile motion, residuals and oracles.
"""

import pytest
import sys
from pathlib import Path

import numpy as np

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.nn.rng import Rng
from src.physics.motion import (
    Label,
    PhysicsParams,
    Trajectory,
    exact_trajectory,
    mean_residual,
    pointwise_residual,
    residual_gradient
)
from src.physics.oracles import BlackBoxOracle, BlackBoxView, DifferentiableOracle, NewtonOracle


@pytest.fixture
def params():
    return PhysicsParams()


class TestExactTrajectory:
    """Test the closed-form solution."""

    def test_shape(self, params):
        """100 planar points by default."""
        traj = exact_trajectory(Label(10.0, 45.0), params)
        assert traj.points.shape == (100, 2)
        assert traj.flat().shape == (200,)

    def test_horizontal_launch(self, params):
        """phi = 0: x grows linearly, y falls as -1/2 g t^2."""
        traj = exact_trajectory(Label(10.0, 0.0), params)
        t = params.times()
        np.testing.assert_allclose(traj.points[:, 0], 10.0 * t, rtol=1e-12)
        np.testing.assert_allclose(traj.points[:, 1], -4.9 * t ** 2, rtol=1e-12)

    def test_full_grid_has_zero_residual(self, params):
        """Every label of the 100 x 91 grid is exact to 1e-9."""
        for v0 in range(1, 101):
            for phi in range(0, 91):
                label = Label(float(v0), float(phi))
                assert mean_residual(exact_trajectory(label, params), label, params) < 1e-9


class TestResiduals:
    """Test pointwise and mean residuals."""

    def test_unit_offset(self, params):
        """A point shifted by 1 m has residual 1."""
        label = Label(20.0, 30.0)
        point = exact_trajectory(label, params).points[4] + np.array([1.0, 0.0])
        assert pointwise_residual(point, 5, label, params) == pytest.approx(1.0, rel=1e-9)

    def test_mean_of_constant_offset(self, params):
        """A whole trajectory shifted by (0, 2) has mean residual 4."""
        label = Label(5.0, 60.0)
        shifted = Trajectory(exact_trajectory(label, params).points + np.array([0.0, 2.0]))
        assert mean_residual(shifted, label, params) == pytest.approx(4.0, rel=1e-9)

    def test_step_out_of_range(self, params):
        """k must lie in 1..n_steps."""
        with pytest.raises(ValueError, match="k=0"):
            pointwise_residual((0.0, 0.0), 0, Label(1.0, 0.0), params)
        with pytest.raises(ValueError):
            pointwise_residual((0.0, 0.0), 101, Label(1.0, 0.0), params)

    def test_wrong_length(self, params):
        """Trajectories of another length are rejected."""
        traj = Trajectory(np.zeros((5, 2)))
        with pytest.raises(ValueError, match="5 points"):
            mean_residual(traj, Label(1.0, 0.0), params)

    def test_non_finite_trajectory(self):
        """NaN coordinates cannot form a trajectory."""
        with pytest.raises(ValueError):
            Trajectory(np.array([[0.0, np.nan]]))

    def test_negative_speed(self):
        """Launch speed is a magnitude."""
        with pytest.raises(ValueError):
            Label(-1.0, 0.0)


class TestResidualGradient:
    """Test the analytic gradient against central differences."""

    def test_exact_trajectory_has_zero_gradient(self, params):
        """The closed form is a minimum."""
        label = Label(30.0, 10.0)
        grad = residual_gradient(exact_trajectory(label, params), label, params)
        assert np.max(np.abs(grad)) < 1e-9

    def test_random_trajectories(self, params):
        """100 perturbed trajectories agree with finite differences."""
        rng = Rng(99)
        h = 1e-6
        for _ in range(100):
            label = Label(float(rng.uniform(1, 100)), float(rng.uniform(0, 90)))
            base = exact_trajectory(label, params).flat() + rng.normal(params.flat_width)
            analytic = residual_gradient(Trajectory.from_flat(base), label, params)
            numeric = np.empty_like(base)
            for i in range(base.size):
                up, down = base.copy(), base.copy()
                up[i] += h
                down[i] -= h
                numeric[i] = (
                    mean_residual(Trajectory.from_flat(up), label, params)
                    - mean_residual(Trajectory.from_flat(down), label, params)
                ) / (2 * h)
            np.testing.assert_allclose(analytic, numeric, rtol=1e-6, atol=1e-8)


class TestOracles:
    """Test the oracle interfaces."""

    def test_newton_oracle_is_differentiable(self, params):
        """NewtonOracle satisfies both protocols."""
        oracle = NewtonOracle(params)
        assert isinstance(oracle, BlackBoxOracle)
        assert isinstance(oracle, DifferentiableOracle)

    def test_black_box_hides_gradient(self, params):
        """The black-box view exposes mean_residual only."""
        view = NewtonOracle(params).black_box()
        assert isinstance(view, BlackBoxOracle)
        assert not isinstance(view, DifferentiableOracle)
        assert not hasattr(view, 'residual_gradient')

    def test_view_forwards_residual(self, params):
        """The view returns exactly the inner oracle's residual."""
        oracle = NewtonOracle(params)
        label = Label(12.0, 70.0)
        traj = Trajectory(exact_trajectory(label, params).points + 0.5)
        assert BlackBoxView(oracle).mean_residual(traj, label) == oracle.mean_residual(traj, label)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
