"""
Residual oracles.

The trainer never calls the physics functions directly. Regimes that only
need a true/fake verdict receive a BlackBoxOracle, whose interface has no
way to return a derivative, so the physics model stays outside the network
graph. Physics-informed regimes need a DifferentiableOracle, which adds
residual_gradient.
"""

from typing import Protocol, runtime_checkable

import numpy as np

from .motion import Label, PhysicsParams, Trajectory, mean_residual, residual_gradient


@runtime_checkable
class BlackBoxOracle(Protocol):
    """Returns a residual and nothing else."""

    def mean_residual(self, traj: Trajectory, label: Label) -> float:
        ...


@runtime_checkable
class DifferentiableOracle(Protocol):
    """Residual plus its gradient with respect to the trajectory."""

    def mean_residual(self, traj: Trajectory, label: Label) -> float:
        ...

    def residual_gradient(self, traj: Trajectory, label: Label) -> np.ndarray:
        ...


class NewtonOracle:
    """
    Differentiable oracle for projectile motion under gravity.

    Examples:
        >>> from src.physics.motion import exact_trajectory
        >>> oracle = NewtonOracle(PhysicsParams())
        >>> label = Label(10.0, 30.0)
        >>> oracle.mean_residual(exact_trajectory(label, oracle.params), label) < 1e-9
        True
    """

    def __init__(self, params: PhysicsParams):
        self.params = params

    def mean_residual(self, traj: Trajectory, label: Label) -> float:
        return mean_residual(traj, label, self.params)

    def residual_gradient(self, traj: Trajectory, label: Label) -> np.ndarray:
        return residual_gradient(traj, label, self.params)

    def black_box(self) -> 'BlackBoxView':
        return BlackBoxView(self)


class BlackBoxView:
    """
    Gradient-free view of any oracle.

    Wraps e.g. a NewtonOracle so that only mean_residual is reachable, the
    way an external solver would only report a number.
    """

    __slots__ = ('_inner',)

    def __init__(self, inner: BlackBoxOracle):
        self._inner = inner

    def mean_residual(self, traj: Trajectory, label: Label) -> float:
        return self._inner.mean_residual(traj, label)
