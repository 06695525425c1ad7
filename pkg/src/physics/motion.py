"""
Projectile motion under uniform gravity and its residual.

    x(t) = x0 - 1/2 g t^2 + v0 t,     v0 = |v0| (cos phi, sin phi)
    P(x, k) = || x - x0 + 1/2 g (k dt)^2 - v0 (k dt) ||^2
    r = (1 / n_steps) sum_k P(x_k, k)

All quantities are physical (metres, seconds); nothing here knows about
network normalization.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass(frozen=True)
class PhysicsParams:
    """
    Constants of the equation of motion.

    Args:
        x0: Launch point (m)
        g: Gravitational acceleration vector (m/s^2); enters as -1/2 g t^2,
           so (0, 9.8) pulls towards -y
        dt: Time step (s), > 0
        n_steps: Number of trajectory points, >= 1; point k is at t = k dt
    """
    x0: Tuple[float, float] = (0.0, 0.0)
    g: Tuple[float, float] = (0.0, 9.8)
    dt: float = 0.01
    n_steps: int = 100

    def __post_init__(self):
        object.__setattr__(self, 'x0', tuple(float(v) for v in self.x0))
        object.__setattr__(self, 'g', tuple(float(v) for v in self.g))
        if len(self.x0) != 2 or len(self.g) != 2:
            raise ValueError("x0 and g must be planar (2 components)")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if int(self.n_steps) < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        object.__setattr__(self, 'n_steps', int(self.n_steps))

    @property
    def flat_width(self) -> int:
        """Length of a flattened trajectory (x then y per point)."""
        return 2 * self.n_steps

    def times(self) -> np.ndarray:
        """t_k = k dt for k = 1..n_steps."""
        return np.arange(1, self.n_steps + 1, dtype=np.float64) * self.dt

    def to_dict(self) -> dict:
        return {'x0': list(self.x0), 'g': list(self.g), 'dt': self.dt, 'n_steps': self.n_steps}

    @classmethod
    def from_dict(cls, d: dict) -> 'PhysicsParams':
        return cls(tuple(d['x0']), tuple(d['g']), float(d['dt']), int(d['n_steps']))


@dataclass(frozen=True)
class Label:
    """
    Conditioning label: launch speed and angle.

    Examples:
        >>> Label(10.0, 0.0).velocity()
        array([10.,  0.])
    """
    v0_mag: float
    phi_deg: float

    def __post_init__(self):
        if not self.v0_mag >= 0:
            raise ValueError(f"v0_mag must be >= 0, got {self.v0_mag}")

    def velocity(self) -> np.ndarray:
        phi = np.deg2rad(self.phi_deg)
        return self.v0_mag * np.array([np.cos(phi), np.sin(phi)])

    def as_array(self) -> np.ndarray:
        return np.array([self.v0_mag, self.phi_deg], dtype=np.float64)


@dataclass(frozen=True)
class Trajectory:
    """
    Ordered planar points, shape (n_steps, 2). Flattened form is
    (x1, y1, x2, y2, ...).
    """
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ValueError(f"Trajectory points must have shape (n, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("Trajectory contains non-finite coordinates")
        object.__setattr__(self, 'points', pts)

    @property
    def n_steps(self) -> int:
        return self.points.shape[0]

    def flat(self) -> np.ndarray:
        return self.points.reshape(-1).copy()

    @classmethod
    def from_flat(cls, vec: np.ndarray) -> 'Trajectory':
        vec = np.asarray(vec, dtype=np.float64)
        if vec.ndim != 1 or vec.shape[0] % 2:
            raise ValueError(f"Flattened trajectory must be 1-D with even length, got {vec.shape}")
        return cls(vec.reshape(-1, 2))


def exact_trajectory(label: Label, params: PhysicsParams) -> Trajectory:
    """
    Closed-form solution sampled at t = dt, 2 dt, ..., n_steps dt.

    Examples:
        >>> exact_trajectory(Label(0.0, 0.0), PhysicsParams()).points[0]
        array([ 0.     , -0.00049])
    """
    t = params.times()[:, None]
    x0 = np.asarray(params.x0)
    g = np.asarray(params.g)
    return Trajectory(x0 - 0.5 * g * t ** 2 + label.velocity() * t)


def _deviation(points: np.ndarray, times: np.ndarray, label: Label, params: PhysicsParams) -> np.ndarray:
    t = times[:, None]
    return points - np.asarray(params.x0) + 0.5 * np.asarray(params.g) * t ** 2 - label.velocity() * t


def _check_length(traj: Trajectory, params: PhysicsParams) -> None:
    if traj.n_steps != params.n_steps:
        raise ValueError(f"Trajectory has {traj.n_steps} points, physics expects {params.n_steps}")


def pointwise_residual(x, k: int, label: Label, params: PhysicsParams) -> float:
    """
    Squared deviation of one point from the equation of motion at t = k dt.

    Args:
        x: Planar point (x, y)
        k: Step index, 1 <= k <= n_steps
        label: Launch speed/angle
        params: Physics constants

    Returns:
        Non-negative residual
    """
    if not 1 <= k <= params.n_steps:
        raise ValueError(f"Step index k={k} outside 1..{params.n_steps}")
    point = np.asarray(x, dtype=np.float64).reshape(1, 2)
    d = _deviation(point, np.array([k * params.dt]), label, params)
    return float(np.sum(d * d))


def mean_residual(traj: Trajectory, label: Label, params: PhysicsParams) -> float:
    """
    Mean pointwise residual over the whole trajectory.

    Returns:
        r >= 0; 0 exactly for the closed-form solution up to rounding
    """
    _check_length(traj, params)
    d = _deviation(traj.points, params.times(), label, params)
    return float(np.mean(np.sum(d * d, axis=1)))


def residual_gradient(traj: Trajectory, label: Label, params: PhysicsParams) -> np.ndarray:
    """
    Gradient of mean_residual w.r.t. every coordinate.

        dr/dx_k = (2 / n_steps) (x_k - x0 + 1/2 g t_k^2 - v0 t_k)

    Returns:
        Flattened gradient (x then y per point), length 2 n_steps
    """
    _check_length(traj, params)
    d = _deviation(traj.points, params.times(), label, params)
    return (2.0 / params.n_steps) * d.reshape(-1)
