"""
Training configuration.

Every knob of a single (regime, seed) run lives in TrainConfig. Unknown
keys are rejected so that a typo in a long experiment fails immediately
instead of silently running with a default.
"""

from enum import Enum
from typing import List, Literal, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.gan.losses import PiWeight
from src.gan.schedule import DEFAULT_STARTS, DEFAULT_VALUES, EpsilonSchedule
from src.physics.motion import PhysicsParams


class Regime(str, Enum):
    """Training regimes, in report column order."""
    GAN = "gan"
    PI_GAN = "pi_gan"
    PG_GAN = "pg_gan"
    PG_PI_GAN = "pg_pi_gan"

    @property
    def physics_guided(self) -> bool:
        """Discriminator judged against the residual threshold."""
        return self in (Regime.PG_GAN, Regime.PG_PI_GAN)

    @property
    def physics_informed(self) -> bool:
        """Generator loss carries lambda * r."""
        return self in (Regime.PI_GAN, Regime.PG_PI_GAN)

    @property
    def display_name(self) -> str:
        return {
            Regime.GAN: "GAN",
            Regime.PI_GAN: "PI-GAN",
            Regime.PG_GAN: "PG-GAN",
            Regime.PG_PI_GAN: "PG-PI-GAN",
        }[self]


REGIME_ORDER: Tuple[Regime, ...] = (Regime.GAN, Regime.PI_GAN, Regime.PG_GAN, Regime.PG_PI_GAN)


def grid_values(lo: float, hi: float, step: float) -> List[float]:
    """
    Inclusive arithmetic grid lo, lo + step, ..., <= hi.

    Examples:
        >>> grid_values(0, 90, 10)
        [0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0]
    """
    if not step > 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if hi < lo:
        raise ValueError(f"grid upper bound {hi} is below lower bound {lo}")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [float(lo + step * i) for i in range(n)]


class TrainConfig(BaseModel):
    """
    Settings for one training run. Defaults reproduce the full-scale
    experiment: 9,100-record grid, 10,000 pre-training epochs, 100,000
    epochs total, eps bands 5 / 2.5 / 1.25 / 0.625, lambda = 0.1.
    """
    model_config = ConfigDict(extra='forbid', populate_by_name=True, validate_assignment=True)

    regime: Regime = Regime.GAN
    seed: int = Field(1, ge=0, lt=2 ** 64)

    # schedule of epochs (one optimizer iteration each)
    pretrain_epochs: int = Field(10_000, ge=0)
    total_epochs: int = Field(100_000, ge=0)
    batch_size: int = Field(128, ge=1)
    log_every: int = Field(1000, ge=1)

    # networks and optimizer
    noise_dim: int = Field(16, ge=1)
    hidden_widths: List[int] = Field(default_factory=lambda: [128, 128])
    learning_rate: float = Field(2e-4, gt=0)
    beta1: float = Field(0.5, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    adam_eps: float = Field(1e-8, gt=0)

    # losses
    pi_lambda: float = Field(0.1, ge=0, alias='lambda')
    non_saturating: bool = False
    epsilon_starts: List[int] = Field(default_factory=lambda: list(DEFAULT_STARTS))
    epsilon_values: List[float] = Field(default_factory=lambda: list(DEFAULT_VALUES))
    epsilon_scale: Union[float, Literal['auto']] = 1.0
    # 'geometric' replaces epsilon_starts with epsilon_bands evenly spaced bands
    # over the guided epochs, falling from epsilon_values[0] to epsilon_values[-1]
    epsilon_mode: Literal['bands', 'geometric'] = 'bands'
    epsilon_bands: int = Field(4, ge=1)

    # physics
    x0: List[float] = Field(default_factory=lambda: [0.0, 0.0])
    g: List[float] = Field(default_factory=lambda: [0.0, 9.8])
    dt: float = Field(0.01, gt=0)
    n_steps: int = Field(100, ge=1)

    # dataset grid
    v0_min: float = 1.0
    v0_max: float = 100.0
    v0_step: float = Field(1.0, gt=0)
    phi_min: float = 0.0
    phi_max: float = 90.0
    phi_step: float = Field(1.0, gt=0)

    # evaluation
    eval_count: int = Field(500, ge=1)
    eval_samples_per_label: int = Field(1, ge=1)

    @field_validator('hidden_widths')
    @classmethod
    def _positive_widths(cls, v: List[int]) -> List[int]:
        if any(w < 1 for w in v):
            raise ValueError(f"hidden widths must be >= 1, got {v}")
        return v

    @field_validator('x0', 'g')
    @classmethod
    def _planar(cls, v: List[float]) -> List[float]:
        if len(v) != 2:
            raise ValueError(f"expected 2 components, got {len(v)}")
        return v

    @field_validator('epsilon_scale')
    @classmethod
    def _positive_scale(cls, v):
        if v != 'auto' and not v > 0:
            raise ValueError(f"epsilon_scale must be positive or 'auto', got {v}")
        return v

    @model_validator(mode='after')
    def _consistent(self) -> 'TrainConfig':
        if len(self.epsilon_starts) != len(self.epsilon_values):
            raise ValueError("epsilon_starts and epsilon_values must have the same length")
        if self.regime.physics_guided and self.total_epochs < self.pretrain_epochs:
            raise ValueError(
                f"total_epochs ({self.total_epochs}) must be >= pretrain_epochs "
                f"({self.pretrain_epochs}) for {self.regime.value}"
            )
        if not self.regime.physics_guided:
            return self
        if self.epsilon_mode == 'geometric':
            span = self.total_epochs - self.pretrain_epochs
            if self.epsilon_bands > 1 and self.epsilon_bands > span:
                raise ValueError(
                    f"epsilon_bands ({self.epsilon_bands}) exceeds the {span} guided epochs "
                    f"between pretrain_epochs and total_epochs"
                )
        elif self.epsilon_starts and self.epsilon_starts[0] > self.pretrain_epochs:
            raise ValueError(
                f"first epsilon band starts at {self.epsilon_starts[0]}, after pre-training "
                f"ends ({self.pretrain_epochs})"
            )
        return self

    def physics(self) -> PhysicsParams:
        return PhysicsParams(tuple(self.x0), tuple(self.g), self.dt, self.n_steps)

    def grid(self) -> Tuple[List[float], List[float]]:
        """(v0 values, phi values) of the pre-training grid."""
        return (
            grid_values(self.v0_min, self.v0_max, self.v0_step),
            grid_values(self.phi_min, self.phi_max, self.phi_step),
        )

    def schedule(self) -> EpsilonSchedule:
        """Unscaled epsilon bands."""
        if self.epsilon_mode == 'geometric':
            if not self.epsilon_values:
                raise ValueError("epsilon_values must not be empty")
            return EpsilonSchedule.geometric(
                self.pretrain_epochs, self.total_epochs,
                self.epsilon_values[0], self.epsilon_values[-1], self.epsilon_bands
            )
        return EpsilonSchedule.from_lists(self.epsilon_starts, self.epsilon_values)

    def pi_weight(self) -> PiWeight:
        return PiWeight(self.pi_lambda)

    def for_run(self, regime: Regime, seed: int) -> 'TrainConfig':
        """Copy of the training settings for one (regime, seed) cell."""
        data = self.model_dump(include=set(TrainConfig.model_fields))
        data.update(regime=regime, seed=seed)
        return TrainConfig.model_validate(data)
