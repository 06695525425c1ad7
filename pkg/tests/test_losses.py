"""
Unit tests for adversarial losses, the residual partition and the physics penalty.
"""

import math
import pytest
import sys
from pathlib import Path

import numpy as np

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.dataset.normalizer import Normalizer
from src.gan.losses import (
    Partition,
    PiWeight,
    disc_loss_gan,
    disc_loss_pg,
    gen_loss_gan,
    gen_loss_pg,
    partition_by_residual,
    pi_penalty,
    pi_penalty_batch
)
from src.gan.schedule import EpsilonSchedule
from src.nn.rng import Rng
from src.physics.motion import Label, PhysicsParams, Trajectory, exact_trajectory
from src.physics.oracles import NewtonOracle


class TableOracle:
    """Black-box oracle returning preset residuals in call order."""

    def __init__(self, residuals):
        self.residuals = list(residuals)
        self.calls = 0

    def mean_residual(self, traj, label):
        value = self.residuals[self.calls]
        self.calls += 1
        return value


def _dummy(n):
    return [Trajectory(np.zeros((1, 2)))] * n, [Label(1.0, 0.0)] * n


class TestStandardLosses:
    """Test the plain GAN objectives."""

    def test_even_scores(self):
        """D = 0.5 everywhere gives 2 ln 2."""
        loss, _ = disc_loss_gan([0.5], [0.5])
        assert loss == pytest.approx(2 * math.log(2), rel=1e-12)

    def test_disc_gradients(self):
        """dL/dD matches finite differences."""
        real, fake = np.array([0.7, 0.4]), np.array([0.2, 0.9])
        _, (rg, fg) = disc_loss_gan(real, fake)
        h = 1e-7
        for i in range(2):
            up, down = real.copy(), real.copy()
            up[i] += h
            down[i] -= h
            numeric = (disc_loss_gan(up, fake)[0] - disc_loss_gan(down, fake)[0]) / (2 * h)
            assert rg[i] == pytest.approx(numeric, rel=1e-6)
            up, down = fake.copy(), fake.copy()
            up[i] += h
            down[i] -= h
            numeric = (disc_loss_gan(real, up)[0] - disc_loss_gan(real, down)[0]) / (2 * h)
            assert fg[i] == pytest.approx(numeric, rel=1e-6)

    def test_generator_minimizes_log_one_minus_d(self):
        """Saturating form is mean log(1 - D)."""
        loss, grad = gen_loss_gan([0.25, 0.75])
        assert loss == pytest.approx((math.log(0.75) + math.log(0.25)) / 2)
        assert grad.tolist() == pytest.approx([-1 / (2 * 0.75), -1 / (2 * 0.25)])

    def test_non_saturating(self):
        """Non-saturating form is -mean log D."""
        loss, _ = gen_loss_gan([0.5], non_saturating=True)
        assert loss == pytest.approx(math.log(2))

    def test_clamped_scores_stay_finite(self):
        """Scores of exactly 0 and 1 are clamped before the log."""
        loss, (rg, fg) = disc_loss_gan([0.0], [1.0])
        assert math.isfinite(loss)
        assert np.all(np.isfinite(rg)) and np.all(np.isfinite(fg))

    def test_empty_batch(self):
        """A standard loss needs scores."""
        with pytest.raises(ValueError):
            disc_loss_gan([], [0.5])


class TestPartition:
    """Test the residual threshold split."""

    def test_threshold_is_inclusive(self):
        """Residual equal to eps counts as true."""
        trajs, labels = _dummy(3)
        part = partition_by_residual(trajs, labels, 1.0, TableOracle([0.5, 1.0, 1.5]))
        assert part.real_like == (0, 1)
        assert part.fake_like == (2,)
        assert part.real_fraction == pytest.approx(2 / 3)

    def test_all_fake(self):
        """Everything above eps lands in the fake set."""
        trajs, labels = _dummy(2)
        part = partition_by_residual(trajs, labels, 0.1, TableOracle([5.0, 6.0]))
        assert part.real_like == ()
        assert part.fake_like == (0, 1)

    def test_invalid_eps(self):
        """eps must be positive."""
        trajs, labels = _dummy(1)
        with pytest.raises(ValueError, match="eps"):
            partition_by_residual(trajs, labels, 0.0, TableOracle([0.0]))

    def test_overlap_rejected(self):
        """An index cannot be both true and fake."""
        with pytest.raises(ValueError, match="overlap"):
            Partition((0, 1), (1,), 2)

    def test_cover_required(self):
        """Every sample must be assigned."""
        with pytest.raises(ValueError, match="cover"):
            Partition((0,), (), 2)

    def test_nested_across_schedule(self):
        """The true set only grows as eps grows, over 100 random batches."""
        params = PhysicsParams(n_steps=10)
        oracle = NewtonOracle(params).black_box()
        eps_values = sorted(EpsilonSchedule.default().values)
        rng = Rng(17)
        for _ in range(100):
            labels = [Label(float(rng.uniform(1, 100)), float(rng.uniform(0, 90))) for _ in range(16)]
            trajs = [
                Trajectory(exact_trajectory(l, params).points + rng.normal((10, 2)) * rng.uniform(0, 3))
                for l in labels
            ]
            previous = set()
            for eps in eps_values:
                real = set(partition_by_residual(trajs, labels, eps, oracle).real_like)
                assert previous <= real
                previous = real


class TestGuidedLosses:
    """Test losses against physics verdicts."""

    def test_matches_standard_loss_on_provenance(self):
        """A partition matching real/fake provenance reproduces disc_loss_gan."""
        rng = Rng(3)
        for _ in range(20):
            real = rng.uniform(0.01, 0.99, 5)
            fake = rng.uniform(0.01, 0.99, 7)
            part = Partition(tuple(range(5)), tuple(range(5, 12)), 12)
            pg, grads = disc_loss_pg(np.concatenate([real, fake]), part)
            gan, (rg, fg) = disc_loss_gan(real, fake)
            assert abs(pg - gan) < 1e-12
            np.testing.assert_allclose(grads, np.concatenate([rg, fg]), rtol=1e-12)

    def test_empty_real_set(self):
        """An empty true set contributes zero."""
        part = Partition((), (0, 1), 2)
        loss, grads = disc_loss_pg([0.5, 0.5], part)
        assert loss == pytest.approx(math.log(2))
        assert grads[0] == pytest.approx(1.0)

    def test_generator_ignores_real_like(self):
        """Real-like samples get neither loss nor gradient."""
        part = Partition((0,), (1,), 2)
        loss, grads = gen_loss_pg([0.9, 0.5], part)
        assert loss == pytest.approx(math.log(0.5))
        assert grads[0] == 0.0

    def test_generator_all_real(self):
        """No fake-like samples: loss and gradient are zero."""
        loss, grads = gen_loss_pg([0.3, 0.6], Partition((0, 1), (), 2))
        assert loss == 0.0
        assert np.all(grads == 0.0)

    def test_size_mismatch(self):
        """Scores and partition must describe one batch."""
        with pytest.raises(ValueError, match="covers 2 samples"):
            disc_loss_pg([0.5, 0.5, 0.5], Partition((0,), (1,), 2))


def _numeric_gradient(loss_fn, scores, h=1e-7):
    """Central differences of a scalar loss with respect to each score."""
    grad = np.zeros_like(scores)
    for i in range(scores.size):
        up, down = scores.copy(), scores.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (loss_fn(up) - loss_fn(down)) / (2 * h)
    return grad


class TestLossGradients:
    """Analytic loss gradients against central differences on random scores."""

    TRIALS = 20

    def _scores(self, rng, n):
        return rng.uniform(0.05, 0.95, n)

    def _mixed_partition(self, rng, n):
        flags = rng.uniform(0.0, 1.0, n) < 0.5
        flags[0], flags[-1] = True, False
        real = tuple(int(i) for i in np.flatnonzero(flags))
        fake = tuple(int(i) for i in np.flatnonzero(~flags))
        return Partition(real, fake, n)

    @pytest.mark.parametrize("non_saturating", [False, True])
    def test_gen_loss_gan(self, non_saturating):
        rng = Rng(11)
        for _ in range(self.TRIALS):
            fake = self._scores(rng, 6)
            _, grad = gen_loss_gan(fake, non_saturating=non_saturating)
            numeric = _numeric_gradient(lambda s: gen_loss_gan(s, non_saturating=non_saturating)[0], fake)
            np.testing.assert_allclose(grad, numeric, rtol=1e-5, atol=1e-8)

    def test_disc_loss_gan_random(self):
        rng = Rng(12)
        for _ in range(self.TRIALS):
            real, fake = self._scores(rng, 4), self._scores(rng, 5)
            _, (rg, fg) = disc_loss_gan(real, fake)
            np.testing.assert_allclose(rg, _numeric_gradient(lambda s: disc_loss_gan(s, fake)[0], real), rtol=1e-5, atol=1e-8)
            np.testing.assert_allclose(fg, _numeric_gradient(lambda s: disc_loss_gan(real, s)[0], fake), rtol=1e-5, atol=1e-8)

    def test_disc_loss_pg(self):
        """Mixed partitions: every slot carries a gradient."""
        rng = Rng(13)
        for _ in range(self.TRIALS):
            scores = self._scores(rng, 8)
            part = self._mixed_partition(rng, 8)
            _, grad = disc_loss_pg(scores, part)
            numeric = _numeric_gradient(lambda s: disc_loss_pg(s, part)[0], scores)
            np.testing.assert_allclose(grad, numeric, rtol=1e-5, atol=1e-8)

    @pytest.mark.parametrize("non_saturating", [False, True])
    def test_gen_loss_pg(self, non_saturating):
        """Only fake-like slots carry a gradient, and it matches central differences."""
        rng = Rng(14)
        for _ in range(self.TRIALS):
            scores = self._scores(rng, 8)
            part = self._mixed_partition(rng, 8)
            _, grad = gen_loss_pg(scores, part, non_saturating=non_saturating)
            numeric = _numeric_gradient(lambda s: gen_loss_pg(s, part, non_saturating=non_saturating)[0], scores)
            np.testing.assert_allclose(grad, numeric, rtol=1e-5, atol=1e-8)
            assert np.all(grad[list(part.real_like)] == 0.0)
            assert np.all(grad[list(part.fake_like)] != 0.0)


class TestPiPenalty:
    """Test lambda * r through denormalization."""

    @pytest.fixture
    def setup(self):
        params = PhysicsParams(n_steps=6)
        rng = Rng(5)
        width = params.flat_width
        norm = Normalizer(
            traj_mean=rng.normal(width),
            traj_std=rng.uniform(0.5, 3.0, width),
            label_mean=np.array([50.0, 45.0]),
            label_std=np.array([30.0, 26.0]),
        )
        return params, norm, NewtonOracle(params)

    def test_zero_weight(self, setup):
        """lambda = 0 gives exactly zero penalty and gradient."""
        params, norm, oracle = setup
        value, grad = pi_penalty(np.ones(params.flat_width), Label(3.0, 20.0), norm, PiWeight(0.0), oracle)
        assert value == 0.0
        assert np.all(grad == 0.0)

    def test_negative_weight(self):
        """lambda must be non-negative."""
        with pytest.raises(ValueError):
            PiWeight(-0.1)

    def test_value(self, setup):
        """Penalty is lambda times the residual of the denormalized output."""
        params, norm, oracle = setup
        label = Label(10.0, 30.0)
        exact = exact_trajectory(label, params).flat()
        x = norm.normalize_trajectory(exact + 1.0)
        value, _ = pi_penalty(x, label, norm, PiWeight(0.5), oracle)
        assert value == pytest.approx(0.5 * 2.0, rel=1e-9)

    def test_gradient_matches_finite_differences(self, setup):
        """50 random cases agree with central differences to 1e-5."""
        params, norm, oracle = setup
        rng = Rng(6)
        h = 1e-6
        for _ in range(50):
            label = Label(float(rng.uniform(1, 100)), float(rng.uniform(0, 90)))
            weight = PiWeight(float(rng.uniform(0.01, 2.0)))
            x = rng.normal(params.flat_width)
            _, analytic = pi_penalty(x, label, norm, weight, oracle)
            numeric = np.empty_like(x)
            for i in range(x.size):
                up, down = x.copy(), x.copy()
                up[i] += h
                down[i] -= h
                numeric[i] = (
                    pi_penalty(up, label, norm, weight, oracle)[0]
                    - pi_penalty(down, label, norm, weight, oracle)[0]
                ) / (2 * h)
            np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-6)

    def test_batch_is_mean(self, setup):
        """Batch penalty averages and divides gradients by B."""
        params, norm, oracle = setup
        rng = Rng(8)
        x = rng.normal((3, params.flat_width))
        labels = [Label(5.0, 10.0), Label(6.0, 20.0), Label(7.0, 30.0)]
        weight = PiWeight(0.1)
        total, grads = pi_penalty_batch(x, labels, norm, weight, oracle)
        singles = [pi_penalty(x[i], labels[i], norm, weight, oracle) for i in range(3)]
        assert total == pytest.approx(sum(v for v, _ in singles) / 3)
        np.testing.assert_allclose(grads[1], singles[1][1] / 3)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
