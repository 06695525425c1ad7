"""
Unit tests for the epsilon schedule.
"""

import pytest
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.gan.schedule import EpsilonSchedule, epsilon_schedule


class TestDefaultBands:
    """Test the four default bands."""

    @pytest.fixture
    def sched(self):
        return EpsilonSchedule.default()

    @pytest.mark.parametrize("epoch,expected", [
        (10_000, 5.0),
        (19_999, 5.0),
        (20_000, 2.5),
        (30_000, 1.25),
        (69_999, 1.25),
        (70_000, 0.625),
        (99_999, 0.625),
    ])
    def test_band_values(self, sched, epoch, expected):
        """Threshold in force at each band boundary."""
        assert epsilon_schedule(epoch, sched) == expected

    def test_before_first_band(self, sched):
        """Epochs before guided training have no threshold."""
        with pytest.raises(ValueError, match="precedes"):
            epsilon_schedule(9_999, sched)

    def test_target(self, sched):
        """Final threshold is 0.625."""
        assert sched.target == 0.625

    def test_non_increasing(self, sched):
        """Thresholds never increase with the epoch."""
        values = [epsilon_schedule(e, sched) for e in range(10_000, 100_000, 500)]
        assert all(a >= b for a, b in zip(values, values[1:]))


class TestScheduleConstruction:
    """Test validation and derived schedules."""

    def test_increasing_eps_rejected(self):
        """eps may not grow."""
        with pytest.raises(ValueError, match="must not increase"):
            EpsilonSchedule(((0, 1.0), (10, 2.0)))

    def test_unsorted_starts_rejected(self):
        """Band starts must strictly increase."""
        with pytest.raises(ValueError, match="strictly increase"):
            EpsilonSchedule(((10, 1.0), (10, 0.5)))

    def test_non_positive_rejected(self):
        """eps must be positive."""
        with pytest.raises(ValueError, match="positive"):
            EpsilonSchedule(((0, 0.0),))

    def test_mismatched_lists(self):
        """from_lists needs equal lengths."""
        with pytest.raises(ValueError):
            EpsilonSchedule.from_lists([0, 1], [1.0])

    def test_scaled(self):
        """Scaling multiplies every threshold, keeps the starts."""
        scaled = EpsilonSchedule.default().scaled(0.5)
        assert scaled.starts == (10_000, 20_000, 30_000, 70_000)
        assert scaled.values == (2.5, 1.25, 0.625, 0.3125)

    def test_geometric(self):
        """Geometric reduction hits both endpoints exactly."""
        sched = EpsilonSchedule.geometric(0, 300, 4.0, 1.0, 3)
        assert sched.starts == (0, 100, 200)
        assert sched.values[0] == 4.0
        assert sched.values[1] == pytest.approx(2.0)
        assert sched.values[2] == 1.0

    def test_geometric_single_band(self):
        """One band is just the target."""
        assert EpsilonSchedule.geometric(5, 5, 3.0, 1.0, 1).bands == ((5, 1.0),)

    def test_geometric_one_epoch_per_band(self):
        """As many bands as epochs is the densest valid schedule."""
        assert EpsilonSchedule.geometric(10, 14, 8.0, 1.0, 4).starts == (10, 11, 12, 13)

    @pytest.mark.parametrize("start,end,n_bands", [(10, 13, 4), (0, 0, 2), (100, 50, 3)])
    def test_geometric_too_many_bands(self, start, end, n_bands):
        """More bands than epochs is rejected up front, naming n_bands."""
        with pytest.raises(ValueError, match=rf"n_bands \({n_bands}\) exceeds"):
            EpsilonSchedule.geometric(start, end, 4.0, 1.0, n_bands)

    def test_geometric_no_bands(self):
        with pytest.raises(ValueError, match="n_bands must be >= 1"):
            EpsilonSchedule.geometric(0, 100, 4.0, 1.0, 0)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
