"""
Unit tests for the training grid, CSV persistence and normalization.
"""

import pytest
import sys
from pathlib import Path

import numpy as np

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.dataset.grid import build_dataset, export_csv, import_csv, sample_batch, sample_indices
from src.dataset.normalizer import STD_FLOOR, denormalize, fit_normalizer, normalize
from src.nn.rng import Rng
from src.physics.motion import Label, PhysicsParams, exact_trajectory, mean_residual


@pytest.fixture
def params():
    return PhysicsParams(n_steps=10)


@pytest.fixture
def small(params):
    return build_dataset([1.0, 2.0, 3.0], [0.0, 45.0, 90.0], params)


class TestBuildDataset:
    """Test grid construction."""

    def test_full_grid_size(self):
        """100 speeds x 91 angles = 9,100 records."""
        ds = build_dataset(range(1, 101), range(0, 91), PhysicsParams())
        assert len(ds) == 9100
        assert ds.trajectories.shape == (9100, 200)

    def test_two_by_two(self, params):
        """Records come out v0-major."""
        ds = build_dataset([1.0, 2.0], [0.0, 90.0], params)
        assert ds.labels.tolist() == [[1.0, 0.0], [1.0, 90.0], [2.0, 0.0], [2.0, 90.0]]

    def test_records_are_exact(self, small, params):
        """Every record has zero residual."""
        for i in range(len(small)):
            label, traj = small.record(i)
            assert mean_residual(traj, label, params) < 1e-12
        np.testing.assert_array_equal(
            small.trajectories[4], exact_trajectory(Label(2.0, 45.0), params).flat()
        )

    def test_duplicates_rejected(self, params):
        """Repeated grid values are named in the error."""
        with pytest.raises(ValueError, match="duplicate"):
            build_dataset([1.0, 1.0], [0.0], params)

    def test_empty_rejected(self, params):
        """An empty axis gives no dataset."""
        with pytest.raises(ValueError, match="empty"):
            build_dataset([], [0.0], params)


class TestSampling:
    """Test mini-batch sampling."""

    def test_without_replacement(self, small):
        """A full-size batch is a permutation of the records."""
        idx = sample_indices(small, len(small), Rng(1))
        assert sorted(idx.tolist()) == list(range(len(small)))

    def test_deterministic(self, small):
        """Same seed, same batch."""
        a = sample_batch(small, 4, Rng(8))
        b = sample_batch(small, 4, Rng(8))
        assert [l for l, _ in a] == [l for l, _ in b]

    def test_single_draws_are_uniform(self, params):
        """10,000 single draws over 10 records: every count within 5 sigma of 1,000."""
        ds = build_dataset([float(v) for v in range(1, 11)], [45.0], params)
        rng = Rng(42)
        counts = np.zeros(len(ds), dtype=int)
        for _ in range(10_000):
            counts[sample_indices(ds, 1, rng)[0]] += 1
        sigma = np.sqrt(10_000 * 0.1 * 0.9)
        assert counts.sum() == 10_000
        assert np.all(np.abs(counts - 1_000) < 5 * sigma), counts.tolist()

    def test_batch_too_large(self, small):
        """Cannot draw more records than exist."""
        with pytest.raises(ValueError, match="exceeds dataset size"):
            sample_batch(small, len(small) + 1, Rng(0))

    def test_batch_too_small(self, small):
        """Batch size must be positive."""
        with pytest.raises(ValueError):
            sample_indices(small, 0, Rng(0))


class TestCsv:
    """Test dataset CSV export and import."""

    def test_header_and_rows(self, small, tmp_path):
        """Header v0,phi,x1,y1,... and one row per record."""
        path = export_csv(small, tmp_path / "dataset.csv")
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines[0].startswith("v0,phi,x1,y1,x2,y2")
        assert lines[0].endswith("x10,y10")
        assert len(lines) == 1 + len(small)

    def test_import_is_bitwise(self, small, params, tmp_path):
        """Full precision survives the round trip."""
        path = export_csv(small, tmp_path / "dataset.csv")
        loaded = import_csv(path, params)
        np.testing.assert_array_equal(loaded.labels, small.labels)
        np.testing.assert_array_equal(loaded.trajectories, small.trajectories)

    def test_import_wrong_length(self, small, tmp_path):
        """A file for other physics is rejected."""
        path = export_csv(small, tmp_path / "dataset.csv")
        with pytest.raises(ValueError, match="columns"):
            import_csv(path, PhysicsParams(n_steps=5))

    def test_import_missing(self, params, tmp_path):
        """Missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            import_csv(tmp_path / "nope.csv", params)


class TestNormalizer:
    """Test per-dimension standardization."""

    def test_normalized_moments(self, small):
        """Normalized data has zero mean and unit std per coordinate."""
        norm = fit_normalizer(small)
        z = norm.normalize_trajectory(small.trajectories)
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(z.std(axis=0), 1.0, rtol=1e-12)

    def test_round_trip(self, small):
        """denormalize inverts normalize up to rounding."""
        norm = fit_normalizer(small)
        traj = small.trajectories[5]
        np.testing.assert_allclose(denormalize(normalize(traj, norm), norm), traj, rtol=1e-12, atol=1e-12)
        label = Label(2.0, 45.0)
        np.testing.assert_allclose(denormalize(normalize(label, norm), norm, 'label'), label.as_array())

    def test_std_floor(self, params):
        """A constant dimension gets std 1e-8 instead of zero."""
        ds = build_dataset([1.0, 2.0], [30.0], params)
        norm = fit_normalizer(ds)
        assert norm.label_std[1] == STD_FLOOR
        assert np.all(np.isfinite(norm.normalize_label(ds.labels)))

    def test_width_mismatch(self, small):
        """Inputs of the wrong width are rejected."""
        norm = fit_normalizer(small)
        with pytest.raises(ValueError, match="width"):
            norm.normalize_trajectory(np.zeros(7))


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
