"""
Chart Generation Module

Creates the report figures as static SVG:
- Boxplot: residual distribution per regime (1.5 IQR whiskers, outlier dots)
- Convergence: generator loss, epsilon and true fraction against epoch
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import seaborn as sns  # noqa: E402

from src.training.config import REGIME_ORDER, Regime  # noqa: E402
from src.training.history import TrainHistory  # noqa: E402

from .statistics import boxplot_whiskers  # noqa: E402

logger = logging.getLogger(__name__)

# Fixed salt and no date so the same data gives the same bytes
SVG_SAVE_KWARGS = {'format': 'svg', 'metadata': {'Date': None}}

sns.set_style("whitegrid")
plt.rcParams['svg.hashsalt'] = 'pggan-report'
plt.rcParams['font.size'] = 10


class ChartGenerator:
    """Draw the report figures into one output directory."""

    def __init__(self, reports_dir: Union[str, Path]):
        """
        Initialize chart generator.

        Args:
            reports_dir: Directory to save charts
        """
        self.reports_dir = Path(reports_dir)
        self.reports_dir.mkdir(parents=True, exist_ok=True)

        self.colors = dict(zip(REGIME_ORDER, sns.color_palette("deep", len(REGIME_ORDER))))

    def _save(self, fig, name: str) -> Path:
        output_file = self.reports_dir / name
        fig.savefig(output_file, **SVG_SAVE_KWARGS)
        plt.close(fig)
        logger.info(f"💾 Chart saved to: {output_file}")
        return output_file

    def create_boxplot(self, residuals: Mapping[Regime, Sequence[float]]) -> Path:
        """
        Residual boxplot, one box per regime in report column order.

        Args:
            residuals: Pooled residuals per regime (all seeds)

        Returns:
            Path to boxplot.svg
        """
        finite: Dict[Regime, List[float]] = {}
        diverged: Dict[Regime, int] = {}
        for regime in REGIME_ORDER:
            values = [float(v) for v in residuals.get(regime, ())]
            finite[regime] = [v for v in values if math.isfinite(v)]
            diverged[regime] = len(values) - len(finite[regime])
            if diverged[regime]:
                logger.warning(f"⚠️  {regime.display_name}: {diverged[regime]} non-finite residuals left out of the boxplot")

        regimes = [r for r in REGIME_ORDER if finite[r]]
        if not regimes:
            raise ValueError("No finite residuals to plot")

        box_stats = []
        for regime in regimes:
            lower, q1, med, q3, upper, outliers = boxplot_whiskers(finite[regime])
            label = regime.display_name
            if diverged[regime]:
                label += f"\n({diverged[regime]} non-finite)"
            box_stats.append({
                'label': label,
                'whislo': lower,
                'q1': q1,
                'med': med,
                'q3': q3,
                'whishi': upper,
                'fliers': outliers,
            })

        fig, ax = plt.subplots(figsize=(2.0 + 1.6 * len(regimes), 5))
        artists = ax.bxp(box_stats, showfliers=True, patch_artist=True, widths=0.6)
        for patch, regime in zip(artists['boxes'], regimes):
            patch.set_facecolor(self.colors[regime])
            patch.set_alpha(0.7)
        for median in artists['medians']:
            median.set_color('black')

        ax.set_ylabel('Mean residual', fontweight='bold')
        ax.set_title('Residuals of generated trajectories', fontsize=14, fontweight='bold')
        ax.grid(axis='x', alpha=0)
        fig.tight_layout()
        return self._save(fig, "boxplot.svg")

    def create_convergence_chart(self, histories: Mapping[Tuple[Regime, int], TrainHistory]) -> Path:
        """
        Training progress of the physics-guided regimes.

        Three stacked panels share the epoch axis: generator loss,
        epsilon in force and the fraction of each batch judged true.
        One line per (regime, seed).

        Returns:
            Path to convergence.svg
        """
        runs: List[Tuple[Tuple[Regime, int], TrainHistory]] = sorted(
            ((key, h) for key, h in histories.items() if key[0].physics_guided and len(h) > 0),
            key=lambda item: (REGIME_ORDER.index(item[0][0]), item[0][1]),
        )
        if not runs:
            raise ValueError("No physics-guided histories to plot")

        fig, axes = plt.subplots(3, 1, figsize=(9, 9), sharex=True)
        styles: Dict[int, str] = {}
        for (regime, seed), history in runs:
            linestyle = styles.setdefault(seed, ['-', '--', ':', '-.'][len(styles) % 4])
            frame = history.to_frame()
            label = f"{regime.display_name} seed {seed}"
            color = self.colors[regime]
            axes[0].plot(frame['epoch'], frame['g_loss'], color=color, linestyle=linestyle, linewidth=1, label=label)
            axes[1].step(frame['epoch'], frame['epsilon'], where='post', color=color, linestyle=linestyle, linewidth=1)
            axes[2].plot(frame['epoch'], frame['r_frac'], color=color, linestyle=linestyle, linewidth=1)

        axes[0].set_ylabel('Generator loss', fontweight='bold')
        axes[1].set_ylabel('Epsilon', fontweight='bold')
        axes[1].set_yscale('log')
        axes[2].set_ylabel('Fraction judged true', fontweight='bold')
        axes[2].set_ylim(-0.02, 1.02)
        axes[2].set_xlabel('Epoch', fontweight='bold')
        axes[0].set_title('Convergence of physics-guided training', fontsize=14, fontweight='bold')
        axes[0].legend(fontsize=8, loc='best')
        fig.tight_layout()
        return self._save(fig, "convergence.svg")
