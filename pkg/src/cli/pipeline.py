"""
Pipeline stages behind the subcommands.

Each stage reads and writes the experiment directory layout:

    <out>/dataset.csv
    <out>/pretrain/seed_<n>/{checkpoint.npz, history.csv}
    <out>/<regime>/seed_<n>/{checkpoint.npz, history.csv, residuals.csv}
    <out>/report/...
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Tuple

from src.dataset.grid import export_csv
from src.reporting.report import build_report, run_dir
from src.storage.history_writer import HistoryWriter, write_residuals
from src.storage.schema import create_residual_records
from src.training.checkpoint import load_checkpoint, save_checkpoint
from src.training.config import Regime, TrainConfig
from src.training.evaluate import evaluate_checkpoint
from src.training.history import TrainHistory
from src.training.trainer import dataset_for, pretrain, train_regime

from .config import ExperimentConfig

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "checkpoint.npz"
HISTORY_FILE = "history.csv"
RESIDUALS_FILE = "residuals.csv"


def pretrain_dir(out_dir: Path, seed: int) -> Path:
    return Path(out_dir) / "pretrain" / f"seed_{seed}"


def gen_data(cfg: ExperimentConfig) -> Path:
    """Write the training grid to <out>/dataset.csv."""
    return export_csv(dataset_for(cfg), cfg.out_path / "dataset.csv")


def pretrain_seed(cfg: TrainConfig, out_dir: Path) -> Path:
    """Pre-train one seed and save its checkpoint and history."""
    target = pretrain_dir(out_dir, cfg.seed)
    history = TrainHistory()
    ckpt = pretrain(cfg, history=history)
    history.write(target / HISTORY_FILE)
    return save_checkpoint(ckpt, target / CHECKPOINT_FILE)


def train_cell(cfg: TrainConfig, out_dir: Path, resume: bool = True) -> Path:
    """
    Train one (regime, seed) cell.

    Resumes from the cell's own checkpoint when one exists (and resume is
    set), otherwise starts from the seed's pre-trained checkpoint. gan and
    pi_gan fall back to a fresh initialization without one.

    Returns:
        Path of the saved checkpoint
    """
    out_dir = Path(out_dir)
    target = run_dir(out_dir, cfg.regime, cfg.seed)
    own = target / CHECKPOINT_FILE
    shared = pretrain_dir(out_dir, cfg.seed) / CHECKPOINT_FILE

    resuming = resume and own.exists()
    if resuming:
        ckpt = load_checkpoint(own)
        logger.info(f"Resuming {cfg.regime.value} seed {cfg.seed} from epoch {ckpt.epoch}")
    elif shared.exists():
        ckpt = load_checkpoint(shared)
    elif cfg.regime.physics_guided:
        raise FileNotFoundError(
            f"{cfg.regime.value} needs a pre-trained checkpoint; run 'pretrain' first ({shared})"
        )
    else:
        ckpt = None

    final, history = train_regime(cfg, ckpt)
    writer = HistoryWriter(target / HISTORY_FILE, overwrite=not resuming)
    writer.append_batch(history.records)
    return save_checkpoint(final, own)


def evaluate_cell(cfg: TrainConfig, out_dir: Path) -> Path:
    """Evaluate one trained cell and write its residuals.csv."""
    target = run_dir(out_dir, cfg.regime, cfg.seed)
    ckpt = load_checkpoint(target / CHECKPOINT_FILE)
    labels, residuals = evaluate_checkpoint(cfg, ckpt)
    records = create_residual_records(
        [(lab.v0_mag, lab.phi_deg) for lab in labels], cfg.eval_samples_per_label, residuals
    )
    return write_residuals(target / RESIDUALS_FILE, records)


def _cell_task(task: Tuple[str, dict, str]) -> Tuple[str, int, int]:
    stage, cfg_data, out_dir = task
    cfg = TrainConfig.model_validate(cfg_data)
    if stage == "pretrain":
        pretrain_seed(cfg, Path(out_dir))
    else:
        train_cell(cfg, Path(out_dir), resume=False)
        evaluate_cell(cfg, Path(out_dir))
    return stage, cfg.regime.value, cfg.seed


def _run_tasks(tasks: List[Tuple[str, dict, str]], workers: int) -> None:
    if workers <= 1 or len(tasks) <= 1:
        for task in tasks:
            _cell_task(task)
        return
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        for stage, regime, seed in pool.map(_cell_task, tasks):
            logger.info(f"   ✅ {stage} {regime} seed {seed} done")


def compare(cfg: ExperimentConfig) -> Dict[str, Path]:
    """
    Full comparison: dataset, pre-training per seed, every regime x seed
    cell trained from its seed's pre-trained checkpoint and evaluated,
    then the report.

    Every cell is recomputed from scratch, so the output only depends on
    the configuration.
    """
    out_dir = cfg.out_path
    logger.info("=" * 70)
    logger.info(f"Comparison: {', '.join(r.display_name for r in cfg.regimes)} x seeds {cfg.seeds}")
    logger.info("=" * 70)

    gen_data(cfg)

    logger.info("🔁 Step 1: Pre-training")
    _run_tasks(
        [("pretrain", cfg.for_run(Regime.GAN, seed).model_dump(), str(out_dir)) for seed in cfg.seeds],
        cfg.workers,
    )

    logger.info("🔁 Step 2: Training and evaluating regimes")
    _run_tasks(
        [("cell", run_cfg.model_dump(), str(out_dir)) for run_cfg in cfg.run_configs()],
        cfg.workers,
    )

    logger.info("📊 Step 3: Report")
    written = build_report(out_dir, runs=cfg.run_keys())
    logger.info("✅ Comparison complete")
    return written
