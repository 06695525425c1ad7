#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Physics-guided GAN experiments

Subcommands:
    gen-data   Write the training grid as CSV
    pretrain   Pre-train the plain conditional GAN for every seed
    train      Train the selected regimes from the pre-trained checkpoints
    evaluate   Residuals of the trained generators on fresh labels
    report     Median / first quartile / IQR table and figures
    compare    All of the above for every regime x seed

Usage:
    python -m src.cli.main compare --desk-scale --seed 1
"""

import argparse
import logging
import sys
from datetime import date
from pathlib import Path
from typing import Any, Dict, List, Optional

# Add project root to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from src.cli.config import ConfigError, ExperimentConfig, parse_config  # noqa: E402
from src.cli.pipeline import compare, evaluate_cell, gen_data, pretrain_seed, train_cell  # noqa: E402
from src.reporting.report import build_report  # noqa: E402
from src.training.checkpoint import CheckpointFormatError  # noqa: E402
from src.training.config import Regime  # noqa: E402
from src.training.trainer import TrainingDivergedError  # noqa: E402

logger = logging.getLogger(__name__)

COMMANDS = ('gen-data', 'pretrain', 'train', 'evaluate', 'report', 'compare')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='pggan',
        description='Physics-guided GAN experiments on projectile trajectories',
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Config file (key = value lines, or .yaml)')
    common.add_argument('--seed', type=int, help='Run this seed only')
    common.add_argument('--regime', choices=[r.value for r in Regime], help='Run this regime only')
    common.add_argument('--out', help='Output directory (default: $PGGAN_OUT or ./runs)')
    common.add_argument('--desk-scale', action='store_true', default=None,
                        help='Small grid and epoch budget preset')
    common.add_argument('--epochs', type=int, help='Total epochs, pre-training included')
    common.add_argument('--lambda', dest='pi_lambda', type=float, help='Physics penalty weight')
    common.add_argument('--workers', type=int, help='Parallel (regime, seed) cells in compare')
    common.add_argument('--verbose', action='store_true', help='Per-epoch debug logging')

    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    helps = {
        'gen-data': 'write dataset.csv for the configured grid',
        'pretrain': 'pre-train the plain GAN per seed',
        'train': 'train regimes from the pre-trained checkpoints',
        'evaluate': 'write residuals.csv for trained runs',
        'report': 'emit table.csv, runs.json and figures',
        'compare': 'run every regime x seed end to end and report',
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def flags_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Config keys set on the command line."""
    flags: Dict[str, Any] = {}
    if args.seed is not None:
        flags['seed'] = args.seed
        flags['seeds'] = [args.seed]
    if args.regime is not None:
        flags['regime'] = args.regime
        flags['regimes'] = [args.regime]
    if args.out is not None:
        flags['out_dir'] = args.out
    if args.desk_scale:
        flags['desk_scale'] = True
    if args.epochs is not None:
        flags['total_epochs'] = args.epochs
    if args.pi_lambda is not None:
        flags['lambda'] = args.pi_lambda
    if args.workers is not None:
        flags['workers'] = args.workers
    return flags


def setup_logging(out_dir: Path, verbose: bool = False) -> Path:
    """Console plus monthly log file under <out_dir>/logs."""
    log_dir = Path(out_dir) / "logs"
    log_dir.mkdir(parents=True, exist_ok=True)
    log_file = log_dir / f"pggan_{date.today().strftime('%Y%m')}.log"
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file, encoding='utf-8'),
            logging.StreamHandler(sys.stdout)
        ],
        force=True,
    )
    return log_file


def run_command(command: str, cfg: ExperimentConfig) -> None:
    out_dir = cfg.out_path
    if command == 'gen-data':
        gen_data(cfg)
    elif command == 'pretrain':
        for seed in cfg.seeds:
            path = pretrain_seed(cfg.for_run(Regime.GAN, seed), out_dir)
            logger.info(f"   ✅ seed {seed}: {path}")
    elif command == 'train':
        for run_cfg in cfg.run_configs():
            path = train_cell(run_cfg, out_dir)
            logger.info(f"   ✅ {run_cfg.regime.value} seed {run_cfg.seed}: {path}")
    elif command == 'evaluate':
        for run_cfg in cfg.run_configs():
            path = evaluate_cell(run_cfg, out_dir)
            logger.info(f"   ✅ {run_cfg.regime.value} seed {run_cfg.seed}: {path}")
    elif command == 'report':
        build_report(out_dir, runs=cfg.run_keys())
    elif command == 'compare':
        compare(cfg)
    else:
        raise ValueError(f"Unknown command: {command}")


def cmd_dispatch(argv: Optional[List[str]] = None) -> int:
    """
    Parse argv, run the subcommand.

    Returns:
        0 on success, 1 on a failed run, 2 on a usage error
    """
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2

    try:
        cfg = parse_config(args.config, flags_from_args(args))
    except ConfigError as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return 1

    log_file = setup_logging(cfg.out_path, args.verbose)
    logger.info("=" * 70)
    logger.info(f"pggan {args.command}")
    logger.info("=" * 70)
    logger.info(f"Output: {cfg.out_path} | log: {log_file}")

    try:
        run_command(args.command, cfg)
    except (ValueError, OSError, TrainingDivergedError, CheckpointFormatError) as e:
        logger.error(f"❌ Error: {e}")
        return 1

    logger.info(f"✅ {args.command} complete")
    return 0


def main():
    """Main entry point."""
    sys.exit(cmd_dispatch())


if __name__ == '__main__':
    main()
