#!/usr/bin/env python3
"""
ringwalk - classical and quantum random walks through series-coupled ring
resonators, plus directional coupler design

Usage: python main.py <subcommand> --config run.ini --out result.csv
"""
import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone
from typing import Optional

from commands import RunContext, run
from config.run_config import SUBCOMMANDS, config_digest, load_run_config, resolve_options
from config.settings import Settings
from database.db_manager import DatabaseManager
from utils.errors import ConfigError, RingWalkError
from utils.export import FORMATS, atomic_write, records_frame

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = [
    'id', 'subcommand', 'regime', 'status', 'exit_code', 'output_path',
    'output_format', 'config_digest', 'started_at', 'finished_at', 'summary',
]


def setup_logging(log_dir: str = "logs", level: int = logging.INFO):
    """Setup logging with console and file handlers; empty log_dir disables files"""
    from logging.handlers import RotatingFileHandler

    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    # Clear existing handlers
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    # Console handler (stderr, stdout stays free for history listings)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if not log_dir:
        return

    os.makedirs(log_dir, exist_ok=True)

    # File handler - all logs
    file_handler = RotatingFileHandler(
        os.path.join(log_dir, 'ringwalk.log'),
        maxBytes=10 * 1024 * 1024,  # 10 MB
        backupCount=5,
        encoding='utf-8'
    )
    file_handler.setLevel(level)
    file_handler.setFormatter(formatter)
    root_logger.addHandler(file_handler)

    # Error file handler - only errors
    error_handler = RotatingFileHandler(
        os.path.join(log_dir, 'ringwalk-errors.log'),
        maxBytes=10 * 1024 * 1024,  # 10 MB
        backupCount=5,
        encoding='utf-8'
    )
    error_handler.setLevel(logging.ERROR)
    error_handler.setFormatter(formatter)
    root_logger.addHandler(error_handler)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='ringwalk',
        description='Classical and quantum random walks in series-coupled ring resonators',
    )
    parser.add_argument('subcommand', nargs='?', choices=SUBCOMMANDS + ('history',),
                        help='defaults to [run] subcommand of the config')
    parser.add_argument('--config', help='INI run configuration')
    parser.add_argument('--out', help='output artifact path')
    parser.add_argument('--format', choices=FORMATS, help='overrides [run] format')
    parser.add_argument('--gnuplot', action='store_true', help='write grids as gnuplot nonuniform matrices')
    parser.add_argument('--threads', type=int, help='sweep worker threads (default RINGWALK_THREADS, else 1)')
    parser.add_argument('--pg', type=float, help='goal probability p_g')
    parser.add_argument('--nmax', type=int, help='maximum number of walk steps')
    parser.add_argument('--tol', type=float, help='steady-state tolerance')
    parser.add_argument('--samples', type=int, help='phase-average samples')
    parser.add_argument('--db', help='run archive (SQLite); defaults to RINGWALK_DB_PATH')
    parser.add_argument('--limit', type=int, default=20, help='history: number of runs to list')
    parser.add_argument('--log-dir', help='log directory; empty string disables log files')
    parser.add_argument('--verbose', action='store_true', help='debug logging')
    return parser


def _emit_error(error: Exception, exit_code: int) -> None:
    payload = {'error': type(error).__name__, 'message': str(error), 'exit_code': exit_code}
    sys.stderr.flush()
    print(json.dumps(payload), file=sys.stderr)


def _archive(db_path: Optional[str], run_data: dict) -> None:
    if not db_path:
        return
    try:
        db_manager = DatabaseManager(db_path)
        db_manager.init_db()
        db_manager.record_run(run_data)
    except Exception as e:
        logger.warning(f"Run not archived: {e}")


def _history(args, db_path: Optional[str]) -> int:
    if not db_path:
        raise ConfigError("history needs --db or RINGWALK_DB_PATH")
    db_manager = DatabaseManager(db_path)
    db_manager.init_db()
    runs = db_manager.recent_runs(limit=args.limit)
    stats = db_manager.get_statistics()
    logger.info(f"Archive {db_path}: {stats['total']} run(s), {stats['ok']} ok, {stats['error']} failed")
    if args.format == 'json':
        text = json.dumps({'statistics': stats, 'runs': runs}, indent=2, sort_keys=True) + '\n'
    else:
        text = records_frame(runs, HISTORY_COLUMNS).to_csv(index=False, lineterminator='\n')
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    """Main application entry point; returns the process exit code"""
    args = build_parser().parse_args(argv)

    settings = Settings.load()
    log_dir = settings.LOG_DIR if args.log_dir is None else args.log_dir
    setup_logging(log_dir, logging.DEBUG if args.verbose else logging.INFO)
    db_path = args.db or settings.DB_PATH

    started_at = datetime.now(timezone.utc)
    run_data = {'subcommand': args.subcommand or 'unknown', 'output_path': args.out, 'started_at': started_at}

    try:
        is_valid, errors = settings.validate()
        if not is_valid:
            raise ConfigError("invalid environment settings: " + '; '.join(errors))

        if args.subcommand == 'history':
            return _history(args, db_path)

        if not args.config:
            raise ConfigError("--config is required")
        config = load_run_config(args.config)
        if args.subcommand and args.subcommand != config.run.subcommand:
            raise ConfigError(
                f"subcommand {args.subcommand!r} does not match [run] subcommand {config.run.subcommand!r}"
            )
        if not args.out:
            raise ConfigError("--out is required")

        options = resolve_options(
            config,
            settings.get_numeric_defaults(),
            {
                'tol': args.tol,
                'n_max': args.nmax,
                'samples': args.samples,
                'p_g': args.pg,
                'threads': args.threads,
            },
        )
        fmt = args.format or config.run.format
        resolved = config.resolved(options)
        resolved['run']['format'] = fmt
        run_data.update(
            subcommand=config.run.subcommand,
            regime=None if config.coupler is not None else config.run.regime,
            config_digest=config_digest(resolved),
            resolved_config=json.dumps(resolved, sort_keys=True),
            output_format=fmt,
        )

        logger.info(f"Running {config.run.subcommand} ({args.config} -> {args.out})")
        summary = run(RunContext(
            config=config,
            options=options,
            resolved=resolved,
            out=args.out,
            fmt=fmt,
            gnuplot=args.gnuplot,
        ))
        logger.info(f"Finished {config.run.subcommand}: {json.dumps(summary, default=str)}")
        run_data.update(status='ok', exit_code=0, summary=json.dumps(summary, default=str))
        return 0

    except RingWalkError as e:
        logger.error(f"{type(e).__name__}: {e}")
        run_data.update(status='error', exit_code=e.exit_code, summary=json.dumps({'error': str(e)}))
        _emit_error(e, e.exit_code)
        return e.exit_code
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        run_data.update(status='error', exit_code=1, summary=json.dumps({'error': str(e)}))
        _emit_error(e, 1)
        return 1
    finally:
        if args.subcommand != 'history':
            run_data['finished_at'] = datetime.now(timezone.utc)
            _archive(db_path, run_data)


if __name__ == "__main__":
    sys.exit(main())
