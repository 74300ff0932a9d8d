"""
Database manager for the SQLite run archive
Handles initialization, table creation, and run bookkeeping
"""
import logging
import time
from typing import Optional
from sqlalchemy import create_engine, func, text
from sqlalchemy.orm import sessionmaker, Session
from sqlalchemy.exc import SQLAlchemyError, OperationalError
from database.models import Base, RunRecord

logger = logging.getLogger(__name__)

# SQLite error codes
SQLITE_BUSY = 5
SQLITE_LOCKED = 6


class DatabaseManager:
    """Manages the SQLite connection and run records"""

    def __init__(self, db_path: str = "ringwalk.db", timeout: float = 30.0):
        """
        Initialize database manager

        Args:
            db_path: Path to SQLite database file
            timeout: Timeout for database operations in seconds
        """
        self.db_path = db_path
        self.timeout = timeout
        self.engine = create_engine(
            f"sqlite:///{db_path}",
            echo=False,
            connect_args={
                "check_same_thread": False,
                "timeout": timeout,
            },
            pool_pre_ping=True
        )
        self.SessionLocal = sessionmaker(
            autocommit=False,
            autoflush=False,
            bind=self.engine
        )

        self._enable_wal_mode()

    def _enable_wal_mode(self):
        """Enable WAL (Write-Ahead Logging) mode so parallel runs can append"""
        try:
            with self.engine.connect() as conn:
                conn.execute(text("PRAGMA journal_mode=WAL"))
                conn.execute(text("PRAGMA synchronous=NORMAL"))
                conn.execute(text("PRAGMA busy_timeout=30000"))
                conn.commit()
            logger.debug("WAL mode enabled for SQLite")
        except Exception as e:
            logger.warning(f"Could not enable WAL mode: {e}")

    def init_db(self):
        """Create tables and indexes"""
        try:
            Base.metadata.create_all(bind=self.engine)
            logger.debug(f"Run archive initialized at {self.db_path}")
        except SQLAlchemyError as e:
            logger.error(f"Error initializing database: {e}")
            raise

    def _retry_on_lock(self, func, max_retries: int = 5, base_delay: float = 0.1):
        """
        Retry function with exponential backoff on SQLite lock errors

        Args:
            func: Function to execute
            max_retries: Maximum number of retry attempts
            base_delay: Base delay in seconds for exponential backoff

        Returns:
            Result of function execution
        """
        for attempt in range(max_retries):
            try:
                return func()
            except OperationalError as e:
                error_code = getattr(e.orig, 'sqlite_errno', None)
                if error_code not in (SQLITE_BUSY, SQLITE_LOCKED) or attempt == max_retries - 1:
                    raise
                delay = base_delay * (2 ** attempt)
                logger.warning(
                    f"SQLite lock error (attempt {attempt + 1}/{max_retries}), "
                    f"retrying in {delay:.2f}s: {e}"
                )
                time.sleep(delay)

    def get_session(self) -> Session:
        """Get a new database session"""
        return self.SessionLocal()

    def record_run(self, run_data: dict) -> Optional[int]:
        """
        Store one run with retry on locks

        Args:
            run_data: Dictionary with fields matching RunRecord

        Returns:
            ID of the new record, None if it could not be stored
        """
        def _save():
            session = self.get_session()
            try:
                record = RunRecord(**run_data)
                session.add(record)
                session.commit()
                logger.info(f"Run archived: {record.subcommand} #{record.id} ({record.status})")
                return record.id
            except SQLAlchemyError:
                session.rollback()
                raise
            finally:
                session.close()

        try:
            return self._retry_on_lock(_save)
        except SQLAlchemyError as e:
            logger.error(f"Error archiving run after retries: {e}")
            return None

    def recent_runs(self, limit: int = 20, subcommand: Optional[str] = None) -> list[dict]:
        """
        Most recent runs first

        Args:
            limit: Maximum number of runs to return
            subcommand: Only runs of this subcommand

        Returns:
            List of run dictionaries
        """
        session = self.get_session()
        try:
            query = session.query(RunRecord)
            if subcommand:
                query = query.filter(RunRecord.subcommand == subcommand)
            runs = query.order_by(RunRecord.started_at.desc(), RunRecord.id.desc()).limit(limit).all()
            return [run.to_dict() for run in runs]
        finally:
            session.close()

    def get_statistics(self) -> dict:
        """
        Get archive statistics

        Returns:
            Dictionary with totals by status and subcommand
        """
        session = self.get_session()
        try:
            total = session.query(RunRecord).count()
            ok = session.query(RunRecord).filter(RunRecord.status == 'ok').count()
            by_subcommand = dict(
                session.query(RunRecord.subcommand, func.count(RunRecord.id))
                .group_by(RunRecord.subcommand)
                .all()
            )
            return {
                'total': total,
                'ok': ok,
                'error': total - ok,
                'by_subcommand': by_subcommand,
            }
        finally:
            session.close()
