"""
SQLAlchemy models for the run archive
"""
from datetime import datetime, timezone
from sqlalchemy import (
    Column, Integer, String, DateTime, Text, Index
)
from sqlalchemy.orm import declarative_base

Base = declarative_base()


class RunRecord(Base):
    """One CLI invocation: its resolved config, artifact and outcome"""

    __tablename__ = 'runs'

    # Primary key
    id = Column(Integer, primary_key=True, autoincrement=True)

    # What was run
    subcommand = Column(String, nullable=False)
    regime = Column(String, nullable=True)  # 'classical'/'quantum', None for coupler runs
    config_digest = Column(String, nullable=True)  # sha256 of resolved config JSON
    resolved_config = Column(Text, nullable=True)

    # Artifact
    output_path = Column(String, nullable=True)
    output_format = Column(String, nullable=True)  # 'csv'/'json'

    # Outcome
    status = Column(String, nullable=False, default='ok')  # 'ok'/'error'
    exit_code = Column(Integer, nullable=False, default=0)
    summary = Column(Text, nullable=True)  # JSON text

    # Timing
    started_at = Column(DateTime, nullable=False, default=lambda: datetime.now(timezone.utc))
    finished_at = Column(DateTime, nullable=True)

    __table_args__ = (
        Index('idx_run_subcommand', 'subcommand'),
        Index('idx_run_started_at', 'started_at'),
    )

    def to_dict(self) -> dict:
        return {
            'id': self.id,
            'subcommand': self.subcommand,
            'regime': self.regime,
            'config_digest': self.config_digest,
            'output_path': self.output_path,
            'output_format': self.output_format,
            'status': self.status,
            'exit_code': self.exit_code,
            'summary': self.summary,
            'started_at': self.started_at.isoformat() if self.started_at else None,
            'finished_at': self.finished_at.isoformat() if self.finished_at else None,
        }

    def __repr__(self):
        return f"<RunRecord(id={self.id}, subcommand={self.subcommand}, status={self.status})>"
