"""
Registry models using SQLAlchemy
"""
from sqlalchemy import Column, DateTime, Float, Index, Integer, String, Text
from sqlalchemy.sql import func

from slickqsvm.db.base import Base


class RecordedAtMixin:
    """Registry rows are append-only; one timestamp, set by the database on insert"""
    recorded_at = Column(DateTime(timezone=True), server_default=func.now(), nullable=False)


class ModelRecord(Base, RecordedAtMixin):
    """A trained model file and the run that produced it"""
    __tablename__ = "models"

    id = Column(Integer, primary_key=True, index=True)
    model_id = Column(String(64), index=True, nullable=False)
    backend = Column(String(32), nullable=False)
    path = Column(String(1024), nullable=False)
    manifest_path = Column(String(1024), nullable=True)
    seed = Column(Integer, nullable=False)
    n_learners = Column(Integer, nullable=False)
    subset_size = Column(Integer, nullable=False)
    train_seconds = Column(Float, nullable=True)

    __table_args__ = (
        Index('ix_models_backend_manifest', 'backend', 'manifest_path'),
    )

    def __repr__(self):
        return f"<ModelRecord(id={self.id}, model_id='{self.model_id}', backend='{self.backend}')>"


class RunRecord(Base, RecordedAtMixin):
    """Audit log of CLI invocations"""
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True)
    command = Column(String(32), nullable=False)  # e.g. 'train', 'predict', 'bench'
    status = Column(String(16), nullable=False)  # 'ok' or 'failed'
    backend = Column(String(32), nullable=True)
    model_id = Column(String(64), nullable=True)
    details = Column(Text, nullable=True)  # JSON string with the resolved config or the error
    duration_seconds = Column(Float, nullable=True)

    __table_args__ = (
        Index('ix_runs_command_status', 'command', 'status'),
        Index('ix_runs_recorded_at', 'recorded_at'),
    )

    def __repr__(self):
        return f"<RunRecord(id={self.id}, command='{self.command}', status='{self.status}')>"
