"""
Repository pattern for registry operations
"""
from typing import List, Optional

from sqlalchemy import select
from sqlalchemy.orm import Session

from slickqsvm.core.exceptions import ValidationException
from slickqsvm.db.models import ModelRecord, RunRecord

RUN_STATUSES = ("ok", "failed")


class BaseRepository:
    """Base repository class with common operations"""

    def __init__(self, session: Session):
        self.session = session

    def create(self, model_instance):
        """Create a new record"""
        self.session.add(model_instance)
        self.session.commit()
        self.session.refresh(model_instance)
        return model_instance


class ModelRepository(BaseRepository):
    """Trained-model records"""

    def register_model(self, model_id: str, backend: str, path: str, seed: int, n_learners: int,
                       subset_size: int, manifest_path: str = None,
                       train_seconds: float = None) -> ModelRecord:
        """Record a model file written by a training run"""
        record = ModelRecord(
            model_id=model_id,
            backend=backend,
            path=path,
            manifest_path=manifest_path,
            seed=seed,
            n_learners=n_learners,
            subset_size=subset_size,
            train_seconds=train_seconds,
        )
        return self.create(record)

    def latest_for(self, backend: str, manifest_path: str = None) -> Optional[ModelRecord]:
        """Most recently registered model of a backend, optionally for one manifest"""
        query = select(ModelRecord).where(ModelRecord.backend == backend)
        if manifest_path is not None:
            query = query.where(ModelRecord.manifest_path == manifest_path)
        return self.session.execute(
            query.order_by(ModelRecord.recorded_at.desc(), ModelRecord.id.desc()).limit(1)
        ).scalar_one_or_none()


class RunRepository(BaseRepository):
    """CLI run audit log"""

    def log_run(self, command: str, status: str, backend: str = None, model_id: str = None,
                details: str = None, duration_seconds: float = None) -> RunRecord:
        """Log a run"""
        if status not in RUN_STATUSES:
            raise ValidationException(f"Run status must be one of {RUN_STATUSES}, got '{status}'")
        run = RunRecord(
            command=command,
            status=status,
            backend=backend,
            model_id=model_id,
            details=details,
            duration_seconds=duration_seconds,
        )
        return self.create(run)

    def recent_runs(self, limit: int = 20, command: str = None) -> List[RunRecord]:
        """Most recent runs first"""
        query = select(RunRecord)
        if command is not None:
            query = query.where(RunRecord.command == command)
        return self.session.execute(
            query.order_by(RunRecord.recorded_at.desc(), RunRecord.id.desc()).limit(limit)
        ).scalars().all()
