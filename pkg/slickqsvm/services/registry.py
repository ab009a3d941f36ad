"""
Run registry service: audit log of CLI runs and lookup of trained models
"""
import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional

from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session

from slickqsvm.core.config import settings
from slickqsvm.core.exceptions import ValidationException
from slickqsvm.db.base import build_engine, build_session_factory, init_db, session_scope
from slickqsvm.db.models import ModelRecord, RunRecord
from slickqsvm.db.repositories import ModelRepository, RunRepository
from slickqsvm.models.domain import ModelFile

logger = logging.getLogger(__name__)


def _path_key(path) -> Optional[str]:
    return None if path is None else str(Path(path).resolve())


class RegistryService:
    """Registry operations over one session"""

    def __init__(self, session: Session):
        self.model_repo = ModelRepository(session)
        self.run_repo = RunRepository(session)

    def record_model(self, model: ModelFile, path, manifest_path=None,
                     train_seconds: float = None) -> ModelRecord:
        """Register a saved model file"""
        record = self.model_repo.register_model(
            model_id=model.model_id,
            backend=model.backend,
            path=_path_key(path),
            manifest_path=_path_key(manifest_path),
            seed=model.rng_seed,
            n_learners=model.n_learners,
            subset_size=model.subset_size,
            train_seconds=train_seconds,
        )
        logger.debug("Registered model %s at %s", record.model_id, record.path)
        return record

    def record_run(self, command: str, status: str, backend: str = None, model_id: str = None,
                   details: dict = None, duration_seconds: float = None) -> RunRecord:
        """Log a CLI run"""
        return self.run_repo.log_run(
            command=command,
            status=status,
            backend=backend,
            model_id=model_id,
            details=None if details is None else json.dumps(details, sort_keys=True, default=str),
            duration_seconds=duration_seconds,
        )

    def latest_model(self, backend: str, manifest_path=None) -> Optional[ModelRecord]:
        """Most recent model of `backend` trained on `manifest_path` whose file still exists"""
        record = self.model_repo.latest_for(backend, _path_key(manifest_path))
        if record is None or not Path(record.path).is_file():
            return None
        return record

    def recent_runs(self, limit: int = 20, command: str = None) -> List[RunRecord]:
        return self.run_repo.recent_runs(limit=limit, command=command)


class Registry:
    """
    Lazily opened registry. Write failures are logged and swallowed so they never change
    the outcome of a run.
    """

    def __init__(self, url: Optional[str] = None, enabled: Optional[bool] = None):
        self.url = url or settings.REGISTRY_URL
        self.enabled = settings.REGISTRY_ENABLED if enabled is None else enabled
        self._factory = None

    def _session_factory(self):
        if self._factory is None:
            engine = build_engine(self.url)
            init_db(engine)
            self._factory = build_session_factory(engine)
        return self._factory

    @contextmanager
    def service(self) -> Iterator[RegistryService]:
        with session_scope(self._session_factory()) as session:
            yield RegistryService(session)

    def record_run(self, command: str, status: str, **kwargs) -> None:
        if not self.enabled:
            return
        try:
            with self.service() as service:
                service.record_run(command, status, **kwargs)
        except SQLAlchemyError as exc:
            logger.warning("Registry unavailable, run not recorded: %s", exc)

    def record_model(self, model: ModelFile, path, manifest_path=None, train_seconds: float = None) -> None:
        if not self.enabled:
            return
        try:
            with self.service() as service:
                service.record_model(model, path, manifest_path, train_seconds)
        except SQLAlchemyError as exc:
            logger.warning("Registry unavailable, model %s not recorded: %s", model.model_id, exc)

    def latest_model_path(self, backend: str, manifest_path=None) -> Optional[str]:
        if not self.enabled:
            return None
        try:
            with self.service() as service:
                record = service.latest_model(backend, manifest_path)
                return None if record is None else record.path
        except SQLAlchemyError as exc:
            logger.warning("Registry unavailable, cannot look up a %s model: %s", backend, exc)
            return None

    def recent_runs(self, limit: int = 20, command: str = None) -> List[dict]:
        """Recent runs as plain dicts; unlike writes, read failures propagate"""
        if not self.enabled:
            raise ValidationException("The run registry is disabled")
        with self.service() as service:
            return [
                {
                    "id": run.id,
                    "recorded_at": run.recorded_at,
                    "command": run.command,
                    "status": run.status,
                    "backend": run.backend,
                    "model_id": run.model_id,
                    "duration_seconds": run.duration_seconds,
                }
                for run in service.recent_runs(limit=limit, command=command)
            ]
