"""
Registry database base classes and utilities
"""
from contextlib import contextmanager
from typing import Iterator, Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

from slickqsvm.core.config import settings

# Create declarative base
Base = declarative_base()


def build_engine(url: Optional[str] = None) -> Engine:
    """Engine for the run registry; SQLite unless REGISTRY_URL says otherwise"""
    url = url or settings.REGISTRY_URL
    connect_args = {"check_same_thread": False} if url.startswith("sqlite") else {}
    return create_engine(url, echo=False, connect_args=connect_args)


def build_session_factory(engine: Engine) -> sessionmaker:
    return sessionmaker(bind=engine, expire_on_commit=False, autoflush=False)


def init_db(engine: Engine) -> None:
    """
    Create registry tables
    """
    # Import all models here to ensure they are registered
    from slickqsvm.db import models  # noqa
    Base.metadata.create_all(engine)


@contextmanager
def session_scope(factory: sessionmaker) -> Iterator[Session]:
    """
    Session that rolls back on error and is always closed
    """
    session = factory()
    try:
        yield session
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()
