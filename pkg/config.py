import os
from datetime import datetime

import psutil
from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text, create_engine
from sqlalchemy.orm import declarative_base, relationship, sessionmaker
from sqlalchemy.pool import StaticPool

Base = declarative_base()


def _env_flag(name: str, default: bool = False) -> bool:
    value = os.environ.get(name)
    if value is None:
        return default
    return value.strip().lower() in ('1', 'true', 'yes', 'on')


class Config:
    SQLALCHEMY_DATABASE_URI = os.environ.get('DATABASE_URL', 'sqlite:///ffincidence.db')
    SQLALCHEMY_TRACK_MODIFICATIONS = False
    SEED_BASE = int(os.environ.get('FFINCIDENCE_SEED', 0))
    WORKERS = int(os.environ.get('FFINCIDENCE_WORKERS', 0)) or psutil.cpu_count() or 1
    EIGEN_TOL = float(os.environ.get('FFINCIDENCE_EIGEN_TOL', 1e-8))
    STORE_RESULTS = _env_flag('FFINCIDENCE_STORE_RESULTS')
    VERBOSE = _env_flag('FFINCIDENCE_VERBOSE')


class ExperimentRun(Base):
    """
    One invocation of the experiment runner.

    Columns:
    - id (Integer): Primary key.
    - run_id (String): Deterministic hash of the canonical configuration; reruns share it.
    - command (String): verify, apps, spectrum or oracle.
    - target (String): Theorem or application name.
    - config (Text): Canonical configuration as JSON.
    - exit_code (Integer): 0 success, 1 hard-check failure.
    - row_count (Integer): Number of result rows.
    - created_at (DateTime): Timestamp of the run.

    Relationships:
    - results: One-to-many relationship with ResultRecord.
    """

    __tablename__ = 'experiment_runs'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(String(16), index=True, nullable=False)
    command = Column(String(16), nullable=False)
    target = Column(String(32))
    config = Column(Text, nullable=False)
    exit_code = Column(Integer, nullable=False)
    row_count = Column(Integer, default=0)
    created_at = Column(DateTime, default=datetime.now)

    results = relationship('ResultRecord', back_populates='run', cascade="all, delete-orphan",
                           order_by='ResultRecord.id')

    def as_dict(self):
        return {column.name: getattr(self, column.name) for column in self.__table__.columns}


class ResultRecord(Base):
    """
    One result row of a stored run; columns mirror the CSV schema.
    """

    __tablename__ = 'result_records'

    id = Column(Integer, primary_key=True, autoincrement=True)
    experiment_id = Column(Integer, ForeignKey('experiment_runs.id', ondelete='CASCADE'), nullable=False)
    run_id = Column(String(16), index=True, nullable=False)
    q = Column(Integer, nullable=False)
    d1 = Column(Integer, nullable=False)
    d2 = Column(Integer, nullable=False)
    theorem_id = Column(String(32), nullable=False)
    seed = Column(Integer, nullable=False)
    lhs = Column(Integer, nullable=False)
    main_term = Column(Float, nullable=False)
    bound_term = Column(Float, nullable=False)
    discrepancy = Column(Float, nullable=False)
    ratio = Column(Float, nullable=False)
    hypothesis_ok = Column(Boolean, nullable=False)
    elapsed_ms = Column(Float)

    run = relationship('ExperimentRun', back_populates='results')

    def as_dict(self):
        return {
            column.name: getattr(self, column.name)
            for column in self.__table__.columns
            if column.name not in ('id', 'experiment_id')
        }


def _make_engine(url: str):
    # In-memory sqlite must share one connection across sessions and threads.
    if url.startswith('sqlite') and ':memory:' in url:
        return create_engine(url, connect_args={'check_same_thread': False}, poolclass=StaticPool)
    return create_engine(url)


engine = _make_engine(Config.SQLALCHEMY_DATABASE_URI)
Session = sessionmaker(bind=engine)


def init_db():
    """Create the result tables if they do not exist."""
    Base.metadata.create_all(engine)
