from datetime import datetime

from sqlalchemy import Column, Integer, String, Text, Float, DateTime

from database.connection import Base


class DatasetRecord(Base):
    """A generated dataset split, identified by the digest of its JSONL bytes."""
    __tablename__ = "datasets"

    id = Column(Integer, primary_key=True)
    split = Column(String(50), nullable=False)
    preset = Column(String(100), index=True)
    seed = Column(String(20))  # seeds reach 2**64, beyond SQLite INTEGER
    scheme = Column(String(20), nullable=False)
    order = Column(String(20), nullable=False)
    base = Column(Integer, default=10)
    count = Column(Integer, nullable=False)
    digest = Column(String(64), nullable=False, index=True)
    manifest_json = Column(Text)
    created_at = Column(DateTime, default=datetime.utcnow)


class EvalRun(Base):
    """One scored prediction file; runs sharing a label are aggregated into a confidence interval."""
    __tablename__ = "eval_runs"

    id = Column(Integer, primary_key=True)
    label = Column(String(200), nullable=False, index=True)
    preset = Column(String(100))
    split = Column(String(50))
    seed = Column(String(20))
    scheme = Column(String(20))
    n = Column(Integer, nullable=False)
    accuracy = Column(Float, nullable=False)
    report_json = Column(Text)  # JSON: full EvalReport
    created_at = Column(DateTime, default=datetime.utcnow)
