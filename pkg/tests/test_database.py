import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from database.connection import Base
from database.models import DatasetRecord, EvalRun
from engines.orthography import OrthographySpec, Scheme
from library.evaluator import EvaluationError, evaluate
from library.runs import list_runs, load_report, record_dataset, record_eval_run, run_accuracies, summarize_runs
from library.taskgen import SamplingConfig, generate_dataset

TEN_E = OrthographySpec(scheme=Scheme.TEN_E_BASED)


def get_test_session():
    engine = create_engine("sqlite:///:memory:")
    Base.metadata.create_all(engine)
    Session = sessionmaker(bind=engine)
    return Session()


def small_manifest(seed=2**63 + 5):
    _, manifest = generate_dataset(SamplingConfig(max_digits=4, count=3, seed=seed), TEN_E, "test", preset="demo")
    return manifest


def test_create_tables():
    engine = create_engine("sqlite:///:memory:")
    Base.metadata.create_all(engine)
    table_names = list(Base.metadata.tables.keys())
    assert "datasets" in table_names
    assert "eval_runs" in table_names


def test_dataset_record_model():
    db = get_test_session()
    manifest = small_manifest()
    row = record_dataset(manifest, db)
    result = db.query(DatasetRecord).filter_by(digest=manifest.digest).first()
    assert result is not None
    assert result.id == row.id
    assert result.scheme == "10ebased"
    assert result.count == 3
    assert int(result.seed) == 2**63 + 5
    assert result.created_at is not None
    db.close()


def test_eval_run_model():
    db = get_test_session()
    report = evaluate(["5 10e0", "1 10e0"], ["5 10e0", "2 10e0"], [(1, 1), (1, 1)], TEN_E)
    row = record_eval_run("seeds", report, db, small_manifest())
    result = db.query(EvalRun).first()
    assert result.label == "seeds"
    assert result.accuracy == 0.5
    assert result.preset == "demo"
    assert load_report(row) == report
    db.close()


def test_runs_summary():
    db = get_test_session()
    for predictions in (["5 10e0"], ["4 10e0"], ["5 10e0"]):
        record_eval_run("triple", evaluate(predictions, ["5 10e0"], [(1, 1)], TEN_E), db)
    record_eval_run("other", evaluate(["5 10e0"], ["5 10e0"], [(1, 1)], TEN_E), db)

    assert run_accuracies("triple", db) == [1.0, 0.0, 1.0]
    assert len(list_runs(db)) == 4
    assert [r["label"] for r in list_runs(db, "other")] == ["other"]
    summary = summarize_runs("triple", db)
    assert summary.mean == pytest.approx(2 / 3)
    assert summary.half_width > 0
    db.close()


def test_summary_needs_two_runs():
    db = get_test_session()
    record_eval_run("single", evaluate(["5 10e0"], ["5 10e0"], [(1, 1)], TEN_E), db)
    with pytest.raises(EvaluationError):
        summarize_runs("single", db)
    db.close()
