"""
Ledger of generated datasets and evaluation runs.

Accuracies of runs stored under one label (for example five seeds of the same
experiment) feed the confidence interval in summarize_runs.
"""
import json

from sqlalchemy.orm import Session

from database.models import DatasetRecord, EvalRun
from library.evaluator import CISummary, EvalReport, confidence_interval
from library.taskgen import DatasetManifest


def record_dataset(manifest: DatasetManifest, db: Session) -> DatasetRecord:
    row = DatasetRecord(
        split=manifest.split,
        preset=manifest.preset,
        seed=str(manifest.config.seed),
        scheme=manifest.orthography.scheme.value,
        order=manifest.orthography.order.value,
        base=manifest.orthography.base,
        count=manifest.count,
        digest=manifest.digest,
        manifest_json=manifest.model_dump_json(),
    )
    db.add(row)
    db.commit()
    db.refresh(row)
    return row


def record_eval_run(
    label: str,
    report: EvalReport,
    db: Session,
    manifest: DatasetManifest | None = None,
) -> EvalRun:
    row = EvalRun(
        label=label,
        preset=manifest.preset if manifest else None,
        split=manifest.split if manifest else None,
        seed=str(manifest.config.seed) if manifest else None,
        scheme=manifest.orthography.scheme.value if manifest else None,
        n=report.n,
        accuracy=report.overall_accuracy,
        report_json=report.model_dump_json(),
    )
    db.add(row)
    db.commit()
    db.refresh(row)
    return row


def run_to_dict(row: EvalRun) -> dict:
    return {
        "id": row.id,
        "label": row.label,
        "preset": row.preset,
        "split": row.split,
        "seed": row.seed,
        "scheme": row.scheme,
        "n": row.n,
        "accuracy": row.accuracy,
        "created_at": row.created_at.isoformat() if row.created_at else None,
    }


def list_runs(db: Session, label: str | None = None) -> list[dict]:
    query = db.query(EvalRun)
    if label is not None:
        query = query.filter_by(label=label)
    return [run_to_dict(r) for r in query.order_by(EvalRun.id).all()]


def run_accuracies(label: str, db: Session) -> list[float]:
    rows = db.query(EvalRun).filter_by(label=label).order_by(EvalRun.id).all()
    return [r.accuracy for r in rows]


def load_report(row: EvalRun) -> EvalReport:
    return EvalReport.model_validate(json.loads(row.report_json))


def summarize_runs(label: str, db: Session) -> CISummary:
    """Mean and 95% half-width over every run recorded under label; needs at least two."""
    return confidence_interval(run_accuracies(label, db))
