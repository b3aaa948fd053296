"""
Evaluation router - exact-match scoring, position-skip analysis and the run ledger.
"""
from fastapi import APIRouter, Depends, File, Form, HTTPException, UploadFile
from pydantic import BaseModel, Field, ValidationError
from sqlalchemy.orm import Session

from config import settings
from database.connection import get_db
from engines.orthography import Order, OrthographySpec
from library.evaluator import EvalReport, EvaluationError, analyze_position_skips, confidence_interval, evaluate
from library.runs import list_runs, record_eval_run, summarize_runs
from library.taskgen import DatasetFormatError, parse_predictions, parse_records

router = APIRouter(prefix="/api", tags=["evaluate"])


class DigitCounts(BaseModel):
    digits1: int = Field(ge=1)
    digits2: int = Field(ge=1)


class EvaluateRequest(BaseModel):
    predictions: list[str]
    golds: list[str]
    metadata: list[DigitCounts]
    orthography: OrthographySpec | None = None


class SkipRequest(BaseModel):
    tokens: str
    order: Order = Order.REGULAR


class CIRequest(BaseModel):
    run_accuracies: list[float]


class RecordRunRequest(BaseModel):
    label: str
    report: EvalReport


def _check_size(n: int):
    if n > settings.API_MAX_EXAMPLES:
        raise HTTPException(status_code=413, detail=f"at most {settings.API_MAX_EXAMPLES} examples per request")


@router.post("/evaluate")
def evaluate_predictions(req: EvaluateRequest):
    _check_size(len(req.predictions))
    try:
        report = evaluate(req.predictions, req.golds, req.metadata, req.orthography)
    except EvaluationError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return report.model_dump(mode="json")


@router.post("/evaluate/files")
async def evaluate_files(
    gold: UploadFile = File(...),
    predictions: UploadFile = File(...),
    scheme: str | None = Form(None),
    order: str = Form("regular"),
    base: int = Form(10),
):
    """Score an uploaded prediction file against an uploaded gold JSONL."""
    try:
        records = parse_records((await gold.read()).decode("utf-8"), gold.filename or "gold")
        preds = parse_predictions((await predictions.read()).decode("utf-8"), predictions.filename or "predictions")
        spec = OrthographySpec(scheme=scheme, order=order, base=base) if scheme else None
    except (DatasetFormatError, UnicodeDecodeError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except ValidationError as e:
        raise HTTPException(status_code=422, detail=str(e))
    _check_size(len(records))
    try:
        report = evaluate(preds, [r.answer for r in records], records, spec)
    except EvaluationError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return report.model_dump(mode="json")


@router.post("/skips")
def position_skips(req: SkipRequest):
    return analyze_position_skips(req.tokens, req.order).model_dump()


@router.post("/ci")
def compute_ci(req: CIRequest):
    try:
        summary = confidence_interval(req.run_accuracies)
    except EvaluationError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return {**summary.model_dump(), "low": summary.low, "high": summary.high}


@router.get("/runs")
def get_runs(label: str | None = None, db: Session = Depends(get_db)):
    return {"runs": list_runs(db, label)}


@router.post("/runs")
def post_run(req: RecordRunRequest, db: Session = Depends(get_db)):
    row = record_eval_run(req.label, req.report, db)
    return {"id": row.id, "label": row.label, "accuracy": row.accuracy}


@router.get("/runs/{label}/ci")
def get_run_ci(label: str, db: Session = Depends(get_db)):
    try:
        summary = summarize_runs(label, db)
    except EvaluationError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return {"label": label, **summary.model_dump(), "low": summary.low, "high": summary.high}
