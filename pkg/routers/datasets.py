"""
Dataset router - preset listing and in-memory dataset previews.
"""
from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from config import settings
from engines.orthography import OrthographySpec
from library.presets import PRESETS, get_preset
from library.taskgen import SamplingConfig, SamplingMethod, generate_dataset

router = APIRouter(prefix="/api", tags=["datasets"])


class PreviewRequest(BaseModel):
    preset: str | None = None
    split: str = "test"
    seed: int = Field(settings.DEFAULT_SEED, ge=0)
    sampling: SamplingConfig | None = None
    orthography: OrthographySpec | None = None
    limit: int = Field(20, ge=1)


@router.get("/presets")
def list_presets():
    return {
        "presets": [
            {
                "name": p.name,
                "description": p.description,
                "orthography": p.orthography.label,
                "splits": {s.name: s.count for s in p.splits},
                "epochs": p.epochs,
            }
            for p in PRESETS.values()
        ]
    }


@router.post("/datasets/preview")
def preview_dataset(req: PreviewRequest):
    """Generate up to API_MAX_EXAMPLES examples without writing anything to disk."""
    limit = min(req.limit, settings.API_MAX_EXAMPLES)
    try:
        if req.preset is not None:
            preset = get_preset(req.preset)
            cfg = preset.sampling_config(req.split, req.seed)
            spec = req.orthography or preset.orthography
        elif req.sampling is not None and req.orthography is not None:
            cfg, spec = req.sampling, req.orthography
        else:
            raise HTTPException(status_code=422, detail="give a preset, or both sampling and orthography")
        if cfg.total > limit:
            if cfg.method != SamplingMethod.EXHAUSTIVE:
                cfg = cfg.model_copy(update={"count": limit})
        if cfg.total > settings.API_MAX_EXAMPLES:
            raise HTTPException(status_code=400, detail=f"preview limited to {settings.API_MAX_EXAMPLES} examples")
        examples, manifest = generate_dataset(cfg, spec, req.split, req.preset)
    except KeyError as e:
        raise HTTPException(status_code=404, detail=str(e.args[0]))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return {
        "manifest": manifest.model_dump(mode="json"),
        "examples": [e.to_record() for e in examples[:limit]],
    }
