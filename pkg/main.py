from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from database.connection import Base, engine
from routers import codec, datasets, evaluate


@asynccontextmanager
async def lifespan(app: FastAPI):
    Base.metadata.create_all(engine)
    yield


app = FastAPI(
    title="Arithmetic Orthography API",
    description="Number orthographies, arithmetic datasets and exact-match evaluation",
    lifespan=lifespan,
)

# CORS - allow local dev frontends
app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:5173", "http://localhost:3000"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(codec.router)
app.include_router(datasets.router)
app.include_router(evaluate.router)


@app.get("/")
def root():
    return {"status": "ok", "app": "Arithmetic Orthography API", "version": "1.0.0"}
