"""HTTP service exposing the toolkit."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import PreconditioningError
from . import handlers
from . import schemas as s

app = FastAPI(title="preconditioning", version=__version__)


def status_for(exc: PreconditioningError) -> int:
    return 422 if exc.code in ("invalid-input", "schema", "wrong-outcome", "spec") else 400


@app.exception_handler(PreconditioningError)
async def _domain_error(request: Request, exc: PreconditioningError):
    return JSONResponse(status_code=status_for(exc), content=exc.to_dict())


@app.exception_handler(RequestValidationError)
async def _validation_error(request: Request, exc: RequestValidationError):
    details = {"errors": [{"loc": list(e["loc"]), "msg": e["msg"]} for e in exc.errors()]}
    return JSONResponse(status_code=422, content={"error": "invalid-input",
                                                  "message": "request validation failed",
                                                  "details": details})


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/simulate", response_model=s.SimulateResponse)
def simulate(req: s.SimulateRequest):
    return handlers.simulate(req)


@app.post("/screen", response_model=s.ScreenResponse)
def screen(req: s.ScreenRequest):
    return handlers.screen(req)


@app.post("/fit", response_model=s.FitResponse)
def fit(req: s.FitRequest):
    return handlers.fit(req)


@app.post("/path", response_model=s.PathResponse)
def path(req: s.PathRequest):
    return handlers.path(req)


@app.post("/experiment", response_model=s.ExperimentResponse)
def experiment(req: s.ExperimentRequest):
    return handlers.experiment(req)
