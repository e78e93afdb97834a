from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import ORJSONResponse
from core.config import settings
from core.errors import ShotFloorError, ShotFrugalError
from core.logging_setup import configure_logging
from apps.api.routers import experiments, hamiltonians
import logging

configure_logging()
logger = logging.getLogger(__name__)

app = FastAPI(title=settings.app_name, default_response_class=ORJSONResponse)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(hamiltonians.router, prefix="/hamiltonians", tags=["hamiltonians"])
app.include_router(experiments.router, prefix="/experiments", tags=["experiments"])


@app.exception_handler(ShotFloorError)
async def shot_floor_handler(request: Request, exc: ShotFloorError):
    logger.warning(f"{request.url.path}: {exc}")
    return ORJSONResponse(
        status_code=409,
        content={"detail": str(exc), "strategy": exc.strategy, "s_tot": exc.s_tot, "floor": exc.floor},
    )


@app.exception_handler(ShotFrugalError)
async def shot_frugal_handler(request: Request, exc: ShotFrugalError):
    logger.warning(f"{request.url.path}: {type(exc).__name__}: {exc}")
    return ORJSONResponse(status_code=422, content={"detail": str(exc), "error": type(exc).__name__})


@app.get("/")
def root():
    return {"name": settings.app_name, "env": settings.env}
