# services/src/api.py
"""
FastAPI REST API for the rci-secrecy calculator

Exposes the closed-form large-system results and small Monte Carlo
experiments as REST endpoints. Monte Carlo requests run in a worker thread
and are capped at SECRECY_API_MAX_TRIALS trials.

Endpoints:
    GET /              - Basic information
    GET /health        - Configuration check
    GET /large-system  - Optimal xi and secrecy sum-rate over an SNR grid
    GET /asymptotes    - High-SNR constants
    POST /sweep        - Scheme comparison sweep
    POST /ccdf         - CCDF of the alpha_LS penalty
    GET /docs          - Automatic API documentation

Dependencies:
    - fastapi
    - pydantic
    - uvicorn
"""

import asyncio
import logging
from typing import List, Optional

from fastapi import FastAPI, HTTPException, Query, status
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .experiments.experiment_config import ExperimentConfig, ExperimentError
from .experiments.monte_carlo import snr_to_rho
from .experiments.results import CcdfTable, SweepResult
from .experiments.sweeps import ccdf_alpha_penalty, scheme_comparison_sweep
from .initial_setup.env_config import config
from .initial_setup.logging_config import configure_logging
from .large_system.asymptotics import (
    AsymptoteReport,
    LargeSystemError,
    LargeSystemPoint,
    asymptote_report,
    large_system_table,
)

configure_logging()
logger = logging.getLogger(__name__)

app = FastAPI(
    title="RCI Secrecy API",
    description="Secrecy sum-rate of regularized channel inversion precoding",
    version=config.VERSION,
    docs_url="/docs",
    redoc_url="/redoc",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


class HealthResponse(BaseModel):
    status: str
    version: str


class LargeSystemResponse(BaseModel):
    K: int
    points: List[LargeSystemPoint]


class CcdfRequest(BaseModel):
    K: int = Field(..., ge=1, description="Number of users")
    M: Optional[int] = Field(default=None, ge=1, description="Number of antennas (defaults to K)")
    snr_db: float = Field(..., description="SNR in dB")
    trials: int = Field(default=100, ge=1)
    seed: int = Field(default=config.DEFAULT_MASTER_SEED, ge=0)
    thresholds: List[float] = Field(default_factory=lambda: [0.0, 0.01, 0.02, 0.05, 0.1])


def _check_trials(trials: int) -> None:
    if trials > config.API_MAX_TRIALS:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"trials={trials} exceeds the service limit of {config.API_MAX_TRIALS}",
        )


@app.get("/health", response_model=HealthResponse)
async def health_check():
    """
    Health check endpoint to verify the API is running and properly configured.
    """
    if not config.validate():
        logger.error("Health check failed: invalid configuration")
        raise HTTPException(
            status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
            detail="Service unhealthy: configuration validation failed",
        )
    return HealthResponse(status="healthy", version=config.VERSION)


@app.get("/")
async def root():
    """
    Root endpoint with basic information about the API.
    """
    return {
        "message": "RCI Secrecy API",
        "docs": "/docs",
        "health": "/health",
        "version": config.VERSION,
    }


@app.get("/large-system", response_model=LargeSystemResponse)
async def large_system_endpoint(
    K: int = Query(..., ge=1, description="Number of users"),
    snr_db: List[float] = Query(..., description="SNR grid in dB"),
):
    """Closed-form optimal regularization and secrecy sum-rate per SNR."""
    try:
        return LargeSystemResponse(K=K, points=large_system_table(snr_db, K))
    except LargeSystemError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))


@app.get("/asymptotes", response_model=AsymptoteReport)
async def asymptotes_endpoint():
    return asymptote_report()


@app.post("/sweep", response_model=SweepResult)
async def sweep_endpoint(request: ExperimentConfig):
    """
    Run a scheme comparison sweep. The request is a full ExperimentConfig.
    """
    _check_trials(request.trials)
    logger.info(f"Sweep request: K={request.K}, M={request.M}, schemes={[s.value for s in request.schemes]}")
    try:
        return await asyncio.to_thread(scheme_comparison_sweep, request)
    except ExperimentError as e:
        logger.error(f"Sweep failed: {e}")
        raise HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=str(e))


@app.post("/ccdf", response_model=CcdfTable)
async def ccdf_endpoint(request: CcdfRequest):
    """CCDF of the normalized rate loss of alpha_LS against alpha_FS(H)."""
    _check_trials(request.trials)
    logger.info(f"CCDF request: K={request.K}, snr={request.snr_db:g} dB, trials={request.trials}")
    try:
        return await asyncio.to_thread(
            ccdf_alpha_penalty,
            request.K,
            snr_to_rho(request.snr_db),
            request.trials,
            request.seed,
            request.thresholds,
            M=request.M,
        )
    except ExperimentError as e:
        logger.error(f"CCDF failed: {e}")
        raise HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=str(e))


@app.on_event("startup")
async def startup_event():
    """
    Perform startup validation.
    """
    logger.info("Starting RCI Secrecy API...")
    if not config.validate():
        raise ValueError("Configuration validation failed")
    logger.info(f"RCI Secrecy API {config.VERSION} started")


@app.on_event("shutdown")
async def shutdown_event():
    logger.info("Shutting down RCI Secrecy API...")


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "services.src.api:app", host=config.API_HOST, port=config.API_PORT, reload=True, log_level="info"
    )
