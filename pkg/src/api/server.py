"""
FastAPI server for the session checker
"""

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from .routes import router
from ..mpst.errors import MpstError
from ..mpst.reports import SCHEMAS
from ..config.settings import Settings
from ..utils.logger import get_logger

logger = get_logger(__name__)

VERSION = "0.1.0"

app = FastAPI(
    title="MPST Partial Checker",
    description="Partial typing and property checking for asynchronous multiparty sessions",
    version=VERSION
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

app.include_router(router)


@app.exception_handler(MpstError)
async def mpst_error_handler(request: Request, exc: MpstError):
    """Parse and resolution errors that escape a route are bad input"""
    logger.warning(f"{request.url.path}: {exc}")
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.get("/")
async def root():
    """Service description"""
    return {
        "service": "MPST Partial Checker",
        "version": VERSION,
        "api": router.prefix,
        "check_mode": Settings.get_check_mode().value,
        "schemas": sorted(SCHEMAS),
    }


@app.get("/health")
async def health():
    return {"status": "healthy"}


def main():
    import uvicorn
    logger.info(f"Serving {router.prefix} on {Settings.API_HOST}:{Settings.API_PORT}")
    uvicorn.run(
        "src.api.server:app" if Settings.API_DEBUG else app,
        host=Settings.API_HOST,
        port=Settings.API_PORT,
        reload=Settings.API_DEBUG
    )


if __name__ == "__main__":
    main()
