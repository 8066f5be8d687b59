"""HTTP service: FastAPI app, request/response schemas, background runs."""

from .app import create_app
from .runs import EvalRun, RunRegistry

__all__ = ["EvalRun", "RunRegistry", "create_app"]
