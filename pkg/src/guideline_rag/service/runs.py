"""Background evaluation runs, polled by id.

Runs execute on daemon threads; finished reports are kept in memory and
mirrored to disk so a restarted service can still answer polls for
completed runs.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..evaluation.retrieval import QueryChunkPair, compute_retrieval_report
from ..io_utils import atomic_write_text
from ..pipeline import Engine


@dataclass
class EvalRun:
    run_id: str
    status: str  # pending | running | done | failed
    report: dict | None = None
    error: str | None = None
    created_at: float = field(default_factory=time.time)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "status": self.status,
            "report": self.report,
            "error": self.error,
        }


class RunRegistry:
    def __init__(self, runs_dir: str | Path | None = None):
        self.runs_dir = Path(runs_dir) if runs_dir else None
        self._runs: dict[str, EvalRun] = {}
        self._lock = threading.Lock()

    def start_retrieval(
        self,
        engine: Engine,
        pairs: list[QueryChunkPair],
        strategy: str,
        top_k: int,
    ) -> EvalRun:
        run = EvalRun(run_id=uuid.uuid4().hex[:12], status="pending")
        with self._lock:
            self._runs[run.run_id] = run

        def execute() -> None:
            with self._lock:
                run.status = "running"
            try:
                report = compute_retrieval_report(
                    pairs, lambda q: engine.search(q, strategy=strategy, top_k=top_k)
                )
                with self._lock:
                    run.report = report.to_dict()
                    run.status = "done"
            except Exception as exc:
                with self._lock:
                    run.error = f"{type(exc).__name__}: {exc}"
                    run.status = "failed"
            self._persist(run)

        threading.Thread(target=execute, daemon=True).start()
        return run

    def get(self, run_id: str) -> EvalRun | None:
        with self._lock:
            run = self._runs.get(run_id)
        if run is not None:
            return run
        return self._load(run_id)

    def _persist(self, run: EvalRun) -> None:
        if self.runs_dir is None:
            return
        self.runs_dir.mkdir(parents=True, exist_ok=True)
        atomic_write_text(
            self.runs_dir / f"{run.run_id}.json",
            json.dumps(run.to_dict(), ensure_ascii=False, indent=2) + "\n",
        )

    def _load(self, run_id: str) -> EvalRun | None:
        if self.runs_dir is None:
            return None
        path = self.runs_dir / f"{run_id}.json"
        if not path.exists():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return EvalRun(
            run_id=data["run_id"],
            status=data["status"],
            report=data.get("report"),
            error=data.get("error"),
        )
