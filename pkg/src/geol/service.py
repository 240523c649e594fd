"""REST job service.

    POST   /tasks              task configuration JSON -> 202 {"job_id": ...}
    GET    /tasks/{id}         job record with the latest progress event
    GET    /tasks/{id}/links   N-Triples once the job is Done (404 before)
    DELETE /tasks/{id}         cancel a Pending or Running job

Jobs run on background threads against one shared cache store; the table
locks serialize jobs that touch the same resource. Job records live in
memory only. The ``output`` and ``cache_dir`` fields of submitted tasks are
ignored: links are kept in the service's own job directory.
"""

from __future__ import annotations

import logging
import shutil
import tempfile
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse

from geol.cache import CacheStore
from geol.config import TaskConfig, parse_config
from geol.engine import ProgressEvent, run
from geol.errors import ConfigError, JobCancelled

log = logging.getLogger(__name__)

NTRIPLES = "application/n-triples"


class JobState(str, Enum):
    PENDING = "Pending"
    RUNNING = "Running"
    FAILED = "Failed"
    DONE = "Done"


_NEXT = {
    JobState.PENDING: {JobState.RUNNING},
    JobState.RUNNING: {JobState.DONE, JobState.FAILED},
    JobState.DONE: set(),
    JobState.FAILED: set(),
}


@dataclass
class JobRecord:
    job_id: str
    config: TaskConfig
    state: JobState = JobState.PENDING
    latest_progress: ProgressEvent | None = None
    result: dict | None = None
    error: str | None = None
    links_path: Path | None = None
    cancel: threading.Event = field(default_factory=threading.Event)

    def advance(self, state: JobState) -> None:
        if state not in _NEXT[self.state]:
            raise RuntimeError(f"job {self.job_id}: illegal transition {self.state} -> {state}")
        self.state = state

    def as_dict(self) -> dict:
        ev = self.latest_progress
        return {
            "job_id": self.job_id,
            "state": self.state.value,
            "latest_progress": ev.as_dict() if ev is not None else None,
            "result": self.result,
            "error": self.error,
        }


class JobManager:
    def __init__(self, store: CacheStore, job_dir: Path, workers: int = 1):
        self.store = store
        self.job_dir = Path(job_dir)
        self.workers = workers
        self.jobs: dict[str, JobRecord] = {}
        self._lock = threading.Lock()
        self._threads: dict[str, threading.Thread] = {}

    def submit(self, config: TaskConfig) -> JobRecord | None:
        """Start a job; None if an identical task is already pending or running."""
        fp = config.fingerprint()
        with self._lock:
            for job in self.jobs.values():
                if job.state in (JobState.PENDING, JobState.RUNNING) \
                        and job.config.fingerprint() == fp:
                    return None
            job = JobRecord(uuid.uuid4().hex, config)
            self.jobs[job.job_id] = job
            t = threading.Thread(target=self._execute, args=(job,), name=f"geol-job-{job.job_id[:8]}",
                                 daemon=True)
            self._threads[job.job_id] = t
        t.start()
        return job

    def _execute(self, job: JobRecord) -> None:
        job.advance(JobState.RUNNING)
        path = self.job_dir / f"{job.job_id}.nt"

        def progress(ev):
            job.latest_progress = ev

        try:
            if job.cancel.is_set():
                raise JobCancelled("task cancelled")
            mapping = run(job.config.to_task(), progress, store=self.store, destination=path,
                          workers=self.workers, cancel=job.cancel)
        except JobCancelled:
            job.error = "cancelled"
            job.advance(JobState.FAILED)
        except Exception as exc:  # a job failure must not take the service down
            phase = getattr(exc, "phase", None)
            where = f" during {phase}" if phase else ""
            job.error = f"{type(exc).__name__}{where}: {exc}"
            log.warning("job %s failed: %s", job.job_id, job.error)
            job.advance(JobState.FAILED)
        else:
            job.links_path = path
            job.result = mapping.summary()
            job.advance(JobState.DONE)

    def wait(self, job_id: str, timeout: float | None = None) -> None:
        t = self._threads.get(job_id)
        if t is not None:
            t.join(timeout)


def create_app(cache_dir=None, *, client=None, store: CacheStore | None = None,
               job_dir=None, workers: int = 1) -> FastAPI:
    store = store or CacheStore(cache_dir, client=client)
    own_dir = job_dir is None
    job_dir = Path(job_dir or tempfile.mkdtemp(prefix="geol-jobs-"))
    job_dir.mkdir(parents=True, exist_ok=True)
    manager = JobManager(store, job_dir, workers)

    @asynccontextmanager
    async def lifespan(app):
        yield
        for job in manager.jobs.values():
            job.cancel.set()
        store.close()
        if own_dir:
            shutil.rmtree(job_dir, ignore_errors=True)

    app = FastAPI(title="geol", summary="Topological link discovery jobs", lifespan=lifespan)
    app.state.manager = manager

    def unknown(job_id):
        return JSONResponse({"error": f"unknown job {job_id}"}, status_code=404)

    @app.post("/tasks", status_code=202)
    async def submit(request: Request):
        body = await request.body()
        try:
            config = parse_config(body)
        except ConfigError as exc:
            return JSONResponse({"error": "invalid configuration", "problems": exc.problems},
                                status_code=400)
        job = manager.submit(config)
        if job is None:
            return JSONResponse({"error": "an identical task is already running"}, status_code=409)
        return {"job_id": job.job_id}

    @app.get("/tasks/{job_id}")
    def status(job_id: str):
        job = manager.jobs.get(job_id)
        if job is None:
            return unknown(job_id)
        return job.as_dict()

    @app.get("/tasks/{job_id}/links")
    def links(job_id: str):
        job = manager.jobs.get(job_id)
        if job is None:
            return unknown(job_id)
        if job.state is not JobState.DONE:
            return JSONResponse({"error": f"job is {job.state.value}"}, status_code=404)
        return FileResponse(job.links_path, media_type=NTRIPLES)

    @app.delete("/tasks/{job_id}", status_code=202)
    def cancel(job_id: str):
        job = manager.jobs.get(job_id)
        if job is None:
            return unknown(job_id)
        if job.state not in (JobState.PENDING, JobState.RUNNING):
            return JSONResponse({"error": f"job is already {job.state.value}"}, status_code=409)
        job.cancel.set()
        return {"job_id": job_id, "state": job.state.value}

    return app


def serve(host: str = "127.0.0.1", port: int = 8080, cache_dir=None) -> None:
    import uvicorn

    uvicorn.run(create_app(cache_dir), host=host, port=port)
