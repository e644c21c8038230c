"""HTTP surface of the job service.

POST /jobs submits, GET /jobs/{id} polls, GET /healthz is liveness. The
endpoint only persists and enqueues; execution belongs to the worker loop,
keeping the trigger and the compute path separate.
"""
from __future__ import annotations

import threading
import time

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .errors import InvalidInputs, JobNotFound
from .jobs import JobKind, JobService


class SubmitRequest(BaseModel):
    kind: str
    inputs: dict
    idempotency_key: str | None = None


def create_app(service: JobService) -> FastAPI:
    app = FastAPI(title="subqa job service")

    @app.post("/jobs")
    def submit(req: SubmitRequest):
        try:
            kind = JobKind(req.kind)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"unknown kind {req.kind!r}")
        try:
            job = service.submit(kind, req.inputs, idempotency_key=req.idempotency_key)
        except InvalidInputs as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return job.to_json()

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        try:
            return service.get_job(job_id).to_json()
        except JobNotFound:
            raise HTTPException(status_code=404, detail=f"no job {job_id!r}")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    return app


def worker_loop(service: JobService, stop: threading.Event, poll_s: float = 0.2):
    """Drain-then-idle loop for a background worker thread."""
    service.queue.recover_inflight()
    while not stop.is_set():
        if service.worker_step() == 0:
            stop.wait(poll_s)


def serve(store_dir: str, port: int, workers: int = 1):
    """Run the HTTP service with background worker threads."""
    import uvicorn

    service = JobService(store_dir)
    stop = threading.Event()
    threads = [threading.Thread(target=worker_loop, args=(service, stop), daemon=True)
               for _ in range(max(0, workers))]
    for t in threads:
        t.start()
    try:
        uvicorn.run(create_app(service), host="127.0.0.1", port=port, log_level="warning")
    finally:
        stop.set()
        for t in threads:
            t.join(timeout=2)
