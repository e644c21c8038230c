"""Headless job service: persistent store, durable queue, worker loop.

Desk-scale mirror of a queue-triggered cloud pipeline: submission (HTTP or
in-process) only persists a job and enqueues a message; a separate worker
drains the queue and executes. Queue and store are directory-backed with
atomic renames, so messages survive process restarts and a worker killed
mid-job leaves the message in flight for redelivery (at-least-once, capped
at MAX_DELIVERIES, after which the job fails as poison).
"""
from __future__ import annotations

import enum
import json
import os
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import InvalidInputs, JobNotFound

MAX_DELIVERIES = 3


class JobKind(enum.Enum):
    SEGMENT = "Segment"
    EVALUATE = "Evaluate"
    REVIEW = "Review"
    FULL_PIPELINE = "FullPipeline"


class JobState(enum.Enum):
    QUEUED = "Queued"
    RUNNING = "Running"
    SUCCEEDED = "Succeeded"
    FAILED = "Failed"

TERMINAL = {JobState.SUCCEEDED, JobState.FAILED}


@dataclass(frozen=True)
class Job:
    job_id: str
    kind: JobKind
    inputs: dict
    state: JobState = JobState.QUEUED
    submitted_at: float = 0.0
    started_at: float | None = None
    finished_at: float | None = None
    artifacts: dict = field(default_factory=dict)
    error: str | None = None

    def to_json(self) -> dict:
        return {"job_id": self.job_id, "kind": self.kind.value,
                "inputs": self.inputs, "state": self.state.value,
                "submitted_at": self.submitted_at, "started_at": self.started_at,
                "finished_at": self.finished_at, "artifacts": self.artifacts,
                "error": self.error}

    @classmethod
    def from_json(cls, doc: dict) -> "Job":
        return cls(job_id=doc["job_id"], kind=JobKind(doc["kind"]),
                   inputs=doc["inputs"], state=JobState(doc["state"]),
                   submitted_at=doc["submitted_at"], started_at=doc.get("started_at"),
                   finished_at=doc.get("finished_at"),
                   artifacts=doc.get("artifacts") or {}, error=doc.get("error"))


def _atomic_write(path: Path, data: bytes):
    tmp = path.with_suffix(path.suffix + f".tmp{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class JobStore:
    """Directory-backed job records with atomic state transitions."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.jobs_dir = self.root / "jobs"
        self.idem_dir = self.root / "idempotency"
        self.artifacts_dir = self.root / "artifacts"
        for d in (self.jobs_dir, self.idem_dir, self.artifacts_dir):
            d.mkdir(parents=True, exist_ok=True)

    def save(self, job: Job):
        _atomic_write(self.jobs_dir / f"{job.job_id}.json",
                      json.dumps(job.to_json(), sort_keys=True).encode("utf-8"))

    def get(self, job_id: str) -> Job:
        path = self.jobs_dir / f"{job_id}.json"
        if not path.exists():
            raise JobNotFound(f"no job {job_id!r}")
        return Job.from_json(json.loads(path.read_bytes()))

    def transition(self, job_id: str, state: JobState, **changes) -> Job:
        job = self.get(job_id)
        if job.state in TERMINAL:
            # exactly-once terminal transition: never overwrite a terminal state
            return job
        job = replace(job, state=state, **changes)
        self.save(job)
        return job

    def claim_idempotency(self, key: str, job_id: str) -> str:
        """Register key -> job_id; returns the already-registered id if any."""
        path = self.idem_dir / key
        try:
            with open(path, "x", encoding="utf-8") as fh:
                fh.write(job_id)
            return job_id
        except FileExistsError:
            return path.read_text("utf-8")


@dataclass(frozen=True)
class QueueMessage:
    job_id: str
    enqueued_at: float
    deliveries: int = 0


class FileQueue:
    """Durable at-least-once message queue on the filesystem.

    pending/ holds deliverable messages; claiming atomically renames the file
    into inflight/. Acking deletes it; a crash leaves it in inflight/ until
    recover_inflight() moves it back with an incremented delivery count.
    """

    def __init__(self, root: Path | str):
        self.pending = Path(root) / "queue" / "pending"
        self.inflight = Path(root) / "queue" / "inflight"
        self.pending.mkdir(parents=True, exist_ok=True)
        self.inflight.mkdir(parents=True, exist_ok=True)

    def enqueue(self, job_id: str):
        msg = QueueMessage(job_id=job_id, enqueued_at=time.time())
        name = f"{time.time_ns():020d}_{job_id}.json"
        _atomic_write(self.pending / name, json.dumps({
            "job_id": msg.job_id, "enqueued_at": msg.enqueued_at,
            "deliveries": msg.deliveries}).encode("utf-8"))

    def claim(self) -> tuple[Path, QueueMessage] | None:
        """Claim the oldest pending message (delivery count incremented)."""
        for name in sorted(os.listdir(self.pending)):
            src = self.pending / name
            dst = self.inflight / name
            try:
                os.rename(src, dst)
            except OSError:
                continue  # raced with another worker
            doc = json.loads(dst.read_bytes())
            doc["deliveries"] = doc.get("deliveries", 0) + 1
            _atomic_write(dst, json.dumps(doc).encode("utf-8"))
            return dst, QueueMessage(job_id=doc["job_id"],
                                     enqueued_at=doc["enqueued_at"],
                                     deliveries=doc["deliveries"])
        return None

    def ack(self, handle: Path):
        handle.unlink(missing_ok=True)

    def recover_inflight(self):
        """Return crashed-worker messages to pending for redelivery."""
        for name in sorted(os.listdir(self.inflight)):
            os.replace(self.inflight / name, self.pending / name)

    def pending_count(self) -> int:
        return len(os.listdir(self.pending))


def default_executors() -> dict:
    """Executors running the real pipeline; imported lazily to keep the queue
    machinery dependency-light."""
    from . import pipeline_executors

    return {
        JobKind.SEGMENT: pipeline_executors.run_segment,
        JobKind.EVALUATE: pipeline_executors.run_evaluate,
        JobKind.REVIEW: pipeline_executors.run_review,
        JobKind.FULL_PIPELINE: pipeline_executors.run_full_pipeline,
    }


class JobService:
    """Submission API plus the worker loop."""

    def __init__(self, root: Path | str, executors: dict | None = None,
                 max_deliveries: int = MAX_DELIVERIES):
        self.store = JobStore(root)
        self.queue = FileQueue(root)
        self.executors = executors if executors is not None else default_executors()
        self.max_deliveries = max_deliveries

    def submit(self, kind: JobKind, inputs: dict,
               idempotency_key: str | None = None) -> Job:
        """Persist a Queued job and enqueue it. Inputs that look like local
        paths must resolve now; an identical idempotency key returns the
        existing job without enqueueing again."""
        for name, value in inputs.items():
            if name.endswith(("_path", "path")) or name in (
                    "transcript", "reference", "srt", "manifest", "entities"):
                if not Path(value).exists():
                    raise InvalidInputs(f"input {name!r}: no such file {value!r}")
        job_id = uuid.uuid4().hex
        if idempotency_key:
            existing = self.store.claim_idempotency(idempotency_key, job_id)
            if existing != job_id:
                return self.store.get(existing)
        job = Job(job_id=job_id, kind=kind, inputs=dict(inputs),
                  submitted_at=time.time())
        self.store.save(job)
        self.queue.enqueue(job_id)
        return job

    def get_job(self, job_id: str) -> Job:
        return self.store.get(job_id)

    def worker_step(self) -> int:
        """Process at most one message; returns the number processed (0 or 1).

        Executor exceptions are not caught here as terminal failures until
        the delivery cap is hit: the message returns to pending so the job is
        retried, mirroring at-least-once delivery.
        """
        claimed = self.queue.claim()
        if claimed is None:
            return 0
        handle, msg = claimed
        try:
            job = self.store.get(msg.job_id)
        except JobNotFound:
            self.queue.ack(handle)
            return 0
        if job.state in TERMINAL:
            self.queue.ack(handle)
            return 0
        if msg.deliveries > self.max_deliveries:
            self.store.transition(job.job_id, JobState.FAILED,
                                  finished_at=time.time(),
                                  error=f"poison: exceeded {self.max_deliveries} deliveries")
            self.queue.ack(handle)
            return 1
        self.store.transition(job.job_id, JobState.RUNNING, started_at=time.time())
        executor = self.executors.get(job.kind)
        try:
            if executor is None:
                raise RuntimeError(f"no executor for kind {job.kind.value}")
            job_dir = self.store.artifacts_dir / job.job_id
            job_dir.mkdir(parents=True, exist_ok=True)
            artifacts = executor(job.inputs, job_dir)
        except Exception as exc:
            # return the message for redelivery; poison cap turns it terminal
            os.replace(handle, self.queue.pending / handle.name)
            if msg.deliveries >= self.max_deliveries:
                self.store.transition(job.job_id, JobState.FAILED,
                                      finished_at=time.time(),
                                      error=f"{type(exc).__name__}: {exc}")
                self.queue.ack(self.queue.pending / handle.name)
            return 1
        self.store.transition(job.job_id, JobState.SUCCEEDED,
                              finished_at=time.time(),
                              artifacts={k: str(v) for k, v in artifacts.items()})
        self.queue.ack(handle)
        return 1

    def drain(self, recover: bool = True) -> int:
        """Process messages until the queue is empty; returns count."""
        if recover:
            self.queue.recover_inflight()
        processed = 0
        while True:
            n = self.worker_step()
            if n == 0:
                break
            processed += n
        return processed
