"""Steward review service: crosswalk runs, decision queue, feedback retraining.

A small JSON-over-HTTP app.  Each submitted source schema becomes a run whose
results wait as pending review items; stewards accept or override them, each
decision appends a ground-truth record to an NDJSON log, and an explicit
retrain rebuilds the feedback classifier from the full log so later runs
consult it.

Persistence is two append-only NDJSON journals under ``log_dir``:
``decisions.ndjson`` (one ground-truth record per line, annotated with its
item id) and ``events.ndjson`` (run submissions with their computed items,
and retrain markers).  Replaying both restores pending/accepted state, the
classifier, and its version; without a ``log_dir`` the service is ephemeral.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .crosswalk import (
    Classifier,
    ConflictingGroundTruth,
    Strategy,
    crosswalk_schema,
    strategy_from_payload,
    train_classifier,
)
from .embedding import EmbeddingModel
from .ingest import IngestError, schema_to_json, source_schema_from_payload
from .model import CrosswalkResult, GroundTruthRecord, StandardSchema

DECISIONS_FILE = "decisions.ndjson"
EVENTS_FILE = "events.ndjson"


class ServiceError(Exception):
    """Maps to a machine-readable error body {code, message, field?}."""

    def __init__(self, status: int, code: str, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.field = field


@dataclass
class ReviewItem:
    """One crosswalk result awaiting (or holding) a steward decision."""

    item_id: str
    run_id: str
    result: CrosswalkResult
    status: str = "pending"  # pending | accepted | overridden
    decided: Optional[GroundTruthRecord] = None


def _result_to_obj(r: CrosswalkResult) -> dict:
    return {
        "source_column": r.source_column,
        "matched_entry_id": r.matched_entry_id,
        "predicted_path": list(r.predicted_path),
        "score": r.score,
        "method": r.method,
        "confidence": r.confidence,
        "alternates": [[entry_id, score] for entry_id, score in r.alternates],
    }


def _result_from_obj(obj: dict) -> CrosswalkResult:
    return CrosswalkResult(
        source_column=obj["source_column"],
        matched_entry_id=obj["matched_entry_id"],
        predicted_path=tuple(obj["predicted_path"]),
        score=obj["score"],
        method=obj["method"],
        confidence=obj["confidence"],
        alternates=tuple((entry_id, score) for entry_id, score in obj["alternates"]),
    )


def record_to_obj(record: GroundTruthRecord) -> dict:
    return {
        "source_column": record.source_column,
        "dataset_id": record.dataset_id,
        "decided_entry_id": record.decided_entry_id,
        "decided_path": list(record.decided_path),
        "decision": record.decision,
        "engine_suggestion": record.engine_suggestion,
        "timestamp": record.timestamp,
    }


def record_from_obj(obj: dict) -> GroundTruthRecord:
    return GroundTruthRecord(
        source_column=obj["source_column"],
        dataset_id=obj["dataset_id"],
        decided_entry_id=obj["decided_entry_id"],
        decided_path=tuple(obj["decided_path"]),
        decision=obj["decision"],
        engine_suggestion=obj.get("engine_suggestion"),
        timestamp=obj.get("timestamp", 0),
    )


def _item_to_obj(item: ReviewItem) -> dict:
    return {
        "item_id": item.item_id,
        "run_id": item.run_id,
        "status": item.status,
        "result": _result_to_obj(item.result),
        "decided": record_to_obj(item.decided) if item.decided else None,
    }


def load_decision_log(path: str | Path) -> list[GroundTruthRecord]:
    """Parse a decisions journal back into records, in append order."""
    records = []
    text = Path(path).read_text(encoding="utf-8")
    for line in text.splitlines():
        if line.strip():
            records.append(record_from_obj(json.loads(line)))
    return records


class ReviewService:
    """All service state plus the journaled mutations, behind one lock."""

    def __init__(
        self,
        schema: StandardSchema,
        model: Optional[EmbeddingModel] = None,
        strategy: Strategy = Strategy(),
        log_dir: Optional[str | Path] = None,
        auto_accept: bool = False,
        clock: Callable[[], float] = time.time,
    ):
        if not schema.normalized:
            raise ValueError("service requires a refined standard schema")
        if strategy.mode in ("embedding", "hybrid") and model is None:
            raise ValueError(f"strategy mode {strategy.mode!r} requires an embedding model")
        self.schema = schema
        self.model = model
        self.strategy = strategy
        self.auto_accept = auto_accept
        self.clock = clock
        self.lock = threading.Lock()

        self.runs: dict[str, list[ReviewItem]] = {}
        self.run_datasets: dict[str, str] = {}
        self.items: dict[str, ReviewItem] = {}
        self.records: list[GroundTruthRecord] = []
        self.classifier: Optional[Classifier] = None
        self.version = 0
        self._run_counter = 0
        self._item_counter = 0

        self.decisions_path: Optional[Path] = None
        self.events_path: Optional[Path] = None
        if log_dir is not None:
            directory = Path(log_dir)
            directory.mkdir(parents=True, exist_ok=True)
            self.decisions_path = directory / DECISIONS_FILE
            self.events_path = directory / EVENTS_FILE
            self._replay()

    def _append(self, path: Optional[Path], obj: dict) -> None:
        if path is None:
            return
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")
            handle.flush()
            os.fsync(handle.fileno())

    def _replay(self) -> None:
        last_retrain: Optional[dict] = None
        if self.events_path and self.events_path.exists():
            for line in self.events_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                obj = json.loads(line)
                if obj["event"] == "run":
                    items = [
                        ReviewItem(
                            item_id=i["item_id"],
                            run_id=obj["run_id"],
                            result=_result_from_obj(i["result"]),
                        )
                        for i in obj["items"]
                    ]
                    self.runs[obj["run_id"]] = items
                    self.run_datasets[obj["run_id"]] = obj["dataset_id"]
                    for item in items:
                        self.items[item.item_id] = item
                    self._run_counter = max(self._run_counter, int(obj["run_id"][1:]))
                    for item in items:
                        self._item_counter = max(self._item_counter, int(item.item_id[1:]))
                elif obj["event"] == "retrain":
                    last_retrain = obj
        if self.decisions_path and self.decisions_path.exists():
            for line in self.decisions_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                obj = json.loads(line)
                record = record_from_obj(obj)
                self.records.append(record)
                item = self.items.get(obj.get("item_id", ""))
                if item is not None and item.status == "pending":
                    item.status = record.decision
                    item.decided = record
        if last_retrain is not None:
            # The log is append-only, so the records seen by that retrain are
            # exactly the first n_records of today's log.
            self.version = last_retrain["version"]
            prefix = self.records[: last_retrain["n_records"]]
            if prefix:
                self.classifier = train_classifier(prefix, self.schema)

    def submit(self, payload: dict) -> dict:
        try:
            source = source_schema_from_payload(payload.get("source"))
        except IngestError as exc:
            raise ServiceError(400, "invalid_payload", str(exc), field="source") from exc
        strategy = self.strategy
        if payload.get("strategy") is not None:
            try:
                strategy = strategy_from_payload(payload["strategy"])
            except ValueError as exc:
                raise ServiceError(400, "invalid_payload", str(exc), field="strategy") from exc
        if strategy.mode in ("embedding", "hybrid") and self.model is None:
            raise ServiceError(
                400, "invalid_strategy", f"mode {strategy.mode!r} needs a model loaded at service start",
                field="strategy",
            )
        with self.lock:
            results = crosswalk_schema(source, self.schema, model=self.model, clf=self.classifier, strategy=strategy)
            self._run_counter += 1
            run_id = f"r{self._run_counter:04d}"
            items = []
            for result in results:
                self._item_counter += 1
                items.append(ReviewItem(item_id=f"i{self._item_counter:06d}", run_id=run_id, result=result))
            self.runs[run_id] = items
            self.run_datasets[run_id] = source.dataset_id
            for item in items:
                self.items[item.item_id] = item
            self._append(
                self.events_path,
                {
                    "event": "run",
                    "run_id": run_id,
                    "dataset_id": source.dataset_id,
                    "items": [{"item_id": i.item_id, "result": _result_to_obj(i.result)} for i in items],
                },
            )
            if self.auto_accept:
                for item in items:
                    if item.result.confidence == "qualified":
                        self._decide_locked(item, "accepted", item.result.matched_entry_id)
        return {"run_id": run_id, "items": [_item_to_obj(i) for i in items]}

    def pending(self, run_id: str) -> list[dict]:
        with self.lock:
            if run_id not in self.runs:
                raise ServiceError(404, "not_found", f"unknown run {run_id!r}")
            waiting = [i for i in self.runs[run_id] if i.status == "pending"]
            waiting.sort(key=lambda i: (i.result.score, i.item_id))
            return [_item_to_obj(i) for i in waiting]

    def _decide_locked(self, item: ReviewItem, decision: str, entry_id: str) -> None:
        entry = self.schema.entry(entry_id)
        record = GroundTruthRecord(
            source_column=item.result.source_column,
            dataset_id=self.run_datasets[item.run_id],
            decided_entry_id=entry.id,
            decided_path=entry.path,
            decision=decision,
            engine_suggestion=item.result.matched_entry_id,
            timestamp=int(self.clock()),
        )
        self.records.append(record)
        line = record_to_obj(record)
        line["item_id"] = item.item_id
        self._append(self.decisions_path, line)
        item.status = decision
        item.decided = record

    def decide(self, item_id: str, body: dict) -> dict:
        action = body.get("action")
        if action not in ("accept", "override"):
            raise ServiceError(400, "invalid_decision", "action must be 'accept' or 'override'", field="action")
        with self.lock:
            item = self.items.get(item_id)
            if item is None:
                raise ServiceError(404, "not_found", f"unknown item {item_id!r}")
            if item.status != "pending":
                raise ServiceError(409, "already_decided", f"item {item_id} is {item.status}")
            if action == "accept":
                if item.result.matched_entry_id is None:
                    raise ServiceError(400, "invalid_decision", "cannot accept an unmatched item", field="action")
                self._decide_locked(item, "accepted", item.result.matched_entry_id)
            else:
                entry_id = body.get("entry_id")
                if not isinstance(entry_id, str) or not entry_id:
                    raise ServiceError(400, "invalid_decision", "override needs an 'entry_id'", field="entry_id")
                try:
                    self.schema.entry(entry_id)
                except KeyError:
                    raise ServiceError(400, "unknown_entry", f"no entry {entry_id!r} in schema", field="entry_id")
                self._decide_locked(item, "overridden", entry_id)
            return _item_to_obj(item)

    def retrain(self) -> dict:
        with self.lock:
            if not self.records:
                raise ServiceError(412, "empty_log", "no decisions recorded yet; decide at least one item first")
            try:
                classifier = train_classifier(self.records, self.schema)
            except ConflictingGroundTruth as exc:
                raise ServiceError(409, "conflicting_ground_truth", str(exc)) from exc
            self.classifier = classifier
            self.version += 1
            self._append(
                self.events_path,
                {"event": "retrain", "version": self.version, "n_records": len(self.records)},
            )
            return {"version": self.version, "n_records": len(self.records)}

    def schema_payload(self) -> dict:
        return json.loads(schema_to_json(self.schema))


async def _body(request: Request) -> dict:
    try:
        data = await request.json()
    except json.JSONDecodeError as exc:
        raise ServiceError(400, "invalid_json", f"request body is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ServiceError(400, "invalid_payload", "request body must be a JSON object")
    return data


def create_app(
    schema: StandardSchema,
    model: Optional[EmbeddingModel] = None,
    strategy: Strategy = Strategy(),
    log_dir: Optional[str | Path] = None,
    auto_accept: bool = False,
    clock: Callable[[], float] = time.time,
) -> FastAPI:
    """Build the HTTP app around one schema, one strategy, one decision log."""
    service = ReviewService(
        schema, model=model, strategy=strategy, log_dir=log_dir, auto_accept=auto_accept, clock=clock
    )
    app = FastAPI(title="metaharmon review service")
    # The review UI may be served from a different origin than the API.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.service = service

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError) -> JSONResponse:
        body = {"code": exc.code, "message": exc.message}
        if exc.field is not None:
            body["field"] = exc.field
        return JSONResponse(status_code=exc.status, content=body)

    @app.post("/runs")
    async def submit_run(request: Request) -> dict:
        return service.submit(await _body(request))

    @app.get("/runs/{run_id}/pending")
    async def list_pending(run_id: str) -> list[dict]:
        return service.pending(run_id)

    @app.post("/items/{item_id}/decision")
    async def decide(item_id: str, request: Request) -> dict:
        return service.decide(item_id, await _body(request))

    @app.post("/retrain")
    async def retrain() -> dict:
        return service.retrain()

    @app.get("/schema")
    async def get_schema() -> dict:
        return service.schema_payload()

    return app


def main(argv: Optional[list[str]] = None) -> int:
    """Run the service from the command line (development convenience)."""
    import argparse

    import uvicorn

    from .embedding import load_model
    from .ingest import load_standard_schema, refine_schema

    parser = argparse.ArgumentParser(prog="metaharmon-service", description=__doc__.splitlines()[0])
    parser.add_argument("--std", required=True, help="standard schema file (CSV or JSON)")
    parser.add_argument("--model", help="embedding model file")
    parser.add_argument("--mode", choices=("levenshtein", "embedding", "hybrid"), default="levenshtein")
    parser.add_argument("--threshold", type=int, default=70)
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--log-dir", help="journal directory; omit for an ephemeral service")
    parser.add_argument("--auto-accept", action="store_true")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args(argv)

    schema = load_standard_schema(args.std)
    if not schema.normalized:
        schema = refine_schema(schema)
    model = load_model(args.model) if args.model else None
    strategy = Strategy(mode=args.mode, threshold=min(100, max(0, args.threshold)), k=args.k)
    app = create_app(schema, model=model, strategy=strategy, log_dir=args.log_dir, auto_accept=args.auto_accept)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
