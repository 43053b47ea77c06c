"""HTTP interface to a live session.

Endpoints:
  GET  /state          session summary
  GET  /queue          pending labeling queries, FIFO
  POST /label          {query_id, class_id} -> routes the answer to the
                       blocked step; 404 unknown, 409 duplicate, 422 bad class
  POST /control        {action: pause|resume|step_batch}; 409 on invalid
                       transitions
  GET  /metrics/stream newline-delimited metric rows, byte-identical to the
                       metrics CSV rows

The service never mutates the session directly: labels go through the
interactive authority's queue and control actions only flip the runner's
flags.
"""

from __future__ import annotations

import logging
import time

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse

from .runner import (
    STATE_FINISHED,
    SUBMIT_DUPLICATE,
    SUBMIT_UNKNOWN,
    InteractiveAuthority,
    SessionRunner,
)
from .schemas import (
    ControlRequest,
    ControlResponse,
    KnownClass,
    LabelRequest,
    LabelResponse,
    QueueEntryModel,
    QueueResponse,
    StateResponse,
)

logger = logging.getLogger("actmon.service")


def create_app(runner: SessionRunner | None = None) -> FastAPI:
    app = FastAPI(title="actmon", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.runner = runner

    def need_runner() -> SessionRunner:
        if app.state.runner is None:
            raise HTTPException(status_code=503, detail="no session loaded")
        return app.state.runner

    @app.get("/state", response_model=StateResponse)
    def get_state():
        runner = need_runner()
        session = runner.session
        run_state = runner.run_state()
        if run_state != STATE_FINISHED and runner.waiting_for_label():
            run_state = "waiting_for_label"
        stats = session.stats
        queue_length = (
            len(runner.authority.queue())
            if isinstance(runner.authority, InteractiveAuthority)
            else 0
        )
        return StateResponse(
            mode=session.mode,
            run_state=run_state,
            strategy=session.strategy.name,
            known_classes=[
                KnownClass(id=c, name=session.class_name(c)) for c in session.vocabulary
            ],
            class_vocabulary=[
                KnownClass(id=i, name=name)
                for i, name in enumerate(session.class_names)
            ],
            queries_used=stats.queries_used,
            budget=stats.budget,
            cursor=session.cursor,
            stream_length=len(session.stream),
            batch_index=session.batch_index,
            monitor_precision=stats.monitor_cumulative.precision(),
            network_precision=session.s_network(),
            queue_length=queue_length,
            model_adaptations=stats.model_adaptations,
            monitor_adaptations=stats.monitor_adaptations,
        )

    @app.get("/queue", response_model=QueueResponse)
    def get_queue():
        runner = need_runner()
        if not isinstance(runner.authority, InteractiveAuthority):
            return QueueResponse(entries=[])
        entries = [
            QueueEntryModel(
                query_id=q.query_id,
                input_index=q.input_index,
                width=q.width,
                height=q.height,
                channels=q.channels,
                pixels=[float(v) for v in q.pixels],
                predicted_class=q.predicted_class,
                predicted_name=q.predicted_name,
                confidence=q.confidence,
                enqueued_at=q.enqueued_at,
            )
            for q in runner.authority.queue()
        ]
        return QueueResponse(entries=entries)

    @app.post("/label", response_model=LabelResponse)
    def post_label(body: LabelRequest):
        runner = need_runner()
        if not isinstance(runner.authority, InteractiveAuthority):
            raise HTTPException(status_code=409, detail="session uses the oracle authority")
        session = runner.session
        if not 0 <= body.class_id < len(session.class_names):
            raise HTTPException(
                status_code=422,
                detail=f"class_id {body.class_id} outside the vocabulary "
                f"[0, {len(session.class_names)})",
            )
        status = runner.authority.submit(body.query_id, body.class_id)
        if status == SUBMIT_UNKNOWN:
            raise HTTPException(status_code=404, detail=f"query {body.query_id} not pending")
        if status == SUBMIT_DUPLICATE:
            raise HTTPException(
                status_code=409, detail=f"query {body.query_id} already answered"
            )
        # the blocked step consumes the answer; wait for it to be absorbed so
        # queries_used in the response reflects this label
        deadline = time.monotonic() + 5.0
        while time.monotonic() < deadline:
            if body.query_id not in {q.query_id for q in runner.authority.queue()}:
                break
            time.sleep(0.005)
        return LabelResponse(queries_used=session.stats.queries_used)

    @app.post("/control", response_model=ControlResponse)
    def post_control(body: ControlRequest):
        runner = need_runner()
        before = runner.run_state()
        ok = {
            "pause": runner.pause,
            "resume": runner.resume,
            "step_batch": runner.step_batch,
        }[body.action]()
        if not ok:
            raise HTTPException(
                status_code=409,
                detail=f"cannot {body.action} from state {before!r}",
            )
        after = runner.run_state()
        # service log, not the replay-deterministic event log: control actions
        # are wall-clock operator input
        logger.info("control %s: %s -> %s", body.action, before, after)
        return ControlResponse(run_state=after)

    @app.get("/metrics/stream")
    def metrics_stream():
        runner = need_runner()
        session = runner.session

        def rows():
            sent = 0
            while True:
                current = session.metrics_rows
                while sent < len(current):
                    yield current[sent] + "\n"
                    sent += 1
                if runner.run_state() == STATE_FINISHED and sent == len(
                    session.metrics_rows
                ):
                    return
                time.sleep(0.05)

        return StreamingResponse(rows(), media_type="text/plain")

    return app
