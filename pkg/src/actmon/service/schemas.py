"""Request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class KnownClass(BaseModel):
    id: int
    name: str


class StateResponse(BaseModel):
    mode: str  # monitoring | adapting_monitor | adapting_model
    run_state: str  # paused | running | waiting_for_label | finished
    strategy: str
    known_classes: list[KnownClass]
    class_vocabulary: list[KnownClass]  # full original vocabulary
    queries_used: int
    budget: int
    cursor: int
    stream_length: int
    batch_index: int
    monitor_precision: float | None
    network_precision: float | None
    queue_length: int
    model_adaptations: int
    monitor_adaptations: int


class QueueEntryModel(BaseModel):
    query_id: int
    input_index: int
    width: int
    height: int
    channels: int
    pixels: list[float]  # row-major grid of [0,1] values
    predicted_class: int
    predicted_name: str
    confidence: float | None
    enqueued_at: int


class QueueResponse(BaseModel):
    entries: list[QueueEntryModel]


class LabelRequest(BaseModel):
    query_id: int
    class_id: int


class LabelResponse(BaseModel):
    status: str = "ok"
    queries_used: int


class ControlRequest(BaseModel):
    action: str = Field(pattern="^(pause|resume|step_batch)$")


class ControlResponse(BaseModel):
    status: str = "ok"
    run_state: str
