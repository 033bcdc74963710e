"""Request/response models for the query service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class CellOut(BaseModel):
    x: int
    y: int


class RectIn(BaseModel):
    x1: int
    y1: int
    x2: int
    y2: int


class QueryStatsOut(BaseModel):
    symbols_processed: int
    rules_expanded: int


class LoadRequest(BaseModel):
    name: str
    path: str


class BuildRequest(BaseModel):
    name: str
    input_path: str
    period: int = Field(ge=2)
    mode: str = "gract"
    k: int = 2
    cell_size: float = 50.0
    time_step: float = 60.0
    grid_w: int = 0
    grid_h: int = 0


class IndexInfo(BaseModel):
    name: str
    mode: str
    period: int
    k: int
    vmax: int
    num_objects: int
    num_instants: int
    grid_w: int
    grid_h: int


class PositionQuery(BaseModel):
    object: str
    t: int


class PositionResponse(BaseModel):
    object: str
    t: int
    cell: Optional[CellOut]
    stats: QueryStatsOut


class TrajectoryQuery(BaseModel):
    object: str
    ts: int
    te: int


class TrajectoryPoint(BaseModel):
    t: int
    cell: Optional[CellOut]


class TrajectoryResponse(BaseModel):
    object: str
    points: list[TrajectoryPoint]
    stats: QueryStatsOut


class SliceQuery(BaseModel):
    rect: RectIn
    t: int


class ObjectCell(BaseModel):
    object: str
    cell: CellOut


class SliceResponse(BaseModel):
    t: int
    results: list[ObjectCell]
    stats: QueryStatsOut


class IntervalQuery(BaseModel):
    rect: RectIn
    ts: int
    te: int


class IntervalResponse(BaseModel):
    ts: int
    te: int
    objects: list[str]
    stats: QueryStatsOut


class StatsResponse(BaseModel):
    name: str
    mode: str
    period: int
    header_bytes: int
    dict_bytes: int
    snapshot_bytes: int
    log_bytes: int
    grammar_bytes: int
    total_bytes: int
    plain_bytes: int
    ratio: float
