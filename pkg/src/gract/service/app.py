"""HTTP query service: loaded indexes live in memory, queries hit them.

Indexes are immutable once built or loaded, so query endpoints need no
locking; the registry itself is guarded for concurrent load/build calls.
The service trusts its host: build and load take server-side file paths.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from ..dataio import GridConfig, read_pings_csv, regularize
from ..errors import (FormatError, RangeError, UnknownObjectError,
                      ValidationError)
from ..geometry import CellRect
from ..index import IndexConfig, QueryOptions, QueryStats, TrajectoryIndex
from . import schemas as s


def _cell_out(cell):
    return None if cell is None else s.CellOut(x=cell[0], y=cell[1])


def _stats_out(stats: QueryStats) -> s.QueryStatsOut:
    return s.QueryStatsOut(symbols_processed=stats.symbols_processed,
                           rules_expanded=stats.rules_expanded)


def create_app(preload: dict[str, TrajectoryIndex] | None = None) -> FastAPI:
    app = FastAPI(title="gract", version="0.1.0",
                  description="Compressed spatio-temporal trajectory index")
    registry: dict[str, TrajectoryIndex] = dict(preload or {})
    lock = threading.Lock()

    def get_index(name: str) -> TrajectoryIndex:
        idx = registry.get(name)
        if idx is None:
            raise HTTPException(404, f"no index named {name!r}")
        return idx

    def info(name: str, idx: TrajectoryIndex) -> s.IndexInfo:
        return s.IndexInfo(name=name, mode=idx.mode, period=idx.period,
                           k=idx.k, vmax=idx.vmax,
                           num_objects=idx.num_objects,
                           num_instants=idx.num_instants,
                           grid_w=idx.grid_w, grid_h=idx.grid_h)

    @app.exception_handler(UnknownObjectError)
    async def _unknown_object(request, exc):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(RangeError)
    async def _range(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ValidationError)
    async def _validation(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(FormatError)
    async def _format(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/indexes", response_model=list[s.IndexInfo])
    def list_indexes():
        with lock:
            return [info(name, idx) for name, idx in sorted(registry.items())]

    @app.post("/indexes/load", response_model=s.IndexInfo)
    def load_index(req: s.LoadRequest):
        try:
            idx = TrajectoryIndex.load(req.path)
        except FileNotFoundError:
            raise HTTPException(404, f"no such file: {req.path}")
        with lock:
            registry[req.name] = idx
        return info(req.name, idx)

    @app.post("/indexes/build", response_model=s.IndexInfo)
    def build_index(req: s.BuildRequest):
        try:
            pings = read_pings_csv(req.input_path)
        except FileNotFoundError:
            raise HTTPException(404, f"no such file: {req.input_path}")
        dataset = regularize(pings, GridConfig(
            cell_size=req.cell_size, time_step=req.time_step,
            grid_w=req.grid_w, grid_h=req.grid_h))
        idx = TrajectoryIndex.build(dataset, IndexConfig(
            period=req.period, mode=req.mode, k=req.k))
        with lock:
            registry[req.name] = idx
        return info(req.name, idx)

    @app.get("/indexes/{name}/stats", response_model=s.StatsResponse)
    def index_stats(name: str):
        idx = get_index(name)
        rep = idx.stats_report()
        return s.StatsResponse(name=name, mode=rep.mode, period=rep.period,
                               header_bytes=rep.header_bytes,
                               dict_bytes=rep.dict_bytes,
                               snapshot_bytes=rep.snapshot_bytes,
                               log_bytes=rep.log_bytes,
                               grammar_bytes=rep.grammar_bytes,
                               total_bytes=rep.total_bytes,
                               plain_bytes=rep.plain_bytes,
                               ratio=rep.ratio)

    @app.post("/indexes/{name}/query/position", response_model=s.PositionResponse)
    def query_position(name: str, q: s.PositionQuery):
        idx = get_index(name)
        stats = QueryStats()
        cell = idx.position(q.object, q.t, QueryOptions(stats=stats))
        return s.PositionResponse(object=q.object, t=q.t,
                                  cell=_cell_out(cell), stats=_stats_out(stats))

    @app.post("/indexes/{name}/query/trajectory", response_model=s.TrajectoryResponse)
    def query_trajectory(name: str, q: s.TrajectoryQuery):
        idx = get_index(name)
        stats = QueryStats()
        points = idx.trajectory(q.object, q.ts, q.te, QueryOptions(stats=stats))
        return s.TrajectoryResponse(
            object=q.object,
            points=[s.TrajectoryPoint(t=t, cell=_cell_out(c)) for t, c in points],
            stats=_stats_out(stats))

    @app.post("/indexes/{name}/query/slice", response_model=s.SliceResponse)
    def query_slice(name: str, q: s.SliceQuery):
        idx = get_index(name)
        stats = QueryStats()
        rect = CellRect(q.rect.x1, q.rect.y1, q.rect.x2, q.rect.y2)
        results = idx.time_slice(rect, q.t, QueryOptions(stats=stats))
        return s.SliceResponse(
            t=q.t,
            results=[s.ObjectCell(object=o, cell=_cell_out(c))
                     for o, c in results],
            stats=_stats_out(stats))

    @app.post("/indexes/{name}/query/interval", response_model=s.IntervalResponse)
    def query_interval(name: str, q: s.IntervalQuery):
        idx = get_index(name)
        stats = QueryStats()
        rect = CellRect(q.rect.x1, q.rect.y1, q.rect.x2, q.rect.y2)
        objects = idx.time_interval(rect, q.ts, q.te, QueryOptions(stats=stats))
        return s.IntervalResponse(ts=q.ts, te=q.te, objects=objects,
                                  stats=_stats_out(stats))

    return app


app = create_app()
