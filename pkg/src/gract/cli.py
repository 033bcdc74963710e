"""Command-line surface: build, query, inspect, generate, verify, bench, serve.

Exit codes: 0 success, 1 query-domain error (unknown object, bad instant,
bad query arguments), 2 usage error, 3 format or I/O error. Queries can run
against a local index file (--index) or be forwarded to a running service
(--server URL). GRACT_LOG controls log verbosity (DEBUG, INFO, ...).
"""

from __future__ import annotations

import json
import logging
import os
import random
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import click

from .dataio import (BehaviorMix, GridConfig, OracleStore, gen_synthetic,
                     read_pings_csv, regularize, write_pings_csv)
from .errors import (FormatError, RangeError, UnknownObjectError,
                     ValidationError)
from .geometry import CellRect
from .index import (MODE_GRACT, MODE_SCDC, IndexConfig, QueryOptions,
                    QueryStats, TrajectoryIndex)

log = logging.getLogger("gract")

EXIT_QUERY = 1
EXIT_FORMAT = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_index(path: str) -> TrajectoryIndex:
    try:
        return TrajectoryIndex.load(path)
    except FileNotFoundError:
        _fail(EXIT_FORMAT, f"no such file: {path}")
    except FormatError as exc:
        _fail(EXIT_FORMAT, str(exc))


def _parse_rect(raw: str) -> CellRect:
    try:
        x1, y1, x2, y2 = (int(v) for v in raw.split(","))
        return CellRect(x1, y1, x2, y2)
    except ValueError as exc:
        _fail(EXIT_QUERY, f"bad rectangle {raw!r}: {exc}")


@click.group()
def main():
    """Compressed spatio-temporal trajectory index."""
    level = os.environ.get("GRACT_LOG")
    if level:
        logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO))


@main.command()
@click.option("--objects", type=int, required=True)
@click.option("--instants", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--grid-w", type=int, default=4096, show_default=True)
@click.option("--grid-h", type=int, default=4096, show_default=True)
@click.option("--stationary", type=float, default=0.2, show_default=True)
@click.option("--straight", type=float, default=0.45, show_default=True)
@click.option("--walker", type=float, default=0.2, show_default=True)
@click.option("--gapped", type=float, default=0.15, show_default=True)
def gen(objects, instants, seed, out, grid_w, grid_h,
        stationary, straight, walker, gapped):
    """Generate a synthetic fleet and write it as ping CSV."""
    mix = BehaviorMix(stationary, straight, walker, gapped)
    ds = gen_synthetic(objects, instants, grid_w, grid_h, mix=mix, seed=seed)
    write_pings_csv(ds, out)
    click.echo(f"wrote {out}: {objects} objects x {instants} instants")


def _read_dataset(input_path, cell_size, time_step, grid_w, grid_h):
    try:
        pings = read_pings_csv(input_path)
    except FileNotFoundError:
        _fail(EXIT_FORMAT, f"no such file: {input_path}")
    except FormatError as exc:
        _fail(EXIT_FORMAT, str(exc))
    ds = regularize(pings, GridConfig(cell_size=cell_size, time_step=time_step,
                                      grid_w=grid_w, grid_h=grid_h))
    log.info("regularized %d pings: %d objects, %d instants, %d dropped",
             len(pings), len(ds.positions), ds.num_instants, ds.dropped)
    return ds


@main.command()
@click.option("--input", "input_path", type=click.Path(), required=True)
@click.option("--period", type=int, required=True)
@click.option("--mode", type=click.Choice([MODE_GRACT, MODE_SCDC]),
              default=MODE_GRACT, show_default=True)
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--cell-size", type=float, default=50.0, show_default=True)
@click.option("--time-step", type=float, default=60.0, show_default=True)
@click.option("--grid-w", type=int, default=0, help="0 = infer from data")
@click.option("--grid-h", type=int, default=0, help="0 = infer from data")
@click.option("--out", type=click.Path(), required=True)
def build(input_path, period, mode, k, cell_size, time_step, grid_w, grid_h, out):
    """Build an index from ping CSV and save it."""
    ds = _read_dataset(input_path, cell_size, time_step, grid_w, grid_h)
    try:
        idx = TrajectoryIndex.build(ds, IndexConfig(period=period, mode=mode, k=k))
    except ValidationError as exc:
        _fail(EXIT_QUERY, str(exc))
    idx.save(out)
    rep = idx.stats_report()
    click.echo(f"wrote {out}: mode={mode} period={period} "
               f"objects={idx.num_objects} instants={idx.num_instants} "
               f"bytes={rep.total_bytes} ratio={rep.ratio:.4f}")


@main.group()
def query():
    """Query a local index file or a running service."""


def _server_post(server, index_name, kind, payload):
    import httpx
    url = f"{server.rstrip('/')}/indexes/{index_name}/query/{kind}"
    resp = httpx.post(url, json=payload, timeout=60.0)
    if resp.status_code == 404:
        _fail(EXIT_QUERY, resp.json().get("detail", "not found"))
    if resp.status_code >= 400:
        _fail(EXIT_QUERY, f"server error {resp.status_code}: {resp.text}")
    return resp.json()


def _query_options():
    return QueryOptions(stats=QueryStats())


common_index_opts = [
    click.option("--index", "index_path", type=click.Path(),
                 help="local index file"),
    click.option("--server", help="base URL of a running service"),
    click.option("--name", default="default", show_default=True,
                 help="index name on the server"),
    click.option("--json", "as_json", is_flag=True,
                 help="one JSON object per output line"),
]


def _with_index_opts(fn):
    for opt in reversed(common_index_opts):
        fn = opt(fn)
    return fn


def _require_target(index_path, server):
    if server is None and index_path is None:
        raise click.UsageError("provide --index FILE or --server URL")


@query.command()
@_with_index_opts
@click.option("--object", "obj", required=True)
@click.option("--t", type=int, required=True)
def position(index_path, server, name, as_json, obj, t):
    """Position of an object at one instant; prints 'x y' or '-'."""
    _require_target(index_path, server)
    if server:
        data = _server_post(server, name, "position", {"object": obj, "t": t})
        cell = data["cell"]
        cell = (cell["x"], cell["y"]) if cell else None
    else:
        idx = _load_index(index_path)
        try:
            cell = idx.position(obj, t, _query_options())
        except (UnknownObjectError, RangeError) as exc:
            _fail(EXIT_QUERY, str(exc))
    if as_json:
        click.echo(json.dumps({"object": obj, "t": t,
                               "cell": list(cell) if cell else None}))
    else:
        click.echo(f"{cell[0]} {cell[1]}" if cell else "-")


@query.command()
@_with_index_opts
@click.option("--object", "obj", required=True)
@click.option("--ts", type=int, required=True)
@click.option("--te", type=int, required=True)
def trajectory(index_path, server, name, as_json, obj, ts, te):
    """Positions at every instant of [ts, te]; one 't x y' row per line."""
    _require_target(index_path, server)
    if server:
        data = _server_post(server, name, "trajectory",
                            {"object": obj, "ts": ts, "te": te})
        points = [(p["t"], (p["cell"]["x"], p["cell"]["y"]) if p["cell"] else None)
                  for p in data["points"]]
    else:
        idx = _load_index(index_path)
        try:
            points = idx.trajectory(obj, ts, te, _query_options())
        except (UnknownObjectError, RangeError) as exc:
            _fail(EXIT_QUERY, str(exc))
    for t, cell in points:
        if as_json:
            click.echo(json.dumps({"object": obj, "t": t,
                                   "cell": list(cell) if cell else None}))
        else:
            click.echo(f"{t} {cell[0]} {cell[1]}" if cell else f"{t} -")


@query.command(name="slice")
@_with_index_opts
@click.option("--rect", required=True, help="x1,y1,x2,y2 (inclusive)")
@click.option("--t", type=int, required=True)
def slice_cmd(index_path, server, name, as_json, rect, t):
    """Objects inside a rectangle at one instant; 'object x y' rows."""
    _require_target(index_path, server)
    r = _parse_rect(rect)
    if server:
        data = _server_post(server, name, "slice",
                            {"rect": {"x1": r.x1, "y1": r.y1,
                                      "x2": r.x2, "y2": r.y2}, "t": t})
        results = [(e["object"], (e["cell"]["x"], e["cell"]["y"]))
                   for e in data["results"]]
    else:
        idx = _load_index(index_path)
        try:
            results = idx.time_slice(r, t, _query_options())
        except RangeError as exc:
            _fail(EXIT_QUERY, str(exc))
    for obj, cell in results:
        if as_json:
            click.echo(json.dumps({"object": obj, "cell": list(cell)}))
        else:
            click.echo(f"{obj} {cell[0]} {cell[1]}")


@query.command()
@_with_index_opts
@click.option("--rect", required=True, help="x1,y1,x2,y2 (inclusive)")
@click.option("--ts", type=int, required=True)
@click.option("--te", type=int, required=True)
def interval(index_path, server, name, as_json, rect, ts, te):
    """Objects inside a rectangle at any instant of [ts, te]; one id per line."""
    _require_target(index_path, server)
    r = _parse_rect(rect)
    if server:
        data = _server_post(server, name, "interval",
                            {"rect": {"x1": r.x1, "y1": r.y1,
                                      "x2": r.x2, "y2": r.y2},
                             "ts": ts, "te": te})
        objects = data["objects"]
    else:
        idx = _load_index(index_path)
        try:
            objects = idx.time_interval(r, ts, te, _query_options())
        except RangeError as exc:
            _fail(EXIT_QUERY, str(exc))
    for obj in objects:
        click.echo(json.dumps({"object": obj}) if as_json else obj)


@main.command()
@click.option("--index", "index_path", type=click.Path(), required=True)
@click.option("--json", "as_json", is_flag=True)
def stats(index_path, as_json):
    """Size report of an index file."""
    idx = _load_index(index_path)
    rep = idx.stats_report()
    fields = {
        "mode": rep.mode, "period": rep.period,
        "header_bytes": rep.header_bytes, "dict_bytes": rep.dict_bytes,
        "snapshot_bytes": rep.snapshot_bytes, "log_bytes": rep.log_bytes,
        "grammar_bytes": rep.grammar_bytes, "total_bytes": rep.total_bytes,
        "plain_bytes": rep.plain_bytes, "ratio": round(rep.ratio, 6),
    }
    if as_json:
        click.echo(json.dumps(fields))
    else:
        for key, value in fields.items():
            click.echo(f"{key} {value}")


@main.command()
@click.option("--input", "input_path", type=click.Path(), required=True)
@click.option("--period", type=int, required=True)
@click.option("--queries", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mode", type=click.Choice([MODE_GRACT, MODE_SCDC, "both"]),
              default="both", show_default=True)
@click.option("--cell-size", type=float, default=50.0, show_default=True)
@click.option("--time-step", type=float, default=60.0, show_default=True)
def verify(input_path, period, queries, seed, mode, cell_size, time_step):
    """Build from CSV and check random queries against the exhaustive oracle."""
    ds = _read_dataset(input_path, cell_size, time_step, 0, 0)
    if ds.num_instants < 2 or not ds.positions:
        _fail(EXIT_QUERY, "dataset too small to verify")
    oracle = OracleStore(ds)
    rng = random.Random(seed)
    ids = ds.object_ids
    T = ds.num_instants
    gw, gh = ds.grid.grid_w, ds.grid.grid_h
    modes = [MODE_GRACT, MODE_SCDC] if mode == "both" else [mode]
    failed = 0
    for m in modes:
        idx = TrajectoryIndex.build(ds, IndexConfig(period=period, mode=m))
        counts = {"position": 0, "trajectory": 0, "slice": 0, "interval": 0}
        for _ in range(queries):
            o = rng.choice(ids)
            t = rng.randrange(T)
            if idx.position(o, t) == oracle.position(o, t):
                counts["position"] += 1
            ts = rng.randrange(T)
            te = min(T - 1, ts + rng.randrange(max(2, period)))
            if idx.trajectory(o, ts, te) == oracle.trajectory(o, ts, te):
                counts["trajectory"] += 1
            x1 = rng.randrange(gw)
            y1 = rng.randrange(gh)
            r = CellRect(x1, y1, min(gw - 1, x1 + rng.randrange(1, max(2, gw // 8))),
                         min(gh - 1, y1 + rng.randrange(1, max(2, gh // 8))))
            if idx.time_slice(r, t) == sorted(oracle.time_slice(r, t)):
                counts["slice"] += 1
            if idx.time_interval(r, ts, te) == sorted(oracle.time_interval(r, ts, te)):
                counts["interval"] += 1
        for kind in ("position", "trajectory", "slice", "interval"):
            ok = counts[kind]
            click.echo(f"{m} {kind}: {ok}/{queries} match")
            if ok != queries:
                failed += 1
    sys.exit(EXIT_QUERY if failed else 0)


def _parse_workload(raw: str) -> list[tuple[str, int]]:
    out = []
    for part in raw.split(","):
        kind, _, count = part.partition("=")
        kind = kind.strip()
        if kind not in ("position", "trajectory", "slice", "interval"):
            raise click.UsageError(f"unknown workload kind {kind!r}")
        out.append((kind, int(count or "100")))
    return out


@main.command()
@click.option("--index", "index_path", type=click.Path(), required=True)
@click.option("--workload", default="position=100,slice=100", show_default=True,
              help="comma list of kind=count")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def bench(index_path, workload, seed, threads, as_json):
    """Run a random query workload and report latency and work counters."""
    idx = _load_index(index_path)
    rng = random.Random(seed)
    T = idx.num_instants
    ids = idx.object_ids
    gw, gh = idx.grid_w, idx.grid_h

    def make_query(kind):
        o = rng.choice(ids)
        t = rng.randrange(T)
        ts = rng.randrange(T)
        te = min(T - 1, ts + rng.randrange(max(2, idx.period)))
        x1 = rng.randrange(gw)
        y1 = rng.randrange(gh)
        r = CellRect(x1, y1, min(gw - 1, x1 + max(1, gw // 16)),
                     min(gh - 1, y1 + max(1, gh // 16)))
        if kind == "position":
            return lambda opts: idx.position(o, t, opts)
        if kind == "trajectory":
            return lambda opts: idx.trajectory(o, ts, te, opts)
        if kind == "slice":
            return lambda opts: idx.time_slice(r, t, opts)
        return lambda opts: idx.time_interval(r, ts, te, opts)

    for kind, count in _parse_workload(workload):
        calls = [make_query(kind) for _ in range(count)]

        def run_one(call):
            stats_ = QueryStats()
            start = time.perf_counter()
            call(QueryOptions(stats=stats_))
            return time.perf_counter() - start, stats_

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outcomes = list(pool.map(run_one, calls))
        else:
            outcomes = [run_one(c) for c in calls]
        lat = [o[0] for o in outcomes]
        symbols = sum(o[1].symbols_processed for o in outcomes)
        rules = sum(o[1].rules_expanded for o in outcomes)
        row = {"kind": kind, "count": count,
               "mean_ms": round(statistics.mean(lat) * 1000, 4),
               "symbols_processed": symbols, "rules_expanded": rules}
        if as_json:
            click.echo(json.dumps(row))
        else:
            click.echo(f"{kind} n={count} mean_ms={row['mean_ms']} "
                       f"symbols={symbols} rules={rules}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--load", "loads", multiple=True, metavar="NAME=PATH",
              help="preload index files")
def serve(host, port, loads):
    """Run the HTTP query service."""
    import uvicorn

    from .service.app import create_app
    preload = {}
    for item in loads:
        name, _, path = item.partition("=")
        if not path:
            raise click.UsageError(f"bad --load {item!r}, expected NAME=PATH")
        preload[name] = _load_index(path)
    uvicorn.run(create_app(preload), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
