"""Shared fixtures: the heavy datasets, indexes, and workloads are built
once per session and reused across the integration and acceptance modules."""

from __future__ import annotations

import random

import pytest

from gract import (BehaviorMix, CellRect, IndexConfig, OracleStore,
                   TrajectoryIndex, gen_synthetic)

ACCEPT_SEED = 1337
ACCEPT_OBJECTS = 200
ACCEPT_INSTANTS = 2048
ACCEPT_GRID = 4096
ACCEPT_PERIODS = (120, 240)
ACCEPT_QUERIES = 200

STRAIGHT_SEED = 2024
STRAIGHT_OBJECTS = 150


@pytest.fixture(scope="session")
def accept_dataset():
    return gen_synthetic(ACCEPT_OBJECTS, ACCEPT_INSTANTS, ACCEPT_GRID,
                         ACCEPT_GRID, seed=ACCEPT_SEED)


@pytest.fixture(scope="session")
def accept_oracle(accept_dataset):
    return OracleStore(accept_dataset)


@pytest.fixture(scope="session")
def accept_indexes(accept_dataset):
    out = {}
    for period in ACCEPT_PERIODS:
        for mode in ("gract", "scdc"):
            out[(mode, period)] = TrajectoryIndex.build(
                accept_dataset, IndexConfig(period=period, mode=mode))
    return out


@pytest.fixture(scope="session")
def accept_workload(accept_dataset):
    """Seed-fixed random queries: 200 of each of the four types."""
    rng = random.Random(99173)
    ids = accept_dataset.object_ids
    T = accept_dataset.num_instants
    g = ACCEPT_GRID

    def rect():
        w = rng.randrange(32, 512)
        h = rng.randrange(32, 512)
        x1 = rng.randrange(g - w)
        y1 = rng.randrange(g - h)
        return CellRect(x1, y1, x1 + w, y1 + h)

    positions = [(rng.choice(ids), rng.randrange(T))
                 for _ in range(ACCEPT_QUERIES)]
    trajectories = []
    for _ in range(ACCEPT_QUERIES):
        ts = rng.randrange(T)
        trajectories.append((rng.choice(ids), ts,
                             min(T - 1, ts + rng.randrange(256))))
    slices = [(rect(), rng.randrange(T)) for _ in range(ACCEPT_QUERIES)]
    intervals = []
    for _ in range(ACCEPT_QUERIES):
        ts = rng.randrange(T)
        intervals.append((rect(), ts, min(T - 1, ts + rng.randrange(300))))
    return {"position": positions, "trajectory": trajectories,
            "slice": slices, "interval": intervals}


@pytest.fixture(scope="session")
def accept_answers(accept_oracle, accept_workload):
    oracle = accept_oracle
    return {
        "position": [oracle.position(o, t)
                     for o, t in accept_workload["position"]],
        "trajectory": [oracle.trajectory(o, ts, te)
                       for o, ts, te in accept_workload["trajectory"]],
        "slice": [sorted(oracle.time_slice(r, t))
                  for r, t in accept_workload["slice"]],
        "interval": [sorted(oracle.time_interval(r, ts, te))
                     for r, ts, te in accept_workload["interval"]],
    }


@pytest.fixture(scope="session")
def straight_dataset():
    return gen_synthetic(STRAIGHT_OBJECTS, ACCEPT_INSTANTS, ACCEPT_GRID,
                         ACCEPT_GRID, mix=BehaviorMix(0.1, 0.9, 0.0, 0.0),
                         seed=STRAIGHT_SEED)


@pytest.fixture(scope="session")
def straight_indexes(straight_dataset):
    out = {}
    for period in (120, 240):
        for mode in ("gract", "scdc"):
            out[(mode, period)] = TrajectoryIndex.build(
                straight_dataset, IndexConfig(period=period, mode=mode))
    return out


def run_workload(idx, workload, options_factory=None):
    """Evaluate the standard workload against an index; returns answers."""
    from gract import QueryOptions

    def opts():
        return options_factory() if options_factory else QueryOptions()

    return {
        "position": [idx.position(o, t, opts())
                     for o, t in workload["position"]],
        "trajectory": [idx.trajectory(o, ts, te, opts())
                       for o, ts, te in workload["trajectory"]],
        "slice": [idx.time_slice(r, t, opts())
                  for r, t in workload["slice"]],
        "interval": [idx.time_interval(r, ts, te, opts())
                     for r, ts, te in workload["interval"]],
    }
