"""Dataset ingestion, synthetic fleet generation, and the exhaustive oracle.

Raw pings (object id, timestamp, continuous x/y) are regularized onto a
fixed grid and a fixed time step: one optional cell per object per instant.
The same regular table also backs the brute-force oracle used to verify
every index query, and a deterministic synthetic generator stands in for
real fleet data.
"""

from __future__ import annotations

import csv
import random
import struct
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional

import numpy as np

from .errors import FormatError, ValidationError
from .geometry import CellRect

Cell = tuple[int, int]


@dataclass(frozen=True)
class RawPing:
    object_id: str
    timestamp: float
    x: float
    y: float


@dataclass(frozen=True)
class GridConfig:
    cell_size: float = 50.0
    time_step: float = 60.0
    origin: tuple[float, float] = (0.0, 0.0)
    grid_w: int = 0
    grid_h: int = 0
    t0: Optional[float] = None  # reference timestamp; None = earliest ping

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValidationError("cell size must be positive")
        if self.time_step <= 0:
            raise ValidationError("time step must be positive")


@dataclass
class RegularDataset:
    """One optional cell per object per instant, on a fixed grid."""

    grid: GridConfig
    num_instants: int
    positions: dict[str, list[Optional[Cell]]] = field(default_factory=dict)
    dropped: int = 0

    @property
    def object_ids(self) -> list[str]:
        return sorted(self.positions)

    def position(self, obj: str, t: int) -> Optional[Cell]:
        return self.positions[obj][t]

    def present_records(self) -> int:
        return sum(1 for track in self.positions.values()
                   for c in track if c is not None)

    def dump(self, path: str) -> None:
        with open(path, "wb") as f:
            f.write(b"GRDS")
            f.write(struct.pack("<ddddII", self.grid.cell_size, self.grid.time_step,
                                self.grid.origin[0], self.grid.origin[1],
                                self.grid.grid_w, self.grid.grid_h))
            f.write(struct.pack("<II", len(self.positions), self.num_instants))
            for obj in self.object_ids:
                raw = obj.encode()
                f.write(struct.pack("<H", len(raw)))
                f.write(raw)
                for c in self.positions[obj]:
                    if c is None:
                        f.write(struct.pack("<ii", -1, -1))
                    else:
                        f.write(struct.pack("<ii", c[0], c[1]))

    @classmethod
    def load(cls, path: str) -> "RegularDataset":
        with open(path, "rb") as f:
            if f.read(4) != b"GRDS":
                raise FormatError(f"{path}: not a dataset dump")
            cell, step, ox, oy, gw, gh = struct.unpack("<ddddII", f.read(40))
            nobj, nt = struct.unpack("<II", f.read(8))
            ds = cls(GridConfig(cell, step, (ox, oy), gw, gh), nt)
            for _ in range(nobj):
                (ln,) = struct.unpack("<H", f.read(2))
                obj = f.read(ln).decode()
                track: list[Optional[Cell]] = []
                for _ in range(nt):
                    x, y = struct.unpack("<ii", f.read(8))
                    track.append(None if x < 0 else (x, y))
                ds.positions[obj] = track
        return ds


def _parse_timestamp(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        return datetime.fromisoformat(raw).timestamp()


def read_pings_csv(path: str) -> list[RawPing]:
    """Read pings from a CSV with header objectId,timestamp,x,y."""
    pings: list[RawPing] = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        required = {"objectId", "timestamp", "x", "y"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise FormatError(f"{path}: header must contain {sorted(required)}")
        for row in reader:
            pings.append(RawPing(row["objectId"], _parse_timestamp(row["timestamp"]),
                                 float(row["x"]), float(row["y"])))
    return pings


def write_pings_csv(dataset: RegularDataset, path: str) -> None:
    """Write a dataset as ping rows at cell centers / instant timestamps."""
    g = dataset.grid
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["objectId", "timestamp", "x", "y"])
        for obj in dataset.object_ids:
            for t, c in enumerate(dataset.positions[obj]):
                if c is None:
                    continue
                writer.writerow([obj, t * g.time_step,
                                 g.origin[0] + (c[0] + 0.5) * g.cell_size,
                                 g.origin[1] + (c[1] + 0.5) * g.cell_size])


def regularize(pings: list[RawPing], cfg: GridConfig) -> RegularDataset:
    """Snap pings to grid cells and regular instants.

    A ping maps to instant round((timestamp - t0) / time_step) and cell
    (floor((x - x0) / cell), floor((y - y0) / cell)). When several pings of
    one object land in the same instant the one closest to the instant's
    center wins, earlier timestamp breaking ties. Pings outside the grid are
    dropped (counted in `dropped`); no other error filtering is attempted.
    """
    if not pings:
        return RegularDataset(cfg, 0)
    t0 = cfg.t0 if cfg.t0 is not None else min(p.timestamp for p in pings)
    grid_w, grid_h = cfg.grid_w, cfg.grid_h
    if grid_w <= 0 or grid_h <= 0:
        # Infer the grid from the data extent.
        max_cx = max_cy = 0
        for p in pings:
            max_cx = max(max_cx, int((p.x - cfg.origin[0]) // cfg.cell_size))
            max_cy = max(max_cy, int((p.y - cfg.origin[1]) // cfg.cell_size))
        grid_w = grid_w if grid_w > 0 else max_cx + 1
        grid_h = grid_h if grid_h > 0 else max_cy + 1
        cfg = GridConfig(cfg.cell_size, cfg.time_step, cfg.origin,
                         grid_w, grid_h, t0)
    dropped = 0
    # chosen[(obj, instant)] = (|offset from center|, timestamp, cell)
    chosen: dict[tuple[str, int], tuple[float, float, Cell]] = {}
    max_instant = 0
    for p in pings:
        instant = round((p.timestamp - t0) / cfg.time_step)
        if instant < 0:
            dropped += 1
            continue
        cx = int((p.x - cfg.origin[0]) // cfg.cell_size)
        cy = int((p.y - cfg.origin[1]) // cfg.cell_size)
        if not (0 <= cx < grid_w and 0 <= cy < grid_h):
            dropped += 1
            continue
        center = t0 + instant * cfg.time_step
        cand = (abs(p.timestamp - center), p.timestamp, (cx, cy))
        key = (p.object_id, instant)
        prev = chosen.get(key)
        if prev is None or cand[:2] < prev[:2]:
            chosen[key] = cand
        max_instant = max(max_instant, instant)
    num_instants = max_instant + 1 if chosen else 0
    ds = RegularDataset(cfg, num_instants, dropped=dropped)
    for (obj, instant), (_, _, cell) in chosen.items():
        track = ds.positions.get(obj)
        if track is None:
            track = [None] * num_instants
            ds.positions[obj] = track
        track[instant] = cell
    return ds


@dataclass(frozen=True)
class BehaviorMix:
    """Fractions of fleet behaviors; they are normalized over the fleet."""
    stationary: float = 0.2
    straight: float = 0.45
    walker: float = 0.2
    gapped: float = 0.15


def gen_synthetic(num_objects: int, num_instants: int, grid_w: int, grid_h: int,
                  mix: BehaviorMix = BehaviorMix(), seed: int = 0,
                  gap_rate: float = 0.008, max_gap: int = 280) -> RegularDataset:
    """Deterministic synthetic fleet.

    Behaviors: stationary objects, straight movers with occasional small
    turns (border bounces included), random walkers, and gapped objects
    whose signal drops out for stretches while they keep moving at a speed
    no higher than they show while visible. One gapped object appears late
    and one disappears for good, so never-seen and truncated-log paths get
    exercised.
    """
    rng = random.Random(seed)
    grid = GridConfig(grid_w=grid_w, grid_h=grid_h, t0=0.0)
    ds = RegularDataset(grid, num_instants)
    fracs = [mix.stationary, mix.straight, mix.walker, mix.gapped]
    total = sum(fracs)
    if total <= 0:
        raise ValidationError("behavior mix must have positive total")
    exact = [num_objects * f / total for f in fracs]
    counts = [int(v) for v in exact]
    for i in sorted(range(4), key=lambda i: (counts[i] - exact[i], i)):
        if sum(counts) == num_objects:
            break
        counts[i] += 1
    n_stat, n_straight, n_walk, _ = counts

    def clamp(v: int, hi: int) -> int:
        return 0 if v < 0 else hi - 1 if v >= hi else v

    def new_velocity() -> tuple[int, int]:
        while True:
            v = (rng.randint(-2, 2), rng.randint(-2, 2))
            if v != (0, 0):
                return v

    for i in range(num_objects):
        obj = f"o{i:04d}"
        if i < n_stat:
            behavior = "stationary"
        elif i < n_stat + n_straight:
            behavior = "straight"
        elif i < n_stat + n_straight + n_walk:
            behavior = "walker"
        else:
            behavior = "gapped"
        x = rng.randrange(grid_w)
        y = rng.randrange(grid_h)
        vx, vy = new_velocity()
        track: list[Optional[Cell]] = []
        gap_left = 0
        gapped_rank = i - (n_stat + n_straight + n_walk)
        start_at = 0
        stop_at = num_instants
        if behavior == "gapped" and gapped_rank == 0:
            start_at = num_instants // 3
        if behavior == "gapped" and gapped_rank == 1:
            stop_at = (2 * num_instants) // 3
        moves_like = "walker" if behavior == "gapped" and gapped_rank % 2 else "straight"
        for t in range(num_instants):
            if behavior == "stationary":
                pass
            elif behavior == "walker" or (behavior == "gapped" and moves_like == "walker"):
                x = clamp(x + rng.randint(-1, 1), grid_w)
                y = clamp(y + rng.randint(-1, 1), grid_h)
            else:  # straight, possibly gapped
                if rng.random() < 0.01:
                    if rng.random() < 0.5:
                        vx = max(-2, min(2, vx + rng.choice((-1, 1))))
                    else:
                        vy = max(-2, min(2, vy + rng.choice((-1, 1))))
                    if (vx, vy) == (0, 0):
                        vx, vy = new_velocity()
                if not (0 <= x + vx < grid_w):
                    vx = -vx
                if not (0 <= y + vy < grid_h):
                    vy = -vy
                x = clamp(x + vx, grid_w)
                y = clamp(y + vy, grid_h)
            visible = start_at <= t < stop_at
            if behavior == "gapped" and visible:
                if gap_left > 0:
                    gap_left -= 1
                    visible = False
                elif rng.random() < gap_rate:
                    gap_left = rng.randint(1, max_gap) - 1
                    visible = False
            track.append((x, y) if visible else None)
        ds.positions[obj] = track
    return ds


class OracleStore:
    """Definitionally correct query answers over the raw position table."""

    def __init__(self, dataset: RegularDataset):
        self.dataset = dataset
        ids = dataset.object_ids
        self.ids = ids
        n, t = len(ids), dataset.num_instants
        self._px = np.full((n, t), -1, dtype=np.int64)
        self._py = np.full((n, t), -1, dtype=np.int64)
        for i, obj in enumerate(ids):
            for j, c in enumerate(dataset.positions[obj]):
                if c is not None:
                    self._px[i, j] = c[0]
                    self._py[i, j] = c[1]

    def position(self, obj: str, t: int) -> Optional[Cell]:
        c = self.dataset.positions[obj][t]
        return c

    def trajectory(self, obj: str, ts: int, te: int) -> list[tuple[int, Optional[Cell]]]:
        track = self.dataset.positions[obj]
        return [(t, track[t]) for t in range(ts, te + 1)]

    def time_slice(self, rect: CellRect, t: int) -> list[tuple[str, Cell]]:
        px = self._px[:, t]
        py = self._py[:, t]
        mask = ((px >= rect.x1) & (px <= rect.x2)
                & (py >= rect.y1) & (py <= rect.y2) & (px >= 0))
        return [(self.ids[i], (int(px[i]), int(py[i])))
                for i in np.nonzero(mask)[0]]

    def time_interval(self, rect: CellRect, ts: int, te: int) -> set[str]:
        px = self._px[:, ts:te + 1]
        py = self._py[:, ts:te + 1]
        mask = ((px >= rect.x1) & (px <= rect.x2)
                & (py >= rect.y1) & (py <= rect.y2) & (px >= 0)).any(axis=1)
        return {self.ids[i] for i in np.nonzero(mask)[0]}
