"""The queryable index: periodic snapshots plus compressed movement logs.

Build takes a regular dataset and a period s, lays a snapshot at instants
0, s, 2s, ... and encodes each object's movements between consecutive
snapshots as an integer log (the log for the period after snapshot i covers
instants i*s+1 through (i+1)*s, so a full replay reaches the next snapshot
and backward traversal can start there). Logs are compressed either with
the byte codec (scdc mode) or with the shared enriched grammar (gract
mode); queries run directly over the compressed form.

Queries: position of an object at an instant, its trajectory over an
interval, the objects inside a rectangle at one instant (time slice), and
the objects inside a rectangle at any instant of an interval. Slice and
position anchor at the nearest snapshot and may traverse logs backward;
candidate sets are pruned by growing the query rectangle with the fastest
observed speed, and grammar symbols are skipped through their time span /
displacement / bounding-rectangle metadata instead of being expanded.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional, Sequence

from .dataio import RegularDataset
from .errors import (FormatError, RangeError, UnknownObjectError,
                     ValidationError)
from .geometry import CellRect, chebyshev_to_rect
from .movement import (ABS_MARKER, MOVE_SHIFT, REL_MARKER, AbsReappear, Cell,
                       LogEvent, Move, RelReappear, chebyshev, events_to_ints,
                       spiral_decode, spiral_encode)
from .repair import Grammar, enrich, repair_compress
from .scdc import scdc_choose_s, scdc_decode_all, scdc_encode
from .snapshot import AbsentInfo, Snapshot
from .succinct import BitVector, DacSequence, pack_fixed, unpack_fixed

MODE_GRACT = "gract"
MODE_SCDC = "scdc"

MAGIC = b"GRCT"
VERSION = 1


@dataclass
class IndexConfig:
    period: int
    mode: str = MODE_GRACT
    k: int = 2
    scdc_s: Optional[int] = None  # None = optimize over the log histogram
    dac_width_times: int = 8
    dac_width_coords: int = 8
    perm_sample: int = 32
    validate: bool = True


@dataclass
class QueryStats:
    """Per-query instrumentation: how much compressed log work happened.

    symbols_processed counts every log item the traversal touched (movement
    terminals, skipped or inspected grammar symbols, reappearance events);
    rules_expanded counts nonterminal expansions.
    """
    symbols_processed: int = 0
    rules_expanded: int = 0


@dataclass
class QueryOptions:
    direction: str = "auto"  # auto | forward | backward
    mbr_pruning: bool = True
    reachability_pruning: bool = True
    stats: Optional[QueryStats] = None


@dataclass(frozen=True)
class SizeReport:
    mode: str
    period: int
    header_bytes: int
    dict_bytes: int
    snapshot_bytes: int
    log_bytes: int
    grammar_bytes: int
    total_bytes: int
    plain_bytes: int

    @property
    def ratio(self) -> float:
        return self.total_bytes / self.plain_bytes if self.plain_bytes else 0.0


def expand_region(rect: CellRect, dt: int, vmax: int,
                  grid_w: int, grid_h: int) -> CellRect:
    """Grow rect by vmax*dt cells on every side, clipped to the grid."""
    if dt < 0:
        raise ValidationError("time distance must be nonnegative")
    d = vmax * dt
    return CellRect(max(rect.x1 - d, 0), max(rect.y1 - d, 0),
                    min(rect.x2 + d, grid_w - 1), min(rect.y2 + d, grid_h - 1))


@dataclass
class ExtractedLogs:
    """Intermediate build product: per-object per-period event streams."""
    object_ids: list[str]
    snapshot_instants: list[int]
    present: list[dict[int, Cell]]
    absent: list[dict[int, AbsentInfo]]
    events: list[list[list[LogEvent]]]  # [dense][period]
    vmax: int
    num_periods: int


def extract_log_streams(dataset: RegularDataset, period: int) -> ExtractedLogs:
    """Split a dataset into snapshot states and inter-snapshot event logs.

    An object's silence is encoded in the reappearance that ends it: a
    relative one when it went quiet after the period's snapshot, an absolute
    one when the gap spans a snapshot (then the gap counts from the last
    emission, which the snapshot's absent table knows about). vmax is the
    largest per-instant Chebyshev displacement, counting reappearance
    displacements averaged over their gap so region pruning stays sound.
    """
    if period < 2:
        raise ValidationError("snapshot period must be >= 2")
    T = dataset.num_instants
    ids = dataset.object_ids
    for obj in ids:
        if len(dataset.positions[obj]) != T:
            raise ValidationError(f"object {obj}: track length != {T}")
    q = (T - 1) // period if T > 0 else 0
    snapshot_instants = [i * period for i in range(q + 1)]
    num_periods = q + (1 if T - 1 > q * period else 0)
    present: list[dict[int, Cell]] = [{} for _ in snapshot_instants]
    absent: list[dict[int, AbsentInfo]] = [{} for _ in snapshot_instants]
    events: list[list[list[LogEvent]]] = []
    vmax = 0
    for dense, obj in enumerate(ids):
        track = dataset.positions[obj]
        logs: list[list[LogEvent]] = [[] for _ in range(num_periods)]
        last_cell: Optional[Cell] = None
        last_t = -1
        for t in range(T):
            c = track[t]
            if t % period == 0:
                si = t // period
                if c is not None:
                    present[si][dense] = c
                else:
                    absent[si][dense] = AbsentInfo(last_cell, last_t)
            if c is None:
                continue
            if t > 0:
                pidx = (t - 1) // period
                gap = t - last_t - 1
                if last_cell is None:
                    ev: LogEvent = AbsReappear(gap, c[0], c[1])
                elif gap == 0:
                    dx = c[0] - last_cell[0]
                    dy = c[1] - last_cell[1]
                    ev = Move(spiral_encode(dx, dy))
                    vmax = max(vmax, chebyshev(dx, dy))
                elif last_t >= pidx * period:
                    dx = c[0] - last_cell[0]
                    dy = c[1] - last_cell[1]
                    ev = RelReappear(gap, spiral_encode(dx, dy))
                    vmax = max(vmax, -(-chebyshev(dx, dy) // (gap + 1)))
                else:
                    ev = AbsReappear(gap, c[0], c[1])
                logs[pidx].append(ev)
            last_cell, last_t = c, t
        events.append(logs)
    return ExtractedLogs(list(ids), snapshot_instants, present, absent,
                         events, vmax, num_periods)


def _unpairable_positions(events: list[LogEvent]) -> set[int]:
    """Positions of reappearance markers and payloads in the int stream."""
    bad: set[int] = set()
    pos = 0
    for e in events:
        if isinstance(e, Move):
            pos += 1
        elif isinstance(e, RelReappear):
            bad.update(range(pos, pos + 3))
            pos += 3
        else:
            bad.update(range(pos, pos + 4))
            pos += 4
    return bad


def _parse_items(ints: Sequence[int]) -> list[tuple]:
    """Group a log integer stream into walkable items.

    Items are ("s", symbol) for movement symbols (terminal or nonterminal),
    ("r", gap, spiral code) and ("a", gap, x, y) for reappearances.
    """
    items: list[tuple] = []
    i = 0
    n = len(ints)
    while i < n:
        v = ints[i]
        if v == REL_MARKER:
            if i + 3 > n:
                raise FormatError("truncated relative reappearance in log")
            items.append(("r", ints[i + 1], ints[i + 2] - MOVE_SHIFT))
            i += 3
        elif v == ABS_MARKER:
            if i + 4 > n:
                raise FormatError("truncated absolute reappearance in log")
            items.append(("a", ints[i + 1], ints[i + 2], ints[i + 3]))
            i += 4
        else:
            items.append(("s", v))
            i += 1
    return items


class TrajectoryIndex:
    """Immutable compressed index; any number of concurrent readers is fine."""

    def __init__(self, *, grid_w: int, grid_h: int, num_instants: int,
                 period: int, vmax: int, mode: str, k: int, scdc_s: int,
                 dac_width_times: int, dac_width_coords: int, perm_sample: int,
                 present_records: int, object_ids: list[str],
                 snapshots: list[Snapshot], slices, grammar: Optional[Grammar],
                 num_period_slots: int):
        self.grid_w = grid_w
        self.grid_h = grid_h
        self.num_instants = num_instants
        self.period = period
        self.vmax = vmax
        self.mode = mode
        self.k = k
        self.scdc_s = scdc_s
        self.dac_width_times = dac_width_times
        self.dac_width_coords = dac_width_coords
        self.perm_sample = perm_sample
        self.present_records = present_records
        self.object_ids = object_ids
        self._dense = {obj: i for i, obj in enumerate(object_ids)}
        self.snapshots = snapshots
        self._slices = slices
        self._grammar = grammar
        self._num_period_slots = num_period_slots

    @property
    def num_objects(self) -> int:
        return len(self.object_ids)

    @property
    def grammar(self) -> Optional[Grammar]:
        return self._grammar

    # ------------------------------------------------------------------
    # build
    # ------------------------------------------------------------------

    @classmethod
    def build(cls, dataset: RegularDataset, config: IndexConfig) -> "TrajectoryIndex":
        if config.period < 2:
            raise ValidationError("snapshot period must be >= 2")
        if config.mode not in (MODE_GRACT, MODE_SCDC):
            raise ValidationError(f"unknown mode {config.mode!r}")
        grid_w = dataset.grid.grid_w
        grid_h = dataset.grid.grid_h
        if grid_w < 1 or grid_h < 1:
            raise ValidationError("dataset carries no grid dimensions")
        ex = extract_log_streams(dataset, config.period)
        int_streams: list[list[int]] = []
        unpairable: list[set[int]] = []
        for dense in range(len(ex.object_ids)):
            for pidx in range(ex.num_periods):
                evs = ex.events[dense][pidx]
                int_streams.append(events_to_ints(evs))
                unpairable.append(_unpairable_positions(evs))

        grammar: Optional[Grammar] = None
        if config.mode == MODE_SCDC:
            s = config.scdc_s
            if s is None:
                hist: dict[int, int] = {}
                for stream in int_streams:
                    for v in stream:
                        hist[v] = hist.get(v, 0) + 1
                s = scdc_choose_s(hist) if hist else 128
            flat = [scdc_encode(stream, s) for stream in int_streams]
        else:
            s = config.scdc_s or 0
            grammar, compressed = repair_compress(int_streams, unpairable)
            enrich(grammar, config.dac_width_times, config.dac_width_coords)
            flat = compressed

        np_ = ex.num_periods
        slices = [flat[d * np_:(d + 1) * np_] for d in range(len(ex.object_ids))]

        snapshots = [
            Snapshot.build(ex.present[i], ex.absent[i], grid_w, grid_h,
                           instant=ex.snapshot_instants[i], k=config.k,
                           sample=config.perm_sample)
            for i in range(len(ex.snapshot_instants))
        ]
        idx = cls(grid_w=grid_w, grid_h=grid_h,
                  num_instants=dataset.num_instants, period=config.period,
                  vmax=ex.vmax, mode=config.mode, k=config.k,
                  scdc_s=s if config.mode == MODE_SCDC else 0,
                  dac_width_times=config.dac_width_times,
                  dac_width_coords=config.dac_width_coords,
                  perm_sample=config.perm_sample,
                  present_records=dataset.present_records(),
                  object_ids=ex.object_ids, snapshots=snapshots,
                  slices=slices, grammar=grammar, num_period_slots=np_)
        if config.validate:
            idx._validate_against(dataset)
        return idx

    def _validate_against(self, dataset: RegularDataset) -> None:
        """Replay every log and compare with the dataset, instant by instant."""
        T = self.num_instants
        for dense, obj in enumerate(self.object_ids):
            track = dataset.positions[obj]
            recon: list[Optional[Cell]] = [None] * T
            recon[0] = track[0]
            cell: Optional[Cell] = track[0]
            time = 0 if cell is not None else -1
            for pidx in range(self._num_period_slots):
                for it in _parse_items(self._slice_ints(dense, pidx)):
                    if it[0] == "s":
                        for term in self._expand_item(it[1]):
                            dx, dy = spiral_decode(term - MOVE_SHIFT)
                            cell = (cell[0] + dx, cell[1] + dy)
                            time += 1
                            recon[time] = cell
                    elif it[0] == "r":
                        dx, dy = spiral_decode(it[2])
                        cell = (cell[0] + dx, cell[1] + dy)
                        time += it[1] + 1
                        recon[time] = cell
                    else:
                        cell = (it[2], it[3])
                        time += it[1] + 1
                        recon[time] = cell
            if recon != track:
                bad = next(t for t in range(T) if recon[t] != track[t])
                raise ValidationError(
                    f"log replay diverges from dataset for {obj} at instant {bad}")

    def _expand_item(self, sym: int) -> list[int]:
        if self._grammar is not None and sym >= self._grammar.terminal_bound:
            return self._grammar.expand(sym)
        return [sym]

    # ------------------------------------------------------------------
    # shared traversal machinery
    # ------------------------------------------------------------------

    def _dense_id(self, obj: str) -> int:
        dense = self._dense.get(obj)
        if dense is None:
            raise UnknownObjectError(f"unknown object {obj!r}")
        return dense

    def _check_instant(self, t: int) -> None:
        if not 0 <= t < self.num_instants:
            raise RangeError(f"instant {t} outside [0, {self.num_instants})")

    def _slice_ints(self, dense: int, pidx: int) -> list[int]:
        if self.mode == MODE_GRACT:
            return self._slices[dense][pidx]
        return scdc_decode_all(self._slices[dense][pidx], self.scdc_s)

    def _last_snapshot_index(self) -> int:
        return (self.num_instants - 1) // self.period

    def _direction(self, t: int, opts: QueryOptions) -> str:
        si, r = divmod(t, self.period)
        can_back = si + 1 <= self._last_snapshot_index()
        if opts.direction == "forward":
            return "forward"
        if opts.direction == "backward":
            return "backward" if can_back else "forward"
        return "backward" if can_back and (self.period - r) < r else "forward"

    def _initial_state(self, snap_idx: int, dense: int) -> tuple[Optional[Cell], int]:
        snap = self.snapshots[snap_idx]
        cell = snap.position_of(dense)
        if cell is not None:
            return cell, snap.instant
        info = snap.absent_info(dense)
        return info.cell, info.instant

    # ------------------------------------------------------------------
    # position
    # ------------------------------------------------------------------

    def position(self, obj: str, t: int,
                 options: Optional[QueryOptions] = None) -> Optional[Cell]:
        opts = options or QueryOptions()
        stats = opts.stats if opts.stats is not None else QueryStats()
        dense = self._dense_id(obj)
        self._check_instant(t)
        si, r = divmod(t, self.period)
        if r == 0:
            return self.snapshots[si].position_of(dense)
        if self._direction(t, opts) == "forward":
            pos, time = self._initial_state(si, dense)
            return self._walk_position_forward(
                self._slice_ints(dense, si), pos, time, t, stats)
        pos, time = self._initial_state(si + 1, dense)
        if pos is None:
            return None
        return self._walk_position_backward(
            self._slice_ints(dense, si), pos, time, t, stats)

    def _walk_position_forward(self, ints, pos, time, t, stats):
        g = self._grammar
        bound = g.terminal_bound if g is not None else None
        items = _parse_items(ints)
        idx = 0
        n = len(items)
        stack: list[int] = []
        while time < t:
            if stack:
                sym = stack.pop()
                stats.symbols_processed += 1
                if bound is not None and sym >= bound:
                    meta = g.rule_meta(sym)
                    if time + meta.tspan <= t:
                        pos = (pos[0] + meta.disp[0], pos[1] + meta.disp[1])
                        time += meta.tspan
                    else:
                        stats.rules_expanded += 1
                        a, b = g.rules[sym - bound]
                        stack.append(b)
                        stack.append(a)
                else:
                    dx, dy = spiral_decode(sym - MOVE_SHIFT)
                    pos = (pos[0] + dx, pos[1] + dy)
                    time += 1
                continue
            if idx >= n:
                return None  # log over before t: object is dark
            it = items[idx]
            idx += 1
            tag = it[0]
            if tag == "s":
                stack.append(it[1])
                continue
            stats.symbols_processed += 1
            landing = time + it[1] + 1
            if landing > t:
                return None  # t falls inside the silent gap
            if tag == "r":
                dx, dy = spiral_decode(it[2])
                pos = (pos[0] + dx, pos[1] + dy)
            else:
                pos = (it[2], it[3])
            time = landing
        return pos

    def _walk_position_backward(self, ints, pos, time, t, stats):
        g = self._grammar
        bound = g.terminal_bound if g is not None else None
        items = _parse_items(ints)
        idx = len(items) - 1
        stack: list[int] = []
        while time > t:
            if stack:
                sym = stack.pop()
                stats.symbols_processed += 1
                if bound is not None and sym >= bound:
                    meta = g.rule_meta(sym)
                    if time - meta.tspan >= t:
                        pos = (pos[0] - meta.disp[0], pos[1] - meta.disp[1])
                        time -= meta.tspan
                    else:
                        stats.rules_expanded += 1
                        a, b = g.rules[sym - bound]
                        stack.append(a)
                        stack.append(b)  # popped first: right child
                else:
                    dx, dy = spiral_decode(sym - MOVE_SHIFT)
                    pos = (pos[0] - dx, pos[1] - dy)
                    time -= 1
                continue
            if idx < 0:
                break
            it = items[idx]
            idx -= 1
            tag = it[0]
            if tag == "s":
                stack.append(it[1])
                continue
            stats.symbols_processed += 1
            if tag == "r":
                before = time - it[1] - 1
                if t > before:
                    return None  # t falls inside the silent gap
                dx, dy = spiral_decode(it[2])
                pos = (pos[0] - dx, pos[1] - dy)
                time = before
            else:
                # An absolute reappearance means the silence spans the
                # period start, so any in-period t precedes the landing.
                return None
        return pos if time == t else None

    # ------------------------------------------------------------------
    # trajectory
    # ------------------------------------------------------------------

    def trajectory(self, obj: str, ts: int, te: int,
                   options: Optional[QueryOptions] = None
                   ) -> list[tuple[int, Optional[Cell]]]:
        opts = options or QueryOptions()
        stats = opts.stats if opts.stats is not None else QueryStats()
        dense = self._dense_id(obj)
        self._check_instant(ts)
        self._check_instant(te)
        if ts > te:
            raise RangeError(f"empty interval [{ts}, {te}]")
        g = self._grammar
        bound = g.terminal_bound if g is not None else None
        si = ts // self.period
        pos, time = self._initial_state(si, dense)
        out: dict[int, Cell] = {}
        if pos is not None and ts <= time <= te:
            out[time] = pos
        stack: list[int] = []
        pidx = si
        items: list[tuple] = []
        idx = n = 0
        while time < te:
            if stack:
                sym = stack.pop()
                stats.symbols_processed += 1
                if bound is not None and sym >= bound:
                    meta = g.rule_meta(sym)
                    if time + meta.tspan < ts:
                        pos = (pos[0] + meta.disp[0], pos[1] + meta.disp[1])
                        time += meta.tspan
                    else:
                        stats.rules_expanded += 1
                        a, b = g.rules[sym - bound]
                        stack.append(b)
                        stack.append(a)
                else:
                    dx, dy = spiral_decode(sym - MOVE_SHIFT)
                    pos = (pos[0] + dx, pos[1] + dy)
                    time += 1
                    if ts <= time <= te:
                        out[time] = pos
                continue
            if idx >= n:
                if pidx >= self._num_period_slots:
                    break
                items = _parse_items(self._slice_ints(dense, pidx))
                idx, n = 0, len(items)
                pidx += 1
                continue
            it = items[idx]
            idx += 1
            tag = it[0]
            if tag == "s":
                stack.append(it[1])
                continue
            stats.symbols_processed += 1
            landing = time + it[1] + 1
            if tag == "r":
                dx, dy = spiral_decode(it[2])
                pos = (pos[0] + dx, pos[1] + dy)
            else:
                pos = (it[2], it[3])
            time = landing
            if ts <= time <= te:
                out[time] = pos
        return [(t, out.get(t)) for t in range(ts, te + 1)]

    # ------------------------------------------------------------------
    # time slice
    # ------------------------------------------------------------------

    def time_slice(self, rect: CellRect, t: int,
                   options: Optional[QueryOptions] = None
                   ) -> list[tuple[str, Cell]]:
        opts = options or QueryOptions()
        stats = opts.stats if opts.stats is not None else QueryStats()
        self._check_instant(t)
        clipped = rect.clipped(self.grid_w, self.grid_h)
        if clipped is None:
            return []
        rect = clipped
        si, r = divmod(t, self.period)
        if r == 0:
            found = self.snapshots[si].objects_in_region(rect)
            return sorted((self.object_ids[d], c) for d, c in found)
        backward = self._direction(t, opts) == "backward"
        snap = self.snapshots[si + 1] if backward else self.snapshots[si]
        dt = abs(t - snap.instant)
        if opts.reachability_pruning:
            region = expand_region(rect, dt, self.vmax, self.grid_w, self.grid_h)
        else:
            region = CellRect(0, 0, self.grid_w - 1, self.grid_h - 1)
        out: list[tuple[str, Cell]] = []
        for dense, cell in snap.objects_in_region(region):
            ints = self._slice_ints(dense, si)
            if backward:
                final = self._track_slice_backward(
                    ints, cell, snap.instant, t, rect, opts, stats)
            else:
                final = self._track_slice_forward(
                    ints, cell, snap.instant, t, rect, opts, stats)
            if final is not None:
                out.append((self.object_ids[dense], final))
        # Objects dark at the snapshot may reappear anywhere: always track.
        for dense, info in snap.absent.items():
            if backward:
                if info.instant < t or info.cell is None:
                    continue
                final = self._track_slice_backward(
                    self._slice_ints(dense, si), info.cell, info.instant,
                    t, rect, opts, stats)
            else:
                final = self._track_slice_forward(
                    self._slice_ints(dense, si), info.cell, info.instant,
                    t, rect, opts, stats)
            if final is not None:
                out.append((self.object_ids[dense], final))
        out.sort()
        return out

    def _track_slice_forward(self, ints, pos, time, t, rect, opts, stats):
        """Position at t if the object can still reach rect, else None."""
        g = self._grammar
        bound = g.terminal_bound if g is not None else None
        vmax = self.vmax
        reach = opts.reachability_pruning
        items = _parse_items(ints)
        idx = 0
        n = len(items)
        stack: list[int] = []
        while time < t:
            if stack:
                sym = stack.pop()
                stats.symbols_processed += 1
                if bound is not None and sym >= bound:
                    meta = g.rule_meta(sym)
                    if time + meta.tspan <= t:
                        pos = (pos[0] + meta.disp[0], pos[1] + meta.disp[1])
                        time += meta.tspan
                        if (reach and time < t and chebyshev_to_rect(
                                pos[0], pos[1], rect) > vmax * (t - time)):
                            return None
                    else:
                        if opts.mbr_pruning:
                            x1, y1, x2, y2 = meta.mbr
                            if not CellRect(pos[0] + x1, pos[1] + y1,
                                            pos[0] + x2, pos[1] + y2).intersects(rect):
                                return None
                        stats.rules_expanded += 1
                        a, b = g.rules[sym - bound]
                        stack.append(b)
                        stack.append(a)
                else:
                    dx, dy = spiral_decode(sym - MOVE_SHIFT)
                    pos = (pos[0] + dx, pos[1] + dy)
                    time += 1
                    if (reach and time < t and chebyshev_to_rect(
                            pos[0], pos[1], rect) > vmax * (t - time)):
                        return None
                continue
            if idx >= n:
                return None
            it = items[idx]
            idx += 1
            tag = it[0]
            if tag == "s":
                stack.append(it[1])
                continue
            stats.symbols_processed += 1
            landing = time + it[1] + 1
            if landing > t:
                return None
            if tag == "r":
                dx, dy = spiral_decode(it[2])
                pos = (pos[0] + dx, pos[1] + dy)
            else:
                pos = (it[2], it[3])
            time = landing
            if (reach and time < t and chebyshev_to_rect(
                    pos[0], pos[1], rect) > vmax * (t - time)):
                return None
        return pos if pos is not None and rect.contains_point(*pos) else None

    def _track_slice_backward(self, ints, pos, time, t, rect, opts, stats):
        g = self._grammar
        bound = g.terminal_bound if g is not None else None
        vmax = self.vmax
        reach = opts.reachability_pruning
        items = _parse_items(ints)
        idx = len(items) - 1
        stack: list[int] = []
        while time > t:
            if stack:
                sym = stack.pop()
                stats.symbols_processed += 1
                if bound is not None and sym >= bound:
                    meta = g.rule_meta(sym)
                    if time - meta.tspan >= t:
                        pos = (pos[0] - meta.disp[0], pos[1] - meta.disp[1])
                        time -= meta.tspan
                        if (reach and time > t and chebyshev_to_rect(
                                pos[0], pos[1], rect) > vmax * (time - t)):
                            return None
                    else:
                        if opts.mbr_pruning:
                            sx = pos[0] - meta.disp[0]
                            sy = pos[1] - meta.disp[1]
                            x1, y1, x2, y2 = meta.mbr
                            if not CellRect(sx + x1, sy + y1,
                                            sx + x2, sy + y2).intersects(rect):
                                return None
                        stats.rules_expanded += 1
                        a, b = g.rules[sym - bound]
                        stack.append(a)
                        stack.append(b)
                else:
                    dx, dy = spiral_decode(sym - MOVE_SHIFT)
                    pos = (pos[0] - dx, pos[1] - dy)
                    time -= 1
                    if (reach and time > t and chebyshev_to_rect(
                            pos[0], pos[1], rect) > vmax * (time - t)):
                        return None
                continue
            if idx < 0:
                break
            it = items[idx]
            idx -= 1
            tag = it[0]
            if tag == "s":
                stack.append(it[1])
                continue
            stats.symbols_processed += 1
            if tag == "r":
                before = time - it[1] - 1
                if t > before:
                    return None
                dx, dy = spiral_decode(it[2])
                pos = (pos[0] - dx, pos[1] - dy)
                time = before
                if (reach and time > t and chebyshev_to_rect(
                        pos[0], pos[1], rect) > vmax * (time - t)):
                    return None
            else:
                return None
        if time != t or pos is None:
            return None
        return pos if rect.contains_point(*pos) else None

    # ------------------------------------------------------------------
    # time interval
    # ------------------------------------------------------------------

    def time_interval(self, rect: CellRect, ts: int, te: int,
                      options: Optional[QueryOptions] = None) -> list[str]:
        opts = options or QueryOptions()
        stats = opts.stats if opts.stats is not None else QueryStats()
        self._check_instant(ts)
        self._check_instant(te)
        if ts > te:
            raise RangeError(f"empty interval [{ts}, {te}]")
        clipped = rect.clipped(self.grid_w, self.grid_h)
        if clipped is None:
            return []
        rect = clipped
        si = ts // self.period
        snap = self.snapshots[si]
        if opts.reachability_pruning:
            region = expand_region(rect, te - snap.instant, self.vmax,
                                   self.grid_w, self.grid_h)
        else:
            region = CellRect(0, 0, self.grid_w - 1, self.grid_h - 1)
        out: list[str] = []
        for dense, cell in snap.objects_in_region(region):
            if self._track_interval(dense, si, cell, snap.instant,
                                    ts, te, rect, opts, stats):
                out.append(self.object_ids[dense])
        for dense, info in snap.absent.items():
            if self._track_interval(dense, si, info.cell, info.instant,
                                    ts, te, rect, opts, stats):
                out.append(self.object_ids[dense])
        out.sort()
        return out

    def _track_interval(self, dense, si, pos, time, ts, te, rect, opts, stats):
        """True iff the object is inside rect at some instant of [ts, te]."""
        if pos is not None and time >= ts and rect.contains_point(*pos):
            return True
        g = self._grammar
        bound = g.terminal_bound if g is not None else None
        vmax = self.vmax
        reach = opts.reachability_pruning
        stack: list[int] = []
        pidx = si
        items: list[tuple] = []
        idx = n = 0
        while time < te:
            if stack:
                sym = stack.pop()
                stats.symbols_processed += 1
                if bound is not None and sym >= bound:
                    meta = g.rule_meta(sym)
                    start = time + 1
                    end = time + meta.tspan
                    if end < ts:
                        pos = (pos[0] + meta.disp[0], pos[1] + meta.disp[1])
                        time = end
                    elif start < ts or end > te:
                        stats.rules_expanded += 1
                        a, b = g.rules[sym - bound]
                        stack.append(b)
                        stack.append(a)
                        continue
                    else:
                        endpos = (pos[0] + meta.disp[0], pos[1] + meta.disp[1])
                        if rect.contains_point(*endpos):
                            return True
                        x1, y1, x2, y2 = meta.mbr
                        if opts.mbr_pruning and not CellRect(
                                pos[0] + x1, pos[1] + y1,
                                pos[0] + x2, pos[1] + y2).intersects(rect):
                            pos = endpos
                            time = end
                        else:
                            stats.rules_expanded += 1
                            a, b = g.rules[sym - bound]
                            stack.append(b)
                            stack.append(a)
                            continue
                else:
                    dx, dy = spiral_decode(sym - MOVE_SHIFT)
                    pos = (pos[0] + dx, pos[1] + dy)
                    time += 1
                    if ts <= time <= te and rect.contains_point(*pos):
                        return True
                if (reach and time < te and chebyshev_to_rect(
                        pos[0], pos[1], rect) > vmax * (te - time)):
                    return False
                continue
            if idx >= n:
                if pidx >= self._num_period_slots:
                    return False
                items = _parse_items(self._slice_ints(dense, pidx))
                idx, n = 0, len(items)
                pidx += 1
                continue
            it = items[idx]
            idx += 1
            tag = it[0]
            if tag == "s":
                stack.append(it[1])
                continue
            stats.symbols_processed += 1
            landing = time + it[1] + 1
            if landing > te:
                return False  # dark through the rest of the interval
            if tag == "r":
                dx, dy = spiral_decode(it[2])
                pos = (pos[0] + dx, pos[1] + dy)
            else:
                pos = (it[2], it[3])
            time = landing
            if ts <= time <= te and rect.contains_point(*pos):
                return True
            if (reach and time < te and chebyshev_to_rect(
                    pos[0], pos[1], rect) > vmax * (te - time)):
                return False
        return False

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------

    def _serialize_sections(self) -> dict[str, bytes]:
        w = _Writer()
        w.u32(self.grid_w)
        w.u32(self.grid_h)
        w.u32(self.num_objects)
        w.u32(self.num_instants)
        w.u32(self.period)
        w.u32(self.vmax)
        w.u8(1 if self.mode == MODE_GRACT else 0)
        w.u8(self.k)
        w.u8(self.scdc_s)
        w.u8(self.dac_width_times)
        w.u8(self.dac_width_coords)
        w.u16(self.perm_sample)
        w.u64(self.present_records)
        w.u32(self._num_period_slots)
        header = w.take()

        w = _Writer()
        for obj in self.object_ids:
            raw = obj.encode()
            w.u16(len(raw))
            w.raw(raw)
        dictionary = w.take()

        w = _Writer()
        w.u32(len(self.snapshots))
        for snap in self.snapshots:
            w.u32(snap.instant)
            w.u8(snap.tree.k)
            w.u32(snap.tree.side)
            w.bitvec(snap.tree.T)
            w.bitvec(snap.tree.L)
            w.u32(len(snap.perm))
            for obj in snap.perm:
                w.u32(obj)
            w.bitvec(snap.Q)
            w.u32(len(snap.absent))
            for dense in sorted(snap.absent):
                info = snap.absent[dense]
                w.u32(dense)
                if info.cell is None:
                    w.u8(1)
                    w.u32(0)
                    w.u32(0)
                else:
                    w.u8(0)
                    w.u32(info.cell[0])
                    w.u32(info.cell[1])
                w.i64(info.instant)
        snapshots = w.take()

        w = _Writer()
        if self.mode == MODE_SCDC:
            offsets = []
            offset = 0
            for dense in range(self.num_objects):
                for blob in self._slices[dense]:
                    offset += len(blob)
                    offsets.append(offset)
            w.u64(len(offsets))
            for off in offsets:
                w.u64(off)
            for dense in range(self.num_objects):
                for blob in self._slices[dense]:
                    w.raw(blob)
        else:
            max_sym = 2
            for dense in range(self.num_objects):
                for seq in self._slices[dense]:
                    for v in seq:
                        if v > max_sym:
                            max_sym = v
            width = 1 if max_sym < 0x100 else 2 if max_sym < 0x10000 else 4
            w.u8(width)
            w.u64(self.num_objects * self._num_period_slots)
            for dense in range(self.num_objects):
                for seq in self._slices[dense]:
                    w.u32(len(seq))
            fmt = {1: "B", 2: "H", 4: "I"}[width]
            for dense in range(self.num_objects):
                for seq in self._slices[dense]:
                    if seq:
                        w.raw(struct.pack(f"<{len(seq)}{fmt}", *seq))
        logs = w.take()

        w = _Writer()
        if self._grammar is not None:
            g = self._grammar
            w.u32(g.terminal_bound)
            w.u32(len(g.rules))
            for a, b in g.rules:
                w.u32(a)
                w.u32(b)
            w.dac(g.tspan_dac)
            w.dac(g.coords_dac)
        grammar = w.take()

        return {"header": header, "dict": dictionary, "snapshots": snapshots,
                "logs": logs, "grammar": grammar}

    def to_bytes(self) -> bytes:
        sections = self._serialize_sections()
        out = bytearray()
        out += MAGIC
        out += struct.pack("<H", VERSION)
        for name in ("header", "dict", "snapshots", "logs", "grammar"):
            payload = sections[name]
            out += struct.pack("<Q", len(payload))
            out += payload
        return bytes(out)

    def save(self, path: str) -> None:
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "TrajectoryIndex":
        r = _Reader(data)
        if r.raw(4) != MAGIC:
            raise FormatError("bad magic: not an index file")
        version = r.u16()
        if version != VERSION:
            raise FormatError(f"unsupported index version {version}")
        sections = {}
        for name in ("header", "dict", "snapshots", "logs", "grammar"):
            ln = r.u64()
            sections[name] = _Reader(r.raw(ln))

        h = sections["header"]
        grid_w = h.u32()
        grid_h = h.u32()
        num_objects = h.u32()
        num_instants = h.u32()
        period = h.u32()
        vmax = h.u32()
        mode = MODE_GRACT if h.u8() else MODE_SCDC
        k = h.u8()
        scdc_s = h.u8()
        dac_wt = h.u8()
        dac_wc = h.u8()
        perm_sample = h.u16()
        present_records = h.u64()
        num_period_slots = h.u32()

        d = sections["dict"]
        object_ids = []
        for _ in range(num_objects):
            ln = d.u16()
            object_ids.append(d.raw(ln).decode())

        sr = sections["snapshots"]
        nsnap = sr.u32()
        snapshots = []
        from .k2tree import K2Tree
        for _ in range(nsnap):
            instant = sr.u32()
            tk = sr.u8()
            side = sr.u32()
            T = sr.bitvec()
            L = sr.bitvec()
            tree = K2Tree(tk, side, grid_w, grid_h, T, L)
            nperm = sr.u32()
            perm = [sr.u32() for _ in range(nperm)]
            Q = sr.bitvec()
            nabs = sr.u32()
            absent = {}
            for _ in range(nabs):
                dense = sr.u32()
                never = sr.u8()
                x = sr.u32()
                y = sr.u32()
                inst = sr.i64()
                absent[dense] = AbsentInfo(None if never else (x, y), inst)
            snapshots.append(Snapshot(tree, perm, Q, absent, instant, perm_sample))

        lr = sections["logs"]
        nslices = num_objects * num_period_slots
        if mode == MODE_SCDC:
            noff = lr.u64()
            if noff != nslices:
                raise FormatError("log directory size mismatch")
            offsets = [lr.u64() for _ in range(noff)]
            blob = lr.rest()
            slices = []
            prev = 0
            flat = []
            for off in offsets:
                if off < prev or off > len(blob):
                    raise FormatError("corrupt log offsets")
                flat.append(bytes(blob[prev:off]))
                prev = off
            slices = [flat[d * num_period_slots:(d + 1) * num_period_slots]
                      for d in range(num_objects)]
        else:
            width = lr.u8()
            if width not in (1, 2, 4):
                raise FormatError("corrupt log symbol width")
            cnt = lr.u64()
            if cnt != nslices:
                raise FormatError("log directory size mismatch")
            lengths = [lr.u32() for _ in range(cnt)]
            fmt = {1: "B", 2: "H", 4: "I"}[width]
            flat = []
            for ln in lengths:
                raw = lr.raw(ln * width)
                flat.append(list(struct.unpack(f"<{ln}{fmt}", raw)) if ln else [])
            slices = [flat[d * num_period_slots:(d + 1) * num_period_slots]
                      for d in range(num_objects)]

        grammar = None
        if mode == MODE_GRACT:
            gr = sections["grammar"]
            bound = gr.u32()
            nrules = gr.u32()
            rules = [(gr.u32(), gr.u32()) for _ in range(nrules)]
            tspan_dac = gr.dac()
            coords_dac = gr.dac()
            grammar = Grammar(bound, rules, tspan_dac, coords_dac)

        return cls(grid_w=grid_w, grid_h=grid_h, num_instants=num_instants,
                   period=period, vmax=vmax, mode=mode, k=k, scdc_s=scdc_s,
                   dac_width_times=dac_wt, dac_width_coords=dac_wc,
                   perm_sample=perm_sample, present_records=present_records,
                   object_ids=object_ids, snapshots=snapshots, slices=slices,
                   grammar=grammar, num_period_slots=num_period_slots)

    @classmethod
    def load(cls, path: str) -> "TrajectoryIndex":
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())

    def stats_report(self) -> SizeReport:
        sections = self._serialize_sections()
        plain = 8 * self.present_records  # two 4-byte coordinates per record
        return SizeReport(
            mode=self.mode, period=self.period,
            header_bytes=len(sections["header"]) + len(MAGIC) + 2 + 5 * 8,
            dict_bytes=len(sections["dict"]),
            snapshot_bytes=len(sections["snapshots"]),
            log_bytes=len(sections["logs"]),
            grammar_bytes=len(sections["grammar"]),
            total_bytes=len(MAGIC) + 2 + 5 * 8 + sum(len(v) for v in sections.values()),
            plain_bytes=plain)


class _Writer:
    __slots__ = ("buf",)

    def __init__(self):
        self.buf = bytearray()

    def u8(self, v):
        self.buf += struct.pack("<B", v)

    def u16(self, v):
        self.buf += struct.pack("<H", v)

    def u32(self, v):
        self.buf += struct.pack("<I", v)

    def u64(self, v):
        self.buf += struct.pack("<Q", v)

    def i64(self, v):
        self.buf += struct.pack("<q", v)

    def raw(self, data):
        self.buf += data

    def bitvec(self, bv: BitVector):
        self.u64(len(bv))
        for word in bv.words:
            self.buf += struct.pack("<Q", word)

    def dac(self, d: DacSequence):
        self.u8(d.chunk_width)
        self.u64(d.count)
        self.u8(d.num_levels)
        for chunks, flags in zip(d.levels, d.flags):
            self.u64(len(chunks))
            self.raw(pack_fixed(chunks, d.chunk_width))
            self.bitvec(flags)

    def take(self) -> bytes:
        return bytes(self.buf)


class _Reader:
    __slots__ = ("data", "pos")

    def __init__(self, data):
        self.data = data
        self.pos = 0

    def raw(self, n) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("truncated index data")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return bytes(out)

    def rest(self) -> bytes:
        out = self.data[self.pos:]
        self.pos = len(self.data)
        return bytes(out)

    def u8(self):
        return struct.unpack("<B", self.raw(1))[0]

    def u16(self):
        return struct.unpack("<H", self.raw(2))[0]

    def u32(self):
        return struct.unpack("<I", self.raw(4))[0]

    def u64(self):
        return struct.unpack("<Q", self.raw(8))[0]

    def i64(self):
        return struct.unpack("<q", self.raw(8))[0]

    def bitvec(self) -> BitVector:
        length = self.u64()
        nwords = (length + 63) // 64
        words = list(struct.unpack(f"<{nwords}Q", self.raw(nwords * 8)))
        return BitVector.from_words(words, length)

    def dac(self) -> DacSequence:
        width = self.u8()
        count = self.u64()
        nlevels = self.u8()
        levels = []
        flags = []
        for _ in range(nlevels):
            n = self.u64()
            packed = self.raw((n * width + 7) // 8)
            levels.append(unpack_fixed(packed, width, n))
            flags.append(self.bitvec())
        return DacSequence(width, count, levels, flags)
