"""Relative-movement model: spiral codes, log events, and their wire form.

A movement between consecutive instants is a single natural number: cells
around the previous position are enumerated along a clockwise square spiral
(0 is "stay put", ring 1 holds codes 1-8, ring 2 codes 9-24, ...). Objects
that stop emitting produce reappearance events instead, carrying the length
of the silent gap plus either a relative movement or absolute coordinates.

On the wire a stream of events is a stream of naturals: codewords 0 and 1
are reserved for relative/absolute reappearances and plain movements are
stored shifted by 2 so the alphabet stays dense.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import Union

from .errors import FormatError

REL_MARKER = 0
ABS_MARKER = 1
MOVE_SHIFT = 2

Cell = tuple[int, int]


def spiral_encode(dx: int, dy: int) -> int:
    """Index of displacement (dx, dy) along the canonical spiral.

    Ring r (Chebyshev radius r) starts at (r, r-1) with code (2r-1)^2 and
    winds clockwise with x pointing East and y pointing North: down the East
    edge, left along the South edge, up the West edge, right along the North
    edge, ending at the (r, r) corner.
    """
    r = max(abs(dx), abs(dy))
    if r == 0:
        return 0
    base = (2 * r - 1) ** 2
    if dx == r and dy < r:
        off = (r - 1) - dy
    elif dy == -r and dx < r:
        off = 2 * r + (r - 1) - dx
    elif dx == -r and dy > -r:
        off = 4 * r + (r - 1) + dy
    else:  # dy == r and dx > -r
        off = 6 * r + (r - 1) + dx
    return base + off


def spiral_decode(code: int) -> Cell:
    """Inverse of :func:`spiral_encode`."""
    if code < 0:
        raise ValueError("spiral codes are naturals")
    if code == 0:
        return (0, 0)
    r = (isqrt(code) + 1) // 2
    off = code - (2 * r - 1) ** 2
    edge, pos = divmod(off, 2 * r)
    if edge == 0:
        return (r, r - 1 - pos)
    if edge == 1:
        return (r - 1 - pos, -r)
    if edge == 2:
        return (-r, -r + 1 + pos)
    return (-r + 1 + pos, r)


def chebyshev(dx: int, dy: int) -> int:
    return max(abs(dx), abs(dy))


@dataclass(frozen=True)
class Move:
    """One-instant relative movement, as a spiral code."""
    code: int


@dataclass(frozen=True)
class RelReappear:
    """Reappearance after `gap` silent instants, relative to the last cell."""
    gap: int
    code: int


@dataclass(frozen=True)
class AbsReappear:
    """Reappearance after `gap` silent instants at absolute cell (x, y)."""
    gap: int
    x: int
    y: int


LogEvent = Union[Move, RelReappear, AbsReappear]


def events_to_ints(events: list[LogEvent]) -> list[int]:
    """Serialize events to the natural-integer log alphabet."""
    out: list[int] = []
    for e in events:
        if isinstance(e, Move):
            out.append(e.code + MOVE_SHIFT)
        elif isinstance(e, RelReappear):
            out.extend((REL_MARKER, e.gap, e.code + MOVE_SHIFT))
        elif isinstance(e, AbsReappear):
            out.extend((ABS_MARKER, e.gap, e.x, e.y))
        else:
            raise TypeError(f"not a log event: {e!r}")
    return out


def ints_to_events(ints: list[int]) -> list[LogEvent]:
    """Inverse of :func:`events_to_ints`."""
    events: list[LogEvent] = []
    i = 0
    n = len(ints)
    while i < n:
        v = ints[i]
        if v == REL_MARKER:
            if i + 3 > n:
                raise FormatError("truncated relative reappearance")
            events.append(RelReappear(ints[i + 1], ints[i + 2] - MOVE_SHIFT))
            i += 3
        elif v == ABS_MARKER:
            if i + 4 > n:
                raise FormatError("truncated absolute reappearance")
            events.append(AbsReappear(ints[i + 1], ints[i + 2], ints[i + 3]))
            i += 4
        else:
            events.append(Move(v - MOVE_SHIFT))
            i += 1
    return events


def apply_event(state: tuple[Cell, int], event: LogEvent) -> tuple[Cell, int]:
    """Advance an (cell, instant) state by one log event."""
    (x, y), t = state
    if isinstance(event, Move):
        dx, dy = spiral_decode(event.code)
        return (x + dx, y + dy), t + 1
    if isinstance(event, RelReappear):
        dx, dy = spiral_decode(event.code)
        return (x + dx, y + dy), t + event.gap + 1
    if isinstance(event, AbsReappear):
        return (event.x, event.y), t + event.gap + 1
    raise TypeError(f"not a log event: {event!r}")
