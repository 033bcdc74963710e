"""Cell rectangles and distance helpers shared by trees, queries, and MBRs.

Rectangles are inclusive on all four borders.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CellRect:
    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError(f"degenerate rectangle {self}")

    def contains_point(self, x: int, y: int) -> bool:
        return self.x1 <= x <= self.x2 and self.y1 <= y <= self.y2

    def intersects(self, other: "CellRect") -> bool:
        return (self.x1 <= other.x2 and other.x1 <= self.x2
                and self.y1 <= other.y2 and other.y1 <= self.y2)

    def clipped(self, width: int, height: int) -> "CellRect | None":
        """Intersection with the grid [0, width) x [0, height), or None."""
        x1 = max(self.x1, 0)
        y1 = max(self.y1, 0)
        x2 = min(self.x2, width - 1)
        y2 = min(self.y2, height - 1)
        if x1 > x2 or y1 > y2:
            return None
        return CellRect(x1, y1, x2, y2)

    def translated(self, dx: int, dy: int) -> "CellRect":
        return CellRect(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)


def chebyshev_to_rect(x: int, y: int, rect: CellRect) -> int:
    """Chebyshev distance from a cell to the nearest cell of a rectangle."""
    dx = max(rect.x1 - x, 0, x - rect.x2)
    dy = max(rect.y1 - y, 0, y - rect.y2)
    return max(dx, dy)
