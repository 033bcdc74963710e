"""Succinct binary-matrix tree with rank/select navigation.

The matrix is recursively split into k x k submatrices ordered left-to-right
then top-to-bottom ((x, y) = (column, row)). Internal levels live in bitmap
T, the last level (original cells) in bitmap L; a node's children start at
rank1(T, p + 1) * k^2, counting positions across T:L.

The matrix side is padded to the smallest power of k covering the logical
width and height; all queries clip to the logical bounds.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Optional

from .errors import RangeError, ValidationError
from .geometry import CellRect
from .succinct import BitVector

Cell = tuple[int, int]


class K2Tree:
    __slots__ = ("k", "side", "width", "height", "T", "L")

    def __init__(self, k: int, side: int, width: int, height: int,
                 T: BitVector, L: BitVector):
        self.k = k
        self.side = side
        self.width = width
        self.height = height
        self.T = T
        self.L = L

    @classmethod
    def build(cls, points: Iterable[Cell], width: int, height: int,
              k: int = 2) -> "K2Tree":
        if k < 2:
            raise ValidationError("subdivision arity k must be >= 2")
        if width < 1 or height < 1:
            raise ValidationError("grid must be at least 1x1")
        pts = sorted(set(points))
        for x, y in pts:
            if not (0 <= x < width and 0 <= y < height):
                raise ValidationError(f"point ({x}, {y}) outside {width}x{height} grid")
        side = k
        while side < max(width, height):
            side *= k
        t_bits: list[int] = []
        l_bits: list[int] = []
        kk = k * k
        level = [(0, 0, side, pts)]
        while level:
            nxt = []
            for x0, y0, size, node_pts in level:
                sub = size // k
                buckets: dict[int, list[Cell]] = defaultdict(list)
                for x, y in node_pts:
                    buckets[((y - y0) // sub) * k + (x - x0) // sub].append((x, y))
                for o in range(kk):
                    hit = o in buckets
                    if sub == 1:
                        l_bits.append(1 if hit else 0)
                    else:
                        t_bits.append(1 if hit else 0)
                        if hit:
                            nxt.append((x0 + (o % k) * sub, y0 + (o // k) * sub,
                                        sub, buckets[o]))
            level = nxt
        return cls(k, side, width, height,
                   BitVector.from_bits(t_bits), BitVector.from_bits(l_bits))

    # -- navigation ------------------------------------------------------

    def _bit(self, p: int) -> int:
        """Bit at position p of the concatenation T:L."""
        nt = len(self.T)
        return self.T[p] if p < nt else self.L[p - nt]

    def child(self, p: int) -> int:
        """Start of the child block of the 1-bit at position p of T.

        Positions at or past |T| address L at (position - |T|).
        """
        if self.T[p] != 1:
            raise ValidationError(f"position {p} is a 0 bit; it has no children")
        return self.T.rank1(p + 1) * self.k * self.k

    def parent(self, p: int) -> Optional[tuple[int, int]]:
        """(block start, within-block ordinal) of the parent bit of p.

        The parent's own position is the sum of the two. Positions inside
        the root block have no parent and yield None.
        """
        kk = self.k * self.k
        if p < kk:
            return None
        q = self.T.select1(p // kk) - 1
        return q - q % kk, q % kk

    def contains(self, x: int, y: int) -> bool:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise RangeError(f"cell ({x}, {y}) outside {self.width}x{self.height} grid")
        return self._find_leaf(x, y) is not None

    def _find_leaf(self, x: int, y: int) -> Optional[int]:
        """0-based L position of cell (x, y) if the cell is 1, else None."""
        k = self.k
        size = self.side // k
        p = (y // size) * k + x // size
        nt = len(self.T)
        while True:
            if p >= nt:
                lp = p - nt
                return lp if self.L[lp] else None
            if not self.T[p]:
                return None
            x %= size
            y %= size
            size //= k
            p = self.T.rank1(p + 1) * k * k + (y // size) * k + x // size

    def leaf_ordinal(self, x: int, y: int) -> Optional[int]:
        """1-based ordinal of cell (x, y) among the 1 bits of L, else None."""
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise RangeError(f"cell ({x}, {y}) outside {self.width}x{self.height} grid")
        lp = self._find_leaf(x, y)
        if lp is None:
            return None
        return self.L.rank1(lp + 1)

    def cell_of_leaf(self, ordinal: int) -> Cell:
        """Cell coordinates of the 1-leaf with the given 1-based ordinal."""
        if ordinal < 1 or ordinal > self.L.ones:
            raise RangeError(f"leaf ordinal {ordinal} out of range")
        kk = self.k * self.k
        p = len(self.T) + self.L.select1(ordinal) - 1
        x = y = 0
        scale = 1
        while True:
            o = p % kk
            x += (o % self.k) * scale
            y += (o // self.k) * scale
            if p < kk:
                return (x, y)
            p = self.T.select1(p // kk) - 1
            scale *= self.k

    def report_region(self, rect: CellRect) -> list[tuple[int, int, int]]:
        """All 1-cells inside rect as (x, y, leaf ordinal), pruned descent."""
        clipped = rect.clipped(self.width, self.height)
        if clipped is None:
            return []
        out: list[tuple[int, int, int]] = []
        k = self.k
        kk = k * k
        nt = len(self.T)
        sub = self.side // k
        stack = [(o, (o % k) * sub, (o // k) * sub, sub)
                 for o in range(kk - 1, -1, -1)]
        while stack:
            p, x0, y0, size = stack.pop()
            if (x0 > clipped.x2 or y0 > clipped.y2
                    or x0 + size - 1 < clipped.x1 or y0 + size - 1 < clipped.y1):
                continue
            if p >= nt:
                lp = p - nt
                if self.L[lp]:
                    out.append((x0, y0, self.L.rank1(lp + 1)))
                continue
            if not self.T[p]:
                continue
            base = self.T.rank1(p + 1) * kk
            sub = size // k
            for o in range(kk - 1, -1, -1):
                stack.append((base + o, x0 + (o % k) * sub, y0 + (o // k) * sub, sub))
        return out

    def all_points(self) -> list[Cell]:
        rect = CellRect(0, 0, self.width - 1, self.height - 1)
        return [(x, y) for x, y, _ in self.report_region(rect)]
