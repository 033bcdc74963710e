"""Absolute positions of every object at one instant.

A snapshot is a k2-tree of occupied cells plus an object permutation `perm`
grouped by leaf (in the levelwise order of the tree's last level), the
delimiter bitmap Q (1 = more objects follow in this leaf group, 0 = last),
and a table with the last known position/instant of every object that is
not present. Object-to-position lookups run through an inverse-permutation
scheme: the permutation is stored plainly and long cycles carry a shortcut
mark every `sample` steps, bounding a lookup to about `sample` steps.
"""

from __future__ import annotations

from typing import Mapping, NamedTuple, Optional

from .errors import UnknownObjectError, ValidationError
from .geometry import CellRect
from .k2tree import K2Tree
from .succinct import BitVector

Cell = tuple[int, int]


class AbsentInfo(NamedTuple):
    cell: Optional[Cell]
    instant: int


NEVER_SEEN = AbsentInfo(None, -1)


class Snapshot:
    __slots__ = ("tree", "perm", "Q", "absent", "instant",
                 "_rank_of", "_shortcuts", "_sample")

    def __init__(self, tree: K2Tree, perm: list[int], Q: BitVector,
                 absent: dict[int, AbsentInfo], instant: int, sample: int = 32):
        self.tree = tree
        self.perm = perm
        self.Q = Q
        self.absent = absent
        self.instant = instant
        self._sample = sample
        self._rank_of = {obj: r for r, obj in enumerate(sorted(perm))}
        self._shortcuts = self._build_shortcuts()

    @classmethod
    def build(cls, present: Mapping[int, Cell], absent: Mapping[int, AbsentInfo],
              grid_w: int, grid_h: int, instant: int = 0, k: int = 2,
              sample: int = 32) -> "Snapshot":
        overlap = present.keys() & absent.keys()
        if overlap:
            raise ValidationError(f"objects both present and absent: {sorted(overlap)[:5]}")
        cells: dict[Cell, list[int]] = {}
        for obj, cell in present.items():
            x, y = cell
            if not (0 <= x < grid_w and 0 <= y < grid_h):
                raise ValidationError(f"object {obj} at {cell} outside {grid_w}x{grid_h} grid")
            cells.setdefault(cell, []).append(obj)
        tree = K2Tree.build(cells.keys(), grid_w, grid_h, k)
        groups = sorted(cells.items(), key=lambda it: tree.leaf_ordinal(*it[0]))
        perm: list[int] = []
        q_bits: list[int] = []
        for _, objs in groups:
            objs.sort()
            perm.extend(objs)
            q_bits.extend([1] * (len(objs) - 1))
            q_bits.append(0)
        return cls(tree, perm, BitVector.from_bits(q_bits), dict(absent),
                   instant, sample)

    def _build_shortcuts(self) -> dict[int, int]:
        """Mark every `sample`-th step of long permutation cycles.

        A mark at position p points `sample` steps back along its cycle, so
        an inverse lookup never walks more than ~sample steps forward.
        """
        t = self._sample
        perm = self.perm
        rank_of = self._rank_of
        n = len(perm)
        shortcuts: dict[int, int] = {}
        seen = [False] * n
        for start in range(n):
            if seen[start]:
                continue
            cycle = []
            cur = start
            while not seen[cur]:
                seen[cur] = True
                cycle.append(cur)
                cur = rank_of[perm[cur]]
            if len(cycle) > t:
                for i in range(0, len(cycle), t):
                    shortcuts[cycle[i]] = cycle[i - t]
        return shortcuts

    def _perm_position(self, rank: int) -> int:
        """Position in perm holding the object whose present-rank is `rank`."""
        perm = self.perm
        rank_of = self._rank_of
        shortcuts = self._shortcuts
        y = rank
        for _ in range(self._sample + 1):
            if rank_of[perm[y]] == rank:
                return y
            if y in shortcuts:
                y = shortcuts[y]
                while rank_of[perm[y]] != rank:
                    y = rank_of[perm[y]]
                return y
            y = rank_of[perm[y]]
        raise AssertionError("inverse permutation walk exceeded its bound")

    # -- queries ----------------------------------------------------------

    def objects_in_cell(self, x: int, y: int) -> list[int]:
        ordinal = self.tree.leaf_ordinal(x, y)
        if ordinal is None:
            return []
        start = 1 if ordinal == 1 else self.Q.select0(ordinal - 1) + 1
        end = self.Q.select0(ordinal)
        return self.perm[start - 1:end]

    def position_of(self, obj: int) -> Optional[Cell]:
        rank = self._rank_of.get(obj)
        if rank is None:
            if obj in self.absent:
                return None
            raise UnknownObjectError(f"object {obj} not known to this snapshot")
        pos = self._perm_position(rank)
        group = self.Q.rank0(pos) + 1
        return self.tree.cell_of_leaf(group)

    def objects_in_region(self, rect: CellRect) -> list[tuple[int, Cell]]:
        out: list[tuple[int, Cell]] = []
        for x, y, ordinal in self.tree.report_region(rect):
            start = 1 if ordinal == 1 else self.Q.select0(ordinal - 1) + 1
            end = self.Q.select0(ordinal)
            for obj in self.perm[start - 1:end]:
                out.append((obj, (x, y)))
        return out

    def absent_info(self, obj: int) -> Optional[AbsentInfo]:
        info = self.absent.get(obj)
        if info is None:
            if obj not in self._rank_of:
                raise UnknownObjectError(f"object {obj} not known to this snapshot")
            return None
        return info

    @property
    def present_count(self) -> int:
        return len(self.perm)
