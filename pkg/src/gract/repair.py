"""Re-Pair compression over movement logs, with enriched rule metadata.

The compressor repeatedly replaces the most frequent adjacent symbol pair
with a fresh nonterminal until no pair occurs twice. Frequency uses
non-overlapping left-to-right occurrence counting, ties break toward the
lexicographically smallest (left, right) pair, and pairs never span stream
boundaries or cover positions flagged as unpairable (reappearance markers
and their payloads stay intact so every rule expands to plain movements).

After compression each rule is enriched with the number of instants it
covers, the net displacement of its expansion, and the minimum bounding
rectangle of every cell visited (relative to a start at (0, 0), start
included). Enriched values are stored behind two DAC sequences - one for
the time spans, one for the six zigzagged coordinates per rule - so queries
can read them without expanding anything.
"""

from __future__ import annotations

import heapq
from typing import NamedTuple, Optional, Sequence

from .errors import ValidationError
from .movement import ABS_MARKER, MOVE_SHIFT, REL_MARKER, spiral_decode
from .succinct import DacSequence, zigzag, unzigzag


class RuleMeta(NamedTuple):
    tspan: int
    disp: tuple[int, int]
    mbr: tuple[int, int, int, int]


class Grammar:
    """Re-Pair rules plus DAC-backed per-rule metadata.

    Symbols below `terminal_bound` are terminals (log integers); nonterminal
    i is the symbol `terminal_bound + i` and its body is `rules[i]`. Bodies
    only reference terminals or strictly smaller nonterminals.
    """

    __slots__ = ("terminal_bound", "rules", "tspan_dac", "coords_dac")

    def __init__(self, terminal_bound: int, rules: list[tuple[int, int]],
                 tspan_dac: Optional[DacSequence] = None,
                 coords_dac: Optional[DacSequence] = None):
        self.terminal_bound = terminal_bound
        self.rules = rules
        self.tspan_dac = tspan_dac
        self.coords_dac = coords_dac

    def is_terminal(self, sym: int) -> bool:
        return sym < self.terminal_bound

    def expand(self, sym: int) -> list[int]:
        """Full terminal expansion of a symbol."""
        if sym < 0 or sym >= self.terminal_bound + len(self.rules):
            raise ValidationError(f"unknown symbol {sym}")
        out: list[int] = []
        stack = [sym]
        bound = self.terminal_bound
        rules = self.rules
        while stack:
            s = stack.pop()
            if s < bound:
                out.append(s)
            else:
                a, b = rules[s - bound]
                stack.append(b)
                stack.append(a)
        return out

    @property
    def enriched(self) -> bool:
        return self.tspan_dac is not None

    def rule_meta(self, sym: int) -> RuleMeta:
        """Time span, net displacement, and MBR of a symbol, no expansion."""
        if sym < self.terminal_bound:
            if sym in (REL_MARKER, ABS_MARKER):
                raise ValidationError(
                    f"reserved codeword {sym} carries no movement metadata")
            dx, dy = spiral_decode(sym - MOVE_SHIFT)
            return RuleMeta(1, (dx, dy),
                            (min(dx, 0), min(dy, 0), max(dx, 0), max(dy, 0)))
        idx = sym - self.terminal_bound
        if idx >= len(self.rules):
            raise ValidationError(f"unknown symbol {sym}")
        if not self.enriched:
            raise ValidationError("grammar is not enriched")
        base = 6 * idx
        c = [unzigzag(self.coords_dac.access(base + i)) for i in range(6)]
        return RuleMeta(self.tspan_dac.access(idx), (c[0], c[1]),
                        (c[2], c[3], c[4], c[5]))


def enrich(grammar: Grammar, width_times: int = 8, width_coords: int = 8) -> Grammar:
    """Attach per-rule time span, displacement, and MBR metadata in place.

    Computed bottom-up: a movement terminal spans one instant and its box
    covers {(0,0), displacement}; a rule (a, b) sums spans and displacements
    and unions b's box translated by a's displacement.
    """
    bound = grammar.terminal_bound
    n = len(grammar.rules)
    tspans = [0] * n
    boxes = [(0, 0, 0, 0, 0, 0)] * n  # dx, dy, x1, y1, x2, y2

    def meta_of(sym: int) -> tuple[int, int, int, int, int, int, int]:
        if sym < bound:
            if sym in (REL_MARKER, ABS_MARKER):
                raise ValidationError(
                    "reappearance codeword inside a rule body; such positions "
                    "must be excluded from pairing")
            dx, dy = spiral_decode(sym - MOVE_SHIFT)
            return (1, dx, dy, min(dx, 0), min(dy, 0), max(dx, 0), max(dy, 0))
        i = sym - bound
        t = tspans[i]
        dx, dy, x1, y1, x2, y2 = boxes[i]
        return (t, dx, dy, x1, y1, x2, y2)

    for i, (a, b) in enumerate(grammar.rules):
        ta, dxa, dya, ax1, ay1, ax2, ay2 = meta_of(a)
        tb, dxb, dyb, bx1, by1, bx2, by2 = meta_of(b)
        tspans[i] = ta + tb
        boxes[i] = (dxa + dxb, dya + dyb,
                    min(ax1, bx1 + dxa), min(ay1, by1 + dya),
                    max(ax2, bx2 + dxa), max(ay2, by2 + dya))

    coords: list[int] = []
    for dx, dy, x1, y1, x2, y2 in boxes:
        coords.extend((zigzag(dx), zigzag(dy), zigzag(x1),
                       zigzag(y1), zigzag(x2), zigzag(y2)))
    grammar.tspan_dac = DacSequence.encode(tspans, width_times)
    grammar.coords_dac = DacSequence.encode(coords, width_coords)
    return grammar


def _greedy_pair_count(positions: list[int], nxt: list[int]) -> int:
    """Non-overlapping count of an equal-symbol pair from its sorted
    adjacency positions: each maximal run of r adjacencies holds
    floor((r + 1) / 2) occurrences."""
    total = 0
    i = 0
    n = len(positions)
    while i < n:
        j = i
        while j + 1 < n and nxt[positions[j]] == positions[j + 1]:
            j += 1
        total += (j - i + 2) // 2
        i = j + 1
    return total


def repair_compress(
    streams: Sequence[Sequence[int]],
    unpairable: Optional[Sequence[set[int]]] = None,
) -> tuple[Grammar, list[list[int]]]:
    """Compress integer streams with one shared grammar.

    `unpairable[i]` holds positions of stream i that no pair may cover.
    Returns the grammar and the compressed form of every stream; expanding
    each result under the grammar restores the corresponding input exactly.
    """
    sym: list[int] = []
    nxt: list[int] = []
    prv: list[int] = []
    pairable: list[bool] = []
    heads: list[int] = []
    max_terminal = 1
    for si, stream in enumerate(streams):
        bad = unpairable[si] if unpairable is not None else ()
        base = len(sym)
        heads.append(base if len(stream) else -1)
        last = len(stream) - 1
        for j, v in enumerate(stream):
            if v < 0:
                raise ValidationError("log integers are naturals")
            if v > max_terminal:
                max_terminal = v
            sym.append(v)
            pairable.append(j not in bad)
            prv.append(base + j - 1 if j > 0 else -1)
            nxt.append(base + j + 1 if j < last else -1)
    terminal_bound = max_terminal + 1

    occ: dict[tuple[int, int], set[int]] = {}
    for p in range(len(sym)):
        q = nxt[p]
        if q != -1 and pairable[p] and pairable[q]:
            occ.setdefault((sym[p], sym[q]), set()).add(p)

    # Heap of candidate pairs keyed by (-count, pair). Counts are adjacency
    # counts, which for equal pairs only upper-bound the non-overlapping
    # count; those get re-pushed with their exact count when they surface.
    # Existing pairs only ever lose adjacencies (new adjacencies always
    # involve the freshly created nonterminal), so a matching set size
    # proves an entry is current.
    heap: list[tuple[int, int, int, bool, int]] = []
    for (a, b), posset in occ.items():
        if len(posset) >= 2:
            heap.append((-len(posset), a, b, False, len(posset)))
    heapq.heapify(heap)
    push = heapq.heappush
    pop = heapq.heappop

    rules: list[tuple[int, int]] = []
    next_id = terminal_bound

    def occ_del(pair: tuple[int, int], p: int) -> None:
        s = occ.get(pair)
        if s is None or p not in s:
            return
        s.remove(p)
        n = len(s)
        if n >= 2:
            push(heap, (-n, pair[0], pair[1], False, n))
        elif n == 0:
            del occ[pair]

    def occ_add(pair: tuple[int, int], p: int) -> None:
        s = occ.setdefault(pair, set())
        s.add(p)
        n = len(s)
        if n >= 2:
            push(heap, (-n, pair[0], pair[1], False, n))

    while heap:
        negcnt, a, b, exact, stamp = pop(heap)
        posset = occ.get((a, b))
        cur = len(posset) if posset is not None else 0
        if cur != stamp or cur < 2:
            continue
        positions = sorted(posset)
        if a == b:
            g = _greedy_pair_count(positions, nxt)
            if not exact:
                claimed = -negcnt
                if g < claimed:
                    if g >= 2:
                        push(heap, (-g, a, b, True, cur))
                    continue
            elif g != -negcnt:
                continue
            if g < 2:
                continue

        new_sym = next_id
        next_id += 1
        rules.append((a, b))
        for p in positions:
            if sym[p] != a:
                continue
            q = nxt[p]
            if q == -1 or sym[q] != b:
                continue
            x = prv[p]
            y = nxt[q]
            if x != -1 and pairable[x]:
                occ_del((sym[x], a), x)
            occ_del((a, b), p)
            if y != -1 and pairable[y]:
                occ_del((b, sym[y]), q)
            sym[p] = new_sym
            sym[q] = -1
            nxt[p] = y
            if y != -1:
                prv[y] = p
            if x != -1 and pairable[x]:
                occ_add((sym[x], new_sym), x)
            if y != -1 and pairable[y]:
                occ_add((new_sym, sym[y]), p)

    compressed: list[list[int]] = []
    for head in heads:
        seq: list[int] = []
        p = head
        while p != -1:
            seq.append(sym[p])
            p = nxt[p]
        compressed.append(seq)
    return Grammar(terminal_bound, rules), compressed
