import pytest
from hypothesis import given
from hypothesis import strategies as st

from gract.errors import FormatError
from gract.movement import (AbsReappear, Move, RelReappear, apply_event,
                            events_to_ints, ints_to_events, spiral_decode,
                            spiral_encode)


class TestSpiral:
    def test_origin(self):
        assert spiral_encode(0, 0) == 0
        assert spiral_decode(0) == (0, 0)

    def test_forced_anchors(self):
        assert spiral_encode(0, 1) == 7
        assert spiral_encode(1, 1) == 8
        assert spiral_encode(2, 1) == 9
        assert spiral_decode(7) == (0, 1)
        assert spiral_decode(8) == (1, 1)
        assert spiral_decode(9) == (2, 1)

    def test_ring_one_layout(self):
        ring = [spiral_decode(c) for c in range(1, 9)]
        assert ring == [(1, 0), (1, -1), (0, -1), (-1, -1),
                        (-1, 0), (-1, 1), (0, 1), (1, 1)]

    def test_exhaustive_roundtrip_radius_64(self):
        seen = {}
        for dx in range(-64, 65):
            for dy in range(-64, 65):
                code = spiral_encode(dx, dy)
                assert spiral_decode(code) == (dx, dy)
                assert code not in seen
                seen[code] = (dx, dy)
        # the enumeration is dense over full rings
        assert sorted(seen) == list(range(129 * 129))

    def test_ring_monotonicity(self):
        prev_max = 0
        for r in range(1, 65):
            codes = [spiral_encode(dx, dy)
                     for dx in range(-r, r + 1)
                     for dy in range(-r, r + 1)
                     if max(abs(dx), abs(dy)) == r]
            assert min(codes) > prev_max
            prev_max = max(codes)


class TestEventCodec:
    def test_moves_shift_by_two(self):
        assert events_to_ints([Move(8), Move(9)]) == [10, 11]

    def test_relative_reappearance(self):
        assert events_to_ints([RelReappear(3, 5)]) == [0, 3, 7]

    def test_absolute_reappearance_roundtrip(self):
        assert ints_to_events([1, 2, 36775, 0]) == [AbsReappear(2, 36775, 0)]

    def test_single_move(self):
        assert ints_to_events([10]) == [Move(8)]

    def test_truncated_payload(self):
        with pytest.raises(FormatError):
            ints_to_events([0])
        with pytest.raises(FormatError):
            ints_to_events([1, 5, 3])

    @given(st.lists(st.one_of(
        st.builds(Move, st.integers(0, 500)),
        st.builds(RelReappear, st.integers(0, 1000), st.integers(0, 500)),
        st.builds(AbsReappear, st.integers(0, 1000),
                  st.integers(0, 40000), st.integers(0, 40000)),
    ), max_size=60))
    def test_serialization_bijection(self, events):
        assert ints_to_events(events_to_ints(events)) == events


class TestApplyEvent:
    def test_move_northeast(self):
        assert apply_event(((0, 2), 0), Move(8)) == ((1, 3), 1)
        assert apply_event(((6, 6), 4), Move(8)) == ((7, 7), 5)

    def test_absolute_jump(self):
        assert apply_event(((5, 5), 3), AbsReappear(4, 9, 9)) == ((9, 9), 8)

    def test_relative_jump(self):
        cell, t = apply_event(((2, 2), 10), RelReappear(2, 8))
        assert cell == (3, 3)
        assert t == 13
