import random

import pytest

from gract.errors import RangeError, ValidationError
from gract.geometry import CellRect
from gract.k2tree import K2Tree


def random_points(rng, n, w, h):
    return {(rng.randrange(w), rng.randrange(h)) for _ in range(n)}


class TestBuild:
    def test_empty_matrix_has_root_block_of_zeros(self):
        t = K2Tree.build([], 8, 8, 2)
        assert list(t.T) == [0, 0, 0, 0]
        assert len(t.L) == 0

    def test_single_point(self):
        t = K2Tree.build([(0, 0)], 4, 4, 2)
        assert t.contains(0, 0)
        assert not t.contains(3, 3)

    def test_point_out_of_bounds_rejected(self):
        with pytest.raises(ValidationError):
            K2Tree.build([(4, 0)], 4, 4, 2)

    def test_block_multiple_invariant(self):
        rng = random.Random(0)
        for k in (2, 3):
            pts = random_points(rng, 30, 50, 40)
            t = K2Tree.build(pts, 50, 40, k)
            assert (len(t.T) + len(t.L)) % (k * k) == 0

    def test_side_is_power_of_k(self):
        t = K2Tree.build([], 36775 % 100, 2723 % 100, 2)
        side = t.side
        while side % 2 == 0:
            side //= 2
        assert side == 1


class TestNavigation:
    def test_child_of_first_one_bit(self):
        t = K2Tree.build([(0, 0)], 4, 4, 2)
        assert list(t.T) == [1, 0, 0, 0]
        assert t.child(0) == 4
        # descending twice from the root reaches a set leaf
        pos = t.child(0)
        assert pos >= len(t.T)
        assert t.L[pos - len(t.T)] == 1

    def test_child_requires_one_bit(self):
        t = K2Tree.build([(0, 0)], 4, 4, 2)
        with pytest.raises(ValidationError):
            t.child(1)

    def test_child_stays_in_bounds(self):
        rng = random.Random(1)
        t = K2Tree.build(random_points(rng, 40, 64, 64), 64, 64, 2)
        total = len(t.T) + len(t.L)
        for p in range(len(t.T)):
            if t.T[p]:
                assert t.child(p) < total

    def test_parent_of_first_child_block(self):
        t = K2Tree.build([(0, 0)], 4, 4, 2)
        for p in range(4, 8):
            block, ordinal = t.parent(p)
            assert block + ordinal == 0  # the first (only) 1 bit of T

    def test_parent_of_root_block(self):
        t = K2Tree.build([(0, 0)], 4, 4, 2)
        assert t.parent(0) is None

    def test_child_ordinal_range(self):
        rng = random.Random(2)
        t = K2Tree.build(random_points(rng, 60, 64, 64), 64, 64, 2)
        for p in range(4, len(t.T) + len(t.L)):
            parent = t.parent(p)
            assert parent is not None
            assert 0 <= parent[1] < 4


class TestLeafMapping:
    def test_single_point_leaf(self):
        t = K2Tree.build([(5, 3)], 8, 8, 2)
        assert t.cell_of_leaf(1) == (5, 3)
        assert t.leaf_ordinal(5, 3) == 1

    def test_zero_cell_has_no_ordinal(self):
        t = K2Tree.build([(5, 3)], 8, 8, 2)
        assert t.leaf_ordinal(0, 0) is None

    def test_out_of_range_cell(self):
        t = K2Tree.build([(5, 3)], 8, 8, 2)
        with pytest.raises(RangeError):
            t.leaf_ordinal(8, 0)

    def test_ordinals_form_permutation(self):
        rng = random.Random(3)
        pts = random_points(rng, 80, 64, 64)
        t = K2Tree.build(pts, 64, 64, 2)
        ordinals = sorted(t.leaf_ordinal(x, y) for x, y in pts)
        assert ordinals == list(range(1, len(pts) + 1))

    def test_mutual_inverse(self):
        rng = random.Random(4)
        pts = random_points(rng, 70, 100, 90)
        t = K2Tree.build(pts, 100, 90, 2)
        for x, y in pts:
            assert t.cell_of_leaf(t.leaf_ordinal(x, y)) == (x, y)

    def test_ordinal_out_of_range(self):
        t = K2Tree.build([(1, 1)], 4, 4, 2)
        with pytest.raises(RangeError):
            t.cell_of_leaf(2)


class TestRegionReport:
    def test_full_matrix_returns_everything(self):
        rng = random.Random(5)
        pts = random_points(rng, 50, 64, 64)
        t = K2Tree.build(pts, 64, 64, 2)
        found = {(x, y) for x, y, _ in t.report_region(CellRect(0, 0, 63, 63))}
        assert found == pts

    def test_region_missing_all_points(self):
        t = K2Tree.build([(60, 60)], 64, 64, 2)
        assert t.report_region(CellRect(0, 0, 10, 10)) == []

    @pytest.mark.parametrize("size,k", [(64, 2), (64, 3), (256, 2)])
    def test_matches_boolean_matrix_oracle(self, size, k):
        rng = random.Random(size + k)
        pts = random_points(rng, size, size, size)
        matrix = [[False] * size for _ in range(size)]
        for x, y in pts:
            matrix[y][x] = True
        t = K2Tree.build(pts, size, size, k)
        for y in range(size):
            for x in range(size):
                assert t.contains(x, y) == matrix[y][x]
        for _ in range(100):
            x1 = rng.randrange(size)
            y1 = rng.randrange(size)
            rect = CellRect(x1, y1, min(size - 1, x1 + rng.randrange(size // 2)),
                            min(size - 1, y1 + rng.randrange(size // 2)))
            expected = {(x, y) for x, y in pts if rect.contains_point(x, y)}
            got = {(x, y) for x, y, _ in t.report_region(rect)}
            assert got == expected
