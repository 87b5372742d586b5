import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mctd.errors import CapacityError, ValidationError
from mctd.partition import (
    DyadicCube,
    DyadicInterval,
    Partition,
    PartitionTree,
    enumerate_partitions,
    enumerate_trees,
    intersect,
    interval_index,
    partition_count,
    partition_to_tree,
    tree_to_partition,
)


class TestInterval:
    def test_contains_half_open(self):
        iv = DyadicInterval(2, 1)  # [0, 1/4)
        assert iv.contains(0.0) and iv.contains(0.2499)
        assert not iv.contains(0.25)

    def test_last_interval_closed_at_one(self):
        iv = DyadicInterval(2, 4)
        assert iv.contains(1.0)

    def test_index_bounds_validated(self):
        with pytest.raises(ValidationError):
            DyadicInterval(1, 3)
        with pytest.raises(CapacityError):
            DyadicInterval(40, 1)

    @given(st.floats(min_value=0.0, max_value=1.0), st.integers(0, 12))
    def test_index_locates_containing_interval(self, x, level):
        k = interval_index(x, level)
        assert k is not None
        assert DyadicInterval(level, k + 1).contains(x)

    def test_index_outside_unit_interval(self):
        assert interval_index(-0.1, 3) is None
        assert interval_index(1.1, 3) is None


class TestCube:
    def test_root_children_are_the_four_quadrants(self):
        kids = DyadicCube.root(2).children()
        assert len(kids) == 4
        assert {k.indices for k in kids} == {(1, 1), (1, 2), (2, 1), (2, 2)}
        assert all(k.level == 1 for k in kids)

    def test_children_index_doubling(self):
        kids = DyadicCube(1, (1, 1)).children()
        assert {k.indices for k in kids} == {(1, 1), (1, 2), (2, 1), (2, 2)}
        assert all(k.level == 2 for k in kids)

    def test_children_measures_sum_to_parent(self):
        cube = DyadicCube(3, (2, 5))
        assert sum(c.measure for c in cube.children()) == pytest.approx(
            cube.measure, rel=1e-15
        )

    def test_parent_inverts_children(self):
        cube = DyadicCube(4, (7, 12))
        for child in cube.children():
            assert child.parent() == cube

    @given(st.integers(0, 8), st.integers(0, 6), st.data())
    def test_flat_index_roundtrip(self, level, _unused, data):
        side = 1 << level
        indices = tuple(
            data.draw(st.integers(1, side)) for _ in range(4)
        )
        cube = DyadicCube(level, indices)
        assert DyadicCube.from_flat_index(level, cube.flat_index(), 4) == cube

    def test_source_target_projections(self):
        cube = DyadicCube(2, (1, 3, 4, 2))
        assert cube.source_indices == (1, 3)
        assert cube.target_indices == (4, 2)
        assert cube.target_measure == pytest.approx(2.0 ** -4)


class TestIntersect:
    def test_root_meets_any_cube_in_that_cube(self):
        K = DyadicCube(3, (5, 2))
        assert intersect(DyadicCube.root(2), K) == K

    def test_distinct_quadrants_are_disjoint(self):
        assert intersect(DyadicCube(1, (1, 1)), DyadicCube(1, (2, 2))) is None

    def test_nested_by_index_halving(self):
        assert intersect(DyadicCube(1, (1, 1)), DyadicCube(2, (2, 2))) == DyadicCube(
            2, (2, 2)
        )

    def test_symmetry(self):
        a, b = DyadicCube(1, (2, 1)), DyadicCube(3, (7, 2))
        assert intersect(a, b) == intersect(b, a)


def _random_tree(rng, cube, max_level):
    if cube.level >= max_level or rng.random() < 0.5:
        return PartitionTree(cube)
    return PartitionTree(
        cube, tuple(_random_tree(rng, c, max_level) for c in cube.children())
    )


class TestTreeBijection:
    def test_leaf_root_is_trivial_partition(self):
        part = tree_to_partition(PartitionTree(DyadicCube.root(2)))
        assert part.cells == (DyadicCube.root(2),)

    def test_one_split_is_the_quadrant_partition(self):
        root = DyadicCube.root(2)
        tree = PartitionTree(root, tuple(PartitionTree(c) for c in root.children()))
        part = tree_to_partition(tree)
        assert set(part.cells) == set(root.children())

    def test_roundtrip_on_random_trees(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            tree = _random_tree(rng, DyadicCube.root(2), 4)
            assert partition_to_tree(tree_to_partition(tree)) == tree

    def test_children_must_match_cube(self):
        root = DyadicCube.root(2)
        wrong = tuple(PartitionTree(c) for c in DyadicCube(1, (1, 1)).children())
        with pytest.raises(ValidationError):
            PartitionTree(root, wrong)

    def test_unrealizable_cells_rejected(self):
        # Three quadrants plus the root overlap; not a recursive split.
        root = DyadicCube.root(2)
        with pytest.raises(ValidationError):
            Partition((root,) + root.children()[:3])


class TestEnumeration:
    @pytest.mark.parametrize("level,count", [(0, 1), (1, 2), (2, 17), (3, 83522)])
    def test_partition_count_recursion(self, level, count):
        assert partition_count(level, 1) == count

    def test_enumeration_matches_count(self):
        assert len(list(enumerate_partitions(2, 1))) == 17
        assert len(list(enumerate_trees(1, 1))) == 2

    def test_enumerated_partitions_are_exact_covers(self):
        for part in enumerate_partitions(2, 1):
            assert abs(part.total_measure() - 1.0) <= 1e-12
            cells = part.cells
            for i, a in enumerate(cells):
                for b in cells[i + 1:]:
                    assert intersect(a, b) is None

    def test_enumeration_guard(self):
        # |M_3| = 83522 still fits under the guard; |M_4| does not.
        with pytest.raises(CapacityError):
            list(enumerate_partitions(4, 1))


class TestPartition:
    def test_locate_interior_and_boundary(self):
        part = Partition(DyadicCube.root(2).children())
        assert part.locate((0.1, 0.9)) == DyadicCube(1, (1, 2))
        assert part.locate((1.0, 1.0)) == DyadicCube(1, (2, 2))
        assert part.locate((1.2, 0.5)) is None

    def test_json_roundtrip(self):
        root = DyadicCube.root(2)
        kids = root.children()
        cells = kids[:3] + kids[3].children()
        part = Partition(cells)
        assert Partition.from_json(part.to_json()) == part

    def test_json_cross_check_detects_tampering(self):
        part = Partition(DyadicCube.root(2).children())
        obj = json.loads(part.to_json())
        obj["cells"][0]["l"] = [2, 2]
        with pytest.raises(ValidationError):
            Partition.from_json(json.dumps(obj))
