"""Dyadic cubes of [0,1]^(2d), recursive-split partitions, and the tree form.

A cube at level j is the product of 2d dyadic intervals of length 2^-j.
Partitions are built by recursively splitting cubes into their 4^d children;
the family of all such partitions of depth <= ell is in bijection with the
set of 4^d-ary trees of depth <= ell, leaves corresponding to cells.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .errors import CapacityError, ValidationError

# Flat indices stay inside 64 bits for D=2: 4**26 cells per level.
MAX_LEVEL = 26


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The interval [(index-1)/2^level, index/2^level), closed at 1 when index = 2^level."""

    level: int
    index: int  # 1-based, in [1, 2^level]

    def __post_init__(self):
        if not 0 <= self.level <= MAX_LEVEL:
            raise CapacityError(f"interval level {self.level} outside [0, {MAX_LEVEL}]")
        if not 1 <= self.index <= 1 << self.level:
            raise ValidationError(f"interval index {self.index} outside [1, {1 << self.level}]")

    @property
    def lower(self) -> float:
        return (self.index - 1) / (1 << self.level)

    @property
    def upper(self) -> float:
        return self.index / (1 << self.level)

    @property
    def length(self) -> float:
        return 2.0 ** -self.level

    def contains(self, x: float) -> bool:
        # Right end included only for the last interval of the level.
        if self.index == 1 << self.level:
            return self.lower <= x <= 1.0
        return self.lower <= x < self.upper


def interval_index(x: float, level: int) -> Optional[int]:
    """0-based interval index of x at the given level, None outside [0,1]."""
    if x < 0.0 or x > 1.0:
        return None
    return min(int(x * (1 << level)), (1 << level) - 1)


@dataclass(frozen=True, order=True)
class DyadicCube:
    """A cell K at level j of [0,1]^D, D = 2d; indices are 1-based per axis."""

    level: int
    indices: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.level <= MAX_LEVEL:
            raise CapacityError(f"cube level {self.level} outside [0, {MAX_LEVEL}]")
        if len(self.indices) == 0 or len(self.indices) % 2 != 0:
            raise ValidationError("cube needs an even, positive number of coordinates")
        top = 1 << self.level
        for l in self.indices:
            if not 1 <= l <= top:
                raise ValidationError(f"cube index {l} outside [1, {top}] at level {self.level}")

    @property
    def dim(self) -> int:
        """Number of coordinates D = 2d."""
        return len(self.indices)

    @property
    def d(self) -> int:
        return len(self.indices) // 2

    @property
    def measure(self) -> float:
        return 2.0 ** (-self.level * self.dim)

    def intervals(self) -> tuple[DyadicInterval, ...]:
        return tuple(DyadicInterval(self.level, l) for l in self.indices)

    @property
    def source_indices(self) -> tuple[int, ...]:
        """Indices of the first-d-coordinate projection I_K."""
        return self.indices[: self.d]

    @property
    def target_indices(self) -> tuple[int, ...]:
        """Indices of the last-d-coordinate projection J_K."""
        return self.indices[self.d:]

    @property
    def target_measure(self) -> float:
        """Lebesgue measure of the projection onto the last d coordinates."""
        return 2.0 ** (-self.level * self.d)

    def flat_index(self) -> int:
        """Dense per-level offset: mixed radix of the 0-based indices, axis 0 most significant."""
        side = 1 << self.level
        off = 0
        for l in self.indices:
            off = off * side + (l - 1)
        return off

    @classmethod
    def from_flat_index(cls, level: int, off: int, dim: int) -> "DyadicCube":
        side = 1 << level
        idx = []
        for _ in range(dim):
            idx.append(off % side + 1)
            off //= side
        return cls(level, tuple(reversed(idx)))

    @classmethod
    def root(cls, dim: int = 2) -> "DyadicCube":
        return cls(0, (1,) * dim)

    def children(self) -> tuple["DyadicCube", ...]:
        """The 4^d level-(j+1) cubes partitioning this cube, in lexicographic order."""
        if self.level >= MAX_LEVEL:
            raise CapacityError(f"cannot split below level {MAX_LEVEL}")
        ranges = [(2 * l - 1, 2 * l) for l in self.indices]
        return tuple(
            DyadicCube(self.level + 1, combo) for combo in itertools.product(*ranges)
        )

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValidationError("root cube has no parent")
        return DyadicCube(self.level - 1, tuple((l + 1) // 2 for l in self.indices))

    def ancestor(self, level: int) -> "DyadicCube":
        if not 0 <= level <= self.level:
            raise ValidationError(f"ancestor level {level} outside [0, {self.level}]")
        shift = self.level - level
        return DyadicCube(level, tuple(((l - 1) >> shift) + 1 for l in self.indices))

    def contains_cube(self, other: "DyadicCube") -> bool:
        return other.level >= self.level and other.ancestor(self.level) == self

    def contains_point(self, point: Sequence[float]) -> bool:
        if len(point) != self.dim:
            raise ValidationError("point dimension mismatch")
        return all(iv.contains(x) for iv, x in zip(self.intervals(), point))


def intersect(a: DyadicCube, b: DyadicCube) -> Optional[DyadicCube]:
    """The deeper cube if nested, None if disjoint; dyadic cubes never partially overlap."""
    if a.dim != b.dim:
        raise ValidationError("cube dimension mismatch")
    if a.level > b.level:
        a, b = b, a
    return b if b.ancestor(a.level) == a else None


class PartitionTree:
    """A node of the 4^d-ary split tree; leaves carry the cells of a partition."""

    __slots__ = ("cube", "children")

    def __init__(self, cube: DyadicCube, children: Optional[tuple["PartitionTree", ...]] = None):
        if children is not None:
            expected = cube.children()
            if tuple(c.cube for c in children) != expected:
                raise ValidationError("tree children must be the cube's dyadic children in order")
        self.cube = cube
        self.children = children

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def leaves(self) -> Iterator[DyadicCube]:
        if self.children is None:
            yield self.cube
        else:
            for child in self.children:
                yield from child.leaves()

    def depth(self) -> int:
        if self.children is None:
            return self.cube.level
        return max(child.depth() for child in self.children)

    def __eq__(self, other):
        if not isinstance(other, PartitionTree):
            return NotImplemented
        return self.cube == other.cube and self.children == other.children

    def __hash__(self):
        return hash((self.cube, self.children))

    def to_json_obj(self):
        if self.children is None:
            return {"split": False}
        return {"split": True, "children": [c.to_json_obj() for c in self.children]}

    @classmethod
    def from_json_obj(cls, obj, cube: DyadicCube) -> "PartitionTree":
        if not obj.get("split", False):
            return cls(cube)
        kids = cube.children()
        raw = obj.get("children", [])
        if len(raw) != len(kids):
            raise ValidationError(
                f"split node needs {len(kids)} children, got {len(raw)}"
            )
        return cls(cube, tuple(cls.from_json_obj(o, k) for o, k in zip(raw, kids)))


class Partition:
    """A finite set of pairwise-disjoint cubes covering [0,1]^(2d), realizable by recursive splits."""

    __slots__ = ("cells", "_tree")

    def __init__(self, cells: Sequence[DyadicCube], _tree: Optional[PartitionTree] = None):
        self.cells = tuple(sorted(cells))
        if not self.cells:
            raise ValidationError("a partition needs at least one cell")
        self._tree = _tree if _tree is not None else partition_to_tree_cells(self.cells)

    @property
    def dim(self) -> int:
        return self.cells[0].dim

    @property
    def max_level(self) -> int:
        return max(c.level for c in self.cells)

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[DyadicCube]:
        return iter(self.cells)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.cells == other.cells

    def __hash__(self):
        return hash(self.cells)

    def __repr__(self):
        return f"Partition({len(self.cells)} cells, max_level={self.max_level})"

    def locate(self, point: Sequence[float]) -> Optional[DyadicCube]:
        """The unique cell containing the point, None outside [0,1]^(2d)."""
        node = self._tree
        if not node.cube.contains_point(point):
            return None
        while node.children is not None:
            for child in node.children:
                if child.cube.contains_point(point):
                    node = child
                    break
            else:  # pragma: no cover - children cover the parent
                return None
        return node.cube

    def total_measure(self) -> float:
        return sum(c.measure for c in self.cells)

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "tree": self._tree.to_json_obj(),
                "cells": [{"j": c.level, "l": list(c.indices)} for c in self.cells],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Partition":
        obj = json.loads(text)
        dim = int(obj["dim"])
        tree = PartitionTree.from_json_obj(obj["tree"], DyadicCube.root(dim))
        part = tree_to_partition(tree)
        if "cells" in obj:
            cells = tuple(
                sorted(DyadicCube(int(c["j"]), tuple(c["l"])) for c in obj["cells"])
            )
            if cells != part.cells:
                raise ValidationError("tree form and flat cell list disagree")
        return part

    @classmethod
    def trivial(cls, dim: int = 2) -> "Partition":
        return cls((DyadicCube.root(dim),))


def tree_to_partition(tree: PartitionTree) -> Partition:
    if tree.cube.level != 0:
        raise ValidationError("partition tree must be rooted at [0,1]^(2d)")
    return Partition(tuple(tree.leaves()), _tree=tree)


def partition_to_tree(partition: Partition) -> PartitionTree:
    return partition._tree


def partition_to_tree_cells(cells: Sequence[DyadicCube]) -> PartitionTree:
    """Rebuild the split tree from a cell set; fails if not realizable by recursive splits."""
    dim = cells[0].dim
    if any(c.dim != dim for c in cells):
        raise ValidationError("cells have mixed dimensions")
    cell_set = set(cells)
    if len(cell_set) != len(cells):
        raise ValidationError("duplicate cells in partition")

    def build(cube: DyadicCube, pending: set[DyadicCube]) -> PartitionTree:
        if cube in pending:
            if len(pending) != 1:
                raise ValidationError(f"cell {cube} overlaps other cells")
            pending.discard(cube)
            return PartitionTree(cube)
        groups: list[tuple[DyadicCube, set[DyadicCube]]] = []
        for child in cube.children():
            sub = {c for c in pending if child.contains_cube(c)}
            pending -= sub
            groups.append((child, sub))
        if pending:
            raise ValidationError("cells are not nested under a recursive split")
        subtrees = []
        for child, sub in groups:
            if not sub:
                raise ValidationError(f"no cells cover child cube {child}")
            subtrees.append(build(child, sub))
        return PartitionTree(cube, tuple(subtrees))

    return build(DyadicCube.root(dim), cell_set)


def partition_count(level: int, d: int = 1) -> int:
    """|M_level| via the tree recursion c(0) = 1, c(j) = 1 + c(j-1)^(4^d)."""
    count = 1
    for _ in range(level):
        count = 1 + count ** (4 ** d)
    return count


_ENUMERATION_GUARD = 100_000


def enumerate_trees(level: int, d: int = 1, _cube: Optional[DyadicCube] = None) -> Iterator[PartitionTree]:
    """All split trees of depth <= level rooted at _cube (default: the root cube)."""
    if _cube is None:
        if partition_count(level, d) > _ENUMERATION_GUARD:
            raise CapacityError(
                f"|M_{level}| = {partition_count(level, d)} exceeds the enumeration guard"
            )
        _cube = DyadicCube.root(2 * d)
    yield PartitionTree(_cube)
    if _cube.level < level:
        child_lists = [
            list(enumerate_trees(level, d, _cube=child)) for child in _cube.children()
        ]
        for combo in itertools.product(*child_lists):
            yield PartitionTree(_cube, tuple(combo))


def enumerate_partitions(level: int, d: int = 1) -> Iterator[Partition]:
    """Exhaustively yields every partition of M_level exactly once (small cases only)."""
    for tree in enumerate_trees(level, d):
        yield tree_to_partition(tree)
