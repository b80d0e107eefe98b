"""Temporal meshes on the two lateral boundary sides x=0 and x=L.

The lateral boundary of the 1D space-time cylinder (0, L) x (0, T) is two
copies of the time interval (0, T).  Each copy carries its own partition;
elements are the intervals between consecutive nodes.  Degrees of freedom
of a piecewise constant density are ordered side 0 first, then side L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

SIDE0 = 0
SIDEL = 1
SIDES = (SIDE0, SIDEL)


def node_tolerance(T: float) -> float:
    """Absolute tolerance under which two node values are identified."""
    return 1e-10 * max(1.0, T)


def side_index(side) -> int:
    """Normalize a side label ('0', 'L', 0, 1) to 0 or 1."""
    if side in (0, "0", "side0"):
        return SIDE0
    if side in (1, "L", "l", "sideL"):
        return SIDEL
    raise ValueError(f"unknown side {side!r}; expected 0 or 'L'")


class TemporalMesh:
    """Strictly increasing partition 0 = t_0 < t_1 < ... < t_N = T."""

    __slots__ = ("_nodes",)

    def __init__(self, nodes: Iterable[float]):
        arr = np.array(nodes, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("a temporal mesh needs at least two nodes")
        if arr[0] != 0.0:
            raise ValueError(f"first node must be 0, got {arr[0]!r}")
        if not np.all(np.diff(arr) > 0):
            raise ValueError("mesh nodes must be strictly increasing")
        arr.flags.writeable = False
        self._nodes = arr

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def T(self) -> float:
        return float(self._nodes[-1])

    @property
    def n_elements(self) -> int:
        return self._nodes.size - 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self._nodes)

    @property
    def left(self) -> np.ndarray:
        return self._nodes[:-1]

    @property
    def right(self) -> np.ndarray:
        return self._nodes[1:]

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self._nodes[:-1] + self._nodes[1:])

    def locate(self, t) -> np.ndarray:
        """Index of the element containing t (right-continuous at nodes)."""
        idx = np.searchsorted(self._nodes, t, side="right") - 1
        return np.clip(idx, 0, self.n_elements - 1)

    def __eq__(self, other):
        if not isinstance(other, TemporalMesh):
            return NotImplemented
        return np.array_equal(self._nodes, other._nodes)

    __hash__ = None

    def __repr__(self):
        return f"TemporalMesh({self._nodes.tolist()!r})"


@dataclass(frozen=True, eq=False)
class LateralMesh:
    """Pair of temporal meshes on x=0 and x=L with the geometry (L, T)."""

    side0: TemporalMesh
    sideL: TemporalMesh
    L: float

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"space length L must be positive, got {self.L!r}")
        if abs(self.side0.T - self.sideL.T) > node_tolerance(self.side0.T):
            raise ValueError("both sides must end at the same time horizon T")

    @property
    def T(self) -> float:
        return self.side0.T

    @property
    def sides(self) -> tuple[TemporalMesh, TemporalMesh]:
        return (self.side0, self.sideL)

    def side(self, s) -> TemporalMesh:
        return self.sides[side_index(s)]

    @property
    def n_elements(self) -> tuple[int, int]:
        return (self.side0.n_elements, self.sideL.n_elements)

    @property
    def dofs(self) -> int:
        return self.side0.n_elements + self.sideL.n_elements

    @property
    def slice_count(self) -> int:
        return slice_count(self.T, self.L)

    def offset(self, s) -> int:
        """Global DoF index of the first element of side s."""
        return 0 if side_index(s) == SIDE0 else self.side0.n_elements

    def element_arrays(self):
        """Concatenated (side, left, right) arrays over all DoFs."""
        side = np.repeat([SIDE0, SIDEL], self.n_elements)
        left = np.concatenate([self.side0.left, self.sideL.left])
        right = np.concatenate([self.side0.right, self.sideL.right])
        return side, left, right

    def lengths(self) -> np.ndarray:
        return np.concatenate([self.side0.lengths, self.sideL.lengths])

    def __eq__(self, other):
        if not isinstance(other, LateralMesh):
            return NotImplemented
        return (self.side0 == other.side0 and self.sideL == other.sideL
                and self.L == other.L)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class NestedPair:
    """Coarse mesh and its fine mesh obtained by m-subdivision."""

    coarse: LateralMesh
    fine: LateralMesh
    m: int


def slice_count(T: float, L: float) -> int:
    """Smallest n with T <= n L."""
    n = math.ceil(T / L - node_tolerance(T) / L)
    return max(n, 1)


def uniform_mesh(T: float, elements_per_side: int, L: float = 1.0) -> LateralMesh:
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    if int(elements_per_side) != elements_per_side or elements_per_side < 1:
        raise ValueError(f"elements_per_side must be a positive integer, got {elements_per_side!r}")
    nodes = np.linspace(0.0, T, int(elements_per_side) + 1)
    return LateralMesh(TemporalMesh(nodes), TemporalMesh(nodes), L)


def _subdivide_side(mesh: TemporalMesh, m: int) -> TemporalMesh:
    a, h = mesh.left, mesh.lengths
    frac = np.arange(m) / m
    inner = (a[:, None] + h[:, None] * frac[None, :]).ravel()
    return TemporalMesh(np.append(inner, mesh.T))


def subdivide(coarse: LateralMesh, m: int) -> NestedPair:
    """Split every coarse element into m equal fine elements."""
    if int(m) != m or m < 1:
        raise ValueError(f"subdivision factor m must be an integer >= 1, got {m!r}")
    m = int(m)
    if m == 1:
        return NestedPair(coarse, coarse, 1)
    fine = LateralMesh(_subdivide_side(coarse.side0, m),
                       _subdivide_side(coarse.sideL, m), coarse.L)
    return NestedPair(coarse, fine, m)


def is_nested(coarse: LateralMesh, fine: LateralMesh) -> bool:
    """True if every coarse node is (within tolerance) a fine node on the same side."""
    tol = node_tolerance(coarse.T)
    for c, f in zip(coarse.sides, fine.sides):
        idx = np.clip(np.searchsorted(f.nodes, c.nodes), 1, f.nodes.size - 1)
        dist = np.minimum(np.abs(f.nodes[idx] - c.nodes), np.abs(f.nodes[idx - 1] - c.nodes))
        if np.any(dist > tol):
            return False
    return True


def refine_marked(mesh: LateralMesh, marked) -> LateralMesh:
    """Bisect each marked (side, element index) pair."""
    per_side: list[set[int]] = [set(), set()]
    for side, idx in marked:
        s = side_index(side)
        n = mesh.sides[s].n_elements
        if int(idx) != idx or not 0 <= idx < n:
            raise ValueError(f"element index {idx!r} out of range for side {side!r} with {n} elements")
        per_side[s].add(int(idx))
    new_sides = []
    for s, tm in enumerate(mesh.sides):
        if not per_side[s]:
            new_sides.append(tm)
            continue
        idx = np.fromiter(sorted(per_side[s]), dtype=int)
        mids = tm.midpoints[idx]
        new_sides.append(TemporalMesh(np.sort(np.concatenate([tm.nodes, mids]))))
    return LateralMesh(new_sides[0], new_sides[1], mesh.L)


def _insert(nodes: list[float], candidates, tol: float) -> bool:
    """Insert candidates not already present; return True if anything changed."""
    arr = np.asarray(nodes)
    added = []
    for c in candidates:
        j = np.searchsorted(arr, c)
        near = [arr[k] for k in (j - 1, j) if 0 <= k < arr.size]
        if all(abs(c - x) > tol for x in near) and all(abs(c - x) > tol for x in added):
            added.append(c)
    if added:
        nodes.extend(added)
        nodes.sort()
    return bool(added)


def enforce_shift_constraint(mesh: LateralMesh) -> LateralMesh:
    """Close the node sets under the time shift by L between opposite sides.

    On exit, a node t on one side with t + L <= T has t + L as a node on the
    other side, and a node t >= L on one side has t - L as a node on the
    other side.  Each time slice of one side then carries exactly the mesh of
    the preceding slice on the opposite side, shifted by L.
    """
    L, T = mesh.L, mesh.T
    tol = node_tolerance(T)
    nodes = [list(mesh.side0.nodes), list(mesh.sideL.nodes)]
    changed = True
    while changed:
        changed = False
        for s in SIDES:
            src = np.asarray(nodes[1 - s])
            fwd = src[src + L <= T + tol] + L
            bwd = src[src - L >= -tol] - L
            cand = np.clip(np.concatenate([fwd, bwd]), 0.0, T)
            changed |= _insert(nodes[s], cand, tol)
    return LateralMesh(TemporalMesh(nodes[0]), TemporalMesh(nodes[1]), L)


def satisfies_shift_constraint(mesh: LateralMesh) -> bool:
    return enforce_shift_constraint(mesh) == mesh


def format_mesh(mesh: LateralMesh) -> str:
    """Plain-text serialization: a comment line with L, then one line per side."""
    lines = [f"# L {mesh.L:.17g}"]
    for tm in mesh.sides:
        lines.append(" ".join(f"{x:.17g}" for x in tm.nodes))
    return "\n".join(lines) + "\n"


def parse_mesh(text: str, L: float | None = None) -> LateralMesh:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "L" and L is None:
                L = float(parts[1])
            continue
        rows.append([float(x) for x in line.split()])
    if len(rows) != 2:
        raise ValueError(f"expected two node lines, found {len(rows)}")
    if L is None:
        raise ValueError("space length L missing from mesh text")
    return LateralMesh(TemporalMesh(rows[0]), TemporalMesh(rows[1]), L)
