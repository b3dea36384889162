"""Finite lattice graphs and cut geometry.

Vertices are integers ``0..n-1``; regions are frozensets of vertex indices.
All distances are hop counts on the adjacency graph. Pairs in different
connected components sit at the ``UNREACHABLE`` sentinel, which compares
larger than any real hop count.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

# Sentinel hop count for disconnected pairs. Any radius used in practice is
# far below it, so `<= R` comparisons need no special casing.
UNREACHABLE = 2**31 - 1

Region = frozenset[int]


def region(vertices: Iterable[int]) -> Region:
    """Normalize an iterable of vertex indices to a Region."""
    return frozenset(int(v) for v in vertices)


class Lattice:
    """Undirected finite graph with a precomputed hop-distance table."""

    def __init__(self, vertex_count: int, edges: Iterable[tuple[int, int]]):
        if vertex_count <= 0:
            raise ValueError("vertex_count must be positive")
        normalized = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}: adjacency must be irreflexive")
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f"edge ({u},{v}) out of range for {vertex_count} vertices")
            normalized.add((min(u, v), max(u, v)))
        self.vertex_count = vertex_count
        self.edges = frozenset(normalized)
        buckets: list[list[int]] = [[] for _ in range(vertex_count)]
        for u, v in self.edges:
            buckets[u].append(v)
            buckets[v].append(u)
        self.neighbors = tuple(tuple(sorted(b)) for b in buckets)
        self.dist = distance_table(self)
        self.dist.setflags(write=False)

    @property
    def vertices(self) -> Region:
        return frozenset(range(self.vertex_count))

    def distance(self, x: int, y: int) -> int:
        return int(self.dist[x, y])

    def __repr__(self) -> str:
        return f"Lattice(vertex_count={self.vertex_count}, edges={len(self.edges)})"


def distance_table(lattice: Lattice) -> np.ndarray:
    """All-pairs hop counts by breadth-first traversal from every vertex."""
    n = lattice.vertex_count
    table = np.full((n, n), UNREACHABLE, dtype=np.int64)
    for src in range(n):
        table[src, src] = 0
        queue = deque([src])
        while queue:
            cur = queue.popleft()
            for nb in lattice.neighbors[cur]:
                if table[src, nb] == UNREACHABLE:
                    table[src, nb] = table[src, cur] + 1
                    queue.append(nb)
    return table


def path(n: int) -> Lattice:
    return Lattice(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Lattice:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return Lattice(n, [(i, (i + 1) % n) for i in range(n)])


def grid(width: int, height: int) -> Lattice:
    """Rectangular grid, sites indexed by column: vertex = x * height + y."""
    edges = []
    for x in range(width):
        for y in range(height):
            i = x * height + y
            if y + 1 < height:
                edges.append((i, i + 1))
            if x + 1 < width:
                edges.append((i, i + height))
    return Lattice(width * height, edges)


def _dist_to(lattice: Lattice, targets: Region) -> np.ndarray:
    """Per-vertex hop distance to the nearest vertex of `targets`."""
    idx = sorted(targets)
    if not idx:
        return np.full(lattice.vertex_count, UNREACHABLE, dtype=np.int64)
    return lattice.dist[:, idx].min(axis=1)


def _check_cut(lattice: Lattice, X) -> Region:
    X = region(X)
    if not X:
        raise ValueError("region X is empty: cut geometry undefined")
    if not X <= lattice.vertices:
        raise ValueError("region X contains vertices outside the lattice")
    if X == lattice.vertices:
        raise ValueError("region X covers the whole lattice: cut geometry undefined")
    return X


def inner_boundary(lattice: Lattice, X) -> Region:
    """Sites of X at hop distance 1 from the complement."""
    X = _check_cut(lattice, X)
    depth = _dist_to(lattice, lattice.vertices - X)
    return frozenset(x for x in X if depth[x] == 1)


def fattening(lattice: Lattice, X, radius: int) -> Region:
    """Everything within `radius` hops of X."""
    X = _check_cut(lattice, X)
    d = _dist_to(lattice, X)
    return frozenset(int(v) for v in np.nonzero(d <= radius)[0])


def co_collar(lattice: Lattice, X, radius: int) -> Region:
    """Everything within `radius` hops of the complement of X."""
    X = _check_cut(lattice, X)
    d = _dist_to(lattice, lattice.vertices - X)
    return frozenset(int(v) for v in np.nonzero(d <= radius)[0])


def annulus(lattice: Lattice, X, radius: int) -> Region:
    """The width-2R collar straddling the cut: fattening ∩ co-collar."""
    return fattening(lattice, X, radius) & co_collar(lattice, X, radius)


@dataclass(frozen=True)
class BoundarySets:
    inner: Region
    fattening: Region
    co_collar: Region
    annulus: Region


def boundary_sets(lattice: Lattice, X, radius: int) -> BoundarySets:
    """All four boundary constructions of a cut at once."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    X = _check_cut(lattice, X)
    fat = fattening(lattice, X, radius)
    co = co_collar(lattice, X, radius)
    return BoundarySets(inner_boundary(lattice, X), fat, co, fat & co)


@dataclass(frozen=True)
class ShellProfile:
    """Sizes of the successive depth shells of X, counted from the cut inward."""

    sizes: tuple[int, ...]
    monotone: bool


def shell_profile(lattice: Lattice, X) -> ShellProfile:
    """Shell sizes |{x in X: d(x, complement) = n}| for n = 1, 2, ... until 0.

    The first entry equals the inner-boundary size. The monotone flag
    (non-increasing sizes) gates factorization experiments; plain geometry
    queries do not require it.
    """
    X = _check_cut(lattice, X)
    depth = _dist_to(lattice, lattice.vertices - X)
    sizes = []
    n = 1
    while n <= lattice.vertex_count + 1:
        size = int(np.count_nonzero(depth == n))
        sizes.append(size)
        if size == 0:
            break
        n += 1
    monotone = all(b <= a for a, b in zip(sizes, sizes[1:]))
    return ShellProfile(tuple(sizes), monotone)


def growth_constant_from_sizes(annulus_sizes: Iterable[int], boundary_size: int,
                               dimension: int) -> float:
    """Smallest G with |annulus(R)| <= G * R^dimension * boundary_size.

    `annulus_sizes` lists |annulus(R)| for R = 1, 2, ... in order.
    """
    sizes = list(annulus_sizes)
    if not sizes:
        raise ValueError("need at least one annulus size")
    if boundary_size <= 0:
        raise ValueError("inner boundary is empty: growth constant undefined")
    if dimension < 1:
        raise ValueError("dimension must be a positive integer")
    return max(size / (r ** dimension * boundary_size)
               for r, size in enumerate(sizes, start=1))


def fat_boundary_constant(lattice: Lattice, X, r_max: int, dimension: int) -> float:
    """Annulus growth constant of the cut, maximized over radii 1..r_max."""
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    X = _check_cut(lattice, X)
    boundary_size = len(inner_boundary(lattice, X))
    sizes = [len(annulus(lattice, X, r)) for r in range(1, r_max + 1)]
    return growth_constant_from_sizes(sizes, boundary_size, dimension)


def is_crossing(Z, X, lam) -> bool:
    """True when the support Z meets both X and its complement inside lam."""
    Z, X, lam = region(Z), region(X), region(lam)
    return bool(Z & X) and bool(Z & (lam - X))


def surface_collar(lattice: Lattice, X, radius: int) -> Region:
    """Half-width collar confining surface supports: annulus of radius R // 2."""
    half = radius // 2
    if half == 0:
        return frozenset()
    return annulus(lattice, X, half)


def in_surface_family(Z, X, lam, collar) -> bool:
    """Membership in the family of crossing supports confined to the collar."""
    return is_crossing(Z, X, lam) and region(Z) <= region(collar)


def crossing_supports(supports: Iterable, X, lam, restrict_to=None) -> list[Region]:
    """Filter supports that cross the cut, optionally confined to restrict_to."""
    out = []
    for Z in supports:
        Z = region(Z)
        if is_crossing(Z, X, lam) and (restrict_to is None or Z <= region(restrict_to)):
            out.append(Z)
    return out


def region_distance(lattice: Lattice, A, B) -> int:
    """Hop distance between two regions (UNREACHABLE if either is empty)."""
    A, B = region(A), region(B)
    if not A or not B:
        return UNREACHABLE
    ia, ib = sorted(A), sorted(B)
    return int(lattice.dist[np.ix_(ia, ib)].min())
