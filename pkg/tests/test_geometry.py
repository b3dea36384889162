import numpy as np
import pytest

from spinfactor import geometry as geo
from conftest import INF, floyd_warshall, random_edges


class TestDistanceTable:
    def test_path_two_hops(self):
        lat = geo.path(3)
        assert lat.distance(0, 2) == 2

    def test_self_distance_zero(self):
        lat = geo.grid(3, 3)
        assert all(lat.distance(x, x) == 0 for x in range(9))

    def test_grid_corner_to_corner(self):
        lat = geo.grid(3, 3)
        oracle = floyd_warshall(9, lat.edges)
        assert lat.distance(0, 8) == 4
        assert oracle[0][8] == 4

    def test_adjacent_iff_distance_one(self):
        lat = geo.grid(4, 3)
        for x in range(lat.vertex_count):
            for y in range(lat.vertex_count):
                adjacent = (min(x, y), max(x, y)) in lat.edges
                assert adjacent == (lat.distance(x, y) == 1)

    def test_disconnected_pairs_get_sentinel(self):
        lat = geo.Lattice(4, [(0, 1), (2, 3)])
        assert lat.distance(0, 3) == geo.UNREACHABLE
        assert lat.distance(1, 0) == 1

    def test_symmetry_and_triangle(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 10))
            lat = geo.Lattice(n, random_edges(rng, n))
            d = lat.dist
            assert np.array_equal(d, d.T)
            for x in range(n):
                for y in range(n):
                    for z in range(n):
                        if d[x, y] < geo.UNREACHABLE and d[y, z] < geo.UNREACHABLE:
                            assert d[x, z] <= d[x, y] + d[y, z]

    def test_matches_floyd_warshall_on_random_graphs(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 13))
            edges = random_edges(rng, n)
            lat = geo.Lattice(n, edges)
            oracle = floyd_warshall(n, edges)
            for x in range(n):
                for y in range(n):
                    expected = oracle[x][y] if oracle[x][y] < INF else geo.UNREACHABLE
                    assert lat.distance(x, y) == expected

    def test_rejects_self_loops_and_bad_edges(self):
        with pytest.raises(ValueError, match="irreflexive"):
            geo.Lattice(3, [(1, 1)])
        with pytest.raises(ValueError, match="out of range"):
            geo.Lattice(3, [(0, 3)])


class TestBoundarySets:
    def test_p5_example(self):
        lat = geo.path(5)
        bs = geo.boundary_sets(lat, {0, 1, 2}, 1)
        assert bs.inner == {2}
        assert bs.fattening == {0, 1, 2, 3}
        assert bs.co_collar == {2, 3, 4}
        assert bs.annulus == {2, 3}

    def test_radius_zero_annulus_is_empty(self):
        lat = geo.grid(3, 3)
        bs = geo.boundary_sets(lat, {0, 1, 3}, 0)
        assert bs.annulus == frozenset()
        assert bs.fattening == {0, 1, 3}

    def test_grid_left_columns_against_brute_force(self):
        # 4x4 grid, X = first two columns; enumerate distances by brute force.
        lat = geo.grid(4, 4)
        X = frozenset(range(8))
        oracle = floyd_warshall(16, lat.edges)
        comp = set(range(16)) - X

        def dist_to(x, targets):
            return min(oracle[x][y] for y in targets)

        expected = {x for x in range(16)
                    if dist_to(x, X) <= 1 and dist_to(x, comp) <= 1}
        bs = geo.boundary_sets(lat, X, 1)
        assert bs.annulus == expected
        # second and third columns in column-major indexing
        assert bs.annulus == frozenset(range(4, 12))

    def test_inner_boundary_identity_with_co_collars(self, rng):
        for _ in range(25):
            n = int(rng.integers(3, 11))
            lat = geo.Lattice(n, random_edges(rng, n))
            size = int(rng.integers(1, n))
            X = frozenset(int(v) for v in rng.choice(n, size=size, replace=False))
            inner = geo.inner_boundary(lat, X)
            assert inner == geo.co_collar(lat, X, 1) - geo.co_collar(lat, X, 0)

    def test_annulus_contained_and_monotone(self, rng):
        lat = geo.grid(3, 4)
        X = {0, 1, 4, 5}
        previous_fat, previous_co = frozenset(), frozenset()
        for radius in range(5):
            bs = geo.boundary_sets(lat, X, radius)
            assert bs.annulus <= bs.fattening
            assert bs.annulus <= bs.co_collar
            assert previous_fat <= bs.fattening
            assert previous_co <= bs.co_collar
            previous_fat, previous_co = bs.fattening, bs.co_collar

    def test_rejects_degenerate_cuts(self):
        lat = geo.path(4)
        with pytest.raises(ValueError, match="empty"):
            geo.boundary_sets(lat, set(), 1)
        with pytest.raises(ValueError, match="whole lattice"):
            geo.boundary_sets(lat, {0, 1, 2, 3}, 1)


class TestShellProfile:
    def test_p5_sizes_and_monotone(self):
        lat = geo.path(5)
        profile = geo.shell_profile(lat, {0, 1, 2})
        assert profile.sizes == (1, 1, 1, 0)
        assert profile.monotone

    def test_first_shell_is_inner_boundary(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 11))
            lat = geo.Lattice(n, random_edges(rng, n))
            size = int(rng.integers(1, n))
            X = frozenset(int(v) for v in rng.choice(n, size=size, replace=False))
            assert geo.shell_profile(lat, X).sizes[0] == len(geo.inner_boundary(lat, X))

    def test_grid_left_half(self):
        lat = geo.grid(4, 4)
        profile = geo.shell_profile(lat, set(range(8)))
        assert profile.sizes == (4, 4, 0)
        assert profile.monotone

    def test_sizes_sum_to_region_when_connected(self, rng):
        for _ in range(25):
            n = int(rng.integers(3, 10))
            lat = geo.Lattice(n, random_edges(rng, n, p=0.6))
            size = int(rng.integers(1, n))
            X = frozenset(int(v) for v in rng.choice(n, size=size, replace=False))
            depth = [min((lat.distance(x, y) for y in lat.vertices - X), default=0)
                     for x in sorted(X)]
            if all(d < geo.UNREACHABLE for d in depth):
                assert sum(geo.shell_profile(lat, X).sizes) == len(X)

    def test_star_core_is_not_monotone(self):
        # star with the center plus 3 leaves inside X: one boundary vertex
        # but three depth-2 vertices.
        lat = geo.Lattice(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        profile = geo.shell_profile(lat, {0, 1, 2, 3})
        assert profile.sizes == (1, 3, 0)
        assert not profile.monotone


class TestFatBoundaryConstant:
    def test_p5_example(self):
        lat = geo.path(5)
        assert geo.fat_boundary_constant(lat, {0, 1, 2}, 2, 1) == 2.0

    def test_exact_linear_growth_gives_one(self):
        sizes = [3, 6, 9, 12]  # |annulus(R)| = R * |boundary| with |boundary| = 3
        assert geo.growth_constant_from_sizes(sizes, 3, 1) == 1.0

    def test_grid_left_half_against_enumeration(self):
        lat = geo.grid(4, 4)
        X = frozenset(range(8))
        boundary = len(geo.inner_boundary(lat, X))
        sizes = [len(geo.annulus(lat, X, r)) for r in (1, 2)]
        expected = max(sizes[0] / (1 * boundary), sizes[1] / (4 * boundary))
        assert geo.fat_boundary_constant(lat, X, 2, 2) == expected
        assert sizes == [8, 16]

    def test_bound_holds_by_construction(self, rng):
        lat = geo.grid(3, 4)
        X = {0, 1, 4}
        g = geo.fat_boundary_constant(lat, X, 4, 1)
        boundary = len(geo.inner_boundary(lat, X))
        for radius in range(1, 5):
            assert len(geo.annulus(lat, X, radius)) <= g * radius * boundary + 1e-12

    def test_rejects_bad_radius(self):
        lat = geo.path(5)
        with pytest.raises(ValueError, match="r_max"):
            geo.fat_boundary_constant(lat, {0, 1}, 0, 1)


class TestCrossing:
    def test_p4_bond_examples(self):
        lat = geo.path(4)
        lam = lat.vertices
        assert geo.is_crossing({1, 2}, {0, 1}, lam)
        assert not geo.is_crossing({2, 3}, {0, 1}, lam)

    def test_p6_collar_family(self):
        lat = geo.path(6)
        X = {0, 1, 2}
        lam = lat.vertices
        collar = geo.surface_collar(lat, X, 2)
        assert collar == {2, 3}
        assert geo.in_surface_family({2, 3}, X, lam, collar)
        # {1,2} sits inside X: not crossing, hence not in the family
        assert not geo.is_crossing({1, 2}, X, lam)
        assert not geo.in_surface_family({1, 2}, X, lam, collar)
        # crossing but sticking out of the collar
        assert geo.is_crossing({1, 2, 3}, X, lam)
        assert not geo.in_surface_family({1, 2, 3}, X, lam, collar)

    def test_crossing_supports_enumeration(self):
        lat = geo.path(6)
        X = {0, 1, 2}
        lam = lat.vertices
        supports = [{i, i + 1} for i in range(5)] + [{0, 5}]
        crossing = geo.crossing_supports(supports, X, lam)
        assert crossing == [frozenset({2, 3}), frozenset({0, 5})]
        confined = geo.crossing_supports(supports, X, lam,
                                         restrict_to=geo.surface_collar(lat, X, 2))
        assert confined == [frozenset({2, 3})]

    def test_family_members_cross_and_fit(self, rng):
        lat = geo.grid(3, 3)
        X = {0, 1, 3}
        lam = lat.vertices
        collar = geo.surface_collar(lat, X, 4)
        for _ in range(50):
            size = int(rng.integers(1, 4))
            Z = frozenset(int(v) for v in rng.choice(9, size=size, replace=False))
            if geo.in_surface_family(Z, X, lam, collar):
                assert Z & X and Z & (lam - X) and Z <= collar

    def test_floor_halving(self):
        lat = geo.path(8)
        X = {0, 1, 2, 3}
        assert geo.surface_collar(lat, X, 1) == frozenset()
        assert geo.surface_collar(lat, X, 2) == geo.annulus(lat, X, 1)
        assert geo.surface_collar(lat, X, 3) == geo.annulus(lat, X, 1)
        assert geo.surface_collar(lat, X, 5) == geo.annulus(lat, X, 2)
