import numpy as np
import pytest

from pynah.errors import ConfigurationError
from pynah.geometry import PlaneGrid, build_plane_grid, pairwise_distances


class TestBuildPlaneGrid:
    def test_source_scale_grid(self):
        grid = build_plane_grid(16, 64, 0.0125, 0.0125, 0.0)
        assert grid.n_points == 1024
        assert grid.area_element == pytest.approx(0.0125**2)

    def test_hologram_grid(self):
        grid = build_plane_grid(8, 8, 0.025, 0.1, 0.0312)
        assert grid.n_points == 64
        assert grid.z == 0.0312

    def test_single_point_at_origin(self):
        grid = build_plane_grid(1, 1, 0.01, 0.01, 0.0, origin=(0.0, 0.0))
        assert grid.points().tolist() == [[0.0, 0.0, 0.0]]

    def test_centered_origin(self):
        grid = build_plane_grid(3, 5, 0.5, 0.25, 0.0)
        xs, ys = grid.xs, grid.ys
        assert xs.mean() == pytest.approx(0.0, abs=1e-15)
        assert ys.mean() == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize(
        "nx,ny,dx,dy",
        [(0, 4, 0.1, 0.1), (4, 0, 0.1, 0.1), (4, 4, 0.0, 0.1), (4, 4, 0.1, -0.1), (4, 4, np.inf, 0.1)],
    )
    def test_invalid_arguments(self, nx, ny, dx, dy):
        with pytest.raises(ConfigurationError):
            build_plane_grid(nx, ny, dx, dy, 0.0)

    def test_row_major_enumeration(self):
        grid = build_plane_grid(2, 3, 1.0, 1.0, 0.0, origin=(0.0, 0.0))
        pts = grid.points()
        # flat index n = ix * ny + iy
        assert pts[1].tolist() == [0.0, 1.0, 0.0]
        assert pts[3].tolist() == [1.0, 0.0, 0.0]


class TestPairwiseDistances:
    def test_self_distances(self):
        grid = build_plane_grid(2, 2, 0.1, 0.1, 0.0)
        table = pairwise_distances(grid, grid)
        assert table.dz == 0.0
        assert np.all(np.diag(table.d) == 0.0)

    def test_axial_pair(self):
        a = build_plane_grid(1, 1, 0.01, 0.01, 0.0, origin=(0.0, 0.0))
        b = build_plane_grid(1, 1, 0.01, 0.01, 0.05, origin=(0.0, 0.0))
        table = pairwise_distances(a, b)
        assert table.d[0, 0] == pytest.approx(0.05)
        assert table.dz == 0.05

    def test_pythagorean_triple(self):
        # src at the origin, dst offset by (0.03, 0.04, 0.12): 3-4-12-13 box
        src = build_plane_grid(1, 1, 0.01, 0.01, 0.0, origin=(0.0, 0.0))
        dst = build_plane_grid(1, 1, 0.01, 0.01, 0.12, origin=(0.03, 0.04))
        assert pairwise_distances(src, dst).d[0, 0] == pytest.approx(0.13, rel=1e-15)

    def test_transpose_symmetry_exact(self):
        a = build_plane_grid(3, 4, 0.013, 0.017, 0.0)
        b = build_plane_grid(5, 2, 0.011, 0.019, 0.04)
        forward = pairwise_distances(a, b).d
        backward = pairwise_distances(b, a).d
        assert np.array_equal(forward, backward.T)

    def test_translation_invariance_bit_identical(self):
        # binary-representable spacings and shift keep differences exact
        a = build_plane_grid(4, 4, 0.25, 0.5, 0.0, origin=(0.0, 0.0))
        b = build_plane_grid(3, 3, 0.25, 0.5, 0.125, origin=(0.25, 0.5))
        shifted = pairwise_distances(a.shifted(0.5, 2.0), b.shifted(0.5, 2.0))
        original = pairwise_distances(a, b)
        assert np.array_equal(original.d, shifted.d)
        assert original.dz == shifted.dz

    def test_d_at_least_dz(self):
        a = build_plane_grid(4, 6, 0.03, 0.02, 0.0)
        b = build_plane_grid(5, 3, 0.04, 0.05, 0.07)
        table = pairwise_distances(a, b)
        assert np.all(table.d >= table.dz)

    def test_grid_mismatch_shapes(self):
        a = build_plane_grid(2, 3, 0.1, 0.1, 0.0)
        b = build_plane_grid(4, 5, 0.1, 0.1, 0.02)
        assert pairwise_distances(a, b).d.shape == (20, 6)
