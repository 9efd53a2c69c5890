import numpy as np
import pytest

from pynah.errors import ConfigurationError, ContractError
from pynah.fields import PRESSURE, VELOCITY, ComplexField, PhysicalConstants
from pynah.geometry import build_plane_grid
from pynah.propagation import pressure_kernel_matrices, surface_pressure_matrix
from pynah.scene import default_scene
from pynah.synth import (
    NoiseSpec,
    PlateModeSpec,
    add_noise,
    forward_holography,
    monopole_field,
    plate_mode_velocity,
    thin_plate_frequency,
)

CONST = PhysicalConstants()


class TestPlateModes:
    def grid(self):
        return build_plane_grid(16, 64, 0.0125, 0.0125, 0.0)

    def test_fundamental_has_central_antinode(self):
        v = plate_mode_velocity(PlateModeSpec(1, 1), self.grid())
        mat = np.abs(v.as_matrix())
        # peak in the middle, weakest at the outermost samples
        peak = np.unravel_index(mat.argmax(), mat.shape)
        assert peak[0] in (7, 8) and peak[1] in (31, 32)
        assert mat[0, 0] < mat[peak]
        assert np.all(v.values.imag == 0.0)
        assert v.kind == VELOCITY

    def test_mode_21_antisymmetric_in_x(self):
        v = plate_mode_velocity(PlateModeSpec(2, 1), self.grid()).as_matrix()
        np.testing.assert_allclose(v, -v[::-1, :], atol=1e-12)

    def test_mode_32_sign_changes(self):
        v = plate_mode_velocity(PlateModeSpec(3, 2), self.grid()).as_matrix().real
        changes_x = np.count_nonzero(np.diff(np.sign(v[:, 5])) != 0)
        changes_y = np.count_nonzero(np.diff(np.sign(v[3, :])) != 0)
        assert changes_x == 2
        assert changes_y == 1

    def test_grid_outside_footprint(self):
        big = build_plane_grid(16, 64, 0.02, 0.02, 0.0)
        with pytest.raises(ConfigurationError):
            plate_mode_velocity(PlateModeSpec(1, 1), big)

    def test_amplitude_scaling(self):
        base = plate_mode_velocity(PlateModeSpec(2, 2, amplitude=1.0), self.grid())
        loud = plate_mode_velocity(PlateModeSpec(2, 2, amplitude=2.5), self.grid())
        np.testing.assert_allclose(loud.values, 2.5 * base.values, rtol=1e-15)

    def test_default_modal_frequency(self):
        # Kirchhoff-Love simply supported, aluminum 3 mm, 0.2 x 0.8 m plate
        stiffness = 69e9 * 0.003**3 / (12 * (1 - 0.33**2))
        expected = (np.pi / 2) * np.sqrt(stiffness / (2700 * 0.003)) * ((3 / 0.2) ** 2 + (2 / 0.8) ** 2)
        assert thin_plate_frequency(3, 2, 0.2, 0.8) == pytest.approx(expected, rel=1e-12)
        assert PlateModeSpec(3, 2).frequency == pytest.approx(expected, rel=1e-12)
        assert PlateModeSpec(3, 2, frequency_hz=700.0).frequency == 700.0

    @pytest.mark.parametrize("m,n", [(0, 1), (1, 0), (-2, 3)])
    def test_invalid_indices(self, m, n):
        with pytest.raises(ConfigurationError):
            PlateModeSpec(m, n)


class TestMonopole:
    def test_zero_strength(self):
        grid = build_plane_grid(4, 4, 0.02, 0.02, 0.0)
        p, v = monopole_field((0.0, 0.0, -0.1), 0.0, 2 * np.pi * 700, grid, CONST)
        assert np.all(p.values == 0) and np.all(v.values == 0)
        assert p.kind == PRESSURE and v.kind == VELOCITY

    def test_inverse_distance_magnitude(self):
        omega = 2 * np.pi * 700.0
        near = build_plane_grid(1, 1, 0.01, 0.01, 0.1, origin=(0.0, 0.0))
        far = build_plane_grid(1, 1, 0.01, 0.01, 0.2, origin=(0.0, 0.0))
        p_near, _ = monopole_field((0.0, 0.0, 0.0), 1.0, omega, near, CONST)
        p_far, _ = monopole_field((0.0, 0.0, 0.0), 1.0, omega, far, CONST)
        assert abs(p_far.values[0]) == pytest.approx(abs(p_near.values[0]) / 2.0, rel=1e-12)

    def test_axial_phase_advance(self):
        omega = 2 * np.pi * 700.0
        k = omega / CONST.c
        z1, z2 = 0.1, 0.17
        g1 = build_plane_grid(1, 1, 0.01, 0.01, z1, origin=(0.0, 0.0))
        g2 = build_plane_grid(1, 1, 0.01, 0.01, z2, origin=(0.0, 0.0))
        p1, _ = monopole_field((0.0, 0.0, 0.0), 1.0, omega, g1, CONST)
        p2, _ = monopole_field((0.0, 0.0, 0.0), 1.0, omega, g2, CONST)
        delta = np.angle(p2.values[0] / p1.values[0])
        expected = -k * (z2 - z1)
        assert delta == pytest.approx(np.angle(np.exp(1j * expected)), rel=1e-9)

    def test_singular_sample_rejected(self):
        grid = build_plane_grid(3, 3, 0.01, 0.01, 0.0)
        with pytest.raises(ConfigurationError):
            monopole_field((0.0, 0.0, 0.0), 1.0, 100.0, grid, CONST)

    def test_bad_position_shape(self):
        grid = build_plane_grid(2, 2, 0.01, 0.01, 0.0)
        with pytest.raises(ContractError):
            monopole_field((0.0, 0.0), 1.0, 100.0, grid, CONST)


class TestForwardHolography:
    def test_zero_and_scaling(self):
        scene = default_scene(600.0, n_virtual=0)
        zeros = ComplexField(np.zeros(scene.grid_s.n_points), scene.grid_s, scene.omega, VELOCITY)
        assert np.all(forward_holography(zeros, scene).values == 0)
        v = plate_mode_velocity(PlateModeSpec(1, 2, frequency_hz=600.0), scene.grid_s)
        one = forward_holography(v, scene)
        two = forward_holography(v.with_values(2 * v.values), scene)
        np.testing.assert_allclose(two.values, 2 * one.values, rtol=1e-13)

    def test_matches_assembled_source_operator(self):
        # the same chain as the sampled matrix product, S as the radiator
        scene = default_scene(600.0, n_virtual=0)
        v = plate_mode_velocity(PlateModeSpec(2, 3, frequency_hz=600.0), scene.grid_s)
        t1 = surface_pressure_matrix(scene.grid_s, scene.omega, scene.constants)
        k_p, k_v = pressure_kernel_matrices(scene.grid_s, scene.grid_h, scene.omega, scene.constants)
        operator = k_p @ t1 + k_v
        np.testing.assert_allclose(forward_holography(v, scene).values, operator @ v.values, rtol=1e-12)

    def test_golden_fundamental_regression(self):
        # single central lobe, pinned after the first verified computation
        scene = default_scene(500.0, n_virtual=0)
        v = plate_mode_velocity(PlateModeSpec(1, 1, frequency_hz=500.0), scene.grid_s)
        p = forward_holography(v, scene).as_matrix()
        mags = np.abs(p)
        peak = np.unravel_index(mags.argmax(), mags.shape)
        assert peak in ((3, 3), (3, 4), (4, 3), (4, 4))
        assert mags.max() == pytest.approx(272.17425651793354, rel=1e-9)

    def test_wrong_grid_rejected(self):
        scene = default_scene(600.0, n_virtual=0)
        v = ComplexField(np.ones(scene.grid_e.n_points), scene.grid_e, scene.omega, VELOCITY)
        with pytest.raises(ContractError):
            forward_holography(v, scene)


class TestAddNoise:
    def field(self, n=100, seed=1):
        rng = np.random.default_rng(seed)
        grid = build_plane_grid(n, n, 0.01, 0.01, 0.0)
        values = rng.standard_normal(n * n) + 1j * rng.standard_normal(n * n)
        return ComplexField(values, grid, 1000.0, PRESSURE)

    def test_huge_snr_is_identity(self):
        p = self.field(10)
        noisy = add_noise(p, NoiseSpec(snr_db=300.0, seed=3))
        np.testing.assert_allclose(noisy.values, p.values, rtol=1e-12)

    def test_realized_snr(self):
        p = self.field(100)
        noisy = add_noise(p, NoiseSpec(snr_db=20.0, seed=5))
        noise = noisy.values - p.values
        snr = 10 * np.log10(np.mean(np.abs(p.values) ** 2) / np.mean(np.abs(noise) ** 2))
        assert snr == pytest.approx(20.0, abs=0.5)

    def test_deterministic(self):
        p = self.field(20)
        a = add_noise(p, NoiseSpec(snr_db=15.0, seed=42))
        b = add_noise(p, NoiseSpec(snr_db=15.0, seed=42))
        assert np.array_equal(a.values, b.values)

    def test_seeds_uncorrelated(self):
        p = self.field(100)
        n1 = add_noise(p, NoiseSpec(snr_db=10.0, seed=1)).values - p.values
        n2 = add_noise(p, NoiseSpec(snr_db=10.0, seed=2)).values - p.values
        rho = abs(np.vdot(n1, n2)) / (np.linalg.norm(n1) * np.linalg.norm(n2))
        assert rho < 0.05

    def test_zero_field_rejected(self):
        grid = build_plane_grid(2, 2, 0.01, 0.01, 0.0)
        p = ComplexField(np.zeros(4), grid, 100.0, PRESSURE)
        with pytest.raises(ContractError):
            add_noise(p, NoiseSpec(snr_db=30.0))
