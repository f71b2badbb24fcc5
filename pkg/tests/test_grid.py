import numpy as np
import pytest

from qns.grid import (GridError, HYPERBOLIC, StretchConfig, UNIFORM, build_grid,
                      build_periodic_grid, metric_coeff, nodes_1d, stretch_map)

HYP = StretchConfig(beta=2.5, length=1.0, mode=HYPERBOLIC)
UNI = StretchConfig(length=1.0, mode=UNIFORM)


class TestStretchMap:
    def test_boundary_fixed_points(self):
        assert stretch_map(0.0, HYP) == pytest.approx(0.0, abs=1e-14)
        assert stretch_map(1.0, HYP) == pytest.approx(1.0, abs=1e-14)

    def test_midpoint_symmetry(self):
        assert stretch_map(0.5, HYP) == pytest.approx(0.5, abs=1e-14)

    def test_quarter_point(self):
        # high-precision evaluation of the arctan map at xi = 0.25
        assert stretch_map(0.25, HYP) == pytest.approx(0.23958820237049, abs=1e-12)

    def test_uniform_is_identity_scaled(self):
        cfg = StretchConfig(length=3.0, mode=UNIFORM)
        xi = np.linspace(0, 1, 11)
        assert np.allclose(stretch_map(xi, cfg), 3.0 * xi)

    def test_odd_symmetry_about_center(self):
        xi = np.linspace(0.0, 1.0, 31)
        x = stretch_map(xi, HYP)
        assert np.allclose(x + x[::-1], 1.0, atol=1e-14)

    def test_domain_error(self):
        with pytest.raises(GridError):
            stretch_map(1.2, HYP)
        with pytest.raises(GridError):
            stretch_map(-0.1, UNI)

    def test_monotone_for_various_beta(self):
        for beta in (0.8, 1.0, 2.5, 5.0, 20.0):
            cfg = StretchConfig(beta=beta, mode=HYPERBOLIC)
            x = stretch_map(np.linspace(0, 1, 200), cfg)
            assert np.all(np.diff(x) > 0)


class TestMetricCoeff:
    def test_uniform_unit_length(self):
        assert metric_coeff(0.3, UNI) == pytest.approx(1.0)

    def test_uniform_scales_with_length(self):
        cfg = StretchConfig(length=4.0, mode=UNIFORM)
        assert metric_coeff(0.7, cfg) == pytest.approx(0.25)

    def test_center_value(self):
        # 1 / (L beta tan(1/beta)) evaluated at beta = 2.5
        assert metric_coeff(0.5, HYP) == pytest.approx(0.94608896801564, abs=1e-12)

    def test_matches_finite_difference_of_map(self):
        xi = np.linspace(0.05, 0.95, 19)
        step = 1e-6
        fd = (stretch_map(xi + step, HYP) - stretch_map(xi - step, HYP)) / (2 * step)
        assert np.abs(metric_coeff(xi, HYP) - 1.0 / fd).max() < 1e-7

    def test_symmetry(self):
        xi = np.linspace(0.0, 1.0, 41)
        h = metric_coeff(xi, HYP)
        assert np.allclose(h, h[::-1], atol=1e-14)


class TestBuildGrid:
    def test_paper_cavity_layout(self):
        g = build_grid(16, 16, UNI)
        assert g.d_xi == pytest.approx(1.0 / 17)
        assert g.x_nodes.size == 18 and g.y_nodes.size == 18
        assert g.n_interior == 256

    def test_large_domain_spacing(self):
        g = build_grid(16, 16, StretchConfig(length=2 * np.pi, mode=UNIFORM))
        assert np.allclose(np.diff(g.x_nodes), 2 * np.pi / 17)

    def test_stretched_nodes_compose_map(self):
        g = build_grid(4, 4, HYP)
        xi = np.arange(6) / 5.0
        assert np.allclose(g.x_nodes, stretch_map(xi, HYP))
        assert np.allclose(g.h_xi, metric_coeff(xi, HYP))

    def test_rejects_tiny_grids(self):
        with pytest.raises(GridError):
            build_grid(1, 4, UNI)

    def test_boundary_clustering(self):
        # beta = 2.5 concentrates nodes near the edges: smallest spacing there
        g = build_grid(32, 32, HYP)
        spacing = np.diff(g.x_nodes)
        assert np.argmin(spacing) in (0, spacing.size - 1)
        assert spacing.min() < spacing.max()

    def test_metric_positive_everywhere(self):
        g = build_grid(12, 12, HYP)
        assert np.all(g.h_xi > 0) and np.all(g.h_eta > 0)


class TestPeriodicGrid:
    def test_exact_wraparound_geometry(self):
        g = build_periodic_grid(16, 16, 2 * np.pi)
        dx = 2 * np.pi / 16
        assert np.allclose(np.diff(g.x_nodes), dx)
        # ghost slots coincide with the opposite interior column modulo L
        assert g.x_nodes[0] == pytest.approx(g.x_nodes[-2] - 2 * np.pi)
        assert g.x_nodes[-1] == pytest.approx(g.x_nodes[1] + 2 * np.pi)

    def test_uniform_metric(self):
        g = build_periodic_grid(8, 8, 2 * np.pi)
        assert np.allclose(g.h_xi, 1.0 / (2 * np.pi))

    def test_rejects_stretched_periodic(self):
        from qns.grid import Grid2D

        with pytest.raises(GridError):
            Grid2D(8, 8, HYP, periodic=True)


class TestConfigValidation:
    def test_rejects_bad_length(self):
        with pytest.raises(GridError):
            StretchConfig(length=0.0)

    def test_rejects_bad_beta(self):
        with pytest.raises(GridError):
            StretchConfig(beta=-1.0, mode=HYPERBOLIC)

    def test_rejects_unknown_mode(self):
        with pytest.raises(GridError):
            StretchConfig(mode="chebyshev")

    def test_uniform_ignores_beta(self):
        cfg = StretchConfig(beta=-5.0, mode=UNIFORM)
        assert stretch_map(0.5, cfg) == pytest.approx(0.5)


def test_nodes_1d_matches_grid_layout():
    x, h, d = nodes_1d(16, UNI)
    assert d == pytest.approx(1 / 17)
    assert x.size == 18
    assert np.allclose(h, 1.0)
