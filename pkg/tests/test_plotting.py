"""Unit tests for figure rendering and the barycentric map."""

import math

import numpy as np
import pytest

from esovreg import errors
from esovreg.compositions import CompositionalDataset
from esovreg.evalsim import DensityCurve
from esovreg.models import inverse_link
from esovreg.plotting import (
    SQRT3_2,
    TERNARY_VERTICES,
    component_panels,
    density_figure,
    density_grid_figure,
    save_figure,
    ternary_figure,
    ternary_xy,
)


def barycentric_of_xy(x, y):
    """Invert the plane map back to (p1, p2, p3)."""
    p3 = y / SQRT3_2
    p2 = x - p3 / 2.0
    return 1.0 - p2 - p3, p2, p3


class TestTernaryMap:
    def test_vertices(self):
        assert ternary_xy((1, 0, 0)) == TERNARY_VERTICES[0]
        assert ternary_xy((0, 1, 0)) == TERNARY_VERTICES[1]
        assert ternary_xy((0, 0, 1)) == TERNARY_VERTICES[2]

    def test_zero_part_lands_on_opposite_edge(self):
        # part 3 zero -> on the bottom edge (y = 0)
        assert ternary_xy((0.3, 0.7, 0.0))[1] == 0.0
        # part 1 zero -> on the right edge (x + y/sqrt(3) = 1)
        x, y = ternary_xy((0.0, 0.4, 0.6))
        assert abs(x + y / math.sqrt(3.0) - 1.0) < 1e-12
        # edge midpoint has the two remaining parts at exactly 0.5
        mx, my = ternary_xy((0.5, 0.5, 0.0))
        assert (mx, my) == (0.5, 0.0)

    def test_needs_three_parts(self):
        with pytest.raises(errors.NotThreeParts):
            ternary_xy((0.5, 0.5))

    def test_round_trip_through_plane(self):
        rng = np.random.default_rng(0)
        comps = rng.dirichlet(np.ones(3), size=50)
        for row in comps:
            back = barycentric_of_xy(*ternary_xy(row))
            np.testing.assert_allclose(back, row, atol=1e-12)


class TestTernaryFigure:
    def test_fitted_curve_stays_inside_triangle(self, tmp_path):
        rng = np.random.default_rng(1)
        n = 30
        cov = np.sort(rng.standard_normal(n))
        design = np.column_stack([np.ones(n), cov])
        beta = np.array([[0.5, -0.4], [1.2, 0.8]])
        comps = inverse_link(beta, design)

        grid = np.linspace(cov.min(), cov.max(), 100)
        curve = inverse_link(beta, np.column_stack([np.ones(100), grid]))
        xy = np.array([ternary_xy(row) for row in curve])
        # containment: barycentric coordinates of every curve point in [0,1]
        for px, py in xy:
            bary = barycentric_of_xy(px, py)
            assert all(-1e-12 <= b <= 1.0 + 1e-12 for b in bary)
        # monotone covariate ordering was preserved by construction
        assert np.all(np.diff(grid) > 0)

        fig = ternary_figure(comps, labels=("a", "b", "c"), curve=curve)
        out = tmp_path / "curve.svg"
        save_figure(fig, out)
        assert out.exists()

    def test_zero_rows_marked(self, tmp_path):
        comps = np.array([[0.5, 0.5, 0.0], [0.2, 0.3, 0.5]])
        fig = ternary_figure(comps)
        save_figure(fig, tmp_path / "z.svg")

    def test_rejects_non_ternary(self):
        with pytest.raises(errors.NotThreeParts):
            ternary_figure(np.full((4, 4), 0.25))


class TestPanelsAndDensities:
    def test_component_panels_any_dimension(self, tmp_path):
        rng = np.random.default_rng(2)
        resp = rng.dirichlet(np.ones(5), size=20)
        data = CompositionalDataset.from_covariates(resp, rng.standard_normal(20))
        fig = component_panels(data, fitted=resp)
        save_figure(fig, tmp_path / "panels.svg")
        assert (tmp_path / "panels.svg").exists()

    def test_component_panels_need_a_covariate(self):
        rng = np.random.default_rng(3)
        resp = rng.dirichlet(np.ones(3), size=10)
        data = CompositionalDataset.from_covariates(resp, None)
        with pytest.raises(errors.ValidationError):
            component_panels(data)

    def test_density_figures_render(self, tmp_path):
        grid = np.linspace(0, 5, 64)
        curve = DensityCurve(grid=grid, density=np.exp(-grid), bandwidth=0.3)
        curves = {"esov": curve, "aitchison": curve}
        save_figure(density_figure(curves), tmp_path / "d.svg")
        cells = [(25, 6, curves), (50, 6, curves)]
        save_figure(density_grid_figure(cells), tmp_path / "g.svg")
        assert (tmp_path / "d.svg").exists() and (tmp_path / "g.svg").exists()

    def test_svg_outputs_byte_stable(self, tmp_path):
        comps = np.array([[0.2, 0.3, 0.5], [0.4, 0.4, 0.2]])
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        save_figure(ternary_figure(comps), a)
        save_figure(ternary_figure(comps), b)
        assert a.read_bytes() == b.read_bytes()
