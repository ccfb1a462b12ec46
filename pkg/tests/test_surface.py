import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phfcox.cubical import PersistenceDiagram
from phfcox.surface import SurfaceGrid, mdw_weight, pooled_grid_bounds, rasterize_surface

pair = st.tuples(st.floats(-20, 20), st.floats(0, 10)).map(lambda t: (t[0], t[0] + t[1]))


@pytest.mark.parametrize("b,d,w", [(2, 5, 5), (-3, -1, 3), (0, 0, 0)])
def test_mdw_weight(b, d, w):
    assert mdw_weight(b, d) == w


def test_pooled_bounds_single_point():
    g = pooled_grid_bounds([PersistenceDiagram(0, [(-2, -1)])], 1.0, (10, 10), 3.0, refine=False)
    assert (g.x_min, g.x_max, g.y_min, g.y_max) == (-5, 1, -4, 2)
    assert (g.n_x, g.n_y) == (10, 10)


def test_pooled_bounds_two_diagrams():
    g = pooled_grid_bounds([PersistenceDiagram(0, [(-5, -1)]), PersistenceDiagram(0, [(0, 2)])],
                           0.5, (10, 10))
    assert (g.x_min, g.x_max) == (-5 - 1.5, 0 + 1.5)


def test_pooled_bounds_refines_to_half_sigma():
    g = pooled_grid_bounds([PersistenceDiagram(0, [(-40, 10)])], 0.3, (50, 50))
    assert g.dx <= 0.15 + 1e-12 and g.dy <= 0.15 + 1e-12


def test_pooled_bounds_empty_pool():
    with pytest.raises(ValueError):
        pooled_grid_bounds([PersistenceDiagram(0, []), PersistenceDiagram(0, [])], 1.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        SurfaceGrid(1, 0, 0, 1)
    with pytest.raises(ValueError):
        SurfaceGrid(0, 1, 0, 1, 1, 5)


def test_empty_and_zero_weight_surfaces():
    g = SurfaceGrid(-3, 3, -3, 3, 7, 7)
    assert not rasterize_surface(PersistenceDiagram(0, []), g, 1.0).values.any()
    assert not rasterize_surface(PersistenceDiagram(0, [(0, 0)]), g, 1.0).values.any()


def test_value_at_kernel_center_equals_weight():
    # cell centers at integers: x in -5..5, y in -1..9
    g = SurfaceGrid(-5.5, 5.5, -1.5, 9.5, 11, 11)
    s = rasterize_surface(PersistenceDiagram(0, [(-2, 4)]), g, 1.0)
    i = int(np.argmin(abs(g.x_centers + 2)))
    j = int(np.argmin(abs(g.y_centers - 4)))
    assert s.values[i, j] == pytest.approx(6.0, abs=1e-12)


def test_direct_formula():
    rng = np.random.default_rng(0)
    pts = [(float(b), float(b + rng.uniform(0, 3))) for b in rng.normal(size=4)]
    g = SurfaceGrid(-3, 4, -3, 6, 9, 13)
    sigma = 0.7
    s = rasterize_surface(PersistenceDiagram(1, pts), g, sigma)
    for i, x in enumerate(g.x_centers):
        for j, y in enumerate(g.y_centers):
            ref = sum(math.exp(-((x - b) ** 2 + (y - d) ** 2) / sigma**2) * max(abs(b), abs(d), d - b)
                      for b, d in pts)
            assert s.values[i, j] == pytest.approx(ref, rel=1e-12, abs=1e-300)


@settings(max_examples=30, deadline=None)
@given(st.lists(pair, max_size=5), st.lists(pair, max_size=5), st.floats(0.2, 3.0))
def test_additivity(a, b, sigma):
    g = SurfaceGrid(-25, 25, -25, 35, 12, 14)
    sa = rasterize_surface(PersistenceDiagram(0, a), g, sigma).values
    sb = rasterize_surface(PersistenceDiagram(0, b), g, sigma).values
    sab = rasterize_surface(PersistenceDiagram(0, a + b), g, sigma).values
    np.testing.assert_allclose(sab, sa + sb, rtol=1e-12, atol=1e-12)
    assert np.all(sab >= 0) and np.all(np.isfinite(sab))


@settings(max_examples=30, deadline=None)
@given(pair, st.floats(0.3, 3.0))
def test_peak_at_nearest_cell(p, sigma):
    if mdw_weight(*p) < 1e-6:
        return
    g = SurfaceGrid(-22, 22, -22, 32, 30, 30)
    s = rasterize_surface(PersistenceDiagram(0, [p]), g, sigma).values
    i = int(np.argmin(abs(g.x_centers - p[0])))
    j = int(np.argmin(abs(g.y_centers - p[1])))
    assert s[i, j] == pytest.approx(s.max(), rel=1e-12)


def test_continuity_in_sigma():
    rng = np.random.default_rng(1)
    g = SurfaceGrid(-6, 6, -6, 8, 10, 10)
    for _ in range(5):
        d = PersistenceDiagram(0, [(b, b + abs(rng.normal())) for b in rng.normal(size=3)])
        base = rasterize_surface(d, g, 1.0).values
        diffs = [np.abs(rasterize_surface(d, g, 1.0 + h).values - base).max() for h in (1e-1, 1e-2, 1e-3)]
        assert diffs[0] > diffs[1] > diffs[2]
        assert diffs[2] < 1e-2 * max(1.0, base.max())
