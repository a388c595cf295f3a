import numpy as np
import pytest

from levelset_topopt.cases import (
    CASE_NAMES,
    CASES,
    cantilever_seven_holes,
    get_case,
    grid_coordinates,
    init_level_set,
)
from levelset_topopt.exceptions import ConfigurationError
from levelset_topopt.grid import Edge, build_mesh


def at(case, x, y):
    return float(case.init_phi(np.array(x), np.array(y), case.lx, case.ly))


def mirrored(phi, axis):
    return phi[::-1] if axis == "y" else phi[:, ::-1]


class TestRegistry:
    def test_names(self):
        assert set(CASE_NAMES) == {
            "half_wheel", "bridge", "cantilever", "cantilever_asymmetric",
            "MBB_beam", "cantilever_twoforces", "inverter",
        }

    def test_unknown(self):
        with pytest.raises(ConfigurationError, match="cantilever"):
            get_case("foo")

    def test_cantilever(self):
        c = get_case("cantilever")
        assert c.Lambda == 40 and (c.lx, c.ly) == (2.0, 1.0)
        (load,) = c.loads
        assert load.point == (2.0, 0.5) and load.component == 1 and load.magnitude == -1.0
        assert c.supports[0].where == Edge("left") and c.supports[0].components == (0, 1)

    def test_alternative_multipliers(self):
        assert get_case("cantilever_asymmetric").Lambda == 60
        assert get_case("cantilever_asymmetric").Lambda_alternatives == (70.0,)
        assert (get_case("half_wheel").Lambda, get_case("half_wheel").Lambda_alternatives) == (30, (50.0,))
        assert (get_case("bridge").Lambda, get_case("bridge").Lambda_alternatives) == (20, (30.0,))

    def test_half_wheel_supports(self):
        c = get_case("half_wheel")
        assert [(s.where, s.components) for s in c.supports] == [((0.0, 0.0), (0, 1)), ((2.0, 0.0), (1,))]
        assert all(s.pointwise for s in c.supports)
        assert c.loads[0].point == (1.0, 0.0)

    def test_mbb(self):
        c = get_case("MBB_beam")
        assert c.lx == 3.0 and c.Lambda == 130
        assert c.loads[0].point == (0.0, 1.0)
        assert c.supports[0].components == (0,) and c.supports[1].where == (3.0, 0.0)

    def test_twoforces(self):
        c = get_case("cantilever_twoforces")
        assert (c.lx, c.ly, c.nx, c.ny, c.Lambda) == (1.0, 1.0, 121, 121, 60.0)
        assert [l.point for l in c.loads] == [(1.0, 0.0), (1.0, 1.0)]

    def test_inverter(self):
        c = get_case("inverter")
        assert c.is_inverter
        assert c.Lambda == 0.01 and c.material.E == 20 and c.material.eps_er == 0.01
        assert c.robin.k_s == 0.01
        assert c.monitor.eta_in == 2 and c.monitor.eta_out == 1
        assert c.monitor.gamma_in == Edge("left", 0.47, 0.53)
        assert c.monitor.gamma_out == Edge("right", 0.43, 0.57)
        assert c.loads[0].point == (0.0, 0.5) and c.loads[0].magnitude == 0.05
        assert c.beta0_init == 1.0 and c.itmax_factor == 2.0

    def test_overrides(self):
        c = get_case("cantilever").with_grid(62, 31).with_lambda(55)
        assert (c.nx, c.ny, c.Lambda) == (62, 31, 55.0)
        assert get_case("cantilever").nx == 150

    def test_fixed_mask(self):
        c = get_case("inverter")
        mesh = build_mesh(1.0, 1.0, 61, 61)
        mask = c.fixed_mask(mesh)
        pts = mesh.vertices[mesh.triangles[mask]]
        assert mask.any()
        in_first = (pts[..., 0] <= 0.05 + 1e-14).all(axis=1)
        in_second = (pts[..., 0] >= 0.9 - 1e-14).all(axis=1)
        assert np.all(in_first | in_second)
        assert get_case("cantilever").fixed_mask(mesh) is None


class TestInitialLevelSets:
    def test_cantilever_values(self):
        c = get_case("cantilever")
        assert at(c, 0.0, 0.5) == pytest.approx(0.6, abs=1e-12)
        # corner cut: 100 * 0.1 dominates, the other corner term is inactive
        corner = at(c, 2.0, 1.0)
        assert corner > 0 and corner == pytest.approx(-1.0 - 0.4 + 10.0, abs=1e-12)

    @pytest.mark.parametrize("name", CASE_NAMES)
    def test_both_signs(self, name):
        c = CASES[name]
        phi = init_level_set(c)
        assert phi.shape == (c.ny + 1, c.nx + 1)
        assert (phi < 0).any() and (phi > 0).any()

    @pytest.mark.parametrize("name", [n for n in CASE_NAMES if CASES[n].mirror])
    def test_mirror_symmetry(self, name):
        c = CASES[name]
        phi = init_level_set(c)
        assert np.abs(phi - mirrored(phi, c.mirror)).max() <= 1e-12

    @pytest.mark.parametrize("name", CASE_NAMES)
    def test_default_grid(self, name):
        c = CASES[name]
        assert c.lx / c.nx == pytest.approx(c.ly / c.ny, rel=1e-12)
        if c.mirror == "y":
            assert c.ny % 2 == 1
        if c.mirror == "x":
            assert c.nx % 2 == 0

    def test_grid_check(self):
        with pytest.raises(ConfigurationError):
            init_level_set(get_case("cantilever"), 10, 10)

    def test_seven_holes_variant(self):
        phi = init_level_set(cantilever_seven_holes, 62, 31)
        assert np.abs(phi - phi[::-1]).max() <= 1e-12
        assert not np.array_equal(phi, init_level_set(get_case("cantilever"), 62, 31))

    def test_grid_coordinates(self):
        X, Y = grid_coordinates(2.0, 1.0, 4, 2)
        assert X.shape == (3, 5)
        assert X[0, -1] == 2.0 and Y[-1, 0] == 1.0

    def test_inverter_solid_near_ports(self):
        c = get_case("inverter")
        for x, y in [(0.0, 0.5), (0.02, 0.48), (0.95, 0.5), (1.0, 0.43), (1.0, 0.57)]:
            assert at(c, x, y) < 0
