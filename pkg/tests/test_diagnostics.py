import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mslab.diagnostics import brute_force_flatness, classify_point, closeness, excess, mean_flatness
from mslab.energy import dirichlet
from mslab.errors import EmptyIntersection
from mslab.geometry import Disk, JumpSet, hausdorff_distance, polyline, sample_segments
from mslab.models import ModelMinimizer
from mslab.pairs import PairView

UNIT = Disk((0, 0), 1.0)
CRACKTIP = ModelMinimizer.cracktip()
TRIPLE = ModelMinimizer.triple_junction()
JUMP = ModelMinimizer.pure_jump()


class TestFlatness:
    def test_straight(self):
        assert mean_flatness(polyline([[-3, 0.2], [3, -0.4]]), UNIT).beta == pytest.approx(0, abs=1e-15)

    def test_half_line(self):
        assert mean_flatness(CRACKTIP.jumpset(5.0), UNIT).beta == pytest.approx(0, abs=1e-15)

    def test_triple_against_grid(self):
        J = TRIPLE.jumpset(5.0)
        beta = mean_flatness(J, UNIT).beta
        grid = brute_force_flatness(J, UNIT, 360, 100)
        assert beta <= grid + 1e-12
        assert beta == pytest.approx(grid, rel=1e-3)
        # frozen closed form: line along one arm, the other two arms at 60 degrees give 2 * (3/4) / 3
        assert beta == pytest.approx(0.5, rel=1e-12)

    def test_empty(self):
        with pytest.raises(EmptyIntersection):
            mean_flatness(polyline([[3, 3], [4, 4]]), UNIT)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.2, 0.95))
    def test_scaling_inequality(self, tau):
        J = JumpSet((np.array([[-1, -0.3], [0, 0], [0.6, 0.5], [1.2, 0.4]]), np.array([[0.1, -1], [0.3, 1]])))
        x = np.array([0.05, 0.02])
        b1 = mean_flatness(J, Disk(x, 1.0)).beta
        b2 = mean_flatness(J, Disk(x, tau)).beta
        assert b2 <= tau**-3 * b1 + 1e-12


class TestExcess:
    def test_parallel_and_perpendicular(self):
        J = polyline([[-3, 0], [3, 0]])
        assert excess(J, UNIT, V=(1, 0)).excess == pytest.approx(0, abs=1e-15)
        assert excess(J, UNIT, V=(0, 1)).excess == pytest.approx(2 * 2.0 / 1.0)

    def test_quarter_arc_against_sweep(self):
        t = np.linspace(np.pi / 2, np.pi, 400)
        J = polyline(np.stack([1 + np.cos(t), np.sin(t)], 1))
        best = excess(J, UNIT).excess
        sweep = min(excess(J, UNIT, V=(np.cos(a), np.sin(a))).excess for a in np.deg2rad(np.arange(180)))
        assert best <= sweep + 1e-12
        assert best == pytest.approx(sweep, rel=1e-3)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0, np.pi))
    def test_optimal_below_any(self, a):
        J = TRIPLE.jumpset(3.0)
        opt = excess(J, UNIT)
        assert opt.excess <= excess(J, UNIT, V=(np.cos(a), np.sin(a))).excess + 1e-12
        assert 0 <= opt.excess <= 2 * opt.length / opt.r + 1e-12


class TestCloseness:
    def test_jump_on_K(self):
        rep = closeness(PairView.of_model(JUMP.moved(0.7)), (0.0, 0.0), 0.5, "j")
        assert rep.omega == pytest.approx(0, abs=1e-9)
        assert abs(np.sin(rep.theta - 0.7)) <= 1e-9

    def test_cracktip_class_c(self):
        rep = closeness(PairView.of_model(CRACKTIP), (0, 0), 1.0, "c")
        assert rep.omega == pytest.approx(0, abs=1e-9)
        assert rep.dirichlet == 0.0

    def test_cracktip_class_j(self):
        rep = closeness(PairView.of_model(CRACKTIP), (0, 0), 1.0, "j")
        assert rep.dirichlet == pytest.approx(2.0, rel=1e-10)
        # oracle: brute-force angle sweep with dense samples of both sets
        K = sample_segments(np.array([[[0, 0], [2, 0]]]), 1e-3)
        vals = []
        for a in np.deg2rad(np.arange(0, 180, 0.5)):
            e = np.array([np.cos(a), np.sin(a)])
            line = np.linspace(-2, 2, 4001)[:, None] * e
            vals.append(hausdorff_distance(K, line))
        assert rep.hausdorff == pytest.approx(min(vals), abs=2e-3)
        assert rep.theta >= 0 and rep.theta < 2 * np.pi

    @settings(max_examples=4, deadline=None)
    @given(st.floats(0, 2 * np.pi), st.floats(-1, 1), st.floats(-1, 1))
    def test_rigid_motion_invariance(self, th, tx, ty):
        p = PairView.of_model(CRACKTIP)
        x = np.array([0.3, 0.2])
        q = p.moved(th, (tx, ty))
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        y = R @ x + (tx, ty)
        for cls in "jtc":
            a, b = closeness(p, x, 0.4, cls).omega, closeness(q, y, 0.4, cls).omega
            assert a == pytest.approx(b, abs=1e-9)
        J1, J2 = p.jumpset(), q.jumpset()
        assert mean_flatness(J1, Disk(x, 0.5)).beta == pytest.approx(mean_flatness(J2, Disk(y, 0.5)).beta, abs=1e-9)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.1, 0.95), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
    def test_density_scaling(self, tau, x0, y0):
        p = PairView.of_model(CRACKTIP)
        x = np.array([x0, y0])
        d1 = dirichlet(p, Disk(x, 1.0))
        d2 = dirichlet(p, Disk(x, tau)) / tau
        assert d2 <= d1 / tau * (1 + 1e-9)


class TestClassify:
    scales = [0.5, 0.25, 0.125]

    def test_jump(self):
        assert classify_point(PairView.of_model(JUMP), (0.2, 0), self.scales).label == "jump"

    def test_triple(self):
        assert classify_point(PairView.of_model(TRIPLE), (0, 0), self.scales).label == "triple"

    def test_loose_end(self):
        rep = classify_point(PairView.of_model(CRACKTIP), (0, 0), self.scales)
        assert rep.label == "loose-end"
        np.testing.assert_allclose(rep.d, 1.0, rtol=1e-9)

    def test_no_K(self):
        rep = classify_point(PairView.of_model(ModelMinimizer.constant(1.0)), (0, 0), self.scales)
        assert rep.label == "unknown"
        assert rep.as_dict()["omega_c"] == [None] * 3

    def test_json_keys(self):
        doc = classify_point(PairView.of_model(JUMP), (0, 0), self.scales).as_dict()
        assert set(doc) == {"point", "scales", "omega_j", "omega_t", "omega_c", "d", "label"}

    def test_needs_three_scales(self):
        with pytest.raises(ValueError):
            classify_point(PairView.of_model(JUMP), (0, 0), [0.5, 0.25])
