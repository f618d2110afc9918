import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mslab import identities as I
from mslab.errors import OnJumpSet, TooCloseToK, WrongCrossingCount
from mslab.fields import ScalarField
from mslab.geometry import Disk, polyline
from mslab.models import ModelMinimizer
from mslab.pairs import PairView

CRACKTIP = ModelMinimizer.cracktip()
pair = PairView.of_model


class TestDLMS:
    def test_cracktip_at_tip(self):
        res = I.dlms_residual(pair(CRACKTIP), (0, 0), 1.0)
        assert res.lhs == pytest.approx(0.5, abs=1e-12)
        assert res.rhs == pytest.approx(0.5, abs=1e-12)
        assert res.terms["length_over_r"] == pytest.approx(1.0)
        assert res.terms["crossings"] == pytest.approx(1.0)

    @pytest.mark.parametrize("m", [ModelMinimizer.pure_jump(), ModelMinimizer.triple_junction()])
    def test_piecewise_constant(self, m):
        res = I.dlms_residual(pair(m), (0, 0), 0.7)
        assert res.lhs == 0.0
        assert abs(res.residual) <= 1e-14

    @pytest.mark.parametrize("y", [(0.2, 0.3), (-0.4, 0.1)])
    def test_cracktip_off_tip(self, y):
        assert abs(I.dlms_residual(pair(CRACKTIP), y, 0.6).residual) <= 1e-8

    def test_residual_is_difference(self):
        res = I.dlms_residual(pair(CRACKTIP), (0.1, 0.1), 0.5)
        assert res.residual == res.lhs - res.rhs
        assert res.quad_error >= 0

    @settings(max_examples=10, deadline=None)
    @given(st.floats(0, 2 * np.pi), st.floats(-2, 2), st.floats(-2, 2))
    def test_rigid_motion(self, th, tx, ty):
        p = pair(CRACKTIP)
        q = p.moved(th, (tx, ty))
        y = np.array([0.15, -0.2])
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        a = I.dlms_residual(p, y, 0.7)
        b = I.dlms_residual(q, R @ y + (tx, ty), 0.7)
        assert a.residual == pytest.approx(b.residual, abs=1e-9)
        a = I.boundary_identity_residual(p, y, 0.7, "rotation")
        b = I.boundary_identity_residual(q, R @ y + (tx, ty), 0.7, "rotation")
        assert a.residual == pytest.approx(b.residual, abs=1e-9)


class TestBoundaryIdentities:
    def test_translation_cracktip(self):
        res = I.boundary_identity_residual(pair(CRACKTIP), (0, 0), 1.0, "translation", (1, 0))
        assert res.terms["boundary"] == pytest.approx(-1.0, abs=1e-12)
        assert res.terms["crossings"] == pytest.approx(1.0)
        assert abs(res.residual) <= 1e-12

    def test_rotation_cracktip(self):
        res = I.boundary_identity_residual(pair(CRACKTIP), (0, 0), 1.0, "rotation")
        assert res.terms["boundary"] == pytest.approx(0.0, abs=1e-12)
        assert res.terms["crossings"] == pytest.approx(0.0, abs=1e-15)

    def test_translation_along_jump(self):
        res = I.boundary_identity_residual(pair(ModelMinimizer.pure_jump()), (0.1, 0), 1.0, "translation", (1, 0))
        assert res.lhs == 0.0 and abs(res.rhs) <= 1e-15

    @pytest.mark.parametrize("v", [(0, 1), (0.6, -0.8)])
    def test_other_directions(self, v):
        assert abs(I.boundary_identity_residual(pair(CRACKTIP), (0.2, 0.1), 0.8, "translation", v).residual) <= 1e-8

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            I.boundary_identity_residual(pair(CRACKTIP), (0, 0), 1.0, "shear")


class TestAM:
    @pytest.mark.parametrize("r", [1.0, 0.3])
    def test_cracktip(self, r):
        assert abs(I.am_identity_residual(pair(CRACKTIP), r).residual) <= 1e-10

    def test_pure_jump(self):
        with pytest.raises(WrongCrossingCount) as exc:
            I.am_identity_residual(pair(ModelMinimizer.pure_jump()), 1.0)
        assert exc.value.count == 2


class TestFactor:
    def test_default(self):
        f = I.cracktip_factor_solve()
        assert f.error <= 1e-8
        assert f.b2 == pytest.approx(0.6366197723675814, abs=1e-8)

    @pytest.mark.parametrize("n", [1, 2, 16, 2048])
    def test_any_rule_is_exact(self, n):
        # on the unit circle the integrand reduces to the constant -b^2/4
        assert I.cracktip_factor_solve(nodes=n).error <= 1e-15

    def test_sign(self):
        a, b = I.cracktip_factor_solve(sign=1), I.cracktip_factor_solve(sign=-1)
        assert b.b == -a.b and b.b2 == a.b2


class TestMagic:
    def test_negative_axis(self):
        res = I.magic_formula_residual(CRACKTIP, -1.0)
        ref = -1 / (8 * np.pi)
        assert complex(res.lhs) == pytest.approx(ref, rel=1e-12)
        assert complex(res.rhs) == pytest.approx(ref, rel=1e-8)

    def test_imaginary_unit(self):
        res = I.magic_formula_residual(CRACKTIP, 1j)
        ref = -1j / (8 * np.pi)
        assert complex(res.lhs) == pytest.approx(ref, rel=1e-12)
        assert complex(res.rhs) == pytest.approx(ref, rel=1e-8)

    def test_full_line(self):
        res = I.magic_formula_residual(ModelMinimizer.pure_jump(), 1j)
        assert abs(res.lhs) == 0.0
        assert abs(res.rhs) <= 1e-12

    def test_tail_bound_recorded(self):
        res = I.magic_formula_residual(CRACKTIP, 0.5 + 2j)
        assert res.terms["doubling_change"] <= res.terms["tail_bound"]

    def test_guards(self):
        with pytest.raises(TooCloseToK):
            I.magic_formula_residual(CRACKTIP, 0.5 + 1e-8j)
        with pytest.raises(ValueError):
            I.magic_formula_residual(CRACKTIP, 1j, R=5.0)


class TestEulerLagrange:
    def test_pure_jump(self):
        arc = np.stack([np.linspace(-0.5, 0.5, 7), np.zeros(7)], 1)
        res = I.euler_lagrange_residuals(pair(ModelMinimizer.pure_jump()), arc)
        assert res.max_neumann == 0 and res.max_curvature == 0 and res.max_bulk == 0

    def test_cracktip_grid_first_order(self):
        arc = np.stack([np.linspace(0.5, 1.0, 9), np.zeros(9)], 1)
        errs = []
        for h in (1 / 16, 1 / 32):
            n = int(3 / h) + 1
            f = ScalarField.from_function(CRACKTIP.sample, (-1.5, -1.5 + 0.3 * h), h, (n, n))
            res = I.euler_lagrange_residuals(PairView.of_field(f, polyline([[0, 0], [1.5, 0]])), arc)
            errs.append(res.max_neumann)
        assert errs[0] / errs[1] >= 2 ** 0.9

    def test_detects_noncritical_pair(self):
        h = 1 / 32
        n = int(2 / h) + 1
        f = ScalarField.from_function(lambda p: p[:, 0], (-1, -1), h, (n, n))
        arc = np.stack([np.full(9, 0.01), np.linspace(-0.4, 0.4, 9)], 1)
        res = I.euler_lagrange_residuals(PairView.of_field(f, polyline([[0.01, -0.9], [0.01, 0.9]])), arc)
        np.testing.assert_allclose(np.abs(res.neumann), 1.0, atol=1e-9)


class TestLWeak:
    def test_cracktip_plateau(self):
        prof = I.lweak_profile(pair(CRACKTIP), Disk((0, 0), 1.0), [10.0, 100.0, 1e4])
        np.testing.assert_allclose(prof.product, 1 / (4 * np.pi), rtol=1e-9)

    def test_small_M_sees_whole_disk(self):
        prof = I.lweak_profile(pair(CRACKTIP), Disk((0, 0), 1.0), [1e-3])
        assert prof.measure[0] == pytest.approx(np.pi, rel=1e-9)

    @pytest.mark.parametrize("m", [ModelMinimizer.constant(2.0), ModelMinimizer.pure_jump()])
    def test_flat_models(self, m):
        prof = I.lweak_profile(pair(m), Disk((0, 0), 1.0), [1.0, 10.0])
        assert np.all(prof.measure == 0)


def test_json_report():
    import json
    doc = json.loads(I.dlms_residual(pair(CRACKTIP), (0, 0), 1.0).to_json())
    assert {"identity", "lhs", "rhs", "residual", "terms", "nodes", "quad_error"} <= set(doc)


class TestSingularCircle:
    @pytest.mark.parametrize("kind", ["dlms", "translation", "rotation"])
    def test_circle_through_tip(self, kind):
        with pytest.raises(OnJumpSet):
            if kind == "dlms":
                I.dlms_residual(pair(CRACKTIP), (0.5, 0.0), 0.5)
            else:
                I.boundary_identity_residual(pair(CRACKTIP), (0.0, 0.3), 0.3, kind=kind)
