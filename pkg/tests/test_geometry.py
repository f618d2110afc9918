import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mslab.errors import EmptySet, TangentialCrossing
from mslab.geometry import (Disk, JumpSet, circle_crossings, curvature_profile, hausdorff_distance,
                            length_in_disk, polyline)


def line(y=0.0, L=5.0):
    return polyline([[-L, y], [L, y]])


def propeller(R=5.0):
    a = np.array([0.0, 2 * np.pi / 3, 4 * np.pi / 3])
    return JumpSet(tuple(np.array([[0.0, 0.0], [R * np.cos(t), R * np.sin(t)]]) for t in a))


class TestJumpSet:
    def test_rejects_short_or_repeated(self):
        with pytest.raises(ValueError):
            polyline([[0, 0]])
        with pytest.raises(ValueError):
            polyline([[0, 0], [0, 0], [1, 0]])

    def test_length_is_sum_of_segments(self):
        J = polyline([[0, 0], [3, 4], [3, 5]])
        assert J.length == pytest.approx(6.0)

    def test_json_round_trip(self):
        J = JumpSet((np.array([[0, 0], [1, 0], [1, 1]]), np.array([[2, 2], [3, 2], [3, 3]])), (False, True))
        back = JumpSet.from_json(J.to_json())
        assert back.closed == (False, True)
        for a, b in zip(J.chains, back.chains):
            np.testing.assert_array_equal(a, b)


class TestLengthInDisk:
    def test_line_through_center(self):
        assert length_in_disk(line(), Disk((0, 0), 1.0)) == pytest.approx(2.0, abs=1e-14)

    def test_triple_junction(self):
        assert length_in_disk(propeller(), Disk((0, 0), 1.0)) == pytest.approx(3.0, abs=1e-14)

    def test_half_line(self):
        assert length_in_disk(polyline([[0, 0], [5, 0]]), Disk((0, 0), 0.5)) == pytest.approx(0.5, abs=1e-14)

    def test_empty(self):
        assert length_in_disk(JumpSet.empty(), Disk((0, 0), 1.0)) == 0.0

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.05, 3.0), st.floats(0.05, 3.0), st.floats(-1, 1), st.floats(-1, 1))
    def test_monotone_in_radius(self, r1, r2, cx, cy):
        J = JumpSet((np.array([[-2, -1], [0, 0.3], [1, 2], [2.5, 1.0]]), np.array([[0, -2], [0.2, 2.0]])))
        lo, hi = sorted((r1, r2))
        D1, D2 = Disk((cx, cy), lo), Disk((cx, cy), hi)
        assert length_in_disk(J, D1) <= length_in_disk(J, D2) + 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.01, 0.5))
    def test_density_at_a_vertex(self, r):
        # a polygonal arc; below the segment length the disk sees two straight pieces
        J = polyline([[-1, 0], [0, 0], [0.8, 0.6]])
        assert length_in_disk(J, Disk((0, 0), r)) / r >= 1.0 - 1e-12


class TestCrossings:
    def test_half_line(self):
        cr = circle_crossings(polyline([[0, 0], [5, 0]]), Disk((0, 0), 1.0))
        assert len(cr) == 1
        np.testing.assert_allclose(cr[0].point, [1, 0], atol=1e-15)
        assert cr[0].cosine == pytest.approx(1.0)

    def test_line_through_center(self):
        cr = circle_crossings(line(), Disk((0, 0), 1.0))
        assert len(cr) == 2
        assert all(c.cosine == pytest.approx(1.0) for c in cr)
        for c in cr:  # tangent points outward
            assert c.tangent @ c.point > 0

    def test_oblique_line(self):
        cr = circle_crossings(line(0.6), Disk((0, 0), 1.0))
        assert [round(c.cosine, 12) for c in cr] == [0.8, 0.8]

    def test_tangential(self):
        with pytest.raises(TangentialCrossing):
            circle_crossings(line(1.0), Disk((0, 0), 1.0))

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.2, 0.8), st.floats(-1e-4, 1e-4))
    def test_count_stable_under_small_perturbation(self, r, dr):
        J = JumpSet((np.array([[0.0, 0.0], [1.0, 0.1], [2.0, 0.0]]), np.array([[-1.0, -1.0], [-0.05, 1.0]])))
        n0 = len(circle_crossings(J, Disk((0.1, 0.05), r)))
        assert len(circle_crossings(J, Disk((0.1, 0.05), r + dr))) == n0

    def test_unit_tangents(self):
        for c in circle_crossings(propeller(), Disk((0.1, -0.2), 1.3)):
            assert abs(np.linalg.norm(c.tangent) - 1.0) <= 1e-12
            assert 0 < c.cosine <= 1


class TestHausdorff:
    def test_identical(self):
        A = np.random.default_rng(1).random((50, 2))
        assert hausdorff_distance(A, A) == 0.0

    def test_translated_segment(self):
        x = np.linspace(0, 1, 1001)
        A = np.stack([x, 0 * x], 1)
        B = np.stack([x, 0 * x + 0.03], 1)
        assert hausdorff_distance(A, B) == pytest.approx(0.03, abs=1e-12)

    def test_longer_segment(self):
        A = np.stack([np.linspace(0, 1, 1001), np.zeros(1001)], 1)
        B = np.stack([np.linspace(0, 2, 2001), np.zeros(2001)], 1)
        assert hausdorff_distance(A, B) == pytest.approx(1.0, abs=1e-12)

    def test_empty(self):
        with pytest.raises(EmptySet):
            hausdorff_distance(np.zeros((0, 2)), np.zeros((3, 2)))


class TestCurvature:
    def test_straight(self):
        k = curvature_profile(polyline(np.stack([np.linspace(0, 1, 11), np.linspace(0, 2, 11)], 1)))[0]
        np.testing.assert_array_equal(k[1:-1], 0.0)

    def test_circle_is_exact(self):
        errs = []
        for n in (32, 64, 128):
            t = np.linspace(0, 2 * np.pi, n, endpoint=False)
            R = 2.0
            J = JumpSet((np.stack([R * np.cos(t), R * np.sin(t)], 1),), (True,))
            errs.append(np.max(np.abs(curvature_profile(J)[0] - 1 / R)))
        # three-point curvature on an inscribed regular polygon is exact
        assert max(errs) < 1e-12

    def test_parabola_converges(self):
        # y = x^2 / 2 has curvature (1 + x^2)^(-3/2)
        errs = []
        for n in (21, 41, 81):
            x = np.linspace(-1, 1, n)
            J = polyline(np.stack([x, x * x / 2], 1))
            errs.append(np.nanmax(np.abs(curvature_profile(J)[0] - (1 + x * x) ** -1.5)))
        rates = np.log2(np.array(errs[:-1]) / errs[1:])
        assert np.all(rates > 1.8)

    def test_orientation_flip(self):
        t = np.linspace(0, 1, 12)
        P = np.stack([np.cos(t), np.sin(t)], 1)
        k1 = curvature_profile(polyline(P))[0]
        k2 = curvature_profile(polyline(P[::-1]))[0]
        np.testing.assert_allclose(k1[1:-1], -k2[::-1][1:-1], rtol=1e-12)
        assert np.all(k1[1:-1] > 0)

    def test_spacing_guard(self):
        with pytest.raises(ValueError):
            curvature_profile(polyline([[0, 0], [1, 0], [1.01, 0.01]]))
