"""
재매개화 엔진 테스트 (오도미터, 합성, 교환, 대합 타워, 정수 작용)
"""
import unittest
from itertools import count
from pathlib import Path
import sys

from hypothesis import given, settings
from hypothesis import strategies as st

# 현재 디렉토리를 Python 경로에 추가
sys.path.insert(0, str(Path(__file__).parent))

from clopen_algebra import E, EMPTY_SET, basis, complement, equal_on_window, intersect, member, union
from core_combinatorics import EMPTY, ZERO, DyadicElem, FinSet, enum_finset, generator, window_group, window_points
from feasible_space import TPoint
from reparametrization import (
    Piece, PiecewiseMap, ScanCapExceeded, ZActionUndefined, apply_piecewise, build_swap, build_tower,
    build_zaction, compose, decomposition_audit, default_neighborhoods, dyadic_action, identity_map,
    node_address, odometer, odometer_inverse, odometer_inverse_reference, odometer_reference, piece_table,
    swap_audit, zaction_backward, zaction_forward
)


class TestPiecewiseMaps(unittest.TestCase):
    """조각별 사상 테스트"""

    def test_odometer_examples(self):
        """오도미터 증가 예시"""
        odo = odometer()
        self.assertEqual(apply_piecewise(odo, EMPTY, 8), FinSet.of(1))
        self.assertEqual(apply_piecewise(odo, FinSet.of(1), 8), FinSet.of(2))
        self.assertEqual(apply_piecewise(odo, FinSet.of(1, 2), 8), FinSet.of(3))
        self.assertEqual(apply_piecewise(odo, FinSet.of(1, 2, 3), 8), FinSet.of(4))

    def test_odometer_increments_indices(self):
        """열거 인덱스 i ↦ i+1"""
        odo = odometer()
        for i in range(256):
            self.assertEqual(odo(enum_finset(i)), enum_finset(i + 1))

    def test_odometer_regions(self):
        """첫 조각 영역은 E1ᶜ, E1∩E2ᶜ 이고 처음 다섯 조각은 서로소"""
        odo = odometer()
        odo.locate(FinSet.of(1, 2, 3, 4))
        pieces = odo.pieces
        self.assertGreaterEqual(len(pieces), 5)
        self.assertTrue(equal_on_window(pieces[0].region, complement(E(1)), 6))
        self.assertTrue(equal_on_window(pieces[1].region, intersect(E(1), complement(E(2))), 6))
        for i in range(5):
            for j in range(i + 1, 5):
                self.assertTrue(equal_on_window(intersect(pieces[i].region, pieces[j].region), EMPTY_SET, 6))

    def test_scan_cap(self):
        """예산 안에 덮지 못하면 ScanCapExceeded"""
        with self.assertRaises(ScanCapExceeded):
            apply_piecewise(odometer(), FinSet.of(1, 2, 3, 4, 5), 3)
        with self.assertRaises(ScanCapExceeded):
            apply_piecewise(odometer_inverse(), EMPTY, 10)
        with self.assertRaises(ValueError):
            apply_piecewise(odometer(), EMPTY, 0)

    def test_identity_and_compose(self):
        """항등 합성과 감소∘증가"""
        odo = odometer()
        with_identity = compose(odo, identity_map())
        for k in window_points(5):
            self.assertEqual(with_identity(k), odo(k))
        both = compose(odometer_inverse(), odometer())
        for i in range(32):
            self.assertEqual(both(enum_finset(i)), enum_finset(i))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=255))
    def test_compose_is_sequential(self, i):
        """합성은 순차 적용과 같음"""
        a, b = odometer(), odometer_inverse()
        k = enum_finset(i + 1)
        self.assertEqual(compose(a, compose(a, b))(k), a(a(b(k))))

    def test_decomposition_audit(self):
        """조각 서로소, 창에서 단사, 기준 사상과 일치"""
        self.assertEqual(decomposition_audit(odometer(), 6, expected=odometer_reference), [])
        failures = decomposition_audit(odometer_inverse(), 3, scan_cap=10)
        self.assertEqual(len(failures), 1)
        self.assertIn("odometer-inverse", failures[0])
        both = compose(odometer_inverse(), odometer())
        self.assertEqual(decomposition_audit(both, 4, expected=lambda k: k), [])

    def test_decomposition_audit_rejects_wrong_moves(self):
        """오도미터 영역에 모두 g_1 을 붙인 사상은 기준값과 어긋남"""
        def pieces():
            for j in count(1):
                ones = intersect(*(E(i) for i in range(1, j)))
                yield Piece(intersect(ones, complement(E(j))), generator(1))

        shifted = PiecewiseMap("shifted-odometer", producer=pieces())
        self.assertEqual(shifted(FinSet.of(1, 2)), FinSet.of(2))
        failures = decomposition_audit(shifted, 4, expected=odometer_reference)
        self.assertTrue(failures)
        self.assertTrue(all("shifted-odometer" in f for f in failures))
        self.assertIn("기준값", failures[0])

    def test_reference_maps(self):
        """기준 사상은 열거 인덱스 ±1"""
        self.assertEqual(odometer_reference(EMPTY), FinSet.of(1))
        self.assertEqual(odometer_reference(FinSet.of(1, 2)), FinSet.of(3))
        self.assertEqual(odometer_inverse_reference(FinSet.of(3)), FinSet.of(1, 2))
        with self.assertRaises(ValueError):
            odometer_inverse_reference(EMPTY)

    def test_piece_table(self):
        """리포트용 조각 표"""
        odo = odometer()
        odo(FinSet.of(1))
        table = piece_table(odo)
        self.assertEqual(table[0], {"region": "(not (E (1) ()))", "move": [1]})
        self.assertEqual(table[1]["move"], [1, 2])


class TestSwap(unittest.TestCase):
    """교환 사상 테스트"""

    def test_swap_sends_a_to_b(self):
        """h(a) = b, h = h⁻¹, A 와 B 를 맞바꿈"""
        h = build_swap(E(1), complement(E(1)), FinSet.of(1), EMPTY, 8)
        self.assertEqual(h(FinSet.of(1)), EMPTY)
        for k in window_points(5)[:20]:
            self.assertEqual(h(h(k)), k)
            self.assertNotEqual(member(h(k), E(1)), member(k, E(1)))

    def test_swap_identity_off_support(self):
        """A∪B 밖의 점은 고정"""
        A = intersect(E(1), E(2))
        B = intersect(complement(E(1)), E(2))
        h = build_swap(A, B, FinSet.of(1, 2), FinSet.of(2), 8)
        self.assertEqual(h(FinSet.of(1, 2)), FinSet.of(2))
        self.assertEqual(h(EMPTY), EMPTY)
        self.assertEqual(h(FinSet.of(1)), FinSet.of(1))
        for k in window_points(6):
            if not member(k, union(A, B)):
                self.assertEqual(h(k), k)
            else:
                self.assertEqual(h(h(k)), k)

    def test_swap_preconditions(self):
        """겹치는 집합이나 잘못된 시작점"""
        with self.assertRaises(ValueError):
            build_swap(E(1), E(1), FinSet.of(1), FinSet.of(1), 8)
        with self.assertRaises(ValueError):
            build_swap(E(1), complement(E(1)), EMPTY, EMPTY, 8)

    def test_swap_audit(self):
        """교환 조건 점검: 만든 h 는 통과, 항등 사상은 실패"""
        A, B = E(1), complement(E(1))
        h = build_swap(A, B, FinSet.of(1), EMPTY, 8)
        self.assertEqual(swap_audit(h, A, B, FinSet.of(1), EMPTY, 5), [])
        self.assertEqual(len(swap_audit(h, A, B, FinSet.of(1), FinSet.of(2), 5)), 1)
        failures = swap_audit(identity_map(), A, B, FinSet.of(1), EMPTY, 3)
        self.assertEqual(len(failures), 1 + 8)

    def test_swap_requires_cylinders(self):
        """L 잎이 있는 식은 교환 대상이 될 수 없음"""
        leaf = basis(EMPTY, [TPoint("", "01")])
        with self.assertRaises(ValueError):
            build_swap(intersect(E(1), leaf), complement(E(1)), FinSet.of(1), EMPTY)

    def test_swap_decomposition(self):
        """교환 사상도 강하게 분해 가능"""
        h = build_swap(E(1), complement(E(1)), FinSet.of(1), EMPTY, 8)
        self.assertEqual(decomposition_audit(h, 5), [])


class TestInvolutionTower(unittest.TestCase):
    """대합 타워 테스트"""

    @classmethod
    def setUpClass(cls):
        cls.tower = build_tower(3)
        cls.points = window_points(5)

    def test_default_neighborhoods(self):
        """이웃 수열 D_1 ⊇ D_2 ⊇ D_3"""
        d = default_neighborhoods(3)
        self.assertTrue(equal_on_window(d[0], complement(E(1)), 6))
        self.assertEqual(member(FinSet.of(1), d[0]), 0)
        self.assertEqual(member(EMPTY, d[0]), 1)
        self.assertTrue(equal_on_window(d[1], intersect(complement(E(1)), complement(E(2))), 6))
        self.assertEqual(member(FinSet.of(2), d[1]), 0)
        for small, big in ((d[2], d[1]), (d[1], d[0])):
            self.assertTrue(equal_on_window(intersect(small, complement(big)), EMPTY_SET, 6))
        with self.assertRaises(ValueError):
            default_neighborhoods(0)

    def test_rejects_non_cylinder_neighborhoods(self):
        """D_p 에 L 잎이 있으면 타워를 만들지 않음"""
        leaf = basis(EMPTY, [TPoint("", "01")])
        nbhd = default_neighborhoods(2)
        with self.assertRaises(ValueError):
            build_tower(2, nbhd=[intersect(nbhd[0], leaf), nbhd[1]])

    def test_height_one(self):
        """n=1: K¹(0)=D₁, K¹(1)=D∖D₁, h₁(s₀)=s₁"""
        t = build_tower(1)
        self.assertTrue(equal_on_window(t.tree["0"], complement(E(1)), 6))
        self.assertTrue(equal_on_window(t.tree["1"], E(1), 6))
        self.assertEqual(t.h[0](EMPTY), FinSet.of(1))

    def test_height_two_coverage(self):
        """n=2: s₀, s₁, s₂ 가 s₀ 의 궤도에 있음"""
        t = build_tower(2)
        orbit = {dyadic_action(t, g, EMPTY) for g in window_group(2)}
        for j in range(3):
            self.assertIn(enum_finset(j), orbit)

    def test_involutions_commute(self):
        """h_i 는 대합이고 서로 교환"""
        h = self.tower.h
        for k in self.points:
            for i in range(3):
                self.assertEqual(h[i](h[i](k)), k)
                for j in range(i):
                    self.assertEqual(h[i](h[j](k)), h[j](h[i](k)))

    def test_tree_partitions(self):
        """각 레벨 노드는 창을 분할하고 부모는 자식의 합집합"""
        t = self.tower
        self.assertEqual(sum(len(w) == 3 for w in t.tree), 8)
        for p in range(1, 4):
            words = [w for w in t.tree if len(w) == p]
            self.assertEqual(len(words), 1 << p)
            for k in window_points(3):
                hits = [w for w in words if member(k, t.tree[w])]
                self.assertEqual(len(hits), 1)
                self.assertEqual("".join(map(str, node_address(t, p, k))), hits[0])
                self.assertEqual(member(k, t.tree[hits[0][:-1]]), 1)

    def test_base_nodes(self):
        """s₀ ∈ K^p(0..0) ⊆ D_p"""
        t = self.tower
        for p in range(1, 4):
            self.assertEqual(member(EMPTY, t.tree["0" * p]), 1)
            for k in window_points(3):
                if member(k, t.tree["0" * p]):
                    self.assertEqual(member(k, t.nbhd[p - 1]), 1)

    def test_node_transport(self):
        """α 의 작용은 K^p(β) 를 K^p(α+β) 로 보냄"""
        t = self.tower
        for p in range(1, 4):
            for alpha in range(1 << p):
                g = DyadicElem(FinSet(alpha))
                for k in self.points:
                    beta = node_address(t, p, k)
                    moved = node_address(t, p, dyadic_action(t, g, k))
                    self.assertEqual(moved, tuple(b ^ (alpha >> i & 1) for i, b in enumerate(beta)))

    def test_dyadic_action(self):
        """항등, 궤도 크기, 자유성"""
        t = self.tower
        self.assertTrue(all(dyadic_action(t, ZERO, k) == k for k in self.points))
        orbit = {dyadic_action(t, g, EMPTY) for g in window_group(3)}
        self.assertEqual(len(orbit), 8)
        for j in range(4):
            self.assertIn(enum_finset(j), orbit)
        for g in window_group(3)[1:]:
            for k in self.points[:16]:
                self.assertNotEqual(dyadic_action(t, g, k), k)
        with self.assertRaises(ValueError):
            dyadic_action(t, DyadicElem.of(4), EMPTY)


class TestZAction(unittest.TestCase):
    """정수 작용 φ 테스트"""

    @classmethod
    def setUpClass(cls):
        cls.tower = build_tower(3)
        cls.z = build_zaction(cls.tower)

    def test_requires_height_two(self):
        """높이 1 타워는 거부"""
        with self.assertRaises(ValueError):
            build_zaction(build_tower(1))

    def test_base_point(self):
        """φ(s₀) ∈ F₁, φ⁻¹(φ(s₀)) = s₀"""
        image = zaction_forward(self.z, EMPTY)
        self.assertEqual(member(image, self.z.backward[0][0]), 1)
        self.assertEqual(zaction_backward(self.z, image), EMPTY)

    def test_injective_on_window(self):
        """덮인 창에서 단사"""
        covered = [k for k in window_points(5) if 0 in node_address(self.tower, 3, k)]
        images = [zaction_forward(self.z, k) for k in covered]
        self.assertEqual(len(set(images)), len(images))
        for k, y in zip(covered, images):
            self.assertEqual(zaction_backward(self.z, y), k)

    def test_orbit_follows_odometer(self):
        """φ^j(s₀) 는 enum_finset(j) 의 이진 작용과 같음"""
        k = EMPTY
        for j in range(8):
            self.assertEqual(k, dyadic_action(self.tower, DyadicElem(enum_finset(j)), EMPTY))
            if j < 7:
                k = zaction_forward(self.z, k)

    def test_undefined_points(self):
        """주소가 모두 1 이면 φ, 모두 0 이면 φ⁻¹ 가 없음"""
        top = dyadic_action(self.tower, DyadicElem.of(1, 2, 3), EMPTY)
        with self.assertRaises(ZActionUndefined):
            zaction_forward(self.z, top)
        with self.assertRaises(ZActionUndefined):
            zaction_backward(self.z, EMPTY)


def run_tests():
    """테스트 실행"""
    loader = unittest.TestLoader()
    suite = unittest.TestSuite()

    suite.addTests(loader.loadTestsFromTestCase(TestPiecewiseMaps))
    suite.addTests(loader.loadTestsFromTestCase(TestSwap))
    suite.addTests(loader.loadTestsFromTestCase(TestInvolutionTower))
    suite.addTests(loader.loadTestsFromTestCase(TestZAction))

    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)
    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    sys.exit(0 if success else 1)
