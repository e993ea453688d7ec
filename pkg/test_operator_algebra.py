"""
군양체 창 대수와 페르미온 타워 테스트
"""
import unittest
from unittest.mock import patch
from pathlib import Path
import sys
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.polys.domains import QQ_I

# 현재 디렉토리를 Python 경로에 추가
sys.path.insert(0, str(Path(__file__).parent))

from clopen_algebra import E, complement, equal_on_window
from core_combinatorics import ZERO, DyadicElem, generator, span_group, window_group
from fermion_tower import (
    ClosureBudgetExceeded, StageBoundError, afd_audit, embed, findim_algebra, full_matrix_check,
    independence_check, relations_check, saturate_boolean, saturation_audit, stage, stage_matrices
)
from groupoid_window import (
    EXACT, FLOAT, ChainNotIncreasing, KernelMatrix, NotNormalizingError, NotUnitaryError, OrbitWindow,
    ScalarModeMismatch, WindowMismatch, adjoint, conjugation, conv, diag, from_domain_matrix, identity_suite,
    masa_check, normalizer_decompose, random_kernel, random_normalizer, to_domain_matrix, truncation_approx, u_of,
    unit, vanishing_test
)
from linear_span import span_rank

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def rational_kernel(n: int, seed: int) -> KernelMatrix:
    return random_kernel(OrbitWindow(n), np.random.default_rng(seed), EXACT)


class TestLinearSpan(unittest.TestCase):
    """생성 공간 차원 테스트"""

    def test_exact_and_float(self):
        """정확/부동소수 모드가 같은 계수를 냄"""
        vectors = [np.array([1, 0, 2]), np.array([2, 0, 4]), np.array([0, 1, 0])]
        self.assertEqual(span_rank(vectors, "exact"), 2)
        self.assertEqual(span_rank(vectors, "float"), 2)
        fractions = [np.array([Fraction(1, 3), Fraction(1, 2)], dtype=object),
                     np.array([Fraction(2, 3), Fraction(1)], dtype=object)]
        self.assertEqual(span_rank(fractions), 1)
        self.assertEqual(span_rank([]), 0)
        self.assertEqual(span_rank([np.zeros(4)]), 0)

    def test_rejects_bad_input(self):
        """크기 불일치, 복소수, 알 수 없는 모드"""
        with self.assertRaises(ValueError):
            span_rank([np.zeros(2), np.zeros(3)])
        with self.assertRaises(ValueError):
            span_rank([np.array([1j, 0])])
        with self.assertRaises(ValueError):
            span_rank([np.ones(2)], "symbolic")


class TestGroupoidWindow(unittest.TestCase):
    """군양체 창 대수 테스트"""

    def setUp(self):
        self.w1 = OrbitWindow(1)
        self.w2 = OrbitWindow(2)
        self.g1 = generator(1)

    def test_window(self):
        """점 2ⁿ 개, 창 밖 원소 판정"""
        self.assertEqual(self.w2.size, 4)
        self.assertEqual(len(self.w2.points), 4)
        self.assertEqual(len(self.w2.group), 4)
        self.assertFalse(self.w2.contains_element(DyadicElem.of(3)))
        with self.assertRaises(ValueError):
            OrbitWindow(-1)

    @settings(max_examples=20, deadline=None)
    @given(seeds)
    def test_conv_matches_matrix_product(self, seed):
        """합 공식은 유리수 행렬곱과 같음"""
        f, h = rational_kernel(2, seed), rational_kernel(2, seed + 1)
        product = conv(f, h)
        real = f.real.dot(h.real) - f.imag.dot(h.imag)
        imag = f.real.dot(h.imag) + f.imag.dot(h.real)
        self.assertTrue(np.array_equal(product.real, real))
        self.assertTrue(np.array_equal(product.imag, imag))

    def test_exact_conv_over_gaussian_rationals(self):
        """exact 곱은 QQ_I 위에서 계산되어 (i/2)² = −1/4"""
        w0 = OrbitWindow(0)
        half_i = KernelMatrix(w0, np.array([[Fraction(0)]], dtype=object), np.array([[Fraction(1, 2)]], dtype=object))
        self.assertEqual(to_domain_matrix(half_i).domain, QQ_I)
        square = conv(half_i, half_i)
        self.assertIsInstance(square.real[0, 0], Fraction)
        self.assertEqual(square.real[0, 0], Fraction(-1, 4))
        self.assertEqual(square.imag[0, 0], 0)
        back = from_domain_matrix(self.w2, to_domain_matrix(rational_kernel(2, 3)))
        self.assertTrue(back.equals(rational_kernel(2, 3)))

    def test_unit_and_representation(self):
        """χ_Δ 는 단위원, u_g u_h = u_{g+h}, u_g 는 유니터리"""
        f = rational_kernel(2, 7)
        self.assertTrue(conv(unit(self.w2), f).equals(f))
        self.assertTrue(conv(f, unit(self.w2)).equals(f))
        self.assertTrue(u_of(self.w2, ZERO).equals(unit(self.w2)))
        for g in self.w2.group:
            ug = u_of(self.w2, g)
            self.assertTrue(conv(ug, adjoint(ug)).equals(unit(self.w2)))
            self.assertTrue(adjoint(ug).equals(ug))
            for h in self.w2.group:
                self.assertTrue(conv(ug, u_of(self.w2, h)).equals(u_of(self.w2, g + h)))

    def test_u_of_two_points(self):
        """n=1 에서 u_{g₁} 은 ∅ 와 {1} 을 맞바꿈"""
        u = u_of(self.w1, self.g1)
        self.assertEqual(u.real.tolist(), [[0, 1], [1, 0]])
        with self.assertRaises(WindowMismatch):
            u_of(self.w1, DyadicElem.of(2))

    @settings(max_examples=10, deadline=None)
    @given(seeds)
    def test_ring_laws(self, seed):
        """결합법칙, 수반의 반곱셈성, 수반의 대합성"""
        f, h, k = (rational_kernel(2, seed + i) for i in range(3))
        self.assertTrue(conv(conv(f, h), k).equals(conv(f, conv(h, k))))
        self.assertTrue(adjoint(conv(f, h)).equals(conv(adjoint(h), adjoint(f))))
        self.assertTrue(adjoint(adjoint(f)).equals(f))

    def test_diag(self):
        """D(χ_Δ) = 1, D(u_g) = 0, D(f f*) 는 행별 제곱합"""
        self.assertTrue(all(x == 1 for x in diag(unit(self.w2)).real))
        for g in self.w2.group[1:]:
            self.assertTrue(diag(u_of(self.w2, g)).is_zero())
        f = rational_kernel(2, 3)
        rows = (f.real * f.real + f.imag * f.imag).sum(axis=1)
        self.assertTrue(np.array_equal(diag(conv(f, adjoint(f))).real, rows))

    def test_positivity_detects_zero_rows(self):
        """행 x 가 0 이면 D(f f*)(x) = 0, 아니면 양수"""
        f = rational_kernel(2, 11)
        f.real[2, :] = Fraction(0)
        f.imag[2, :] = Fraction(0)
        values = diag(conv(f, adjoint(f))).real
        self.assertEqual(values[2], 0)
        for x in (0, 1, 3):
            self.assertEqual(values[x] > 0, bool(np.any(f.real[x] != 0) or np.any(f.imag[x] != 0)))

    def test_identity_suite(self):
        """항등식 (i)-(iv) 실패 없음"""
        report = identity_suite(self.w2, samples=4, rng=np.random.default_rng(5))
        self.assertEqual(report["failures"], [])
        self.assertEqual(report["counts"], {"i": 16, "ii": 16, "iii": 4, "iv": 4})
        self.assertEqual(identity_suite(self.w2, samples=2, mode=FLOAT)["failures"], [])

    def test_permutation_diagonals(self):
        """D(u_h u_g) 는 g = h 일 때만 1"""
        for g in self.w2.group:
            for h in self.w2.group:
                d = diag(conv(u_of(self.w2, h), u_of(self.w2, g)))
                expected = 1 if g == h else 0
                self.assertTrue(all(x == expected for x in d.real))

    def test_truncation_two_points(self):
        """z = u_{g₁}, 사슬 ∅ ⊂ {0} ⊂ 전체 에서 잔차 (1,1,0)"""
        z = u_of(self.w1, self.g1)
        residuals = truncation_approx(z, [[], [ZERO], window_group(1)])
        self.assertEqual([r.real.tolist() for r in residuals], [[1, 1], [1, 1], [0, 0]])
        self.assertTrue(truncation_approx(unit(self.w1), [[ZERO]])[0].is_zero())

    def test_truncation_monotone(self):
        """최대 사슬에서 잔차는 단조 감소하고 마지막은 0"""
        z = rational_kernel(2, 13)
        group = self.w2.group
        chain = [group[:i] for i in range(1, len(group) + 1)]
        residuals = truncation_approx(z, chain)
        for a, b in zip(residuals, residuals[1:]):
            self.assertTrue(np.all(a.real >= b.real))
        self.assertTrue(residuals[-1].is_zero())

    def test_truncation_errors(self):
        """사슬이 증가하지 않거나 창을 벗어나면 오류"""
        z = unit(self.w1)
        with self.assertRaises(ChainNotIncreasing):
            truncation_approx(z, [[ZERO], [ZERO]])
        with self.assertRaises(WindowMismatch):
            truncation_approx(z, [[DyadicElem.of(3)]])

    def test_vanishing(self):
        """D(z u_g) 가 모두 0 ⟺ z = 0"""
        self.assertEqual(vanishing_test(KernelMatrix.zeros(self.w2)), 1)
        self.assertEqual(vanishing_test(u_of(self.w2, self.g1)), 0)
        z = rational_kernel(2, 17)
        self.assertEqual(vanishing_test(z), int(z.is_zero()))

    def test_conjugation(self):
        """u_g* f u_g 의 성분은 f(gx, gy)"""
        f = rational_kernel(2, 19)
        self.assertTrue(conjugation(ZERO, f).equals(f))
        for g in self.w2.group:
            perm = [x ^ g.support.mask for x in range(self.w2.size)]
            c = conjugation(g, f)
            self.assertTrue(np.array_equal(c.real, f.real[np.ix_(perm, perm)]))
            self.assertTrue(np.array_equal(c.imag, f.imag[np.ix_(perm, perm)]))

    def test_masa(self):
        """대각 대수의 교환자 차원 2, 4 와 고정점 없음"""
        self.assertEqual(masa_check(self.w1)["commutant_dimension"], 2)
        report = masa_check(self.w2)
        self.assertEqual(report["commutant_dimension"], 4)
        self.assertTrue(report["fixed_point_free"])
        self.assertTrue(masa_check(OrbitWindow(4), FLOAT)["fixed_point_free"])

    def test_mode_and_window_mismatch(self):
        """모드나 창이 다르면 오류"""
        with self.assertRaises(ScalarModeMismatch):
            conv(unit(self.w1, EXACT), unit(self.w1, FLOAT))
        with self.assertRaises(WindowMismatch):
            conv(unit(self.w1), unit(self.w2))
        with self.assertRaises(ScalarModeMismatch):
            KernelMatrix.zeros(self.w1, "symbolic")

    def test_serialize(self):
        """exact 는 유리수 문자열 쌍"""
        m = KernelMatrix.zeros(self.w1)
        m.real[0, 1] = Fraction(1, 2)
        self.assertEqual(m.serialize(), [[["0", "0"], ["1/2", "0"]], [["0", "0"], ["0", "0"]]])


class TestNormalizer(unittest.TestCase):
    """정규화 유니터리 분해 테스트"""

    def setUp(self):
        self.w1 = OrbitWindow(1)

    def test_two_point_example(self):
        """w = [[0,i],[1,0]] → v = u_{g₁}, d = diag(i, 1)"""
        w = KernelMatrix.from_complex(self.w1, np.array([[0, 1j], [1, 0]]))
        result = normalizer_decompose(w)
        self.assertTrue(result.v.equals(u_of(self.w1, generator(1), FLOAT)))
        self.assertTrue(np.allclose(result.d.real + 1j * result.d.imag, [1j, 1]))
        self.assertEqual(result.p[ZERO].tolist(), [0, 0])
        self.assertEqual(result.p[generator(1)].tolist(), [1, 1])
        self.assertLessEqual(result.residual, 1e-9)

    def test_diagonal_unitary(self):
        """대각 유니터리는 v = χ_Δ, d = w"""
        w = KernelMatrix.from_complex(self.w1, np.diag([1j, 1]))
        result = normalizer_decompose(w)
        self.assertTrue(result.v.equals(unit(self.w1, FLOAT)))
        self.assertTrue(result.d.to_matrix().equals(w))

    def test_random_normalizers(self):
        """무작위 위상 × 치환 유니터리의 잔차 ≤ 1e-9"""
        rng = np.random.default_rng(23)
        win = OrbitWindow(3)
        for _ in range(20):
            result = normalizer_decompose(random_normalizer(win, rng))
            self.assertLessEqual(result.residual, 1e-9)
            self.assertTrue(all(np.all(q.sum() == p.sum()) for p, q in zip(result.p.values(), result.q.values())))

    def test_rejects_bad_input(self):
        """유니터리가 아니거나 대각을 보존하지 않으면 오류"""
        with self.assertRaises(NotUnitaryError):
            normalizer_decompose(KernelMatrix.from_complex(self.w1, 2 * np.eye(2)))
        hadamard = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        with self.assertRaises(NotNormalizingError):
            normalizer_decompose(KernelMatrix.from_complex(self.w1, hadamard))
        with self.assertRaises(WindowMismatch):
            normalizer_decompose(unit(self.w1, FLOAT), OrbitWindow(2))


class TestFermionTower(unittest.TestCase):
    """e/u 타워 테스트"""

    def test_stage_one(self):
        """e₁ = diag(1,0), u₁ = [[0,1],[1,0]]"""
        s = stage(1)
        self.assertEqual(s.e[0].tolist(), [[1, 0], [0, 0]])
        self.assertEqual(s.u[0].tolist(), [[0, 1], [1, 0]])
        self.assertEqual(stage_matrices(s), {"e1": [[1, 0], [0, 0]], "u1": [[0, 1], [1, 0]]})

    def test_stage_bounds(self):
        """n=0, n=13 거부"""
        with self.assertRaises(StageBoundError):
            stage(0)
        with self.assertRaises(StageBoundError):
            stage(13)

    def test_relations(self):
        """u₂e₂u₂ = 1−e₂, u₂e₁u₂ = e₁, n=2 관계식 8개"""
        s = stage(2)
        u2, e1, e2 = s.u[1], s.e[0], s.e[1]
        self.assertTrue(np.array_equal(u2 @ e2 @ u2, s.identity - e2))
        self.assertTrue(np.array_equal(u2 @ e1 @ u2, e1))
        report = relations_check(s)
        self.assertEqual(report["count"], 8)
        self.assertTrue(report["passed"])
        self.assertEqual(relations_check(stage(1))["count"], 2)
        self.assertTrue(relations_check(stage(4))["passed"])

    def test_independence(self):
        """부호 곱은 모두 계수 1 의 진부분 사영"""
        for n in (2, 3):
            report = independence_check(stage(n))
            self.assertTrue(report["passed"])
            self.assertEqual(len(report["products"]), 2 ** n)
            self.assertTrue(all(p["rank"] == 1 for p in report["products"]))

    def test_full_matrix(self):
        """생성 차원 4ⁿ"""
        self.assertEqual([full_matrix_check(stage(n)) for n in (1, 2, 3)], [4, 16, 64])
        self.assertEqual(full_matrix_check(stage(2, FLOAT)), 16)
        with self.assertRaises(StageBoundError):
            full_matrix_check(stage(5))
        with self.assertRaises(ClosureBudgetExceeded):
            full_matrix_check(stage(2), closure_budget=3)

    def test_embedding(self):
        """단계 n 생성원은 패딩 후 단계 n+1 의 같은 이름 생성원"""
        small, big = stage(2), stage(3)
        for j in range(2):
            self.assertTrue(np.array_equal(embed(small.e[j]), big.e[j]))
            self.assertTrue(np.array_equal(embed(small.u[j]), big.u[j]))

    def test_afd_audit(self):
        """사슬 점검, Type III 는 판정하지 않음"""
        single = afd_audit(1)
        self.assertEqual(single["inclusions"], [])
        self.assertTrue(single["passed"])
        report = afd_audit(4)
        self.assertTrue(report["passed"])
        self.assertEqual([g["dimension"] for g in report["generation"]], [4, 16, 64, 256])
        self.assertTrue(all(i["passed"] for i in report["inclusions"]))
        self.assertFalse(report["certifies_type_iii"])
        self.assertEqual(len(report["open_questions"]), 2)
        self.assertEqual([a["window"] for a in report["approximation"]], [1, 2, 3])
        self.assertTrue(all(a["pointwise_non_increasing"] and a["final_zero"] for a in report["approximation"]))
        with self.assertRaises(StageBoundError):
            afd_audit(7)

    def test_afd_audit_relation_only(self):
        """exact 전행렬 점검 범위 밖은 관계식만"""
        report = afd_audit(5, FLOAT)
        self.assertEqual(report["generation"][-1]["method"], "relation-only")
        self.assertTrue(report["passed"])


class TestBooleanSaturation(unittest.TestCase):
    """불 대수 포화와 유한 차원 단계 테스트"""

    def setUp(self):
        g1, g2 = generator(1), generator(2)
        self.chain = [span_group([g1]), span_group([g1, g2])]
        self.sat = saturate_boolean([E(1), E(2)], self.chain, window_depth=4)

    def test_atoms(self):
        """단계 1 원자 {E₁, E₁ᶜ}, 단계 2 원자 4칸"""
        first = self.sat.stages[0]
        self.assertEqual(len(first), 2)
        for target in (E(1), complement(E(1))):
            self.assertTrue(any(equal_on_window(a, target, 4) for a in first))
        self.assertEqual(len(self.sat.stages[1]), 4)

    def test_audit(self):
        """분할, 불변, 증가"""
        report = saturation_audit(self.sat)
        self.assertTrue(report["passed"])
        self.assertEqual(report["atoms_per_stage"], [2, 4])

    def test_findim(self):
        """단계 차원 4, 16, 자명 부분군이면 2"""
        self.assertEqual(findim_algebra(self.sat, 1).dimension, 4)
        stage2 = findim_algebra(self.sat, 2)
        self.assertEqual(stage2.dimension, 16)
        self.assertTrue(stage2.free)
        trivial = saturate_boolean([E(1)], [[ZERO]], window_depth=4)
        self.assertEqual(findim_algebra(trivial, 1).dimension, 2)
        self.assertTrue(all(c["tag"] == "empty@4" for c in trivial.empty_cells))
        with self.assertRaises(ValueError):
            findim_algebra(self.sat, 3)

    def test_findim_uses_window_unitaries(self):
        """생성 벡터마다 창 유니터리 u_g 를 한 번 씀"""
        with patch("fermion_tower.u_of", wraps=u_of) as spy:
            algebra = findim_algebra(self.sat, 1)
        self.assertEqual(spy.call_count, len(algebra.basis))
        self.assertEqual(algebra.span_dimension, 4)

    def test_bad_chains(self):
        """닫혀 있지 않은 부분군, 길이 불일치"""
        with self.assertRaises(ValueError):
            saturate_boolean([E(1)], [[generator(1)]])
        with self.assertRaises(ValueError):
            saturate_boolean([E(1), E(2)], [span_group([generator(1)])])
        with self.assertRaises(ValueError):
            saturate_boolean([E(1), E(2)], [span_group([generator(2)]), span_group([generator(1)])])


def run_tests():
    """테스트 실행"""
    loader = unittest.TestLoader()
    suite = unittest.TestSuite()

    suite.addTests(loader.loadTestsFromTestCase(TestLinearSpan))
    suite.addTests(loader.loadTestsFromTestCase(TestGroupoidWindow))
    suite.addTests(loader.loadTestsFromTestCase(TestNormalizer))
    suite.addTests(loader.loadTestsFromTestCase(TestFermionTower))
    suite.addTests(loader.loadTestsFromTestCase(TestBooleanSaturation))

    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)
    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    sys.exit(0 if success else 1)
