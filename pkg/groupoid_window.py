"""
유한 궤도 창 위의 군양체 행렬 대수

합성곱, 수반, 대각 기댓값, 유니터리 표현 u_g, 항등식 (i)-(iv), 절단 근사,
소멸 판정, 켤레, 최대 가환성 점검, 정규화 유니터리 분해를 정확히 계산한다.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from config import GROUPOID_CONFIG
from core_combinatorics import DyadicElem, FinSet, window_group, window_points
from linear_span import span_rank, to_qq

logger = logging.getLogger(__name__)

EXACT = "exact"
FLOAT = "float"


class ScalarModeMismatch(ValueError):
    """정확/부동소수 모드가 섞임"""


class WindowMismatch(ValueError):
    """창이 다르거나 군 원소가 창을 벗어남"""


class ChainNotIncreasing(ValueError):
    """절단 사슬이 순증가가 아님"""


class NotUnitaryError(ValueError):
    pass


class NotNormalizingError(ValueError):
    pass


class ProjectionSumError(ValueError):
    """p_g 의 합이 1 이 아님 (tol 이 너무 빡빡할 수 있음)"""


@dataclass(frozen=True)
class OrbitWindow:
    """[1..n] 의 부분집합 2ⁿ 개와 supp ⊆ [1..n] 인 군 원소들"""
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"창 깊이는 0 이상이어야 합니다: {self.n}")

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def points(self) -> List[FinSet]:
        return window_points(self.n)

    @property
    def group(self) -> List[DyadicElem]:
        return window_group(self.n)

    def contains_element(self, g: DyadicElem) -> bool:
        return g.support.max() <= self.n


def _zeros(shape, mode: str) -> np.ndarray:
    if mode == EXACT:
        return np.full(shape, Fraction(0), dtype=object)
    if mode == FLOAT:
        return np.zeros(shape, dtype=float)
    raise ScalarModeMismatch(f"알 수 없는 스칼라 모드: {mode}")


def _ones(shape, mode: str) -> np.ndarray:
    if mode == EXACT:
        return np.full(shape, Fraction(1), dtype=object)
    return np.ones(shape, dtype=float)


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """창 위의 함수 f(x, y). 실수부와 허수부를 따로 보관한다"""
    window: OrbitWindow
    real: np.ndarray
    imag: np.ndarray
    mode: str = EXACT

    @classmethod
    def zeros(cls, window: OrbitWindow, mode: str = EXACT) -> "KernelMatrix":
        shape = (window.size, window.size)
        return cls(window, _zeros(shape, mode), _zeros(shape, mode), mode)

    @classmethod
    def from_complex(cls, window: OrbitWindow, values: np.ndarray) -> "KernelMatrix":
        values = np.asarray(values, dtype=complex)
        return cls(window, values.real.copy(), values.imag.copy(), FLOAT)

    def to_complex(self) -> np.ndarray:
        return self.real.astype(float) + 1j * self.imag.astype(float)

    def _check(self, other: "KernelMatrix"):
        if self.mode != other.mode:
            raise ScalarModeMismatch(f"스칼라 모드 불일치: {self.mode} vs {other.mode}")
        if self.window != other.window:
            raise WindowMismatch(f"창 불일치: n={self.window.n} vs n={other.window.n}")

    def __add__(self, other: "KernelMatrix") -> "KernelMatrix":
        self._check(other)
        return KernelMatrix(self.window, self.real + other.real, self.imag + other.imag, self.mode)

    def __sub__(self, other: "KernelMatrix") -> "KernelMatrix":
        self._check(other)
        return KernelMatrix(self.window, self.real - other.real, self.imag - other.imag, self.mode)

    def equals(self, other: "KernelMatrix", tol: Optional[float] = None) -> bool:
        """exact 모드는 성분별 일치, float 모드는 tol 안의 일치"""
        self._check(other)
        if self.mode == EXACT:
            return bool(np.array_equal(self.real, other.real) and np.array_equal(self.imag, other.imag))
        if tol is None:
            tol = GROUPOID_CONFIG["tol"]
        return bool(np.allclose(self.to_complex(), other.to_complex(), atol=tol, rtol=0))

    def is_zero(self) -> bool:
        return bool(np.all(self.real == 0) and np.all(self.imag == 0))

    def serialize(self) -> List[List[List]]:
        """행 우선 조밀 배열: exact 는 유리수 문자열 쌍, float 는 실수 쌍"""
        if self.mode == EXACT:
            return [[[str(re), str(im)] for re, im in zip(rr, ii)] for rr, ii in zip(self.real, self.imag)]
        return [[[float(re), float(im)] for re, im in zip(rr, ii)] for rr, ii in zip(self.real, self.imag)]


@dataclass(frozen=True, eq=False)
class DiagonalElem:
    """점마다 복소수 값. 대각 행렬 π(h) 로 삽입된다"""
    window: OrbitWindow
    real: np.ndarray
    imag: np.ndarray
    mode: str = EXACT

    def modulus_squared(self) -> np.ndarray:
        return self.real * self.real + self.imag * self.imag

    def is_zero(self) -> bool:
        return bool(np.all(self.real == 0) and np.all(self.imag == 0))

    def to_matrix(self) -> KernelMatrix:
        real = _zeros((self.window.size, self.window.size), self.mode)
        imag = _zeros((self.window.size, self.window.size), self.mode)
        for x in range(self.window.size):
            real[x, x] = self.real[x]
            imag[x, x] = self.imag[x]
        return KernelMatrix(self.window, real, imag, self.mode)


def unit(window: OrbitWindow, mode: str = EXACT) -> KernelMatrix:
    """χ_Δ"""
    return DiagonalElem(window, _ones(window.size, mode), _zeros(window.size, mode), mode).to_matrix()


def _from_qq(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def to_domain_matrix(f: KernelMatrix) -> DomainMatrix:
    """exact 모드 행렬을 가우스 유리수체 QQ_I 위의 DomainMatrix 로"""
    rows = [[QQ_I(to_qq(re), to_qq(im)) for re, im in zip(rr, ii)] for rr, ii in zip(f.real, f.imag)]
    return DomainMatrix(rows, (f.window.size, f.window.size), QQ_I)


def from_domain_matrix(window: OrbitWindow, m: DomainMatrix) -> KernelMatrix:
    rows = m.to_list()
    real = np.array([[_from_qq(z.x) for z in row] for row in rows], dtype=object)
    imag = np.array([[_from_qq(z.y) for z in row] for row in rows], dtype=object)
    return KernelMatrix(window, real, imag, EXACT)


def conv(f: KernelMatrix, h: KernelMatrix) -> KernelMatrix:
    """
    f∘h(x, z) = Σ_y f(x, y) h(y, z)

    exact 모드는 QQ_I 위의 DomainMatrix 곱, float 모드는 복소 행렬 곱이다.

    Raises:
        ScalarModeMismatch: 모드가 다를 때
        WindowMismatch: 창이 다를 때
    """
    f._check(h)
    if f.mode == EXACT:
        return from_domain_matrix(f.window, to_domain_matrix(f).matmul(to_domain_matrix(h)))
    return KernelMatrix.from_complex(f.window, f.to_complex() @ h.to_complex())


def adjoint(f: KernelMatrix) -> KernelMatrix:
    """f*(x, y) = conj f(y, x)"""
    return KernelMatrix(f.window, f.real.T.copy(), -f.imag.T, f.mode)


def diag(f: KernelMatrix) -> DiagonalElem:
    """x ↦ f(x, x)"""
    return DiagonalElem(f.window, np.diagonal(f.real).copy(), np.diagonal(f.imag).copy(), f.mode)


def u_of(w: OrbitWindow, g: DyadicElem, mode: str = EXACT) -> KernelMatrix:
    """
    u_g(x, y) = 1 ⟺ y = g⁻¹x (= gx)

    Raises:
        WindowMismatch: supp(g) 가 창을 벗어날 때
    """
    if not w.contains_element(g):
        raise WindowMismatch(f"supp(g)={g.support!r} 가 [1..{w.n}] 을 벗어납니다.")
    m = KernelMatrix.zeros(w, mode)
    one = Fraction(1) if mode == EXACT else 1.0
    for x in range(w.size):
        m.real[x, x ^ g.support.mask] = one
    return m


def restrict_to_graph(f: KernelMatrix, g: DyadicElem) -> KernelMatrix:
    """f 를 Δ_g = {(x, gx)} 위로 제한"""
    out = KernelMatrix.zeros(f.window, f.mode)
    for x in range(f.window.size):
        y = x ^ g.support.mask
        out.real[x, y] = f.real[x, y]
        out.imag[x, y] = f.imag[x, y]
    return out


def reconstruct(z: KernelMatrix, elements: Optional[Iterable[DyadicElem]] = None) -> KernelMatrix:
    """Σ_{g∈F} π(D(z∘u_g))∘u_g (F 기본값: 창 군 전체)"""
    if elements is None:
        elements = z.window.group
    total = KernelMatrix.zeros(z.window, z.mode)
    for g in elements:
        u = u_of(z.window, g, z.mode)
        total = total + conv(diag(conv(z, u)).to_matrix(), u)
    return total


def random_kernel(window: OrbitWindow, rng: np.random.Generator, mode: str = EXACT) -> KernelMatrix:
    """시드 고정 난수 유리수(또는 실수) 행렬"""
    shape = (window.size, window.size)
    if mode == FLOAT:
        return KernelMatrix(window, rng.normal(size=shape), rng.normal(size=shape), FLOAT)
    nums = rng.integers(-5, 6, size=(2,) + shape)
    dens = rng.integers(1, 5, size=(2,) + shape)
    real = np.array([[Fraction(int(a), int(b)) for a, b in zip(ra, rb)] for ra, rb in zip(nums[0], dens[0])],
                    dtype=object)
    imag = np.array([[Fraction(int(a), int(b)) for a, b in zip(ra, rb)] for ra, rb in zip(nums[1], dens[1])],
                    dtype=object)
    return KernelMatrix(window, real, imag, EXACT)


def identity_suite(w: OrbitWindow, samples: Optional[int] = None, rng: Optional[np.random.Generator] = None,
                   mode: str = EXACT) -> Dict[str, object]:
    """
    무작위 f 와 모든 g 에 대해 항등식 (i)-(iv) 점검

    (i)   (f∘u_g)(x, y) = f(x, gy)
    (ii)  π(D(f∘u_g))∘u_g 는 f 를 Δ_g 로 제한한 것
    (iii) D(f∘f*)(x) = Σ_g |D(f∘u_g)(x)|²
    (iv)  f_F = Σ_{g∈F} π(D(f∘u_g))∘u_g 에 대해 D((f−f_F)(f−f_F)*)(x) = Σ_{g∉F} |D(f∘u_g)(x)|²

    Returns:
        dict: 항등식별 점검 횟수와 실패 목록
    """
    if samples is None:
        samples = GROUPOID_CONFIG["samples"]
    if rng is None:
        rng = np.random.default_rng(0)

    counts = {"i": 0, "ii": 0, "iii": 0, "iv": 0}
    failures: List[str] = []
    group = w.group

    for s in range(samples):
        f = random_kernel(w, rng, mode)
        pieces = {}
        for g in group:
            u = u_of(w, g, mode)
            fu = conv(f, u)
            pieces[g] = diag(fu)
            shifted = KernelMatrix(w, f.real[:, [y ^ g.support.mask for y in range(w.size)]],
                                   f.imag[:, [y ^ g.support.mask for y in range(w.size)]], mode)
            counts["i"] += 1
            if not fu.equals(shifted):
                failures.append(f"(i) 표본 {s}, g={g!r}")
            counts["ii"] += 1
            if not conv(pieces[g].to_matrix(), u).equals(restrict_to_graph(f, g)):
                failures.append(f"(ii) 표본 {s}, g={g!r}")

        counts["iii"] += 1
        lhs = diag(conv(f, adjoint(f))).real
        rhs = sum(pieces[g].modulus_squared() for g in group)
        if not np.array_equal(lhs, rhs) if mode == EXACT else not np.allclose(lhs, rhs):
            failures.append(f"(iii) 표본 {s}")

        F = [g for g in group if rng.random() < 0.5]
        rest = f - reconstruct(f, F)
        counts["iv"] += 1
        lhs = diag(conv(rest, adjoint(rest))).real
        rhs = sum((pieces[g].modulus_squared() for g in group if g not in F), _zeros(w.size, mode))
        if not np.array_equal(lhs, rhs) if mode == EXACT else not np.allclose(lhs, rhs):
            failures.append(f"(iv) 표본 {s}, |F|={len(F)}")

    if failures:
        logger.error(f"❌ 항등식 실패 {len(failures)}건: {failures[:3]}")
    return {"n": w.n, "samples": samples, "counts": counts, "failures": failures}


def truncation_approx(z: KernelMatrix, chain: Sequence[Iterable[DyadicElem]]) -> List[DiagonalElem]:
    """
    절단 근사 z_n = Σ_{g∈F(n)} π(D(z∘u_g))∘u_g 의 잔차 r_n = D((z−z_n)(z−z_n)*)

    Raises:
        ChainNotIncreasing: 사슬이 순증가가 아닐 때
        WindowMismatch: 사슬 원소가 창을 벗어날 때
    """
    members = [frozenset(F) for F in chain]
    for F in members:
        bad = [g for g in F if not z.window.contains_element(g)]
        if bad:
            raise WindowMismatch(f"사슬 원소 {bad} 가 창을 벗어납니다.")
    for prev, nxt in zip(members, members[1:]):
        if not prev < nxt:
            raise ChainNotIncreasing(f"사슬이 순증가가 아닙니다: {sorted(prev)} ⊄ {sorted(nxt)}")

    residuals = []
    for F in members:
        rest = z - reconstruct(z, sorted(F))
        residuals.append(diag(conv(rest, adjoint(rest))))
    return residuals


def vanishing_test(z: KernelMatrix) -> int:
    """모든 g 에 대해 D(z∘u_g) = 0 이면 1 (z = 0 과 동치)"""
    return int(all(diag(conv(z, u_of(z.window, g, z.mode))).is_zero() for g in z.window.group))


def conjugation(g: DyadicElem, f: KernelMatrix) -> KernelMatrix:
    """u_g* ∘ f ∘ u_g, 성분은 f(gx, gy)"""
    u = u_of(f.window, g, f.mode)
    return conv(adjoint(u), conv(f, u))


def is_diagonal(f: KernelMatrix, tol: Optional[float] = None) -> bool:
    off = ~np.eye(f.window.size, dtype=bool)
    if f.mode == EXACT:
        return bool(np.all(f.real[off] == 0) and np.all(f.imag[off] == 0))
    if tol is None:
        tol = GROUPOID_CONFIG["tol"]
    return bool(np.all(np.abs(f.to_complex()[off]) <= tol))


def masa_check(w: OrbitWindow, mode: str = EXACT) -> Dict[str, object]:
    """
    대각 대수의 교환자 차원과 고정점 없음 점검

    X 의 성분을 미지수로 두고 모든 대각 기저 P_z 에 대해 P_z X − X P_z = 0 을
    선형 제약으로 쌓아 해공간 차원을 구한다.
    """
    size = w.size
    rows = []
    for z in range(size):
        for x in range(size):
            for y in range(size):
                coeff = int(x == z) - int(y == z)
                if coeff:
                    row = np.zeros(size * size, dtype=np.int64)
                    row[x * size + y] = coeff
                    rows.append(row)
    rank = span_rank(rows, mode)
    dimension = size * size - rank

    fixed = [(g.support.to_list(), k.to_list()) for g in w.group if not g.is_zero()
             for k in w.points if k.mask ^ g.support.mask == k.mask]
    report = {
        "n": w.n,
        "commutant_dimension": dimension,
        "expected_dimension": size,
        "fixed_point_free": not fixed,
        "fixed_points": fixed,
    }
    if dimension != size or fixed:
        logger.error(f"❌ 최대 가환성 점검 실패: {report}")
    return report


@dataclass(frozen=True, eq=False)
class NormalizerDecomposition:
    v: KernelMatrix
    d: DiagonalElem
    p: Dict[DyadicElem, np.ndarray]
    q: Dict[DyadicElem, np.ndarray]
    residual: float


def normalizer_decompose(w: KernelMatrix, win: Optional[OrbitWindow] = None,
                         tol: Optional[float] = None) -> NormalizerDecomposition:
    """
    대각을 정규화하는 유니터리 w 를 w = d·v 로 분해

    p_g 는 D(w∘u_g) 의 지지 (|값|² > tol²), q_g(x) = p_g(gx).
    v = Σ_g u_g∘π(q_g) = Σ_g π(p_g)∘u_g 는 w 와 같은 지지를 가진 부분 치환이고
    d = D(w∘v*) 이다.

    Raises:
        NotUnitaryError: ‖w*w − 1‖ > tol
        NotNormalizingError: w P_z w* 가 대각이 아닐 때
        ProjectionSumError: Σ p_g ≠ 1
    """
    if tol is None:
        tol = GROUPOID_CONFIG["tol"]
    if win is None:
        win = w.window
    if win != w.window:
        raise WindowMismatch("행렬의 창과 주어진 창이 다릅니다.")
    if w.mode != FLOAT:
        w = KernelMatrix.from_complex(win, w.to_complex())

    W = w.to_complex()
    size = win.size
    if np.linalg.norm(W.conj().T @ W - np.eye(size), 2) > tol:
        raise NotUnitaryError(f"w 가 유니터리가 아닙니다 (tol={tol}).")
    for z in range(size):
        image = np.outer(W[:, z], W[:, z].conj())
        if np.max(np.abs(image - np.diag(np.diag(image)))) > tol:
            raise NotNormalizingError(f"w P_{z} w* 가 대각이 아닙니다.")

    p: Dict[DyadicElem, np.ndarray] = {}
    q: Dict[DyadicElem, np.ndarray] = {}
    for g in win.group:
        values = diag(conv(w, u_of(win, g, FLOAT))).modulus_squared()
        p[g] = (values > tol * tol).astype(np.int64)
        q[g] = p[g][[x ^ g.support.mask for x in range(size)]]
    total = sum(p.values())
    if not np.all(total == 1):
        raise ProjectionSumError(f"Σ p_g ≠ 1: {total.tolist()}")

    v = KernelMatrix.zeros(win, FLOAT)
    for g in win.group:
        if q[g].any():
            qg = DiagonalElem(win, q[g].astype(float), np.zeros(size), FLOAT)
            v = v + conv(u_of(win, g, FLOAT), qg.to_matrix())

    d = diag(conv(w, adjoint(v)))
    if np.max(np.abs(np.sqrt(d.modulus_squared()) - 1)) > tol:
        raise NotNormalizingError("d 가 단위 크기가 아닙니다.")
    residual = float(np.linalg.norm(W - conv(d.to_matrix(), v).to_complex(), 2))
    return NormalizerDecomposition(v=v, d=d, p=p, q=q, residual=residual)


def random_normalizer(window: OrbitWindow, rng: np.random.Generator) -> KernelMatrix:
    """
    무작위 위상 × 창 치환 유니터리

    치환 π 는 점마다 이동 g_x = π(x) + x 를 쓰는 조각별 평행이동으로 만든다.
    """
    size = window.size
    target = rng.permutation(size)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size))
    values = np.zeros((size, size), dtype=complex)
    for x in range(size):
        move = int(target[x]) ^ x
        values[x, x ^ move] = phases[x]
    return KernelMatrix.from_complex(window, values)
