"""
조각별 사상 엔진: 교환(swap), 합성, 대합 타워, 이진 작용, 정수 작용

사상은 (클로픈 영역, 군 원소) 조각의 지연 수열로 표현한다. 영역 위에서 사상의 값은
k ↦ dyadic_act(move, k) 이다.
"""
import logging
import threading
from dataclasses import dataclass, field
from itertools import count, product
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from clopen_algebra import (
    EMPTY_SET, FULL_SET, ClopenExpr, E, Empty, complement, epsilon_image, equal_on_window,
    find_witness, intersect, is_cylinder, member, reduce_cylinder, split, support, to_sexpr, union
)
from config import REPARAM_CONFIG
from core_combinatorics import (
    EMPTY, ZERO, DyadicElem, FinSet, dyadic_act, enum_finset, finset_index, symdiff, window_points
)
from feasible_space import SearchExhausted

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]


class ScanCapExceeded(ValueError):
    """예산 안에서 점을 덮는 조각을 만들지 못함"""


class ZActionUndefined(ValueError):
    """구성된 조각 밖의 점 (타워를 더 깊게 만들어야 함)"""


@dataclass(frozen=True)
class Piece:
    region: ClopenExpr
    move: DyadicElem


class PiecewiseMap:
    """
    강하게 분해 가능한 사상의 지연 표현

    조각을 얻는 방법은 두 가지다. producer 는 고정된 순서로 조각을 내놓는
    이터레이터이고, maker 는 아직 덮이지 않은 점을 받아 그 점을 덮는 조각을
    만든다. 두 경우 모두 만들어진 조각은 캐시되며 영역은 서로소이다.
    """

    def __init__(self, name: str, producer: Optional[Iterator[Piece]] = None,
                 maker: Optional[Callable[[FinSet], Piece]] = None):
        if (producer is None) == (maker is None):
            raise ValueError("producer 와 maker 중 정확히 하나가 필요합니다.")
        self.name = name
        self._producer = producer
        self._maker = maker
        self._pieces: List[Piece] = []
        self._hits: Dict[FinSet, int] = {}
        self._exhausted = False
        self._lock = threading.RLock()

    @property
    def pieces(self) -> Tuple[Piece, ...]:
        """지금까지 만들어진 조각"""
        return tuple(self._pieces)

    def _record(self, k: FinSet, i: int) -> Tuple[int, Piece]:
        self._hits[k] = i
        return i, self._pieces[i]

    def locate(self, k: FinSet, scan_cap: Optional[int] = None) -> Tuple[int, Piece]:
        """
        k 를 포함하는 조각과 그 인덱스

        Raises:
            ScanCapExceeded: scan_cap 개의 조각 안에 k 가 없을 때
        """
        if scan_cap is None:
            scan_cap = REPARAM_CONFIG["scan_cap"]
        if scan_cap < 1:
            raise ValueError(f"scan_cap 은 1 이상이어야 합니다: {scan_cap}")

        with self._lock:
            if k in self._hits:
                i = self._hits[k]
                return i, self._pieces[i]
            for i, piece in enumerate(self._pieces):
                if member(k, piece.region):
                    return self._record(k, i)

            if self._maker is not None:
                piece = self._maker(k)
                if not member(k, piece.region):
                    raise RuntimeError(f"{self.name}: 새 조각이 {k!r} 를 덮지 않습니다.")
                self._pieces.append(piece)
                return self._record(k, len(self._pieces) - 1)

            while not self._exhausted and len(self._pieces) < scan_cap:
                try:
                    piece = next(self._producer)
                except StopIteration:
                    self._exhausted = True
                    break
                self._pieces.append(piece)
                if member(k, piece.region):
                    return self._record(k, len(self._pieces) - 1)

        raise ScanCapExceeded(f"{self.name}: 조각 {scan_cap}개 안에서 {k!r} 를 덮지 못했습니다.")

    def __call__(self, k: FinSet, scan_cap: Optional[int] = None) -> FinSet:
        return apply_piecewise(self, k, scan_cap)


def apply_piecewise(m: PiecewiseMap, k: FinSet, scan_cap: Optional[int] = None) -> FinSet:
    """k 를 덮는 조각을 찾아 그 move 로 이동"""
    _, piece = m.locate(k, scan_cap)
    return dyadic_act(piece.move, k)


def identity_map() -> PiecewiseMap:
    return PiecewiseMap("id", producer=iter([Piece(FULL_SET, ZERO)]))


def _prefix_move(j: int) -> DyadicElem:
    # g_1 + ... + g_j
    return DyadicElem(FinSet((1 << j) - 1))


def odometer() -> PiecewiseMap:
    """
    열거 인덱스 위의 i ↦ i+1

    j 번째 조각은 E({1..j-1}, ∅) ∩ E_jᶜ (가장 작은 빠진 비트가 j), move 는 g_1+…+g_j.
    """
    def pieces() -> Iterator[Piece]:
        for j in count(1):
            ones = intersect(*(E(i) for i in range(1, j)))
            yield Piece(intersect(ones, complement(E(j))), _prefix_move(j))

    return PiecewiseMap("odometer", producer=pieces())


def odometer_inverse() -> PiecewiseMap:
    """i ↦ i-1. ∅ 에서는 정의되지 않는다"""
    def pieces() -> Iterator[Piece]:
        for j in count(1):
            zeros = intersect(*(complement(E(i)) for i in range(1, j)))
            yield Piece(intersect(zeros, E(j)), _prefix_move(j))

    return PiecewiseMap("odometer-inverse", producer=pieces())


def compose(a: PiecewiseMap, b: PiecewiseMap, scan_cap: Optional[int] = None) -> PiecewiseMap:
    """
    a ∘ b

    점 k 가 b 의 조각 (R_b, g_b) 와 a 의 조각 (R_a, g_a) 를 지나면 합성 조각은
    R_b ∩ ε_{g_b}[R_a] 이고 move 는 g_a + g_b 이다.
    """
    def make(k: FinSet) -> Piece:
        _, inner = b.locate(k, scan_cap)
        _, outer = a.locate(dyadic_act(inner.move, k), scan_cap)
        region = intersect(inner.region, epsilon_image(inner.move, outer.region))
        return Piece(reduce_cylinder(region), outer.move + inner.move)

    return PiecewiseMap(f"({a.name}∘{b.name})", maker=make)


def find_move(x: FinSet, y: FinSet) -> DyadicElem:
    """dyadic_act(g, x) = y 인 유일한 g"""
    return DyadicElem(symdiff(x, y))


def build_swap(A: ClopenExpr, B: ClopenExpr, a: FinSet, b: FinSet, depth: Optional[int] = None,
               move_oracle: Callable[[FinSet, FinSet], DyadicElem] = find_move) -> PiecewiseMap:
    """
    A 와 B 를 맞바꾸는 대합 h (h(a) = b, A∪B 밖에서는 항등)

    매 단계 아직 덮이지 않은 A, B 의 첫 점 a_j, b_j 를 잇는 g_j 를 고르고,
    A_j ⊊ (A 나머지) ∩ g_j[B 나머지] 를 split 으로 얻어 (A_j, g_j), (g_j[A_j], g_j)
    두 조각을 내놓는다.

    Args:
        A, B: 서로소인 원통 클로픈 식
        a, b: a ∈ A, b ∈ B
        depth: 증인/분할 탐색 깊이 (기본값: config)
        move_oracle: x 를 y 로 보내는 군 원소를 찾는 함수

    Raises:
        ValueError: 전제 조건 위반
    """
    if depth is None:
        depth = REPARAM_CONFIG["search_depth"]
    if not (is_cylinder(A) and is_cylinder(B)):
        raise ValueError("교환할 집합은 L 이 빈 잎만 가진 원통 식이어야 합니다.")
    if not equal_on_window(intersect(A, B), EMPTY_SET, depth):
        raise ValueError("교환할 두 집합이 서로소가 아닙니다.")
    if not member(a, A) or not member(b, B):
        raise ValueError(f"시작점 조건 위반: a={a!r} ∈ A, b={b!r} ∈ B 이어야 합니다.")

    def pieces() -> Iterator[Piece]:
        rest = reduce_cylinder(complement(union(A, B)))
        if not isinstance(rest, Empty):
            yield Piece(rest, ZERO)
        rem_a, rem_b = reduce_cylinder(A), reduce_cylinder(B)
        x, y = a, b
        for step in count(1):
            g = move_oracle(x, y)
            neighbourhood = reduce_cylinder(intersect(rem_a, epsilon_image(g, rem_b)))
            piece_a = reduce_cylinder(split(neighbourhood, x, depth=depth))
            piece_b = reduce_cylinder(epsilon_image(g, piece_a))
            logger.debug(f"swap 단계 {step}: {x!r} ↔ {y!r}, move={g!r}")
            yield Piece(piece_a, g)
            yield Piece(piece_b, g)
            rem_a = reduce_cylinder(intersect(rem_a, complement(piece_a)))
            rem_b = reduce_cylinder(intersect(rem_b, complement(piece_b)))
            x, y = find_witness(rem_a, depth), find_witness(rem_b, depth)
            if x is None or y is None:
                logger.warning(f"swap: 깊이 {depth} 에서 나머지 집합의 증인이 없습니다.")
                return

    return PiecewiseMap(f"swap({a!r},{b!r})", producer=pieces())


def default_neighborhoods(n: int) -> List[ClopenExpr]:
    """D_p = ⋂_{j≤p} E_{m_j}ᶜ, m_j = min(enum_finset(j))"""
    if n < 1:
        raise ValueError(f"n 은 1 이상이어야 합니다: {n}")
    out, current = [], FULL_SET
    for j in range(1, n + 1):
        current = intersect(current, complement(E(enum_finset(j).min())))
        out.append(current)
    return out


@dataclass
class InvolutionTower:
    """
    서로 교환하는 대합 h_1..h_n 과 분할 트리 K^p(α)

    tree 의 식은 window 깊이에서 정확하다. 점의 주소는 node_address 가
    parts 와 h 로 정확하게 계산한다.
    """
    n: int
    h: List[PiecewiseMap]
    nbhd: List[ClopenExpr]
    parts: List[Tuple[ClopenExpr, ClopenExpr]]
    window: int
    depth: int
    tree: Dict[str, ClopenExpr] = field(default_factory=dict)
    _prefix_maps: Dict[Word, PiecewiseMap] = field(default_factory=dict, repr=False)
    _addresses: Dict[Tuple[int, FinSet], Word] = field(default_factory=dict, repr=False)


def apply_word(t: InvolutionTower, alpha: Sequence[int], k: FinSet) -> FinSet:
    """h_1^{α_1} … h_p^{α_p} 를 k 에 적용"""
    for i, bit in enumerate(alpha):
        if bit:
            k = apply_piecewise(t.h[i], k)
    return k


def node_address(t: InvolutionTower, p: int, k: FinSet) -> Word:
    """k ∈ K^p(α) 인 길이 p 의 단어 α"""
    key = (p, k)
    if key in t._addresses:
        return t._addresses[key]
    alpha: List[int] = []
    for q in range(p):
        x = apply_word(t, alpha, k)
        inner, outer = t.parts[q]
        if member(x, inner):
            alpha.append(0)
        elif member(x, outer):
            alpha.append(1)
        else:
            raise RuntimeError(f"레벨 {q} 에서 {k!r} 의 수송점 {x!r} 가 K^{q}(0) 밖에 있습니다.")
    t._addresses[key] = tuple(alpha)
    return tuple(alpha)


def prefix_map(t: InvolutionTower, alpha: Word) -> PiecewiseMap:
    """T_α = h_1^{α_1} … h_p^{α_p} 의 조각별 사상 (α 별 캐시)"""
    if alpha not in t._prefix_maps:
        factors = [t.h[i] for i, bit in enumerate(alpha) if bit]
        m = factors[0] if factors else identity_map()
        for f in factors[1:]:
            m = compose(f, m)
        t._prefix_maps[alpha] = m
    return t._prefix_maps[alpha]


def _conjugated(t: InvolutionTower, swap: PiecewiseMap, p: int) -> PiecewiseMap:
    # K^p(α) 위에서 T_α h T_α. h 의 A_j/B_j 조각을 지나므로 영역은 K^p(α) 안에 있다
    conjugates: Dict[Word, PiecewiseMap] = {}

    def make(k: FinSet) -> Piece:
        alpha = node_address(t, p, k)
        if alpha not in conjugates:
            T = prefix_map(t, alpha)
            conjugates[alpha] = compose(T, compose(swap, T))
        _, piece = conjugates[alpha].locate(k)
        return piece

    return PiecewiseMap(f"h{p + 1}", maker=make)


def _first_other_witness(e: ClopenExpr, x: FinSet, depth: int) -> FinSet:
    # 원통 식은 지지 좌표와 그 밖의 가장 작은 좌표 하나만 보면 된다
    used = support(e).union(x)
    spare = next(m for m in count(1) if m not in used)
    variables = [m for m in sorted(used.elements + (spare,)) if m <= depth]
    for r in range(1 << len(variables)):
        k = FinSet.from_iterable(m for i, m in enumerate(variables) if r >> i & 1)
        if k != x and member(k, e):
            return k
    raise SearchExhausted(f"{x!r} 가 아닌 증인을 깊이 {depth} 에서 찾지 못했습니다.")


def _check_neighborhoods(nbhd: Sequence[ClopenExpr], n: int, depth: int):
    if len(nbhd) < n:
        raise ValueError(f"이웃 수열 길이 {len(nbhd)} < n={n}")
    for p, d in enumerate(nbhd[:n], start=1):
        if not is_cylinder(d):
            raise ValueError(f"D_{p} 가 원통 식이 아닙니다: {to_sexpr(d)}")
    for p in range(1, n + 1):
        if not member(EMPTY, nbhd[p - 1]):
            raise ValueError(f"s₀ 가 D_{p} 에 없습니다.")
        if member(enum_finset(p), nbhd[p - 1]):
            raise ValueError(f"s_{p} 가 D_{p} 에 있습니다.")
        if p > 1 and not equal_on_window(intersect(nbhd[p - 1], complement(nbhd[p - 2])), EMPTY_SET, depth):
            raise ValueError(f"D_{p} ⊄ D_{p - 1}")


def _tree_nodes(t: InvolutionTower) -> Dict[str, ClopenExpr]:
    tree: Dict[str, ClopenExpr] = {"": FULL_SET}
    points = window_points(t.window)
    for p in range(1, t.n + 1):
        by_address: Dict[Word, List[FinSet]] = {}
        for k in points:
            by_address.setdefault(node_address(t, p, k), []).append(k)
        for alpha in product((0, 1), repeat=p):
            word = "".join(map(str, alpha))
            base = t.parts[p - 1][alpha[-1]]
            head = alpha[:-1]
            if not any(head):
                tree[word] = base
                continue
            T = prefix_map(t, head)
            used: Dict[int, ClopenExpr] = {}
            for k in by_address.get(alpha, []):
                i, piece = T.locate(k)
                if i not in used:
                    used[i] = intersect(piece.region, epsilon_image(piece.move, base))
            tree[word] = reduce_cylinder(union(*(used[i] for i in sorted(used))))
    return tree


def build_tower(n: int, nbhd: Optional[Sequence[ClopenExpr]] = None, depth: Optional[int] = None,
                window: Optional[int] = None) -> InvolutionTower:
    """
    서로 교환하는 대합 타워 구성

    h_1 은 D_1 과 그 여집합을 맞바꾸며 s₀ ↦ s₁. p+1 단계에서는 s_{p+1} 의 노드
    α 를 찾아 c = T_α(s_{p+1}) ∈ K^p(0) 로 옮기고, b 를 고른 뒤 K^p(0) ∩ D_{p+1}
    을 s₀ 중심으로 b 가 빠질 때까지 split 해 A 를 만든다. B = K^p(0)∖A 와의
    교환 h 를 각 노드로 켤레 수송해 h_{p+1} 을 정의한다.

    Args:
        n: 타워 높이
        nbhd: D_1 ⊇ … ⊇ D_n (기본값: default_neighborhoods)
        depth: 증인/분할 탐색 깊이 (기본값: config)
        window: 트리 식이 정확한 창 깊이 (기본값: n)

    Returns:
        InvolutionTower: 구성된 타워

    Raises:
        ValueError: 이웃 수열이 원통 식이 아니거나 s₀ ∈ D_p, s_p ∉ D_p, D_p ⊇ D_{p+1} 를 어길 때
    """
    if n < 1:
        raise ValueError(f"타워 높이는 1 이상이어야 합니다: {n}")
    if nbhd is None:
        nbhd = default_neighborhoods(n)
    if depth is None:
        depth = REPARAM_CONFIG["search_depth"]
    if window is None:
        window = n
    _check_neighborhoods(nbhd, n, depth)

    s0 = EMPTY
    first = reduce_cylinder(nbhd[0])
    rest = reduce_cylinder(complement(nbhd[0]))
    t = InvolutionTower(n=n, h=[build_swap(first, rest, s0, enum_finset(1), depth)],
                        nbhd=list(nbhd), parts=[(first, rest)], window=window, depth=depth)
    t.h[0].name = "h1"

    for p in range(1, n):
        target = enum_finset(p + 1)
        alpha = node_address(t, p, target)
        c = apply_word(t, alpha, target)
        k0 = t.parts[p - 1][0]
        b = c if c != s0 else _first_other_witness(k0, s0, depth)

        A = reduce_cylinder(intersect(k0, nbhd[p]))
        while member(b, A):
            A = reduce_cylinder(split(A, s0, depth=depth))
        B = reduce_cylinder(intersect(k0, complement(A)))
        logger.debug(f"타워 레벨 {p + 1}: α={alpha}, c={c!r}, b={b!r}, A={to_sexpr(A)}")

        t.parts.append((A, B))
        t.h.append(_conjugated(t, build_swap(A, B, s0, b, depth), p))

    t.tree = _tree_nodes(t)
    logger.info(f"✅ 대합 타워 구성 완료: n={n}, 트리 노드 {len(t.tree)}개 (창 깊이 {window})")
    return t


def dyadic_action(t: InvolutionTower, g: DyadicElem, k: FinSet) -> FinSet:
    """h_1^{α_1} … h_n^{α_n}(k), α = g 의 좌표"""
    if g.support.max() > t.n:
        raise ValueError(f"supp(g)={g.support!r} 가 [1..{t.n}] 을 벗어납니다.")
    return apply_word(t, [int(i in g.support) for i in range(1, t.n + 1)], k)


@dataclass
class ZActionMap:
    """
    정수 작용 φ

    forward 의 j 번째 조각 E_j = K^j(1..1,0) 위에서 φ = h_1…h_j,
    backward 의 j 번째 조각 F_j = K^j(0..0,1) 위에서 φ⁻¹ = h_1…h_j.
    """
    tower: InvolutionTower
    forward: List[Tuple[ClopenExpr, Word]]
    backward: List[Tuple[ClopenExpr, Word]]


def build_zaction(t: InvolutionTower) -> ZActionMap:
    """
    타워에서 오도미터형 정수 작용 φ 구성

    Raises:
        ValueError: 타워 높이가 2 미만일 때
    """
    if t.n < REPARAM_CONFIG["zaction_min_n"]:
        raise ValueError(f"정수 작용에는 높이 2 이상의 타워가 필요합니다: n={t.n}")
    forward, backward = [], []
    for j in range(1, t.n + 1):
        word = tuple(range(1, j + 1))
        forward.append((t.tree["1" * (j - 1) + "0"], word))
        backward.append((t.tree["0" * (j - 1) + "1"], word))
    return ZActionMap(tower=t, forward=forward, backward=backward)


def _zaction_step(z: ZActionMap, k: FinSet, flag: int) -> FinSet:
    alpha = node_address(z.tower, z.tower.n, k)
    if flag not in alpha:
        raise ZActionUndefined(f"{k!r} (주소 {alpha}) 는 구성된 조각 밖에 있습니다.")
    j = alpha.index(flag) + 1
    return apply_word(z.tower, [1] * j, k)


def zaction_forward(z: ZActionMap, k: FinSet) -> FinSet:
    """φ(k)"""
    return _zaction_step(z, k, 0)


def zaction_backward(z: ZActionMap, k: FinSet) -> FinSet:
    """φ⁻¹(k)"""
    return _zaction_step(z, k, 1)


def decomposition_audit(m: PiecewiseMap, depth: int, expected: Optional[Callable[[FinSet], FinSet]] = None,
                        scan_cap: Optional[int] = None) -> List[str]:
    """
    창 위에서 강한 분해 가능성 점검

    조각이 창을 덮고 서로소인지, 사상이 창에서 단사인지 본다. expected 가
    주어지면 각 점에서 조각의 move 로 옮긴 값이 expected(k) 와 같은지도 본다.

    Args:
        m: 점검할 조각별 사상
        depth: 창 깊이
        expected: 조각과 무관하게 계산한 기준 사상 (예: odometer_reference)
        scan_cap: 조각 탐색 한도

    Returns:
        list: 실패 설명 목록 (정상이면 빈 리스트)
    """
    failures = []
    used: Dict[int, Piece] = {}
    images: Dict[FinSet, FinSet] = {}
    for k in window_points(depth):
        try:
            i, piece = m.locate(k, scan_cap)
        except ScanCapExceeded as e:
            failures.append(str(e))
            continue
        used[i] = piece
        value = dyadic_act(piece.move, k)
        if value in images:
            failures.append(f"{m.name}: {images[value]!r} 와 {k!r} 가 같은 점 {value!r} 로 갑니다.")
        images[value] = k
        if expected is None:
            continue
        try:
            want = expected(k)
        except ValueError as e:
            failures.append(f"{m.name}: 기준 사상이 {k!r} 에서 정의되지 않음 ({e})")
            continue
        if value != want:
            failures.append(f"{m.name}: {k!r} ↦ {value!r}, 기준값은 {want!r}")
    indices = sorted(used)
    for x, i in enumerate(indices):
        for j in indices[x + 1:]:
            if not equal_on_window(intersect(used[i].region, used[j].region), EMPTY_SET, depth):
                failures.append(f"{m.name}: 조각 {i}, {j} 가 겹칩니다.")
    return failures


def swap_audit(h: PiecewiseMap, A: ClopenExpr, B: ClopenExpr, a: FinSet, b: FinSet, depth: int) -> List[str]:
    """h(a) = b, h[A] ⊆ B, h[B] ⊆ A, A∪B 밖에서 항등, h∘h = id 를 창에서 점검"""
    failures = []
    if apply_piecewise(h, a) != b:
        failures.append(f"{h.name}: h({a!r}) = {apply_piecewise(h, a)!r} ≠ {b!r}")
    for k in window_points(depth):
        y = apply_piecewise(h, k)
        if member(k, A) and not member(y, B):
            failures.append(f"{h.name}: {k!r} ∈ A 인데 h({k!r}) = {y!r} ∉ B")
        elif member(k, B) and not member(y, A):
            failures.append(f"{h.name}: {k!r} ∈ B 인데 h({k!r}) = {y!r} ∉ A")
        elif not member(k, A) and not member(k, B) and y != k:
            failures.append(f"{h.name}: A∪B 밖의 {k!r} 가 {y!r} 로 움직임")
        if apply_piecewise(h, y) != k:
            failures.append(f"{h.name}: h(h({k!r})) ≠ {k!r}")
    return failures


def odometer_reference(k: FinSet) -> FinSet:
    """열거 인덱스 i ↦ i+1 (조각을 거치지 않는 기준값)"""
    return enum_finset(finset_index(k) + 1)


def odometer_inverse_reference(k: FinSet) -> FinSet:
    """
    열거 인덱스 i ↦ i-1

    Raises:
        ValueError: k = ∅ 일 때
    """
    return enum_finset(finset_index(k) - 1)


def piece_table(m: PiecewiseMap) -> List[Dict[str, object]]:
    """리포트용 조각 표 (지금까지 만들어진 조각만)"""
    return [{"region": to_sexpr(p.region), "move": p.move.support.to_list()} for p in m.pieces]
