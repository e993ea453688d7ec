"""
X_R 의 클로픈 부분집합에 대한 기호 계산

기저 집합 E(l, L) 위의 불 식과 점별 소속 판정, σ_n / ε_g 의 상(image) 공식,
분할(split), 증인 탐색, 불변 클로픈 집합 점검을 제공한다.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config import CLOPEN_CONFIG
from core_combinatorics import EMPTY, DyadicElem, FinSet, window_points
from feasible_space import BUILTIN, FeasibleSpace, PointQuery, TPoint, eval_point, in_O

logger = logging.getLogger(__name__)

# 판정 결과
TRIVIAL_FULL = "trivial-full"
TRIVIAL_EMPTY = "trivial-empty"
NOT_INVARIANT = "not-invariant"
INVARIANT_NONTRIVIAL = "invariant-nontrivial"


class SplitExhausted(ValueError):
    """한도 안에서 분할 인덱스를 찾지 못함"""


@dataclass(frozen=True)
class BasisSet:
    """E(l, L) = {f_k : l ⊆ k, ∀t∈L, N(t)∩(k∖l)=∅}"""
    l: FinSet = EMPTY
    L: Tuple[TPoint, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "L", tuple(sorted(set(self.L), key=str)))


class ClopenExpr:
    """클로픈 식 트리의 공통 부모"""
    __slots__ = ()


@dataclass(frozen=True)
class Empty(ClopenExpr):
    pass


@dataclass(frozen=True)
class Full(ClopenExpr):
    pass


@dataclass(frozen=True)
class Basis(ClopenExpr):
    basis: BasisSet


@dataclass(frozen=True)
class Complement(ClopenExpr):
    operand: ClopenExpr


@dataclass(frozen=True)
class Intersection(ClopenExpr):
    operands: Tuple[ClopenExpr, ...]


@dataclass(frozen=True)
class Union(ClopenExpr):
    operands: Tuple[ClopenExpr, ...]


EMPTY_SET = Empty()
FULL_SET = Full()


def basis(l: FinSet = EMPTY, L: Iterable[TPoint] = ()) -> ClopenExpr:
    return Basis(BasisSet(l, tuple(L)))


def E(n: int) -> ClopenExpr:
    """E_n = E({n}, ∅) = {f_k : n ∈ k}"""
    return basis(FinSet.of(n))


def complement(e: ClopenExpr) -> ClopenExpr:
    if isinstance(e, Empty):
        return FULL_SET
    if isinstance(e, Full):
        return EMPTY_SET
    return Complement(e)


def intersect(*operands: ClopenExpr) -> ClopenExpr:
    kept = []
    for e in operands:
        if isinstance(e, Empty):
            return EMPTY_SET
        if not isinstance(e, Full):
            kept.append(e)
    if not kept:
        return FULL_SET
    if len(kept) == 1:
        return kept[0]
    return Intersection(tuple(kept))


def union(*operands: ClopenExpr) -> ClopenExpr:
    kept = []
    for e in operands:
        if isinstance(e, Full):
            return FULL_SET
        if not isinstance(e, Empty):
            kept.append(e)
    if not kept:
        return EMPTY_SET
    if len(kept) == 1:
        return kept[0]
    return Union(tuple(kept))


def member(k: FinSet, e: ClopenExpr, space: Optional[FeasibleSpace] = None) -> int:
    """
    점 f_k 가 식 e 에 속하면 1

    Raises:
        InvalidBasisError: 잎의 L 에 R 의 점이 있을 때
    """
    if space is None:
        space = BUILTIN
    if isinstance(e, Basis):
        return eval_point(space, PointQuery(k, e.basis.l, e.basis.L))
    if isinstance(e, Complement):
        return 1 - member(k, e.operand, space)
    if isinstance(e, Intersection):
        return int(all(member(k, x, space) for x in e.operands))
    if isinstance(e, Union):
        return int(any(member(k, x, space) for x in e.operands))
    if isinstance(e, Full):
        return 1
    if isinstance(e, Empty):
        return 0
    raise TypeError(f"알 수 없는 식 노드: {type(e).__name__}")


def _sigma_basis(n: int, b: BasisSet, space: FeasibleSpace) -> ClopenExpr:
    if n in b.l:
        return intersect(complement(E(n)), basis(b.l.without_element(n), b.L))
    grown = basis(b.l.with_element(n), b.L)
    if any(in_O(space, n, t) for t in b.L):
        return grown
    return union(grown, intersect(basis(b.l, b.L), complement(E(n))))


def sigma_image(n: int, e: ClopenExpr, space: Optional[FeasibleSpace] = None) -> ClopenExpr:
    """
    σ_n[e] 를 식 트리에 밀어 넣어 계산

    σ_n 은 전단사이므로 상(image)은 불 연산과 교환한다. 잎에서는
    n ∈ l, (n ∉ l 이고 n ∈ N(t) 인 t 없음), (그런 t 있음) 세 경우로 나뉜다.
    """
    if n < 1:
        raise ValueError(f"σ_n 인덱스는 1 이상이어야 합니다: {n}")
    if space is None:
        space = BUILTIN
    if isinstance(e, Basis):
        return _sigma_basis(n, e.basis, space)
    if isinstance(e, Complement):
        return complement(sigma_image(n, e.operand, space))
    if isinstance(e, Intersection):
        return intersect(*(sigma_image(n, x, space) for x in e.operands))
    if isinstance(e, Union):
        return union(*(sigma_image(n, x, space) for x in e.operands))
    return e


def epsilon_image(g: DyadicElem, e: ClopenExpr, space: Optional[FeasibleSpace] = None) -> ClopenExpr:
    """ε_g[e]: supp(g) 의 각 n 에 대해 sigma_image 를 합성"""
    for n in g.support.elements:
        e = sigma_image(n, e, space)
    return e


def _leaves(e: ClopenExpr) -> List[BasisSet]:
    if isinstance(e, Basis):
        return [e.basis]
    if isinstance(e, Complement):
        return _leaves(e.operand)
    if isinstance(e, (Intersection, Union)):
        return [b for x in e.operands for b in _leaves(x)]
    return []


def support(e: ClopenExpr) -> FinSet:
    """잎들의 l 집합의 합집합"""
    out = EMPTY
    for b in _leaves(e):
        out = out.union(b.l)
    return out


def is_cylinder(e: ClopenExpr) -> bool:
    """모든 잎의 L 이 비어 있으면 True (소속이 k ∩ support(e) 에만 의존)"""
    return not any(b.L for b in _leaves(e))


def cofactor(e: ClopenExpr, m: int, bit: int) -> ClopenExpr:
    """원통 식에서 좌표 m 을 bit 로 고정한 식"""
    if isinstance(e, Basis):
        l = e.basis.l
        if m in l:
            if not bit:
                return EMPTY_SET
            l = l.without_element(m)
        return FULL_SET if not l else basis(l)
    if isinstance(e, Complement):
        return complement(cofactor(e.operand, m, bit))
    if isinstance(e, Intersection):
        return intersect(*(cofactor(x, m, bit) for x in e.operands))
    if isinstance(e, Union):
        return union(*(cofactor(x, m, bit) for x in e.operands))
    return e


def reduce_cylinder(e: ClopenExpr, space: Optional[FeasibleSpace] = None) -> ClopenExpr:
    """
    L 이 빈 잎만 가진 식을 지지 인덱스 위의 결정 트리 꼴로 축약

    이런 식의 소속은 k ∩ support(e) 에만 의존하므로 결과는 모든 점에서
    원래 식과 같다. L 이 있는 잎이 하나라도 있으면 그대로 돌려준다.

    Args:
        e: 클로픈 식
        space: 평가 공간

    Returns:
        ClopenExpr: (E_m ∩ hi) ∪ (E_mᶜ ∩ lo) 꼴의 동치 식
    """
    if not is_cylinder(e):
        return e
    memo: Dict[ClopenExpr, ClopenExpr] = {}

    def build(x: ClopenExpr) -> ClopenExpr:
        if isinstance(x, (Full, Empty)):
            return x
        if x in memo:
            return memo[x]
        indices = support(x)
        if not indices:
            result = FULL_SET if member(EMPTY, x, space) else EMPTY_SET
        else:
            m = indices.min()
            hi = build(cofactor(x, m, 1))
            lo = build(cofactor(x, m, 0))
            result = hi if hi == lo else union(intersect(E(m), hi), intersect(complement(E(m)), lo))
        memo[x] = result
        return result

    return build(e)


def _first_cylinder_point(e: ClopenExpr, depth: int, space: Optional[FeasibleSpace]) -> Optional[int]:
    # 가장 작은 좌표부터 0/1 로 고정해 내려가며 최소 mask 를 고른다
    memo: Dict[ClopenExpr, Optional[int]] = {}

    def first(x: ClopenExpr) -> Optional[int]:
        if isinstance(x, Full):
            return 0
        if isinstance(x, Empty):
            return None
        if x in memo:
            return memo[x]
        indices = support(x)
        if not indices or indices.min() > depth:
            result = 0 if member(EMPTY, x, space) else None
        else:
            m = indices.min()
            lo = first(cofactor(x, m, 0))
            hi = first(cofactor(x, m, 1))
            candidates = [c for c in (lo, None if hi is None else hi | 1 << (m - 1)) if c is not None]
            result = min(candidates) if candidates else None
        memo[x] = result
        return result

    return first(e)


def _scan_depth(depth: int) -> int:
    limit = CLOPEN_CONFIG["scan_window"]
    if depth > limit:
        logger.debug(f"원통 식이 아닌 식: 깊이 {depth} 대신 {limit} 까지만 훑습니다.")
    return min(depth, limit)


def find_witness(e: ClopenExpr, depth: int, space: Optional[FeasibleSpace] = None) -> Optional[FinSet]:
    """
    열거 순서로 [1..depth] 안에서 e 에 속하는 첫 점

    None 은 depth 까지의 공집합 증거일 뿐이다. 원통 식은 지지 좌표만
    탐색하므로 큰 depth 도 다룰 수 있다. 그 밖의 식은 창 전체를 훑되
    CLOPEN_CONFIG["scan_window"] 깊이까지만 본다.
    """
    if depth < 1:
        raise ValueError(f"depth 는 1 이상이어야 합니다: {depth}")
    if is_cylinder(e):
        mask = _first_cylinder_point(e, depth, space)
        return None if mask is None else FinSet(mask)
    for i in range(1 << _scan_depth(depth)):
        k = FinSet(i)
        if member(k, e, space):
            return k
    return None


def symmetric_difference(e1: ClopenExpr, e2: ClopenExpr) -> ClopenExpr:
    return union(intersect(e1, complement(e2)), intersect(complement(e1), e2))


def equal_on_window(e1: ClopenExpr, e2: ClopenExpr, depth: int,
                    space: Optional[FeasibleSpace] = None) -> int:
    """[1..depth] 의 모든 점에서 소속이 일치하면 1 (원통 식이 아니면 scan_window 까지)"""
    if depth < 1:
        raise ValueError(f"depth 는 1 이상이어야 합니다: {depth}")
    if is_cylinder(e1) and is_cylinder(e2):
        return int(find_witness(symmetric_difference(e1, e2), depth, space) is None)
    return int(all(member(k, e1, space) == member(k, e2, space) for k in window_points(_scan_depth(depth))))


def split(e: ClopenExpr, anchor: FinSet, used: FinSet = EMPTY, depth: Optional[int] = None,
          space: Optional[FeasibleSpace] = None) -> ClopenExpr:
    """
    anchor 를 포함하는 진부분 클로픈 이웃

    used 에 없는 최소 m 중 e ∩ E_m 과 e ∩ E_mᶜ 이 모두 증인을 가지는 것을
    골라 anchor 가 들어 있는 쪽을 돌려준다.

    Raises:
        ValueError: anchor 가 e 에 속하지 않을 때
        SplitExhausted: depth 안에 분할 인덱스가 없을 때
    """
    if depth is None:
        depth = CLOPEN_CONFIG["window_depth"]
    if not member(anchor, e, space):
        raise ValueError(f"anchor {anchor!r} 가 분할 대상 집합에 없습니다.")

    for m in range(1, depth + 1):
        if m in used:
            continue
        inside = intersect(e, E(m))
        outside = intersect(e, complement(E(m)))
        if find_witness(inside, depth, space) is None or find_witness(outside, depth, space) is None:
            continue
        return inside if m in anchor else outside
    raise SplitExhausted(f"깊이 {depth} 안에 분할 인덱스가 없습니다 (anchor={anchor!r}).")


def invariant_clopen_audit(gens: Sequence[DyadicElem], e: ClopenExpr, depth: int,
                           space: Optional[FeasibleSpace] = None) -> str:
    """
    생성원 전체에 대해 창 위에서 불변인지 보고 자명성 판정

    Returns:
        str: trivial-full / trivial-empty / not-invariant / invariant-nontrivial
    """
    for g in gens:
        if not equal_on_window(epsilon_image(g, e, space), e, depth, space):
            return NOT_INVARIANT
    if find_witness(e, depth, space) is None:
        return TRIVIAL_EMPTY
    if find_witness(complement(e), depth, space) is None:
        return TRIVIAL_FULL
    logger.warning(f"깊이 {depth} 에서 비자명 불변 집합 발견: {to_sexpr(e)}")
    return INVARIANT_NONTRIVIAL


def to_sexpr(e: ClopenExpr) -> str:
    """리포트용 전위 표기, 예: (and (not (E (1) ())) (E () (:01)))"""
    if isinstance(e, Basis):
        l = " ".join(str(j) for j in e.basis.l.elements)
        L = " ".join(str(t) for t in e.basis.L)
        return f"(E ({l}) ({L}))"
    if isinstance(e, Complement):
        return f"(not {to_sexpr(e.operand)})"
    if isinstance(e, Intersection):
        return "(and " + " ".join(to_sexpr(x) for x in e.operands) + ")"
    if isinstance(e, Union):
        return "(or " + " ".join(to_sexpr(x) for x in e.operands) + ")"
    if isinstance(e, Full):
        return "full"
    return "empty"


def random_basis(rng: np.random.Generator, max_index: int, points: Sequence[TPoint],
                 max_points: int = 2) -> BasisSet:
    """l ⊆ [1..max_index], |L| ≤ max_points 인 무작위 기저 집합"""
    l = FinSet(int(rng.integers(0, 1 << max_index)))
    size = int(rng.integers(0, max_points + 1))
    chosen = rng.choice(len(points), size=min(size, len(points)), replace=False) if points else []
    return BasisSet(l, tuple(points[int(i)] for i in chosen))


def random_expr(rng: np.random.Generator, max_index: int, points: Sequence[TPoint],
                height: int = 3) -> ClopenExpr:
    """무작위 클로픈 식 (높이 height 이하)"""
    if height <= 0 or rng.random() < 0.3:
        return Basis(random_basis(rng, max_index, points))
    kind = int(rng.integers(0, 3))
    if kind == 0:
        return complement(random_expr(rng, max_index, points, height - 1))
    parts = [random_expr(rng, max_index, points, height - 1) for _ in range(2)]
    return intersect(*parts) if kind == 1 else union(*parts)
