"""
유한 부분집합과 이진 합 군(⊕Z₂)의 정확한 연산
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Tuple

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class FinSet:
    """
    양의 정수의 유한 부분집합

    원소 j 는 mask 의 (j-1) 번째 비트로 저장한다. 따라서 mask 는 곧
    enum_finset 열거 순서의 인덱스이고, 정렬 순서도 열거 순서와 같다.
    """
    mask: int = 0

    def __post_init__(self):
        if self.mask < 0:
            raise ValueError(f"FinSet mask 는 음수일 수 없습니다: {self.mask}")

    @classmethod
    def of(cls, *elements: int) -> "FinSet":
        return cls.from_iterable(elements)

    @classmethod
    def from_iterable(cls, elements: Iterable[int]) -> "FinSet":
        mask = 0
        for j in elements:
            if int(j) < 1:
                raise ValueError(f"FinSet 원소는 양의 정수여야 합니다: {j}")
            mask |= 1 << (int(j) - 1)
        return cls(mask)

    @property
    def elements(self) -> Tuple[int, ...]:
        """엄격히 증가하는 원소 튜플"""
        out = []
        mask, j = self.mask, 1
        while mask:
            if mask & 1:
                out.append(j)
            mask >>= 1
            j += 1
        return tuple(out)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, j: int) -> bool:
        return j >= 1 and bool(self.mask >> (j - 1) & 1)

    def max(self) -> int:
        """최대 원소 (공집합이면 0)"""
        return self.mask.bit_length()

    def min(self) -> int:
        """최소 원소 (공집합이면 0)"""
        return (self.mask & -self.mask).bit_length()

    def issubset(self, other: "FinSet") -> bool:
        return self.mask & ~other.mask == 0

    def union(self, other: "FinSet") -> "FinSet":
        return FinSet(self.mask | other.mask)

    def intersection(self, other: "FinSet") -> "FinSet":
        return FinSet(self.mask & other.mask)

    def difference(self, other: "FinSet") -> "FinSet":
        return FinSet(self.mask & ~other.mask)

    def with_element(self, j: int) -> "FinSet":
        return FinSet(self.mask | 1 << (j - 1))

    def without_element(self, j: int) -> "FinSet":
        return FinSet(self.mask & ~(1 << (j - 1)))

    def to_list(self) -> List[int]:
        """리포트 직렬화용 정렬된 정수 배열"""
        return list(self.elements)

    def __repr__(self) -> str:
        return "{" + ",".join(str(j) for j in self.elements) + "}"


EMPTY = FinSet()


@dataclass(frozen=True, order=True)
class DyadicElem:
    """⊕Z₂ 의 원소. support 는 좌표가 1 인 위치"""
    support: FinSet = EMPTY

    @classmethod
    def of(cls, *positions: int) -> "DyadicElem":
        return cls(FinSet.of(*positions))

    def __add__(self, other: "DyadicElem") -> "DyadicElem":
        return DyadicElem(symdiff(self.support, other.support))

    def is_zero(self) -> bool:
        return self.support.mask == 0

    def __repr__(self) -> str:
        return f"g{self.support!r}"


ZERO = DyadicElem()


def symdiff(a: FinSet, b: FinSet) -> FinSet:
    """
    대칭차 (a∖b) ∪ (b∖a)

    이진 합 군의 덧셈과 작용 k ↦ k Δ supp(g) 를 동시에 구현한다.
    """
    return FinSet(a.mask ^ b.mask)


def enum_finset(i: int) -> FinSet:
    """
    열거 순서의 i 번째 유한집합

    Args:
        i: 0 이상의 정수

    Returns:
        FinSet: i 의 이진 전개에서 켜진 비트 위치 (1부터)

    Raises:
        ValueError: i 가 음수일 때
    """
    if i < 0:
        raise ValueError(f"열거 인덱스는 0 이상이어야 합니다: {i}")
    return FinSet(i)


def finset_index(k: FinSet) -> int:
    """enum_finset 의 역함수: Σ 2^(j-1)"""
    return sum(1 << (j - 1) for j in k.elements)


def dyadic_act(g: DyadicElem, k: FinSet) -> FinSet:
    """군 원소 g 의 궤도 점 k 에 대한 작용. 두 번 적용하면 항등"""
    return symdiff(g.support, k)


def generator(j: int) -> DyadicElem:
    """j 번째 생성원 g_j"""
    return DyadicElem(FinSet.of(j))


def window_points(depth: int) -> List[FinSet]:
    """[1..depth] 의 모든 부분집합 (열거 순서)"""
    if depth < 0:
        raise ValueError(f"창 깊이는 0 이상이어야 합니다: {depth}")
    return [FinSet(i) for i in range(1 << depth)]


def window_group(depth: int) -> List[DyadicElem]:
    """supp ⊆ [1..depth] 인 모든 군 원소 (열거 순서)"""
    return [DyadicElem(k) for k in window_points(depth)]


def span_group(gens: Iterable[DyadicElem]) -> List[DyadicElem]:
    """생성원들이 생성하는 유한 부분군 (열거 순서로 정렬)"""
    elems = {ZERO}
    for g in gens:
        elems |= {h + g for h in elems}
    return sorted(elems)
