"""
Feasible space (T, O, R) 의 결정 가능한 모델과 점 f_k 의 정확한 평가
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config import SPACE_CONFIG
from core_combinatorics import FinSet

logger = logging.getLogger(__name__)


class InvalidBasisError(ValueError):
    """기저 집합 파라미터 L 에 R 의 점이 들어 있음"""


class SearchExhausted(ValueError):
    """탐색 한도 소진 (불가능하다는 뜻은 아님)"""


class WitnessInvalid(RuntimeError):
    """r_witness 가 O_n∖R 의 점을 돌려주지 않음"""


def _primitive_root(word: str) -> str:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True)
class TPoint:
    """
    결국 주기적인 이진 수열 preperiod·period^ω

    생성 시 정규형으로 맞춘다: period 는 원시 단어, preperiod 는 가능한 한 짧게.
    """
    preperiod: str = ""
    period: str = "0"

    def __post_init__(self):
        if not self.period:
            raise ValueError("period 는 비어 있을 수 없습니다.")
        if set(self.preperiod + self.period) - {"0", "1"}:
            raise ValueError(f"이진 단어가 아닙니다: {self.preperiod}:{self.period}")
        pre, per = self.preperiod, _primitive_root(self.period)
        while pre and pre[-1] == per[-1]:
            pre, per = pre[:-1], per[-1] + per[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    @classmethod
    def parse(cls, text: str) -> "TPoint":
        """`pre:period` 형식 파싱 (예: `:01`, `0:1`)"""
        if text.count(":") != 1:
            raise ValueError(f"TPoint 형식 오류: {text!r}")
        pre, per = text.split(":")
        return cls(pre, per)

    def bit(self, i: int) -> int:
        """1부터 시작하는 i 번째 좌표"""
        if i < 1:
            raise ValueError(f"좌표 위치는 1 이상이어야 합니다: {i}")
        if i <= len(self.preperiod):
            return int(self.preperiod[i - 1])
        return int(self.period[(i - len(self.preperiod) - 1) % len(self.period)])

    def prefix(self, length: int) -> str:
        return "".join(str(self.bit(i)) for i in range(1, length + 1))

    def __str__(self) -> str:
        return f"{self.preperiod}:{self.period}"


@dataclass(frozen=True)
class FeasibleSpace:
    """O_n, R 에 대한 결정 가능한 소속 판정과 증인 생성기"""
    name: str
    o_membership: Callable[[int, TPoint], int]
    o_descriptor: Callable[[int], str]
    r_membership: Callable[[TPoint], int]
    r_witness: Optional[Callable[[int], TPoint]] = None


@dataclass(frozen=True)
class PointQuery:
    """f_k(l, L) 질의"""
    k: FinSet
    l: FinSet = FinSet()
    L: Tuple[TPoint, ...] = field(default_factory=tuple)


def cylinder_word(n: int) -> str:
    """길이-사전식 순서에서 n 번째 이진 단어 (n=1 은 빈 단어)"""
    if n < 1:
        raise ValueError(f"O_n 인덱스는 1 이상이어야 합니다: {n}")
    return bin(n)[3:]


def _builtin_o_membership(n: int, t: TPoint) -> int:
    word = cylinder_word(n)
    return int(t.prefix(len(word)) == word)


def _builtin_r_membership(t: TPoint) -> int:
    # 주기 구간 두 바퀴 뒤의 쌍까지 보면 이후 쌍의 패턴은 반복된다
    pairs = (len(t.preperiod) + 2 * len(t.period)) // 2 + 2
    return int(all(t.bit(2 * j - 1) == t.bit(2 * j) for j in range(1, pairs + 1)))


def _builtin_r_witness(n: int) -> TPoint:
    # 단어 뒤에 (01)^ω 를 붙이면 꼬리 안에 완전히 들어가는 쌍이 항상 어긋난다
    return TPoint(cylinder_word(n), "01")


def builtin_cantor() -> FeasibleSpace:
    """기본 공간: 원통 집합 열거와 쌍 반복 집합 R"""
    return FeasibleSpace(
        name="builtin-cantor",
        o_membership=_builtin_o_membership,
        o_descriptor=cylinder_word,
        r_membership=_builtin_r_membership,
        r_witness=_builtin_r_witness,
    )


SPACES: Dict[str, Callable[[], FeasibleSpace]] = {
    "builtin-cantor": builtin_cantor,
}

BUILTIN = builtin_cantor()


def get_space(name: Optional[str] = None) -> FeasibleSpace:
    """
    이름으로 FeasibleSpace 선택

    Raises:
        ValueError: 알 수 없는 공간 이름
    """
    if name is None:
        name = SPACE_CONFIG["default_space"]
    if name not in SPACES:
        raise ValueError(f"알 수 없는 공간: {name} (가능: {sorted(SPACES)})")
    return SPACES[name]()


def in_O(space: FeasibleSpace, n: int, t: TPoint) -> int:
    """t ∈ O_n 이면 1"""
    if n < 1:
        raise ValueError(f"O_n 인덱스는 1 이상이어야 합니다: {n}")
    return space.o_membership(n, t)


def n_window(space: FeasibleSpace, t: TPoint, bound: int) -> FinSet:
    """N(t) ∩ [1..bound]"""
    if bound < 1:
        raise ValueError(f"bound 는 1 이상이어야 합니다: {bound}")
    return FinSet.from_iterable(n for n in range(1, bound + 1) if in_O(space, n, t))


def feasibility_audit(space: FeasibleSpace, M: Sequence[TPoint], t: TPoint,
                      m: int, search_bound: Optional[int] = None) -> int:
    """
    m < n ≤ search_bound 이고 t ∈ O_n, M ∩ O_n = ∅ 인 최소 n

    Args:
        space: 대상 공간
        M: 유한 점 집합
        t: M 에 속하지 않는 점
        m: 하한
        search_bound: 탐색 상한 (기본값: config)

    Returns:
        int: 최소 인덱스 n

    Raises:
        ValueError: t ∈ M 일 때
        SearchExhausted: 상한 안에서 찾지 못했을 때
    """
    if search_bound is None:
        search_bound = SPACE_CONFIG["search_bound"]
    if t in M:
        raise ValueError(f"t 가 M 에 포함되어 있습니다: {t}")

    for n in range(max(m, 0) + 1, search_bound + 1):
        if in_O(space, n, t) and not any(in_O(space, n, s) for s in M):
            return n
    raise SearchExhausted(f"탐색 한도 소진: t={t}, m={m}, bound={search_bound}")


def _candidate_points(max_length: int) -> Iterator[TPoint]:
    for length in range(1, max_length + 1):
        for pre_len in range(length):
            per_len = length - pre_len
            for pre_bits in range(1 << pre_len):
                for per_bits in range(1 << per_len):
                    pre = format(pre_bits, f"0{pre_len}b") if pre_len else ""
                    yield TPoint(pre, format(per_bits, f"0{per_len}b"))


def admissibility_audit(space: FeasibleSpace, n: int,
                        search_bound: Optional[int] = None) -> TPoint:
    """
    O_n 에 있고 R 밖에 있는 점 하나를 돌려준다

    r_witness 가 있으면 그것을 쓰고, 없으면 작은 결국 주기적 점들을
    search_bound 개까지 훑는다.

    Raises:
        WitnessInvalid: r_witness 결과가 두 판정을 통과하지 못할 때
        SearchExhausted: 증인 생성기가 없고 탐색도 실패했을 때
    """
    if n < 1:
        raise ValueError(f"O_n 인덱스는 1 이상이어야 합니다: {n}")
    if search_bound is None:
        search_bound = SPACE_CONFIG["search_bound"]

    if space.r_witness is not None:
        t = space.r_witness(n)
        if not in_O(space, n, t) or space.r_membership(t):
            raise WitnessInvalid(f"{space.name}: r_witness({n}) = {t} 가 O_n∖R 에 없습니다.")
        return t

    for count, t in enumerate(_candidate_points(len(space.o_descriptor(n)) + 4)):
        if count >= search_bound:
            break
        if in_O(space, n, t) and not space.r_membership(t):
            return t
    raise SearchExhausted(f"{space.name}: O_{n}∖R 증인 탐색 한도 소진")


def eval_point(space: FeasibleSpace, q: PointQuery) -> int:
    """
    f_k(l, L) 평가

    l ⊆ k 이고 모든 t ∈ L 에 대해 N(t) ∩ (k∖l) = ∅ 이면 1.

    Raises:
        InvalidBasisError: L 의 점이 R 에 속할 때
    """
    for t in q.L:
        if space.r_membership(t):
            raise InvalidBasisError(f"기저 파라미터 L 의 점 {t} 가 R 에 속합니다.")
    if not q.l.issubset(q.k):
        return 0
    rest = q.k.difference(q.l)
    if not q.L or not rest:
        return 1
    bound = q.k.max()
    for t in q.L:
        if n_window(space, t, bound).intersection(rest):
            return 0
    return 1


def gamma_project(k: FinSet, bound: int) -> str:
    """[1..bound] 로의 제한: n ∈ k 이면 n 번째 비트가 1"""
    if k and bound < k.max():
        raise ValueError(f"bound({bound}) 가 max(k)={k.max()} 보다 작습니다.")
    return "".join("1" if n in k else "0" for n in range(1, bound + 1))


def descriptor_audit(space: FeasibleSpace, indices: Sequence[int]) -> List[Tuple[int, int]]:
    """
    표본 인덱스 쌍마다 O_m 과 O_n 을 구별하는 점이 있는지 확인

    Returns:
        list: 구별점을 찾지 못한 (m, n) 쌍 목록 (정상이면 빈 리스트)
    """
    failures = []
    ordered = sorted(set(indices))
    for i, m in enumerate(ordered):
        for n in ordered[i + 1:]:
            words = (space.o_descriptor(n), space.o_descriptor(m))
            candidates = [TPoint(w, c) for w in words for c in "01"]
            if not any(in_O(space, m, t) != in_O(space, n, t) for t in candidates):
                failures.append((m, n))
    if failures:
        logger.error(f"❌ 구별되지 않는 O 쌍: {failures[:5]}")
    return failures


def random_tpoint(rng: np.random.Generator, max_pre: int = 4, max_period: int = 3) -> TPoint:
    """시드 고정 난수로 결정적인 TPoint 생성"""
    pre_len = int(rng.integers(0, max_pre + 1))
    per_len = int(rng.integers(1, max_period + 1))
    pre = "".join(str(b) for b in rng.integers(0, 2, pre_len))
    per = "".join(str(b) for b in rng.integers(0, 2, per_len))
    return TPoint(pre, per)
