"""
e/u 타워, 불 대수 포화, 유한 차원 부분대수 단계, AFD 사슬 점검
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from clopen_algebra import (
    FULL_SET, ClopenExpr, complement, epsilon_image, equal_on_window, find_witness, intersect,
    is_cylinder, member, reduce_cylinder, to_sexpr, union
)
from config import GROUPOID_CONFIG, TOWER_CONFIG
from core_combinatorics import ZERO, DyadicElem, window_group, window_points
from feasible_space import FeasibleSpace
from groupoid_window import EXACT, DiagonalElem, OrbitWindow, conv, random_kernel, truncation_approx, u_of
from linear_span import span_rank

logger = logging.getLogger(__name__)


class StageBoundError(ValueError):
    """타워 깊이 제한 초과"""


class ClosureBudgetExceeded(RuntimeError):
    """곱셈 폐포 원소 수가 예산을 넘음"""


@dataclass(frozen=True, eq=False)
class TowerStage:
    """
    깊이 n 의 e/u 생성원 (2ⁿ × 2ⁿ 정수 행렬)

    기저는 [1..n] 의 부분집합 k 를 열거 순서로 놓는다. e_j 는 j 번째 비트가
    0 인 기저로의 사영, u_j 는 j 번째 비트를 뒤집는 치환이다.
    """
    n: int
    e: Tuple[np.ndarray, ...]
    u: Tuple[np.ndarray, ...]
    mode: str = EXACT

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=np.int64)


def stage(n: int, mode: str = EXACT) -> TowerStage:
    """
    깊이 n 단계 생성

    Raises:
        StageBoundError: n 이 [1, stage_bound] 밖일 때
    """
    bound = TOWER_CONFIG["stage_bound"]
    if not 1 <= n <= bound:
        raise StageBoundError(f"타워 깊이는 1 이상 {bound} 이하여야 합니다: {n}")
    dim = 1 << n
    indices = np.arange(dim)
    es, us = [], []
    for j in range(1, n + 1):
        bit = 1 << (j - 1)
        es.append(np.diag(((indices & bit) == 0).astype(np.int64)))
        flip = np.zeros((dim, dim), dtype=np.int64)
        flip[indices, indices ^ bit] = 1
        us.append(flip)
    return TowerStage(n=n, e=tuple(es), u=tuple(us), mode=mode)


def relations_check(s: TowerStage) -> Dict[str, object]:
    """
    생성원 관계식 전수 점검

    u_j e_j u_j = 1 − e_j, u_j e_m u_j = e_m (m ≠ j), u 끼리 가환, e 끼리 가환,
    u_j 는 자기수반이며 u_j² = 1.
    """
    one = s.identity
    instances: List[Dict[str, object]] = []

    def record(family: str, label: str, ok: bool):
        instances.append({"family": family, "instance": label, "passed": bool(ok)})

    for j in range(s.n):
        uj, ej = s.u[j], s.e[j]
        record("flip", f"u{j + 1} e{j + 1} u{j + 1} = 1 - e{j + 1}", np.array_equal(uj @ ej @ uj, one - ej))
        for m in range(s.n):
            if m != j:
                record("fix", f"u{j + 1} e{m + 1} u{j + 1} = e{m + 1}", np.array_equal(uj @ s.e[m] @ uj, s.e[m]))
    for j in range(s.n):
        for k in range(j + 1, s.n):
            record("u-commute", f"[u{j + 1}, u{k + 1}] = 0", np.array_equal(s.u[j] @ s.u[k], s.u[k] @ s.u[j]))
            record("e-commute", f"[e{j + 1}, e{k + 1}] = 0", np.array_equal(s.e[j] @ s.e[k], s.e[k] @ s.e[j]))
    for j in range(s.n):
        uj = s.u[j]
        record("self-adjoint", f"u{j + 1}* = u{j + 1}, u{j + 1}^2 = 1",
               np.array_equal(uj, uj.T) and np.array_equal(uj @ uj, one))

    failed = [r for r in instances if not r["passed"]]
    if failed:
        logger.error(f"❌ 관계식 실패 {len(failed)}건 (n={s.n})")
    return {"n": s.n, "instances": instances, "count": len(instances), "passed": not failed}


def independence_check(s: TowerStage) -> Dict[str, object]:
    """부호 곱 ∏ e_j^{(α_j)} 가 모두 0 도 1 도 아닌지, 계수와 함께 보고"""
    one = s.identity
    products = []
    for alpha in product((0, 1), repeat=s.n):
        p = one.copy()
        for j, a in enumerate(alpha):
            p = p @ (s.e[j] if a == 0 else one - s.e[j])
        rank = span_rank(list(p), s.mode)
        products.append({
            "alpha": "".join(map(str, alpha)),
            "rank": rank,
            "nonzero": bool(p.any()),
            "proper": not np.array_equal(p, one),
        })
    passed = all(r["nonzero"] and r["proper"] for r in products)
    return {"n": s.n, "products": products, "passed": passed}


def full_matrix_check(s: TowerStage, closure_budget: Optional[int] = None) -> int:
    """
    {1, e_j, u_j} 의 곱셈 폐포가 생성하는 선형 공간의 차원 (기대값 4ⁿ)

    Raises:
        StageBoundError: exact 모드에서 n 이 exact_span_max_n 을 넘을 때
        ClosureBudgetExceeded: 폐포 원소 수가 예산을 넘을 때
    """
    if closure_budget is None:
        closure_budget = TOWER_CONFIG["closure_budget"]
    if s.mode == EXACT and s.n > TOWER_CONFIG["exact_span_max_n"]:
        raise StageBoundError(f"exact 모드 전행렬 점검은 n ≤ {TOWER_CONFIG['exact_span_max_n']} 까지입니다: {s.n}")

    gens = list(s.e) + list(s.u)
    seen = {s.identity.tobytes(): s.identity}
    frontier = [s.identity]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                prod_ = m @ g
                key = prod_.tobytes()
                if key not in seen:
                    seen[key] = prod_
                    nxt.append(prod_)
                    if len(seen) > closure_budget:
                        raise ClosureBudgetExceeded(f"폐포 원소가 {closure_budget} 개를 넘었습니다 (n={s.n}).")
        frontier = nxt

    # 희소한 행부터 소거
    closure = sorted(seen.values(), key=lambda m: int(np.count_nonzero(m)))
    dimension = span_rank(closure, s.mode)
    expected = 4 ** s.n
    if dimension != expected:
        logger.error(f"❌ 생성 차원 {dimension} ≠ {expected} (n={s.n})")
    else:
        logger.info(f"✅ n={s.n}: 폐포 {len(closure)}개, 생성 차원 {dimension}")
    return dimension


def embed(x: np.ndarray) -> np.ndarray:
    """단계 n 행렬을 단계 n+1 로 (새 비트가 최상위, 블록 대각 두 배)"""
    return np.kron(np.eye(2, dtype=x.dtype), x)


@dataclass
class BooleanSaturation:
    generators: Tuple[ClopenExpr, ...]
    subgroups: Tuple[Tuple[DyadicElem, ...], ...]
    window_depth: int
    stages: List[List[ClopenExpr]] = field(default_factory=list)
    empty_cells: List[Dict[str, object]] = field(default_factory=list)
    space: Optional[FeasibleSpace] = None


def _check_subgroup_chain(chain: Sequence[Sequence[DyadicElem]]):
    prev = {ZERO}
    for p, group in enumerate(chain, start=1):
        members = set(group)
        if ZERO not in members or any(a + b not in members for a in members for b in members):
            raise ValueError(f"{p}번째 부분군이 군 연산에 닫혀 있지 않습니다.")
        if not prev <= members:
            raise ValueError(f"부분군 사슬이 증가하지 않습니다 ({p}번째).")
        prev = members


def _simplify(e: ClopenExpr, space: Optional[FeasibleSpace]) -> ClopenExpr:
    return reduce_cylinder(e, space) if is_cylinder(e) else e


def _refine(atoms: List[ClopenExpr], s: ClopenExpr, p: int, sat: BooleanSaturation) -> List[ClopenExpr]:
    refined = []
    for atom in atoms:
        for cell in (intersect(atom, s), intersect(atom, complement(s))):
            cell = _simplify(cell, sat.space)
            if find_witness(cell, sat.window_depth, sat.space) is None:
                sat.empty_cells.append({"stage": p, "cell": to_sexpr(cell), "tag": f"empty@{sat.window_depth}"})
            else:
                refined.append(cell)
    return refined


def saturate_boolean(gens: Sequence[ClopenExpr], subgroup_chain: Sequence[Sequence[DyadicElem]],
                     window_depth: Optional[int] = None, space: Optional[FeasibleSpace] = None) -> BooleanSaturation:
    """
    부분군 사슬로 포화시킨 유한 불 대수의 증가 사슬

    단계 p 의 원자는 단계 p−1 원자와 생성원 p 의 Γ_p 상을 모든 부호 조합으로
    교차해 얻는다. 창에서 증인이 없는 칸은 버리고 "empty@d" 로 기록한다.

    Raises:
        ValueError: 생성원과 부분군 개수가 다르거나 사슬이 부분군 증가열이 아닐 때
    """
    if window_depth is None:
        window_depth = TOWER_CONFIG["saturation_depth"]
    if len(gens) != len(subgroup_chain):
        raise ValueError(f"생성원 {len(gens)}개와 부분군 {len(subgroup_chain)}개의 개수가 다릅니다.")
    _check_subgroup_chain(subgroup_chain)

    sat = BooleanSaturation(
        generators=tuple(gens),
        subgroups=tuple(tuple(sorted(set(g))) for g in subgroup_chain),
        window_depth=window_depth,
        space=space,
    )
    atoms: List[ClopenExpr] = [FULL_SET]
    for p, (gen, group) in enumerate(zip(sat.generators, sat.subgroups), start=1):
        sources = [gen] + list(atoms)
        current = list(atoms)
        for src in sources:
            for g in group:
                current = _refine(current, _simplify(epsilon_image(g, src, space), space), p, sat)
        sat.stages.append(current)
        logger.debug(f"포화 단계 {p}: 원자 {len(current)}개")
    return sat


def saturation_audit(sat: BooleanSaturation) -> Dict[str, object]:
    """분할, 부분군 불변, 단계 증가를 창에서 점검"""
    d = sat.window_depth
    partition, invariant, increasing = [], [], []
    for p, atoms in enumerate(sat.stages, start=1):
        covers = equal_on_window(union(*atoms), FULL_SET, d, sat.space)
        disjoint = all(find_witness(intersect(a, b), d, sat.space) is None
                       for i, a in enumerate(atoms) for b in atoms[i + 1:])
        partition.append(covers and disjoint)

        group = sat.subgroups[p - 1]
        invariant.append(all(
            any(equal_on_window(epsilon_image(g, a, sat.space), b, d, sat.space) for b in atoms)
            for a in atoms for g in group
        ))
        if p > 1:
            increasing.append(all(
                equal_on_window(union(*[b for b in atoms
                                        if equal_on_window(intersect(b, a), b, d, sat.space)]), a, d, sat.space)
                for a in sat.stages[p - 2]
            ))
    return {
        "atoms_per_stage": [len(a) for a in sat.stages],
        "partition": partition,
        "invariant": invariant,
        "increasing": increasing,
        "empty_cells": list(sat.empty_cells),
        "passed": all(partition) and all(invariant) and all(increasing),
    }


@dataclass(frozen=True, eq=False)
class FinDimAlgebra:
    stage: int
    basis: List[Tuple[ClopenExpr, DyadicElem]]
    dimension: int
    span_dimension: int
    free: bool


def findim_algebra(sat: BooleanSaturation, p: int, mode: str = EXACT) -> FinDimAlgebra:
    """
    단계 p 의 span{P_a u_g} 와 그 차원

    원자를 창의 대각 사영으로, g 를 u_g 로 보내 생성 공간의 차원을 따로 계산해
    원자 수 × |Γ_p| 와 맞춰 본다.
    """
    if not 1 <= p <= len(sat.stages):
        raise ValueError(f"포화 단계 {p} 가 없습니다 (1..{len(sat.stages)}).")
    atoms = sat.stages[p - 1]
    group = sat.subgroups[p - 1]
    win = OrbitWindow(max([sat.window_depth] + [g.support.max() for g in group]))
    points = window_points(win.n)
    basis = [(a, g) for a in atoms for g in group]

    vectors = []
    for a, g in basis:
        indicator = np.array([Fraction(member(k, a, sat.space)) for k in points], dtype=object)
        projection = DiagonalElem(win, indicator, np.full(win.size, Fraction(0), dtype=object), EXACT).to_matrix()
        vectors.append(conv(projection, u_of(win, g, EXACT)).real)
    span_dimension = span_rank(vectors, mode)
    free = span_dimension == len(basis)
    dimension = len(basis) if free else span_dimension
    if not free:
        logger.warning(f"단계 {p}: 작용이 자유롭지 않음 (span {span_dimension} < {len(basis)})")
    return FinDimAlgebra(stage=p, basis=basis, dimension=dimension, span_dimension=span_dimension, free=free)


OPEN_QUESTIONS = [
    "대각 부분대수의 정규화 부분대수가 전체 대수와 같은가",
    "AFD 이면 강하게 초유한(strongly hyperfinite)인가",
]


def afd_audit(max_n: int, mode: str = EXACT, seed: int = 0) -> Dict[str, object]:
    """
    유한 깊이 AFD 사슬 점검

    (1) 단계 n 이 단계 n+1 에 단위적으로 삽입되는지, (2) 각 단계가 전행렬 대수를
    생성하는지 (exact_span_max_n 이하만 차원 계산, 나머지는 관계식만),
    (3) 창마다 절단 근사의 잔차 D((z−z_k)(z−z_k)*) 가 점마다 줄어들어 0 이
    되는지. Type III, 인자성, 단조 완비성은 판정하지 않는다.
    """
    if not 1 <= max_n <= TOWER_CONFIG["max_n"]:
        raise StageBoundError(f"max_n 은 1 이상 {TOWER_CONFIG['max_n']} 이하여야 합니다: {max_n}")

    stages = [stage(n, mode) for n in range(1, max_n + 1)]

    inclusions = []
    for small, big in zip(stages, stages[1:]):
        ok = np.array_equal(embed(small.identity), big.identity)
        ok = ok and all(np.array_equal(embed(a), b) for a, b in zip(small.e, big.e))
        ok = ok and all(np.array_equal(embed(a), b) for a, b in zip(small.u, big.u))
        inclusions.append({"from": small.n, "to": big.n, "passed": bool(ok)})

    generation = []
    for s in stages:
        relations = relations_check(s)
        independence = independence_check(s)
        entry = {"n": s.n, "relations": relations["passed"], "independence": independence["passed"]}
        if s.n <= TOWER_CONFIG["exact_span_max_n"]:
            entry["dimension"] = full_matrix_check(s)
            entry["method"] = "span"
        else:
            entry["dimension"] = None
            entry["method"] = "relation-only"
        generation.append(entry)

    rng = np.random.default_rng(seed)
    tol = 0 if mode == EXACT else GROUPOID_CONFIG["tol"]
    approximation = []
    for n in range(1, min(max_n, GROUPOID_CONFIG["n"]) + 1):
        win = OrbitWindow(n)
        z = random_kernel(win, rng, mode)
        residuals = [r.real for r in truncation_approx(z, [window_group(k) for k in range(n + 1)])]
        approximation.append({
            "window": n,
            "pointwise_non_increasing": bool(all(np.all(b <= a + tol) for a, b in zip(residuals, residuals[1:]))),
            "final_zero": bool(np.all(np.abs(residuals[-1]) <= tol)),
        })

    passed = (all(i["passed"] for i in inclusions)
              and all(g["relations"] and g["independence"] for g in generation)
              and all(g["dimension"] in (None, 4 ** g["n"]) for g in generation)
              and all(a["pointwise_non_increasing"] and a["final_zero"] for a in approximation))
    return {
        "max_n": max_n,
        "inclusions": inclusions,
        "generation": generation,
        "approximation": approximation,
        "passed": passed,
        "certifies_type_iii": False,
        "certifies_factor": False,
        "certifies_monotone_complete": False,
        "open_questions": list(OPEN_QUESTIONS),
    }


def dense(m: np.ndarray) -> List[List[int]]:
    """행 우선 조밀 0/1 배열"""
    return [[int(x) for x in row] for row in m]


def stage_matrices(s: TowerStage) -> Dict[str, List]:
    out = {}
    for j in range(s.n):
        out[f"e{j + 1}"] = dense(s.e[j])
        out[f"u{j + 1}"] = dense(s.u[j])
    return out
