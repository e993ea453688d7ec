"""
모듈별 검증 스위트

각 스위트는 점검 기록(record) 목록을 돌려준다. 점검 중 예외가 나면 실패 기록으로
바꾸고 다음 점검으로 넘어간다.
"""
import logging
import zlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional

import numpy as np

from clopen_algebra import (
    E, FULL_SET, INVARIANT_NONTRIVIAL, basis, complement, epsilon_image, equal_on_window, find_witness, intersect,
    invariant_clopen_audit, member, random_expr, sigma_image, split, to_sexpr
)
from config import CLOPEN_CONFIG, COMBINATORICS_CONFIG, GROUPOID_CONFIG, REPARAM_CONFIG, SPACE_CONFIG, TOWER_CONFIG
from core_combinatorics import (
    EMPTY, ZERO, DyadicElem, FinSet, dyadic_act, enum_finset, finset_index, generator, span_group, window_group,
    window_points
)
from feasible_space import (
    FeasibleSpace, PointQuery, admissibility_audit, descriptor_audit, eval_point, feasibility_audit, gamma_project,
    in_O, n_window, random_tpoint
)
from fermion_tower import (
    afd_audit, findim_algebra, full_matrix_check, independence_check, relations_check, saturate_boolean,
    saturation_audit, stage
)
from groupoid_window import (
    EXACT, KernelMatrix, OrbitWindow, adjoint, conjugation, conv, diag, identity_suite, is_diagonal,
    masa_check, normalizer_decompose, random_kernel, random_normalizer, truncation_approx, u_of, unit,
    vanishing_test
)
from reparametrization import (
    InvolutionTower, apply_piecewise, build_swap, build_tower, build_zaction, compose, decomposition_audit,
    dyadic_action, node_address, odometer, odometer_inverse, odometer_reference, swap_audit, zaction_backward,
    zaction_forward
)

logger = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
OPEN_EVIDENCE = "open-evidence"


@dataclass(frozen=True)
class SuiteContext:
    """스위트 실행 파라미터"""
    depth: int
    n: int
    max_n: int
    mode: str
    space: FeasibleSpace
    seed: int


def suite_rng(seed: int, name: str) -> np.random.Generator:
    """시드와 스위트 이름으로 정해지는 독립 난수 스트림"""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode("utf-8")),)))


def check_record(name: str, anchor: str, status: str, evidence_depth: int, counterexample=None,
                 evidence: Optional[Dict] = None) -> Dict:
    return {
        "name": name,
        "anchor": anchor,
        "status": status,
        "evidence_depth": evidence_depth,
        "counterexample": counterexample,
        "evidence": dict(evidence) if evidence else None,
    }


def run_check(name: str, anchor: str, evidence_depth: int, fn: Callable[[], Optional[object]],
              open_evidence: bool = False, evidence: Optional[Dict] = None) -> Dict:
    """
    fn() 이 None 이면 통과, 아니면 그 값을 반례로 기록

    open_evidence 는 유한 깊이에서만 확인 가능한 주장에 쓴다. evidence 는 fn 이
    채워 넣는 dict 로, 계산한 값을 기록에 남길 때 쓴다.
    """
    try:
        counterexample = fn()
    except Exception as e:
        logger.error(f"❌ {name}: {type(e).__name__}: {e}")
        return check_record(name, anchor, FAIL, evidence_depth, f"{type(e).__name__}: {e}", evidence)
    if counterexample is None:
        return check_record(name, anchor, OPEN_EVIDENCE if open_evidence else PASS, evidence_depth,
                            evidence=evidence)
    logger.error(f"❌ {name}: 반례 {counterexample}")
    return check_record(name, anchor, FAIL, evidence_depth, counterexample, evidence)


def _first(items):
    return next(iter(items), None)


# ---------------------------------------------------------------- 조합론

def combinatorics_suite(ctx: SuiteContext) -> List[Dict]:
    bound = COMBINATORICS_CONFIG["sweep_bound"]
    points = window_points(bound)

    def involution():
        return _first(f"σ_{n}({k!r})" for k in points for n in range(1, bound + 1)
                      if dyadic_act(generator(n), dyadic_act(generator(n), k)) != k)

    def commutation():
        return _first(f"σ_{n}σ_{m}({k!r})" for k in points for n in range(1, bound + 1) for m in range(1, bound + 1)
                      if dyadic_act(generator(n), dyadic_act(generator(m), k))
                      != dyadic_act(generator(m), dyadic_act(generator(n), k)))

    def orbit():
        found = {dyadic_act(g, EMPTY) for g in window_group(bound)}
        return None if found == set(points) else f"궤도 크기 {len(found)}"

    def freeness():
        return _first(f"{g!r} 가 {k!r} 를 고정" for g in window_group(bound) if not g.is_zero()
                      for k in points if dyadic_act(g, k) == k)

    def roundtrip():
        limit = COMBINATORICS_CONFIG["enum_roundtrip_bound"]
        return _first(i for i in range(limit) if finset_index(enum_finset(i)) != i)

    def subgroup():
        group = span_group([generator(1), generator(2)])
        return None if len(group) == 4 and all(a + b in group for a in group for b in group) else repr(group)

    return [
        run_check("dyadic-involution", "Lemma 11.1(i)", bound, involution),
        run_check("dyadic-commutation", "Lemma 11.1(ii)", bound, commutation),
        run_check("orbit-of-empty", "Lemma 11.2(i)", bound, orbit),
        run_check("action-freeness", "Lemma 11.2(ii)", bound, freeness),
        run_check("enum-roundtrip", "Lemma 7.9 (enumeration of D)", bound, roundtrip),
        run_check("span-group", "Lemma 9.7 (subgroup chain)", 2, subgroup),
    ]


# ---------------------------------------------------------------- feasible space

def feasible_space_suite(ctx: SuiteContext) -> List[Dict]:
    rng = suite_rng(ctx.seed, "feasible-space")
    space = ctx.space
    bound = SPACE_CONFIG["search_bound"]

    def feasibility():
        for _ in range(SPACE_CONFIG["feasibility_samples"]):
            M = list(dict.fromkeys(random_tpoint(rng) for _ in range(int(rng.integers(0, 5)))))
            t = random_tpoint(rng)
            while t in M:
                t = random_tpoint(rng)
            m = int(rng.integers(0, 20))
            n = feasibility_audit(space, M, t, m, bound)
            if n <= m or not in_O(space, n, t) or any(in_O(space, n, s) for s in M):
                return f"M={[str(s) for s in M]}, t={t}, m={m}, n={n}"
        return None

    def admissibility():
        for n in range(1, SPACE_CONFIG["admissibility_max_n"] + 1):
            t = admissibility_audit(space, n, bound)
            if not in_O(space, n, t) or space.r_membership(t):
                return f"n={n}, t={t}"
        return None

    def descriptors():
        failures = descriptor_audit(space, range(1, SPACE_CONFIG["descriptor_samples"] + 1))
        return failures[:5] or None

    def subset_law():
        points = window_points(COMBINATORICS_CONFIG["sweep_bound"])
        return _first(f"k={k!r}, l={l!r}" for k in points for l in points
                      if eval_point(space, PointQuery(k, l)) != int(l.issubset(k)))

    def injective():
        # k ≠ m 이면 (k, ∅) 또는 (m, ∅) 질의에서 f_k 와 f_m 이 갈린다
        points = window_points(COMBINATORICS_CONFIG["sweep_bound"])
        for i, k in enumerate(points):
            for m in points[i + 1:]:
                if all(eval_point(space, PointQuery(k, l)) == eval_point(space, PointQuery(m, l)) for l in (k, m)):
                    return f"f_{k!r} = f_{m!r}"
        return None

    def gamma():
        bound = COMBINATORICS_CONFIG["sweep_bound"]
        for k in window_points(bound):
            word = gamma_project(k, bound)
            for n in range(1, bound + 1):
                bit = int(word[n - 1])
                if bit != int(n in k) or bit != eval_point(space, PointQuery(k, FinSet.of(n))):
                    return f"Γ(f_{k!r}) = {word}, n={n}"
        return None

    return [
        run_check("feasibility", "§11 feasibility (ii)", bound, feasibility),
        run_check("admissibility", "§11 admissibility (ii)", SPACE_CONFIG["admissibility_max_n"], admissibility),
        run_check("descriptor-distinct", "§11 feasibility (O_m ≠ O_n)", SPACE_CONFIG["descriptor_samples"], descriptors),
        run_check("eval-subset", "Lemma 11.3", COMBINATORICS_CONFIG["sweep_bound"], subset_law),
        run_check("point-injective", "Lemma 11.3", COMBINATORICS_CONFIG["sweep_bound"], injective),
        run_check("gamma-projection", "Lemma 11.8", COMBINATORICS_CONFIG["sweep_bound"], gamma),
    ]


# ---------------------------------------------------------------- 클로픈 대수

def _basis_pool(space: FeasibleSpace, rng: np.random.Generator, size: int = 8):
    pool = [admissibility_audit(space, n) for n in range(1, 9)]
    while len(pool) < size + 8:
        t = random_tpoint(rng)
        if not space.r_membership(t):
            pool.append(t)
    return pool


def clopen_suite(ctx: SuiteContext) -> List[Dict]:
    rng = suite_rng(ctx.seed, "clopen-images")
    space = ctx.space
    depth = ctx.depth
    pool = _basis_pool(space, rng)
    index_bound = depth + 4
    guarded = {"count": 0}

    def pointwise_sigma():
        for _ in range(CLOPEN_CONFIG["image_samples"]):
            k = FinSet(int(rng.integers(0, 1 << index_bound)))
            l = FinSet(int(rng.integers(0, 1 << index_bound)))
            chosen = [pool[int(i)] for i in rng.choice(len(pool), size=int(rng.integers(0, 3)), replace=False)]
            if chosen and rng.random() < 0.5:
                window = n_window(space, chosen[0], index_bound).difference(l)
                n = int(rng.choice(window.elements)) if window else int(rng.integers(1, index_bound + 1))
            else:
                n = int(rng.integers(1, index_bound + 1))
            if n not in l and any(in_O(space, n, t) for t in chosen):
                guarded["count"] += 1
            e = basis(l, chosen)
            if member(k, sigma_image(n, e, space), space) != member(dyadic_act(generator(n), k), e, space):
                return f"k={k!r}, n={n}, l={l!r}, L={[str(t) for t in chosen]}"
        return None

    def guarded_branch():
        minimum = CLOPEN_CONFIG["guarded_min"]
        return None if guarded["count"] >= minimum else f"분기 (c) 표본 {guarded['count']} < {minimum}"

    def pointwise_epsilon():
        for _ in range(50):
            e = random_expr(rng, depth, pool[:4], height=2)
            g = DyadicElem(FinSet(int(rng.integers(0, 1 << depth))))
            image = epsilon_image(g, e, space)
            for k in window_points(depth):
                if member(k, image, space) != member(dyadic_act(g, k), e, space):
                    return f"g={g!r}, k={k!r}, e={to_sexpr(e)}"
        return None

    def sigma_involution():
        for _ in range(50):
            e = random_expr(rng, depth, pool[:4], height=2)
            n = int(rng.integers(1, depth + 1))
            if not equal_on_window(sigma_image(n, sigma_image(n, e, space), space), e, depth, space):
                return f"σ_{n}σ_{n}[e] ≠ e, e={to_sexpr(e)}"
        return None

    def epsilon_action():
        for _ in range(50):
            e = random_expr(rng, depth, pool[:4], height=2)
            g = DyadicElem(FinSet(int(rng.integers(0, 1 << depth))))
            h = DyadicElem(FinSet(int(rng.integers(0, 1 << depth))))
            if not equal_on_window(epsilon_image(ZERO, e, space), e, depth, space):
                return f"ε_0[e] ≠ e, e={to_sexpr(e)}"
            if not equal_on_window(epsilon_image(g, epsilon_image(h, e, space), space),
                                   epsilon_image(g + h, e, space), depth, space):
                return f"ε_g ε_h ≠ ε_(g+h), g={g!r}, h={h!r}, e={to_sexpr(e)}"
        return None

    def split_examples():
        cases = [
            (FULL_SET, EMPTY, EMPTY, FinSet.of(1)),
            (E(1), FinSet.of(1), FinSet.of(1), FinSet.of(1, 2)),
            (complement(E(1)), FinSet.of(2), FinSet.of(1), EMPTY),
        ]
        for e, anchor, used, outside in cases:
            part = split(e, anchor, used, depth, space)
            if not member(anchor, part, space) or member(outside, part, space):
                return f"split({to_sexpr(e)}, {anchor!r}, {used!r}) = {to_sexpr(part)}"
            if find_witness(intersect(e, complement(part)), depth, space) is None:
                return f"split({to_sexpr(e)}, {anchor!r}) 가 진부분집합이 아님"
        return None

    def ergodicity():
        gens = [generator(j) for j in range(1, depth + 1)]
        for _ in range(CLOPEN_CONFIG["ergodicity_samples"]):
            e = random_expr(rng, depth, pool[:2])
            if invariant_clopen_audit(gens, e, depth, space) == INVARIANT_NONTRIVIAL:
                return to_sexpr(e)
        return None

    return [
        run_check("sigma-image-pointwise", "Lemma 11.5", index_bound, pointwise_sigma),
        run_check("sigma-image-guarded", "Lemma 11.5", index_bound, guarded_branch),
        run_check("sigma-involution", "Lemma 11.1(i)", depth, sigma_involution),
        run_check("epsilon-image-pointwise", "Lemma 11.4", depth, pointwise_epsilon),
        run_check("epsilon-action", "§11 g ↦ ε_g homomorphism", depth, epsilon_action),
        run_check("split", "Lemma 7.7", depth, split_examples),
        run_check("ergodicity", "Lemma 5.2", depth, ergodicity,
                  open_evidence=True),
    ]


# ---------------------------------------------------------------- 재매개화

@lru_cache(maxsize=None)
def shared_tower(n: int) -> InvolutionTower:
    """같은 높이의 타워를 스위트끼리 함께 쓴다"""
    return build_tower(n)


def tower_height(ctx: SuiteContext) -> int:
    return max(1, min(ctx.n, REPARAM_CONFIG["tower_n"]))


def odometer_suite(ctx: SuiteContext) -> List[Dict]:
    depth = min(ctx.depth, 6)
    limit = 1 << depth

    def increments():
        odo = odometer()
        return _first(i for i in range(limit) if apply_piecewise(odo, enum_finset(i)) != enum_finset(i + 1))

    def inverse():
        both = compose(odometer_inverse(), odometer())
        return _first(i for i in range(32) if apply_piecewise(both, enum_finset(i)) != enum_finset(i))

    def decomposition():
        failures = decomposition_audit(odometer(), depth, expected=odometer_reference)
        return failures[:5] or None

    return [
        run_check("odometer-increment", "§7 strongly G-decomposable", depth, increments),
        run_check("odometer-inverse", "Lemma 7.8", 5, inverse),
        run_check("odometer-decomposition", "§7 strongly G-decomposable", depth, decomposition),
    ]


def swap_suite(ctx: SuiteContext) -> List[Dict]:
    depth = min(ctx.depth, 5)
    points = window_points(depth)

    def basic():
        h = build_swap(E(1), complement(E(1)), FinSet.of(1), EMPTY, 8)
        if apply_piecewise(h, FinSet.of(1)) != EMPTY:
            return f"h({{1}}) = {apply_piecewise(h, FinSet.of(1))!r}"
        bad = _first(k for k in points if apply_piecewise(h, apply_piecewise(h, k)) != k)
        if bad is not None:
            return f"h(h({bad!r})) ≠ {bad!r}"
        return _first(f"{k!r} 가 E1 과 E1ᶜ 를 오가지 않음" for k in points
                      if member(k, E(1)) == member(apply_piecewise(h, k), E(1)))

    def off_support():
        A = intersect(E(1), E(2))
        B = intersect(complement(E(1)), E(2))
        h = build_swap(A, B, FinSet.of(1, 2), FinSet.of(2), 8)
        if apply_piecewise(h, FinSet.of(1, 2)) != FinSet.of(2):
            return "h({1,2}) ≠ {2}"
        return _first(f"h({k!r}) = {apply_piecewise(h, k)!r}" for k in points
                      if not member(k, E(2)) and apply_piecewise(h, k) != k)

    def decomposition():
        A, B = E(1), complement(E(1))
        h = build_swap(A, B, FinSet.of(1), EMPTY, 8)
        failures = decomposition_audit(h, depth) + swap_audit(h, A, B, FinSet.of(1), EMPTY, depth)
        return failures[:5] or None

    return [
        run_check("swap-interchange", "Lemma 7.7", depth, basic),
        run_check("swap-identity-off", "Lemma 7.7", depth, off_support),
        run_check("swap-decomposition", "Lemma 7.7", depth, decomposition),
    ]


def tower_suite(ctx: SuiteContext) -> List[Dict]:
    n = tower_height(ctx)
    points = window_points(n)

    def build():
        shared_tower(n)
        return None

    def involutions():
        t = shared_tower(n)
        for i, hi in enumerate(t.h):
            for k in points:
                if apply_piecewise(hi, apply_piecewise(hi, k)) != k:
                    return f"h{i + 1}² ≠ 1 at {k!r}"
                for j, hj in enumerate(t.h[:i]):
                    if apply_piecewise(hi, apply_piecewise(hj, k)) != apply_piecewise(hj, apply_piecewise(hi, k)):
                        return f"[h{i + 1}, h{j + 1}] ≠ 0 at {k!r}"
        return None

    def partitions():
        t = shared_tower(n)
        for p in range(1, n + 1):
            words = [w for w in t.tree if len(w) == p]
            for k in points:
                hits = [w for w in words if member(k, t.tree[w])]
                if len(hits) != 1:
                    return f"레벨 {p}, {k!r} 가 노드 {hits} 에 속함"
                if "".join(map(str, node_address(t, p, k))) != hits[0]:
                    return f"레벨 {p}, {k!r} 의 주소와 트리 식이 다름"
                parent = hits[0][:-1]
                if not member(k, t.tree[parent]):
                    return f"{k!r} 가 {hits[0]} 에는 있고 부모 {parent!r} 에는 없음"
        return None

    def base_nodes():
        t = shared_tower(n)
        for p in range(1, n + 1):
            zero = "0" * p
            if not member(EMPTY, t.tree[zero]):
                return f"s₀ ∉ K^{p}(0..0)"
            bad = _first(k for k in points if member(k, t.tree[zero]) and not member(k, t.nbhd[p - 1]))
            if bad is not None:
                return f"K^{p}(0..0) ⊄ D_{p}: {bad!r}"
        return None

    def transport():
        t = shared_tower(n)
        for p in range(1, min(n, 4) + 1):
            for alpha in range(1 << p):
                g = DyadicElem(FinSet(alpha))
                for k in points:
                    beta = node_address(t, p, k)
                    moved = node_address(t, p, dyadic_action(t, g, k))
                    expected = tuple(b ^ (alpha >> i & 1) for i, b in enumerate(beta))
                    if moved != expected:
                        return f"p={p}, g={g!r}, k={k!r}: {moved} ≠ {expected}"
        return None

    def coverage():
        t = shared_tower(n)
        orbit = {dyadic_action(t, g, EMPTY) for g in window_group(n)}
        missing = [repr(enum_finset(j)) for j in range(n + 1) if enum_finset(j) not in orbit]
        if len(orbit) != 1 << n:
            return f"궤도 크기 {len(orbit)} ≠ {1 << n}"
        return missing or None

    def freeness():
        t = shared_tower(n)
        return _first(f"{g!r} 가 {k!r} 를 고정" for g in window_group(n) if not g.is_zero()
                      for k in points[:16] if dyadic_action(t, g, k) == k)

    return [
        run_check("tower-build", "Lemma 7.9", n, build),
        run_check("tower-involutions", "Lemma 7.9(a)", n, involutions),
        run_check("tower-partitions", "Lemma 7.9(b),(c)", n, partitions),
        run_check("tower-base-nodes", "Lemma 7.9(d)", n, base_nodes),
        run_check("tower-transport", "Lemma 7.9(e)", min(n, 4), transport),
        run_check("tower-coverage", "Lemma 7.9(f)", n, coverage),
        run_check("tower-freeness", "Lemma 7.9(g)", n, freeness),
    ]


def zaction_suite(ctx: SuiteContext) -> List[Dict]:
    n = max(REPARAM_CONFIG["zaction_min_n"], tower_height(ctx))
    points = window_points(n)

    def inverse_at_base():
        z = build_zaction(shared_tower(n))
        image = zaction_forward(z, EMPTY)
        if not member(image, z.backward[0][0]):
            return f"φ(s₀) = {image!r} ∉ F₁"
        back = zaction_backward(z, image)
        return None if back == EMPTY else f"φ⁻¹(φ(s₀)) = {back!r}"

    def injective():
        z = build_zaction(shared_tower(n))
        t = z.tower
        covered = [k for k in points if 0 in node_address(t, n, k)]
        images = [zaction_forward(z, k) for k in covered]
        if len(set(images)) != len(images):
            return "φ 가 창에서 단사가 아님"
        return _first(f"φ⁻¹(φ({k!r})) ≠ {k!r}" for k, y in zip(covered, images) if zaction_backward(z, y) != k)

    def odometer_orbit():
        z = build_zaction(shared_tower(n))
        t = z.tower
        k = EMPTY
        for j in range(1 << n):
            expected = dyadic_action(t, DyadicElem(enum_finset(j)), EMPTY)
            if k != expected:
                return f"φ^{j}(s₀) = {k!r} ≠ {expected!r}"
            if j + 1 < 1 << n:
                k = zaction_forward(z, k)
        return None

    return [
        run_check("zaction-base", "Corollary 7.11", n, inverse_at_base),
        run_check("zaction-injective", "Corollary 7.11", n, injective),
        run_check("zaction-odometer-orbit", "Theorem 7.10(1), Corollary 7.11", n, odometer_orbit),
    ]


# ---------------------------------------------------------------- 군양체 창

def groupoid_suite(ctx: SuiteContext) -> List[Dict]:
    rng = suite_rng(ctx.seed, "groupoid")
    n = max(1, min(ctx.n, GROUPOID_CONFIG["n"]))
    w = OrbitWindow(n)
    mode = ctx.mode
    samples = GROUPOID_CONFIG["samples"]
    kernels = [random_kernel(w, rng, mode) for _ in range(samples)]

    def ring_laws():
        one = unit(w, mode)
        for i, f in enumerate(kernels):
            g, h = kernels[(i + 1) % samples], kernels[(i + 2) % samples]
            if not (conv(one, f).equals(f) and conv(f, one).equals(f)):
                return f"단위 법칙 (표본 {i})"
            if not conv(conv(f, g), h).equals(conv(f, conv(g, h))):
                return f"결합 법칙 (표본 {i})"
            if not adjoint(conv(f, g)).equals(conv(adjoint(g), adjoint(f))):
                return f"수반 법칙 (표본 {i})"
            if not adjoint(adjoint(f)).equals(f):
                return f"수반 대합 (표본 {i})"
        return None

    def positivity():
        for i, src in enumerate(kernels):
            f = KernelMatrix(w, src.real.copy(), src.imag.copy(), mode)
            f.real[i % w.size, :] = 0
            f.imag[i % w.size, :] = 0
            d = diag(conv(f, adjoint(f)))
            if np.any(d.real < 0) if mode == EXACT else np.any(d.real < -GROUPOID_CONFIG["tol"]):
                return f"음의 대각 (표본 {i})"
            zero_rows = [x for x in range(w.size) if not (np.any(f.real[x] != 0) or np.any(f.imag[x] != 0))]
            zero_diag = [x for x in range(w.size) if d.real[x] == 0] if mode == EXACT else \
                [x for x in range(w.size) if abs(d.real[x]) <= GROUPOID_CONFIG["tol"]]
            if zero_rows != zero_diag:
                return f"D(ff*)(x)=0 과 행 x 가 0 인 것이 다름 (표본 {i})"
        return None

    def identities():
        report = identity_suite(w, samples, rng, mode)
        return report["failures"][:5] or None

    def truncation():
        tol = 0 if mode == EXACT else GROUPOID_CONFIG["tol"]
        chain = [window_group(k) for k in range(n + 1)]
        for i, z in enumerate(kernels[:10]):
            residuals = [r.real for r in truncation_approx(z, chain)]
            for a, b in zip(residuals, residuals[1:]):
                if np.any(b > a + tol):
                    return f"잔차가 증가 (표본 {i})"
            if np.any(abs(residuals[-1]) > tol):
                return f"마지막 잔차가 0 이 아님 (표본 {i})"

        u1 = u_of(OrbitWindow(1), generator(1), mode)
        first = [r.real[0] for r in truncation_approx(u1, [[], [DyadicElem()], window_group(1)])]
        return None if first == [1, 1, 0] else f"u_g1 의 잔차 {[str(x) for x in first]}"

    def vanishing():
        for i, z in enumerate(kernels[:10]):
            if not z.is_zero() and vanishing_test(z) != 0:
                return f"0 이 아닌 z 가 소멸로 판정됨 (표본 {i})"
        return None if vanishing_test(KernelMatrix.zeros(w, mode)) == 1 else "0 행렬이 소멸로 판정되지 않음"

    def relabeling():
        for i, f in enumerate(kernels[:10]):
            for g in w.group:
                c = conjugation(g, f)
                perm = [x ^ g.support.mask for x in range(w.size)]
                if not KernelMatrix(w, f.real[np.ix_(perm, perm)], f.imag[np.ix_(perm, perm)], mode).equals(c):
                    return f"u_g* f u_g ≠ f(gx, gy) (표본 {i}, g={g!r})"
                d = diag(f).to_matrix()
                if not is_diagonal(conjugation(g, d)) or is_diagonal(c) != is_diagonal(f):
                    return f"대각성 보존 실패 (표본 {i}, g={g!r})"
        return None

    def masa():
        report = masa_check(w, EXACT)
        if report["commutant_dimension"] != w.size or not report["fixed_point_free"]:
            return report
        return None

    return [
        run_check("ring-laws", "§8 convolution", n, ring_laws),
        run_check("positivity", "Lemma 8.7", n, positivity),
        run_check("identities-i-iv", "§8 identities (i)-(iv)", n, identities),
        run_check("truncation-monotone", "Prop 8.15", n, truncation),
        run_check("vanishing", "Corollary 8.16", n, vanishing),
        run_check("conjugation-relabeling", "Lemma 8.17", n, relabeling),
        run_check("masa", "Prop 8.20", n, masa, open_evidence=True),
    ]


def normalizer_suite(ctx: SuiteContext) -> List[Dict]:
    rng = suite_rng(ctx.seed, "normalizer")
    w = OrbitWindow(GROUPOID_CONFIG["normalizer_n"])
    tol = GROUPOID_CONFIG["tol"]

    def decompose():
        for i in range(GROUPOID_CONFIG["normalizer_samples"]):
            u = random_normalizer(w, rng)
            dec = normalizer_decompose(u, w, tol)
            if dec.residual > tol:
                return f"잔차 {dec.residual:.3e} > {tol} (표본 {i})"
            ps = list(dec.p.values())
            if any(np.any(a * b) for x, a in enumerate(ps) for b in ps[x + 1:]):
                return f"p_g 가 직교하지 않음 (표본 {i})"
            if not np.all(sum(ps) == 1) or not np.all(sum(dec.q.values()) == 1):
                return f"Σp_g 또는 Σq_g ≠ 1 (표본 {i})"
        return None

    def example():
        m = KernelMatrix.from_complex(OrbitWindow(1), np.array([[0, 1j], [1, 0]]))
        dec = normalizer_decompose(m)
        expected = np.array([1j, 1])
        got = dec.d.real + 1j * dec.d.imag
        return None if np.allclose(got, expected, atol=tol) else f"d = {got.tolist()}"

    return [
        run_check("normalizer-decomposition", "Theorem 10.1", w.n, decompose),
        run_check("normalizer-example", "Theorem 10.1", 1, example),
    ]


# ---------------------------------------------------------------- 페르미온 타워

def fermion_suite(ctx: SuiteContext) -> List[Dict]:
    max_n = max(1, min(ctx.max_n, TOWER_CONFIG["max_n"]))

    def relations():
        for n in range(1, max_n + 1):
            report = relations_check(stage(n, ctx.mode))
            if not report["passed"]:
                return [r["instance"] for r in report["instances"] if not r["passed"]][:5]
        return None

    def independence():
        for n in range(1, max_n + 1):
            report = independence_check(stage(n, ctx.mode))
            bad = [r["alpha"] for r in report["products"] if r["rank"] != 1 or not r["proper"]]
            if bad:
                return f"n={n}: {bad[:5]}"
        return None

    found = {}

    def dimensions():
        top = min(max_n, TOWER_CONFIG["exact_span_max_n"])
        dims = [full_matrix_check(stage(n, ctx.mode)) for n in range(1, top + 1)]
        found["dimensions"] = dims
        return None if dims == [4 ** n for n in range(1, top + 1)] else dims

    def afd():
        report = afd_audit(max_n, ctx.mode, ctx.seed)
        return None if report["passed"] else {k: report[k] for k in ("inclusions", "generation", "approximation")}

    return [
        run_check("tower-relations", "§11 e_n/u_n relations", max_n, relations),
        run_check("tower-independence", "Lemma 11.9", max_n, independence),
        run_check("tower-full-matrix", "Lemma 11.9", min(max_n, TOWER_CONFIG["exact_span_max_n"]),
                  dimensions, evidence=found),
        run_check("afd-chain", "Prop 12.5", max_n, afd, open_evidence=True),
    ]


def saturation_suite(ctx: SuiteContext) -> List[Dict]:
    depth = TOWER_CONFIG["saturation_depth"]
    gens = [E(1), E(2), E(3)]
    chain = [span_group([generator(j) for j in range(1, p + 1)]) for p in range(1, 4)]
    cache, found = {}, {}

    def saturation():
        cache["sat"] = saturate_boolean(gens, chain, depth, ctx.space)
        report = saturation_audit(cache["sat"])
        return None if report["passed"] else report

    def findim():
        sat = cache.get("sat") or saturate_boolean(gens, chain, depth, ctx.space)
        algebras = [findim_algebra(sat, p, EXACT) for p in range(1, 4)]
        dims = [a.dimension for a in algebras]
        spans = [a.span_dimension for a in algebras]
        found["dimensions"] = dims
        return None if dims == [4, 16, 64] and spans == dims else {"dimension": dims, "span": spans}

    return [
        run_check("boolean-saturation", "Lemma 9.7", depth, saturation),
        run_check("findim-stages", "Prop 9.8", depth, findim, evidence=found),
    ]


SUITE_ANCHORS: Dict[str, str] = {
    "combinatorics": "Lemmas 11.1-11.2",
    "feasible-space": "§11 feasible spaces, Lemmas 11.3, 11.8",
    "clopen-images": "Lemmas 11.4-11.5",
    "reparam-odometer": "§7 strongly G-decomposable, Lemma 7.8",
    "reparam-swap": "Lemma 7.7",
    "reparam-tower": "Lemma 7.9",
    "reparam-zaction": "Theorem 7.10, Corollary 7.11",
    "groupoid": "§8, Prop 8.15, Prop 8.20",
    "normalizer": "Theorem 10.1",
    "fermion-tower": "Lemma 11.9, Prop 12.5",
    "saturation": "Lemma 9.7, Prop 9.8",
}

SUITES: Dict[str, Callable[[SuiteContext], List[Dict]]] = {
    "combinatorics": combinatorics_suite,
    "feasible-space": feasible_space_suite,
    "clopen-images": clopen_suite,
    "reparam-odometer": odometer_suite,
    "reparam-swap": swap_suite,
    "reparam-tower": tower_suite,
    "reparam-zaction": zaction_suite,
    "groupoid": groupoid_suite,
    "normalizer": normalizer_suite,
    "fermion-tower": fermion_suite,
    "saturation": saturation_suite,
}


def run_suite(name: str, ctx: SuiteContext) -> List[Dict]:
    """스위트 하나 실행. 기록마다 suite 이름을 붙인다"""
    logger.info(f"스위트 실행: {name}")
    try:
        records = SUITES[name](ctx)
    except Exception as e:
        logger.error(f"❌ {name} 준비 실패: {type(e).__name__}: {e}")
        records = [check_record(f"{name}-setup", SUITE_ANCHORS[name], FAIL, ctx.depth, f"{type(e).__name__}: {e}")]
    for r in records:
        r["suite"] = name
    failed = sum(r["status"] == FAIL for r in records)
    if failed:
        logger.error(f"❌ {name}: 실패 {failed}건")
    else:
        logger.info(f"✅ {name}: {len(records)}건 통과")
    return records
