"""
stonework 실행 진입점

사용법:
    python stonework.py verify --depth 6
    python stonework.py reparam --depth 3 --out tree.json
    python stonework.py tower --max-n 4 --mode exact --dump

종료 코드: 0 통과, 1 실패 점검 있음, 2 설정 오류
"""
import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed

from clopen_algebra import to_sexpr
from config import CLI_CONFIG, DEFAULT_SEED, GROUPOID_CONFIG, LOG_LEVEL, REPORT_DIR, SPACE_CONFIG, TOWER_CONFIG
from core_combinatorics import EMPTY, DyadicElem, enum_finset, window_points
from feasible_space import SPACES, get_space
from fermion_tower import stage, stage_matrices
from reparametrization import InvolutionTower, apply_piecewise, build_tower, dyadic_action, node_address, piece_table
from suite_report import build_report, print_summary, save_report
from verification_suites import FAIL, SUITE_ANCHORS, SUITES, SuiteContext, check_record, run_suite, tower_height

logger = logging.getLogger(__name__)

MODES = ("exact", "float")

COMMAND_SUITES: Dict[str, List[str]] = {
    "verify": list(SUITES),
    "reparam": ["reparam-odometer", "reparam-swap", "reparam-tower"],
    "zaction": ["reparam-zaction"],
    "groupoid": ["groupoid", "normalizer"],
    "tower": ["fermion-tower", "saturation"],
    "space-audit": ["feasible-space", "clopen-images"],
}


class InvalidConfigError(ValueError):
    """알 수 없는 명령, 범위를 벗어난 깊이 등 잘못된 실행 설정"""


@dataclass(frozen=True)
class RunConfig:
    command: str
    depth: int
    n: int
    max_n: int
    seed: int
    mode: str = "exact"
    space: str = SPACE_CONFIG["default_space"]
    out: Optional[str] = None
    suites: Tuple[str, ...] = ()
    dump: bool = False
    n_jobs: int = 1

    def echo(self) -> Dict:
        """리포트에 남기는 설정 (출력 경로와 병렬도는 결과에 영향이 없어 제외)"""
        return {
            "command": self.command,
            "depth": self.depth,
            "n": self.n,
            "max_n": self.max_n,
            "seed": self.seed,
            "mode": self.mode,
            "space": self.space,
            "suites": list(self.suites),
            "dump": self.dump,
        }


def validate_config(config: RunConfig):
    """
    Raises:
        InvalidConfigError: 설정 값이 허용 범위를 벗어날 때
    """
    if config.command not in COMMAND_SUITES:
        raise InvalidConfigError(f"알 수 없는 명령: {config.command}")
    low, high = CLI_CONFIG["depth_range"]
    if not low <= config.depth <= high:
        raise InvalidConfigError(f"depth 는 {low} 이상 {high} 이하여야 합니다: {config.depth}")
    if not low <= config.n <= high:
        raise InvalidConfigError(f"n 은 {low} 이상 {high} 이하여야 합니다: {config.n}")
    if config.command == "groupoid" and config.n > GROUPOID_CONFIG["n"] + 1:
        raise InvalidConfigError(f"groupoid 창 n 은 {GROUPOID_CONFIG['n'] + 1} 이하여야 합니다: {config.n}")
    if not 1 <= config.max_n <= TOWER_CONFIG["max_n"]:
        raise InvalidConfigError(f"max_n 은 1 이상 {TOWER_CONFIG['max_n']} 이하여야 합니다: {config.max_n}")
    if not 0 <= config.seed < 2 ** 64:
        raise InvalidConfigError(f"seed 는 64비트 부호 없는 정수여야 합니다: {config.seed}")
    if config.mode not in MODES:
        raise InvalidConfigError(f"알 수 없는 스칼라 모드: {config.mode}")
    if config.space not in SPACES:
        raise InvalidConfigError(f"알 수 없는 공간: {config.space} (사용 가능: {', '.join(SPACES)})")
    unknown = [s for s in config.suites if s not in COMMAND_SUITES[config.command]]
    if unknown or not config.suites:
        raise InvalidConfigError(f"{config.command} 에서 실행할 수 없는 스위트: {unknown or '(없음)'}")


def tree_manifest(t: InvolutionTower) -> Dict:
    """
    이웃 수열, 트리 노드, h 별 조각 표, s₀ 궤도 표

    조각 표는 창의 모든 점을 열거 순서로 평가한 뒤에 만든다.
    """
    points = window_points(t.window)
    orbit = []
    for j in range(1 << t.n):
        g = DyadicElem(enum_finset(j))
        point = dyadic_action(t, g, EMPTY)
        orbit.append({
            "g": g.support.to_list(),
            "point": point.to_list(),
            "address": "".join(map(str, node_address(t, t.n, point))),
        })
    for h in t.h:
        for k in points:
            apply_piecewise(h, k)

    return {
        "schema": CLI_CONFIG["tree_schema"],
        "n": t.n,
        "window": t.window,
        "search_depth": t.depth,
        "neighborhoods": [to_sexpr(d) for d in t.nbhd[:t.n]],
        "nodes": {word: to_sexpr(e) for word, e in t.tree.items()},
        "leaves": sum(len(word) == t.n for word in t.tree),
        "pieces": {h.name: piece_table(h) for h in t.h},
        "orbit": orbit,
    }


def _guarded_extra(name: str, suite: str, depth: int, fn: Callable[[], Dict], records: List[Dict]) -> Optional[Dict]:
    """스위트 밖의 부가 산출물 생성. 예외는 실패 기록으로 남긴다"""
    try:
        return fn()
    except Exception as e:
        logger.error(f"❌ {name} 생성 실패: {type(e).__name__}: {e}")
        record = check_record(name, SUITE_ANCHORS[suite], FAIL, depth, f"{type(e).__name__}: {e}")
        record["suite"] = suite
        records.append(record)
        return None


def run(config: RunConfig) -> Dict:
    """
    명령에 해당하는 스위트를 실행하고 리포트를 만든다

    Raises:
        InvalidConfigError: 설정이 잘못되었을 때
    """
    validate_config(config)
    ctx = SuiteContext(depth=config.depth, n=config.n, max_n=config.max_n, mode=config.mode,
                       space=get_space(config.space), seed=config.seed)

    results = Parallel(n_jobs=config.n_jobs, prefer="threads")(
        delayed(run_suite)(name, ctx) for name in config.suites
    )
    records = [r for rs in results for r in rs]

    extra = {"suites": {name: SUITE_ANCHORS[name] for name in config.suites}}
    if config.command == "reparam":
        # 스위트와 공유하지 않는 새 타워 (조각 순서가 실행 순서에 좌우되지 않게)
        height = tower_height(ctx)
        tree = _guarded_extra("tree-manifest", "reparam-tower", height,
                              lambda: tree_manifest(build_tower(height)), records)
        if tree is not None:
            extra["tree"] = tree
    if config.command == "tower" and config.dump:
        matrices = _guarded_extra("stage-dump", "fermion-tower", config.max_n,
                                  lambda: {f"stage{n}": stage_matrices(stage(n, config.mode))
                                           for n in range(1, config.max_n + 1)}, records)
        if matrices is not None:
            extra["matrices"] = matrices
    return build_report(config.echo(), records, extra)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=CLI_CONFIG["default_depth"], help="창 깊이")
    common.add_argument("--n", type=int, default=None, help="타워 높이 / 군양체 창 n")
    common.add_argument("--max-n", type=int, default=None, help="페르미온 타워 최대 단계")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="난수 시드")
    common.add_argument("--mode", default="exact", help="exact | float")
    common.add_argument("--space", default=SPACE_CONFIG["default_space"], help="feasible space 이름")
    common.add_argument("--out", default=None, help="리포트 경로 (기본값: reports/<command>_report.json)")
    common.add_argument("--suite", default=None, help="실행할 스위트 (쉼표 구분)")

    parser = argparse.ArgumentParser(description="stonework: 클로픈 대수, 재매개화, 군양체 창, 페르미온 타워 검증")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in CLI_CONFIG["commands"]:
        p = sub.add_parser(command, parents=[common])
        if command == "tower":
            p.add_argument("--dump", action="store_true", help="단계 행렬을 리포트에 포함")
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    """명령별 기본값을 채워 RunConfig 생성"""
    command = args.command
    if args.n is not None:
        n = args.n
    elif command == "groupoid":
        n = GROUPOID_CONFIG["n"]
    else:
        n = args.depth
    max_n = args.max_n if args.max_n is not None else TOWER_CONFIG["max_n"]
    suites = tuple(COMMAND_SUITES.get(command, []))
    if args.suite:
        suites = tuple(s.strip() for s in args.suite.split(",") if s.strip())

    config = RunConfig(
        command=command,
        depth=args.depth,
        n=n,
        max_n=max_n,
        seed=args.seed,
        mode=args.mode,
        space=args.space,
        out=args.out,
        suites=suites,
        dump=bool(getattr(args, "dump", False)),
        n_jobs=CLI_CONFIG["n_jobs"],
    )
    validate_config(config)
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=LOG_LEVEL,
        format='%(asctime)s - %(levelname)s - %(message)s'
    )
    args = build_parser().parse_args(argv)
    try:
        config = make_config(args)
    except InvalidConfigError as e:
        logger.error(f"❌ 설정 오류: {e}")
        return 2

    logger.info("=" * 60)
    logger.info(f"stonework {config.command} 시작 (seed={config.seed}, mode={config.mode})")
    logger.info("=" * 60)

    report = run(config)
    out = Path(config.out) if config.out else REPORT_DIR / f"{config.command}_report.json"
    save_report(report, out)
    print_summary(report)

    failed = report["summary"]["fail"]
    if failed:
        logger.error(f"❌ 실패한 점검 {failed}건")
        return 1
    logger.info("✅ 모든 점검 통과")
    return 0


if __name__ == "__main__":
    sys.exit(main())
