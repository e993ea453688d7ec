"""
stonework 프로젝트 설정 파일
"""
import os
from pathlib import Path

from dotenv import load_dotenv

# 프로젝트 루트 디렉토리 (크로스 플랫폼 호환)
BASE_DIR = Path(__file__).parent.absolute()

# 리포트 디렉토리
REPORT_DIR = BASE_DIR / "reports"

# 환경 변수 파일
ENV_FILE = BASE_DIR / ".env"

load_dotenv(ENV_FILE)

# 기본 시드 (.env 의 STONEWORK_SEED 로 덮어쓰기 가능)
DEFAULT_SEED = int(os.getenv("STONEWORK_SEED", "20240917"))

# 로그 레벨
LOG_LEVEL = os.getenv("STONEWORK_LOG_LEVEL", "INFO")

# 조합론 설정
COMBINATORICS_CONFIG = {
    "universe_bound": 64,
    "sweep_bound": 8,          # 전수 검사 대상 {1..8}
    "enum_roundtrip_bound": 2 ** 16
}

# Feasible space 설정
SPACE_CONFIG = {
    "default_space": "builtin-cantor",
    "search_bound": 10 ** 4,
    "feasibility_samples": 50,
    "admissibility_max_n": 200,
    "descriptor_samples": 64
}

# 클로픈 대수 설정
CLOPEN_CONFIG = {
    "window_depth": 6,
    "scan_window": 12,         # 원통 식이 아닌 식의 전수 탐색 깊이 상한
    "image_samples": 10000,
    "guarded_min": 100,        # 분기 (c) 최소 표본 수
    "ergodicity_samples": 200
}

# 재매개화 엔진 설정
REPARAM_CONFIG = {
    "tower_n": 5,
    "search_depth": COMBINATORICS_CONFIG["universe_bound"],  # 증인/분할 탐색 깊이
    "scan_cap": int(os.getenv("STONEWORK_SCAN_CAP", "4096")),
    "zaction_min_n": 2
}

# 군양체 창 설정
GROUPOID_CONFIG = {
    "n": 3,
    "samples": 50,
    "normalizer_samples": 100,
    "normalizer_n": 3,
    "tol": 1e-9
}

# 페르미온 타워 설정
TOWER_CONFIG = {
    "max_n": 6,
    "stage_bound": 12,
    "exact_span_max_n": 4,
    "closure_budget": 5000,
    "saturation_depth": 5
}

# CLI 설정
CLI_CONFIG = {
    "commands": ["verify", "reparam", "zaction", "groupoid", "tower", "space-audit"],
    "depth_range": (1, 8),
    "default_depth": 6,
    "report_schema": "stonework/report/1",
    "tree_schema": "stonework/tree/1",
    "n_jobs": int(os.getenv("STONEWORK_N_JOBS", "1"))
}

# 디렉토리 생성
REPORT_DIR.mkdir(exist_ok=True)
