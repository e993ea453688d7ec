"""
검증 리포트 생성과 저장
"""
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from config import CLI_CONFIG

logger = logging.getLogger(__name__)

STATUSES = ("pass", "fail", "open-evidence")


def build_report(config_echo: Dict, records: List[Dict], extra: Optional[Dict] = None) -> Dict:
    """
    스키마 태그, 설정, 점검 기록, 요약 개수로 리포트 구성

    Args:
        config_echo: 실행 설정 (시드 포함)
        records: 점검 기록 목록
        extra: 명령별 추가 항목 (트리 매니페스트, 행렬 덤프 등)

    Returns:
        dict: 리포트
    """
    summary = {status: sum(r["status"] == status for r in records) for status in STATUSES}
    summary["total"] = len(records)
    report = {
        "schema": CLI_CONFIG["report_schema"],
        "config": config_echo,
        "checks": records,
        "summary": summary,
    }
    if extra:
        report.update(extra)
    return report


def render_report(report: Dict) -> str:
    """같은 리포트는 같은 바이트열이 되도록 키 정렬 JSON"""
    return json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True, default=str) + "\n"


def save_report(report: Dict, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(render_report(report))
    logger.info(f"✅ 리포트 저장 완료: {path}")
    return path


def summary_table(records: List[Dict]) -> pd.DataFrame:
    """콘솔 출력용 점검 요약표"""
    if not records:
        return pd.DataFrame(columns=["suite", "name", "status", "evidence_depth"])
    df = pd.DataFrame(records)
    return df[["suite", "name", "status", "evidence_depth"]]


def print_summary(report: Dict):
    """리포트 요약을 콘솔에 출력"""
    summary = report["summary"]
    print("\n" + "=" * 60)
    print(f"stonework 검증 리포트 ({report['config'].get('command')})")
    print("=" * 60)
    print(summary_table(report["checks"]).to_string(index=False))
    print("-" * 60)
    print(f"통과 {summary['pass']}  |  실패 {summary['fail']}  |  유한 깊이 증거 {summary['open-evidence']}")
    print("=" * 60)
