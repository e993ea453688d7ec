"""
행렬 묶음이 생성하는 선형 공간의 차원
"""
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def to_qq(x):
    f = Fraction(x)
    return QQ(int(f.numerator), int(f.denominator))


def span_rank(vectors: Sequence[np.ndarray], mode: str = "exact", tol: Optional[float] = None) -> int:
    """
    벡터(또는 행렬) 묶음의 생성 공간 차원

    exact 모드는 QQ 위의 희소 DomainMatrix 로 계수를 계산하고, float 모드는
    numpy 의 matrix_rank 를 쓴다. 실수 성분만 받는다.

    Args:
        vectors: 같은 크기의 배열 목록 (평탄화해서 행으로 쌓는다)
        mode: "exact" 또는 "float"
        tol: float 모드의 특이값 허용 오차

    Returns:
        int: 생성 공간의 차원

    Raises:
        ValueError: 크기가 다르거나 복소수 성분이 있을 때
    """
    rows = [np.asarray(v).ravel() for v in vectors]
    if not rows:
        return 0
    width = rows[0].size
    if any(r.size != width for r in rows):
        raise ValueError("벡터 크기가 서로 다릅니다.")
    if any(np.iscomplexobj(r) for r in rows):
        raise ValueError("span_rank 는 실수 성분만 지원합니다.")

    if mode == "float":
        return int(np.linalg.matrix_rank(np.array(rows, dtype=float), tol=tol))
    if mode != "exact":
        raise ValueError(f"알 수 없는 스칼라 모드: {mode}")

    data = {}
    for i, row in enumerate(rows):
        entries = {j: to_qq(x) for j, x in enumerate(row) if x != 0}
        if entries:
            data[i] = entries
    if not data:
        return 0
    return int(DomainMatrix(data, (len(rows), width), QQ).rank())
