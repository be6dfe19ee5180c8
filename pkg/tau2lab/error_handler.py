# -*- coding: utf-8 -*-
"""
에러 처리 모듈

검사 실행 래퍼 및 에러 처리 유틸리티
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, List

from .exceptions import Tau2LabError

logger = logging.getLogger(__name__)


@dataclass
class CheckRecord:
    """단일 검사 결과"""
    name: str
    residual: float
    tolerance: float
    passed: bool
    scale: float = 1.0
    detail: str = ""
    informational: bool = False


@dataclass
class CheckLog:
    """검사 결과 모음"""
    records: List[CheckRecord] = field(default_factory=list)

    def add(self, record: CheckRecord):
        self.records.append(record)

    def failed(self) -> List[CheckRecord]:
        return [r for r in self.records if not r.passed and not r.informational]

    def pass_rate(self) -> float:
        """통과율 계산"""
        graded = [r for r in self.records if not r.informational]
        if not graded:
            return 100.0
        return 100.0 * sum(r.passed for r in graded) / len(graded)

    def sorted(self) -> List[CheckRecord]:
        return sorted(self.records, key=lambda r: r.name)


def safe_execute(func, *args, **kwargs):
    """
    안전한 함수 실행 (예외 처리 포함)

    Args:
        func: 실행할 함수
        *args: 함수 인자
        **kwargs: 함수 키워드 인자

    Returns:
        (success: bool, result: Any, error: Exception)
    """
    try:
        result = func(*args, **kwargs)
        return True, result, None
    except Exception as e:
        logger.error(f"❌ 함수 실행 실패: {getattr(func, '__name__', func)} - {e}", exc_info=True)
        return False, None, e


def run_check(
    name: str,
    func: Callable[..., Any],
    tol: float,
    *args,
    informational: bool = False,
    **kwargs,
) -> CheckRecord:
    """
    잔차를 반환하는 함수를 CheckRecord로 변환

    func는 float 잔차 또는 (잔차, scale) 튜플을 반환한다.
    예외가 발생해도 다른 검사는 계속 진행된다.

    Args:
        name: 검사 이름
        func: 잔차 계산 함수
        tol: 허용오차
        informational: True이면 통과 여부와 무관한 정보성 지표

    Returns:
        CheckRecord
    """
    success, result, error = safe_execute(func, *args, **kwargs)
    if not success:
        detail = f"{type(error).__name__}: {error}"
        if not isinstance(error, Tau2LabError):
            detail = "unexpected " + detail
        return CheckRecord(name, math.inf, tol, False, detail=detail, informational=informational)

    scale = 1.0
    if isinstance(result, tuple):
        result, scale = result
    residual = float(result)
    passed = bool(math.isfinite(residual) and residual <= tol)
    if informational:
        logger.debug(f"ℹ️ {name}: {residual:.3e}")
    elif passed:
        logger.info(f"✅ {name}: {residual:.3e} (tol {tol:.1e})")
    else:
        logger.warning(f"❌ {name}: {residual:.3e} > tol {tol:.1e}")
    return CheckRecord(name, residual, tol, passed, scale=float(scale), informational=informational)


def flag(name: str, value: float, detail: str = "") -> CheckRecord:
    """정보성 지표 (branch flag 등) 기록"""
    return CheckRecord(name, float(value), math.inf, True, detail=detail, informational=True)

