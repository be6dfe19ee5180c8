# -*- coding: utf-8 -*-
"""
커스텀 예외 클래스 모듈

tau2lab 전용 예외 클래스 정의
"""


class Tau2LabError(Exception):
    """tau2lab 기본 예외 클래스"""
    pass


class DomainError(Tau2LabError):
    """정의역 오류 예외 (λ = 0, 잘못된 site 번호 등)"""
    pass


class ConditioningError(Tau2LabError):
    """보간/최소제곱 계의 조건수 오류 예외"""

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(f"{message} (condition ≈ {condition:.3e})")
        self.condition = condition


class ConstraintError(Tau2LabError):
    """표현 파라미터 제약 위반 예외"""
    pass


class CentralityError(Tau2LabError):
    """평균값 연산자가 스칼라가 아닌 경우의 예외"""
    pass


class DegeneracyError(Tau2LabError):
    """고유값 충돌, 중근, 모호한 영공간 예외"""
    pass


class GaugeChoiceError(Tau2LabError):
    """SOV 게이지 선택 실패 예외"""
    pass


class RepresentationError(Tau2LabError):
    """표현 자체가 퇴화된 경우의 예외"""
    pass


class CyclicityError(Tau2LabError):
    """W/Y 함수의 순환 조건 위반 예외"""
    pass


class CurveError(Tau2LabError):
    """chiral Potts 곡선 점 계산 오류 예외"""
    pass


class ConfigError(Tau2LabError):
    """실행 설정 검증 오류 예외"""

    def __init__(self, message: str, field_path: str = ""):
        super().__init__(f"{field_path}: {message}" if field_path else message)
        self.field_path = field_path


class ReportGenerationError(Tau2LabError):
    """리포트 생성 오류 예외"""
    pass
