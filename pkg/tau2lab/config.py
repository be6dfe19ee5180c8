# -*- coding: utf-8 -*-
"""
tau2lab 설정 모듈

환경 변수 기반 설정 관리 및 검사별 기본 허용오차
"""

import os
import logging

logger = logging.getLogger(__name__)

# ====================
# 실행 환경 설정
# ====================
THREADS = int(os.getenv("TAU2_THREADS", str(os.cpu_count() or 1)))
LOG_LEVEL = os.getenv("TAU2_LOG_LEVEL", "INFO").upper()
OUTPUT_DIR = os.getenv("TAU2_OUTPUT_DIR", os.path.join(os.getcwd(), "reports"))
DEFAULT_SEED = int(os.getenv("TAU2_SEED", "42"))

# ====================
# 수치 상수
# ====================
COEFF_DROP_RTOL = 1e-12      # LaurentPoly 계수 제거 기준 (max |coeff| 대비)
ROOT_MATCH_RTOL = 1e-6       # p-string / 켤레 검사 근 매칭
ROOT_STRIP_RTOL = 1e-5       # cofactor 공통근 제거
SV_GAP = 1e3                 # 영공간 유일성 특이값 간격
SV_NULL_RTOL = 1e-7          # 최소 특이값 / 최대 특이값
DIRECT_RETRIES = 5

# ====================
# 보간 격자 설정
# ====================
GRID_DEFAULTS = {
    "radius": 1.17,
    "extra_points": 3,
}

# ====================
# 검사용 스펙트럼 매개변수 ([re, im])
# ====================
SAMPLE_LAMBDAS = ((0.83, 0.29), (-0.61, 0.74), (1.12, -0.37))

# ====================
# 파라미터 샘플러 설정
# ====================
SAMPLER_DEFAULTS = {
    "seed": DEFAULT_SEED,
    "moduli": (0.5, 2.0),
    "n_sites": 2,
}

# ====================
# 검사별 기본 허용오차
# ====================
DEFAULT_TOLERANCES = {
    # weyl / model
    "weyl_relations": 1e-11,
    "theta_commutation": 1e-11,
    "yang_baxter": 1e-11,
    "b_commutation": 1e-11,
    "transfer_commutation": 1e-11,
    "qdet_operator": 1e-10,
    "hermiticity": 1e-12,
    "subvariety_constraints": 1e-12,
    "asymptotics": 1e-6,
    # averages
    "centrality": 1e-9,
    "average_product": 1e-9,
    "det_contract": 1e-8,
    # sov
    "b_eigenrelation": 1e-9,
    "basis_agreement": 1e-7,
    "b_average_zero": 1e-9,
    "sov_qdet": 1e-8,
    "sov_average": 1e-9,
    "sov_actions": 1e-8,
    # spectrum
    "parity_leakage": 1e-9,
    "det_functional": 1e-6,
    "wavefunction": 1e-7,
    "baxter_residual": 1e-7,
    "bethe": 1e-6,
    "t_reconstruction": 1e-7,
    "cofactor_agreement": 1e-6,
    "cofactor_identities": 1e-7,
    "q_operator": 1e-7,
    # chp
    "curve": 1e-10,
    "chp_baxter": 1e-8,
    "chp_commutation": 1e-9,
    "chp_theta": 1e-10,
    "normality": 1e-8,
    "chp_eigenvalue_map": 1e-7,
    # baxterq
    "triangularity": 1e-9,
    "generalized_baxter": 1e-8,
    "average_identities": 1e-8,
    "n_b": 1e-10,
    "sigma_closure": 1e-9,
    "omega_matching": 1e-8,
}


def setup_logging(level: str = LOG_LEVEL):
    """
    루트 로거 설정

    Args:
        level: 로그 레벨 이름 (DEBUG, INFO, WARNING, ERROR)
    """
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - [%(funcName)s:%(lineno)d] - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def tolerance(name: str, overrides: dict = None) -> float:
    """검사 이름에 대한 허용오차 (설정 오버라이드 우선)"""
    if overrides and name in overrides:
        return float(overrides[name])
    return DEFAULT_TOLERANCES[name]
