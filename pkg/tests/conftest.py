# -*- coding: utf-8 -*-
"""
pytest 설정 파일

공용 fixture: 단위근 (p=3, p′=2), 임의 파라미터, 자기수반 부분다양체 chP 구성
"""

import sys
import os

import pytest

# 프로젝트 루트를 Python 경로에 추가
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from tau2lab.algebra import UnityRoot  # noqa: E402
from tau2lab.chp import curve_solve, rbar_subvariety, ChPConfig  # noqa: E402
from tau2lab.model import sample_params  # noqa: E402


@pytest.fixture(scope="session")
def root():
    """q = exp(−2πi/3)"""
    return UnityRoot(3, 2)


@pytest.fixture(scope="session")
def params1(root):
    return sample_params(1, root, seed=7)


@pytest.fixture(scope="session")
def params2(root):
    return sample_params(2, root, seed=42)


@pytest.fixture(scope="session")
def rbar(root):
    """ε = −1, k = 0.4 인 부분다양체 위 2-site 곡선 구성"""
    return rbar_subvariety(0.4, [1.0, 0.8], -1, root)


@pytest.fixture(scope="session")
def chp_inhomogeneous(root):
    """q_n ≠ r_n 인 일반 곡선 구성"""
    k = 0.35 + 0.2j
    q1 = curve_solve(k, 0.9 + 0.3j, 1.1 - 0.2j, root)
    q2 = curve_solve(k, 0.7 - 0.4j, 0.95 + 0.1j, root, kp=q1.kp)
    r1 = curve_solve(k, 1.2 + 0.1j, 0.8 + 0.5j, root, kp=q1.kp)
    r2 = curve_solve(k, 0.6 + 0.6j, 1.05 - 0.3j, root, kp=q1.kp)
    return ChPConfig(k, q1.kp, 1.0 + 0j, (q1, q2), (r1, r2), root)


@pytest.fixture(scope="session")
def chp_homogeneous(root):
    """q_n = r_n 인 곡선 구성"""
    k = 0.35 + 0.2j
    q1 = curve_solve(k, 0.9 + 0.3j, 1.1 - 0.2j, root)
    q2 = curve_solve(k, 0.7 - 0.4j, 0.95 + 0.1j, root, kp=q1.kp)
    return ChPConfig(k, q1.kp, 1.0 + 0j, (q1, q2), (q1, q2), root)
