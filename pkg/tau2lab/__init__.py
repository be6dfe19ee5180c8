# -*- coding: utf-8 -*-
"""
tau2lab 패키지

순환 표현 τ₂-모델의 SOV 스펙트럼, Baxter Q-연산자, chiral Potts 전달행렬
수치 검증 모듈
"""

__version__ = "1.0.0"
__author__ = "tau2lab Development Team"
