# -*- coding: utf-8 -*-
"""
평균값 테스트: 중심성, 곱 공식, 행렬식 축약
"""

import numpy as np
import pytest

from tau2lab.averages import (
    average_lax,
    average_monodromy,
    average_table,
    centrality_residual,
    det_contract_residual,
    omega_eigenvalues,
    operator_average,
    product_formula_residual,
    similarity_invariance_residual,
)
from tau2lab.exceptions import DomainError

BIG = [0.9 + 0.5j, -1.3 + 0.2j]


@pytest.mark.parametrize("tag", ["A", "B", "C", "D"])
def test_orbit_products_are_central(params2, tag):
    """q-궤도 곱은 스칼라 × 항등"""
    for big in BIG:
        assert centrality_residual(params2, tag, big) < 1e-9


def test_vanishing_b_average_is_central(rbar):
    """ℬ ≡ 𝒞 ≡ 0 인 부분다양체에서도 중심성 판정은 반올림 수준"""
    params = rbar.params()
    for big in BIG:
        for tag in "ABCD":
            assert centrality_residual(params, tag, big) < 1e-9
        assert abs(operator_average(params, "B", big)) < 1e-9 * abs(operator_average(params, "A", big))


def test_product_formula(params2):
    """𝓜 = 𝓛_N ⋯ 𝓛_1 이 연산자 평균과 일치"""
    assert product_formula_residual(params2) < 1e-9


def test_single_site_average(params1):
    """N = 1 에서 𝒜(Λ) = α^p Λ − β^p/Λ"""
    site = params1.sites[0]
    big = BIG[0]
    want = site.alpha ** 3 * big - site.beta ** 3 / big
    assert abs(operator_average(params1, "A", big) - want) < 1e-9 * max(abs(want), 1.0)
    assert abs(average_lax(site, params1.root).A(big) - want) < 1e-12 * max(abs(want), 1.0)


def test_det_contract(params2):
    """𝒜𝒟 − ℬ𝒞 = ∏ det_q M(q^i λ)"""
    assert det_contract_residual(params2) < 1e-8


def test_omega_eigenvalues(params2):
    """Ω₊ + Ω₋ = 𝒜 + 𝒟, Ω₊Ω₋ = det 𝓜"""
    avg = average_monodromy(params2)
    for big in BIG:
        plus, minus = omega_eigenvalues(avg, big)
        m = avg(big)
        assert abs(plus + minus - np.trace(m)) < 1e-10 * np.abs(m).max()
        assert abs(plus * minus - np.linalg.det(m)) < 1e-9 * np.abs(m).max() ** 2
    with pytest.raises(DomainError):
        omega_eigenvalues(avg, 0)


def test_similarity_invariance(params2):
    """양자공간 유사변환 후 평균값 불변"""
    assert similarity_invariance_residual(params2, BIG[0], seed=3) < 1e-9


def test_unknown_tag(params2):
    with pytest.raises(DomainError):
        centrality_residual(params2, "X", BIG[0])


def test_average_table_keys(params2):
    assert set(average_table(params2, BIG[0])) == {"A", "B", "C", "D"}


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
