# -*- coding: utf-8 -*-
"""
일반화 Q 테스트: σ-사슬, 삼각화, Baxter 방정식, 평균 항등식, chP 환원
"""

import pytest

from tau2lab.averages import average_monodromy
from tau2lab.baxterq import (
    b_zero_residual,
    baxter_fit,
    chp_agreement,
    cofactor_residual,
    coefficient_identities,
    forced_chain,
    generalized_q,
    mobius_solve,
    omega_matching,
    operator_triangularity,
    shift_recursion_residual,
    triangularity_residual,
    y_function,
    y_ratio_monodromies,
)
from tau2lab.exceptions import DomainError
from tau2lab.sov import compute_Z

LAM = 0.83 + 0.29j


@pytest.fixture(scope="module")
def chain2(params2):
    return mobius_solve(params2, LAM)


def test_chain_closes(params2, chain2):
    """σ_{N+1}^p = σ_1^p"""
    assert chain2.n_sites == 2
    assert chain2.closure < 1e-9
    assert abs(chain2.big_lambda - LAM ** 3) < 1e-12


def test_site_maps_are_cofactors(params2, chain2):
    for site in params2.sites:
        assert cofactor_residual(site, params2.root, chain2.big_lambda) < 1e-10


def test_ratio_monodromies(params2, chain2):
    """μ_F(σ_n) μ_G(σ_{n+1}) = 1"""
    for mu_f, mu_g in y_ratio_monodromies(params2, LAM, chain2):
        assert abs(mu_f * mu_g - 1) < 1e-9


def test_y_tables(params2, chain2):
    """순환 Y 표, Q 핵은 p^N × p^N"""
    for n in (1, 2):
        table = y_function(params2, n, LAM, chain2)
        assert table.f[0] == 1 and table.g[0] == 1
        assert table.cyclicity < 1e-9
    with pytest.raises(DomainError):
        y_function(params2, 3, LAM, chain2)
    assert generalized_q(params2, LAM, chain2).shape == (9, 9)


def test_omega_matching(params2, chain2):
    """사슬 행렬 고유값 = 평균 모노드로미 고유값"""
    assert omega_matching(params2, chain2) < 1e-8


def test_zero_lambda(params2):
    with pytest.raises(DomainError):
        mobius_solve(params2, 0)


def test_forced_chain_length(params2):
    with pytest.raises(DomainError):
        forced_chain(params2, LAM, [1.0])


def test_triangularity(params2, chain2):
    """게이지 변환된 L̃₂₁ 이 Y 를 소멸"""
    assert triangularity_residual(params2, LAM, chain2) < 1e-9
    assert operator_triangularity(params2, LAM, chain2) < 1e-9
    assert shift_recursion_residual(params2, LAM, chain2) < 1e-8


@pytest.mark.parametrize("lam", [LAM, -0.61 + 0.74j])
def test_generalized_baxter(params2, lam):
    """τ₂(λ)Q_λ = a_B Q_{λ/q} + d_B Q_{qλ}"""
    fit = baxter_fit(params2, lam)
    assert fit.residual < 1e-8


def test_single_site(params1):
    fit = baxter_fit(params1, LAM)
    assert fit.residual < 1e-8


def test_coefficient_identities(params2, chain2):
    """∏a_B + ∏d_B = 𝒜 + 𝒟, ∏a_B ∏d_B = det 𝓜"""
    identities = coefficient_identities(params2, LAM, chain2)
    assert set(identities) == {"average_sum", "average_det", "n_b", "fit"}
    assert identities["fit"] < 1e-8
    assert identities["average_sum"] < 1e-7
    assert identities["average_det"] < 1e-7
    assert identities["n_b"] < 1e-7


def test_b_zero_averages(params2):
    """ℬ(Z_a) = 0 에서 {∏a_B, ∏d_B} = {𝒜, 𝒟}"""
    avg = average_monodromy(params2)
    grid = compute_Z(params2, avg=avg)
    assert b_zero_residual(params2, grid, avg) < 1e-7


def test_chp_reduction(chp_inhomogeneous):
    """chP 게이지에서 Q 핵과 chP 전달행렬은 열별 비례"""
    assert chp_agreement(chp_inhomogeneous, LAM) < 1e-8


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
