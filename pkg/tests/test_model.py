# -*- coding: utf-8 -*-
"""
τ₂ 모델 테스트: Yang–Baxter, 양자 행렬식, 점근, 자기수반 생성기
"""

import numpy as np
import pytest

from tau2lab.exceptions import ConstraintError, DomainError
from tau2lab.model import (
    ModelParams,
    SiteParams,
    asymptotic_operator,
    gauge_conjugate,
    lax,
    hermiticity_residual,
    make_sadj_subvariety,
    make_selfadjoint,
    monodromy,
    qdet_factorized,
    qdet_operator_residual,
    qdet_scalar,
    r_matrix,
    restricted_params,
    sample_params,
    subvariety_residual,
    transfer,
    yang_baxter_residual,
)
from tau2lab.weyl import relative_commutator

LAMS = [0.83 + 0.29j, -0.61 + 0.74j, 1.12 - 0.37j]


def test_sampler_respects_constraints(params2):
    """샘플러 파라미터는 αγ = 𝕒𝕔, βδ = 𝕓𝕕"""
    assert params2.n_sites == 2
    assert params2.dim == 9
    assert all(s.constraint_residual() < 1e-12 for s in params2.sites)


def test_sampler_is_deterministic(root):
    a = sample_params(2, root, seed=5)
    b = sample_params(2, root, seed=5)
    assert a.sites == b.sites


def test_constraint_violation_rejected(root):
    """αγ ≠ 𝕒𝕔 는 ConstraintError"""
    with pytest.raises(ConstraintError):
        ModelParams((SiteParams(1, 1, 5, 1, 1, 1, 1, 1),), root)
    with pytest.raises(ConstraintError):
        ModelParams((SiteParams(1, 1, 1, 1, 1, 1, 0, 1),), root)


def test_zero_lambda_rejected(params1):
    with pytest.raises(DomainError):
        monodromy(params1, 0)


def test_yang_baxter(params2):
    """RTT 관계 잔차"""
    for lam, mu in [(LAMS[0], LAMS[1]), (LAMS[1], LAMS[2])]:
        res, scale = yang_baxter_residual(params2, lam, mu)
        assert res < 1e-11
        assert scale > 0


def test_transfer_commutes(params2):
    """[τ₂(λ), τ₂(μ)] = 0, [Θ, τ₂(λ)] = 0"""
    t1, t2 = transfer(params2, LAMS[0]), transfer(params2, LAMS[2])
    assert relative_commutator(t1, t2) < 1e-11
    assert relative_commutator(params2.space.theta_op(), t1) < 1e-11


@pytest.mark.parametrize("n_sites", [1, 2])
def test_quantum_determinant(root, n_sites):
    """연산자 det_q = 닫힌 형태 스칼라 × 항등"""
    params = sample_params(n_sites, root, seed=11 + n_sites)
    for lam in LAMS:
        assert qdet_operator_residual(params, lam) < 1e-10
        value = qdet_scalar(params, lam)
        assert abs(qdet_factorized(params, lam) - value) / abs(value) < 1e-10


def test_asymptotics(params2):
    """λ^{-N} τ₂(λ) → Θ a₊ + Θ⁻¹ d₊"""
    lam = 1e4 * np.exp(0.3j)
    got = transfer(params2, lam) / lam ** 2
    want = asymptotic_operator(params2, "infinity")
    assert np.linalg.norm(got - want) / np.linalg.norm(want) < 1e-5
    with pytest.raises(DomainError):
        asymptotic_operator(params2, "sideways")


def test_gauge_keeps_transfer(params2):
    """상수 게이지는 A + D 를 바꾸지 않는다"""
    gauge = np.array([[1.0, 0.3j], [-0.2, 1.1]])
    a, _, _, d = gauge_conjugate(params2, LAMS[0], gauge)
    assert np.linalg.norm(a + d - transfer(params2, LAMS[0])) < 1e-10 * np.linalg.norm(a + d)
    with pytest.raises(DomainError):
        gauge_conjugate(params2, LAMS[0], np.zeros((2, 2)))


def test_restricted_family(root):
    """site 1 에서 𝕓^p + 𝕒^p = 0"""
    params = restricted_params(2, root, seed=3)
    s = params.sites[0]
    assert abs(s.b ** 3 + s.a ** 3) < 1e-10 * abs(s.a) ** 3


@pytest.mark.parametrize("epsilon", [1, -1])
def test_selfadjoint_generator(root, epsilon):
    """자기수반 생성기: A† = D(λ*) 등"""
    free = [(0.9 + 0.4j, 1.1 - 0.2j, 0.7 + 0.5j), (1.3 - 0.6j, 0.8 + 0.1j, 0.6 - 0.9j)]
    params = make_selfadjoint(free, epsilon, root)
    for lam in LAMS:
        assert hermiticity_residual(params, lam, epsilon) < 1e-12
    with pytest.raises(DomainError):
        make_selfadjoint(free, 2, root)


def test_sadj_subvariety(root):
    """부분다양체 생성기: 위상 조건과 자기수반성"""
    params = make_sadj_subvariety([1.2, 0.9], [0.8, 1.4], [1.1, 0.6], -1, root)
    assert subvariety_residual(params) < 1e-12
    assert hermiticity_residual(params, LAMS[0], -1) < 1e-12


def test_r_matrix_at_one(root):
    """R(1) = (q − q⁻¹) P"""
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    assert np.allclose(r_matrix(root, 1.0), (root.q - 1 / root.q) * swap, atol=1e-14)


def test_lax_site_range(params2):
    with pytest.raises(DomainError):
        lax(params2, 3, 0.5)


def test_asymptotic_constants(params2):
    """a₊ = ∏α, d₋ = ∏γ"""
    consts = params2.asymptotic_constants()
    assert set(consts) == {"a_plus", "a_minus", "d_plus", "d_minus"}
    alpha = params2.sites[0].alpha * params2.sites[1].alpha
    gamma = params2.sites[0].gamma * params2.sites[1].gamma
    assert abs(consts["a_plus"] - alpha) < 1e-12 * abs(alpha)
    assert abs(consts["d_minus"] - gamma) < 1e-12 * abs(gamma)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
