# -*- coding: utf-8 -*-
"""
chiral Potts 테스트: 곡선, W/W̄ 표, 전달행렬, Baxter 방정식, 자기수반 구성
"""

import pytest

from tau2lab.chp import (
    ChPConfig,
    CurvePoint,
    baxter_check,
    bs_coefficients,
    chp_transfer,
    commutation_residuals,
    completeness_table,
    conjugation_residual,
    curve_solve,
    eigenvalue_map,
    exchange_residuals,
    fit_shift_pair,
    inversion_residual,
    normality_check,
    point_for_lambda,
    rbar_subvariety,
    selfadjoint_config,
    selfadjoint_spectral_point,
    shifted_transfers,
    tau2_params_from_curve,
    theta_commutation,
    w_pair,
    w_recursion_residual,
)
from tau2lab.exceptions import ConstraintError, CurveError, CyclicityError, DomainError
from tau2lab.model import hermiticity_residual, subvariety_residual, transfer
from tau2lab.spectrum import attach_baxter_q, baxter_coefficients, joint_diagonalize

LAM = 0.83 + 0.29j
MU = -0.61 + 0.74j


def test_curve_points(chp_inhomogeneous):
    """시드에서 복원한 점과 λ 점 모두 곡선 위"""
    assert chp_inhomogeneous.curve_residual() < 1e-10
    point = point_for_lambda(chp_inhomogeneous, LAM)
    assert point.residual(3) < 1e-10
    # x_p y_p = (𝖼₀/λ)²
    assert abs(point.t - (1 / LAM) ** 2) < 1e-10


@pytest.mark.parametrize("k", [0.0, 1.0, -1.0])
def test_curve_solve_bad_modulus(root, k):
    with pytest.raises(CurveError):
        curve_solve(k, 1.0, 1.0, root)


def test_point_for_zero_lambda(chp_inhomogeneous):
    with pytest.raises(DomainError):
        point_for_lambda(chp_inhomogeneous, 0)


def test_inversion(chp_inhomogeneous):
    """x_q, y_r 를 τ₂ 파라미터와 λ 로 복원"""
    assert inversion_residual(chp_inhomogeneous, LAM) < 1e-9


def test_w_tables(chp_inhomogeneous):
    """곡선 위의 점이면 W, W̄ 는 주기 p"""
    point = point_for_lambda(chp_inhomogeneous, LAM)
    root = chp_inhomogeneous.root
    for qpt in chp_inhomogeneous.q_points:
        pair = w_pair(qpt, point, root)
        assert pair.w[0] == 1
        assert max(pair.cyclicity) < 1e-9
        assert w_recursion_residual(qpt, point, root) < 1e-9


def test_w_off_curve(chp_inhomogeneous, root):
    """곡선 밖의 점은 CyclicityError"""
    off = CurvePoint(1.0, 2.0, 1.0, 1.5, chp_inhomogeneous.k, chp_inhomogeneous.kp)
    point = point_for_lambda(chp_inhomogeneous, LAM)
    with pytest.raises(CyclicityError):
        w_pair(off, point, root)


def test_baxter_equation(chp_inhomogeneous):
    """τ₂(λ)T_λ = a_BS T_{λ/q} + d_BS T_{qλ}, 계수는 닫힌 형태"""
    check = baxter_check(chp_inhomogeneous, LAM)
    assert check.residual < 1e-8
    assert abs(check.a) > 0 and abs(check.d) > 0

    t0, down, up = shifted_transfers(chp_inhomogeneous, LAM)
    fit = fit_shift_pair(transfer(chp_inhomogeneous.params(), LAM) @ t0, down, up)
    assert abs(fit.a - check.a) < 1e-8 * abs(fit.a)
    assert abs(fit.d - check.d) < 1e-8 * abs(fit.d)


def test_theta_commutation(chp_inhomogeneous):
    assert theta_commutation(chp_inhomogeneous, LAM) < 1e-10


def test_homogeneous_exchange(chp_homogeneous):
    """q_n = r_n 이면 site 마다 점이 달라도 T_λ T̂_μ = T_μ T̂_λ"""
    assert chp_homogeneous.homogeneous
    assert not chp_homogeneous.translation_invariant
    res = exchange_residuals(chp_homogeneous, LAM, MU)
    assert res["left"] < 1e-9
    assert res["right"] < 1e-9
    assert commutation_residuals(chp_homogeneous, LAM, MU)["theta"] < 1e-10


def test_inhomogeneous_exchange_fails(chp_inhomogeneous):
    """q_n ≠ r_n 이면 교환 관계가 깨진다"""
    assert not chp_inhomogeneous.homogeneous
    assert max(exchange_residuals(chp_inhomogeneous, LAM, MU).values()) > 1e-3


def test_site_varying_points_do_not_commute(chp_homogeneous):
    """q_n = r_n 이라도 site 마다 점이 다르면 [T_λ, T_μ] ≠ 0"""
    res = commutation_residuals(chp_homogeneous, LAM, MU)
    assert res["self"] > 1e-3
    assert res["transfer"] > 1e-3


@pytest.mark.parametrize("n_sites", [2, 3])
def test_translation_invariant_commutation(root, n_sites):
    """모든 site 가 같은 점이면 T 끼리, τ₂ 와도 교환"""
    k = 0.35 + 0.2j
    q1 = curve_solve(k, 0.9 + 0.3j, 1.1 - 0.2j, root)
    config = ChPConfig(k, q1.kp, 1.0 + 0j, (q1,) * n_sites, (q1,) * n_sites, root)
    assert config.translation_invariant
    res = commutation_residuals(config, LAM, MU)
    assert res["theta"] < 1e-10
    assert res["transfer"] < 1e-9
    assert res["self"] < 1e-9


def test_rbar_is_translation_invariant(rbar):
    """부분다양체 점들은 d 가 달라도 (x, y, s) 가 같다"""
    assert rbar.translation_invariant
    res = commutation_residuals(rbar, LAM, MU)
    assert res["transfer"] < 1e-9
    assert res["self"] < 1e-9


def test_w_conjugation(root):
    """자기수반 점 q 와 정규성 점 p 에서 W* = W̄(z(p−n))"""
    config = selfadjoint_config(0.4, [1.0 + 0.3j, 0.8 - 0.2j], -1, root)
    point = selfadjoint_spectral_point(config, -1)
    assert point.residual(3) < 1e-10
    assert abs(point.s.imag) < 1e-12
    for qpt in config.q_points:
        assert conjugation_residual(qpt, point, root) < 1e-10
    # 일반 λ 점에서는 성립하지 않는다
    generic = point_for_lambda(config, LAM)
    assert conjugation_residual(config.q_points[0], generic, root) > 1e-3


def test_selfadjoint_config(root):
    """k* = −εk 인 자기수반 구성, T† = g T̂"""
    config = selfadjoint_config(0.4, [1.0 + 0.3j, 0.8 - 0.2j], -1, root)
    assert config.homogeneous
    assert config.curve_residual() < 1e-8
    assert hermiticity_residual(config.params(), MU, -1) < 1e-10
    normal = normality_check(config, point=selfadjoint_spectral_point(config, -1))
    assert normal["t_dagger"] < 1e-8
    # site 마다 점이 다르면 정규성은 깨진다
    assert normal["normality"] > 1e-3


def test_translation_invariant_normality(root):
    """같은 점을 반복한 자기수반 구성에서 T 는 정규"""
    config = selfadjoint_config(0.4, [1.0 + 0.3j, 1.0 + 0.3j], -1, root)
    assert config.translation_invariant
    normal = normality_check(config, point=selfadjoint_spectral_point(config, -1))
    assert normal["normality"] < 1e-8
    assert normal["t_dagger"] < 1e-8
    # 정규성 점이 아니면 T† ≠ g T̂
    assert normality_check(config, LAM)["t_dagger"] > 1e-3


def test_spectral_point_needs_selfadjoint_modulus(chp_inhomogeneous):
    with pytest.raises(ConstraintError):
        selfadjoint_spectral_point(chp_inhomogeneous, -1)


def test_selfadjoint_rejects_complex_modulus(root):
    with pytest.raises(ConstraintError):
        selfadjoint_config(0.4j, [1.0, 0.8], -1, root)


def test_rbar_construction(rbar):
    """부분다양체 및 자기수반 조건"""
    params = rbar.params()
    assert rbar.curve_residual() < 1e-10
    assert subvariety_residual(params) < 1e-10
    assert hermiticity_residual(params, LAM, -1) < 1e-10


def test_rbar_bad_phase(root):
    """|x|^p 가 양수가 아닌 위상은 거부"""
    with pytest.raises(ConstraintError):
        rbar_subvariety(0.4, [1.0, 0.8], -1, root, a_phase=-1.0)


def test_rbar_bad_moduli(root):
    with pytest.raises(DomainError):
        rbar_subvariety(0.4, [1.0, -0.8], -1, root)


def test_parametrization(chp_inhomogeneous):
    """곡선 매개화 파라미터는 αγ = 𝕒𝕔, βδ = 𝕓𝕕"""
    params = tau2_params_from_curve(chp_inhomogeneous)
    assert params.n_sites == 2
    assert all(s.constraint_residual() < 1e-10 for s in params.sites)


def test_transfer_shape(chp_inhomogeneous):
    t = chp_transfer(chp_inhomogeneous, LAM)
    t_hat = chp_transfer(chp_inhomogeneous, LAM, hat=True)
    assert t.shape == t_hat.shape == (9, 9)


def test_closed_form_coefficients(chp_inhomogeneous):
    a_bs, d_bs = bs_coefficients(chp_inhomogeneous, LAM)
    assert a_bs != 0 and d_bs != 0


def test_eigenvalue_map(rbar):
    """교환하는 T 는 결합 고유벡터 위에서 대각, t q_λ = a q_{λ/q} + d q_{qλ}"""
    params = rbar.params()
    lines = joint_diagonalize(params)
    rows = eigenvalue_map(rbar, lines, LAM)
    assert len(rows) == 9
    assert max(r.leakage for r in rows) < 1e-7
    assert max(r.relation for r in rows) < 1e-7

    pair = baxter_coefficients(params)
    attach_baxter_q(params, lines, pair, epsilon=-1, use_cofactor=False)
    table, _ = completeness_table(rbar, lines, pair, -1, LAM)
    assert sorted(r["index"] for r in table) == list(range(9))
    assert all(r["bethe_residual"] < 1e-6 for r in table)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
