# -*- coding: utf-8 -*-
"""
스펙트럼 테스트: 결합 대각화, det_p D 인증, Baxter Q, Bethe 방정식
"""

import numpy as np
import pytest

from tau2lab.algebra import LaurentPoly
from tau2lab.averages import average_monodromy
from tau2lab.model import transfer
from tau2lab.sov import sov_basis_recursive
from tau2lab.spectrum import (
    QOperator,
    asymptotics_residual,
    attach_baxter_q,
    baxter_coefficients,
    bethe_check,
    certify_spectrum,
    completeness_residual,
    congruence_ok,
    det_certificate,
    det_functional,
    det_functional_direct,
    functional_spec,
    joint_diagonalize,
    omega_separation,
    q_from_cofactor,
    q_from_nullspace,
    q_wronskian,
    sector_pairing_residual,
    wavefunction_check,
)

LAM = 0.83 + 0.29j


@pytest.fixture(scope="module")
def lines2(params2):
    return joint_diagonalize(params2)


@pytest.fixture(scope="module")
def rbar_run(rbar):
    """부분다양체 구성 위의 라인, (𝚊, 𝚍), Q 부착 로그"""
    params = rbar.params()
    lines = joint_diagonalize(params)
    pair = baxter_coefficients(params)
    log = attach_baxter_q(params, lines, pair, epsilon=-1)
    return params, lines, pair, log


def test_line_count(params2, lines2):
    """p^N 개 라인, 섹터마다 p^{N−1} 개"""
    assert len(lines2) == 9
    assert [line.index for line in lines2] == list(range(9))
    assert completeness_residual(params2, lines2) == 0
    for k in range(3):
        assert sum(line.k == k for line in lines2) == 3


def test_completeness_detects_rank_deficiency(params2, lines2):
    """중복된 고유벡터는 라인 수가 맞아도 공간을 생성하지 못한다"""
    duplicated = list(lines2[:-1]) + [lines2[0]]
    assert len(duplicated) == params2.dim
    assert completeness_residual(params2, duplicated) == 1
    assert completeness_residual(params2, lines2[:-1]) == 1
    assert completeness_residual(params2, []) == params2.dim


def test_lines_are_eigenvectors(params2, lines2):
    """τ₂(λ)v = t(λ)v"""
    tau = transfer(params2, LAM)
    for line in lines2:
        v = line.eigvec
        assert np.linalg.norm(tau @ v - line.t(LAM) * v) < 1e-8 * np.linalg.norm(tau)


def test_asymptotic_coefficients(params2, lines2):
    """λ^{±N} 계수 = q^{±k}a± + q^{∓k}d±"""
    for line in lines2:
        assert asymptotics_residual(params2, line) < 1e-6
    assert sector_pairing_residual(params2, lines2) >= 0


def test_certification_passes(params2, lines2):
    """det_p D ≡ 0 과 SOV 파동함수 인수분해"""
    log = certify_spectrum(params2, lines2, sov_basis_recursive(params2), workers=2)
    assert log.failed() == []
    assert len(log.records) == 3 * len(lines2)


def test_certificate_negative_control(params2, lines2):
    """t 를 교란하면 인증 잔차가 10² 배 이상 커진다"""
    avg = average_monodromy(params2)
    line = lines2[0]
    good = det_certificate(functional_spec(params2, line.t, avg=avg))
    bumped = line.t + LaurentPoly.monomial(0, 0.05 * line.t.max_abs())
    bad = det_certificate(functional_spec(params2, bumped, avg=avg))
    assert bad > 100 * max(good, 1e-8)


def test_det_routes_agree(params2, lines2):
    """4항 전개와 직접 행렬식 경로가 같은 계수"""
    avg = average_monodromy(params2)
    spec = functional_spec(params2, lines2[4].t, avg=avg)
    expansion = det_functional(spec).poly
    direct = det_functional_direct(spec, avg).poly
    exps = range(-2, 3)
    scale = avg.trace().max_abs()
    assert max(abs(expansion.vector(exps) - direct.vector(exps))) < 1e-7 * scale


def test_wavefunction(params2, lines2):
    """SOV 파동함수 = ∏ Q_t(η_n) 인수분해"""
    basis = sov_basis_recursive(params2)
    for line in lines2[:3]:
        assert wavefunction_check(params2, line, basis).deviation < 1e-7


def test_omega_separation(params2):
    assert omega_separation(average_monodromy(params2), 0.9 + 0.5j) > 0


def test_congruence_rule():
    """a_t ≡ ±k (mod p)"""
    assert congruence_ok(1, 2, 1, 3)
    assert not congruence_ok(1, 0, 1, 3)


def test_bethe_without_roots(root):
    """근이 없으면 공허하게 통과"""
    a = LaurentPoly({-1: 1.0, 1: 0.5})
    report = bethe_check(LaurentPoly.monomial(0, 1.0), a, a, root, epsilon=1)
    assert report.max_residual == 0.0
    assert report.roots == []


def test_baxter_pair_on_subvariety(rbar_run):
    """det_q = 𝚊(λ)𝚍(λ/q), ∏𝚊 + ∏𝚍 = 𝒜 + 𝒟"""
    _, _, pair, _ = rbar_run
    assert pair.qdet_residual < 1e-8
    assert pair.average_residual < 1e-8


def test_polynomial_q_on_subvariety(rbar_run):
    """모든 라인이 다항식 Q 와 Bethe 근을 갖는다"""
    params, lines, _, log = rbar_run
    baxter = [r for r in log.records if r.name.startswith("baxter_residual")]
    assert len(baxter) == len(lines)
    assert all(r.passed for r in baxter)
    for line in lines:
        assert line.Q is not None
        assert line.Q.max_exp <= 2 * params.n_sites


def test_q_routes_agree(rbar_run):
    """영공간 경로와 여인수 경로의 Q 가 일치"""
    params, lines, pair, _ = rbar_run
    root, n = params.root, params.n_sites
    for line in lines[:3]:
        sol = q_from_nullspace(line.t, pair.a, pair.d, root, n)
        assert sol.residual < 1e-8
        assert sol.gap > 1e3
        cof = q_from_cofactor(line.t, pair.a, pair.d, root, n, sol.Q)
        assert cof.identities["cofactor_agreement"] < 1e-6


def test_cofactor_zero_set_and_congruence(rbar_run):
    """공통 영점 집합 항등식과 a_t, b_t ≡ ±k (mod p) 가 채점된다"""
    params, lines, pair, log = rbar_run
    zero_set = [r for r in log.records if r.name.startswith("cofactor_zero_set")]
    assert all(r.passed for r in zero_set)
    congruence = [r for r in log.records if r.name.startswith("q_congruence")]
    assert len(congruence) == len(lines)
    assert all(r.passed and not r.informational for r in congruence)
    for line in lines[:3]:
        cof = q_from_cofactor(line.t, pair.a, pair.d, params.root, params.n_sites, line.Q)
        assert cof.identities.get("zero_set", 0.0) == 0.0


def test_q_wronskian(rbar_run):
    """W(Q₁, Q₂) = −W(Q₂, Q₁), W(Q, Q) = 0"""
    params, lines, _, _ = rbar_run
    q1, q2 = lines[0].Q, lines[1].Q
    lams = [0.9 + 0.2j, -0.4 + 1.1j]
    w12 = q_wronskian(q1, q2, params.root, lams)
    w21 = q_wronskian(q2, q1, params.root, lams)
    assert max(abs(w12 + w21)) < 1e-10 * max(abs(w12))
    assert max(abs(q_wronskian(q1, q1, params.root, lams))) < 1e-12 * q1.max_abs() ** 2


def test_q_operator_commutes(rbar_run):
    """Q(λ)Q(μ) = Q(μ)Q(λ), [τ₂, Q] = 0"""
    params, lines, pair, _ = rbar_run
    q_op = QOperator(params, lines, pair)
    assert q_op.commutator_residual(LAM, -0.5 + 0.9j) < 1e-7
    assert q_op.transfer_commutator_residual(LAM, -0.5 + 0.9j) < 1e-7
    assert q_op.baxter_residual(LAM) < 1e-7


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
