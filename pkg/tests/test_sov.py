# -*- coding: utf-8 -*-
"""
SOV 기저 테스트: Z 격자, 재귀/직접 기저, 작용 검증
"""

import numpy as np
import pytest

from tau2lab.averages import average_monodromy
from tau2lab.exceptions import GaugeChoiceError, RepresentationError
from tau2lab.model import ModelParams, SiteParams
from tau2lab.sov import (
    b_average_zero_residual,
    b_eigenrelation_residual,
    basis_agreement,
    coefficient_residuals,
    compute_Z,
    independence_ratio,
    regauge,
    simplicity_margin,
    site1_basis,
    sov_basis_direct,
    sov_basis_recursive,
    sov_coefficients,
    sov_representation_check,
    verify_actions,
)

LAMS = [0.83 + 0.29j, -0.61 + 0.74j, 1.12 - 0.37j, 0.4 + 1.3j, -0.9 - 0.6j]


@pytest.fixture(scope="module")
def grid(params2):
    return compute_Z(params2)


@pytest.fixture(scope="module")
def recursive(params2):
    return sov_basis_recursive(params2)


def test_grid_shape(params2, grid):
    """N = 2 에서 Z_1 하나와 Z_N"""
    assert len(grid.Z) == 2
    assert grid.n_sites == 2
    assert len(grid.tuples()) == 9
    for a in range(2):
        assert abs(grid.eta0[a] ** 3 - grid.Z[a]) < 1e-10 * abs(grid.Z[a])


def test_b_average_vanishes_on_grid(params2, grid):
    """ℬ(Z_a) = 0"""
    assert b_average_zero_residual(params2, grid) < 1e-9


def test_sov_coefficients(params2, grid):
    """aSOV dSOV = det_q, 궤도곱 = 𝒜(Z), 𝒟(Z)"""
    avg = average_monodromy(params2)
    coeffs = sov_coefficients(params2, grid, avg)
    residuals = coefficient_residuals(params2, grid, coeffs, avg)
    assert residuals["sov_qdet"] < 1e-8
    assert residuals["sov_average"] < 1e-9
    assert simplicity_margin(params2, grid, avg) > 0


def test_recursive_basis_diagonalizes_b(params2, recursive):
    """⟨η|B(λ) = η_N ∏(λ/η_a − η_a/λ) ⟨η|"""
    assert recursive.gauge_fixed
    assert b_eigenrelation_residual(params2, recursive, LAMS) < 1e-9
    assert independence_ratio(recursive) > 1e-8


def test_direct_basis_agrees(params2, recursive):
    """직접 대각화 기저는 행별 스칼라를 제외하고 재귀 기저와 같다"""
    direct = sov_basis_direct(params2)
    assert basis_agreement(recursive, direct) < 1e-7


def test_actions_need_gauge(params2):
    """게이지 미고정 기저로는 작용 검증 불가"""
    direct = sov_basis_direct(params2)
    with pytest.raises(GaugeChoiceError):
        verify_actions(params2, direct)


def test_representation_after_regauge(params2):
    """A, D, Θ 작용과 C 의 det_q 일관성"""
    gauged, worst = regauge(params2, sov_basis_direct(params2))
    assert worst < 1e-7
    report = sov_representation_check(params2, gauged)
    assert "c_consistency" in report
    assert max(report.values()) < 1e-8


def test_single_site_basis(params1):
    """N = 1: B 는 λ 에 무관한 ⟨η_h| 고유값"""
    basis = site1_basis(params1.sites[0], params1.root)
    assert b_eigenrelation_residual(params1, basis, LAMS[:2]) < 1e-10


def test_single_site_degenerate(root):
    """𝕒^p + 𝕓^p = 0 이면 단일 site 기저 없음"""
    site = SiteParams.from_free(1.0, 1.0, 1.0, -1.0, 1.0, 1.0)
    with pytest.raises(RepresentationError):
        site1_basis(site, root)
    with pytest.raises(RepresentationError):
        compute_Z(ModelParams((site,), root))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
