# -*- coding: utf-8 -*-
"""
Weyl 표현 / Θ-섹터 테스트
"""

import numpy as np
import pytest

from tau2lab.exceptions import DomainError
from tau2lab.weyl import WeylSpace, relative_commutator, weyl_space


def test_weyl_relations(root):
    """u_n v_m = q^{δ_nm} v_m u_n"""
    space = WeylSpace(root, 2)
    assert space.weyl_residual() < 1e-12


def test_digits_least_significant_first(root):
    """site 1 이 최하위 자릿수"""
    space = WeylSpace(root, 2)
    assert space.digits(1) == (1, 0)
    assert space.digits(3) == (0, 1)
    assert space.index((2, 1)) == 5


def test_index_digit_count(root):
    """자릿수 개수 불일치"""
    with pytest.raises(DomainError):
        WeylSpace(root, 2).index((1,))


def test_site_out_of_range(root):
    with pytest.raises(DomainError):
        WeylSpace(root, 2).site_u(3)
    with pytest.raises(DomainError):
        WeylSpace(root, 0)


def test_theta_sectors(root):
    """섹터 차원 p^{N−1}, Θ 고유값 q^k"""
    space = weyl_space(3, 2, 2)
    theta = space.theta_op()
    bases = space.theta_sector_bases()
    assert sum(b.shape[1] for _, b in bases) == space.dim
    for k, basis in bases:
        assert basis.shape[1] == 3
        assert np.linalg.norm(theta @ basis - root.power(k) * basis) < 1e-12


def test_theta_is_cyclic(root):
    """Θ^p = 1"""
    theta = WeylSpace(root, 2).theta_op()
    assert np.allclose(np.linalg.matrix_power(theta, 3), np.eye(9))


def test_relative_commutator_twist(root):
    space = WeylSpace(root, 1)
    assert relative_commutator(space.site_u(1), space.site_v(1), root.q) < 1e-12
    assert relative_commutator(space.site_u(1), space.site_v(1)) > 0.1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
