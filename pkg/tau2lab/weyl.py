# -*- coding: utf-8 -*-
"""
Weyl 대수 순환 표현 모듈

각 site의 p차원 Weyl 쌍 (u_n, v_n)과 N-site 텐서곱 위의 밀집 연산자,
Θ-전하와 그 고유 사영 연산자
"""

import logging
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np
from scipy.linalg import orth

from .algebra import UnityRoot
from .exceptions import DomainError

logger = logging.getLogger(__name__)


def local_u(root: UnityRoot) -> np.ndarray:
    """u|k⟩ = q^{2k}|k⟩"""
    return np.diag([root.power(2 * k) for k in range(root.p)])


def local_v(root: UnityRoot) -> np.ndarray:
    """v|z⟩ = |qz⟩, 즉 |k⟩ → |k + l + 1 mod p⟩"""
    p = root.p
    shift = root.l + 1
    mat = np.zeros((p, p), dtype=complex)
    for k in range(p):
        mat[(k + shift) % p, k] = 1.0
    return mat


def embed(local: np.ndarray, n: int, n_sites: int) -> np.ndarray:
    """site n (1부터, 최하위 자릿수)에 local 연산자 삽입"""
    p = local.shape[0]
    left = np.eye(p ** (n_sites - n))
    right = np.eye(p ** (n - 1))
    return np.kron(np.kron(left, local), right)


def relative_commutator(a: np.ndarray, b: np.ndarray, twist: complex = 1.0) -> float:
    """‖AB − twist·BA‖ / (‖A‖‖B‖)"""
    scale = np.linalg.norm(a) * np.linalg.norm(b)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(a @ b - twist * (b @ a)) / scale)


class WeylSpace:
    """p^N 차원 순환 표현 공간"""

    def __init__(self, root: UnityRoot, n_sites: int):
        if n_sites < 1:
            raise DomainError(f"number of sites must be >= 1, got {n_sites}")
        self.root = root
        self.n_sites = n_sites
        self.dim = root.p ** n_sites
        self._u = [embed(local_u(root), n, n_sites) for n in range(1, n_sites + 1)]
        self._v = [embed(local_v(root), n, n_sites) for n in range(1, n_sites + 1)]

    # ---- StateIndex ----
    def digits(self, index: int) -> Tuple[int, ...]:
        p = self.root.p
        return tuple((index // p ** i) % p for i in range(self.n_sites))

    def index(self, digits: Sequence[int]) -> int:
        p = self.root.p
        if len(digits) != self.n_sites:
            raise DomainError(f"expected {self.n_sites} digits, got {len(digits)}")
        return sum((int(k) % p) * p ** i for i, k in enumerate(digits))

    # ---- 연산자 ----
    def _check_site(self, n: int):
        if not 1 <= n <= self.n_sites:
            raise DomainError(f"site {n} out of range 1..{self.n_sites}")

    def site_u(self, n: int) -> np.ndarray:
        self._check_site(n)
        return self._u[n - 1]

    def site_v(self, n: int) -> np.ndarray:
        self._check_site(n)
        return self._v[n - 1]

    def site_v_inv(self, n: int) -> np.ndarray:
        # 순열 행렬
        return self.site_v(n).T

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def theta_op(self) -> np.ndarray:
        """Θ = ∏_n v_n"""
        theta = self.identity()
        for v in self._v:
            theta = v @ theta
        return theta

    def theta_eigenprojectors(self) -> List[Tuple[int, np.ndarray]]:
        """P_k = (1/p) Σ_j (q^{-k} Θ)^j,  Θ P_k = q^k P_k"""
        p = self.root.p
        theta = self.theta_op()
        powers = [self.identity()]
        for _ in range(1, p):
            powers.append(theta @ powers[-1])
        projectors = []
        for k in range(p):
            proj = sum(self.root.power(-k * j) * powers[j] for j in range(p)) / p
            projectors.append((k, proj))
        return projectors

    def theta_sector_bases(self) -> List[Tuple[int, np.ndarray]]:
        """각 Θ-섹터의 정규직교 기저 (열벡터)"""
        return [(k, orth(proj)) for k, proj in self.theta_eigenprojectors()]

    def weyl_residual(self) -> float:
        """u_n v_m = q^{δ_nm} v_m u_n 의 최대 잔차"""
        worst = 0.0
        for n in range(1, self.n_sites + 1):
            for m in range(1, self.n_sites + 1):
                twist = self.root.q if n == m else 1.0
                u, v = self.site_u(n), self.site_v(m)
                worst = max(worst, float(np.max(np.abs(u @ v - twist * (v @ u)))))
        return worst


@lru_cache(maxsize=16)
def weyl_space(p: int, p_prime: int, n_sites: int) -> WeylSpace:
    """(p, p', N) 별 공유 WeylSpace"""
    return WeylSpace(UnityRoot(p, p_prime), n_sites)
