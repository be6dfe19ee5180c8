# -*- coding: utf-8 -*-
"""
평균값 모듈

Yang–Baxter 생성원의 q-궤도 평균 𝒜(Λ), ℬ(Λ), 𝒞(Λ), 𝒟(Λ)와
2×2 평균 행렬 𝓜(Λ)의 고유값 Ω±(Λ)
"""

import cmath
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .algebra import LaurentPoly, Parity, geometric_grid, laurent_interpolate
from .exceptions import CentralityError, DomainError
from .model import ModelParams, SiteParams, monodromy, qdet_poly

logger = logging.getLogger(__name__)

_TAGS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class AverageMatrix:
    """Λ의 Laurent 다항식을 원소로 갖는 2×2 평균 행렬"""
    A: LaurentPoly
    B: LaurentPoly
    C: LaurentPoly
    D: LaurentPoly

    def __call__(self, big_lambda: complex) -> np.ndarray:
        return np.array([[self.A(big_lambda), self.B(big_lambda)],
                         [self.C(big_lambda), self.D(big_lambda)]], dtype=complex)

    def __matmul__(self, other: "AverageMatrix") -> "AverageMatrix":
        return AverageMatrix(
            self.A * other.A + self.B * other.C,
            self.A * other.B + self.B * other.D,
            self.C * other.A + self.D * other.C,
            self.C * other.B + self.D * other.D,
        )

    def entry(self, tag: str) -> LaurentPoly:
        return getattr(self, tag)

    def det(self) -> LaurentPoly:
        return self.A * self.D - self.B * self.C

    def trace(self) -> LaurentPoly:
        return self.A + self.D


def average_lax(site: SiteParams, root) -> AverageMatrix:
    """site n의 평균 Lax 행렬 𝓛_n(Λ)"""
    p = root.p
    s = root.half_p_sign
    return AverageMatrix(
        LaurentPoly({1: site.alpha ** p, -1: -site.beta ** p}, Parity.ODD),
        LaurentPoly({0: s * (site.a ** p + site.b ** p)}, Parity.EVEN),
        LaurentPoly({0: s * (site.c ** p + site.d ** p)}, Parity.EVEN),
        LaurentPoly({-1: site.gamma ** p, 1: -site.delta ** p}, Parity.ODD),
    )


def average_monodromy(params: ModelParams) -> AverageMatrix:
    """
    𝓜(Λ) = 𝓛_N(Λ) ⋯ 𝓛_1(Λ)

    Returns:
        AverageMatrix (𝒜, 𝒟 는 N의 패리티, ℬ, 𝒞 는 N−1의 패리티)
    """
    out = average_lax(params.sites[0], params.root)
    for site in params.sites[1:]:
        out = average_lax(site, params.root) @ out
    n = params.n_sites
    return AverageMatrix(
        LaurentPoly(out.A.coeffs, Parity.of(n)),
        LaurentPoly(out.B.coeffs, Parity.of(n - 1)),
        LaurentPoly(out.C.coeffs, Parity.of(n - 1)),
        LaurentPoly(out.D.coeffs, Parity.of(n)),
    )


def _orbit_product(params: ModelParams, tag: str, big_lambda: complex) -> Tuple[np.ndarray, float]:
    """(∏_k O(q^k λ), ∏_k ‖M(q^k λ)‖) : 둘째 값은 모노드로미 전체 크기"""
    if tag not in _TAGS:
        raise DomainError(f"generator tag must be one of {_TAGS}, got {tag}")
    if big_lambda == 0:
        raise DomainError("Λ must be nonzero")
    lam = cmath.exp(cmath.log(big_lambda) / params.p)
    index = _TAGS.index(tag)
    product = np.eye(params.dim, dtype=complex)
    scale = 1.0
    for z in params.root.orbit(lam):
        blocks = monodromy(params, z)
        product = blocks[index] @ product
        scale *= float(np.sqrt(sum(np.linalg.norm(b) ** 2 for b in blocks)))
    return product, scale


def _deviation(params: ModelParams, product: np.ndarray, scale: float) -> Tuple[complex, float]:
    """스칼라 부분과 ‖𝒪 − s·Id‖ / max(‖𝒪‖, ∏‖M‖)"""
    scalar = complex(np.trace(product) / params.dim)
    denom = max(np.linalg.norm(product), scale)
    if denom == 0:
        return scalar, 0.0
    return scalar, float(np.linalg.norm(product - scalar * np.eye(params.dim)) / denom)


def centrality_residual(params: ModelParams, tag: str, big_lambda: complex) -> float:
    """‖𝒪 − tr(𝒪)/dim · Id‖ 를 모노드로미 궤도 크기로 나눈 값 (ℬ ≡ 0 이면 반올림 수준)"""
    return _deviation(params, *_orbit_product(params, tag, big_lambda))[1]


def operator_average(params: ModelParams, tag: str, big_lambda: complex, tol: float = 1e-9) -> complex:
    """
    연산자 곱 ∏_{k=1}^p O(q^k λ) (λ^p = Λ) 의 스칼라 값

    Raises:
        CentralityError: 곱이 스칼라×항등이 아닌 경우
    """
    scalar, deviation = _deviation(params, *_orbit_product(params, tag, big_lambda))
    if deviation > tol:
        raise CentralityError(f"{tag}-average is not central (deviation {deviation:.2e})")
    return scalar


def omega_eigenvalues(avg: AverageMatrix, big_lambda: complex) -> Tuple[complex, complex]:
    """
    𝓜(Λ)의 두 고유값 (Ω₊, Ω₋)

    Ω₊ 는 𝒜(Λ)에 더 가까운 고유값, 같으면 편각이 작은 쪽.
    """
    if big_lambda == 0:
        raise DomainError("Λ must be nonzero")
    m = avg(big_lambda)
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = cmath.sqrt(tr * tr / 4 - det)
    e1, e2 = tr / 2 + disc, tr / 2 - disc
    d1, d2 = abs(e1 - m[0, 0]), abs(e2 - m[0, 0])
    if d1 < d2 or (d1 == d2 and cmath.phase(e1) <= cmath.phase(e2)):
        return complex(e1), complex(e2)
    return complex(e2), complex(e1)


def qdet_average(params: ModelParams) -> LaurentPoly:
    """∏_{i=1}^p det_q M(q^i λ) 를 Λ의 Laurent 다항식으로 (표본 보간)"""
    qdet = qdet_poly(params)
    degree = 2 * params.n_sites
    grid = geometric_grid(2 * degree + 3)
    samples = []
    for big_lambda in grid:
        lam = cmath.exp(cmath.log(big_lambda) / params.p)
        samples.append((big_lambda, complex(np.prod([qdet(z) for z in params.root.orbit(lam)]))))
    return laurent_interpolate(samples, degree, Parity.EVEN).poly


def det_contract_residual(params: ModelParams, avg: Optional[AverageMatrix] = None) -> float:
    """𝒜𝒟 − ℬ𝒞 와 q-궤도 양자 행렬식의 계수 비교 (상대)"""
    avg = avg or average_monodromy(params)
    lhs = avg.det()
    rhs = qdet_average(params)
    diff = lhs - rhs
    return diff.max_abs() / max(rhs.max_abs(), 1e-300)


def product_formula_residual(params: ModelParams, points: int = 7) -> float:
    """연산자 평균과 𝓛-곱 원소의 최대 상대 차이"""
    avg = average_monodromy(params)
    worst = 0.0
    for big_lambda in geometric_grid(points, 1.3, offset=0.21):
        for tag in _TAGS:
            exact = avg.entry(tag)(big_lambda)
            sampled = operator_average(params, tag, big_lambda)
            scale = max(abs(avg.A(big_lambda)), abs(avg.D(big_lambda)), 1e-300)
            worst = max(worst, abs(exact - sampled) / scale)
    return worst


def similarity_invariance_residual(params: ModelParams, big_lambda: complex, seed: int = 0) -> float:
    """양자공간 유사변환 S M S⁻¹ 후 평균값 불변성"""
    rng = np.random.default_rng(seed)
    dim = params.dim
    s = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, dim)) * rng.uniform(0.5, 2.0, dim))
    s_inv = np.diag(1 / np.diag(s))
    lam = cmath.exp(cmath.log(big_lambda) / params.p)
    worst = 0.0
    for index, tag in enumerate(_TAGS):
        product = np.eye(dim, dtype=complex)
        for z in params.root.orbit(lam):
            product = (s @ monodromy(params, z)[index] @ s_inv) @ product
        before = operator_average(params, tag, big_lambda)
        after = complex(np.trace(product) / dim)
        worst = max(worst, abs(before - after) / max(abs(before), 1.0))
    return worst


def average_table(params: ModelParams, big_lambda: complex) -> Dict[str, complex]:
    avg = average_monodromy(params)
    return {tag: complex(avg.entry(tag)(big_lambda)) for tag in _TAGS}
