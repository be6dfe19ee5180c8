# -*- coding: utf-8 -*-
"""
Laurent 다항식 및 단위근 모듈

복소 Laurent 다항식 연산, 1의 p제곱근 스칼라, 기하 격자 보간,
근 집합(p-string, 켤레 닫힘) 검사
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import COEFF_DROP_RTOL, GRID_DEFAULTS, ROOT_MATCH_RTOL
from .exceptions import ConditioningError, DomainError

logger = logging.getLogger(__name__)


class Parity(Enum):
    """Laurent 다항식 패리티"""
    EVEN = "even"
    ODD = "odd"
    NONE = "none"

    @classmethod
    def of(cls, n: int) -> "Parity":
        return cls.EVEN if n % 2 == 0 else cls.ODD

    def admits(self, exponent: int) -> bool:
        if self is Parity.NONE:
            return True
        return (exponent % 2 == 0) == (self is Parity.EVEN)


@dataclass(frozen=True)
class UnityRoot:
    """
    q = exp(-iπ p'/p), p = 2l+1, p' = 2l'

    power(x)는 q^x = exp(-iπ p' x / p)로 반정수 지수에도 같은 분기를 쓴다.
    """
    p: int
    p_prime: int

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0:
            raise DomainError(f"p must be odd and >= 3, got {self.p}")
        if self.p_prime < 2 or self.p_prime % 2 == 1:
            raise DomainError(f"p' must be even and >= 2, got {self.p_prime}")
        if math.gcd(self.p, self.p_prime) != 1:
            raise DomainError(f"gcd(p, p') must be 1, got p={self.p}, p'={self.p_prime}")

    @property
    def l(self) -> int:
        return (self.p - 1) // 2

    @property
    def l_prime(self) -> int:
        return self.p_prime // 2

    @property
    def q(self) -> complex:
        return self.power(1)

    @property
    def beta_squared(self) -> float:
        return self.p_prime / self.p

    def power(self, x: float) -> complex:
        return complex(np.exp(-1j * np.pi * self.p_prime * x / self.p))

    @property
    def half_p_sign(self) -> int:
        """q^{p/2} = (-1)^{l'}"""
        return -1 if self.l_prime % 2 else 1

    def orbit(self, lam: complex) -> np.ndarray:
        """(q λ, q² λ, …, q^p λ)"""
        return np.array([self.power(k) * lam for k in range(1, self.p + 1)])


def _prune(coeffs: Dict[int, complex], rtol: float) -> Dict[int, complex]:
    items = {int(e): complex(c) for e, c in coeffs.items() if c != 0}
    if not items:
        return {}
    cut = rtol * max(abs(c) for c in items.values())
    return {e: c for e, c in sorted(items.items()) if abs(c) > cut}


@dataclass(frozen=True)
class LaurentPoly:
    """복소 Laurent 다항식 Σ c_e λ^e"""
    coeffs: Dict[int, complex] = field(default_factory=dict)
    parity: Parity = Parity.NONE
    drop_rtol: float = COEFF_DROP_RTOL

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _prune(self.coeffs, self.drop_rtol))

    # ---- 생성자 ----
    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls({})

    @classmethod
    def monomial(cls, exponent: int, coeff: complex = 1.0) -> "LaurentPoly":
        return cls({exponent: coeff})

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0, low: int = 0) -> "LaurentPoly":
        """lead · λ^low · ∏ (λ - r)"""
        poly = np.poly(np.asarray(roots, dtype=complex)) if len(roots) else np.array([1.0 + 0j])
        n = len(poly) - 1
        return cls({low + n - i: lead * c for i, c in enumerate(poly)})

    # ---- 구조 ----
    @property
    def degree(self) -> int:
        return max((abs(e) for e in self.coeffs), default=0)

    @property
    def min_exp(self) -> int:
        return min(self.coeffs, default=0)

    @property
    def max_exp(self) -> int:
        return max(self.coeffs, default=0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, exponent: int) -> complex:
        return self.coeffs.get(exponent, 0j)

    def max_abs(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def vector(self, exponents: Iterable[int]) -> np.ndarray:
        return np.array([self.coefficient(e) for e in exponents], dtype=complex)

    def parity_leakage(self, parity: Optional[Parity] = None) -> float:
        """패리티에 맞지 않는 계수의 상대 크기"""
        parity = parity or self.parity
        scale = self.max_abs()
        if scale == 0 or parity is Parity.NONE:
            return 0.0
        bad = [abs(c) for e, c in self.coeffs.items() if not parity.admits(e)]
        return max(bad, default=0.0) / scale

    def project(self, parity: Parity) -> "LaurentPoly":
        return LaurentPoly({e: c for e, c in self.coeffs.items() if parity.admits(e)}, parity)

    # ---- 연산 ----
    def __call__(self, z):
        return laurent_eval(self, z)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({e: -c for e, c in self.coeffs.items()}, self.parity)

    def __add__(self, other) -> "LaurentPoly":
        other = _as_poly(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0j) + c
        parity = self.parity if self.parity == other.parity else Parity.NONE
        return LaurentPoly(out, parity)

    __radd__ = __add__

    def __sub__(self, other) -> "LaurentPoly":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return _as_poly(other) - self

    def __mul__(self, other) -> "LaurentPoly":
        if np.isscalar(other):
            return LaurentPoly({e: c * other for e, c in self.coeffs.items()}, self.parity)
        out: Dict[int, complex] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                out[e1 + e2] = out.get(e1 + e2, 0j) + c1 * c2
        return LaurentPoly(out, _product_parity(self.parity, other.parity))

    __rmul__ = __mul__

    def scale_argument(self, factor: complex) -> "LaurentPoly":
        """λ ↦ f(factor · λ)"""
        return LaurentPoly({e: c * factor ** e for e, c in self.coeffs.items()}, self.parity)

    def to_pairs(self, low: Optional[int] = None, high: Optional[int] = None) -> List[List[float]]:
        low = self.min_exp if low is None else low
        high = self.max_exp if high is None else high
        return [[float(c.real), float(c.imag)] for c in self.vector(range(low, high + 1))]

    def __repr__(self) -> str:
        terms = " + ".join(f"({c:.4g})λ^{e}" for e, c in self.coeffs.items()) or "0"
        return f"LaurentPoly[{self.parity.value}]({terms})"


def _as_poly(value) -> LaurentPoly:
    if isinstance(value, LaurentPoly):
        return value
    return LaurentPoly.monomial(0, complex(value))


def _product_parity(a: Parity, b: Parity) -> Parity:
    if Parity.NONE in (a, b):
        return Parity.NONE
    return Parity.EVEN if a == b else Parity.ODD


def laurent_eval(f: LaurentPoly, z):
    """
    Laurent 다항식 값 계산 (양/음 지수 Horner 분리)

    Args:
        f: LaurentPoly
        z: 0이 아닌 복소수 또는 배열

    Returns:
        f(z)

    Raises:
        DomainError: z = 0
    """
    z_arr = np.asarray(z, dtype=complex)
    if np.any(z_arr == 0):
        raise DomainError("Laurent polynomial evaluated at zero")
    if f.is_zero():
        out = np.zeros_like(z_arr)
        return out if out.ndim else complex(out)

    high = max(f.max_exp, 0)
    positive = [f.coefficient(e) for e in range(high, -1, -1)]
    value = np.polyval(positive, z_arr)
    low = min(f.min_exp, 0)
    if low < 0:
        negative = [f.coefficient(-e) for e in range(-low, 0, -1)]
        w = 1.0 / z_arr
        value = value + w * np.polyval(negative, w)
    return value if np.ndim(value) else complex(value)


def geometric_grid(count: int, radius: float = GRID_DEFAULTS["radius"], offset: float = 0.0) -> np.ndarray:
    """λ_j = ρ exp(2πi (j + offset) / M)"""
    j = np.arange(count) + offset
    return radius * np.exp(2j * np.pi * j / count)


@dataclass
class Interpolation:
    """보간 결과"""
    poly: LaurentPoly
    residual: float
    leakage: float
    condition: float


def fit_exponents(points: Sequence[complex], values: Sequence[complex], exponents: Sequence[int]):
    """
    주어진 지수 집합에 대한 최소제곱 계수 적합

    Returns:
        (계수 벡터, 최대 상대 잔차, 조건수)

    Raises:
        ConditioningError: 랭크 부족
    """
    z = np.asarray(points, dtype=complex)
    v = np.asarray(values, dtype=complex)
    if len(set(np.round(z, 14))) != len(z) or np.any(z == 0):
        raise ConditioningError("sample points must be distinct and nonzero")
    vander = z[:, None] ** np.asarray(exponents)[None, :]
    sv = np.linalg.svd(vander, compute_uv=False)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if len(z) < len(exponents) or sv[-1] <= sv[0] * 1e-13:
        raise ConditioningError("rank-deficient sample set", condition)
    coeffs, *_ = np.linalg.lstsq(vander, v, rcond=None)
    scale = max(float(np.max(np.abs(v))), 1e-300) if len(v) else 1.0
    residual = float(np.max(np.abs(vander @ coeffs - v))) / scale if np.any(v) else 0.0
    return coeffs, residual, condition


def laurent_interpolate(
    samples: Sequence[Tuple[complex, complex]],
    degree: int,
    parity: Parity = Parity.NONE,
) -> Interpolation:
    """
    Laurent 다항식 최소제곱 보간

    표본이 2·degree+1개 이상이면 전체 지수로 적합한 뒤 패리티 사영하고,
    그보다 적으면 패리티 지수만으로 적합한다.

    Args:
        samples: (점, 값) 목록
        degree: 최대 |지수|
        parity: 패리티 태그

    Returns:
        Interpolation (다항식, 최대 상대 잔차, 패리티 누설, 조건수)
    """
    points = [s[0] for s in samples]
    values = np.array([s[1] for s in samples], dtype=complex)
    full = list(range(-degree, degree + 1))
    if parity is Parity.NONE or len(samples) >= len(full):
        exponents = full
    else:
        exponents = [e for e in full if parity.admits(e)]

    coeffs, residual, condition = fit_exponents(points, values, exponents)
    poly = LaurentPoly(dict(zip(exponents, coeffs)))
    leakage = poly.parity_leakage(parity)
    if parity is not Parity.NONE:
        poly = poly.project(parity)
        fitted = laurent_eval(poly, np.asarray(points))
        scale = max(float(np.max(np.abs(values))), 1e-300)
        residual = float(np.max(np.abs(fitted - values))) / scale if np.any(values) else 0.0
    logger.debug(f"보간 degree={degree} parity={parity.value} residual={residual:.2e} cond={condition:.2e}")
    return Interpolation(poly, residual, leakage, condition)


def interpolate_function(func, degree: int, parity: Parity = Parity.NONE, count: Optional[int] = None,
                         radius: float = GRID_DEFAULTS["radius"]) -> Interpolation:
    """기하 격자 위에서 func(λ)를 샘플링해 보간"""
    count = count or 2 * degree + GRID_DEFAULTS["extra_points"]
    grid = geometric_grid(count, radius)
    return laurent_interpolate([(z, func(z)) for z in grid], degree, parity)


def poly_roots(f: LaurentPoly, polish: int = 3) -> List[complex]:
    """
    0이 아닌 근 계산 (λ^{-min} f 의 companion 행렬 고유값 + Newton 보정)

    Args:
        f: 0이 아닌 LaurentPoly
        polish: Newton 반복 횟수

    Returns:
        근 목록 (개수 = 지수 폭)
    """
    if f.is_zero():
        raise DomainError("roots of the zero polynomial")
    coeffs = f.vector(range(f.max_exp, f.min_exp - 1, -1))
    if len(coeffs) <= 1:
        return []
    roots = np.roots(coeffs)
    deriv = np.polyder(coeffs)
    polished = []
    for r in roots:
        for _ in range(polish):
            d = np.polyval(deriv, r)
            if d == 0:
                break
            step = np.polyval(coeffs, r) / d
            if not np.isfinite(step) or abs(step) > 0.1 * max(abs(r), 1.0):
                break
            r = r - step
        polished.append(complex(r))
    return sorted(polished, key=lambda z: (round(abs(z), 9), round(float(np.angle(z)), 9)))


def root_distance(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(a), 1.0)


def match_roots(a: Sequence[complex], b: Sequence[complex]) -> Tuple[List[Tuple[int, int]], float]:
    """
    두 근 다중집합의 최적 짝짓기

    Returns:
        (짝 목록, 최대 상대 거리). 크기가 다르면 거리는 inf
    """
    if len(a) != len(b):
        return [], math.inf
    if not a:
        return [], 0.0
    cost = np.array([[root_distance(x, y) for y in b] for x in a])
    rows, cols = linear_sum_assignment(cost)
    pairs = list(zip(rows.tolist(), cols.tolist()))
    return pairs, float(cost[rows, cols].max())


@dataclass
class RootSetReport:
    """근 집합 검사 결과"""
    p_string_free: bool
    epsilon_self_adjoint: bool
    conjugation_mismatch: float
    string_centers: List[complex] = field(default_factory=list)


def root_set_checks(roots: Sequence[complex], root: UnityRoot, epsilon: int,
                    rtol: float = ROOT_MATCH_RTOL) -> RootSetReport:
    """
    p-string 부재 및 λ → ε·conj(λ) 불변성 검사

    Args:
        roots: 0이 아닌 근 목록
        root: UnityRoot
        epsilon: ±1
        rtol: 근 매칭 상대 허용오차

    Returns:
        RootSetReport
    """
    roots = [complex(r) for r in roots]
    centers = []
    for r in roots:
        shifted = [root.power(j) * r for j in range(1, root.p)]
        if all(any(root_distance(s, x) <= rtol for x in roots) for s in shifted):
            if not any(root_distance(r, c) <= rtol for c in centers):
                centers.append(r)

    _, mismatch = match_roots(roots, [epsilon * r.conjugate() for r in roots])
    return RootSetReport(
        p_string_free=not centers,
        epsilon_self_adjoint=mismatch <= rtol,
        conjugation_mismatch=mismatch,
        string_centers=centers,
    )
