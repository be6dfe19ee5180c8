# -*- coding: utf-8 -*-
"""
SOV (변수분리) 기저 모듈

B(λ)의 왼쪽 고유기저 재귀 구성, 게이지 불변량 Z_r 결정,
a^(SOV)/d^(SOV) 게이지 선택, A, B, D 의 분리 작용 검증
"""

import cmath
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eig
from scipy.optimize import linear_sum_assignment

from .algebra import LaurentPoly, Parity, UnityRoot, match_roots, poly_roots
from .averages import AverageMatrix, average_monodromy
from .config import DIRECT_RETRIES
from .exceptions import DegeneracyError, GaugeChoiceError, RepresentationError
from .model import ModelParams, SiteParams, monodromy, qdet_poly

logger = logging.getLogger(__name__)


def _principal_root(value: complex, p: int) -> complex:
    if value == 0:
        return 0j
    return cmath.exp(cmath.log(value) / p)


def _upper_representative(z: complex) -> complex:
    """±z 중 편각이 [0, π) 에 있는 쪽"""
    angle = cmath.phase(z)
    return z if -1e-12 <= angle < np.pi - 1e-12 else -z


@dataclass
class SOVGrid:
    """η_a^(k) = q^k η_a^(0) 격자와 Z_1..Z_{N−1}, Z_N"""
    root: UnityRoot
    eta0: np.ndarray
    Z: np.ndarray

    @property
    def n_sites(self) -> int:
        return len(self.eta0)

    def eta(self, a: int, k: int) -> complex:
        """a는 0부터 (a = N−1 이 η_N)"""
        return self.root.power(k) * self.eta0[a]

    def etas(self, digits: Sequence[int]) -> np.ndarray:
        return np.array([self.eta(a, k) for a, k in enumerate(digits)])

    def b_eigenvalue(self, digits: Sequence[int], lam: complex) -> complex:
        """η_N ∏_{a<N} (λ/η_a − η_a/λ)"""
        etas = self.etas(digits)
        value = etas[-1]
        for e in etas[:-1]:
            value *= lam / e - e / lam
        return complex(value)

    def tuples(self) -> List[Tuple[int, ...]]:
        """StateIndex 순서 (자릿수 1이 최하위)"""
        p, n = self.root.p, self.n_sites
        return [tuple((i // p ** a) % p for a in range(n)) for i in range(p ** n)]

    def index(self, digits: Sequence[int]) -> int:
        p = self.root.p
        return sum((int(k) % p) * p ** a for a, k in enumerate(digits))

    def min_separation(self) -> float:
        zs = self.Z[:-1]
        worst = np.inf
        for i in range(len(zs)):
            for j in range(i + 1, len(zs)):
                worst = min(worst, abs(zs[i] - zs[j]) / max(abs(zs[i]), 1.0))
        return float(worst)


@dataclass
class SOVCoefficients:
    """게이지 고정 계수 aSOV(r, k), dSOV(r, k) (r < N−1, k = 0..p−1)"""
    a_gauge: LaurentPoly
    d_gauge: LaurentPoly
    rho_a: np.ndarray
    rho_d: np.ndarray
    omega: np.ndarray
    a_sov: np.ndarray
    d_sov: np.ndarray
    branch_deviation: float = 0.0


@dataclass
class SOVBasis:
    """왼쪽 B-고유기저 (행 = ⟨η|, StateIndex 순서)"""
    grid: SOVGrid
    rows: np.ndarray
    coeffs: Optional[SOVCoefficients] = None
    kernel: Optional[np.ndarray] = None
    gauge_fixed: bool = False
    label_cost: float = 0.0

    def row(self, digits: Sequence[int]) -> np.ndarray:
        return self.rows[self.grid.index(digits)]

    def normalized_rows(self) -> np.ndarray:
        out = self.rows.copy()
        for i, r in enumerate(out):
            out[i] = r / r[np.argmax(np.abs(r))]
        return out


# ====================
# Z 결정
# ====================

def compute_Z(params: ModelParams, split: int = 1, avg: Optional[AverageMatrix] = None) -> SOVGrid:
    """
    ℬ(Λ) = Z_N ∏_a (Λ/Z_a − Z_a/Λ) 의 영점으로부터 SOV 격자 결정

    ℬ 는 앞 split개 site 와 나머지 부분사슬 평균의 곱으로 조립한다.

    Args:
        params: ModelParams
        split: 앞쪽 부분사슬 길이 M (1 ≤ M ≤ N−1)
        avg: 미리 계산된 평균 행렬 (교차검증용)

    Returns:
        SOVGrid

    Raises:
        DegeneracyError: Z_a 중복
    """
    root = params.root
    n = params.n_sites
    if n == 1:
        z_n = root.half_p_sign * (params.sites[0].a ** root.p + params.sites[0].b ** root.p)
        if z_n == 0:
            raise RepresentationError("𝕒^p + 𝕓^p = 0: B is nilpotent on the single site")
        return SOVGrid(root, np.array([_principal_root(z_n, root.p)]), np.array([z_n]))

    if not 1 <= split <= n - 1:
        raise DegeneracyError(f"split must lie in 1..{n - 1}, got {split}")
    head = average_monodromy(params.subchain(1, split))
    tail = average_monodromy(params.subchain(split + 1, n))
    b_poly = tail.A * head.B + tail.B * head.D
    b_poly = LaurentPoly(b_poly.coeffs, Parity.of(n - 1))
    if avg is not None:
        mismatch = (b_poly - avg.B).max_abs() / max(avg.B.max_abs(), 1e-300)
        logger.debug(f"split ℬ vs full ℬ: {mismatch:.2e}")

    roots = poly_roots(b_poly)
    if len(roots) != 2 * (n - 1):
        raise DegeneracyError(f"ℬ(Λ) has {len(roots)} nonzero roots, expected {2 * (n - 1)}")
    pairs, _ = match_roots(roots, [-r for r in roots])
    partner = dict(pairs)
    used, reps = set(), []
    for i in range(len(roots)):
        if i in used:
            continue
        j = partner[i]
        used.update((i, j))
        reps.append(_upper_representative((roots[i] - roots[j]) / 2))
    if len(reps) != n - 1:
        raise DegeneracyError("ℬ(Λ) zeros do not come in ± pairs")
    reps.sort(key=lambda z: (round(abs(z), 10), round(cmath.phase(z), 10)))

    lead = b_poly.coefficient(n - 1)
    z_n = lead * complex(np.prod(reps))
    zs = np.array(reps + [z_n], dtype=complex)
    eta0 = np.array([_principal_root(z, root.p) for z in zs])
    grid = SOVGrid(root, eta0, zs)
    if n > 2 and grid.min_separation() < 1e-6:
        raise DegeneracyError(f"Z_a not distinct (separation {grid.min_separation():.2e})")
    logger.debug(f"Z = {zs}")
    return grid


# ====================
# 게이지 계수
# ====================

def gauge_polynomials(params: ModelParams) -> Tuple[LaurentPoly, LaurentPoly]:
    """𝖺(λ)𝖽(λ/q) = det_q M(λ) 를 만족하는 (𝖺, 𝖽)"""
    q = params.root.q
    a_poly = LaurentPoly.monomial(0, 1.0)
    d_poly = LaurentPoly.monomial(0, 1.0)
    for site, (k, mu_p, mu_m) in zip(params.sites, params.k_mu()):
        s = cmath.sqrt(site.beta * site.alpha)
        a_poly = a_poly * LaurentPoly({1: s / mu_p, -1: -s * mu_p})
        d_poly = d_poly * LaurentPoly({1: k / s * q / mu_m, -1: -k / s * mu_m / q})
    parity = Parity.of(params.n_sites)
    return LaurentPoly(a_poly.coeffs, parity), LaurentPoly(d_poly.coeffs, parity)


def sov_coefficients(params: ModelParams, grid: SOVGrid, avg: Optional[AverageMatrix] = None) -> SOVCoefficients:
    """
    aSOV(η) = ρ_A 𝖺(η), dSOV(η) = ω ρ_D 𝖽(η)

    ρ_A, ρ_D 는 q-궤도마다 한 번 계산한 주분기 p제곱근,
    ω 는 ρ_A ρ_D ω = 1 (즉 det_q 조건) 을 맞추는 1의 p제곱근.

    Raises:
        GaugeChoiceError: 분모가 0인 경우
    """
    avg = avg or average_monodromy(params)
    root = params.root
    p = root.p
    a_poly, d_poly = gauge_polynomials(params)
    n_zeros = grid.n_sites - 1
    rho_a = np.zeros(n_zeros, dtype=complex)
    rho_d = np.zeros(n_zeros, dtype=complex)
    omega = np.ones(n_zeros, dtype=complex)
    a_sov = np.zeros((n_zeros, p), dtype=complex)
    d_sov = np.zeros((n_zeros, p), dtype=complex)
    worst = 0.0
    for r in range(n_zeros):
        orbit = [grid.eta(r, k) for k in range(p)]
        a_vals = np.array([a_poly(x) for x in orbit])
        d_vals = np.array([d_poly(x) for x in orbit])
        a_avg, d_avg = avg.A(grid.Z[r]), avg.D(grid.Z[r])
        if np.prod(a_vals) == 0 or np.prod(d_vals) == 0 or a_avg == 0 or d_avg == 0:
            raise GaugeChoiceError(f"vanishing gauge denominator on orbit {r}")
        rho_a[r] = _principal_root(a_avg / np.prod(a_vals), p)
        rho_d[r] = _principal_root(d_avg / np.prod(d_vals), p)
        candidates = [root.power(2 * j) for j in range(p)]
        deviations = [abs(rho_a[r] * rho_d[r] * w - 1) for w in candidates]
        best = int(np.argmin(deviations))
        omega[r] = candidates[best]
        worst = max(worst, deviations[best])
        a_sov[r] = rho_a[r] * a_vals
        d_sov[r] = omega[r] * rho_d[r] * d_vals
    if worst > 1e-6:
        logger.warning(f"⚠️ dSOV 분기 정렬 편차 {worst:.2e}")
    return SOVCoefficients(a_poly, d_poly, rho_a, rho_d, omega, a_sov, d_sov, worst)


def coefficient_residuals(params: ModelParams, grid: SOVGrid, coeffs: SOVCoefficients,
                          avg: Optional[AverageMatrix] = None) -> Dict[str, float]:
    """det_q 조건 aSOV(η)dSOV(η/q) = det_q M(η) 와 궤도곱 = 𝒜(Z), 𝒟(Z)"""
    avg = avg or average_monodromy(params)
    qdet = qdet_poly(params)
    p = params.p
    qdet_worst, avg_worst = 0.0, 0.0
    for r in range(grid.n_sites - 1):
        for k in range(p):
            value = qdet(grid.eta(r, k))
            got = coeffs.a_sov[r, k] * coeffs.d_sov[r, (k - 1) % p]
            qdet_worst = max(qdet_worst, abs(got - value) / max(abs(value), 1e-300))
        a_avg, d_avg = avg.A(grid.Z[r]), avg.D(grid.Z[r])
        avg_worst = max(avg_worst,
                        abs(np.prod(coeffs.a_sov[r]) - a_avg) / abs(a_avg),
                        abs(np.prod(coeffs.d_sov[r]) - d_avg) / abs(d_avg))
    return {"sov_qdet": qdet_worst, "sov_average": avg_worst}


# ====================
# N = 1 기저
# ====================

def site1_basis(site: SiteParams, root: UnityRoot, eta0: Optional[complex] = None) -> SOVBasis:
    """
    단일 site SOV 기저

    v-고유 covector ⟨e_k| (성분 z^k) 위에서
    ⟨η_h| = Σ_k c_k(h) ⟨e_k|,
    c_k(h) = ∏_{r=1}^{k} q^{−(h+1/2)} (q^{r−1/2}𝕒 + q^{−(r−1/2)}𝕓) / (𝕒^p + 𝕓^p)^{1/p},
    η_h = q^h · q^{1/2}(𝕒^p + 𝕓^p)^{1/p}. 이 정규화에서 ⟨η_h|v = ⟨η_{h−1}|.

    Args:
        site: SiteParams
        root: UnityRoot
        eta0: 기준 η^(0) (주어지면 같은 q-궤도 안에서 행 번호를 맞춘다)

    Raises:
        RepresentationError: 𝕒^p + 𝕓^p = 0
    """
    p = root.p
    total = site.a ** p + site.b ** p
    if abs(total) <= 1e-14 * max(abs(site.a) ** p, abs(site.b) ** p):
        raise RepresentationError("degenerate single-site representation: 𝕒^p + 𝕓^p = 0")
    rho = _principal_root(total, p)
    eta_ref = root.power(0.5) * rho
    shift = 0
    if eta0 is not None:
        ratios = [abs(root.power(h) * eta_ref - eta0) for h in range(p)]
        shift = int(np.argmin(ratios))
        if ratios[shift] > 1e-8 * abs(eta0):
            raise RepresentationError("η^(0) is not on the single-site B-spectrum orbit")
    else:
        eta0 = eta_ref

    # ⟨e_k| 의 u-기저 성분: z_j^k = q^{2jk}
    e_basis = np.array([[root.power(2 * j * k) for j in range(p)] for k in range(p)])
    rows = np.zeros((p, p), dtype=complex)
    for h in range(p):
        hh = h + shift
        c = np.ones(p, dtype=complex)
        for k in range(1, p):
            ratio = root.power(-(hh + 0.5)) * (root.power(k - 0.5) * site.a + root.power(-(k - 0.5)) * site.b) / rho
            c[k] = c[k - 1] * ratio
        rows[h] = c @ e_basis
    z = root.half_p_sign * total
    grid = SOVGrid(root, np.array([eta0]), np.array([z]))
    return SOVBasis(grid, rows, gauge_fixed=True)


def site1_cyclic_closure(site: SiteParams, root: UnityRoot, h: int = 0) -> float:
    """c 계수 비의 p-곱이 1 인지 (주기적 정의 가능성)"""
    p = root.p
    rho = _principal_root(site.a ** p + site.b ** p, p)
    prod = 1.0 + 0j
    for k in range(1, p + 1):
        prod *= root.power(-(h + 0.5)) * (root.power(k - 0.5) * site.a + root.power(-(k - 0.5)) * site.b) / rho
    return abs(prod - 1)


# ====================
# 재귀 기저
# ====================

def _left_null_vector(mats: Sequence[np.ndarray]) -> Tuple[np.ndarray, float]:
    """x [M_1 M_2 …] = 0 의 최소 특이 방향과 (σ_min/σ_max)"""
    stacked = np.hstack(mats)
    u, s, _ = np.linalg.svd(stacked)
    vec = u[:, -1].conj()
    gap = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    return vec, gap


def _generate_rows(params: ModelParams, grid: SOVGrid, coeffs: SOVCoefficients,
                   seed_row: np.ndarray) -> np.ndarray:
    """η-재귀 ⟨q^{δ_a}η| = ⟨η|D(η_a)/dSOV(η_a), ⟨q^{δ_N}η| = ⟨η|Θ⁻¹ 로 전 행 생성"""
    p, n = params.p, params.n_sites
    theta_inv = params.space.theta_op().T
    d_cache: Dict[Tuple[int, int], np.ndarray] = {}

    def d_op(a, k):
        if (a, k) not in d_cache:
            d_cache[(a, k)] = monodromy(params, grid.eta(a, k))[3]
        return d_cache[(a, k)]

    rows = np.zeros((p ** n, p ** n), dtype=complex)
    rows[0] = seed_row
    for digits in grid.tuples()[1:]:
        idx = grid.index(digits)
        for a, k in enumerate(digits):
            if k == 0:
                continue
            prev = list(digits)
            prev[a] = k - 1
            source = rows[grid.index(prev)]
            if a < n - 1:
                rows[idx] = source @ d_op(a, k - 1) / coeffs.d_sov[a, k - 1]
            else:
                rows[idx] = source @ theta_inv
            break
    return rows


def sov_basis_recursive(params: ModelParams, avg: Optional[AverageMatrix] = None) -> SOVBasis:
    """
    site N 을 떼어내는 재귀로 게이지 고정 SOV 기저 구성

    부분사슬(1..N−1) 기저와 site N 기저의 곱기저에서 커널 K(η|χ₂, χ₁) 의
    (0,…,0) 행을 χ-영점과 일반점에서의 B-고유방정식 공통 영공간으로 정하고,
    나머지 행은 D(η_a), Θ⁻¹ 재귀로 생성한다.

    Returns:
        SOVBasis (gauge_fixed=True, kernel = 곱기저 좌표)
    """
    n = params.n_sites
    if n == 1:
        grid = compute_Z(params)
        return site1_basis(params.sites[0], params.root, grid.eta0[0])

    avg = avg or average_monodromy(params)
    grid = compute_Z(params, avg=avg)
    coeffs = sov_coefficients(params, grid, avg)

    rest = sov_basis_recursive(params.subchain(1, n - 1))
    last = site1_basis(params.sites[-1], params.root)
    prod_basis = np.kron(last.rows, rest.rows)
    prod_inv = np.linalg.inv(prod_basis)

    zero = tuple([0] * n)
    chi_points = [last.grid.eta(0, 0)] + [rest.grid.eta(a, 0) for a in range(rest.grid.n_sites - 1)]
    generic = [1.13 * cmath.exp(0.61j * j + 0.2j) for j in range(n + 1)]
    mats = []
    for lam in chi_points + generic:
        b_op = monodromy(params, lam)[1]
        b_prod = prod_basis @ b_op @ prod_inv
        mats.append(b_prod - grid.b_eigenvalue(zero, lam) * np.eye(params.dim))
    kernel_seed, ratio = _left_null_vector(mats)
    if ratio > 1e-6:
        raise DegeneracyError(f"no common left null vector for the seed row (σ ratio {ratio:.2e})")
    seed = kernel_seed @ prod_basis
    seed = seed / seed[np.argmax(np.abs(seed))]

    rows = _generate_rows(params, grid, coeffs, seed)
    kernel = rows @ prod_inv
    logger.debug(f"재귀 SOV 기저 N={n}, seed σ ratio={ratio:.2e}")
    return SOVBasis(grid, rows, coeffs, kernel=kernel, gauge_fixed=True)


# ====================
# 직접 기저
# ====================

def sov_basis_direct(params: ModelParams, lam_star: complex = 0.83 + 0.41j,
                     avg: Optional[AverageMatrix] = None) -> SOVBasis:
    """
    B(λ*) 왼쪽 대각화 후 η-튜플 라벨링

    각 고유 covector 의 고유값 함수를 격자에서 평가해 예측식
    η_N ∏ (λ/η_a − η_a/λ) 와 최적 할당으로 짝짓는다.

    Raises:
        DegeneracyError: 재시도 후에도 고유값 충돌
    """
    avg = avg or average_monodromy(params)
    grid = compute_Z(params, avg=avg)
    dim = params.dim
    lam = lam_star
    for attempt in range(DIRECT_RETRIES):
        b_op = monodromy(params, lam)[1]
        w, vl = eig(b_op, left=True, right=False)
        gaps = np.abs(w[:, None] - w[None, :])
        np.fill_diagonal(gaps, np.inf)
        if np.min(gaps) > 1e-8 * max(np.max(np.abs(w)), 1e-300):
            break
        logger.warning(f"⚠️ B(λ*) 고유값 충돌, λ* 재선택 ({attempt + 1}/{DIRECT_RETRIES})")
        lam = lam * 1.07 * cmath.exp(0.37j)
    else:
        raise DegeneracyError("B(λ*) spectrum not simple after retries")

    rows = vl.T.conj()
    points = [1.21 * cmath.exp(1j * (0.3 + 1.1 * j)) for j in range(3)]
    b_samples = [monodromy(params, z)[1] for z in points]
    measured = np.array([[(r @ b @ r.conj()) / (r @ r.conj()) for b in b_samples] for r in rows])
    tuples = grid.tuples()
    predicted = np.array([[grid.b_eigenvalue(t, z) for z in points] for t in tuples])
    scale = max(np.max(np.abs(predicted)), 1e-300)
    cost = np.array([[np.max(np.abs(m - pr)) / scale for pr in predicted] for m in measured])
    row_ind, col_ind = linear_sum_assignment(cost)
    ordered = np.zeros_like(rows)
    for i, j in zip(row_ind, col_ind):
        ordered[j] = rows[i] / rows[i][np.argmax(np.abs(rows[i]))]
    label_cost = float(cost[row_ind, col_ind].max())
    if label_cost > 1e-6:
        logger.warning(f"⚠️ 직접 기저 라벨 비용 {label_cost:.2e}")
    return SOVBasis(grid, ordered, sov_coefficients(params, grid, avg), label_cost=label_cost)


def regauge(params: ModelParams, basis: SOVBasis) -> Tuple[SOVBasis, float]:
    """
    행별 스칼라를 η-재귀로 다시 맞춰 게이지 고정 기저로 변환

    Returns:
        (게이지 고정 SOVBasis, 재귀 예측과의 최대 비례 잔차)
    """
    grid, coeffs = basis.grid, basis.coeffs
    generated = _generate_rows(params, grid, coeffs, basis.rows[0])
    fixed = basis.rows.copy()
    worst = 0.0
    for i, (row, target) in enumerate(zip(basis.rows, generated)):
        c = (row.conj() @ target) / (row.conj() @ row)
        fixed[i] = c * row
        worst = max(worst, float(np.linalg.norm(target - fixed[i]) / np.linalg.norm(target)))
    return SOVBasis(grid, fixed, coeffs, gauge_fixed=True, label_cost=basis.label_cost), worst


# ====================
# 검증
# ====================

def b_eigenrelation_residual(params: ModelParams, basis: SOVBasis, lams: Sequence[complex]) -> float:
    worst = 0.0
    tuples = basis.grid.tuples()
    for lam in lams:
        b_op = monodromy(params, lam)[1]
        scale = np.linalg.norm(b_op, 2)
        acted = basis.rows @ b_op
        for i, t in enumerate(tuples):
            expected = basis.grid.b_eigenvalue(t, lam) * basis.rows[i]
            worst = max(worst, float(np.linalg.norm(acted[i] - expected) / (np.linalg.norm(basis.rows[i]) * scale)))
    return worst


def independence_ratio(basis: SOVBasis) -> float:
    s = np.linalg.svd(basis.normalized_rows(), compute_uv=False)
    return float(s[-1] / s[0])


def basis_agreement(a: SOVBasis, b: SOVBasis) -> float:
    """행별 스칼라 자유도를 제외한 두 기저의 최대 차이"""
    worst = 0.0
    for ra, rb in zip(a.rows, b.rows):
        c = (rb.conj() @ ra) / (rb.conj() @ rb)
        worst = max(worst, float(np.linalg.norm(ra - c * rb) / np.linalg.norm(ra)))
    return worst


def _proportionality(v: np.ndarray, w: np.ndarray) -> Tuple[complex, float]:
    """v ≈ c w 의 (c, 상대 잔차)"""
    c = (w.conj() @ v) / (w.conj() @ w)
    return complex(c), float(np.linalg.norm(v - c * w) / max(np.linalg.norm(v), 1e-300))


def _lagrange(etas: np.ndarray, a: int, lam: complex) -> complex:
    value = 1.0 + 0j
    for b, e in enumerate(etas):
        if b != a:
            value *= (lam / e - e / lam) / (etas[a] / e - e / etas[a])
    return value


def verify_actions(params: ModelParams, basis: SOVBasis,
                   off_grid: Sequence[complex] = (0.71 + 0.52j, -1.3 + 0.4j, 0.2 - 1.6j)) -> Dict[str, float]:
    """
    SOV 기저에서 A, D, Θ 작용 검증

    Returns:
        검사 이름 → 잔차
    """
    if not basis.gauge_fixed:
        raise GaugeChoiceError("verify_actions requires a gauge-fixed basis (use regauge)")
    grid, coeffs, rows = basis.grid, basis.coeffs, basis.rows
    p, n = params.p, params.n_sites
    tuples = grid.tuples()
    report = {"a_action": 0.0, "d_action": 0.0, "a_orbit": 0.0, "d_orbit": 0.0,
              "interpolation": 0.0, "theta_shift": 0.0}
    avg = average_monodromy(params)

    theta = params.space.theta_op()
    for i, t in enumerate(tuples):
        down = list(t)
        down[-1] = (t[-1] - 1) % p
        _, res = _proportionality(rows[i] @ theta, rows[grid.index(down)])
        report["theta_shift"] = max(report["theta_shift"], res)

    for a in range(n - 1):
        emp_a = np.zeros(p, dtype=complex)
        emp_d = np.zeros(p, dtype=complex)
        for k in range(p):
            a_op, _, _, d_op = monodromy(params, grid.eta(a, k))
            for i, t in enumerate(tuples):
                if t[a] != k:
                    continue
                lower, upper = list(t), list(t)
                lower[a] = (k - 1) % p
                upper[a] = (k + 1) % p
                ca, ra = _proportionality(rows[i] @ a_op, rows[grid.index(lower)])
                cd, rd = _proportionality(rows[i] @ d_op, rows[grid.index(upper)])
                report["a_action"] = max(report["a_action"], ra)
                report["d_action"] = max(report["d_action"], rd)
                emp_a[k], emp_d[k] = ca, cd
        report["a_orbit"] = max(report["a_orbit"], abs(np.prod(emp_a) - avg.A(grid.Z[a])) / abs(avg.A(grid.Z[a])))
        report["d_orbit"] = max(report["d_orbit"], abs(np.prod(emp_d) - avg.D(grid.Z[a])) / abs(avg.D(grid.Z[a])))

    if coeffs is not None:
        report["interpolation"] = interpolation_residual(params, basis, off_grid)
    return report


def interpolation_residual(params: ModelParams, basis: SOVBasis, lams: Sequence[complex]) -> float:
    """⟨η|A(λ), ⟨η|D(λ) 의 보간 공식 (η_a 영점 + Θ^{±1} 점근항)"""
    grid, coeffs, rows = basis.grid, basis.coeffs, basis.rows
    p, n = params.p, params.n_sites
    tuples = grid.tuples()
    worst = 0.0
    for lam in lams:
        a_op, _, _, d_op = monodromy(params, lam)
        lhs_a, lhs_d = rows @ a_op, rows @ d_op
        for i, t in enumerate(tuples):
            etas = grid.etas(t)
            zeros = etas[:-1]
            poly = complex(np.prod([lam / e - e / lam for e in zeros])) if n > 1 else 1.0
            prod_eta = complex(np.prod(zeros)) if n > 1 else 1.0
            sign = (-1) ** (n - 1)
            down, up = list(t), list(t)
            down[-1], up[-1] = (t[-1] - 1) % p, (t[-1] + 1) % p
            row_theta = rows[grid.index(down)]
            row_theta_inv = rows[grid.index(up)]
            rhs_a = poly * (lam * params.a_plus * prod_eta * row_theta
                            + sign * params.a_minus / (lam * prod_eta) * row_theta_inv)
            rhs_d = poly * (lam * params.d_plus * prod_eta * row_theta_inv
                            + sign * params.d_minus / (lam * prod_eta) * row_theta)
            for a in range(n - 1):
                weight = _lagrange(zeros, a, lam)
                lower, upper = list(t), list(t)
                lower[a] = (t[a] - 1) % p
                upper[a] = (t[a] + 1) % p
                rhs_a = rhs_a + weight * coeffs.a_sov[a, t[a]] * rows[grid.index(lower)]
                rhs_d = rhs_d + weight * coeffs.d_sov[a, t[a]] * rows[grid.index(upper)]
            scale = max(np.linalg.norm(lhs_a[i]), np.linalg.norm(lhs_d[i]), 1e-300)
            worst = max(worst, float(np.linalg.norm(lhs_a[i] - rhs_a) / scale),
                        float(np.linalg.norm(lhs_d[i] - rhs_d) / scale))
    return worst


def generator_closure_residual(params: ModelParams, basis: SOVBasis) -> float:
    """D(η_a) 를 q-궤도 한 바퀴 적용하면 원래 행으로 돌아오는지"""
    grid, coeffs = basis.grid, basis.coeffs
    p = params.p
    worst = 0.0
    for a in range(params.n_sites - 1):
        digits = [0] * params.n_sites
        digits[a] = p - 1
        row = basis.row(digits)
        d_op = monodromy(params, grid.eta(a, p - 1))[3]
        back = row @ d_op / coeffs.d_sov[a, p - 1]
        start = basis.row([0] * params.n_sites)
        worst = max(worst, float(np.linalg.norm(back - start) / np.linalg.norm(start)))
    return worst


def simplicity_margin(params: ModelParams, grid: SOVGrid, avg: Optional[AverageMatrix] = None) -> float:
    """min_a |𝒜(Z_a) − 𝒟(Z_a)| / max(|𝒜|, |𝒟|)"""
    avg = avg or average_monodromy(params)
    margin = np.inf
    for z in grid.Z[:-1]:
        a, d = avg.A(z), avg.D(z)
        margin = min(margin, abs(a - d) / max(abs(a), abs(d), 1e-300))
    return float(margin)


def b_average_zero_residual(params: ModelParams, grid: SOVGrid, avg: Optional[AverageMatrix] = None) -> float:
    avg = avg or average_monodromy(params)
    scale = max(abs(avg.B(z * 1.3)) for z in grid.Z[:-1]) if params.n_sites > 1 else 1.0
    return max((abs(avg.B(z)) / scale for z in grid.Z[:-1]), default=0.0)


def c_consistency_residual(params: ModelParams, basis: SOVBasis,
                           lams: Sequence[complex] = (0.77 + 0.35j, -0.6 + 1.1j)) -> float:
    """⟨η|C(λ) = ⟨η|(D(λ/q)A(λ) − det_q M(λ)) / b_η(λ/q)"""
    q = params.root.q
    qdet = qdet_poly(params)
    grid, rows = basis.grid, basis.rows
    worst = 0.0
    for lam in lams:
        a_op, _, c_op, _ = monodromy(params, lam)
        d_down = monodromy(params, lam / q)[3]
        lhs = rows @ c_op
        for i, t in enumerate(grid.tuples()):
            rhs = (rows[i] @ d_down @ a_op - qdet(lam) * rows[i]) / grid.b_eigenvalue(t, lam / q)
            scale = max(np.linalg.norm(lhs[i]), np.linalg.norm(rhs), 1e-300)
            worst = max(worst, float(np.linalg.norm(lhs[i] - rhs) / scale))
    return worst


def sov_representation_check(params: ModelParams, basis: SOVBasis) -> Dict[str, float]:
    """
    SOV 표현 전체 검사: A, D 작용, Θ 이동, C 의 양자 행렬식 일관성

    Returns:
        검사 이름 → 잔차 (verify_actions 키 + c_consistency)
    """
    report = verify_actions(params, basis)
    report["c_consistency"] = c_consistency_residual(params, basis)
    worst = max(report.values())
    logger.info(f"✅ SOV 표현 검사 완료 (최대 잔차 {worst:.2e})" if worst < 1e-6
                else f"⚠️ SOV 표현 검사 최대 잔차 {worst:.2e}")
    return report
