# -*- coding: utf-8 -*-
"""
스펙트럼 모듈

Θ-섹터별 결합 대각화, det_p D(Λ) 함수방정식 인증,
Baxter Q 다항식 (영공간/여인수 경로), Bethe 잔차, SOV 파동함수 인수분해, Q-연산자
"""

import cmath
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eig

from .algebra import (
    Interpolation,
    LaurentPoly,
    Parity,
    RootSetReport,
    UnityRoot,
    geometric_grid,
    laurent_interpolate,
    poly_roots,
    root_distance,
    root_set_checks,
)
from .averages import AverageMatrix, average_monodromy, omega_eigenvalues
from .config import DIRECT_RETRIES, GRID_DEFAULTS, ROOT_STRIP_RTOL, SV_GAP, SV_NULL_RTOL, THREADS, tolerance
from .error_handler import CheckLog, CheckRecord, run_check
from .exceptions import DegeneracyError, DomainError, RepresentationError
from .model import ModelParams, qdet_poly, transfer
from .sov import SOVBasis, gauge_polynomials

logger = logging.getLogger(__name__)


def _principal_root(value: complex, p: int) -> complex:
    return cmath.exp(cmath.log(value) / p)


@dataclass
class SpectralLine:
    """(Θ-전하, τ₂ 고유값 함수) 한 쌍과 고유벡터"""
    k: int
    t: LaurentPoly
    eigvec: np.ndarray
    index: int = 0
    Q: Optional[LaurentPoly] = None
    a_t: Optional[int] = None
    b_t: Optional[int] = None
    bethe_roots: List[complex] = field(default_factory=list)
    residuals: Dict[str, float] = field(default_factory=dict)

    def asymptotics(self, n_sites: int) -> Tuple[complex, complex]:
        """(λ^N 계수, λ^{-N} 계수)"""
        return self.t.coefficient(n_sites), self.t.coefficient(-n_sites)


@dataclass
class FunctionalMatrixSpec:
    """D(λ) 구성 데이터: t, 계수 쌍 (a, d), 𝒜 + 𝒟"""
    t: LaurentPoly
    coeff_a: LaurentPoly
    coeff_d: LaurentPoly
    average_sum: LaurentPoly
    root: UnityRoot
    n_sites: int

    def pairing_residual(self, qdet: LaurentPoly, points: int = 5) -> float:
        """det_q M(λ) = a(λ)d(λ/q) 의 표본 잔차"""
        q = self.root.q
        worst = 0.0
        for lam in geometric_grid(points, 0.93, offset=0.31):
            value = qdet(lam)
            got = self.coeff_a(lam) * self.coeff_d(lam / q)
            worst = max(worst, abs(got - value) / max(abs(value), 1e-300))
        return worst


@dataclass
class BaxterPair:
    """det_q M(λ) = 𝚊(λ)𝚍(λ/q), ∏𝚊 + ∏𝚍 = 𝒜 + 𝒟 를 만족하는 계수 쌍"""
    a: LaurentPoly
    d: LaurentPoly
    qdet_residual: float
    average_residual: float
    signs: Tuple[int, ...] = ()


@dataclass
class QSolution:
    Q: LaurentPoly
    sv_ratio: float
    gap: float
    a_t: int
    b_t: int
    residual: float


@dataclass
class CofactorResult:
    Q: Optional[LaurentPoly]
    c11: Interpolation
    c12: Interpolation
    c1p: Interpolation
    identities: Dict[str, float]
    fallback: bool = False
    agreement: Optional[float] = None
    detail: str = ""


@dataclass
class BetheReport:
    residuals: List[float]
    max_residual: float
    pole_collision: bool
    roots: List[complex]
    root_report: Optional[RootSetReport] = None


@dataclass
class WavefunctionReport:
    deviation: float
    sov_system: float
    q_values: np.ndarray


# ====================
# 결합 대각화
# ====================

def joint_diagonalize(params: ModelParams, lam_star: complex = 0.87 + 0.55j,
                      retries: int = DIRECT_RETRIES) -> List[SpectralLine]:
    """
    Θ-섹터 사영 후 τ₂(λ*) 대각화, Rayleigh 몫으로 t(λ) 보간

    Args:
        params: ModelParams
        lam_star: 섹터 내부 대각화 점
        retries: 고유값 충돌 시 λ* 재선택 횟수

    Returns:
        SpectralLine 목록 (길이 p^N, (k, λ*-고유값) 순서)

    Raises:
        DegeneracyError: 재시도 후에도 섹터 내부 고유값 충돌
    """
    n = params.n_sites
    space = params.space
    grid = geometric_grid(2 * n + GRID_DEFAULTS["extra_points"], GRID_DEFAULTS["radius"], offset=0.37)
    tau_grid = [transfer(params, z) for z in grid]
    parity = Parity.of(n)
    lines: List[SpectralLine] = []

    for k, basis in space.theta_sector_bases():
        if basis.shape[1] == 0:
            continue
        restricted = [basis.conj().T @ tau @ basis for tau in tau_grid]
        lam = lam_star
        for attempt in range(retries):
            t_star = basis.conj().T @ transfer(params, lam) @ basis
            w, vl, vr = eig(t_star, left=True, right=True)
            if len(w) == 1:
                break
            gaps = np.abs(w[:, None] - w[None, :]) + np.diag(np.full(len(w), np.inf))
            if np.min(gaps) > 1e-8 * max(np.max(np.abs(w)), 1e-300):
                break
            logger.warning(f"⚠️ 섹터 {k} 고유값 충돌, λ* 재선택 ({attempt + 1}/{retries})")
            lam = lam * 1.09 * cmath.exp(0.41j)
        else:
            raise DegeneracyError(f"τ₂ spectrum degenerate inside Θ-sector {k}")

        order = np.lexsort((np.round(w.imag, 8), np.round(w.real, 8)))
        for i in order:
            x, y = vr[:, i], vl[:, i]
            denom = y.conj() @ x
            samples = [(z, (y.conj() @ tr @ x) / denom) for z, tr in zip(grid, restricted)]
            interp = laurent_interpolate(samples, n, parity)
            vec = basis @ x
            vec = vec / np.linalg.norm(vec)
            line = SpectralLine(k, interp.poly, vec)
            line.residuals["parity_leakage"] = interp.leakage
            line.residuals["t_fit"] = interp.residual
            lines.append(line)

    for i, line in enumerate(lines):
        line.index = i
    _check_joint_simplicity(lines, n)
    logger.info(f"✅ 결합 대각화 완료: {len(lines)}개 스펙트럴 라인 (N={n}, p={params.p})")
    return lines


def _check_joint_simplicity(lines: Sequence[SpectralLine], n_sites: int, rtol: float = 1e-7):
    exps = range(-n_sites, n_sites + 1)
    for a, b in itertools.combinations(lines, 2):
        if a.k != b.k:
            continue
        va, vb = a.t.vector(exps), b.t.vector(exps)
        scale = max(np.max(np.abs(va)), np.max(np.abs(vb)), 1e-300)
        if np.max(np.abs(va - vb)) <= rtol * scale:
            raise DegeneracyError(f"lines {a.index} and {b.index} share (k, t)")


def asymptotics_residual(params: ModelParams, line: SpectralLine) -> float:
    """λ^{±N} 계수와 q^{±k} a_± + q^{∓k} d_± 비교"""
    n, root = params.n_sites, params.root
    top, bottom = line.asymptotics(n)
    want_top = root.power(line.k) * params.a_plus + root.power(-line.k) * params.d_plus
    want_bottom = root.power(-line.k) * params.a_minus + root.power(line.k) * params.d_minus
    scale = max(abs(want_top), abs(want_bottom), line.t.max_abs(), 1e-300)
    return max(abs(top - want_top), abs(bottom - want_bottom)) / scale


def sector_pairing_residual(params: ModelParams, lines: Sequence[SpectralLine]) -> float:
    """k ≠ 0 인 라인마다 −k 섹터에 같은 점근 계수를 가진 라인이 있는지"""
    n, p = params.n_sites, params.p
    worst = 0.0
    for line in lines:
        if line.k == 0:
            continue
        partners = [o for o in lines if o.k == (-line.k) % p]
        mine = np.array(line.asymptotics(n))
        scale = max(np.max(np.abs(mine)), 1e-300)
        best = min((np.max(np.abs(np.array(o.asymptotics(n)) - mine)) / scale for o in partners), default=np.inf)
        worst = max(worst, float(best))
    return worst


def completeness_residual(params: ModelParams, lines: Sequence[SpectralLine], rtol: float = 1e-8) -> float:
    """
    고유벡터가 전체 공간을 생성하는지 (라인 수 불일치와 계수 결손 중 큰 값)

    수치 계수는 σ > rtol·σ_max 인 특이값 개수.
    """
    if not lines:
        return float(params.dim)
    vecs = np.column_stack([line.eigvec for line in lines])
    sv = np.linalg.svd(vecs, compute_uv=False)
    rank = int(np.sum(sv > rtol * sv[0]))
    if rank < params.dim:
        logger.warning(f"⚠️ 고유벡터 계수 결손: rank {rank} < {params.dim} (σ_min={sv[-1]:.1e})")
    return float(max(abs(len(lines) - params.dim), params.dim - rank))


# ====================
# det_p D(Λ)
# ====================

def _tridiagonal_det(diag: Sequence[complex], links: Sequence[complex]) -> complex:
    """links[i] = 행 i−1, i 사이 비대각 원소의 곱 (links[0] 미사용)"""
    if not len(diag):
        return 1.0 + 0j
    prev, cur = 1.0 + 0j, complex(diag[0])
    for i in range(1, len(diag)):
        prev, cur = cur, diag[i] * cur - links[i] * prev
    return cur


def det_functional(spec: FunctionalMatrixSpec, count: Optional[int] = None) -> Interpolation:
    """
    det_p D(Λ) 를 4항 전개와 삼중대각 부분행렬식 점화식으로 계산해 Λ 에 대해 보간

    det = −(𝒜+𝒟) − g₀ det T_{1..p−2} − g₁ det T_{2..p−1} + t₀ det T_{1..p−1},
    g_j = a(q^j λ) d(q^{j−1} λ) = det_q M(q^j λ).

    Returns:
        Interpolation (degree N, 패리티 N)
    """
    root, n, p = spec.root, spec.n_sites, spec.root.p
    q = root.q
    count = count or 2 * n + GRID_DEFAULTS["extra_points"]
    samples = []
    for big_lambda in geometric_grid(count, GRID_DEFAULTS["radius"], offset=0.19):
        lam = _principal_root(big_lambda, p)
        lams = [root.power(j) * lam for j in range(p)]
        t = [spec.t(z) for z in lams]
        g = [spec.coeff_a(z) * spec.coeff_d(z / q) for z in lams]
        full = _tridiagonal_det(t[1:], [0j] + g[2:])
        left = _tridiagonal_det(t[1:p - 1], [0j] + g[2:p - 1])
        right = _tridiagonal_det(t[2:], [0j] + g[3:])
        value = -spec.average_sum(big_lambda) - g[0] * left - g[1] * right + t[0] * full
        samples.append((big_lambda, value))
    return laurent_interpolate(samples, n, Parity.of(n))


def functional_matrix(spec: FunctionalMatrixSpec, lam: complex, scale: complex = 1.0) -> np.ndarray:
    """ā = scale·a, d̄ = d/scale 로 채운 p×p 순환 삼중대각 D(λ)"""
    root, p = spec.root, spec.root.p
    mat = np.zeros((p, p), dtype=complex)
    for j in range(p):
        z = root.power(j) * lam
        mat[j, j] = spec.t(z)
        mat[j, (j + 1) % p] -= spec.coeff_d(z) / scale
        mat[j, (j - 1) % p] -= scale * spec.coeff_a(z)
    return mat


def det_functional_direct(spec: FunctionalMatrixSpec, avg: AverageMatrix,
                          count: Optional[int] = None) -> Interpolation:
    """ā = c·a, c^p = Ω₊(Λ)/∏a 로 D(λ) 를 직접 만들어 행렬식을 취하는 대조 경로"""
    root, n, p = spec.root, spec.n_sites, spec.root.p
    count = count or 2 * n + GRID_DEFAULTS["extra_points"]
    samples = []
    for big_lambda in geometric_grid(count, GRID_DEFAULTS["radius"], offset=0.19):
        lam = _principal_root(big_lambda, p)
        prod_a = np.prod([spec.coeff_a(z) for z in root.orbit(lam)])
        omega_plus, _ = omega_eigenvalues(avg, big_lambda)
        c = _principal_root(omega_plus / prod_a, p)
        samples.append((big_lambda, np.linalg.det(functional_matrix(spec, lam, c))))
    return laurent_interpolate(samples, n, Parity.of(n))


def functional_spec(params: ModelParams, t: LaurentPoly, pair: Optional[BaxterPair] = None,
                    avg: Optional[AverageMatrix] = None) -> FunctionalMatrixSpec:
    """기본은 SOV 게이지 다항식 (𝖺, 𝖽), pair가 주어지면 (𝚊, 𝚍)"""
    avg = avg or average_monodromy(params)
    if pair is None:
        coeff_a, coeff_d = gauge_polynomials(params)
    else:
        coeff_a, coeff_d = pair.a, pair.d
    return FunctionalMatrixSpec(t, coeff_a, coeff_d, avg.trace(), params.root, params.n_sites)


def det_certificate(spec: FunctionalMatrixSpec) -> float:
    """보간된 det_p D 계수의 최대값 / (𝒜+𝒟) 계수 척도"""
    interp = det_functional(spec)
    return interp.poly.max_abs() / max(spec.average_sum.max_abs(), 1e-300)


def certify_spectrum(params: ModelParams, lines: Sequence[SpectralLine], basis: Optional[SOVBasis] = None,
                     overrides: Optional[dict] = None, workers: int = THREADS) -> CheckLog:
    """
    라인별 det_p D 인증 및 (기저가 주어지면) SOV 파동함수 검사

    Returns:
        CheckLog (라인 번호 순서)
    """
    avg = average_monodromy(params)
    det_tol = tolerance("det_functional", overrides)
    wf_tol = tolerance("wavefunction", overrides)

    def certify(line: SpectralLine) -> List:
        spec = functional_spec(params, line.t, avg=avg)
        records = [run_check(f"det_functional[{line.index}]", det_certificate, det_tol, spec)]
        records.append(run_check(f"asymptotics[{line.index}]", asymptotics_residual,
                                 tolerance("asymptotics", overrides), params, line))
        if basis is not None:
            records.append(run_check(f"wavefunction[{line.index}]",
                                     lambda: wavefunction_check(params, line, basis).deviation, wf_tol))
        for r in records:
            line.residuals[r.name.split("[")[0]] = r.residual
        return records

    log = CheckLog()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        for records in executor.map(certify, lines):
            for r in records:
                log.add(r)
    passed = len(lines) - len({r.name.split("[")[1] for r in log.failed()})
    logger.info(f"✅ 스펙트럼 인증: {passed}/{len(lines)} 라인 통과")
    return log


# ====================
# Baxter 계수 (𝚊, 𝚍)
# ====================

def baxter_coefficients(params: ModelParams, avg: Optional[AverageMatrix] = None,
                        points: int = 7) -> BaxterPair:
    """
    𝚊(λ) = C λ^{-N} ∏_j (1 − w_j λ), 𝚍(λ) = q^N 𝚊(−qλ)

    w_j² = −x_j 는 국소 양자 행렬식의 인수에서, C² = (−1)^N q^{−N} ∏ C_n.
    w_j 와 C 의 부호 조합 중 궤도곱 합이 𝒜 + 𝒟 에 가장 가까운 것을 고른다.

    Returns:
        BaxterPair (잔차가 크면 그런 인수분해 쌍이 없는 표현)
    """
    avg = avg or average_monodromy(params)
    root, n, p = params.root, params.n_sites, params.p
    q = root.q
    factors = [s.qdet_factors(root) for s in params.sites]
    const = complex(np.prod([f[0] for f in factors]))
    base_w = [cmath.sqrt(-x) for f in factors for x in f[1:]]
    c_base = cmath.sqrt(const * (-1) ** n * root.power(-n))
    qdet = qdet_poly(params)
    sample_lams = geometric_grid(5, 0.93, offset=0.31)
    sample_big = geometric_grid(points, GRID_DEFAULTS["radius"], offset=0.23)
    target = [avg.trace()(z) for z in sample_big]
    scale = max(max(abs(v) for v in target), 1e-300)

    best: Optional[BaxterPair] = None
    for signs in itertools.product((1, -1), repeat=len(base_w) + 1):
        a_poly = LaurentPoly.monomial(-n, signs[-1] * c_base)
        for s, w in zip(signs[:-1], base_w):
            a_poly = a_poly * LaurentPoly({0: 1.0, 1: -s * w})
        a_poly = LaurentPoly(a_poly.coeffs, Parity.NONE)
        d_poly = a_poly.scale_argument(-q) * root.power(n)
        avg_res = 0.0
        for big, want in zip(sample_big, target):
            lam = _principal_root(big, p)
            orbit = root.orbit(lam)
            got = np.prod([a_poly(z) for z in orbit]) + np.prod([d_poly(z) for z in orbit])
            avg_res = max(avg_res, abs(got - want) / scale)
        if best is not None and avg_res >= best.average_residual:
            continue
        qdet_res = max(abs(a_poly(z) * d_poly(z / q) - qdet(z)) / max(abs(qdet(z)), 1e-300) for z in sample_lams)
        best = BaxterPair(a_poly, d_poly, qdet_res, avg_res, tuple(signs))
    logger.debug(f"(𝚊, 𝚍) 평균 잔차 {best.average_residual:.2e}, det_q 잔차 {best.qdet_residual:.2e}")
    return best


# ====================
# Baxter Q
# ====================

def baxter_residual(t: LaurentPoly, a: LaurentPoly, d: LaurentPoly, Q: LaurentPoly, root: UnityRoot,
                    lams: Optional[Sequence[complex]] = None) -> float:
    """max |tQ − aQ(λ/q) − dQ(qλ)| / 항별 척도"""
    q = root.q
    lams = geometric_grid(12, 1.0, offset=0.29) if lams is None else lams
    worst = 0.0
    for lam in lams:
        terms = (t(lam) * Q(lam), a(lam) * Q(lam / q), d(lam) * Q(q * lam))
        scale = max(max(abs(x) for x in terms), 1e-300)
        worst = max(worst, abs(terms[0] - terms[1] - terms[2]) / scale)
    return worst


def _normalize_q(coeffs: np.ndarray, tol: float = 1e-9) -> LaurentPoly:
    """λ^{a_t} ∏(λ_h − λ) 꼴이 되도록 최고차 계수를 (−1)^{근 개수} 로 맞춤"""
    mags = np.abs(coeffs)
    keep = np.nonzero(mags > tol * mags.max())[0]
    low, top = int(keep[0]), int(keep[-1])
    norm = coeffs / coeffs[top] * (-1) ** (top - low)
    return LaurentPoly({m: norm[m] for m in range(low, top + 1)})


def q_from_nullspace(t: LaurentPoly, a: LaurentPoly, d: LaurentPoly, root: UnityRoot, n_sites: int,
                     max_degree: Optional[int] = None) -> QSolution:
    """
    Baxter 방정식 tQ = aQ(λ/q) + dQ(qλ) 의 최소 차수 다항식 해

    차수 상한을 0 부터 올리며 표본 선형계의 최소 특이값이 SV_NULL_RTOL 보다
    작아지는 첫 차수에서 멈춘다. 그 차수에서 영공간은 1차원이어야 한다.

    Raises:
        DegeneracyError: 해가 없거나 영공간이 모호한 경우
    """
    q, p = root.q, root.p
    max_degree = (p - 1) * n_sites if max_degree is None else max_degree
    count = 2 * (max_degree + 1) + 3
    lams = geometric_grid(count, 1.0, offset=0.29)
    for degree in range(max_degree + 1):
        exps = np.arange(degree + 1)
        rows = []
        for lam in lams:
            tv, av, dv = t(lam), a(lam), d(lam)
            row = tv * lam ** exps - av * (lam / q) ** exps - dv * (q * lam) ** exps
            rows.append(row / max(abs(tv), abs(av), abs(dv), 1e-300))
        _, s, vh = np.linalg.svd(np.array(rows))
        ratio = float(s[-1] / s[0])
        if ratio > SV_NULL_RTOL:
            continue
        gap = float(s[-2] / max(s[-1], 1e-300)) if len(s) > 1 else np.inf
        if gap < SV_GAP:
            raise DegeneracyError(f"ambiguous Baxter nullspace at degree {degree} (gap {gap:.1e})")
        Q = _normalize_q(vh[-1].conj())
        a_t = Q.min_exp
        b_t = (p - 1) * n_sites - Q.max_exp
        residual = baxter_residual(t, a, d, Q, root)
        return QSolution(Q, ratio, gap, a_t, b_t, residual)
    raise DegeneracyError(f"no polynomial Baxter solution of degree ≤ {max_degree}")


def congruence_ok(k: int, a_t: int, b_t: int, p: int) -> bool:
    """a_t ≡ ±k, b_t ≡ ±k (mod p)"""
    allowed = {k % p, (-k) % p}
    return a_t % p in allowed and b_t % p in allowed


def _cofactor(t, a, d, root: UnityRoot, lam: complex, i: int, j: int) -> complex:
    spec = FunctionalMatrixSpec(t, a, d, LaurentPoly.zero(), root, 0)
    mat = functional_matrix(spec, lam)
    minor = np.delete(np.delete(mat, i, axis=0), j, axis=1)
    return (-1) ** (i + j) * np.linalg.det(minor)


def _c11_tridiagonal(t, a, d, root: UnityRoot, lam: complex) -> complex:
    p = root.p
    lams = [root.power(j) * lam for j in range(p)]
    diag = [t(z) for z in lams[1:]]
    links = [0j] + [d(lams[i - 1]) * a(lams[i]) for i in range(2, p)]
    return _tridiagonal_det(diag, links)


def _strip_common_roots(r11: Sequence[complex], r12: Sequence[complex],
                        rtol: float = ROOT_STRIP_RTOL) -> Tuple[List[complex], bool]:
    """C₁,₁ 근에서 C₁,₂ 와 공통인 근 제거 (모호한 군집이면 True)"""
    unused = list(r12)
    kept, ambiguous = [], False
    for r in r11:
        near = [i for i, s in enumerate(unused) if root_distance(r, s) <= rtol]
        if len([s for s in unused if root_distance(r, s) <= 10 * rtol]) > 1:
            ambiguous = True
        if near:
            unused.pop(near[0])
        else:
            kept.append(r)
    return kept, ambiguous


def q_from_cofactor(t: LaurentPoly, a: LaurentPoly, d: LaurentPoly, root: UnityRoot, n_sites: int,
                    q_null: Optional[LaurentPoly] = None) -> CofactorResult:
    """
    D̃(λ) 의 1행 여인수로부터 Q 복원

    C₁,₁ 은 삼중대각 점화식과 직접 소행렬식 두 경로로 계산해 비교하고,
    C₁,₂ 와 공통인 근을 제거한 뒤 λ^{a_t} 를 붙인다.
    """
    p, q = root.p, root.q
    degree = (p - 1) * n_sites
    grid = geometric_grid(2 * degree + 5, 1.0, offset=0.17)

    c11_rec, c11_dir, c12, c1p = [], [], [], []
    for lam in grid:
        c11_rec.append(_c11_tridiagonal(t, a, d, root, lam))
        c11_dir.append(_cofactor(t, a, d, root, lam, 0, 0))
        c12.append(_cofactor(t, a, d, root, lam, 0, 1))
        c1p.append(_cofactor(t, a, d, root, lam, 0, p - 1))
    c11_rec, c11_dir = np.array(c11_rec), np.array(c11_dir)
    scale11 = max(np.max(np.abs(c11_dir)), 1e-300)

    i11 = laurent_interpolate(list(zip(grid, c11_rec)), degree, Parity.EVEN)
    i12 = laurent_interpolate(list(zip(grid, c12)), degree)
    i1p = laurent_interpolate(list(zip(grid, c1p)), degree)

    identities = {"cofactor_agreement": float(np.max(np.abs(c11_rec - c11_dir)) / scale11),
                  "c11_parity": i11.leakage}
    checkpoints = grid[:4]
    refl, prod, shift, bax = 0.0, 0.0, 0.0, 0.0
    sign_n = root.power(n_sites)
    for lam in checkpoints:
        lhs = _cofactor(t, a, d, root, lam, 0, p - 1)
        rhs = sign_n * _cofactor(t, a, d, root, -lam / q, 0, 1)
        refl = max(refl, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
        lhs = _cofactor(t, a, d, root, q * lam, 0, 0) * _cofactor(t, a, d, root, lam, 0, 0)
        rhs = sign_n * _cofactor(t, a, d, root, lam, 0, 1) * _cofactor(t, a, d, root, -lam, 0, 1)
        prod = max(prod, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
        for h, k in ((0, 0), (0, 1), (1, 2 % p)):
            lhs = _cofactor(t, a, d, root, lam, (h + 1) % p, (k + 1) % p)
            rhs = _cofactor(t, a, d, root, q * lam, h, k)
            shift = max(shift, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
        terms = (t(lam) * _cofactor(t, a, d, root, lam, 0, 0),
                 a(lam) * _cofactor(t, a, d, root, lam, 0, p - 1),
                 d(lam) * _cofactor(t, a, d, root, lam, 0, 1))
        bax = max(bax, abs(terms[0] - terms[1] - terms[2]) / max(max(abs(x) for x in terms), 1e-300))
    identities.update({"cofactor_reflection": refl, "cofactor_product": prod,
                       "cofactor_shift": shift, "cofactor_baxter": bax})

    result = CofactorResult(None, i11, i12, i1p, identities)
    if i11.poly.is_zero() or i12.poly.is_zero():
        result.fallback, result.detail = True, "vanishing cofactor"
    else:
        r11, r12 = poly_roots(i11.poly), poly_roots(i12.poly)
        kept, ambiguous = _strip_common_roots(r11, r12)
        identities["zero_set"] = _zero_set_residual(r11, r12, poly_roots(i1p.poly) if not i1p.poly.is_zero() else [])
        if ambiguous:
            result.fallback, result.detail = True, "clustered cofactor roots"
        else:
            candidates = []
            for a_t in range(p):
                Q = LaurentPoly.from_roots(kept, (-1) ** len(kept), a_t)
                candidates.append((baxter_residual(t, a, d, Q, root), Q))
            res, Q = min(candidates, key=lambda c: c[0])
            if res > 1e-6:
                result.fallback, result.detail = True, f"stripped cofactor fails Baxter ({res:.1e})"
            else:
                result.Q = Q

    if result.fallback:
        logger.warning(f"⚠️ 여인수 경로 실패 ({result.detail}), 영공간 Q 사용")
        result.Q = q_null
    elif q_null is not None:
        result.agreement = q_alignment(q_null, result.Q)
    return result


def _zero_set_residual(r11, r12, r1p) -> float:
    """C₁,₁∩C₁,₂ 와 C₁,₁∩C₁,₂ₗ₊₁ 의 공통근 개수 차이"""
    def common(a, b):
        return sum(1 for r in a if any(root_distance(r, s) <= ROOT_STRIP_RTOL for s in b))
    return float(abs(common(r11, r12) - common(r11, r1p)))


def q_alignment(reference: LaurentPoly, other: LaurentPoly) -> float:
    """스칼라 정렬 후 최대 계수 차이 (reference 척도)"""
    low = min(reference.min_exp, other.min_exp)
    high = max(reference.max_exp, other.max_exp)
    exps = range(low, high + 1)
    u, v = reference.vector(exps), other.vector(exps)
    c = (v.conj() @ u) / max((v.conj() @ v).real, 1e-300)
    return float(np.max(np.abs(u - c * v)) / max(np.max(np.abs(u)), 1e-300))


# ====================
# Bethe 방정식
# ====================

def bethe_check(Q: LaurentPoly, a: LaurentPoly, d: LaurentPoly, root: UnityRoot,
                epsilon: Optional[int] = None) -> BetheReport:
    """
    𝚊(λ_c)/𝚍(λ_c) + q^{2a_t} ∏_h (qλ_c − λ_h)/(λ_c/q − λ_h) 잔차

    Returns:
        BetheReport (근이 없으면 공허하게 통과)
    """
    q = root.q
    a_t = Q.min_exp
    roots = poly_roots(Q) if Q.max_exp > Q.min_exp else []
    residuals, collision = [], False
    for c in roots:
        dv = d(c)
        if abs(dv) <= 1e-12 * max(abs(a(c)), 1.0):
            collision = True
            residuals.append(np.inf)
            continue
        lhs = a(c) / dv
        rhs = root.power(2 * a_t) * complex(np.prod([(q * c - h) / (c / q - h) for h in roots]))
        residuals.append(abs(lhs + rhs) / max(abs(lhs), 1e-300))
    if collision:
        logger.warning("⚠️ Q 의 근이 𝚍 의 영점과 충돌")
    report = root_set_checks(roots, root, epsilon) if epsilon is not None and roots else None
    return BetheReport(residuals, max(residuals, default=0.0), collision, roots, report)


def reconstruct_t(Q: LaurentPoly, a: LaurentPoly, d: LaurentPoly, root: UnityRoot, n_sites: int) -> Interpolation:
    """t(λ) = (𝚊Q(λ/q) + 𝚍Q(qλ))/Q(λ) 를 표본 보간"""
    q = root.q
    grid = geometric_grid(2 * n_sites + GRID_DEFAULTS["extra_points"] + 2, 1.31, offset=0.13)
    samples = [(z, (a(z) * Q(z / q) + d(z) * Q(q * z)) / Q(z)) for z in grid]
    return laurent_interpolate(samples, n_sites, Parity.of(n_sites))


def t_distance(t1: LaurentPoly, t2: LaurentPoly) -> float:
    high = max(t1.degree, t2.degree)
    exps = range(-high, high + 1)
    u, v = t1.vector(exps), t2.vector(exps)
    return float(np.max(np.abs(u - v)) / max(np.max(np.abs(u)), 1e-300))


def q_wronskian(q1: LaurentPoly, q2: LaurentPoly, root: UnityRoot, lams: Sequence[complex]) -> np.ndarray:
    """
    W(λ) = Q₁(λ)Q₂(λ/q) − Q₂(λ)Q₁(λ/q)

    두 Baxter 해의 독립성 비교용 공개 함수 (반대칭, W(Q, Q) = 0).
    """
    q = root.q
    return np.array([q1(z) * q2(z / q) - q2(z) * q1(z / q) for z in lams])


def omega_separation(avg: AverageMatrix, big_lambda: complex) -> float:
    """|Ω₊ − Ω₋| / max|Ω±| (0 이 아니면 Q 는 준상수 배 제외 유일)"""
    plus, minus = omega_eigenvalues(avg, big_lambda)
    return abs(plus - minus) / max(abs(plus), abs(minus), 1e-300)


# ====================
# SOV 파동함수
# ====================

def sov_q_values(params: ModelParams, line: SpectralLine, basis: SOVBasis) -> np.ndarray:
    """궤도 r 마다 p×p 순환 계 t(η^{(k)})Q[k] = aSOV Q[k−1] + dSOV Q[k+1] 의 영벡터"""
    grid, coeffs = basis.grid, basis.coeffs
    p = params.p
    out = np.zeros((params.n_sites - 1, p), dtype=complex)
    for r in range(params.n_sites - 1):
        mat = np.zeros((p, p), dtype=complex)
        for k in range(p):
            mat[k, k] = line.t(grid.eta(r, k))
            mat[k, (k - 1) % p] -= coeffs.a_sov[r, k]
            mat[k, (k + 1) % p] -= coeffs.d_sov[r, k]
        _, s, vh = np.linalg.svd(mat)
        if s[-1] > 1e-6 * s[0]:
            raise RepresentationError(f"SOV Baxter system on orbit {r} has no null vector ({s[-1] / s[0]:.1e})")
        out[r] = vh[-1].conj()
    return out


def wavefunction_check(params: ModelParams, line: SpectralLine, basis: SOVBasis) -> WavefunctionReport:
    """
    Ψ(η) = ⟨η|t⟩ 와 (η_N)^{-k} ∏ Q_r(η_r) 를 전역 스칼라 하나로 비교

    Raises:
        RepresentationError: Ψ ≡ 0 또는 게이지 미고정 기저
    """
    if not basis.gauge_fixed:
        raise RepresentationError("wavefunction comparison needs a gauge-fixed SOV basis")
    grid = basis.grid
    p, n = params.p, params.n_sites
    psi = basis.rows @ line.eigvec
    if np.max(np.abs(psi)) <= 1e-12 * np.linalg.norm(basis.rows[0]):
        raise RepresentationError("eigenvector is orthogonal to every SOV covector")
    q_values = sov_q_values(params, line, basis) if n > 1 else np.zeros((0, p))
    predicted = np.zeros_like(psi)
    tuples = grid.tuples()
    for i, digits in enumerate(tuples):
        value = params.root.power(-line.k * digits[-1])
        for r in range(n - 1):
            value *= q_values[r, digits[r]]
        predicted[i] = value
    c = (predicted.conj() @ psi) / (predicted.conj() @ predicted)
    deviation = float(np.linalg.norm(psi - c * predicted) / np.linalg.norm(psi))

    system = 0.0
    coeffs = basis.coeffs
    scale = np.max(np.abs(psi))
    for i, digits in enumerate(tuples):
        for r in range(n - 1):
            lower, upper = list(digits), list(digits)
            lower[r] = (digits[r] - 1) % p
            upper[r] = (digits[r] + 1) % p
            k = digits[r]
            lhs = line.t(grid.eta(r, k)) * psi[i]
            rhs = (coeffs.a_sov[r, k] * psi[grid.index(lower)] + coeffs.d_sov[r, k] * psi[grid.index(upper)])
            term_scale = max(abs(lhs), abs(coeffs.a_sov[r, k]) * scale, abs(coeffs.d_sov[r, k]) * scale, 1e-300)
            system = max(system, abs(lhs - rhs) / term_scale)
    return WavefunctionReport(deviation, system, q_values)


# ====================
# Q-연산자
# ====================

def epsilon_normalize(Q: LaurentPoly, epsilon: int, anchor: complex = 0.71 + 0.43j) -> LaurentPoly:
    """Q(λ)* = Q(ελ*) 가 되도록 위상 보정"""
    ratio = complex(Q(anchor)).conjugate() / Q(epsilon * complex(anchor).conjugate())
    return Q * cmath.sqrt(ratio)


class QOperator:
    """Q(λ) = Σ_t Q_t(λ) |t⟩⟨t̃|"""

    def __init__(self, params: ModelParams, lines: Sequence[SpectralLine], pair: BaxterPair,
                 epsilon: Optional[int] = None):
        if len(lines) != params.dim or any(line.Q is None for line in lines):
            raise RepresentationError("Q-operator needs a complete set of lines with Baxter Q")
        self.params = params
        self.pair = pair
        self.epsilon = epsilon
        self.polys = [epsilon_normalize(l.Q, epsilon) if epsilon else l.Q for l in lines]
        self.vectors = np.column_stack([l.eigvec for l in lines])
        self.dual = np.linalg.inv(self.vectors)

    def __call__(self, lam: complex) -> np.ndarray:
        values = np.array([Q(lam) for Q in self.polys])
        return (self.vectors * values) @ self.dual

    def commutator_residual(self, lam: complex, mu: complex) -> float:
        a, b = self(lam), self(mu)
        return float(np.linalg.norm(a @ b - b @ a) / max(np.linalg.norm(a) * np.linalg.norm(b), 1e-300))

    def transfer_commutator_residual(self, lam: complex, mu: complex) -> float:
        a, b = transfer(self.params, lam), self(mu)
        return float(np.linalg.norm(a @ b - b @ a) / max(np.linalg.norm(a) * np.linalg.norm(b), 1e-300))

    def baxter_residual(self, lam: complex) -> float:
        q = self.params.root.q
        lhs = self(lam) @ transfer(self.params, lam)
        terms = (self.pair.a(lam) * self(lam / q), self.pair.d(lam) * self(q * lam))
        scale = max(np.linalg.norm(lhs), *(np.linalg.norm(x) for x in terms), 1e-300)
        return float(np.linalg.norm(lhs - terms[0] - terms[1]) / scale)

    def self_adjoint_residual(self, lam: complex) -> float:
        if self.epsilon is None:
            raise DomainError("epsilon required for the self-adjointness check")
        lhs = self(lam).conj().T
        rhs = self(self.epsilon * complex(lam).conjugate())
        return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1e-300))


def attach_baxter_q(params: ModelParams, lines: Sequence[SpectralLine], pair: BaxterPair,
                    epsilon: Optional[int] = None, use_cofactor: bool = True) -> CheckLog:
    """
    라인마다 Q, a_t, b_t, Bethe 근을 채우고 관련 검사를 기록

    Returns:
        CheckLog
    """
    log = CheckLog()
    root, n = params.root, params.n_sites
    for line in lines:
        tag = f"[{line.index}]"
        try:
            sol = q_from_nullspace(line.t, pair.a, pair.d, root, n)
        except DegeneracyError as e:
            logger.warning(f"⚠️ 라인 {line.index}: {e}")
            log.add(CheckRecord(f"baxter_residual{tag}", math.inf, tolerance("baxter_residual"), False,
                                detail=f"DegeneracyError: {e}"))
            continue
        line.Q, line.a_t, line.b_t = sol.Q, sol.a_t, sol.b_t
        log.add(run_check(f"baxter_residual{tag}", lambda: sol.residual, tolerance("baxter_residual")))
        log.add(run_check(f"q_congruence{tag}", lambda: 0.0 if congruence_ok(line.k, sol.a_t, sol.b_t, params.p) else 1.0,
                          0.5, informational=epsilon is None))
        if use_cofactor:
            cof = q_from_cofactor(line.t, pair.a, pair.d, root, n, sol.Q)
            log.add(run_check(f"cofactor_agreement{tag}", lambda: cof.identities["cofactor_agreement"],
                              tolerance("cofactor_agreement")))
            log.add(run_check(f"cofactor_identities{tag}",
                              lambda: max(cof.identities["cofactor_shift"], cof.identities["cofactor_baxter"],
                                          cof.identities["c11_parity"]),
                              tolerance("cofactor_identities")))
            if "zero_set" in cof.identities:
                log.add(run_check(f"cofactor_zero_set{tag}", lambda: cof.identities["zero_set"], 0.5,
                                  informational=cof.fallback))
            reflective = n % 2 == 0
            log.add(run_check(f"cofactor_reflection{tag}",
                              lambda: max(cof.identities["cofactor_reflection"], cof.identities["cofactor_product"]),
                              tolerance("cofactor_identities"), informational=not reflective))
            if cof.agreement is not None:
                log.add(run_check(f"q_route_agreement{tag}", lambda: cof.agreement, tolerance("cofactor_agreement")))
        bethe = bethe_check(sol.Q, pair.a, pair.d, root, epsilon)
        line.bethe_roots = bethe.roots
        log.add(run_check(f"bethe{tag}", lambda: bethe.max_residual, tolerance("bethe")))
        rebuilt = reconstruct_t(sol.Q, pair.a, pair.d, root, n)
        log.add(run_check(f"t_reconstruction{tag}", lambda: t_distance(line.t, rebuilt.poly),
                          tolerance("t_reconstruction")))
    return log
