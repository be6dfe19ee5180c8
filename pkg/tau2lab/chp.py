# -*- coding: utf-8 -*-
"""
카이랄 Potts 모듈

곡선 𝒞_k 위의 점, W/W̄ 가중치 표, 비균질 chP 전달행렬 T, T̂,
τ₂ 에 대한 Baxter 방정식, 교환/정규성 검사, 자기수반 부분다양체 구성,
결합 고유벡터 위의 고유값 대응과 Bethe 완비성 표
"""

import cmath
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import UnityRoot
from .config import tolerance
from .exceptions import ConstraintError, CurveError, CyclicityError, DomainError
from .model import ModelParams, SiteParams, hermiticity_residual, subvariety_residual, transfer

logger = logging.getLogger(__name__)

_CURVE_ACCEPT = 1e-8


def _principal_root(value: complex, p: int) -> complex:
    return cmath.exp(cmath.log(value) / p)


def _rel(got: complex, want: complex, *scales: float) -> float:
    scale = max(abs(want), *scales, 1e-300)
    return abs(got - want) / scale


def _comm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a @ b - b @ a) / max(np.linalg.norm(a) * np.linalg.norm(b), 1e-300))


# ====================
# 곡선 위의 점
# ====================

@dataclass(frozen=True)
class CurvePoint:
    """𝒞_k 위의 점 (a, b, c, d), x = a/d, y = b/c, s = d/c"""
    a: complex
    b: complex
    c: complex
    d: complex
    k: complex
    kp: complex

    @property
    def x(self) -> complex:
        return self.a / self.d

    @property
    def y(self) -> complex:
        return self.b / self.c

    @property
    def s(self) -> complex:
        return self.d / self.c

    @property
    def t(self) -> complex:
        return self.x * self.y

    def residuals(self, p: int) -> Tuple[float, float, float]:
        """x^p + y^p = k(1 + x^p y^p), k x^p = 1 − k′ s^{−p}, k y^p = 1 − k′ s^p"""
        xp, yp, sp = self.x ** p, self.y ** p, self.s ** p
        k, kp = self.k, self.kp
        r1 = _rel(xp + yp, k * (1 + xp * yp), abs(xp) + abs(yp))
        r2 = _rel(k * xp, 1 - kp / sp, 1.0, abs(kp / sp))
        r3 = _rel(k * yp, 1 - kp * sp, 1.0, abs(kp * sp))
        return r1, r2, r3

    def residual(self, p: int) -> float:
        return max(self.residuals(p))

    def shifted(self, root: UnityRoot, power: int = 1) -> "CurvePoint":
        """Ξ^power: (a, b, c, d) → (q^m a, q^m b, c, d)"""
        factor = root.power(power)
        return CurvePoint(factor * self.a, factor * self.b, self.c, self.d, self.k, self.kp)


@dataclass(frozen=True)
class ChPConfig:
    """모듈러스 k, 상수 𝖼₀, site별 점 q_n, r_n"""
    k: complex
    kp: complex
    c0: complex
    q_points: Tuple[CurvePoint, ...]
    r_points: Tuple[CurvePoint, ...]
    root: UnityRoot

    def __post_init__(self):
        object.__setattr__(self, "q_points", tuple(self.q_points))
        object.__setattr__(self, "r_points", tuple(self.r_points))
        if not self.q_points or len(self.q_points) != len(self.r_points):
            raise DomainError("q_points and r_points must be nonempty lists of equal length")

    @property
    def n_sites(self) -> int:
        return len(self.q_points)

    @property
    def homogeneous(self) -> bool:
        """q_n = r_n"""
        return all(q == r for q, r in zip(self.q_points, self.r_points))

    @property
    def translation_invariant(self) -> bool:
        """모든 q_n, r_n 이 (x, y, s) 좌표로 같은 점 (T 끼리 교환 가능 조건)"""
        ref = self.q_points[0]
        for pt in self.q_points + self.r_points:
            for got, want in ((pt.x, ref.x), (pt.y, ref.y), (pt.s, ref.s)):
                if _rel(got, want) > 1e-12:
                    return False
        return True

    def curve_residual(self) -> float:
        p = self.root.p
        return max(pt.residual(p) for pt in self.q_points + self.r_points)

    def params(self) -> ModelParams:
        return tau2_params_from_curve(self)


def _check_modulus(k: complex):
    if abs(k) < 1e-14 or abs(k * k - 1) < 1e-14:
        raise CurveError(f"modulus k must differ from 0 and ±1, got {k}")


def curve_solve(k: complex, a: complex, d: complex, root: UnityRoot,
                kp: Optional[complex] = None) -> CurvePoint:
    """
    (a, d) 와 k 로부터 곡선 위의 점 복원

    s^p 는 둘째 식, y^p 는 셋째 식, y 와 s 는 주분기 p제곱근.
    k′ 가 주어지지 않으면 두 부호를 차례로 시도한다.

    Raises:
        CurveError: k ∈ {0, ±1} 이거나 어느 분기도 곡선 방정식을 만족하지 않는 경우
    """
    _check_modulus(k)
    if a == 0 or d == 0:
        raise CurveError("seed coordinates must be nonzero")
    p = root.p
    base = cmath.sqrt(1 - k * k)
    candidates = [kp] if kp is not None else [base, -base]
    worst = None
    for kp_try in candidates:
        x = a / d
        s_inv_p = (1 - k * x ** p) / kp_try
        if s_inv_p == 0:
            continue
        s = _principal_root(1 / s_inv_p, p)
        c = d / s
        y_p = (1 - kp_try * s ** p) / k
        if y_p == 0:
            continue
        y = _principal_root(y_p, p)
        point = CurvePoint(complex(a), y * c, c, complex(d), complex(k), complex(kp_try))
        res = point.residual(p)
        if res <= _CURVE_ACCEPT:
            return point
        worst = res if worst is None else min(worst, res)
        logger.warning(f"⚠️ k′ = {kp_try:.4g} 분기 실패 (잔차 {res:.2e}), 다른 부호 시도")
    raise CurveError(f"no k′ branch puts the point on the curve (best residual {worst})")


def point_for_lambda(config: ChPConfig, lam: complex) -> CurvePoint:
    """
    스펙트럼 매개변수 λ 에 대응하는 점 p: x_p y_p = (𝖼₀/λ)²

    x^p, y^p 는 ξ² − k(1 + T)ξ + T = 0 의 두 근 (T = (𝖼₀/λ)^{2p}).
    """
    if lam == 0:
        raise DomainError("spectral parameter λ must be nonzero")
    p, k, kp = config.root.p, config.k, config.kp
    t2 = (config.c0 / lam) ** 2
    big_t = t2 ** p
    disc = cmath.sqrt((k * (1 + big_t)) ** 2 - 4 * big_t)
    x_p = (k * (1 + big_t) + disc) / 2
    if x_p == 0 or abs(1 - k * x_p) < 1e-300:
        raise CurveError(f"degenerate curve point at λ = {lam}")
    x = _principal_root(x_p, p)
    y = t2 / x
    s = 1 / _principal_root((1 - k * x_p) / kp, p)
    point = CurvePoint(x * s, y, 1.0 + 0j, s, k, kp)
    res = point.residual(p)
    if res > _CURVE_ACCEPT:
        raise CurveError(f"spectral point off the curve (residual {res:.2e})")
    return point


def tau2_params_from_curve(config: ChPConfig) -> ModelParams:
    """
    곡선 매개화 → τ₂ 파라미터

    α = −b_q b_r/𝖼₀, β = −𝖼₀ d_q d_r, γ = 𝖼₀ c_q c_r, δ = q^{−2} a_q a_r/𝖼₀,
    𝕒 = −q^{−1/2} c_q b_r, 𝕓 = q^{−3/2} a_q d_r, 𝕔 = q^{1/2} b_q c_r, 𝕕 = −q^{−1/2} d_q a_r

    Raises:
        ConstraintError: αγ = 𝕒𝕔, βδ = 𝕓𝕕 잔차 > 1e-10
    """
    root, c0 = config.root, config.c0
    qh = root.power(0.5)
    q = root.q
    sites = []
    for n, (pq, pr) in enumerate(zip(config.q_points, config.r_points), start=1):
        site = SiteParams(
            alpha=-pq.b * pr.b / c0,
            beta=-c0 * pq.d * pr.d,
            gamma=c0 * pq.c * pr.c,
            delta=pq.a * pr.a / (q * q * c0),
            a=-pq.c * pr.b / qh,
            b=pq.a * pr.d / (qh * q),
            c=qh * pq.b * pr.c,
            d=-pq.d * pr.a / qh,
        )
        if site.constraint_residual() > 1e-10:
            raise ConstraintError(f"site {n}: curve parametrization violates αγ = 𝕒𝕔, βδ = 𝕓𝕕")
        sites.append(site)
    return ModelParams(tuple(sites), root, strict=False)


def inversion_residual(config: ChPConfig, lam: complex) -> float:
    """
    x_q/y_p = −q^{3/2} λ𝕓/(β r), y_r/y_p = −q^{1/2} λα/(r𝕔) 의 최대 잔차

    r = λ y_p/𝖼₀ (게이지 r = (y_p/x_p)^{1/2} 의 분기 고정판)
    """
    root = config.root
    point = point_for_lambda(config, lam)
    r = lam * point.y / config.c0
    params = config.params()
    worst = 0.0
    for site, pq, pr in zip(params.sites, config.q_points, config.r_points):
        worst = max(worst, _rel(-root.power(1.5) * lam * site.b / (site.beta * r), pq.x / point.y))
        worst = max(worst, _rel(-root.power(0.5) * lam * site.alpha / (r * site.c), pr.y / point.y))
    return worst


# ====================
# W, W̄ 가중치
# ====================

@dataclass
class WPair:
    """W_qp(z(n))/W_qp(z(0)), W̄_qp(z(n))/W̄_qp(z(0)), z(n) = q^{−2n}"""
    w: np.ndarray
    wbar: np.ndarray
    cyclicity: Tuple[float, float]


def _w_steps(qpt: CurvePoint, ppt: CurvePoint, root: UnityRoot) -> Tuple[np.ndarray, np.ndarray]:
    p = root.p
    w = np.ones(p + 1, dtype=complex)
    wbar = np.ones(p + 1, dtype=complex)
    for n in range(1, p + 1):
        qn = root.power(-2 * n)
        den_w = qpt.y - qn * ppt.x
        den_wbar = ppt.y - qn * qpt.y
        if den_w == 0 or den_wbar == 0:
            raise DomainError(f"W recursion pole at step {n}")
        w[n] = w[n - 1] * (qpt.s / ppt.s) * (ppt.y - qn * qpt.x) / den_w
        wbar[n] = wbar[n - 1] * (ppt.s * qpt.s) * (root.power(-2) * qpt.x - qn * ppt.x) / den_wbar
    return w, wbar


def w_pair(qpt: CurvePoint, ppt: CurvePoint, root: UnityRoot, require_cyclic: bool = True,
           tol: float = 1e-9) -> WPair:
    """
    W, W̄ 표 (n = 0…p−1)

    Raises:
        CyclicityError: 곡선 밖의 점으로 W(z(p)) ≠ W(z(0)) 인 경우
    """
    p = root.p
    w, wbar = _w_steps(qpt, ppt, root)
    cyc = (float(abs(w[p] - 1)), float(abs(wbar[p] - 1)))
    if require_cyclic and max(cyc) > tol:
        raise CyclicityError(f"W tables not cyclic (W {cyc[0]:.2e}, W̄ {cyc[1]:.2e})")
    return WPair(w[:p].copy(), wbar[:p].copy(), cyc)


def w_ratio(qpt: CurvePoint, ppt: CurvePoint, root: UnityRoot, z: complex) -> Tuple[complex, complex]:
    """(W(zq)/W(zq^{-1}), W̄(zq)/W̄(zq^{-1})) 닫힌 형태"""
    qi = root.power(-1)
    rw = (ppt.s / qpt.s) * (qpt.y - ppt.x * z * qi) / (ppt.y - qpt.x * z * qi)
    rwbar = (-(root.q / z) / (ppt.s * qpt.s) * (ppt.y / ppt.x)
             * (1 - (qpt.y / ppt.y) * qi * z) / (1 - (qpt.x / ppt.x) * qi / z))
    return rw, rwbar


def w_recursion_residual(qpt: CurvePoint, ppt: CurvePoint, root: UnityRoot) -> float:
    """표의 연속비가 W(zq)/W(zq^{-1}) 닫힌 형태와 일치하는지 (z = q^{2j+1})"""
    p = root.p
    pair = w_pair(qpt, ppt, root, require_cyclic=False)
    # x = q^{2κ} ↔ n = −κ mod p
    wk = np.array([pair.w[(-j) % p] for j in range(p)])
    wbk = np.array([pair.wbar[(-j) % p] for j in range(p)])
    worst = 0.0
    for j in range(p - 1):
        rw, rwbar = w_ratio(qpt, ppt, root, root.power(2 * j + 1))
        worst = max(worst, _rel(wk[j + 1] / wk[j], rw), _rel(wbk[j + 1] / wbk[j], rwbar))
    return worst


def conjugation_residual(qpt: CurvePoint, ppt: CurvePoint, root: UnityRoot) -> float:
    """conj(W_qp(z(n))/W_qp(z(0))) = W̄_qp(z(p−n))/W̄_qp(z(0)) 의 최대 잔차"""
    p = root.p
    pair = w_pair(qpt, ppt, root, require_cyclic=False)
    return max(_rel(pair.w[n].conjugate(), pair.wbar[(p - n) % p]) for n in range(p))


# ====================
# 전달행렬
# ====================

def _digit_table(root: UnityRoot, n_sites: int) -> np.ndarray:
    p = root.p
    idx = np.arange(p ** n_sites)
    return np.stack([(idx // p ** i) % p for i in range(n_sites)], axis=1)


def chp_transfer(config: ChPConfig, lam: complex, hat: bool = False,
                 point: Optional[CurvePoint] = None) -> np.ndarray:
    """
    ⟨z|T|z′⟩ = ∏_n W_{q_n p}(z_n/z′_n) W̄_{r_n p}(z_n/z′_{n+1})
    ⟨z|T̂|z′⟩ = ∏_n W_{q_n p}(z_{n+1}/z′_n) W̄_{r_n p}(z_n/z′_n)

    z′_{N+1} = z′_1, z_{N+1} = z_1.

    Args:
        point: λ 대신 쓸 점 p (Ξ 이동된 점 등)
    """
    root, n_sites, p = config.root, config.n_sites, config.root.p
    point = point or point_for_lambda(config, lam)
    digits = _digit_table(root, n_sites)
    rows = digits[:, None, :]
    cols = digits[None, :, :]
    kernel = np.ones((p ** n_sites, p ** n_sites), dtype=complex)
    for n in range(n_sites):
        nxt = (n + 1) % n_sites
        w = w_pair(config.q_points[n], point, root).w
        wbar = w_pair(config.r_points[n], point, root).wbar
        # z_n/z′_m = z(m′) ↔ m′ = k′_m − k_n mod p
        if hat:
            kernel *= w[(cols[..., n] - rows[..., nxt]) % p] * wbar[(cols[..., n] - rows[..., n]) % p]
        else:
            kernel *= w[(cols[..., n] - rows[..., n]) % p] * wbar[(cols[..., nxt] - rows[..., n]) % p]
    return kernel


@dataclass
class BaxterFit:
    a: complex
    d: complex
    residual: float


def shift_residual(lhs: np.ndarray, down: np.ndarray, up: np.ndarray, a: complex, d: complex) -> float:
    """‖lhs − a·down − d·up‖ 상대 잔차"""
    diff = lhs - a * down - d * up
    scale = max(np.linalg.norm(lhs), abs(a) * np.linalg.norm(down), abs(d) * np.linalg.norm(up), 1e-300)
    return float(np.linalg.norm(diff) / scale)


def fit_shift_pair(lhs: np.ndarray, down: np.ndarray, up: np.ndarray) -> BaxterFit:
    """lhs ≈ a·down + d·up 최소제곱, 상대 잔차"""
    design = np.column_stack([down.ravel(), up.ravel()])
    coef, *_ = np.linalg.lstsq(design, lhs.ravel(), rcond=None)
    a, d = complex(coef[0]), complex(coef[1])
    return BaxterFit(a, d, shift_residual(lhs, down, up, a, d))


def shifted_transfers(config: ChPConfig, lam: complex) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(T_λ, T_{λ/q}, T_{qλ}), T_{λ/q} 는 Ξ(p), T_{qλ} 는 Ξ^{-1}(p)"""
    root = config.root
    point = point_for_lambda(config, lam)
    t0 = chp_transfer(config, lam, point=point)
    down = chp_transfer(config, lam / root.q, point=point.shifted(root, 1))
    up = chp_transfer(config, lam * root.q, point=point.shifted(root, -1))
    return t0, down, up


def baxter_check(config: ChPConfig, lam: complex, params: Optional[ModelParams] = None) -> BaxterFit:
    """τ₂(λ)T_λ = a_BS T_{λ/q} + d_BS T_{qλ}, 계수는 닫힌 형태"""
    params = params or config.params()
    t0, down, up = shifted_transfers(config, lam)
    a_bs, d_bs = bs_coefficients(config, lam, params)
    return BaxterFit(a_bs, d_bs, shift_residual(transfer(params, lam) @ t0, down, up, a_bs, d_bs))


def bs_coefficients(config: ChPConfig, lam: complex,
                    params: Optional[ModelParams] = None) -> Tuple[complex, complex]:
    """
    닫힌 형태 계수 (a_BS, d_BS)

    f_n = W_{q_n p}(z(l)) W̄_{r_n p}(z(l)) (z(0) 정규화), r = λ y_p/𝖼₀.

    Raises:
        DomainError: 계수의 극
    """
    root = config.root
    params = params or config.params()
    point = point_for_lambda(config, lam)
    q, qh, l = root.q, root.power(0.5), root.l
    r = lam * point.y / config.c0
    a_bs = complex((-1) ** config.n_sites)
    d_bs = complex((-1) ** config.n_sites)
    for site, pq, pr in zip(params.sites, config.q_points, config.r_points):
        f = w_pair(pq, point, root).w[l] * w_pair(pr, point, root).wbar[l]
        den_a = 1 + lam * site.alpha / (qh * r * site.c)
        den_d = 1 - qh * r * lam * site.alpha / site.a
        if den_a == 0 or den_d == 0:
            raise DomainError(f"pole of the Baxter coefficients at λ = {lam}")
        a_bs *= (site.beta * f * (1 / lam + site.alpha * site.d * lam / (q * site.beta * site.c))
                 * (1 + qh * lam * site.b / (site.beta * r)) / den_a)
        d_bs *= (site.beta * f * (1 / lam + q * site.alpha * site.b * lam / (site.beta * site.a))
                 * (1 - lam * site.d * r / (qh * site.beta)) / den_d)
    return a_bs, d_bs


def theta_commutation(config: ChPConfig, lam: complex) -> float:
    theta = config.params().space.theta_op()
    return _comm(theta, chp_transfer(config, lam))


def commutation_residuals(config: ChPConfig, lam: complex, mu: complex) -> Dict[str, float]:
    """[Θ, T_λ], [τ₂(μ), T_λ], [T_λ, T_μ] 상대 잔차 (translation_invariant 구성에서 0)"""
    params = config.params()
    t_lam, t_mu = chp_transfer(config, lam), chp_transfer(config, mu)
    return {
        "theta": _comm(params.space.theta_op(), t_lam),
        "transfer": _comm(transfer(params, mu), t_lam),
        "self": _comm(t_lam, t_mu),
    }


def exchange_residuals(config: ChPConfig, lam: complex, mu: complex) -> Dict[str, float]:
    """
    T_λ T̂_μ = T_μ T̂_λ, T̂_μ T_λ = T̂_λ T_μ 상대 잔차

    q_n = r_n 이면 site 마다 점이 달라도 성립한다.
    """
    t_lam, t_mu = chp_transfer(config, lam), chp_transfer(config, mu)
    h_lam, h_mu = chp_transfer(config, lam, hat=True), chp_transfer(config, mu, hat=True)
    scale = max(np.linalg.norm(t_lam) * np.linalg.norm(h_mu), np.linalg.norm(t_mu) * np.linalg.norm(h_lam), 1e-300)
    return {
        "left": float(np.linalg.norm(t_lam @ h_mu - t_mu @ h_lam) / scale),
        "right": float(np.linalg.norm(h_mu @ t_lam - h_lam @ t_mu) / scale),
    }


def normality_check(config: ChPConfig, lam: Optional[complex] = None,
                    point: Optional[CurvePoint] = None) -> Dict[str, complex]:
    """
    ‖T T† − T† T‖/‖T‖², T† ≈ g T̂ 최소제곱 g 와 잔차

    T† = g T̂ 는 selfadjoint_spectral_point 의 점에서 성립하고,
    정규성은 translation_invariant 구성에서만 성립한다.
    """
    if point is None and lam is None:
        raise DomainError("normality check needs a spectral parameter or a curve point")
    t = chp_transfer(config, lam, point=point)
    t_hat = chp_transfer(config, lam, hat=True, point=point)
    dag = t.conj().T
    norm = max(np.linalg.norm(t) ** 2, 1e-300)
    normality = float(np.linalg.norm(t @ dag - dag @ t) / norm)
    g = complex(np.vdot(t_hat.ravel(), dag.ravel()) / max(np.vdot(t_hat.ravel(), t_hat.ravel()).real, 1e-300))
    t_dagger = float(np.linalg.norm(dag - g * t_hat) / max(np.linalg.norm(dag), 1e-300))
    return {"normality": normality, "t_dagger": t_dagger, "g": g}


# ====================
# 자기수반 점
# ====================

def _check_selfadjoint_modulus(k: complex, epsilon: int) -> complex:
    if epsilon not in (1, -1):
        raise DomainError(f"epsilon must be ±1, got {epsilon}")
    _check_modulus(k)
    if abs(complex(k).conjugate() + epsilon * k) > 1e-12 * abs(k):
        raise ConstraintError(f"self-adjoint points need k* = −εk (k = {k}, ε = {epsilon})")
    kp = cmath.sqrt(1 - k * k)
    if abs(kp.imag) > 1e-12 * abs(kp):
        raise ConstraintError(f"k′ must be real for self-adjoint points (k′ = {kp})")
    return complex(kp.real)


def selfadjoint_point(k: complex, kp: complex, d: complex, epsilon: int, root: UnityRoot,
                      eps0: int = 1) -> CurvePoint:
    """(a, −εε₀ q a*, ε₀ d*, d): s = ε₀ d/d*, x^p = (1 − k′ s^{−p})/k"""
    p = root.p
    d = complex(d)
    s = eps0 * d / d.conjugate()
    x = _principal_root((1 - kp / s ** p) / k, p)
    a = x * d
    return CurvePoint(a, -epsilon * eps0 * root.q * a.conjugate(), eps0 * d.conjugate(), d, complex(k), kp)


def _phase_root(value: complex, phase: complex, root: UnityRoot) -> complex:
    """value 의 p제곱근 중 z* = phase·z 를 만족하는 것"""
    base = _principal_root(value, root.p)
    for j in range(root.p):
        cand = base * root.power(2 * j)
        if abs(cand.conjugate() - phase * cand) <= 1e-9 * abs(cand):
            return cand
    raise ConstraintError(f"no p-th root of {value} satisfies z* = {phase:.4g} z")


def selfadjoint_spectral_point(config: ChPConfig, epsilon: int, s: float = 1.3) -> CurvePoint:
    """
    정규성 점 p: x* = −ε q^{-1} x, y* = −ε q y, s* = s

    Raises:
        ConstraintError: k* ≠ −εk 이거나 조건을 만족하는 분기가 없는 경우
        DomainError: s 가 양의 실수가 아니거나 곡선의 극인 경우
    """
    root, k, kp = config.root, config.k, config.kp
    _check_selfadjoint_modulus(k, epsilon)
    if s <= 0:
        raise DomainError(f"s must be a positive real, got {s}")
    sp = complex(s) ** root.p
    if abs(sp - kp) < 1e-12 or abs(sp * kp - 1) < 1e-12:
        raise DomainError(f"s = {s} sits on a pole of the curve")
    x = _phase_root((1 - kp / sp) / k, -epsilon / root.q, root)
    y = _phase_root((1 - kp * sp) / k, -epsilon * root.q, root)
    point = CurvePoint(x * s, y, 1.0 + 0j, complex(s), k, kp)
    if point.residual(root.p) > _CURVE_ACCEPT:
        raise ConstraintError(f"self-adjoint spectral point off the curve (residual {point.residual(root.p):.2e})")
    return point


def selfadjoint_k(point: CurvePoint, epsilon: int, p: int) -> complex:
    """곡선 방정식에서 얻는 k = (x^p − ε x*^p)/(1 − ε|x|^{2p})"""
    x = point.x
    return (x ** p - epsilon * x.conjugate() ** p) / (1 - epsilon * abs(x) ** (2 * p))


def selfadjoint_config(k: complex, d_values: Sequence[complex], epsilon: int, root: UnityRoot,
                       c0: float = 1.0, eps0: Optional[Sequence[int]] = None) -> ChPConfig:
    """
    q_n = r_n 인 자기수반 곡선 구성 (𝖼₀ 실수)

    Raises:
        ConstraintError: k* ≠ −εk 또는 구성 결과가 자기수반 조건을 만족하지 않는 경우
    """
    kp = _check_selfadjoint_modulus(k, epsilon)
    if abs(complex(c0).imag) > 0:
        raise ConstraintError("c0 must be real for self-adjoint configurations")
    signs = list(eps0) if eps0 is not None else [1] * len(d_values)
    points = tuple(selfadjoint_point(k, kp, d, epsilon, root, e) for d, e in zip(d_values, signs))
    config = ChPConfig(complex(k), kp, complex(c0), points, points, root)
    herm = hermiticity_residual(config.params(), 0.71 + 0.37j, epsilon)
    if config.curve_residual() > _CURVE_ACCEPT or herm > 1e-10:
        raise ConstraintError(f"self-adjoint construction failed (curve {config.curve_residual():.2e}, "
                              f"hermiticity {herm:.2e})")
    logger.info(f"✅ 자기수반 chP 구성: N={config.n_sites}, k={k}, ε={epsilon}")
    return config


def rbar_subvariety(k: complex, d_moduli: Sequence[float], epsilon: int, root: UnityRoot,
                    c0: float = 1.0, eps0: int = 1, a_phase: Optional[complex] = None) -> ChPConfig:
    """
    자기수반 부분다양체 위의 곡선 구성

    d_n > 0 실수, a_n = τ |x| d_n 에서 τ² = −ε q² (ε = −1 이면 τ = ±q, ε = +1 이면 τ = ±iq).
    |x|^p = (1 − ε₀k′)/(k τ^p) 가 양의 실수가 되는 τ 부호를 고른다.

    Args:
        a_phase: τ 를 직접 지정 (위상 조건 위반 입력은 거부됨)

    Raises:
        ConstraintError: |x|^p 가 양수가 아니거나 부분다양체/자기수반 조건 잔차 > 1e-10
    """
    kp = _check_selfadjoint_modulus(k, epsilon)
    p, q = root.p, root.q
    base = q * cmath.sqrt(-epsilon)
    candidates = [complex(a_phase)] if a_phase is not None else [base, -base]
    big_x = None
    for tau in candidates:
        value = (1 - eps0 * kp) / (k * tau ** p)
        if abs(value.imag) <= 1e-12 * abs(value) and value.real > 0:
            big_x = value.real
            break
    if big_x is None:
        raise ConstraintError(f"no phase choice gives a positive |x|^p for k = {k}")
    x = tau * big_x ** (1.0 / p)
    points = []
    for mod in d_moduli:
        if mod <= 0:
            raise DomainError(f"d moduli must be positive, got {mod}")
        d = complex(mod)
        a = x * d
        points.append(CurvePoint(a, -epsilon * eps0 * q * a.conjugate(), eps0 * d, d, complex(k), kp))
    config = ChPConfig(complex(k), kp, complex(c0), tuple(points), tuple(points), root)
    params = config.params()
    curve = config.curve_residual()
    sub = subvariety_residual(params)
    herm = hermiticity_residual(params, 0.71 + 0.37j, epsilon)
    if max(curve, sub, herm) > 1e-10:
        raise ConstraintError(f"subvariety construction failed (curve {curve:.2e}, "
                              f"subvariety {sub:.2e}, hermiticity {herm:.2e})")
    logger.info(f"✅ 부분다양체 chP 구성: N={config.n_sites}, k={k}, τ={tau:.4f}")
    return config


def average_ratio(config: ChPConfig, pair, big_lambda: complex) -> Tuple[complex, complex]:
    """
    (∏𝚊/∏𝚍 궤도곱, (−1)^N ∏_n (1 − |x_n|Λ)²/(1 + |x_n|Λ)²)
    """
    root, p = config.root, config.root.p
    lam = _principal_root(big_lambda, p)
    orbit = root.orbit(lam)
    got = complex(np.prod([pair.a(z) for z in orbit]) / np.prod([pair.d(z) for z in orbit]))
    want = complex((-1) ** config.n_sites)
    for pt in config.q_points:
        xm = abs(pt.x) ** p
        want *= (1 - xm * big_lambda) ** 2 / (1 + xm * big_lambda) ** 2
    return got, want


# ====================
# 고유값 대응
# ====================

@dataclass
class EigenvalueRow:
    index: int
    k: int
    value: complex
    leakage: float
    relation: float


def _rayleigh(op: np.ndarray, vec: np.ndarray) -> Tuple[complex, float]:
    image = op @ vec
    value = complex(np.vdot(vec, image) / np.vdot(vec, vec))
    leak = float(np.linalg.norm(image - value * vec) / max(np.linalg.norm(image), 1e-300))
    return value, leak


def eigenvalue_map(config: ChPConfig, lines: Sequence, lam: complex) -> List[EigenvalueRow]:
    """
    결합 고유벡터마다 T_λ 고유값과 t(λ) q_λ = a q_{λ/q} + d q_{qλ} 잔차

    a, d 는 닫힌 형태 계수 (a_BS, d_BS).
    """
    t0, down, up = shifted_transfers(config, lam)
    a, d = bs_coefficients(config, lam)
    rows = []
    for line in lines:
        v = line.eigvec
        q0, leak0 = _rayleigh(t0, v)
        qm, leak_m = _rayleigh(down, v)
        qp, leak_p = _rayleigh(up, v)
        lhs = line.t(lam) * q0
        rhs = a * qm + d * qp
        relation = abs(lhs - rhs) / max(abs(lhs), abs(a * qm), abs(d * qp), 1e-300)
        rows.append(EigenvalueRow(line.index, line.k, q0, max(leak0, leak_m, leak_p), float(relation)))
    return rows


def completeness_table(config: ChPConfig, lines: Sequence, pair, epsilon: int,
                       lam: complex) -> Tuple[List[Dict], bool]:
    """
    chP 고유값 ↔ ε-자기수반 Bethe 해 대응 표

    lines 에는 Q 가 채워져 있어야 한다 (spectrum.attach_baxter_q).

    Returns:
        (행 목록, 전단사 여부)
    """
    from .spectrum import bethe_check

    root = config.root
    rows = []
    for row in eigenvalue_map(config, lines, lam):
        line = next(l for l in lines if l.index == row.index)
        entry = {
            "index": row.index,
            "k": row.k,
            "chp_eigenvalue": row.value,
            "leakage": row.leakage,
            "relation": row.relation,
            "bethe_residual": float("inf"),
            "self_adjoint_roots": False,
            "n_roots": 0,
        }
        if line.Q is not None:
            bethe = bethe_check(line.Q, pair.a, pair.d, root, epsilon)
            entry["bethe_residual"] = bethe.max_residual
            entry["n_roots"] = len(bethe.roots)
            entry["self_adjoint_roots"] = bool(bethe.root_report and bethe.root_report.epsilon_self_adjoint)
        entry["matched"] = (entry["bethe_residual"] <= tolerance("bethe") and entry["self_adjoint_roots"]
                            and row.leakage <= tolerance("chp_eigenvalue_map"))
        rows.append(entry)
    bijective = len(rows) == config.root.p ** config.n_sites and all(r["matched"] for r in rows)
    if bijective:
        logger.info(f"✅ chP 고유값 ↔ Bethe 해 전단사 ({len(rows)}개)")
    else:
        logger.warning(f"⚠️ 대응되지 않은 라인 {sum(not r['matched'] for r in rows)}개")
    return rows, bijective
