# -*- coding: utf-8 -*-
"""
일반화 Baxter Q 모듈

게이지 변환된 Lax 의 (2,1) 원소가 만드는 1차 점화식, 순환 정규화된
Y-함수 표, σ-사슬의 Möbius 고정점 풀이, 임의 순환 표현에 대한 Q_λ 핵,
삼각성/ Baxter 방정식/ 평균값 항등식 검사
"""

import cmath
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import UnityRoot
from .averages import AverageMatrix, average_lax, average_monodromy, omega_eigenvalues
from .chp import BaxterFit, ChPConfig, chp_transfer, fit_shift_pair, point_for_lambda
from .exceptions import CyclicityError, DegeneracyError, DomainError
from .model import ModelParams, SiteParams, local_lax, qdet_scalar, transfer
from .sov import SOVGrid
from .weyl import embed

logger = logging.getLogger(__name__)


def _principal_root(value: complex, p: int) -> complex:
    return cmath.exp(cmath.log(value) / p)


# ====================
# σ-사슬
# ====================

@dataclass
class SigmaChain:
    """
    site별 게이지 매개변수 σ_n (h_n = σ_n/z′_n) 과 Möbius 사슬 데이터

    sigma_p 는 σ_1^p … σ_{N+1}^p (닫힘 σ_{N+1}^p = σ_1^p).
    """
    big_lambda: complex
    sigma: np.ndarray
    sigma_p: np.ndarray
    site_maps: List[np.ndarray] = field(default_factory=list)
    mobius: Optional[np.ndarray] = None
    eigenvalues: Tuple[complex, ...] = ()
    branch: int = 0
    closure: float = 0.0

    @property
    def n_sites(self) -> int:
        return len(self.sigma)

    @property
    def r_gauge(self) -> np.ndarray:
        return 1 / self.sigma


def _site_powers(site: SiteParams, root: UnityRoot, big_lambda: complex) -> Dict[str, complex]:
    p = root.p
    hp = root.power(p / 2)
    return {
        "A1": hp * site.c ** p,
        "B1": site.gamma ** p / big_lambda,
        "A2": site.d ** p / hp,
        "B2": site.delta ** p * big_lambda,
        "P": big_lambda * site.alpha ** p / (hp * site.c ** p),
        "R": hp * site.beta ** p / (big_lambda * site.d ** p),
    }


def site_map(site: SiteParams, root: UnityRoot, big_lambda: complex) -> np.ndarray:
    """
    σ_n^p → σ_{n+1}^p 분수선형 사상의 행렬

    m = 1/μ_F(σ^p) = (−B₂σ^p − A₂)/(−B₁σ^p + A₁), σ′^p = (m − 1)/(R m + P)
    """
    w = _site_powers(site, root, big_lambda)
    inner = np.array([[-w["B2"], -w["A2"]], [-w["B1"], w["A1"]]], dtype=complex)
    outer = np.array([[1, -1], [w["R"], w["P"]]], dtype=complex)
    return outer @ inner


def cofactor_residual(site: SiteParams, root: UnityRoot, big_lambda: complex) -> float:
    """site 사상 = 평균 Lax 𝓛_n(Λ) 의 여인자 행렬 [[𝒟, −𝒞], [−ℬ, 𝒜]]"""
    avg = average_lax(site, root)(big_lambda)
    cof = np.array([[avg[1, 1], -avg[1, 0]], [-avg[0, 1], avg[0, 0]]])
    return float(np.linalg.norm(site_map(site, root, big_lambda) - cof) / max(np.linalg.norm(cof), 1e-300))


def _apply(m: np.ndarray, value: complex) -> complex:
    den = m[1, 0] * value + m[1, 1]
    if den == 0:
        raise DegeneracyError("Möbius step hits a pole")
    return complex((m[0, 0] * value + m[0, 1]) / den)


def _ratio_f(site: SiteParams, root: UnityRoot, lam: complex, w: complex, x: complex) -> complex:
    qh = root.power(0.5)
    return -(qh * site.c - site.gamma / lam * w * x) / (site.d / qh + site.delta * lam * w * x)


def _ratio_g(site: SiteParams, root: UnityRoot, lam: complex, w: complex, y: complex) -> complex:
    qh = root.power(0.5)
    return (1 + lam * site.alpha * w * y / (qh * site.c)) / (1 - qh * site.beta * w * y / (lam * site.d))


def _odd_grid(root: UnityRoot) -> List[complex]:
    # q^{2j+1}, j = 0…p−1 (S_p 전체)
    return [root.power(2 * j + 1) for j in range(root.p)]


def y_ratio_monodromies(params: ModelParams, lam: complex, chain: SigmaChain) -> List[Tuple[complex, complex]]:
    """
    site별 (μ_F, μ_G): 한 주기 동안의 연속비 곱

    σ-사슬이 맞으면 μ_F(σ_n) μ_G(σ_{n+1}) = 1.
    """
    root, n_sites = params.root, params.n_sites
    grid = _odd_grid(root)
    out = []
    for n, site in enumerate(params.sites):
        w, w_next = chain.sigma[n], chain.sigma[(n + 1) % n_sites]
        mu_f = complex(np.prod([_ratio_f(site, root, lam, w, x) for x in grid]))
        mu_g = complex(np.prod([_ratio_g(site, root, lam, w_next, x) for x in grid]))
        out.append((mu_f, mu_g))
    return out


def cyclicity_residual(params: ModelParams, lam: complex, chain: SigmaChain) -> float:
    return max(abs(f * g - 1) for f, g in y_ratio_monodromies(params, lam, chain))


def _build_chain(params: ModelParams, big_lambda: complex, start: complex,
                 maps: List[np.ndarray]) -> Tuple[np.ndarray, float]:
    values = [complex(start)]
    for m in maps:
        values.append(_apply(m, values[-1]))
    closure = abs(values[-1] - values[0]) / max(abs(values[0]), 1.0)
    return np.array(values), float(closure)


def mobius_solve(params: ModelParams, lam: complex, tol: float = 1e-9) -> SigmaChain:
    """
    σ-사슬 풀이

    𝔸 = S_N ⋯ S_1 의 고유벡터 e 로 σ_1^p = e[0]/e[1] (절댓값 큰 고유값 먼저),
    σ_{n+1}^p = S_n(σ_n^p) 전파, σ_n 은 주분기 p제곱근.

    Raises:
        DegeneracyError: 𝔸 고유값 중복 또는 두 분기 모두 실패
    """
    if lam == 0:
        raise DomainError("spectral parameter λ must be nonzero")
    root, p = params.root, params.p
    big_lambda = complex(lam) ** p
    maps = [site_map(site, root, big_lambda) for site in params.sites]
    composite = np.eye(2, dtype=complex)
    for m in maps:
        composite = m @ composite
    vals, vecs = np.linalg.eig(composite)
    if abs(vals[0] - vals[1]) <= 1e-12 * max(abs(vals[0]), abs(vals[1]), 1e-300):
        raise DegeneracyError(f"σ-chain matrix has a double eigenvalue at Λ = {big_lambda}")
    order = sorted(range(2), key=lambda i: -abs(vals[i]))

    failures = []
    for branch, i in enumerate(order):
        e = vecs[:, i]
        if abs(e[1]) <= 1e-12 * np.linalg.norm(e) or abs(e[0]) <= 1e-12 * np.linalg.norm(e):
            failures.append(f"branch {branch}: eigenvector component vanishes")
            continue
        try:
            values, closure = _build_chain(params, big_lambda, e[0] / e[1], maps)
        except DegeneracyError as err:
            failures.append(f"branch {branch}: {err}")
            continue
        if np.any(values == 0) or not np.all(np.isfinite(values)):
            failures.append(f"branch {branch}: σ^p degenerates")
            continue
        sigma = np.array([_principal_root(v, p) for v in values[:-1]])
        chain = SigmaChain(big_lambda, sigma, values, maps, composite, tuple(complex(v) for v in vals),
                           branch, closure)
        cyc = cyclicity_residual(params, lam, chain)
        if closure <= tol and cyc <= tol:
            if branch:
                logger.warning(f"⚠️ σ-사슬: 두 번째 고유벡터 분기 사용 (Λ = {big_lambda:.4g})")
            return chain
        failures.append(f"branch {branch}: closure {closure:.2e}, cyclicity {cyc:.2e}")
    raise DegeneracyError("σ-chain has no valid branch: " + "; ".join(failures))


def forced_chain(params: ModelParams, lam: complex, sigma: Sequence[complex]) -> SigmaChain:
    """주어진 σ_n 으로 사슬 구성 (chP 게이지 비교용)"""
    p = params.p
    sigma = np.array([complex(s) for s in sigma])
    if len(sigma) != params.n_sites:
        raise DomainError(f"expected {params.n_sites} gauge parameters, got {len(sigma)}")
    powers = np.append(sigma ** p, sigma[0] ** p)
    return SigmaChain(complex(lam) ** p, sigma, powers, branch=-1)


def omega_matching(params: ModelParams, chain: SigmaChain, avg: Optional[AverageMatrix] = None) -> float:
    """𝔸 고유값 집합 = {Ω₊, Ω₋}"""
    avg = avg or average_monodromy(params)
    om_p, om_m = omega_eigenvalues(avg, chain.big_lambda)
    e1, e2 = chain.eigenvalues
    scale = max(abs(om_p), abs(om_m), 1e-300)
    return float(min(abs(e1 - om_p) + abs(e2 - om_m), abs(e1 - om_m) + abs(e2 - om_p)) / scale)


# ====================
# Y 함수와 Q 핵
# ====================

@dataclass
class YTable:
    """Y^(n)(z, z′, z″) = F̂(z/z′) Ĝ(z/z″), F̂, Ĝ 는 x = q^{2κ} 색인"""
    f: np.ndarray
    g: np.ndarray
    cyclicity: float

    def values(self) -> np.ndarray:
        p = len(self.f)
        k = np.arange(p)
        diff = (k[:, None] - k[None, :]) % p
        return self.f[diff][:, :, None] * self.g[diff][:, None, :]


def y_function(params: ModelParams, n: int, lam: complex, chain: SigmaChain) -> YTable:
    """
    site n (1부터) 의 순환 Y 표

    F̂(qx)/F̂(x/q) = c_F ρ_F(x), Ĝ(qy)/Ĝ(y/q) = c_G ρ_G(y), c_F = μ_F^{−1/p}, c_G = 1/c_F
    """
    root, p, n_sites = params.root, params.p, params.n_sites
    if not 1 <= n <= n_sites:
        raise DomainError(f"site {n} out of range 1..{n_sites}")
    site = params.sites[n - 1]
    w, w_next = chain.sigma[n - 1], chain.sigma[n % n_sites]
    grid = _odd_grid(root)
    rf = np.array([_ratio_f(site, root, lam, w, x) for x in grid])
    rg = np.array([_ratio_g(site, root, lam, w_next, x) for x in grid])
    mu_f = complex(np.prod(rf))
    if mu_f == 0 or not np.isfinite(mu_f):
        raise CyclicityError(f"site {n}: Y recursion degenerates (μ_F = {mu_f})")
    c_f = _principal_root(1 / mu_f, p)
    steps_f, steps_g = c_f * rf, rg / c_f
    f = np.ones(p, dtype=complex)
    g = np.ones(p, dtype=complex)
    for j in range(p - 1):
        f[j + 1] = f[j] * steps_f[j]
        g[j + 1] = g[j] * steps_g[j]
    cyc = max(abs(np.prod(steps_f) - 1), abs(np.prod(steps_g) - 1))
    return YTable(f, g, float(cyc))


def _digit_table(root: UnityRoot, n_sites: int) -> np.ndarray:
    p = root.p
    idx = np.arange(p ** n_sites)
    return np.stack([(idx // p ** i) % p for i in range(n_sites)], axis=1)


def generalized_q(params: ModelParams, lam: complex, chain: Optional[SigmaChain] = None) -> np.ndarray:
    """
    Q_λ(z, z′) = ∏_n Y^(n)(z_n, z′_n, z′_{n+1}), z′_{N+1} = z′_1

    Raises:
        CyclicityError: Y 표가 순환하지 않는 경우 (허용오차 1e-9)
    """
    chain = chain or mobius_solve(params, lam)
    root, n_sites, p = params.root, params.n_sites, params.p
    digits = _digit_table(root, n_sites)
    rows, cols = digits[:, None, :], digits[None, :, :]
    kernel = np.ones((p ** n_sites, p ** n_sites), dtype=complex)
    for n in range(n_sites):
        table = y_function(params, n + 1, lam, chain)
        if table.cyclicity > 1e-9:
            raise CyclicityError(f"site {n + 1}: Y table not cyclic ({table.cyclicity:.2e})")
        nxt = (n + 1) % n_sites
        kernel *= table.f[(rows[..., n] - cols[..., n]) % p] * table.g[(rows[..., n] - cols[..., nxt]) % p]
    return kernel


def _gauged_entries(site: SiteParams, root: UnityRoot, lam: complex, h: complex,
                    h_next: complex) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """G(h′) L G(h)⁻¹ 의 (1,1), (2,1), (2,2) 원소, G(h) = [[1, 0], [h, 1]]"""
    (l11, l12), (l21, l22) = local_lax(site, root, lam)
    t11 = l11 - h * l12
    t21 = h_next * t11 + l21 - h * l22
    t22 = h_next * l12 + l22
    return t11, t21, t22


def triangularity_residual(params: ModelParams, lam: complex, chain: SigmaChain) -> float:
    """site별 ⟨z|L̃_n(λ)₂₁|Y^(n)(·, z′, z″)⟩ = 0 의 최대 상대 잔차"""
    root, p, n_sites = params.root, params.p, params.n_sites
    worst = 0.0
    for n in range(n_sites):
        values = y_function(params, n + 1, lam, chain).values()
        w, w_next = chain.sigma[n], chain.sigma[(n + 1) % n_sites]
        for kp in range(p):
            for kpp in range(p):
                _, t21, _ = _gauged_entries(params.sites[n], root, lam, w / root.power(2 * kp),
                                            w_next / root.power(2 * kpp))
                vec = values[:, kp, kpp]
                scale = max(np.linalg.norm(t21) * np.linalg.norm(vec), 1e-300)
                worst = max(worst, float(np.linalg.norm(t21 @ vec) / scale))
    return worst


def operator_triangularity(params: ModelParams, lam: complex, chain: SigmaChain,
                           kernel: Optional[np.ndarray] = None) -> float:
    """전체 공간에서 열마다 embed(L̃_n 21) Q_λ[:, z′] = 0"""
    root, n_sites = params.root, params.n_sites
    kernel = generalized_q(params, lam, chain) if kernel is None else kernel
    digits = _digit_table(root, n_sites)
    worst = 0.0
    for col in range(kernel.shape[1]):
        vec = kernel[:, col]
        for n in range(n_sites):
            z_here = root.power(2 * digits[col, n])
            z_next = root.power(2 * digits[col, (n + 1) % n_sites])
            _, t21, _ = _gauged_entries(params.sites[n], root, lam, chain.sigma[n] / z_here,
                                        chain.sigma[(n + 1) % n_sites] / z_next)
            op = embed(t21, n + 1, n_sites)
            scale = max(np.linalg.norm(op) * np.linalg.norm(vec), 1e-300)
            worst = max(worst, float(np.linalg.norm(op @ vec) / scale))
    return worst


def shift_recursion_residual(params: ModelParams, lam: complex, chain: SigmaChain) -> float:
    """
    λ-이동 점화식: L̃₁₁(λ) Y_λ ∝ Y_{λ/q}, L̃₂₂(λ) Y_λ ∝ Y_{qλ} (열에 무관한 비례상수)
    """
    root, p, n_sites, q = params.root, params.p, params.n_sites, params.root.q
    worst = 0.0
    for n in range(n_sites):
        y0 = y_function(params, n + 1, lam, chain).values()
        y_down = y_function(params, n + 1, lam / q, chain).values()
        y_up = y_function(params, n + 1, lam * q, chain).values()
        w, w_next = chain.sigma[n], chain.sigma[(n + 1) % n_sites]
        images_11, images_22 = [], []
        for kp in range(p):
            for kpp in range(p):
                t11, _, t22 = _gauged_entries(params.sites[n], root, lam, w / root.power(2 * kp),
                                              w_next / root.power(2 * kpp))
                images_11.append(t11 @ y0[:, kp, kpp])
                images_22.append(t22 @ y0[:, kp, kpp])
        for images, target in ((images_11, y_down), (images_22, y_up)):
            lhs = np.concatenate(images)
            rhs = np.concatenate([target[:, kp, kpp] for kp in range(p) for kpp in range(p)])
            coef = np.vdot(rhs, lhs) / max(np.vdot(rhs, rhs).real, 1e-300)
            worst = max(worst, float(np.linalg.norm(lhs - coef * rhs) / max(np.linalg.norm(lhs), 1e-300)))
    return worst


# ====================
# Baxter 방정식과 항등식
# ====================

def baxter_fit(params: ModelParams, lam: complex, chain: Optional[SigmaChain] = None) -> BaxterFit:
    """τ₂(λ)Q_λ = a_B Q_{λ/q} + d_B Q_{qλ}, 세 핵 모두 같은 σ-사슬"""
    q = params.root.q
    chain = chain or mobius_solve(params, lam)
    q0 = generalized_q(params, lam, chain)
    down = generalized_q(params, lam / q, chain)
    up = generalized_q(params, lam * q, chain)
    return fit_shift_pair(transfer(params, lam) @ q0, down, up)


def _orbit_products(params: ModelParams, lam: complex, chain: SigmaChain) -> Tuple[complex, complex, float]:
    a_prod, d_prod, worst = 1 + 0j, 1 + 0j, 0.0
    for z in params.root.orbit(lam):
        fit = baxter_fit(params, z, chain)
        a_prod *= fit.a
        d_prod *= fit.d
        worst = max(worst, fit.residual)
    return a_prod, d_prod, worst


def coefficient_identities(params: ModelParams, lam: complex, chain: Optional[SigmaChain] = None,
                           avg: Optional[AverageMatrix] = None) -> Dict[str, float]:
    """
    (i) ∏a_B + ∏d_B = 𝒜 + 𝒟, (ii) ∏a_B ∏d_B = det 𝓜, (iii) a_B(λ)d_B(λ/q) = det_q M(λ)

    Returns:
        {"average_sum", "average_det", "n_b", "fit"}
    """
    q = params.root.q
    avg = avg or average_monodromy(params)
    chain = chain or mobius_solve(params, lam)
    big_lambda = chain.big_lambda
    a_prod, d_prod, fit_res = _orbit_products(params, lam, chain)
    trace, det = avg.trace()(big_lambda), avg.det()(big_lambda)
    here = baxter_fit(params, lam, chain)
    below = baxter_fit(params, lam / q, chain)
    qdet = qdet_scalar(params, lam)
    return {
        "average_sum": float(abs(a_prod + d_prod - trace) / max(abs(trace), abs(a_prod), abs(d_prod), 1e-300)),
        "average_det": float(abs(a_prod * d_prod - det) / max(abs(det), abs(a_prod * d_prod), 1e-300)),
        "n_b": float(abs(here.a * below.d / qdet - 1)),
        "fit": float(max(fit_res, here.residual, below.residual)),
    }


def b_zero_residual(params: ModelParams, grid: SOVGrid, avg: Optional[AverageMatrix] = None) -> float:
    """ℬ(Z_a) = 0 인 Λ 에서 {∏a_B, ∏d_B} = {𝒜(Z_a), 𝒟(Z_a)}"""
    avg = avg or average_monodromy(params)
    worst = 0.0
    for big_z in grid.Z[:-1]:
        lam = _principal_root(complex(big_z), params.p)
        chain = mobius_solve(params, lam)
        a_prod, d_prod, _ = _orbit_products(params, lam, chain)
        a_avg, d_avg = avg.A(big_z), avg.D(big_z)
        scale = max(abs(a_avg), abs(d_avg), 1e-300)
        worst = max(worst, min(abs(a_prod - a_avg) + abs(d_prod - d_avg),
                               abs(a_prod - d_avg) + abs(d_prod - a_avg)) / scale)
    return float(worst)


def commutator_metric(params: ModelParams, lam: complex, mu: complex) -> float:
    """‖[Q_λ, Q_μ]‖ (정보성 지표)"""
    a, b = generalized_q(params, lam), generalized_q(params, mu)
    return float(np.linalg.norm(a @ b - b @ a) / max(np.linalg.norm(a) * np.linalg.norm(b), 1e-300))


def chp_gauge(config: ChPConfig, lam: complex) -> List[complex]:
    """chP 곡선 위에서의 게이지 σ_n = λ x_p/𝖼₀ (모든 site 공통)"""
    point = point_for_lambda(config, lam)
    return [lam * point.x / config.c0] * config.n_sites


def chp_agreement(config: ChPConfig, lam: complex) -> float:
    """
    chP 게이지에서 Q_λ 핵과 chP T_λ 핵의 열별 비례 잔차

    두 핵은 열마다 상수배 (p제곱근 위상 포함) 차이만 허용된다.
    """
    params = config.params()
    chain = forced_chain(params, lam, chp_gauge(config, lam))
    q_kernel = generalized_q(params, lam, chain)
    t_kernel = chp_transfer(config, lam)
    worst = 0.0
    for col in range(q_kernel.shape[1]):
        u, v = t_kernel[:, col], q_kernel[:, col]
        coef = np.vdot(u, v) / max(np.vdot(u, u).real, 1e-300)
        worst = max(worst, float(np.linalg.norm(v - coef * u) / max(np.linalg.norm(v), 1e-300)))
    return worst
