# -*- coding: utf-8 -*-
"""
τ₂-모델 모듈

표현 파라미터, Lax/monodromy 행렬, 전달행렬, R-행렬과 Yang–Baxter 잔차,
양자 행렬식(연산자/닫힌 형태), 점근 상수, 자기수반 파라미터 생성기
"""

import cmath
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import LaurentPoly, Parity, UnityRoot
from .exceptions import ConstraintError, DomainError
from .weyl import WeylSpace, embed, local_u, local_v, weyl_space

logger = logging.getLogger(__name__)

Blocks = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True)
class SiteParams:
    """site n의 상수 α, β, γ, δ, 𝕒, 𝕓, 𝕔, 𝕕"""
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex
    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def from_free(cls, alpha, beta, a, b, c, d) -> "SiteParams":
        """γ, δ는 αγ = 𝕒𝕔, βδ = 𝕓𝕕 로부터 결정"""
        return cls(alpha, beta, a * c / alpha, b * d / beta, a, b, c, d)

    def values(self) -> Tuple[complex, ...]:
        return (self.alpha, self.beta, self.gamma, self.delta, self.a, self.b, self.c, self.d)

    def constraint_residual(self) -> float:
        r1 = abs(self.alpha * self.gamma - self.a * self.c) / max(abs(self.a * self.c), 1e-300)
        r2 = abs(self.beta * self.delta - self.b * self.d) / max(abs(self.b * self.d), 1e-300)
        return max(r1, r2)

    def conjugated(self) -> "SiteParams":
        return SiteParams(*[complex(v).conjugate() for v in self.values()])

    # ---- 국소 양자 행렬식 ----
    def qdet_factors(self, root: UnityRoot) -> Tuple[complex, complex, complex]:
        """det_q L_n(λ) = C (1/λ + x₁λ)(1/λ + x₂λ) 의 (C, x₁, x₂)"""
        q = root.q
        const = -q * self.beta * self.a * self.c / self.alpha
        x1 = self.b * self.alpha / (q * self.a * self.beta)
        x2 = self.d * self.alpha / (q * self.c * self.beta)
        return const, x1, x2

    def qdet_poly(self, root: UnityRoot) -> LaurentPoly:
        q = root.q
        return LaurentPoly({
            -2: -q * self.beta * self.gamma,
            0: -(self.a * self.d + self.b * self.c),
            2: -self.alpha * self.delta / q,
        }, Parity.EVEN)

    def k_mu(self, root: UnityRoot) -> Tuple[complex, complex, complex]:
        """(k_n, μ_{n,+}, μ_{n,-}), μ는 주분기, k_n은 인수분해형과 일치하도록 결정"""
        qh = root.power(0.5)
        mu_p = 1j * qh * cmath.sqrt(self.a * self.beta / (self.alpha * self.b))
        mu_m = 1j * qh * cmath.sqrt(self.c * self.beta / (self.alpha * self.d))
        const, _, _ = self.qdet_factors(root)
        return const / (mu_p * mu_m), mu_p, mu_m


@dataclass(frozen=True)
class ModelParams:
    """N개 site 파라미터 + 단위근 데이터"""
    sites: Tuple[SiteParams, ...]
    root: UnityRoot
    strict: bool = True
    constraint_rtol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        if not self.sites:
            raise DomainError("at least one site is required")
        for n, site in enumerate(self.sites, start=1):
            if any(v == 0 for v in site.values()):
                raise ConstraintError(f"site {n}: all eight parameters must be nonzero")
            if self.strict and site.constraint_residual() > self.constraint_rtol:
                raise ConstraintError(
                    f"site {n}: αγ = 𝕒𝕔, βδ = 𝕓𝕕 violated (residual {site.constraint_residual():.2e})"
                )

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def p(self) -> int:
        return self.root.p

    @property
    def space(self) -> WeylSpace:
        return weyl_space(self.root.p, self.root.p_prime, self.n_sites)

    @property
    def dim(self) -> int:
        return self.root.p ** self.n_sites

    # ---- 점근 상수 ----
    @property
    def a_plus(self) -> complex:
        return complex(np.prod([s.alpha for s in self.sites]))

    @property
    def a_minus(self) -> complex:
        return complex((-1) ** self.n_sites * np.prod([s.beta for s in self.sites]))

    @property
    def d_plus(self) -> complex:
        return complex((-1) ** self.n_sites * np.prod([s.delta for s in self.sites]))

    @property
    def d_minus(self) -> complex:
        return complex(np.prod([s.gamma for s in self.sites]))

    def asymptotic_constants(self) -> dict:
        return {"a_plus": self.a_plus, "a_minus": self.a_minus,
                "d_plus": self.d_plus, "d_minus": self.d_minus}

    def k_mu(self) -> List[Tuple[complex, complex, complex]]:
        return [s.k_mu(self.root) for s in self.sites]

    def subchain(self, start: int, stop: int) -> "ModelParams":
        """site start..stop (1부터, 양끝 포함)"""
        return ModelParams(self.sites[start - 1:stop], self.root, self.strict)

    def with_site(self, n: int, site: SiteParams, strict: bool = True) -> "ModelParams":
        sites = list(self.sites)
        sites[n - 1] = site
        return ModelParams(tuple(sites), self.root, strict)


def _check_lambda(lam: complex):
    if lam == 0:
        raise DomainError("spectral parameter λ must be nonzero")


def local_lax(site: SiteParams, root: UnityRoot, lam: complex) -> List[List[np.ndarray]]:
    """p×p 국소 Lax 행렬 원소"""
    _check_lambda(lam)
    u, v = local_u(root), local_v(root)
    u_inv, v_inv = u.conj().T, v.T
    qh = root.power(0.5)
    l11 = lam * site.alpha * v - site.beta / lam * v_inv
    l12 = u @ (site.a / qh * v + qh * site.b * v_inv)
    l21 = u_inv @ (qh * site.c * v + site.d / qh * v_inv)
    l22 = site.gamma / lam * v - site.delta * lam * v_inv
    return [[l11, l12], [l21, l22]]


def lax(params: ModelParams, n: int, lam: complex) -> List[List[np.ndarray]]:
    """
    site n의 Lax 연산자 L_n(λ)

    Args:
        params: ModelParams
        n: site 번호 (1..N)
        lam: 0이 아닌 스펙트럴 파라미터

    Returns:
        2×2 리스트, 각 원소는 p^N × p^N 행렬
    """
    if not 1 <= n <= params.n_sites:
        raise DomainError(f"site {n} out of range 1..{params.n_sites}")
    local = local_lax(params.sites[n - 1], params.root, lam)
    return [[embed(x, n, params.n_sites) for x in row] for row in local]


def monodromy(params: ModelParams, lam: complex) -> Blocks:
    """M(λ) = L_N(λ) ⋯ L_1(λ) 의 (A, B, C, D)"""
    _check_lambda(lam)
    n_sites = params.n_sites
    first = lax(params, 1, lam)
    a, b = first[0]
    c, d = first[1]
    for n in range(2, n_sites + 1):
        (l11, l12), (l21, l22) = lax(params, n, lam)
        a, b, c, d = (l11 @ a + l12 @ c, l11 @ b + l12 @ d,
                      l21 @ a + l22 @ c, l21 @ b + l22 @ d)
    return a, b, c, d


def transfer(params: ModelParams, lam: complex) -> np.ndarray:
    """τ₂(λ) = A(λ) + D(λ)"""
    a, _, _, d = monodromy(params, lam)
    return a + d


def gauge_conjugate(params: ModelParams, lam: complex, gauge: np.ndarray) -> Blocks:
    """G M(λ) G⁻¹ (G 는 상수 2×2 행렬), τ₂ 는 불변"""
    gauge = np.asarray(gauge, dtype=complex)
    if gauge.shape != (2, 2) or abs(np.linalg.det(gauge)) < 1e-14:
        raise DomainError("gauge must be an invertible 2×2 matrix")
    inv = np.linalg.inv(gauge)
    a, b, c, d = monodromy(params, lam)
    blocks = [[a, b], [c, d]]
    out = [[sum(gauge[i, r] * blocks[r][s] * inv[s, j] for r in range(2) for s in range(2))
            for j in range(2)] for i in range(2)]
    return out[0][0], out[0][1], out[1][0], out[1][1]


def asymptotic_operator(params: ModelParams, side: str) -> np.ndarray:
    """
    전달행렬 점근 연산자

    side="infinity": lim λ^{-N} τ₂(λ) = Θ a₊ + Θ⁻¹ d₊
    side="zero":     lim λ^{N} τ₂(λ)  = Θ⁻¹ a₋ + Θ d₋
    """
    theta = params.space.theta_op()
    theta_inv = theta.T
    if side == "infinity":
        return params.a_plus * theta + params.d_plus * theta_inv
    if side == "zero":
        return params.a_minus * theta_inv + params.d_minus * theta
    raise DomainError(f"unknown asymptotic side: {side}")


def r_matrix(root: UnityRoot, lam: complex) -> np.ndarray:
    """6-vertex R(λ), 기저 순서 (↑↑, ↑↓, ↓↑, ↓↓)"""
    _check_lambda(lam)
    q = root.q
    a = q * lam - 1 / (q * lam)
    b = lam - 1 / lam
    c = q - 1 / q
    return np.array([
        [a, 0, 0, 0],
        [0, b, c, 0],
        [0, c, b, 0],
        [0, 0, 0, a],
    ], dtype=complex)


def _aux_embed(blocks: Blocks, slot: int) -> np.ndarray:
    """M ⊗ 1 (slot=1) 또는 1 ⊗ M (slot=2), 보조공간이 상위 자릿수"""
    a, b, c, d = blocks
    dim = a.shape[0]
    m = [[a, b], [c, d]]
    out = np.zeros((4 * dim, 4 * dim), dtype=complex)
    for i1 in range(2):
        for i2 in range(2):
            for j1 in range(2):
                for j2 in range(2):
                    if slot == 1 and i2 == j2:
                        blk = m[i1][j1]
                    elif slot == 2 and i1 == j1:
                        blk = m[i2][j2]
                    else:
                        continue
                    r, s = 2 * i1 + i2, 2 * j1 + j2
                    out[r * dim:(r + 1) * dim, s * dim:(s + 1) * dim] = blk
    return out


def block_norm(blocks: Blocks) -> float:
    return float(np.sqrt(sum(np.linalg.norm(x) ** 2 for x in blocks)))


def yang_baxter_residual(params: ModelParams, lam: complex, mu: complex) -> Tuple[float, float]:
    """
    ‖R(λ/μ)(M(λ)⊗1)(1⊗M(μ)) − (1⊗M(μ))(M(λ)⊗1)R(λ/μ)‖ / scale

    Returns:
        (상대 잔차, scale = 피연산자 노름의 곱)
    """
    _check_lambda(lam)
    _check_lambda(mu)
    m_lam = monodromy(params, lam)
    m_mu = monodromy(params, mu)
    dim = params.dim
    r = np.kron(r_matrix(params.root, lam / mu), np.eye(dim))
    m1 = _aux_embed(m_lam, 1)
    m2 = _aux_embed(m_mu, 2)
    diff = r @ m1 @ m2 - m2 @ m1 @ r
    scale = np.linalg.norm(r) * block_norm(m_lam) * block_norm(m_mu)
    return float(np.linalg.norm(diff) / scale), float(scale)


def qdet_poly(params: ModelParams) -> LaurentPoly:
    """det_q M(λ) = ∏_n det_q L_n(λ) (분기 없는 Laurent 다항식)"""
    out = LaurentPoly.monomial(0, 1.0)
    for site in params.sites:
        out = out * site.qdet_poly(params.root)
    return LaurentPoly(out.coeffs, Parity.EVEN)


def qdet_scalar(params: ModelParams, lam: complex) -> complex:
    _check_lambda(lam)
    return complex(qdet_poly(params)(lam))


def qdet_factorized(params: ModelParams, lam: complex) -> complex:
    """∏ k_n (λ/μ₊ − μ₊/λ)(λ/μ₋ − μ₋/λ)"""
    _check_lambda(lam)
    value = 1.0 + 0j
    for k, mu_p, mu_m in params.k_mu():
        value *= k * (lam / mu_p - mu_p / lam) * (lam / mu_m - mu_m / lam)
    return value


def qdet_operator(params: ModelParams, lam: complex) -> np.ndarray:
    """A(λ)D(λ/q) − B(λ)C(λ/q)"""
    a, b, _, _ = monodromy(params, lam)
    _, _, c_s, d_s = monodromy(params, lam / params.root.q)
    return a @ d_s - b @ c_s


def qdet_operator_residual(params: ModelParams, lam: complex) -> float:
    scalar = qdet_scalar(params, lam)
    op = qdet_operator(params, lam)
    return float(np.linalg.norm(op - scalar * np.eye(params.dim), 2) / max(abs(scalar), 1e-300))


def similarity_residual(params: ModelParams, lam: complex, seed: int = 0) -> float:
    """임의 가역 S로 M → S M S⁻¹ 한 뒤에도 양자 행렬식이 같은지"""
    rng = np.random.default_rng(seed)
    dim = params.dim
    s = np.eye(dim) + 0.3 * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(dim)
    s_inv = np.linalg.inv(s)
    a, b, _, _ = monodromy(params, lam)
    _, _, c_s, d_s = monodromy(params, lam / params.root.q)
    conj = [s @ x @ s_inv for x in (a, b, c_s, d_s)]
    op = conj[0] @ conj[3] - conj[1] @ conj[2]
    scalar = qdet_scalar(params, lam)
    return float(np.linalg.norm(op - scalar * np.eye(dim), 2) / max(abs(scalar), 1e-300))


# ====================
# 파라미터 생성기
# ====================

def sample_params(n_sites: int, root: UnityRoot, seed: int = 42,
                  moduli: Tuple[float, float] = (0.5, 2.0)) -> ModelParams:
    """
    임의 파라미터 샘플러 (γ, δ는 항상 제약식으로 결정)

    Args:
        n_sites: site 수 N
        root: UnityRoot
        seed: 난수 시드
        moduli: 절댓값 균등분포 구간

    Returns:
        ModelParams
    """
    rng = np.random.default_rng(seed)

    def draw():
        r = rng.uniform(*moduli)
        return complex(r * np.exp(2j * np.pi * rng.uniform()))

    sites = []
    for _ in range(n_sites):
        alpha, beta, a, b, c, d = (draw() for _ in range(6))
        sites.append(SiteParams.from_free(alpha, beta, a, b, c, d))
    return ModelParams(tuple(sites), root)


def restricted_params(n_sites: int, root: UnityRoot, seed: int = 42) -> ModelParams:
    """site 1..N−1에 𝕓^p + 𝕒^p = 0, 𝕔^p + 𝕕^p = 0 을 부과 (site N은 일반)"""
    base = sample_params(n_sites, root, seed)
    rng = np.random.default_rng(seed + 1)
    sites = list(base.sites)
    for n in range(n_sites - 1):
        s = sites[n]
        b = -s.a * root.power(2 * int(rng.integers(root.p)))
        d = -s.c * root.power(2 * int(rng.integers(root.p)))
        sites[n] = SiteParams.from_free(s.alpha, s.beta, s.a, b, s.c, d)
    return ModelParams(tuple(sites), root)


def make_selfadjoint(free: Sequence[Tuple[complex, complex, complex]], epsilon: int,
                     root: UnityRoot) -> ModelParams:
    """
    자기수반 표현 파라미터

    free = [(α_n, 𝕒_n, 𝕓_n)], 𝕔 = −ε𝕓*, 𝕕 = −ε𝕒*, β = ε𝕒*𝕓/α*

    Returns:
        ModelParams
    """
    if epsilon not in (1, -1):
        raise DomainError(f"epsilon must be ±1, got {epsilon}")
    sites = []
    for alpha, a, b in free:
        alpha, a, b = complex(alpha), complex(a), complex(b)
        c = -epsilon * b.conjugate()
        d = -epsilon * a.conjugate()
        beta = epsilon * a.conjugate() * b / alpha.conjugate()
        sites.append(SiteParams.from_free(alpha, beta, a, b, c, d))
    return ModelParams(tuple(sites), root)


def hermiticity_residual(params: ModelParams, lam: complex, epsilon: int) -> float:
    """A† = D(λ*), B† = −εC(λ*), C† = −εB(λ*), D† = A(λ*) 의 상대 잔차"""
    a, b, c, d = monodromy(params, lam)
    a_s, b_s, c_s, d_s = monodromy(params, complex(lam).conjugate())
    diffs = [
        a.conj().T - d_s,
        b.conj().T + epsilon * c_s,
        c.conj().T + epsilon * b_s,
        d.conj().T - a_s,
    ]
    return float(np.sqrt(sum(np.linalg.norm(x) ** 2 for x in diffs)) / block_norm((a, b, c, d)))


def qdet_selfadjoint_formula(params: ModelParams, lam: complex, epsilon: int) -> complex:
    """자기수반 표현의 모듈러스 공식"""
    q = params.root.q
    value = q ** params.n_sites + 0j
    for s in params.sites:
        aa, bb, al = abs(s.a) ** 2, abs(s.b) ** 2, abs(s.alpha) ** 2
        value *= aa * bb / al * (1 / lam + epsilon / q * al / aa * lam) * (1 / lam + epsilon / q * al / bb * lam)
    return value


def make_sadj_subvariety(alpha_mod: Sequence[float], a_mod: Sequence[float], b_mod: Sequence[float],
                         epsilon: int, root: UnityRoot, a_phases: Optional[Sequence[float]] = None,
                         theta1: float = 0.0, b_signs: Optional[Sequence[int]] = None) -> ModelParams:
    """
    자기수반 부분다양체 파라미터

    α_n 위상 θ_n 은 θ_{n+1} + θ_n ≡ φ_{n+1} − φ_n (mod π) 사슬로 결정되고
    (φ_n = arg 𝕒_n), 𝕓_n 위상은 φ_n 또는 φ_n + π.

    Raises:
        ConstraintError: 위상 사슬이 닫히지 않는 경우
    """
    n_sites = len(alpha_mod)
    phases = list(a_phases) if a_phases is not None else [0.0] * n_sites
    signs = list(b_signs) if b_signs is not None else [1] * n_sites
    thetas = [theta1]
    for n in range(n_sites - 1):
        thetas.append(phases[n + 1] - phases[n] - thetas[n])

    free = []
    for n in range(n_sites):
        alpha = alpha_mod[n] * np.exp(1j * thetas[n])
        a = a_mod[n] * np.exp(1j * phases[n])
        b = signs[n] * b_mod[n] * np.exp(1j * phases[n])
        free.append((alpha, a, b))
    params = make_selfadjoint(free, epsilon, root)
    residual = subvariety_residual(params)
    if residual > 1e-10:
        raise ConstraintError(f"infeasible phase chain (residual {residual:.2e})")
    return params


def subvariety_residual(params: ModelParams) -> float:
    """∏α*/α = 1, 𝕓/𝕓* = 𝕒/𝕒*, α*_{n+1}α*_n/(α_{n+1}α_n) = 𝕓*_{n+1}𝕓_n/(𝕓_{n+1}𝕓*_n) 의 최대 잔차"""
    sites = params.sites
    n_sites = len(sites)

    def ratio(z):
        z = complex(z)
        return z.conjugate() / z

    worst = abs(np.prod([ratio(s.alpha) for s in sites]) - 1)
    for n in range(n_sites):
        s, t = sites[n], sites[(n + 1) % n_sites]
        worst = max(worst, abs(1 / ratio(s.b) - 1 / ratio(s.a)))
        lhs = ratio(t.alpha) * ratio(s.alpha)
        rhs = ratio(t.b) / ratio(s.b)
        worst = max(worst, abs(lhs - rhs))
    return float(worst)
