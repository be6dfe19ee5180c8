# -*- coding: utf-8 -*-
"""
실행 설정 / 리포트 스키마

복소수는 항상 [re, im] 쌍으로 표기한다.
"""

import json
import logging
import math
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .config import DEFAULT_SEED, DEFAULT_TOLERANCES, GRID_DEFAULTS, OUTPUT_DIR, SAMPLE_LAMBDAS, SAMPLER_DEFAULTS
from .exceptions import ConfigError

logger = logging.getLogger(__name__)

ComplexPair = Tuple[float, float]

MODES = ("general", "self_adjoint", "sadj_subvariety", "chp", "chp_self_adjoint", "chp_rbar", "baxterq")


def to_complex(pair: Optional[ComplexPair]) -> Optional[complex]:
    if pair is None:
        return None
    return complex(pair[0], pair[1])


def to_pair(value: complex) -> List[float]:
    value = complex(value)
    return [float(value.real), float(value.imag)]


# ====================
# 설정 스키마
# ====================

class SiteSpec(BaseModel):
    """site 자유 파라미터 (γ, δ 는 αγ = 𝕒𝕔, βδ = 𝕓𝕕 로 결정)"""
    alpha: ComplexPair = Field(..., description="α as [re, im]")
    beta: ComplexPair = Field(..., description="β as [re, im]")
    a: ComplexPair = Field(..., description="𝕒 as [re, im]")
    b: ComplexPair = Field(..., description="𝕓 as [re, im]")
    c: ComplexPair = Field(..., description="𝕔 as [re, im]")
    d: ComplexPair = Field(..., description="𝕕 as [re, im]")


class SamplerSpec(BaseModel):
    """임의 파라미터 샘플러"""
    seed: int = Field(default=DEFAULT_SEED, description="Random seed")
    n_sites: int = Field(default=SAMPLER_DEFAULTS["n_sites"], ge=1, description="Number of sites N")
    moduli: Tuple[float, float] = Field(default=SAMPLER_DEFAULTS["moduli"], description="Modulus range")

    @field_validator("moduli")
    @classmethod
    def _ordered(cls, v):
        if not 0 < v[0] <= v[1]:
            raise ValueError("moduli must satisfy 0 < low <= high")
        return v


class GridSpec(BaseModel):
    """보간 격자"""
    radius: float = Field(default=GRID_DEFAULTS["radius"], gt=0, description="Interpolation radius")
    extra_points: int = Field(default=GRID_DEFAULTS["extra_points"], ge=1, description="Oversampling points")


class ChPSpec(BaseModel):
    """chiral Potts 곡선 구성"""
    k: Optional[ComplexPair] = Field(default=None, description="Curve modulus k as [re, im]")
    c0: float = Field(default=1.0, description="Real constant c0")
    d_values: Optional[List[ComplexPair]] = Field(
        default=None, description="Per-site d coordinates (self-adjoint and rbar modes use moduli only)"
    )
    q_seeds: Optional[List[Tuple[ComplexPair, ComplexPair]]] = Field(
        default=None, description="Per-site (a, d) seeds for the q_n points (chp mode)"
    )
    r_seeds: Optional[List[Tuple[ComplexPair, ComplexPair]]] = Field(
        default=None, description="Per-site (a, d) seeds for the r_n points; defaults to q_seeds"
    )
    eps0: Optional[List[int]] = Field(default=None, description="Per-site signs ε₀ for self-adjoint points")
    lambdas: List[ComplexPair] = Field(
        default=list(SAMPLE_LAMBDAS), description="Sample spectral parameters"
    )


class OutputSpec(BaseModel):
    directory: str = Field(default=OUTPUT_DIR, description="Report directory")
    format: Literal["json", "csv"] = Field(default="json", description="Report format")
    stem: Optional[str] = Field(default=None, description="File name stem (timestamped if omitted)")


class RunConfig(BaseModel):
    """검증 실행 설정"""
    p_odd: int = Field(default=3, description="p = 2l + 1")
    p_prime: int = Field(default=2, description="p′ = 2l′")
    mode: Literal[MODES] = Field(default="general", description="Check pipeline")
    epsilon: int = Field(default=-1, description="Self-adjointness sign ε")
    sites: Optional[List[SiteSpec]] = Field(default=None, description="Explicit site parameters")
    sampler: SamplerSpec = Field(default_factory=SamplerSpec, description="Sampler used when sites is omitted")
    tolerances: Dict[str, float] = Field(default_factory=dict, description="Tolerance overrides")
    grid: GridSpec = Field(default_factory=GridSpec)
    chp: Optional[ChPSpec] = Field(default=None)
    output: OutputSpec = Field(default_factory=OutputSpec)

    @field_validator("epsilon")
    @classmethod
    def _sign(cls, v):
        if v not in (1, -1):
            raise ValueError("epsilon must be ±1")
        return v

    @field_validator("tolerances")
    @classmethod
    def _known_checks(cls, v):
        unknown = sorted(set(v) - set(DEFAULT_TOLERANCES))
        if unknown:
            raise ValueError(f"unknown check names: {unknown}")
        if any(not (t > 0 and math.isfinite(t)) for t in v.values()):
            raise ValueError("tolerances must be positive and finite")
        return v

    @model_validator(mode="after")
    def _check_root_and_mode(self):
        if self.p_odd < 3 or self.p_odd % 2 == 0:
            raise ConfigError(f"must be odd and >= 3, got {self.p_odd}", "p_odd")
        if self.p_prime < 2 or self.p_prime % 2 == 1:
            raise ConfigError(f"must be even and >= 2, got {self.p_prime}", "p_prime")
        if math.gcd(self.p_odd, self.p_prime) != 1:
            raise ConfigError("gcd(p_odd, p_prime) must be 1", "p_prime")
        if self.mode.startswith("chp"):
            if self.chp is None or self.chp.k is None:
                raise ConfigError("chp modes require the curve modulus", "chp.k")
            if self.mode == "chp" and not self.chp.q_seeds:
                raise ConfigError("chp mode requires per-site seeds", "chp.q_seeds")
            if self.mode != "chp" and not self.chp.d_values:
                raise ConfigError("self-adjoint chp modes require per-site d values", "chp.d_values")
        return self

    @property
    def n_sites(self) -> int:
        if self.sites:
            return len(self.sites)
        if self.chp is not None:
            if self.mode == "chp" and self.chp.q_seeds:
                return len(self.chp.q_seeds)
            if self.chp.d_values:
                return len(self.chp.d_values)
        return self.sampler.n_sites


def parse_config(data: dict) -> RunConfig:
    """
    dict → RunConfig

    Raises:
        ConfigError: 스키마 위반 (field_path 에 위치)
    """
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        path = ".".join(str(part) for part in first["loc"])
        raise ConfigError(first["msg"], path) from e


def load_config(path: str) -> RunConfig:
    """
    JSON 설정 파일 로드

    Raises:
        ConfigError: 파일 없음, JSON 파싱 실패, 스키마 위반
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON at line {e.lineno}: {e.msg}") from e
    config = parse_config(data)
    logger.info(f"✅ 설정 로드: mode={config.mode}, p={config.p_odd}, N={config.n_sites}")
    return config


def sample_config() -> dict:
    """sample-config 서브커맨드가 내보내는 템플릿"""
    return RunConfig(
        mode="chp_rbar",
        chp=ChPSpec(k=(0.4, 0.0), d_values=[(1.0, 0.0), (0.8, 0.0)]),
    ).model_dump(mode="json")


# ====================
# 리포트 스키마
# ====================

class CheckRecordModel(BaseModel):
    name: str
    residual: Optional[float] = Field(..., description="null when the residual is not finite")
    scale: float = 1.0
    tolerance: Optional[float] = Field(..., description="null for informational flags")
    passed: bool
    detail: str = ""
    informational: bool = False


class SpectralLineModel(BaseModel):
    index: int
    k: int
    t: Dict[int, ComplexPair] = Field(..., description="Laurent coefficients of t(λ)")
    Q: Optional[Dict[int, ComplexPair]] = Field(default=None, description="Laurent coefficients of Q(λ)")
    bethe_roots: List[ComplexPair] = Field(default_factory=list)
    residuals: Dict[str, Optional[float]] = Field(default_factory=dict)


class RunReportModel(BaseModel):
    config: dict
    checks: List[CheckRecordModel]
    spectrum: List[SpectralLineModel] = Field(default_factory=list)
    tables: Dict[str, List[dict]] = Field(default_factory=dict)
    metadata: dict = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed or c.informational for c in self.checks)
