# -*- coding: utf-8 -*-
"""
검증 실행기

설정 모드별로 model → averages → sov → spectrum → chP / 일반화 Q 검사를 묶어 실행하고
RunReportModel 을 만든다. 검사 하나의 실패가 독립적인 다른 검사를 막지 않는다.
"""

import functools
import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pydantic
import scipy

from . import __version__
from .algebra import UnityRoot, root_set_checks
from .averages import (
    average_monodromy,
    centrality_residual,
    det_contract_residual,
    product_formula_residual,
)
from .baxterq import (
    b_zero_residual,
    baxter_fit as generalized_baxter_fit,
    chp_agreement,
    coefficient_identities,
    cofactor_residual,
    commutator_metric,
    mobius_solve,
    omega_matching,
    operator_triangularity,
    shift_recursion_residual,
    triangularity_residual,
)
from .chp import (
    ChPConfig,
    average_ratio,
    baxter_check,
    commutation_residuals,
    completeness_table,
    conjugation_residual,
    curve_solve,
    exchange_residuals,
    inversion_residual,
    normality_check,
    point_for_lambda,
    rbar_subvariety,
    selfadjoint_config,
    selfadjoint_spectral_point,
    theta_commutation,
    w_recursion_residual,
)
from .config import SAMPLE_LAMBDAS, THREADS, tolerance
from .error_handler import CheckLog, CheckRecord, flag, run_check, safe_execute
from .exceptions import ConfigError
from .model import (
    ModelParams,
    SiteParams,
    hermiticity_residual,
    make_sadj_subvariety,
    make_selfadjoint,
    monodromy,
    qdet_operator_residual,
    sample_params,
    subvariety_residual,
    transfer,
    yang_baxter_residual,
)
from .schemas import (
    CheckRecordModel,
    RunConfig,
    RunReportModel,
    SpectralLineModel,
    to_complex,
    to_pair,
)
from .sov import (
    b_average_zero_residual,
    b_eigenrelation_residual,
    basis_agreement,
    coefficient_residuals,
    compute_Z,
    regauge,
    sov_basis_direct,
    sov_basis_recursive,
    sov_coefficients,
    sov_representation_check,
)
from .spectrum import (
    QOperator,
    SpectralLine,
    attach_baxter_q,
    baxter_coefficients,
    certify_spectrum,
    completeness_residual,
    joint_diagonalize,
    omega_separation,
    sector_pairing_residual,
)
from .weyl import relative_commutator

logger = logging.getLogger(__name__)

# ====================
# 모드별 단계
# ====================
SELF_ADJOINT_MODES = ("self_adjoint", "sadj_subvariety", "chp_self_adjoint", "chp_rbar")
SUBVARIETY_MODES = ("sadj_subvariety", "chp_rbar")
CHP_MODES = ("chp", "chp_self_adjoint", "chp_rbar")

STAGES = {
    "general": ("model", "averages", "sov", "spectrum"),
    "self_adjoint": ("model", "averages", "sov", "spectrum"),
    "sadj_subvariety": ("model", "averages", "sov", "spectrum", "bethe"),
    "chp": ("model", "chp", "baxterq"),
    "chp_self_adjoint": ("model", "chp", "spectrum"),
    "chp_rbar": ("model", "averages", "chp", "spectrum", "bethe"),
    "baxterq": ("model", "averages", "baxterq"),
}

COMMAND_STAGES = {
    "spectrum": ("spectrum", "bethe"),
    "chp": ("chp",),
    "baxterq": ("baxterq",),
}


@dataclass
class Model:
    """실행에 쓰이는 표현 (chP 모드면 곡선 구성 포함)"""
    params: ModelParams
    chp: Optional[ChPConfig] = None


@dataclass
class RunState:
    """단계 사이에서 공유되는 중간 결과"""
    config: RunConfig
    model: Model
    lambdas: List[complex]
    log: CheckLog = field(default_factory=CheckLog)
    lines: List[SpectralLine] = field(default_factory=list)
    tables: Dict[str, List[dict]] = field(default_factory=dict)
    pair: object = None

    @property
    def params(self) -> ModelParams:
        return self.model.params

    def tol(self, name: str) -> float:
        return tolerance(name, self.config.tolerances)


Task = Tuple[str, str, Callable[[], object], bool]


# ====================
# 표현 구성
# ====================

def build_model(config: RunConfig) -> Model:
    """
    설정 → ModelParams (chP 모드는 곡선 구성을 거친다)

    Raises:
        ConstraintError, CurveError: 구성 불가능한 입력
    """
    root = UnityRoot(config.p_odd, config.p_prime)
    if config.mode in CHP_MODES:
        chp = build_chp(config, root)
        return Model(chp.params(), chp)

    if config.sites:
        fields = ("alpha", "beta", "a", "b", "c", "d")
        sites = tuple(SiteParams.from_free(*(to_complex(getattr(s, f)) for f in fields)) for s in config.sites)
        return Model(ModelParams(sites, root))

    sampler = config.sampler
    rng = np.random.default_rng(sampler.seed)
    low, high = sampler.moduli
    n = sampler.n_sites

    def draw():
        return complex(rng.uniform(low, high) * np.exp(2j * np.pi * rng.uniform()))

    if config.mode == "self_adjoint":
        free = [(draw(), draw(), draw()) for _ in range(n)]
        return Model(make_selfadjoint(free, config.epsilon, root))
    if config.mode == "sadj_subvariety":
        moduli = [rng.uniform(low, high, n) for _ in range(3)]
        return Model(make_sadj_subvariety(*moduli, config.epsilon, root))
    return Model(sample_params(n, root, sampler.seed, (low, high)))


def build_chp(config: RunConfig, root: UnityRoot) -> ChPConfig:
    spec = config.chp
    k = to_complex(spec.k)
    if config.mode == "chp":
        q_points = []
        for a, d in spec.q_seeds:
            kp = q_points[0].kp if q_points else None
            q_points.append(curve_solve(k, to_complex(a), to_complex(d), root, kp=kp))
        r_points = q_points
        if spec.r_seeds:
            if len(spec.r_seeds) != len(q_points):
                raise ConfigError("r_seeds must match q_seeds in length", "chp.r_seeds")
            r_points = [curve_solve(k, to_complex(a), to_complex(d), root, kp=q_points[0].kp)
                        for a, d in spec.r_seeds]
        return ChPConfig(k, q_points[0].kp, complex(spec.c0), tuple(q_points), tuple(r_points), root)
    d_values = [to_complex(d) for d in spec.d_values]
    if config.mode == "chp_self_adjoint":
        return selfadjoint_config(k, d_values, config.epsilon, root, spec.c0, spec.eps0)
    eps0 = spec.eps0[0] if spec.eps0 else 1
    return rbar_subvariety(k, [abs(d) for d in d_values], config.epsilon, root, spec.c0, eps0)


# ====================
# 단계별 검사 목록
# ====================

def _max(values) -> float:
    return float(max(values, default=0.0))


def model_tasks(state: RunState) -> List[Task]:
    params, lams, eps = state.params, state.lambdas, state.config.epsilon
    pairs = list(itertools.combinations(lams, 2))
    theta = params.space.theta_op()
    tasks: List[Task] = [
        ("weyl_relations", "weyl_relations", params.space.weyl_residual, False),
        ("theta_commutation", "theta_commutation",
         lambda: _max(relative_commutator(theta, transfer(params, z)) for z in lams), False),
        ("yang_baxter", "yang_baxter", lambda: _max(yang_baxter_residual(params, l, m)[0] for l, m in pairs), False),
        ("b_commutation", "b_commutation",
         lambda: _max(relative_commutator(monodromy(params, l)[1], monodromy(params, m)[1]) for l, m in pairs),
         False),
        ("transfer_commutation", "transfer_commutation",
         lambda: _max(relative_commutator(transfer(params, l), transfer(params, m)) for l, m in pairs), False),
        ("qdet_operator", "qdet_operator", lambda: _max(qdet_operator_residual(params, z) for z in lams), False),
    ]
    if state.config.mode in SELF_ADJOINT_MODES:
        tasks.append(("hermiticity", "hermiticity",
                      lambda: _max(hermiticity_residual(params, z, eps) for z in lams), False))
    if state.config.mode in SUBVARIETY_MODES:
        tasks.append(("subvariety_constraints", "subvariety_constraints", lambda: subvariety_residual(params), False))
    return tasks


def average_tasks(state: RunState) -> List[Task]:
    params, p = state.params, state.params.p
    avg = average_monodromy(params)
    bigs = [z ** p for z in state.lambdas]
    return [
        ("centrality", "centrality",
         lambda: _max(centrality_residual(params, tag, big) for tag in "ABCD" for big in bigs), False),
        ("average_product", "average_product", lambda: product_formula_residual(params), False),
        ("det_contract", "det_contract", lambda: det_contract_residual(params, avg), False),
    ]


def sov_tasks(state: RunState) -> List[Task]:
    params = state.params
    if params.n_sites < 2:
        return []
    avg = average_monodromy(params)
    grid = compute_Z(params, avg=avg)
    coeffs = sov_coefficients(params, grid, avg)
    residuals = coefficient_residuals(params, grid, coeffs, avg)
    # 기저 구성 실패는 그 기저를 쓰는 검사에만 기록된다
    recursive = functools.lru_cache(maxsize=None)(lambda: sov_basis_recursive(params, avg))
    direct = functools.lru_cache(maxsize=None)(lambda: sov_basis_direct(params, avg=avg))
    state.log.add(flag("sov_normalization", 0.0,
                       detail="seed covector of unit norm, rows compared after scaling by their largest entry"))
    return [
        ("sov_qdet", "sov_qdet", lambda: residuals["sov_qdet"], False),
        ("sov_average", "sov_average", lambda: residuals["sov_average"], False),
        ("b_average_zero", "b_average_zero", lambda: b_average_zero_residual(params, grid, avg), False),
        ("b_eigenrelation", "b_eigenrelation",
         lambda: b_eigenrelation_residual(params, recursive(), state.lambdas), False),
        ("basis_agreement", "basis_agreement", lambda: basis_agreement(recursive(), direct()), False),
        ("sov_actions", "sov_actions",
         lambda: max(sov_representation_check(params, regauge(params, direct())[0]).values()), False),
    ]


def _w_recursion(chp: ChPConfig, lams) -> float:
    """W, W̄ 연속비를 (q_n, p_λ), (r_n, p_λ) 쌍마다 닫힌 형태와 비교"""
    worst = 0.0
    for z in lams:
        point = point_for_lambda(chp, z)
        for pt in chp.q_points + chp.r_points:
            worst = max(worst, w_recursion_residual(pt, point, chp.root))
    return worst


def chp_tasks(state: RunState) -> List[Task]:
    chp, lams = state.model.chp, state.lambdas
    if chp is None:
        return []
    mode, eps = state.config.mode, state.config.epsilon
    lam, mu = lams[0], lams[1]
    tasks: List[Task] = [
        ("curve", "curve", chp.curve_residual, False),
        ("curve_inversion", "curve", lambda: _max(inversion_residual(chp, z) for z in lams), False),
        ("w_recursion", "curve", lambda: _w_recursion(chp, lams), False),
        ("chp_baxter", "chp_baxter", lambda: _max(baxter_check(chp, z).residual for z in lams), False),
        ("chp_theta", "chp_theta", lambda: _max(theta_commutation(chp, z) for z in lams), False),
    ]
    # q_n = r_n 이면 교환 관계, 모든 점이 같으면 교환성까지 판정
    exchange = functools.lru_cache(maxsize=None)(lambda: exchange_residuals(chp, lam, mu))
    comm = functools.lru_cache(maxsize=None)(lambda: commutation_residuals(chp, lam, mu))
    tasks.append(("chp_exchange", "chp_commutation", lambda: max(exchange().values()), not chp.homogeneous))
    for key in ("transfer", "self"):
        tasks.append((f"chp_commutation_{key}", "chp_commutation", lambda key=key: comm()[key],
                      not chp.translation_invariant))
    if mode in SELF_ADJOINT_MODES:
        point = functools.lru_cache(maxsize=None)(lambda: selfadjoint_spectral_point(chp, eps, s=1.0 + abs(lam)))
        normal = functools.lru_cache(maxsize=None)(lambda: normality_check(chp, point=point()))
        tasks.append(("w_conjugation", "curve",
                      lambda: _max(conjugation_residual(q, point(), chp.root) for q in chp.q_points), False))
        tasks.append(("t_dagger", "normality", lambda: normal()["t_dagger"], False))
        tasks.append(("normality", "normality", lambda: normal()["normality"], not chp.translation_invariant))
    return tasks


def baxterq_tasks(state: RunState) -> List[Task]:
    params, lams = state.params, state.lambdas
    lam = lams[0]
    avg = average_monodromy(params)
    chain = mobius_solve(params, lam)
    identities = coefficient_identities(params, lam, chain, avg)
    tasks: List[Task] = [
        ("sigma_closure", "sigma_closure", lambda: chain.closure, False),
        ("omega_matching", "omega_matching", lambda: omega_matching(params, chain, avg), False),
        ("site_cofactor", "omega_matching",
         lambda: _max(cofactor_residual(s, params.root, chain.big_lambda) for s in params.sites), False),
        ("triangularity", "triangularity", lambda: triangularity_residual(params, lam, chain), False),
        ("operator_triangularity", "triangularity", lambda: operator_triangularity(params, lam, chain), False),
        ("shift_recursion", "triangularity", lambda: shift_recursion_residual(params, lam, chain), False),
        ("generalized_baxter", "generalized_baxter",
         lambda: _max(generalized_baxter_fit(params, z).residual for z in lams), False),
        ("average_identities", "average_identities",
         lambda: max(identities["average_sum"], identities["average_det"], identities["fit"]), False),
        ("n_b", "n_b", lambda: identities["n_b"], False),
        ("q_commutator", "generalized_baxter", lambda: commutator_metric(params, lams[0], lams[1]), True),
    ]
    if params.n_sites > 1:
        grid = compute_Z(params, avg=avg)
        tasks.append(("b_zero_averages", "average_identities", lambda: b_zero_residual(params, grid, avg), False))
    if state.model.chp is not None:
        tasks.append(("chp_q_agreement", "chp_eigenvalue_map",
                      lambda: _max(chp_agreement(state.model.chp, z) for z in lams), False))
    return tasks


def run_tasks(state: RunState, tasks: Sequence[Task], workers: int = THREADS):
    """독립 검사를 스레드 풀에서 실행 (결과 순서는 이름 정렬로 고정)"""
    def execute(task: Task) -> CheckRecord:
        name, tol_key, func, informational = task
        return run_check(name, func, state.tol(tol_key), informational=informational)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        for record in executor.map(execute, tasks):
            state.log.add(record)


def run_stage(state: RunState, stage: str, builder: Callable[[RunState], List[Task]], workers: int):
    """단계의 준비 계산이 실패하면 그 단계 전체를 실패 레코드 하나로 남긴다"""
    success, tasks, error = safe_execute(builder, state)
    if not success:
        state.log.add(CheckRecord(f"{stage}_setup", math.inf, 0.0, False, detail=f"{type(error).__name__}: {error}"))
        return
    run_tasks(state, tasks, workers)


# ====================
# 스펙트럼 / Bethe
# ====================

def spectrum_stage(state: RunState, workers: int):
    params = state.params
    success, lines, error = safe_execute(joint_diagonalize, params)
    if not success:
        state.log.add(CheckRecord("joint_diagonalize", math.inf, 0.0, False,
                                  detail=f"{type(error).__name__}: {error}"))
        return
    state.lines = lines
    run_tasks(state, [
        ("spectrum_completeness", "det_functional", lambda: completeness_residual(params, lines), False),
        ("parity_leakage", "parity_leakage",
         lambda: _max(line.residuals.get("parity_leakage", 0.0) for line in lines), False),
        ("sector_pairing", "asymptotics", lambda: sector_pairing_residual(params, lines), True),
    ], workers)
    basis = None
    if params.n_sites > 1:
        ok, basis, _ = safe_execute(sov_basis_recursive, params)
        basis = basis if ok else None
    state.log.records.extend(certify_spectrum(params, lines, basis, state.config.tolerances, workers).records)


def bethe_stage(state: RunState):
    params, lines, eps = state.params, state.lines, state.config.epsilon
    if not lines:
        return
    pair = baxter_coefficients(params)
    state.pair = pair
    state.log.add(run_check("baxter_pair_qdet", lambda: pair.qdet_residual, state.tol("cofactor_identities")))
    state.log.add(run_check("baxter_pair_average", lambda: pair.average_residual, state.tol("cofactor_identities")))
    ok, separation, _ = safe_execute(omega_separation, average_monodromy(params), state.lambdas[0] ** params.p)
    if ok:
        state.log.add(flag("omega_separation", separation, detail="Ω₊ ≠ Ω₋ 이면 Q 는 준상수 배 제외 유일"))
    state.log.records.extend(attach_baxter_q(params, lines, pair, eps).records)
    for line in lines:
        if line.Q is None:
            continue
        sa = bool(line.bethe_roots) and _self_adjoint_roots(line, params.root, eps)
        state.log.add(flag(f"self_adjoint_roots[{line.index}]", float(sa)))

    if all(line.Q is not None for line in lines):
        success, q_op, error = safe_execute(QOperator, params, lines, pair, eps)
        if success:
            lam, mu = state.lambdas[0], state.lambdas[1]
            tol = state.tol("q_operator")
            state.log.add(run_check("q_operator_commutation", q_op.commutator_residual, tol, lam, mu))
            state.log.add(run_check("q_operator_transfer", q_op.transfer_commutator_residual, tol, lam, mu))
            state.log.add(run_check("q_operator_baxter", q_op.baxter_residual, tol, lam))
            state.log.add(run_check("q_operator_self_adjoint", q_op.self_adjoint_residual, tol, lam))

    chp = state.model.chp
    if chp is not None and state.config.mode == "chp_rbar":
        success, result, error = safe_execute(completeness_table, chp, lines, pair, eps, state.lambdas[0])
        if success:
            rows, bijective = result
            state.tables["completeness"] = [_jsonable(r) for r in rows]
            state.log.add(run_check("chp_eigenvalue_map", lambda: max(r["relation"] for r in rows),
                                    state.tol("chp_eigenvalue_map")))
            state.log.add(flag("completeness_bijective", float(bijective)))
        else:
            state.log.add(CheckRecord("chp_eigenvalue_map", math.inf, state.tol("chp_eigenvalue_map"), False,
                                      detail=f"{type(error).__name__}: {error}"))
        big = state.lambdas[0] ** params.p
        ok, ratio, _ = safe_execute(average_ratio, chp, pair, big)
        if ok:
            got, want = ratio
            state.log.add(flag("average_ratio_margin", abs(got - 1), detail=f"closed form {want:.6g}"))


def _self_adjoint_roots(line: SpectralLine, root: UnityRoot, eps: int) -> bool:
    report = root_set_checks(line.bethe_roots, root, eps)
    return bool(report.epsilon_self_adjoint and report.p_string_free)


def _jsonable(row: dict) -> dict:
    out = {}
    for key, value in row.items():
        if isinstance(value, complex):
            out[key] = to_pair(value)
        elif isinstance(value, float) and not math.isfinite(value):
            out[key] = None
        else:
            out[key] = value
    return out


# ====================
# 리포트 조립
# ====================

def _finite(value: float) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


def _coeff_map(poly) -> Dict[int, List[float]]:
    return {e: to_pair(c) for e, c in sorted(poly.coeffs.items())}


def line_model(line: SpectralLine) -> SpectralLineModel:
    return SpectralLineModel(
        index=line.index,
        k=line.k,
        t=_coeff_map(line.t),
        Q=_coeff_map(line.Q) if line.Q is not None else None,
        bethe_roots=[to_pair(z) for z in line.bethe_roots],
        residuals={key: _finite(value) for key, value in sorted(line.residuals.items())},
    )


def record_model(record: CheckRecord) -> CheckRecordModel:
    return CheckRecordModel(
        name=record.name,
        residual=_finite(record.residual),
        scale=record.scale,
        tolerance=_finite(record.tolerance),
        passed=record.passed,
        detail=record.detail,
        informational=record.informational,
    )


def run_suite(config: RunConfig, command: str = "verify", workers: int = THREADS) -> RunReportModel:
    """
    설정의 모드 파이프라인 실행

    Args:
        config: RunConfig
        command: verify (모드 전체), spectrum, chp, baxterq (해당 단계만)
        workers: 스레드 수 (결과에는 영향 없음)

    Returns:
        RunReportModel (검사는 이름 순 정렬)
    """
    started = time.perf_counter()
    stages = STAGES[config.mode]
    if command in COMMAND_STAGES:
        stages = tuple(s for s in stages if s in COMMAND_STAGES[command])
        if not stages:
            raise ConfigError(f"mode {config.mode!r} has no {command} stage", "mode")
    logger.info(f"✅ 실행 시작: mode={config.mode}, command={command}, 단계={','.join(stages)}")

    spec = config.chp
    lambdas = [to_complex(z) for z in (spec.lambdas if spec else SAMPLE_LAMBDAS)]
    success, model, error = safe_execute(build_model, config)
    if not success:
        log = CheckLog([CheckRecord("construction", math.inf, 0.0, False, detail=f"{type(error).__name__}: {error}")])
        return _assemble(config, log, [], {}, started, command)

    state = RunState(config, model, lambdas)
    builders = {"model": model_tasks, "averages": average_tasks, "sov": sov_tasks,
                "chp": chp_tasks, "baxterq": baxterq_tasks}
    for stage in stages:
        if stage in builders:
            run_stage(state, stage, builders[stage], workers)
        elif stage == "spectrum":
            spectrum_stage(state, workers)
        elif stage == "bethe":
            success, _, error = safe_execute(bethe_stage, state)
            if not success:
                state.log.add(CheckRecord("bethe_setup", math.inf, 0.0, False,
                                          detail=f"{type(error).__name__}: {error}"))
    return _assemble(config, state.log, state.lines, state.tables, started, command)


def _assemble(config: RunConfig, log: CheckLog, lines: Sequence[SpectralLine], tables: Dict[str, List[dict]],
              started: float, command: str) -> RunReportModel:
    records = log.sorted()
    report = RunReportModel(
        config=config.model_dump(mode="json"),
        checks=[record_model(r) for r in records],
        spectrum=[line_model(line) for line in lines],
        tables=tables,
        metadata={
            "command": command,
            "seed": config.sampler.seed,
            "tau2lab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pydantic": pydantic.VERSION,
            "wall_time": round(time.perf_counter() - started, 3),
        },
    )
    failed = len(log.failed())
    if failed:
        logger.warning(f"❌ 실패한 검사 {failed}개 / 전체 {len(records)}개 (통과율 {log.pass_rate():.1f}%)")
    else:
        logger.info(f"✅ 모든 검사 통과 ({len(records)}개)")
    return report
