# -*- coding: utf-8 -*-
"""
리포트 생성 모듈

RunReportModel 을 JSON (전체 중첩 구조) 또는 CSV (스펙트럴 라인당 한 행) 로 저장
"""

import csv
import json
import logging
import os
from datetime import datetime
from typing import Dict, List, Optional

from .exceptions import ReportGenerationError
from .schemas import RunReportModel

logger = logging.getLogger(__name__)


def _auto_stem(prefix: str = "tau2_report") -> str:
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    return f"{prefix}_{timestamp}"


def _n_sites(report: RunReportModel) -> int:
    config = report.config
    if config.get("sites"):
        return len(config["sites"])
    chp = config.get("chp") or {}
    if config.get("mode") == "chp" and chp.get("q_seeds"):
        return len(chp["q_seeds"])
    if str(config.get("mode", "")).startswith("chp") and chp.get("d_values"):
        return len(chp["d_values"])
    return config["sampler"]["n_sites"]


def spectrum_header(report: RunReportModel) -> List[str]:
    """k, t_{-N}…t_N (re/im 교대), Q_0…Q_{2lN}, 잔차 열"""
    n = _n_sites(report)
    l = (report.config["p_odd"] - 1) // 2
    header = ["index", "k"]
    for e in range(-n, n + 1):
        header += [f"t{e}_re", f"t{e}_im"]
    for e in range(2 * l * n + 1):
        header += [f"Q{e}_re", f"Q{e}_im"]
    header += ["max_bethe_residual", "det_functional_residual"]
    return header


def spectrum_rows(report: RunReportModel) -> List[Dict]:
    rows = []
    for line in report.spectrum:
        row = {"index": line.index, "k": line.k}
        for e, (re, im) in line.t.items():
            row[f"t{e}_re"], row[f"t{e}_im"] = re, im
        for e, (re, im) in (line.Q or {}).items():
            row[f"Q{e}_re"], row[f"Q{e}_im"] = re, im
        row["max_bethe_residual"] = line.residuals.get("bethe", "")
        row["det_functional_residual"] = line.residuals.get("det_functional", "")
        rows.append(row)
    return rows


def write_json(report: RunReportModel, path: str) -> str:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report.model_dump(mode="json"), f, ensure_ascii=False, indent=2)
    return path


def write_csv(report: RunReportModel, path: str) -> str:
    """스펙트럼이 비어 있으면 헤더만 쓴다"""
    header = spectrum_header(report)
    with open(path, "w", newline="", encoding="utf-8-sig") as f:
        writer = csv.DictWriter(f, fieldnames=header, restval="")
        writer.writeheader()
        writer.writerows(spectrum_rows(report))
    return path


def write_checks_csv(report: RunReportModel, path: str) -> str:
    header = ["name", "residual", "scale", "tolerance", "passed", "informational", "detail"]
    with open(path, "w", newline="", encoding="utf-8-sig") as f:
        writer = csv.DictWriter(f, fieldnames=header, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(c.model_dump() for c in report.checks)
    return path


def emit_report(report: RunReportModel, fmt: str = "json", directory: Optional[str] = None,
                stem: Optional[str] = None) -> List[str]:
    """
    리포트 파일 저장

    Args:
        report: RunReportModel
        fmt: json 또는 csv (csv 는 스펙트럼 표와 검사 표 두 파일)
        directory: 저장 디렉토리 (None이면 현재 디렉토리)
        stem: 파일명 (None이면 타임스탬프로 자동 생성)

    Returns:
        생성된 파일 경로 목록

    Raises:
        ReportGenerationError: 형식 오류 또는 쓰기 실패
    """
    if fmt not in ("json", "csv"):
        raise ReportGenerationError(f"unsupported report format: {fmt}")
    directory = directory or os.getcwd()
    stem = stem or _auto_stem()
    try:
        os.makedirs(directory, exist_ok=True)
        base = os.path.join(directory, stem)
        if fmt == "json":
            paths = [write_json(report, base + ".json")]
        else:
            paths = [write_csv(report, base + ".csv"), write_checks_csv(report, base + "_checks.csv")]
    except OSError as e:
        logger.error(f"❌ 리포트 생성 실패: {e}", exc_info=True)
        raise ReportGenerationError(f"cannot write report under {directory}: {e}") from e

    for path in paths:
        logger.info(f"[✔] 리포트 생성 완료 → {path}")
    return paths


def load_report(path: str) -> RunReportModel:
    """JSON 리포트 재로드"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return RunReportModel.model_validate(json.load(f))
    except (OSError, ValueError) as e:
        raise ReportGenerationError(f"cannot load report {path}: {e}") from e
