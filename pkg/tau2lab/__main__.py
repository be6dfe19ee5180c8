# -*- coding: utf-8 -*-
"""
tau2lab 명령행 진입점

사용법:
    python -m tau2lab verify --config run.json --out reports --format json
    python -m tau2lab spectrum --config run.json --format csv
    python -m tau2lab chp --config chp.json
    python -m tau2lab baxterq --seed 7
    python -m tau2lab sample-config --out run.json
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from .config import LOG_LEVEL, THREADS, setup_logging
from .exceptions import Tau2LabError
from .report_generator import emit_report
from .runner import run_suite
from .schemas import RunConfig, load_config, sample_config

logger = logging.getLogger(__name__)

COMMANDS = ("verify", "spectrum", "chp", "baxterq")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tau2lab", description="τ₂ 모델 수치 검증 도구")
    parser.add_argument("--log-level", type=str, default=LOG_LEVEL, help="로그 레벨 (DEBUG, INFO, WARNING, ERROR)")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("verify", "모드 전체 검사 실행"),
        ("spectrum", "스펙트럼 표만 계산"),
        ("chp", "chiral Potts 검사만 실행"),
        ("baxterq", "일반화 Q 검사만 실행"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", type=str, default=None, help="JSON 설정 파일 경로 (없으면 기본값)")
        cmd.add_argument("--out", type=str, default=None, help="리포트 디렉토리")
        cmd.add_argument("--format", choices=("json", "csv"), default=None, help="리포트 형식")
        cmd.add_argument("--seed", type=int, default=None, help="샘플러 시드 (설정 파일보다 우선)")
        cmd.add_argument("--threads", type=int, default=THREADS, help="검사 스레드 수")

    sample = sub.add_parser("sample-config", help="설정 템플릿 출력")
    sample.add_argument("--out", type=str, default=None, help="저장할 파일 경로 (없으면 표준 출력)")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """설정 파일 + 명령행 오버라이드"""
    config = load_config(args.config) if args.config else RunConfig()
    updates = {}
    if args.seed is not None:
        updates["sampler"] = config.sampler.model_copy(update={"seed": args.seed})
    output = {}
    if args.out is not None:
        output["directory"] = args.out
    if args.format is not None:
        output["format"] = args.format
    if output:
        updates["output"] = config.output.model_copy(update=output)
    return config.model_copy(update=updates) if updates else config


def main(argv: Optional[List[str]] = None) -> int:
    """
    Returns:
        종료 코드 (검사 실패 또는 설정 오류 시 1)
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)

    if args.command == "sample-config":
        text = json.dumps(sample_config(), ensure_ascii=False, indent=2)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as f:
                f.write(text + "\n")
            logger.info(f"[✔] 설정 템플릿 저장 → {args.out}")
        else:
            print(text)
        return 0

    try:
        config = resolve_config(args)
        report = run_suite(config, command=args.command, workers=args.threads)
        emit_report(report, config.output.format, config.output.directory, config.output.stem)
    except Tau2LabError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return 1

    failed = [c.name for c in report.checks if not c.passed and not c.informational]
    if failed:
        logger.error(f"❌ 실패한 검사: {', '.join(failed)}")
        return 1
    logger.info("✅ 검증 완료")
    return 0


if __name__ == "__main__":
    sys.exit(main())
