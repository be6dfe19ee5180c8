# -*- coding: utf-8 -*-
"""
에러 처리 테스트
"""

import math

import pytest

from tau2lab.error_handler import CheckLog, flag, run_check, safe_execute
from tau2lab.exceptions import DegeneracyError


def test_run_check_pass_and_fail():
    ok = run_check("ok", lambda: 1e-12, 1e-10)
    bad = run_check("bad", lambda: 1e-3, 1e-10)
    assert ok.passed and not bad.passed
    assert bad.residual == 1e-3


def test_run_check_with_scale():
    """(잔차, scale) 튜플"""
    record = run_check("scaled", lambda: (1e-12, 4.0), 1e-10)
    assert record.passed
    assert record.scale == 4.0


def test_run_check_domain_error():
    """도메인 예외는 무한대 잔차 기록, 다른 검사는 계속"""
    def boom():
        raise DegeneracyError("double eigenvalue")

    record = run_check("boom", boom, 1e-10)
    assert not record.passed
    assert math.isinf(record.residual)
    assert record.detail.startswith("DegeneracyError")


def test_run_check_unexpected_error():
    record = run_check("zero", lambda: 1 / 0, 1e-10)
    assert record.detail.startswith("unexpected ZeroDivisionError")


def test_nan_residual_fails():
    assert not run_check("nan", lambda: float("nan"), 1.0).passed


def test_safe_execute():
    success, result, error = safe_execute(lambda x: x * 2, 21)
    assert success and result == 42 and error is None


def test_log_ignores_informational():
    log = CheckLog()
    log.add(run_check("good", lambda: 0.0, 1e-10))
    log.add(run_check("info", lambda: 5.0, 1e-10, informational=True))
    log.add(flag("branch", 1.0, detail="second branch"))
    assert log.failed() == []
    assert log.pass_rate() == 100.0
    assert [r.name for r in log.sorted()] == ["branch", "good", "info"]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
