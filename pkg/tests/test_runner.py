# -*- coding: utf-8 -*-
"""
실행 파이프라인 테스트
"""

import pytest

from tau2lab.exceptions import ConfigError
from tau2lab.runner import STAGES, run_suite
from tau2lab.schemas import MODES, parse_config, sample_config


@pytest.fixture(scope="module")
def general_report():
    return run_suite(parse_config({"sampler": {"n_sites": 1, "seed": 11}}), workers=2)


def test_every_mode_has_stages():
    assert set(STAGES) == set(MODES)
    assert all(STAGES[mode][0] == "model" for mode in MODES)


def test_general_single_site(general_report):
    """p^N 라인, 모든 검사 통과"""
    assert len(general_report.spectrum) == 3
    names = {c.name for c in general_report.checks}
    assert {"weyl_relations", "yang_baxter", "centrality", "det_functional[0]"} <= names
    assert general_report.passed
    assert [c.name for c in general_report.checks] == sorted(names)


def test_deterministic(general_report):
    """같은 시드와 설정이면 wall_time 외에는 동일"""
    again = run_suite(parse_config({"sampler": {"n_sites": 1, "seed": 11}}), workers=1)
    first = general_report.model_dump()
    second = again.model_dump()
    first["metadata"].pop("wall_time")
    second["metadata"].pop("wall_time")
    assert first == second


def test_two_site_sov_stage():
    """직접 기저가 만들어지고 SOV 검사가 각각 기록된다"""
    report = run_suite(parse_config({"sampler": {"n_sites": 2, "seed": 42}}), workers=2)
    checks = {c.name: c for c in report.checks}
    assert "sov_setup" not in checks
    for name in ("sov_qdet", "b_eigenrelation", "basis_agreement", "sov_actions"):
        assert checks[name].passed, name


def test_sample_config_chp_checks():
    """기본 부분다양체 구성에서 평균, W, 교환, 정규성 검사가 판정 대상으로 통과"""
    report = run_suite(parse_config(sample_config()), workers=2)
    checks = {c.name: c for c in report.checks}
    for name in ("centrality", "average_product", "w_recursion", "w_conjugation", "chp_baxter",
                 "chp_exchange", "chp_commutation_transfer", "chp_commutation_self", "normality", "t_dagger"):
        assert not checks[name].informational, name
        assert checks[name].passed, name
    assert checks["spectrum_completeness"].passed
    assert checks["omega_separation"].informational
    congruence = [c for c in report.checks if c.name.startswith("q_congruence")]
    assert congruence and all(c.passed and not c.informational for c in congruence)


def test_command_without_stage():
    with pytest.raises(ConfigError) as exc:
        run_suite(parse_config({"mode": "baxterq"}), command="spectrum")
    assert exc.value.field_path == "mode"


def test_construction_failure_is_recorded():
    """구성 실패는 construction 검사로 기록"""
    site = {"alpha": [0, 0], "beta": [1, 0], "a": [1, 0], "b": [1, 0], "c": [1, 0], "d": [1, 0]}
    report = run_suite(parse_config({"sites": [site]}))
    assert [c.name for c in report.checks] == ["construction"]
    assert not report.passed
    assert report.spectrum == []


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
