# -*- coding: utf-8 -*-
"""
실행 설정 스키마 테스트
"""

import json

import pytest

from tau2lab.exceptions import ConfigError
from tau2lab.schemas import RunConfig, load_config, parse_config, sample_config


def test_defaults():
    config = parse_config({})
    assert config.mode == "general"
    assert (config.p_odd, config.p_prime) == (3, 2)
    assert config.n_sites == 2


def test_explicit_sites():
    site = {"alpha": [1, 0], "beta": [0.5, 0.2], "a": [1, 1], "b": [0.3, 0], "c": [0.7, 0], "d": [1.1, -0.4]}
    config = parse_config({"sites": [site, site, site]})
    assert config.n_sites == 3


@pytest.mark.parametrize("data,path", [
    ({"p_odd": 4}, "p_odd"),
    ({"p_odd": 3, "p_prime": 6}, "p_prime"),
    ({"mode": "chp"}, "chp.k"),
    ({"mode": "chp", "chp": {"k": [0.4, 0]}}, "chp.q_seeds"),
    ({"mode": "chp_rbar", "chp": {"k": [0.4, 0]}}, "chp.d_values"),
])
def test_invalid_root_and_mode(data, path):
    with pytest.raises(ConfigError) as exc:
        parse_config(data)
    assert exc.value.field_path == path


def test_schema_violation_path():
    """pydantic 오류는 점 표기 경로로 변환"""
    with pytest.raises(ConfigError) as exc:
        parse_config({"sampler": {"n_sites": 0}})
    assert exc.value.field_path == "sampler.n_sites"


def test_unknown_mode():
    with pytest.raises(ConfigError):
        parse_config({"mode": "free_fermion"})


def test_tolerance_overrides():
    assert parse_config({"tolerances": {"bethe": 1e-6}}).tolerances == {"bethe": 1e-6}
    with pytest.raises(ConfigError):
        parse_config({"tolerances": {"no_such_check": 1e-6}})
    with pytest.raises(ConfigError):
        parse_config({"tolerances": {"bethe": -1.0}})


def test_bad_epsilon():
    with pytest.raises(ConfigError):
        parse_config({"epsilon": 0})


def test_load_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"mode": "self_adjoint", "epsilon": 1}), encoding="utf-8")
    config = load_config(str(path))
    assert config.mode == "self_adjoint" and config.epsilon == 1


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{\"mode\": ", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(broken))


def test_sample_config_is_valid():
    """템플릿은 그대로 다시 로드된다"""
    data = sample_config()
    config = RunConfig.model_validate(data)
    assert config.mode == "chp_rbar"
    assert config.n_sites == 2


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
