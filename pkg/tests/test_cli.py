# -*- coding: utf-8 -*-
"""
명령행 테스트
"""

import json

import pytest

from tau2lab.__main__ import build_parser, main, resolve_config
from tau2lab.report_generator import load_report


def test_sample_config_stdout(capsys):
    assert main(["sample-config"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["mode"] == "chp_rbar"


def test_sample_config_file(tmp_path):
    path = tmp_path / "run.json"
    assert main(["sample-config", "--out", str(path)]) == 0
    assert json.loads(path.read_text(encoding="utf-8"))["chp"]["k"] == [0.4, 0.0]


def test_overrides(tmp_path):
    """--seed, --out, --format 이 설정 파일보다 우선"""
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"sampler": {"seed": 1}}), encoding="utf-8")
    args = build_parser().parse_args(["verify", "--config", str(path), "--seed", "9",
                                      "--out", str(tmp_path), "--format", "csv"])
    config = resolve_config(args)
    assert config.sampler.seed == 9
    assert config.output.directory == str(tmp_path)
    assert config.output.format == "csv"


def test_config_error_exit_code(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"p_odd": 4}), encoding="utf-8")
    assert main(["verify", "--config", str(path)]) == 1


def test_missing_stage_exit_code(tmp_path):
    """baxterq 모드에는 spectrum 단계가 없다"""
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"mode": "baxterq"}), encoding="utf-8")
    assert main(["spectrum", "--config", str(path), "--out", str(tmp_path)]) == 1


def test_spectrum_command(tmp_path):
    path = tmp_path / "run.json"
    config = {"sampler": {"n_sites": 1, "seed": 5}, "output": {"stem": "run"}}
    path.write_text(json.dumps(config), encoding="utf-8")
    code = main(["spectrum", "--config", str(path), "--out", str(tmp_path), "--threads", "1"])
    report = load_report(str(tmp_path / "run.json"))
    assert code == 0
    assert report.metadata["command"] == "spectrum"
    assert len(report.spectrum) == 3


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(["plot"])


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
