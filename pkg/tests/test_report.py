# -*- coding: utf-8 -*-
"""
리포트 생성 테스트
"""

import csv
import os

import pytest

from tau2lab.exceptions import ReportGenerationError
from tau2lab.report_generator import emit_report, load_report, spectrum_header
from tau2lab.schemas import CheckRecordModel, RunConfig, RunReportModel, SpectralLineModel


@pytest.fixture
def report():
    config = RunConfig(sampler={"n_sites": 1}).model_dump(mode="json")
    checks = [
        CheckRecordModel(name="centrality", residual=2e-14, tolerance=1e-10, passed=True),
        CheckRecordModel(name="sector_pairing", residual=0.3, tolerance=None, passed=True, informational=True),
    ]
    line = SpectralLineModel(index=0, k=1, t={-1: (0.5, 0.1), 1: (1.5, -0.2)},
                             residuals={"det_functional": 3e-13, "bethe": None})
    return RunReportModel(config=config, checks=checks, spectrum=[line], metadata={"command": "spectrum"})


def test_header_layout(report):
    """N = 1, p = 3: t_{-1..1}, Q_{0..2}"""
    header = spectrum_header(report)
    assert header[:2] == ["index", "k"]
    assert "t-1_re" in header and "t1_im" in header
    assert "Q2_im" in header and "Q3_re" not in header
    assert header[-2:] == ["max_bethe_residual", "det_functional_residual"]


def test_json_reload(report, tmp_path):
    paths = emit_report(report, "json", str(tmp_path), "run")
    assert paths == [os.path.join(str(tmp_path), "run.json")]
    assert load_report(paths[0]) == report


def test_csv_rows(report, tmp_path):
    spectrum_path, checks_path = emit_report(report, "csv", str(tmp_path), "run")
    with open(spectrum_path, encoding="utf-8-sig", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 1
    assert float(rows[0]["t1_re"]) == 1.5
    assert rows[0]["Q0_re"] == ""
    with open(checks_path, encoding="utf-8-sig", newline="") as f:
        names = [row["name"] for row in csv.DictReader(f)]
    assert names == ["centrality", "sector_pairing"]


def test_csv_empty_spectrum(report, tmp_path):
    """스펙트럼이 없으면 헤더만"""
    empty = report.model_copy(update={"spectrum": []})
    path = emit_report(empty, "csv", str(tmp_path), "empty")[0]
    with open(path, encoding="utf-8-sig") as f:
        lines = f.read().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("index,k,")


def test_auto_stem(report, tmp_path):
    path = emit_report(report, "json", str(tmp_path))[0]
    assert os.path.basename(path).startswith("tau2_report_")


def test_bad_format(report, tmp_path):
    with pytest.raises(ReportGenerationError):
        emit_report(report, "xml", str(tmp_path))


def test_load_missing(tmp_path):
    with pytest.raises(ReportGenerationError):
        load_report(str(tmp_path / "missing.json"))


def test_passed_property(report):
    assert report.passed
    failing = CheckRecordModel(name="bethe[0]", residual=None, tolerance=1e-8, passed=False)
    assert not report.model_copy(update={"checks": report.checks + [failing]}).passed


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
