import csv
import io
import json
import math

import pytest

from quantlab.cli_report import (
    SuiteConfig,
    UsageError,
    emit,
    main,
    parse_config_file,
    parse_reports,
    render_csv,
    render_json,
    render_svg,
    run_suite,
)
from quantlab.report import CheckReport


def test_config_validation():
    cfg = SuiteConfig()
    assert cfg.model == "su2"
    assert cfg.suite == "all"
    with pytest.raises(UsageError):
        SuiteConfig(model="e8")
    with pytest.raises(UsageError):
        SuiteConfig(suite="everything")
    with pytest.raises(UsageError):
        SuiteConfig(tol=-1.0)
    with pytest.raises(UsageError):
        SuiteConfig(cutoff=0.0)
    with pytest.raises(UsageError):
        SuiteConfig(grid=32)
    with pytest.raises(UsageError):
        SuiteConfig(level=0)


def test_parse_config_file(tmp_path):
    p = tmp_path / "cfg"
    p.write_text(
        "# comment\n"
        "model = u1\n"
        "suite=psh\n"
        "seed = 11  # trailing comment\n"
        "tol = 1e-6\n"
        "\n"
    )
    values = parse_config_file(str(p))
    assert values == {"model": "u1", "suite": "psh", "seed": 11,
                      "tol": 1e-6}
    bad = tmp_path / "bad"
    bad.write_text("colour = blue\n")
    with pytest.raises(UsageError):
        parse_config_file(str(bad))
    bad.write_text("just a line\n")
    with pytest.raises(UsageError):
        parse_config_file(str(bad))


def test_kahler_suite_su2_includes_completeness():
    reports = run_suite(SuiteConfig(model="su2", suite="kahler"))
    ids = [r.check_id for r in reports]
    assert "kahler.completeness" in ids
    comp = reports[ids.index("kahler.completeness")]
    assert comp.passed
    assert comp.metadata["sup_norm_sq"] <= 4.0 + 1e-9
    assert all(r.passed for r in reports)


def test_full_pipeline_u1_all_passes():
    reports = run_suite(SuiteConfig(model="u1", suite="all", seed=0))
    assert len(reports) == 22
    failed = [r.check_id for r in reports if not r.passed]
    assert failed == []
    assert all(r.citation for r in reports)


def test_json_round_trip_and_determinism():
    cfg = SuiteConfig(model="u1", suite="psh", seed=5)
    reports = run_suite(cfg)
    text = render_json(reports, cfg)
    assert parse_reports(text) == reports
    again = render_json(run_suite(cfg), cfg)
    assert again == text
    doc = json.loads(text)
    assert doc["schema"] == "quantlab.report.v1"
    assert doc["config"]["seed"] == 5
    for check in doc["checks"]:
        assert set(check) == {
            "check_id", "citation", "tolerance", "max_error", "pass",
            "metadata",
        }


def test_csv_has_six_columns():
    reports = run_suite(SuiteConfig(model="u1", suite="density", grid=128))
    rows = list(csv.reader(io.StringIO(render_csv(reports))))
    assert rows[0] == ["check_id", "citation", "tolerance", "max_error",
                       "pass", "metadata"]
    assert len(rows) == len(reports) + 1
    assert all(len(row) == 6 for row in rows)


def test_empty_reports_rejected():
    with pytest.raises(UsageError):
        render_json([], None)
    with pytest.raises(UsageError):
        render_csv([])
    with pytest.raises(UsageError):
        render_svg([])


def _fake_density_report():
    return CheckReport.from_error(
        "density.codim2_removal", "curve", 1e-12, 0.0,
        m_list=[math.e, math.e**2], errors=[0.3, 0.2],
    )


def test_svg_panels():
    gram = CheckReport.from_error(
        "reduction.qr_commutes.x", "grams", 1e-4, 0.0,
        gram_a=[[1.0, 0.0], [0.0, 1.0]], gram_b=[[1.0, 0.0], [0.0, 1.0]],
    )
    spectrum = CheckReport.from_error(
        "psh.spectrum_curve", "spectrum", 1e-8, 0.0,
        spectrum_grid=[-1.0, 0.0, 1.0],
        spectrum_min={"square": [2.0, 2.0, 2.0]},
    )
    text = render_svg([_fake_density_report(), gram, spectrum])
    assert text.startswith("<svg ")
    assert text.count("<polyline") == 2
    assert text.count("<rect") >= 8 + 2
    # a report with no plottable payload is a usage error
    bare = CheckReport.from_error("x.y", "c", 1.0, 0.0)
    with pytest.raises(UsageError):
        render_svg([bare])


def test_emit_writes_files(tmp_path):
    reports = [_fake_density_report()]
    for fmt, name in (("json", "r.json"), ("csv", "r.csv"),
                      ("svg", "r.svg")):
        path = tmp_path / name
        emit(reports, fmt, str(path))
        assert path.stat().st_size > 0
    with pytest.raises(UsageError):
        emit(reports, "pdf", str(tmp_path / "r.pdf"))
    assert parse_reports((tmp_path / "r.json").read_text()) == reports


def test_cli_run_and_emit(tmp_path):
    out = tmp_path / "report.json"
    rc = main(["run", "--model", "u1", "--suite", "psh", "--seed", "3",
               "--out", str(out)])
    assert rc == 0
    svg = tmp_path / "report.svg"
    assert main(["emit", "--in", str(out), "--format", "svg",
                 "--out", str(svg)]) == 0
    assert svg.read_text().startswith("<svg ")
    csv_out = tmp_path / "report.csv"
    assert main(["emit", "--in", str(out), "--format", "csv",
                 "--out", str(csv_out)]) == 0


def test_cli_usage_errors():
    assert main(["run", "--model", "e8", "--suite", "all"]) == 2
    assert main(["run", "--model", "u1", "--suite", "nope"]) == 2
    assert main([]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_cli_config_file_with_overrides(tmp_path):
    cfg = tmp_path / "cfg"
    cfg.write_text("model = su2\nsuite = psh\nseed = 9\n")
    out = tmp_path / "r.json"
    rc = main(["run", "--config", str(cfg), "--model", "u1",
               "--out", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["model"] == "u1"
    assert doc["config"]["suite"] == "psh"
    assert doc["config"]["seed"] == 9


def test_cli_honest_failure_exits_one():
    # an unreachable tolerance must surface as exit code 1, not a throw
    assert main(["run", "--model", "u1", "--suite", "kahler",
                 "--tol", "1e-18"]) == 1
