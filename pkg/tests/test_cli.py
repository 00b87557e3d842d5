import json

import pytest

from hfee.cli import main, read_config_file, UsageError


@pytest.fixture(scope="module")
def cohort(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli") / "data"
    assert main(["synth", "--data-root", str(root), "--subjects", "3", "--seed", "4"]) == 0
    return root


def test_synth_layout(cohort):
    assert sorted(p.name for p in (cohort / "subjects").iterdir()) == ["S01", "S02", "S03"]
    assert (cohort / "subjects.csv").is_file()
    assert json.loads((cohort / "cohort_spec.json").read_text())["seed"] == 4


def test_synth_refuses_overwrite_without_force(cohort, capsys):
    assert main(["synth", "--data-root", str(cohort), "--subjects", "3", "--seed", "4"]) == 1
    assert "--force" in capsys.readouterr().err


def test_synth_refuses_too_few_subjects(tmp_path, capsys):
    assert main(["synth", "--data-root", str(tmp_path / "d"), "--subjects", "2"]) == 1
    assert "at least 3" in capsys.readouterr().err
    assert not (tmp_path / "d" / "subjects").exists()


def test_ingest_check(cohort, capsys):
    assert main(["ingest-check", "--data-root", str(cohort)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and all(": ok;" in ln for ln in lines)


def test_ingest_check_reports_broken_subject(tmp_path, cohort, capsys):
    import shutil

    root = tmp_path / "data"
    shutil.copytree(cohort, root)
    (root / "subjects" / "S02" / "temp.csv").unlink()
    assert main(["ingest-check", "--data-root", str(root)]) == 1
    out = capsys.readouterr().out
    assert "S02: ERROR" in out and "S01: ok" in out


def test_features_writes_tables(cohort, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["features", "--data-root", str(cohort), "--out", str(out)]) == 0
    files = sorted(p.name for p in (out / "features").iterdir())
    assert files == ["S01.csv", "S02.csv", "S03.csv"]
    assert (out / "features" / "S01.csv").read_text().startswith("bin_end")


def test_crossval_single_config_and_rerun_identical(cohort, tmp_path, capsys):
    out = tmp_path / "out"
    args = ["crossval", "--data-root", str(cohort), "--out", str(out), "--scenario", "hf", "--subset", "low"]
    assert main(args) == 0
    (rep,) = out.glob("report_*.json")
    assert rep.name == "report_hf_low.json"
    first = rep.read_bytes()
    assert main(args) == 0
    assert rep.read_bytes() == first


def test_crossval_all_then_report(cohort, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["crossval", "--data-root", str(cohort), "--out", str(out), "--emit-svg"]) == 0
    assert len(list(out.glob("report_*.json"))) == 6
    assert (out / "boxplot.svg").read_text().startswith("<svg")
    capsys.readouterr()
    assert main(["report", "--out", str(out)]) == 0
    table = capsys.readouterr().out
    assert len(table.strip().splitlines()) == 7  # header + six configs
    for tag in ("HR", "HR_HF", "HF", "low_intensity"):
        assert tag in table


def test_report_without_reports_fails(tmp_path, capsys):
    assert main(["report", "--out", str(tmp_path)]) == 1
    assert "no report_" in capsys.readouterr().err


def test_config_file_and_flag_precedence(cohort, tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        f"# local run\ndata-root = {cohort}\nout = {tmp_path / 'from_cfg'}\n"
        "scenario = hr\nsubset = all\n"
    )
    assert main(["crossval", "--config", str(cfg)]) == 0
    assert [p.name for p in (tmp_path / "from_cfg").glob("*.json")] == ["report_hr_all.json"]
    # flag beats file
    assert main(["crossval", "--config", str(cfg), "--scenario", "hrhf"]) == 0
    assert (tmp_path / "from_cfg" / "report_hrhf_all.json").is_file()


def test_config_file_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(UsageError):
        read_config_file(cfg)
