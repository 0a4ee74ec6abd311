"""Command-line runner tests.

Exercises configuration resolution (flag beats config file beats
default), the key=value parser's failure modes, the exit-code contract
(0 pass, 1 assertion failure, 2 bad configuration), artifact layout,
and byte-level reproducibility of a fixed invocation.
"""

import json

import pytest

from cuspgrowth import cli
from cuspgrowth.cli import (
    EXIT_CONFIG,
    EXIT_FAIL,
    EXIT_PASS,
    TOLERANCE_DEFAULTS,
    build_parser,
    resolve_config,
)
from cuspgrowth.errors import ConfigError


def _resolve(argv):
    return resolve_config(build_parser().parse_args(argv))


def _run(tmp_path, *argv):
    out = tmp_path / "out"
    rc = cli.main([*argv, "--out", str(out)])
    return rc, out


def _summary(out):
    return json.loads((out / "summary.json").read_text())


def _assertion_map(summary):
    return {a["name"]: a for a in summary["assertions"]}


class TestResolveConfig:
    def test_defaults(self):
        cfg = _resolve(["oracle-verify"])
        assert cfg.command == "oracle-verify"
        assert cfg.name == "all"
        assert cfg.r_max == 500.0
        assert cfg.r_cap == 12.0
        assert cfg.gauge == 1.0
        assert cfg.seed == 7
        assert cfg.out.name == "cuspgrowth-out"
        assert cfg.tolerances == TOLERANCE_DEFAULTS
        assert cfg.plot_script is False
        assert cfg.b is None and cfg.gamma is None
        assert cfg.m is None and cfg.mu is None

    def test_cli_flags(self):
        cfg = _resolve(["example-run", "--name", "exotic-div-5.3b",
                        "--b", "3", "--Rmax", "60", "--seed", "11",
                        "--M", "5", "--mu", "0.1", "--gamma", "0.7"])
        assert cfg.name == "exotic-div-5.3b"
        assert cfg.b == 3.0
        assert cfg.r_max == 60.0
        assert cfg.seed == 11
        assert cfg.m == 5
        assert cfg.mu == 0.1
        assert cfg.gamma == 0.7

    def test_config_file_supplies_command(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("command=cusp-analyze\n"
                        "name=sparse-5.2\n"
                        "Rmax=40\n"
                        "seed=11\n")
        cfg = _resolve(["--config", str(path)])
        assert cfg.command == "cusp-analyze"
        assert cfg.name == "sparse-5.2"
        assert cfg.r_max == 40.0
        assert cfg.seed == 11

    def test_cli_beats_config_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("command=example-run\nname=sparse-5.2\nRmax=40\n")
        cfg = _resolve(["--config", str(path), "--Rmax", "80"])
        assert cfg.r_max == 80.0
        assert cfg.name == "sparse-5.2"

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# run setup\n"
                        "\n"
                        "command=profile-validate\n"
                        "Rmax=60  # sampling radius\n")
        cfg = _resolve(["--config", str(path)])
        assert cfg.command == "profile-validate"
        assert cfg.r_max == 60.0

    def test_plot_script_from_file(self, tmp_path):
        for raw, expected in (("yes", True), ("true", True), ("1", True),
                              ("no", False), ("0", False)):
            path = tmp_path / f"run-{raw}.cfg"
            path.write_text(f"command=profile-validate\nplot_script={raw}\n")
            assert _resolve(["--config", str(path)]).plot_script is expected

    def test_no_command_anywhere(self, tmp_path):
        path = tmp_path / "empty.cfg"
        path.write_text("")
        with pytest.raises(ConfigError, match="no command given"):
            _resolve(["--config", str(path)])

    def test_unknown_command_in_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("command=transmogrify\n")
        with pytest.raises(ConfigError, match="unknown command"):
            _resolve(["--config", str(path)])

    def test_unknown_command_on_cli(self):
        # argparse owns positional validation and exits on its own
        with pytest.raises(SystemExit):
            build_parser().parse_args(["transmogrify"])

    def test_unknown_catalog_id(self):
        with pytest.raises(ConfigError, match="unknown catalog id"):
            _resolve(["example-run", "--name", "dense-9.9"])

    def test_missing_config_file(self):
        with pytest.raises(ConfigError, match="no such file"):
            _resolve(["--config", "/nonexistent/run.cfg"])

    def test_line_without_equals(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("command=oracle-verify\nfrobnicate\n")
        with pytest.raises(ConfigError, match="expected key=value"):
            _resolve(["--config", str(path)])

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("command=oracle-verify\nspeed=11\n")
        with pytest.raises(ConfigError, match="unknown key 'speed'"):
            _resolve(["--config", str(path)])

    def test_bad_value(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("command=oracle-verify\nM=4.5\n")
        with pytest.raises(ConfigError, match="bad value for 'M'"):
            _resolve(["--config", str(path)])

    def test_rcap_beyond_enumeration_cap(self):
        with pytest.raises(ConfigError, match="enumeration cap"):
            _resolve(["oracle-verify", "--Rcap", "14.5"])


class TestToleranceFile:
    def _with(self, tmp_path, text):
        path = tmp_path / "tol.cfg"
        path.write_text(text)
        return _resolve(["profile-validate", "--tolerances", str(path)])

    def test_override_merges_with_defaults(self, tmp_path):
        cfg = self._with(tmp_path, "pinch_tol=0.05\n")
        assert cfg.tolerances["pinch_tol"] == 0.05
        assert cfg.tolerances["trend_tau"] == TOLERANCE_DEFAULTS["trend_tau"]

    def test_unknown_knob(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown key 'weird_knob'"):
            self._with(tmp_path, "weird_knob=1\n")

    def test_nonpositive_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="must be positive"):
            self._with(tmp_path, "trend_tau=0\n")

    def test_fit_pad_zero_allowed_negative_rejected(self, tmp_path):
        assert self._with(tmp_path, "fit_pad=0\n").tolerances["fit_pad"] == 0.0
        with pytest.raises(ConfigError, match="nonnegative"):
            self._with(tmp_path, "fit_pad=-0.1\n")


class TestExitCodes:
    def test_empty_config_is_config_error(self, tmp_path, capsys):
        path = tmp_path / "empty.cfg"
        path.write_text("")
        assert cli.main(["--config", str(path)]) == EXIT_CONFIG
        assert "no command given" in capsys.readouterr().err

    def test_bad_name_is_config_error(self, tmp_path):
        rc, _ = _run(tmp_path, "example-run", "--name", "dense-9.9")
        assert rc == EXIT_CONFIG

    def test_bad_tolerance_is_config_error(self, tmp_path):
        tol = tmp_path / "tol.cfg"
        tol.write_text("weird_knob=1\n")
        rc, _ = _run(tmp_path, "profile-validate", "--tolerances", str(tol))
        assert rc == EXIT_CONFIG

    def test_failed_claim_is_assertion_failure(self, tmp_path, capsys):
        # a huge trend threshold blinds the classifier to the power-law
        # factor of this family, so the computed ambient class misses
        tol = tmp_path / "tol.cfg"
        tol.write_text("trend_tau=1000\n")
        rc, out = _run(tmp_path, "example-run", "--name", "exotic-conv-5.3a",
                       "--Rmax", "60", "--tolerances", str(tol))
        assert rc == EXIT_FAIL
        summary = _summary(out)
        assert summary["passed"] is False
        amap = _assertion_map(summary)
        assert not amap["exotic-conv-5.3a:computed-ambient-class"]["passed"]
        assert "FAIL" in capsys.readouterr().out


class TestProfileValidate:
    def test_single_catalog_entry(self, tmp_path):
        rc, out = _run(tmp_path, "profile-validate", "--name", "sparse-5.2")
        assert rc == EXIT_PASS
        summary = _summary(out)
        assert summary["command"] == "profile-validate"
        assert summary["passed"] is True
        names = [a["name"] for a in summary["assertions"]]
        assert "certified:sparse-5.2" in names
        assert all(a["passed"] for a in summary["assertions"])
        text = (out / "profiles.txt").read_text()
        assert "certified: yes" in text
        assert (out / "profile-sparse-5.2.txt").is_file()

    def test_artifact_list_matches_disk(self, tmp_path):
        rc, out = _run(tmp_path, "profile-validate", "--name",
                       "critical-finite-5.4a")
        assert rc == EXIT_PASS
        summary = _summary(out)
        assert summary["artifacts"] == sorted(summary["artifacts"])
        assert "summary.json" in summary["artifacts"]
        on_disk = sorted(p.name for p in out.iterdir())
        assert summary["artifacts"] == on_disk


class TestCuspAnalyze:
    def test_csv_and_report(self, tmp_path):
        rc, out = _run(tmp_path, "cusp-analyze", "--name", "sparse-5.2",
                       "--Rmax", "40")
        assert rc == EXIT_PASS
        csv = (out / "cusp-sparse-5.2.csv").read_text().splitlines()
        assert csv[0] == "R,log_excursion_mass,log_orbit_count"
        assert len(csv) == 66
        report = (out / "cusps.txt").read_text()
        assert "series abscissa" in report
        amap = _assertion_map(_summary(out))
        assert amap["orbit-monotone:sparse-5.2"]["passed"]


class TestLatticeClassify:
    def test_single_entry(self, tmp_path):
        rc, out = _run(tmp_path, "lattice-classify", "--name",
                       "critical-infinite-5.4b")
        assert rc == EXIT_PASS
        amap = _assertion_map(_summary(out))
        entry = amap["classified:critical-infinite-5.4b"]
        assert entry["passed"]
        assert entry["bm_finite"] is False
        assert entry["predicted_volume"] == "upper"
        assert len(entry["omega_plus"]) == 2
        assert "pinch" in (out / "classification.txt").read_text()


class TestExampleRun:
    def test_short_radius_scores_prediction_claims(self, tmp_path):
        rc, out = _run(tmp_path, "example-run", "--name", "exotic-div-5.3b",
                       "--b", "3", "--Rmax", "60")
        assert rc == EXIT_PASS
        summary = _summary(out)
        amap = _assertion_map(summary)
        prefix = "exotic-div-5.3b:"
        assert set(amap) == {prefix + claim for claim in (
            "sparse", "exotic", "pinch-class", "predicted-ambient-class",
            "predicted-volume-class", "predicted-invariant-measure",
            "margulis-prediction", "computed-ambient-class")}
        assert amap[prefix + "predicted-invariant-measure"]["passed"]
        volume = amap[prefix + "predicted-volume-class"]
        assert volume["passed"] and volume["computed"] == "pure"
        text = (out / "example-exotic-div-5.3b.txt").read_text()
        assert "only prediction claims are scored" in text
        assert (out / "growth-exotic-div-5.3b.csv").is_file()

    def test_plot_script_emission(self, tmp_path):
        rc, out = _run(tmp_path, "example-run", "--name", "sparse-5.2",
                       "--Rmax", "60", "--plot-script")
        assert rc == EXIT_PASS
        assert "plot.gp" in _summary(out)["artifacts"]
        script = (out / "plot.gp").read_text()
        assert 'plot "growth-sparse-5.2.csv"' in script


class TestOracleVerify:
    def test_default_invocation(self, tmp_path):
        rc, out = _run(tmp_path, "oracle-verify", "--Rcap", "12",
                       "--delta", "1", "--seed", "7")
        assert rc == EXIT_PASS
        summary = _summary(out)
        amap = _assertion_map(summary)
        assert set(amap) == {"geometric-lemmas", "count-sandwiches",
                             "exponent-near-one", "counting-band"}
        assert all(a["passed"] for a in summary["assertions"])
        assert 0.85 <= amap["exponent-near-one"]["estimate"] <= 1.15
        report = (out / "oracle.txt").read_text()
        assert "== fitted constants ==" in report
        assert "counting_log_constant" in report
        counts = (out / "oracle-counts.csv").read_text().splitlines()
        assert counts[0].startswith("R,v_gamma,")


class TestReproducibility:
    def test_identical_config_and_seed_bytes(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("command=example-run\n"
                        "name=exotic-div-5.3b\n"
                        "b=3\n"
                        "Rmax=60\n"
                        "seed=5\n")
        outs = []
        for tag in ("first", "second"):
            out = tmp_path / tag
            assert cli.main(["--config", str(path),
                             "--out", str(out)]) == EXIT_PASS
            outs.append(out)
        first = {p.name: p.read_bytes() for p in outs[0].iterdir()}
        second = {p.name: p.read_bytes() for p in outs[1].iterdir()}
        assert first == second


class TestStdout:
    def test_final_status_line(self, tmp_path, capsys):
        rc, out = _run(tmp_path, "profile-validate", "--name", "sparse-5.2")
        assert rc == EXIT_PASS
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[-1] == f"profile-validate: PASS ({out / 'summary.json'})"
        assert all(line.startswith("ok   ") for line in lines[:-1])
