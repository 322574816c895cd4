import json
from pathlib import Path

import pytest

from kgmeasure.cli import default_config_path, main
from kgmeasure.config import load_config, parse_config
from kgmeasure.errors import ConfigError


def read_all(out_dir, sub):
    csv_text = (out_dir / f"{sub}.csv").read_text()
    summary = json.loads((out_dir / f"{sub}_summary.json").read_text())
    return csv_text, summary


class TestConfigLoading:
    def test_bundled_config_parses(self):
        cfg = load_config(default_config_path())
        assert cfg.seed == 7
        assert "f" in cfg.functions and "bob" in cfg.probes

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.toml")

    def test_invalid_toml(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("this is = not [ toml")
        with pytest.raises(ConfigError):
            load_config(p)

    def test_missing_required_field(self):
        raw = {"lattice": {"n_t": 32, "n_x": 96, "dx": 0.1}}
        with pytest.raises(ConfigError, match="lattice"):
            parse_config(raw)

    def test_degenerate_rectangle(self, tmp_path):
        text = default_config_path().read_text()
        text += '\n[regions.bad]\nkind = "rect"\nbox = [5, 8, 20, 10]\n'
        p = tmp_path / "scenario.toml"
        p.write_text(text)
        with pytest.raises(ConfigError, match="bad"):
            load_config(p)

    def test_unknown_task_reference(self, tmp_path):
        text = default_config_path().read_text().replace(
            'f = "f"', 'f = "not_a_function"', 1)
        p = tmp_path / "scenario.toml"
        p.write_text(text)
        with pytest.raises(ConfigError):
            load_config(p)


class TestSubcommands:
    @pytest.mark.parametrize("sub", ["green", "sorkin", "scatter", "measure", "causal"])
    def test_runs_clean_on_bundled_scenario(self, sub, tmp_path, capsys):
        code = main([sub, "--out", str(tmp_path)])
        assert code == 0
        csv_text, summary = read_all(tmp_path, sub)
        assert csv_text.startswith("scenario,quantity,value,tolerance,passed")
        assert summary["all_passed"] is True
        assert summary["failures"] == []
        assert summary["rows"] >= 1
        out = capsys.readouterr().out
        assert "FAIL" not in out

    def test_bad_config_exits_2(self, tmp_path, capsys):
        text = default_config_path().read_text()
        text += '\n[regions.bad]\nkind = "rect"\nbox = [5, 8, 20, 10]\n'
        p = tmp_path / "scenario.toml"
        p.write_text(text)
        code = main(["causal", "--config", str(p), "--out", str(tmp_path / "o")])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_config_exits_2(self, tmp_path, capsys):
        code = main(["green", "--config", str(tmp_path / "none.toml"),
                     "--out", str(tmp_path / "o")])
        assert code == 2

    def test_dump_grids(self, tmp_path):
        assert main(["sorkin", "--out", str(tmp_path), "--dump-grids"]) == 0
        grids = list(Path(tmp_path).glob("*.csv"))
        names = {p.name for p in grids}
        assert "sorkin.csv" in names
        assert any("retarded" in n for n in names)


class TestDeterminism:
    def test_verify_bit_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["verify", "--out", str(a), "--seed", "11"]) == 0
        assert main(["verify", "--out", str(b), "--seed", "11"]) == 0
        assert (a / "verify.csv").read_bytes() == (b / "verify.csv").read_bytes()
        assert (a / "verify_summary.json").read_bytes() == \
            (b / "verify_summary.json").read_bytes()

    def test_verify_parallel_matches_serial(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["verify", "--out", str(a), "--seed", "11"]) == 0
        assert main(["verify", "--out", str(b), "--seed", "11", "--parallel"]) == 0
        assert (a / "verify.csv").read_bytes() == (b / "verify.csv").read_bytes()

    def test_seed_recorded_in_summary(self, tmp_path):
        assert main(["measure", "--out", str(tmp_path), "--seed", "3"]) == 0
        _, summary = read_all(tmp_path, "measure")
        assert summary["seed"] == 3

    def test_sorkin_outputs_repeatable(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["sorkin", "--out", str(a)]) == 0
        assert main(["sorkin", "--out", str(b)]) == 0
        assert (a / "sorkin.csv").read_bytes() == (b / "sorkin.csv").read_bytes()


class TestToleranceScale:
    def test_tight_tolerance_fails(self, tmp_path, capsys):
        # shrinking every tolerance far below round-off must flip rows to fail
        code = main(["sorkin", "--out", str(tmp_path),
                     "--tolerance-scale", "1e-20"])
        assert code == 1
        _, summary = read_all(tmp_path, "sorkin")
        assert summary["all_passed"] is False
        assert summary["failures"]

    def test_loose_tolerance_passes(self, tmp_path):
        assert main(["green", "--out", str(tmp_path),
                     "--tolerance-scale", "100.0"]) == 0
