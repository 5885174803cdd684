import json

import pytest

from steinlab.cli import (
    EXIT_CHECK_FAILED,
    EXIT_PASS,
    EXIT_USAGE,
    ConfigError,
    ExperimentConfig,
    parse_config,
    report_schema_version,
    run,
    serialize_config,
)

REPORT_SCHEMA = {
    "type": "object",
    "required": ["payload", "timing"],
    "properties": {
        "payload": {
            "type": "object",
            "required": ["schema_version", "command", "config", "seed", "results", "pass", "versions"],
            "properties": {
                "schema_version": {"type": "string"},
                "command": {"type": "string"},
                "config": {"type": "object"},
                "seed": {"type": "integer"},
                "results": {"type": "object"},
                "pass": {"type": "boolean"},
                "versions": {"type": "object"},
            },
        },
        "timing": {
            "type": "object",
            "required": ["wall_time_s"],
        },
    },
}


class TestConfig:
    def test_round_trip_identity(self):
        cfg = ExperimentConfig(command="rigidity", seed=7, alpha=1.25, shift=(0.1, -0.2), d=2)
        text = serialize_config(cfg)
        assert parse_config(text) == cfg
        assert serialize_config(parse_config(text)) == text

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[run]\ncommand = normalize\nbogus = 1\n")

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[mystery]\nx = 1\n")

    def test_unknown_command_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[run]\ncommand = frobnicate\n")


class TestSchemaVersion:
    def test_constant(self):
        assert report_schema_version() == "1.0.0"

    def test_every_report_carries_it(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        run(["normalize", "--alpha", "1.5", "--d", "1", "--out", str(out)])
        capsys.readouterr()
        doc = json.loads(out.read_text())
        assert doc["payload"]["schema_version"] == report_schema_version()

    def test_report_validates_against_schema(self, tmp_path, capsys):
        import jsonschema

        out = tmp_path / "r.json"
        run(["normalize", "--alpha", "1.5", "--d", "2", "--out", str(out)])
        capsys.readouterr()
        doc = json.loads(out.read_text())
        jsonschema.validate(doc, REPORT_SCHEMA)


class TestCommands:
    def test_normalize_passes(self, capsys):
        code = run(["normalize", "--alpha", "1.5", "--d", "2"])
        doc = json.loads(capsys.readouterr().out)
        assert code == EXIT_PASS
        assert doc["payload"]["results"]["normalization_residual"] < 1e-4

    def test_missing_alpha_is_usage_error(self, capsys):
        code = run(["normalize"])
        captured = capsys.readouterr()
        assert code == EXIT_USAGE
        assert "alpha" in captured.err

    def test_malformed_alpha_is_usage_error(self, capsys):
        code = run(["normalize", "--alpha", "oops"])
        capsys.readouterr()
        assert code == EXIT_USAGE

    def test_residual_sub1_passes(self, capsys):
        code = run(["residual", "--regime", "stable_sub1", "--n", "60000", "--seed", "3"])
        capsys.readouterr()
        assert code == EXIT_PASS

    def test_sample_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "batch.csv"
        code = run(
            ["sample", "--alpha", "1.5", "--d", "2", "--n", "100", "--seed", "5", "--out", str(out)]
        )
        capsys.readouterr()
        assert code == EXIT_PASS
        assert out.read_text().splitlines()[0] == "x1,x2"

    def test_unsupported_family_is_usage_error(self, capsys):
        # alpha > 1 with a one-atom sphere has no sampler
        code = run(["sample", "--alpha", "1.5", "--d", "1", "--sphere", "one_atom", "--n", "10"])
        capsys.readouterr()
        assert code == EXIT_USAGE

    def test_rigidity_small(self, capsys):
        code = run(["rigidity", "--alpha", "1.5", "--d", "2", "--R", "16"])
        doc = json.loads(capsys.readouterr().out)
        rows = doc["payload"]["results"]["curve"]
        assert [r["R"] for r in rows] == [4.0, 8.0, 16.0]
        # the pass verdict tracks the last ratio against [0.95, 1.05]
        expected = EXIT_PASS if 0.95 <= rows[-1]["ratio"] <= 1.05 else EXIT_CHECK_FAILED
        assert code == expected


class TestReproducibility:
    def test_identical_payloads_across_thread_counts(self, tmp_path, capsys, monkeypatch):
        outs = []
        for threads in ("1", "4"):
            monkeypatch.setenv("STEINLAB_THREADS", threads)
            out = tmp_path / f"rep_{threads}.json"
            code = run(
                [
                    "residual",
                    "--regime",
                    "sd_general",
                    "--alpha",
                    "1.5",
                    "--d",
                    "1",
                    "--n",
                    "40000",
                    "--seed",
                    "11",
                    "--out",
                    str(out),
                ]
            )
            capsys.readouterr()
            assert code == EXIT_PASS
            outs.append(json.loads(out.read_text())["payload"])
        assert json.dumps(outs[0], sort_keys=True) == json.dumps(outs[1], sort_keys=True)

    def test_rerun_byte_identical(self, tmp_path, capsys):
        texts = []
        for tag in ("a", "b"):
            out = tmp_path / f"{tag}.json"
            run(["normalize", "--alpha", "1.25", "--d", "1", "--out", str(out)])
            capsys.readouterr()
            texts.append(json.dumps(json.loads(out.read_text())["payload"], sort_keys=True))
        assert texts[0] == texts[1]
