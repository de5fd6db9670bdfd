"""Command-line behavior: subcommands, overrides, and exit codes
(0 success, 1 configuration, 2 data, 3 analysis)."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from qsimval.cli import main


class _SearchHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", "0"))
        body = json.loads(self.rfile.read(length))
        data = json.dumps(
            {"doc_ids": [f"doc-{i}" for i in range(body["k"])]}
        ).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *_args):
        pass


@pytest.fixture()
def search_endpoint():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _SearchHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}/search"
    server.shutdown()
    thread.join()


class TestAugmentCommand:
    def test_fills_serps_over_http(self, tmp_path, monkeypatch, capsys, search_endpoint):
        monkeypatch.chdir(tmp_path)
        sessions = {
            "sessions": [
                {
                    "session_id": "s1",
                    "id": "r1",
                    "interactions": [{"query": "rain jackets", "serp": []}],
                },
                {
                    "session_id": "s2",
                    "id": "r2",
                    "interactions": [{"query": "kept", "serp": ["d9"]}],
                },
            ]
        }
        (tmp_path / "sessions.json").write_text(json.dumps(sessions), "utf-8")
        code = main(
            [
                "augment",
                "--sessions", "sessions.json",
                "--kind", "real",
                "--endpoint", search_endpoint,
                "--k", "3",
                "--out-file", "augmented.json",
            ]
        )
        assert code == 0
        assert "augmented 1 SERP(s)" in capsys.readouterr().out
        back = json.loads((tmp_path / "augmented.json").read_text("utf-8"))
        first = back["sessions"][0]["interactions"][0]
        assert first["serp"] == ["doc-0", "doc-1", "doc-2"]
        assert first["augmented"] is True
        assert back["sessions"][1]["interactions"][0]["serp"] == ["d9"]

    def test_unreachable_endpoint_is_a_data_error(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        sessions = {
            "sessions": [
                {
                    "session_id": "s1",
                    "id": "r1",
                    "interactions": [{"query": "q", "serp": []}],
                }
            ]
        }
        (tmp_path / "sessions.json").write_text(json.dumps(sessions), "utf-8")
        code = main(
            [
                "augment",
                "--sessions", "sessions.json",
                "--kind", "real",
                "--endpoint", "http://127.0.0.1:9/search",
                "--out-file", "augmented.json",
            ]
        )
        assert code == 2
        assert "data error" in capsys.readouterr().err

    def test_missing_sessions_file(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        code = main(
            [
                "augment",
                "--sessions", "nope.json",
                "--kind", "real",
                "--endpoint", "http://127.0.0.1:9/search",
                "--out-file", "augmented.json",
            ]
        )
        assert code == 2


class TestMeasureCommand:
    def test_toy_corpus(self, toy_workdir, capsys):
        code = main(["measure", "--config", "config.json"])
        assert code == 0
        out = capsys.readouterr().out
        assert "24 pairs x 17 measures" in out
        assert (toy_workdir / "out" / "measure_matrix.csv").is_file()
        assert (toy_workdir / "out" / "measures.jsonl").is_file()

    def test_k_override_lands_in_outputs(self, toy_workdir):
        code = main(["measure", "--config", "config.json", "--k", "5"])
        assert code == 0
        resolved = json.loads(
            (toy_workdir / "out" / "resolved_config.json").read_text("utf-8")
        )
        assert resolved["config"]["cutoff_k"] == 5
        header = (toy_workdir / "out" / "measure_matrix.csv").read_text("utf-8").splitlines()[1]
        assert "precision_at_5" in header
        assert "precision_at_10" not in header

    def test_rbo_p_override_lands_in_resolved_config(self, toy_workdir):
        code = main(["measure", "--config", "config.json", "--rbo-p", "0.5"])
        assert code == 0
        resolved = json.loads(
            (toy_workdir / "out" / "resolved_config.json").read_text("utf-8")
        )
        assert resolved["config"]["rbo"]["p"] == 0.5

    def test_out_override_redirects_artifacts(self, toy_workdir):
        code = main(["measure", "--config", "config.json", "--out", "elsewhere"])
        assert code == 0
        assert (toy_workdir / "elsewhere" / "measure_matrix.csv").is_file()
        assert not (toy_workdir / "out").exists()


class TestAnalyzeCommand:
    def test_analyzes_a_matrix_file(self, toy_workdir, capsys):
        assert main(["measure", "--config", "config.json"]) == 0
        capsys.readouterr()
        code = main(
            [
                "analyze",
                "--matrix", "out/measure_matrix.csv",
                "--config", "config.json",
                "--out", "analysis",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "pearson.csv" in out
        for name in ("pearson.csv", "kendall.csv", "nmi.csv", "flags.json"):
            assert (toy_workdir / "analysis" / name).is_file()

    def test_missing_matrix_file(self, toy_workdir, capsys):
        code = main(["analyze", "--matrix", "absent.csv", "--config", "config.json"])
        assert code == 2
        assert "matrix file not found" in capsys.readouterr().err

    def test_single_column_matrix_is_an_analysis_error(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "m.csv").write_text(
            "simulator_id,session_id,rank,only\nsimA,s1,1,0.5\n", "utf-8"
        )
        code = main(["analyze", "--matrix", "m.csv"])
        assert code == 3
        assert "analysis error" in capsys.readouterr().err

    def test_partial_failure_exits_three_but_writes_the_rest(
        self, tmp_path, monkeypatch, capsys
    ):
        monkeypatch.chdir(tmp_path)
        lines = ["simulator_id,session_id,rank,m0,m0_copy"]
        for i in range(40):
            value = f"0.{i:02d}"
            lines.append(f"simA,s{i},1,{value},{value}")
        (tmp_path / "m.csv").write_text("\n".join(lines) + "\n", "utf-8")
        code = main(["analyze", "--matrix", "m.csv", "--out", "analysis"])
        assert code == 3
        captured = capsys.readouterr()
        assert "error: efa_loadings.csv" in captured.err
        assert (tmp_path / "analysis" / "pearson.csv").is_file()


class TestReportAndBootstrapCommands:
    def test_report_runs_everything(self, toy_workdir, capsys):
        code = main(["report", "--config", "config.json", "--iterations", "10"])
        assert code == 0
        out = capsys.readouterr().out
        assert "bootstrap.json" not in out  # bootstrap prints via its own line set
        for name in ("measures.jsonl", "measure_matrix.csv", "heatmap.svg", "bootstrap.json"):
            assert (toy_workdir / "out" / name).is_file(), name

    def test_bootstrap_command(self, toy_workdir, capsys):
        code = main(["bootstrap", "--config", "config.json", "--iterations", "5"])
        assert code == 0
        assert "modes: cross_simulator, within_simulator" in capsys.readouterr().out
        payload = json.loads((toy_workdir / "out" / "bootstrap.json").read_text("utf-8"))
        assert payload["modes"]["within_simulator"]["iterations"] == 5


class TestErrorExits:
    def test_missing_config_file(self, capsys):
        code = main(["measure", "--config", "does-not-exist.json"])
        assert code == 1
        assert "configuration error" in capsys.readouterr().err

    def test_invalid_config_json(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "config.json").write_text("{oops", "utf-8")
        assert main(["measure", "--config", "config.json"]) == 1

    def test_measure_without_session_paths(self, capsys):
        code = main(["measure"])
        assert code == 1
        assert "'real' and 'simulated'" in capsys.readouterr().err

    def test_missing_sessions_file_is_a_data_error(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "config.json").write_text(
            json.dumps({"real": "a.json", "simulated": "b.json"}), "utf-8"
        )
        code = main(["measure", "--config", "config.json"])
        assert code == 2
        assert "data error" in capsys.readouterr().err

    def test_usage_problems_exit_one(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "configuration error" in capsys.readouterr().err
        assert main(["measure", "--no-such-flag"]) == 1
        assert main([]) == 1

    def test_version_flag(self, capsys):
        from qsimval._version import __version__

        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert f"qsimval {__version__}" in capsys.readouterr().out
