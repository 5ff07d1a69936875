"""Command-line entry points and their exit codes."""

import csv
import io
import os
import socket
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from mcp_pfr.cli import build_parser, main
from mcp_pfr.database import Database, db_generate
from mcp_pfr.field import field_make
from mcp_pfr.transport import serve_in_thread


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def parse_kv(text):
    return dict(line.split(" = ", 1) for line in text.splitlines() if " = " in line)


def parse_sections(text):
    """``[name]`` sections of a key-value document; top-level keys land under ""."""
    sections, current = {"": {}}, ""
    for line in text.splitlines():
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            sections[current] = {}
        elif " = " in line:
            key, value = line.split(" = ", 1)
            sections[current][key] = value
    return sections


class TestGenDbAndRetrieve(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_gen_db_then_simulate(self):
        path = os.path.join(self.tmp.name, "w.pfrd")
        code, out, _ = run_cli("gen-db", "--k", "2", "--l", "8", "--s", "3", "--seed", "4", "--out", path)
        self.assertEqual(code, 0)
        self.assertEqual(parse_kv(out)["K"], "2")
        self.assertEqual(Database.load(path).S, 3)

        code, out, _ = run_cli("retrieve", "--simulate", "--db", path, "--theta", "3", "--seed", "1")
        self.assertEqual(code, 0)
        record = parse_kv(out)
        self.assertEqual(record["oracle"], "match")
        self.assertEqual(record["Q_measured"], "12")
        self.assertEqual(record["rate"], "2/3")
        self.assertEqual(record["v"], "1,1")

    def test_gen_db_csv(self):
        path = os.path.join(self.tmp.name, "w.pfrd")
        code, out, _ = run_cli("gen-db", "--format", "csv", "--k", "2", "--l", "4", "--out", path, "--seed", "1")
        self.assertEqual(code, 0)
        header, row = out.splitlines()
        self.assertEqual(header.split(","), ["path", "field", "K", "L", "S", "digest"])
        self.assertEqual(row.split(",")[2:5], ["2", "4", "1"])

    def test_retrieve_csv_keeps_vector_in_one_column(self):
        code, out, _ = run_cli("retrieve", "--simulate", "--format", "csv", "--k", "2", "--theta", "3", "--seed", "1")
        self.assertEqual(code, 0)
        header, row = csv.reader(io.StringIO(out))
        self.assertEqual(len(header), len(row))
        self.assertEqual(dict(zip(header, row))["v"], "1,1")

    def test_simulate_general(self):
        code, out, _ = run_cli(
            "retrieve", "--simulate", "--scheme", "general", "--n", "3", "--p", "3",
            "--k", "2", "--theta", "2", "--s", "2", "--seed", "5",
        )
        self.assertEqual(code, 0)
        record = parse_kv(out)
        self.assertEqual(record["Q_measured"], "192")
        self.assertEqual(record["L"], "132")
        self.assertEqual(record["answer_elements"], "384")
        self.assertEqual(record["oracle"], "match")

    def test_retrieve_needs_k(self):
        code, _, err = run_cli("retrieve", "--simulate", "--theta", "1")
        self.assertEqual(code, 1)
        self.assertIn("--k", err)

    def test_retrieve_over_tcp(self):
        db = db_generate(field_make(2), 2, 8, 2, seed=3)
        endpoints = []
        for _ in range(2):
            server, _ = serve_in_thread(db)
            self.addCleanup(server.server_close)
            self.addCleanup(server.shutdown)
            endpoints.append(server.endpoint)
        code, out, _ = run_cli(
            "retrieve", "--servers", ",".join(endpoints), "--k", "2", "--theta", "1", "--s", "2", "--seed", "3",
        )
        self.assertEqual(code, 0)
        record = parse_kv(out)
        self.assertEqual(record["Q_measured"], "12")
        self.assertNotIn("oracle", record)

    def test_unreachable_server_exit_code(self):
        ports = []
        for _ in range(2):
            with socket.socket() as s:
                s.bind(("127.0.0.1", 0))
                ports.append(s.getsockname()[1])
        servers = ",".join(f"127.0.0.1:{port}" for port in ports)
        code, _, err = run_cli("retrieve", "--servers", servers, "--k", "2", "--theta", "1")
        self.assertEqual(code, 2)
        self.assertIn("error:", err)


class TestAuditAndRates(unittest.TestCase):

    def test_audit_pass(self):
        code, out, _ = run_cli("audit", "--k", "3")
        self.assertEqual(code, 0)
        record = parse_kv(out)
        self.assertEqual(record["format"], "pfr-audit/1")
        self.assertEqual(record["passed"], "true")

    def test_audit_failure_exit_code(self):
        code, out, _ = run_cli("audit", "--k", "2", "--mutation", "drop_pairs")
        self.assertEqual(code, 3)
        self.assertEqual(parse_kv(out)["passed"], "false")
        code, _, _ = run_cli("audit", "--scheme", "general", "--n", "3", "--p", "3", "--k", "2")
        self.assertEqual(code, 3)

    def test_audit_csv(self):
        code, out, _ = run_cli("audit", "--scheme", "general", "--n", "3", "--p", "3", "--k", "2", "--format", "csv")
        self.assertEqual(code, 3)
        rows = list(csv.DictReader(io.StringIO(out)))
        self.assertEqual([r["server"] for r in rows], ["1", "2", "3"])
        self.assertEqual([r["passed"] for r in rows], ["true", "false", "false"])
        self.assertEqual(rows[0]["requests"], "64")

    def test_audit_report_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "audit.kv")
            code, out, _ = run_cli("audit", "--k", "2", "--format", "kv", "--out", path)
            self.assertEqual(code, 0)
            with open(path, encoding="utf-8") as fh:
                self.assertEqual(fh.read().strip(), out.strip())
            self.assertEqual(parse_kv(out)["passed"], "true")

    def test_statistical_audit(self):
        code, out, _ = run_cli("audit", "--k", "2", "--trials", "50", "--seed", "2")
        self.assertEqual(code, 0)
        sections = parse_sections(out)
        self.assertEqual(sections[""]["format"], "pfr-stat-audit/1")
        self.assertEqual(sections[""]["trials"], "50")
        self.assertEqual(set(sections) - {""}, {"server.1", "server.2"})

    def test_statistical_audit_frequency_table(self):
        code, out, _ = run_cli("audit", "--k", "2", "--trials", "5", "--format", "kv", "--seed", "1")
        self.assertEqual(code, 0)
        for name in ("server.1", "server.2"):
            server = parse_sections(out)[name]
            positions = int(server["positions"])
            self.assertEqual(positions, 6)
            counts = [
                [int(c) for c in server[f"counts.{i}"].split(",")] for i in range(int(server["classes"]))
            ]
            self.assertTrue(all(len(row) == positions for row in counts))
            self.assertEqual([sum(col) for col in zip(*counts)], [5] * positions)

    def test_statistical_audit_csv(self):
        code, out, _ = run_cli("audit", "--k", "2", "--trials", "5", "--format", "csv", "--seed", "1")
        self.assertEqual(code, 0)
        rows = list(csv.DictReader(io.StringIO(out)))
        self.assertEqual({r["server"] for r in rows}, {"1", "2"})
        server1 = [r for r in rows if r["server"] == "1"]
        self.assertEqual(sum(int(r["count"]) for r in server1), 5 * 6)

    def test_rates_csv(self):
        code, out, _ = run_cli("rates", "--format", "csv", "--k-min", "1", "--k-max", "3")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertEqual(len(lines), 4)
        self.assertTrue(lines[0].startswith("scheme,N,K,q,L,Q,rate"))

    def test_rates_kv(self):
        code, out, _ = run_cli("rates", "--scheme", "general", "--n", "3", "--p", "3", "--k-min", "2", "--k-max", "2")
        self.assertEqual(code, 0)
        self.assertIn("rate = 11/16", out)

    def test_invalid_scheme_parameters(self):
        code, _, err = run_cli("rates", "--n", "3")
        self.assertEqual(code, 1)
        self.assertIn("binary scheme", err)

    def test_bench(self):
        code, out, _ = run_cli("bench", "--k", "2", "--s", "2", "--runs", "2")
        self.assertEqual(code, 0)
        sections = parse_sections(out)
        self.assertEqual(sections[""]["format"], "pfr-bench/1")
        self.assertEqual(sections[""]["Q_expected"], "12")
        self.assertEqual(sections["row.1"]["Q"], "12")

    def test_bench_csv(self):
        code, out, _ = run_cli("bench", "--format", "csv", "--k", "2", "--s", "2", "--runs", "3")
        self.assertEqual(code, 0)
        rows = list(csv.DictReader(io.StringIO(out)))
        self.assertEqual([r["run"] for r in rows], ["0", "1", "2"])
        self.assertTrue(all(r["Q"] == r["Q_expected"] == "12" for r in rows))

    def test_every_command_takes_seed(self):
        parser = build_parser()
        for argv in (
            ["gen-db", "--k", "1", "--l", "2", "--out", "x"],
            ["serve", "--db", "x"],
            ["retrieve", "--simulate", "--theta", "1"],
            ["audit", "--k", "1"],
            ["rates"],
            ["bench", "--k", "1"],
            ["mcp"],
        ):
            self.assertEqual(parser.parse_args(argv + ["--seed", "7"]).seed, 7, argv[0])
        self.assertIsNone(parser.parse_args(["rates"]).seed)
        code, out, _ = run_cli("rates", "--seed", "3", "--k-min", "2", "--k-max", "2")
        self.assertEqual(code, 0)
        self.assertIn("rate = 2/3", out)


if __name__ == "__main__":
    unittest.main()
