"""MCP tool functions called directly, with a collector standing in for FastMCP."""

import os
import tempfile
import unittest
from unittest.mock import MagicMock

from mcp_pfr import helpers, prompts, resources
from mcp_pfr.config import Settings
from mcp_pfr.errors import ValidationError
from mcp_pfr.helpers import Workspace
from mcp_pfr.tools import audit, database, rates, retrieval


class ToolCollector:
    def __init__(self):
        self.tools = {}
        self.prompts = {}
        self.resources = {}

    def tool(self):
        def decorator(fn):
            self.tools[fn.__name__] = fn
            return fn
        return decorator

    def prompt(self):
        def decorator(fn):
            self.prompts[fn.__name__] = fn
            return fn
        return decorator

    def resource(self, uri):
        def decorator(fn):
            self.resources[uri] = fn
            return fn
        return decorator


def make_tools(db_dir="."):
    collector = ToolCollector()
    for module in (database, retrieval, audit, rates):
        module.register(collector, helpers)
    ctx = MagicMock()
    ctx.request_context.lifespan_context = {"workspace": Workspace(Settings(db_dir=db_dir))}
    return collector.tools, ctx


class TestParseVector(unittest.TestCase):

    def test_commas(self):
        self.assertEqual(helpers.parse_vector("1,0,2", 3), (1, 0, 2))
        self.assertEqual(helpers.parse_vector("1,10", 16), (1, 10))
        self.assertEqual(helpers.parse_vector("11,0", 16), (11, 0))

    def test_bare_digits_only_for_small_fields(self):
        self.assertEqual(helpers.parse_vector("102", 3), (1, 0, 2))
        self.assertEqual(helpers.parse_vector("110", 16), (110,))

    def test_garbage(self):
        with self.assertRaises(ValidationError):
            helpers.parse_vector("1,x", 3)


class TestDatabaseTools(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.tools, self.ctx = make_tools(self.tmp.name)

    def test_generate_sized_for_scheme(self):
        out = self.tools["generate_database"](self.ctx, "w", K=2, S=3, p=3, scheme="general", N=3, seed=1)
        self.assertIn("K=2 L=132 S=3", out)
        self.assertIn("| w | GF(3) | 2 | 132 | 3 |", self.tools["list_databases"](self.ctx))

    def test_save_and_load_relative_to_db_dir(self):
        self.tools["generate_database"](self.ctx, "w", K=2, seed=1)
        self.assertIn("Saved 'w'", self.tools["save_database"](self.ctx, "w", "w.pfrd"))
        self.assertTrue(os.path.exists(os.path.join(self.tmp.name, "w.pfrd")))
        out = self.tools["load_database"](self.ctx, "copy", "w.pfrd")
        self.assertIn("K=2 L=8 S=1", out)

    def test_oracle(self):
        self.tools["generate_database"](self.ctx, "w", K=2, seed=1)
        by_theta = self.tools["oracle_function"](self.ctx, "w", theta=3)
        by_vector = self.tools["oracle_function"](self.ctx, "w", vector="11")
        self.assertEqual(by_theta, by_vector)
        self.assertIn("| layer | record |", by_theta)
        self.assertTrue(self.tools["oracle_function"](self.ctx, "w").startswith("ERROR:"))

    def test_oracle_vector_in_large_field(self):
        self.tools["generate_database"](self.ctx, "w", K=2, p=11, scheme="general", N=2, seed=1)
        self.assertIn("v = (1, 10)", self.tools["oracle_function"](self.ctx, "w", vector="1,10"))
        self.assertTrue(self.tools["oracle_function"](self.ctx, "w", vector="110").startswith("ERROR:"))

    def test_errors_are_strings(self):
        self.assertEqual(self.tools["list_databases"](self.ctx), "No databases loaded.")
        self.assertIn("no database named 'x'", self.tools["oracle_function"](self.ctx, "x", theta=1))
        self.assertTrue(self.tools["load_database"](self.ctx, "x", "missing.pfrd").startswith("ERROR:"))
        self.assertTrue(self.tools["generate_database"](self.ctx, "x", K=2, p=4).startswith("ERROR:"))


class TestRetrievalTools(unittest.TestCase):

    def setUp(self):
        self.tools, self.ctx = make_tools()

    def test_plan_general(self):
        out = self.tools["plan_retrieval"](self.ctx, K=2, theta=2, scheme="general", N=3, p=3)
        self.assertIn("L=132 layers, Q=192 downloads", out)
        self.assertIn("| 1 | 64 | 2 | 128 |", out)
        self.assertIn("rounds: 60 shifted + 4 parallel-class", out)

    def test_plan_binary(self):
        out = self.tools["plan_retrieval"](self.ctx, K=3, theta=5)
        self.assertIn("| 2 | 14 | 1 | 14 |", out)

    def test_private_retrieve(self):
        self.tools["generate_database"](self.ctx, "w", K=2, S=2, p=3, scheme="general", N=3, seed=1)
        out = self.tools["private_retrieve"](self.ctx, "w", theta=4, scheme="general", N=3, seed=2)
        self.assertIn("matches oracle", out)
        self.assertIn("Q=192 downloads", out)

    def test_private_retrieve_errors(self):
        self.tools["generate_database"](self.ctx, "w", K=2, seed=1)
        out = self.tools["private_retrieve"](self.ctx, "w", theta=9)
        self.assertTrue(out.startswith("ERROR:"))


class TestAuditAndRateTools(unittest.TestCase):

    def setUp(self):
        self.tools, self.ctx = make_tools()

    def test_audit_privacy(self):
        self.assertIn("PASS", self.tools["audit_privacy"](self.ctx, K=2))
        self.assertIn("FAIL", self.tools["audit_privacy"](self.ctx, K=2, mutation="drop_direct"))
        self.assertTrue(self.tools["audit_privacy"](self.ctx, K=2, mutation="nonsense").startswith("ERROR:"))

    def test_audit_statistics(self):
        out = self.tools["audit_statistics"](self.ctx, K=2, trials=30)
        self.assertIn("server 1: chi2=", out)

    def test_rate_tools(self):
        self.assertIn("R = L/Q = 11/16", self.tools["rate_report"](self.ctx, K=2, scheme="general", N=3, p=3))
        table = self.tools["rate_table"](self.ctx, k_min=1, k_max=2)
        self.assertIn("| 2 | 8 | 12 | 2/3 |", table)
        self.assertTrue(self.tools["rate_table"](self.ctx, format="csv").startswith("scheme,N,K"))
        out = self.tools["compare_baselines"](self.ctx, K=2)
        self.assertIn("binary capacity  2/3", out)
        self.assertIn("scheme beats PIR by 2/21", out)


class TestPromptsAndResources(unittest.TestCase):

    def setUp(self):
        self.collector = ToolCollector()
        prompts.register(self.collector)
        resources.register(self.collector)
        tools, _ = make_tools()
        self.tool_names = set(tools)

    def test_prompts_name_real_tools(self):
        self.assertEqual(set(self.collector.prompts), {"retrieve_function", "verify_privacy", "rate_study"})
        for name, fn in self.collector.prompts.items():
            text = fn()
            named = {word.strip("`") for word in text.split() if word.startswith("`")}
            self.assertTrue(named, name)
            self.assertTrue(named <= self.tool_names, (name, named - self.tool_names))

    def test_verify_privacy_picks_mutation(self):
        self.assertIn("drop_pairs", self.collector.prompts["verify_privacy"]())
        self.assertIn("skip_step3", self.collector.prompts["verify_privacy"](scheme="general", N="3", p="3"))

    def test_cookbook(self):
        text = self.collector.resources["pfr://cookbook"]()
        self.assertTrue(text.startswith("# PFR MCP Cookbook"))
        self.assertIn("PFR_DB_DIR", text)


if __name__ == "__main__":
    unittest.main()
