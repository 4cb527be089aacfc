import json
from pathlib import Path

import pytest

from cqa.cli import main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCheck:
    def test_inconsistent_example(self, capsys):
        code, out, _ = run(capsys, "check",
                           "--instance", DATA / "ex1_instance.txt",
                           "--ics", DATA / "fd.txt")
        assert code == 1
        assert "status: inconsistent" in out
        assert "violations: 2" in out
        assert "- {P(a,b,c), P(a,c,d)} [c1]" in out

    def test_consistent_example(self, capsys):
        code, out, _ = run(capsys, "check",
                           "--instance", DATA / "d2_instance.txt",
                           "--ics", DATA / "fd.txt")
        assert code == 0
        assert "status: consistent" in out

    def test_jsonl_mirrors_text(self, capsys):
        code, out, _ = run(capsys, "check", "--format", "jsonl",
                           "--instance", DATA / "ex1_instance.txt",
                           "--ics", DATA / "fd.txt")
        records = [json.loads(line) for line in out.splitlines()]
        assert records[0] == {"status": "inconsistent", "violations": 2}
        assert len(records) == 3

    def test_missing_file_is_error(self, capsys):
        code, _, err = run(capsys, "check",
                           "--instance", DATA / "nope.txt",
                           "--ics", DATA / "fd.txt")
        assert code == 2
        assert "error:" in err

    def test_parse_error_reports_position(self, capsys, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("P(a,\n")
        code, _, err = run(capsys, "check", "--instance", bad,
                           "--ics", DATA / "fd.txt")
        assert code == 2
        assert "line 1" in err


class TestRepairs:
    def test_c_semantics_block(self, capsys):
        code, out, _ = run(capsys, "repairs", "--semantics", "C",
                           "--instance", DATA / "ex1_instance.txt",
                           "--ics", DATA / "fd.txt")
        assert code == 0
        assert "repairs: 1" in out
        assert "retained: P(a,c,d), P(a,c,e)" in out
        assert "deleted: P(a,b,c)" in out
        assert "distance: 1" in out

    def test_s_semantics_two_blocks(self, capsys):
        code, out, _ = run(capsys, "repairs", "--semantics", "S",
                           "--instance", DATA / "ex1_instance.txt",
                           "--ics", DATA / "fd.txt")
        assert code == 0
        assert "repairs: 2" in out

    def test_consistent_single_block(self, capsys):
        code, out, _ = run(capsys, "repairs", "--semantics", "C",
                           "--instance", DATA / "d2_instance.txt",
                           "--ics", DATA / "fd.txt")
        assert code == 0
        assert "repairs: 1" in out and "distance: 0" in out

    def test_a_semantics(self, capsys, tmp_path):
        cands = tmp_path / "candidates.txt"
        cands.write_text("b\nc\n")
        code, out, _ = run(capsys, "repairs", "--semantics", "A",
                           "--candidates", cands,
                           "--instance", DATA / "ex1_instance.txt",
                           "--ics", DATA / "fd.txt")
        assert code == 0
        assert "change P(a,b,c) attr 1 -> c" in out
        assert "cost: 1" in out

    def test_deterministic_output(self, capsys):
        _, first, _ = run(capsys, "repairs", "--semantics", "S",
                          "--instance", DATA / "ex1_instance.txt",
                          "--ics", DATA / "fd.txt")
        _, second, _ = run(capsys, "repairs", "--semantics", "S",
                           "--instance", DATA / "ex1_instance.txt",
                           "--ics", DATA / "fd.txt")
        assert first == second


class TestAnswer:
    def test_open_query_certain_c(self, capsys):
        code, out, _ = run(capsys, "answer", "--semantics", "C",
                           "--mode", "certain",
                           "--instance", DATA / "ex1_instance.txt",
                           "--ics", DATA / "fd.txt",
                           "--query", DATA / "q_open.txt")
        assert code == 0
        assert "(a,c,d)" in out and "(a,c,e)" in out

    def test_open_query_certain_s_empty(self, capsys):
        code, out, _ = run(capsys, "answer", "--semantics", "S",
                           "--mode", "certain",
                           "--instance", DATA / "ex1_instance.txt",
                           "--ics", DATA / "fd.txt",
                           "--query", DATA / "q_open.txt")
        assert code == 1
        assert "(a,c,d)" not in out

    def test_ground_yes_exit0(self, capsys):
        code, out, _ = run(capsys, "answer",
                           "--instance", DATA / "d2_instance.txt",
                           "--ics", DATA / "fd.txt",
                           "--query", DATA / "q_acd.txt")
        assert code == 0
        assert "yes" in out

    def test_updates_certain_no(self, capsys):
        code, out, _ = run(capsys, "answer", "--semantics", "C",
                           "--instance", DATA / "dprime_instance.txt",
                           "--ics", DATA / "fd.txt",
                           "--query", DATA / "q_acd.txt",
                           "--updates", DATA / "insert_afd.txt")
        assert code == 1
        assert "no" in out

    def test_updates_inconsistent_base_needs_force(self, capsys):
        code, _, err = run(capsys, "answer",
                           "--instance", DATA / "ex1_instance.txt",
                           "--ics", DATA / "fd.txt",
                           "--query", DATA / "q_acd.txt",
                           "--updates", DATA / "insert_afd.txt")
        assert code == 2 and "force" in err
        code2, out, _ = run(capsys, "answer", "--force",
                            "--instance", DATA / "ex1_instance.txt",
                            "--ics", DATA / "fd.txt",
                            "--query", DATA / "q_acd.txt",
                            "--updates", DATA / "insert_afd.txt")
        assert code2 in (0, 1)
        assert out


class TestIncremental:
    def test_certain_and_possible_modes(self, capsys):
        base_args = ("incremental",
                     "--base", DATA / "dprime_instance.txt",
                     "--ics", DATA / "fd.txt",
                     "--updates", DATA / "insert_afd.txt",
                     "--query", DATA / "q_acd.txt",
                     "--semantics", "C")
        code, out, _ = run(capsys, *base_args, "--mode", "certain")
        assert code == 1 and "no" in out
        code, out, _ = run(capsys, *base_args, "--mode", "possible")
        assert code == 0 and "yes" in out

    def test_star_s_semantics(self, capsys):
        code, out, _ = run(capsys, "incremental",
                           "--base", DATA / "star_base.txt",
                           "--ics", DATA / "star_ics.txt",
                           "--updates", DATA / "insert_hub.txt",
                           "--query", DATA / "q_r1.txt",
                           "--semantics", "S", "--mode", "certain")
        assert code == 1
        code, out, _ = run(capsys, "incremental",
                           "--base", DATA / "star_base.txt",
                           "--ics", DATA / "star_ics.txt",
                           "--updates", DATA / "insert_hub.txt",
                           "--query", DATA / "q_r1.txt",
                           "--semantics", "C", "--mode", "certain")
        assert code == 0

    def test_jsonl_answer(self, capsys):
        code, out, _ = run(capsys, "incremental", "--format", "jsonl",
                           "--base", DATA / "star_base.txt",
                           "--ics", DATA / "star_ics.txt",
                           "--updates", DATA / "insert_hub.txt",
                           "--query", DATA / "q_r1.txt",
                           "--semantics", "C", "--mode", "certain")
        rec = json.loads(out.splitlines()[0])
        assert rec["answer"] is True and rec["mode"] == "certain"


class TestGadget:
    def test_twin_adds_vertex(self, capsys, tmp_path):
        out_file = tmp_path / "twin.graph"
        code, _, _ = run(capsys, "gadget", "twin",
                         "--graph", DATA / "path3.graph", "--v", "0",
                         "-o", out_file)
        assert code == 0
        lines = out_file.read_text().splitlines()
        assert lines[0] == "4"
        assert "1 3" in lines  # twin attached to 0's neighbor

    def test_block_marker(self, capsys, tmp_path):
        out_file = tmp_path / "block.graph"
        code, _, _ = run(capsys, "gadget", "block",
                         "--graph", DATA / "path3.graph", "--k", "2",
                         "-o", out_file)
        assert code == 0
        text = out_file.read_text()
        assert "t 11" in text and "b 12" in text

    def test_encode_round_trips_through_repairs(self, capsys, tmp_path):
        inst_file = tmp_path / "encoded.txt"
        ics_file = tmp_path / "encoded_ics.txt"
        code, _, _ = run(capsys, "gadget", "encode",
                         "--graph", DATA / "path3.graph",
                         "--instance-out", inst_file, "--ics-out", ics_file)
        assert code == 0
        code, out, _ = run(capsys, "repairs", "--semantics", "C",
                           "--instance", inst_file, "--ics", ics_file)
        assert code == 0
        assert "repairs: 1" in out
        assert "Vertex(0)" in out and "Vertex(2)" in out

    def test_emitted_graph_reparses_equal(self, capsys, tmp_path):
        out_file = tmp_path / "rhombus.graph"
        run(capsys, "gadget", "rhombus",
            "--graph", DATA / "path3.graph", "--v", "1", "-o", out_file)
        from cqa.gadgets import parse_graph_text, rhombus_extension, SimpleGraph
        parsed, _ = parse_graph_text(out_file.read_text())
        assert parsed == rhombus_extension(SimpleGraph.build(3, [(0, 1), (1, 2)]), 1)


class TestBench:
    def test_tiny_run_writes_outputs(self, capsys, tmp_path):
        csv_file = tmp_path / "bench.csv"
        fig_file = tmp_path / "bench.png"
        code, out, _ = run(capsys, "bench", "--sizes", "50,100",
                           "--m", "2", "--repeats", "1",
                           "--csv", csv_file, "--figure", fig_file)
        assert code in (0, 1)  # tiny sizes are overhead-dominated
        assert csv_file.exists() and fig_file.exists()
        header = csv_file.read_text().splitlines()[0]
        assert header == "n,m,seconds,answer"
        assert fig_file.stat().st_size > 0
