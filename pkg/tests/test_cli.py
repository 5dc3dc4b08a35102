import io
import math

import numpy as np
import pytest
from click.testing import CliRunner

from polarfec.cli import main
from polarfec.channels import discretize_awgn, write_channel
from polarfec.polar import read_bits, read_frozen_set
from polarfec.shortcodes import (CodeTable, LinearBlockCode,
                                 write_code_table)


@pytest.fixture
def runner():
    return CliRunner()


def small_table_file(tmp_path, M=4):
    zero = LinearBlockCode(np.zeros((0, 0), dtype=np.int8), M=M,
                           d=math.inf, m=0)
    rep = LinearBlockCode(np.ones((1, M), dtype=np.int8), d=M, m=1)
    full = LinearBlockCode(np.eye(M, dtype=np.int8), d=1, m=M)
    p = tmp_path / "table.txt"
    with open(p, "w") as fh:
        write_code_table(CodeTable([zero, rep, full]), fh)
    return str(p)


class TestConstruct:
    def test_prints_summary_and_writes_frozen(self, runner, tmp_path):
        fr = tmp_path / "fr.txt"
        res = runner.invoke(main, ["construct", "--channel", "bsc:0.06",
                                   "--n", "5", "--rate", "0.5",
                                   "--frozen-out", str(fr)])
        assert res.exit_code == 0, res.output
        assert res.output.startswith("N=32 K=16 channel=bsc(0.06) fer_bound=")
        spec = read_frozen_set(str(fr))
        assert spec.N == 32 and spec.K == 16

    def test_k_and_rate_exclusive(self, runner):
        res = runner.invoke(main, ["construct", "--channel", "bsc:0.06",
                                   "--n", "4", "--rate", "0.5", "--k", "8"])
        assert res.exit_code == 1
        assert "exactly one of --rate or --k" in res.output + str(res.stderr)

    def test_channel_file(self, runner, tmp_path):
        chf = tmp_path / "chan.txt"
        with open(chf, "w") as fh:
            write_channel(discretize_awgn(2.0, bins=16), fh)
        res = runner.invoke(main, ["construct", "--channel", str(chf),
                                   "--n", "3", "--k", "4"])
        assert res.exit_code == 0, res.output
        assert "N=8 K=4" in res.output

    def test_bad_channel_fails_cleanly(self, runner):
        res = runner.invoke(main, ["construct", "--channel", "bogus",
                                   "--n", "3", "--k", "4"])
        assert res.exit_code == 1
        assert "error:" in res.output + str(res.stderr)

    def test_custom_grid(self, runner):
        res = runner.invoke(main, ["construct", "--channel", "bsc:0.05",
                                   "--n", "3", "--k", "4",
                                   "--grid-a", "20", "--grid-q", "512"])
        assert res.exit_code == 0, res.output


class TestConstructConcat:
    def test_feasible_design(self, runner, tmp_path):
        table = small_table_file(tmp_path)
        out = tmp_path / "assign.txt"
        rep = tmp_path / "report.txt"
        res = runner.invoke(main, ["construct-concat", "--channel",
                                   "bsc:0.04", "--n", "2", "--k-target",
                                   "8", "--table", table,
                                   "--assignment-out", str(out),
                                   "--report-out", str(rep)])
        assert res.exit_code == 0, res.output
        assert "M=4 N=4 K=8" in res.output
        assert out.exists() and "total bound" in rep.read_text()

    def test_infeasible_distinct_error(self, runner, tmp_path):
        table = small_table_file(tmp_path)
        res = runner.invoke(main, ["construct-concat", "--channel",
                                   "bsc:0.04", "--n", "1", "--k-target",
                                   "3", "--table", table])
        assert res.exit_code == 1
        assert "infeasible" in res.output + str(res.stderr)


class TestSimulate:
    def _frozen(self, runner, tmp_path):
        fr = tmp_path / "fr.txt"
        runner.invoke(main, ["construct", "--channel", "bsc:0.06", "--n",
                             "5", "--rate", "0.5", "--frozen-out", str(fr)])
        return str(fr)

    def test_sweep_csv(self, runner, tmp_path):
        fr = self._frozen(runner, tmp_path)
        res = runner.invoke(main, ["simulate", "--channel", "bsc:0.06",
                                   "--sweep", "0.04,0.08", "--frozen", fr,
                                   "--trials", "500", "--seed", "3"])
        assert res.exit_code == 0, res.output
        lines = res.output.strip().splitlines()
        assert lines[0] == "param,trials,errors,fer,ci_radius,de_bound"
        assert len(lines) == 3
        assert lines[1].startswith("0.04,500,")
        assert lines[2].startswith("0.08,500,")

    def test_deterministic(self, runner, tmp_path):
        fr = self._frozen(runner, tmp_path)
        args = ["simulate", "--channel", "bsc:0.06", "--frozen", fr,
                "--trials", "400", "--seed", "9", "--shards", "2"]
        a = runner.invoke(main, args)
        b = runner.invoke(main, args)
        assert a.output == b.output and a.exit_code == 0

    def test_csv_out_file(self, runner, tmp_path):
        fr = self._frozen(runner, tmp_path)
        out = tmp_path / "res.csv"
        res = runner.invoke(main, ["simulate", "--channel", "bsc:0.05",
                                   "--frozen", fr, "--trials", "200",
                                   "--csv-out", str(out)])
        assert res.exit_code == 0
        assert out.read_text().startswith("param,")

    def test_concat_route(self, runner, tmp_path):
        table = small_table_file(tmp_path)
        assign = tmp_path / "assign.txt"
        runner.invoke(main, ["construct-concat", "--channel", "bsc:0.04",
                             "--n", "2", "--k-target", "8", "--table",
                             table, "--assignment-out", str(assign)])
        res = runner.invoke(main, ["simulate", "--channel", "bsc:0.04",
                                   "--assignment", str(assign), "--table",
                                   table, "--trials", "300"])
        assert res.exit_code == 0, res.output

    def test_needs_exactly_one_code(self, runner, tmp_path):
        res = runner.invoke(main, ["simulate", "--channel", "bsc:0.05",
                                   "--trials", "10"])
        assert res.exit_code == 1
        assert "exactly one of" in res.output + str(res.stderr)


class TestAnalyze:
    def test_polar_bound(self, runner, tmp_path):
        fr = tmp_path / "fr.txt"
        runner.invoke(main, ["construct", "--channel", "bsc:0.06", "--n",
                             "4", "--k", "8", "--frozen-out", str(fr)])
        res = runner.invoke(main, ["analyze", "--channel", "bsc:0.05",
                                   "--frozen", str(fr)])
        assert res.exit_code == 0, res.output
        assert res.output.startswith("channel=bsc(0.05) fer_bound=")


class TestEncodeDecode:
    def test_polar_roundtrip(self, runner, tmp_path):
        fr = tmp_path / "fr.txt"
        runner.invoke(main, ["construct", "--channel", "bsc:0.05", "--n",
                             "4", "--k", "8", "--frozen-out", str(fr)])
        info = tmp_path / "info.txt"
        info.write_text("10110100\n")
        cw = tmp_path / "cw.txt"
        res = runner.invoke(main, ["encode", "--frozen", str(fr), "--in",
                                   str(info), "--out", str(cw)])
        assert res.exit_code == 0, res.output
        bits = read_bits(str(cw))
        assert bits.size == 16
        llr = tmp_path / "llr.txt"
        llr.write_text(" ".join("5.0" if b == 0 else "-5.0" for b in bits))
        dec = tmp_path / "dec.txt"
        res = runner.invoke(main, ["decode", "--frozen", str(fr), "--in",
                                   str(llr), "--out", str(dec)])
        assert res.exit_code == 0, res.output
        spec = read_frozen_set(str(fr))
        u = read_bits(str(dec))
        mask = np.ones(16, dtype=bool)
        mask[spec.frozen] = False
        assert "".join(map(str, u[mask])) == "10110100"

    def test_concat_roundtrip(self, runner, tmp_path):
        table = small_table_file(tmp_path)
        assign = tmp_path / "assign.txt"
        assign.write_text("3\n3\n")     # two identity columns, K=8
        info = tmp_path / "info.txt"
        info.write_text("11001010\n")
        cw = tmp_path / "cw.txt"
        res = runner.invoke(main, ["encode", "--assignment", str(assign),
                                   "--table", table, "--in", str(info),
                                   "--out", str(cw)])
        assert res.exit_code == 0, res.output
        bits = read_bits(str(cw))
        assert bits.size == 8
        llr = tmp_path / "llr.txt"
        llr.write_text(" ".join("6.0" if b == 0 else "-6.0" for b in bits))
        dec = tmp_path / "dec.txt"
        res = runner.invoke(main, ["decode", "--assignment", str(assign),
                                   "--table", table, "--in", str(llr),
                                   "--out", str(dec)])
        assert res.exit_code == 0, res.output
        assert read_bits(str(dec)).size == 8

    def test_llr_count_checked(self, runner, tmp_path):
        fr = tmp_path / "fr.txt"
        runner.invoke(main, ["construct", "--channel", "bsc:0.05", "--n",
                             "3", "--k", "4", "--frozen-out", str(fr)])
        llr = tmp_path / "llr.txt"
        llr.write_text("1.0 2.0\n")
        res = runner.invoke(main, ["decode", "--frozen", str(fr), "--in",
                                   str(llr), "--out",
                                   str(tmp_path / "x.txt")])
        assert res.exit_code == 1
        assert "expected 8 LLRs" in res.output + str(res.stderr)


class TestVerifyCodes:
    def test_small_table_passes(self, runner, tmp_path):
        table = small_table_file(tmp_path)
        res = runner.invoke(main, ["verify-codes", table])
        assert res.exit_code == 0, res.output
        assert "3/3 pass" in res.output
        assert "K= 0 d=inf m=0: ok" in res.output

    def test_corrupted_table_fails(self, runner, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("1 3 1\n1111\n")   # declares d=3, code is [4,1,4]
        res = runner.invoke(main, ["verify-codes", str(p)])
        assert res.exit_code == 1
        assert "declares" in res.output + str(res.stderr)
