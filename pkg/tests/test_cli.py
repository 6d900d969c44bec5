"""
Tests for the mpst command line
"""

import json

import pytest
from click.testing import CliRunner
from src.cli.main import cli


@pytest.fixture
def runner():
    return CliRunner()


def test_check_accepted(runner, corpus_path):
    """Test check prints the derivation of an accepted session"""
    result = runner.invoke(cli, ["check", corpus_path("social_media.mps"), "--set", "Users"])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "accepted for {u1, u2} (standard)"
    assert lines[1].startswith("  Out: ")


def test_check_default_set_rejected(runner, corpus_path):
    """Test the default set is every active participant"""
    result = runner.invoke(cli, ["check", corpus_path("social_media.mps")])
    assert result.exit_code == 1
    assert result.output.startswith("rejected for {s, u1, u2}")
    assert "PlayersLeak at !go / !stop" in result.output


def test_check_json(runner, corpus_path):
    """Test the JSON report"""
    path = corpus_path("social_media.mps")
    result = runner.invoke(cli, ["check", path, "-g", "G", "-s", "SocialMedia", "--set", "u1,u2", "--json"])
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["format"] == "mpst-run/1"
    assert report["exit_code"] == 0
    assert report["inputs"]["file"] == path
    assert report["derivation"]["validated"] is True


def test_check_mode(runner, corpus_path):
    """Test --mode"""
    path = corpus_path("unread.mps")
    assert runner.invoke(cli, ["check", path, "--set", "-"]).exit_code == 0
    assert runner.invoke(cli, ["check", path, "--set", "-", "--mode", "empty-queue-cycle"]).exit_code == 1
    assert runner.invoke(cli, ["check", path, "--set", "PQ", "--mode", "lock-only"]).exit_code == 0


def test_check_unknown_global(runner, corpus_path):
    """Test resolution errors exit with 2"""
    result = runner.invoke(cli, ["check", corpus_path("social_media.mps"), "-g", "Nope"])
    assert result.exit_code == 2
    assert "error: no global type named 'Nope'" in result.output


def test_parse_error_file(runner, tmp_path):
    """Test syntax errors exit with 2 and give the position"""
    source = tmp_path / "broken.mps"
    source.write_text("process P = q!a\nglobal G = p -> ! a\n", encoding="utf-8")
    result = runner.invoke(cli, ["check", str(source)])
    assert result.exit_code == 2
    assert "syntax error at 2:" in result.output


def test_missing_file(runner):
    """Test a missing file is a usage error"""
    assert runner.invoke(cli, ["check", "no-such-file.mps"]).exit_code == 2


def test_analyze(runner, corpus_path):
    """Test analyze prints depths, boundedness and weights"""
    result = runner.invoke(cli, ["analyze", corpus_path("boundedness.mps"), "-q", "Pending"])
    assert result.exit_code == 0
    assert result.output.startswith("global G")
    assert "bounded: no, witness (Gp, r)" in result.output
    assert "p->q:lam1  inf" in result.output
    assert "{p, q, r}-soundness: not sound, p->q:lam1 is never read" in result.output


def test_simulate_trace(runner, corpus_path):
    """Test replaying the stop trace"""
    result = runner.invoke(cli, ["simulate", corpus_path("social_media.mps"),
                                 "--trace", corpus_path("social_media_stop.trace")])
    assert result.exit_code == 0
    assert result.output.splitlines()[-1] == "final: s[S] || [] (stuck)"


def test_simulate_random_deterministic(runner, corpus_path):
    """Test equal seeds give equal output"""
    args = ["simulate", corpus_path("social_media.mps"), "--random", "8", "--seed", "3", "--json"]
    first, second = runner.invoke(cli, args), runner.invoke(cli, args)
    assert first.exit_code == 0
    assert first.output == second.output
    assert json.loads(first.output)["simulation"]["seed"] == 3


def test_verify_exit_codes(runner, corpus_path):
    """Test Holds, Violated and HoldsWithinBounds"""
    path = corpus_path("small.mps")
    assert runner.invoke(cli, ["verify", path, "-s", "PingPong"]).exit_code == 0
    orphan = runner.invoke(cli, ["verify", path, "-s", "Orphaned", "-p", "omf"])
    assert orphan.exit_code == 1
    assert orphan.output.startswith("omf for {p, q}: Violated")
    assert "witness trace: p>q!lam" in orphan.output
    flood = runner.invoke(cli, ["verify", path, "-s", "Flooding", "--depth", "10", "--queue-bound", "1"])
    assert flood.exit_code == 3


def test_verify_json(runner, corpus_path):
    """Test the verdict JSON"""
    result = runner.invoke(cli, ["verify", corpus_path("social_media.mps"), "--set", "s",
                                 "--depth", "40", "--queue-bound", "2", "--json"])
    assert result.exit_code == 1
    verdict = json.loads(result.output)["verdict"]
    assert verdict["status"] == "Violated"
    assert verdict["bounds"] == {"max_trace_len": 40, "max_queue_per_channel": 2}


def test_schema(runner):
    """Test printing a report schema"""
    result = runner.invoke(cli, ["schema", "verdict"])
    assert result.exit_code == 0
    assert "status" in json.loads(result.output)["properties"]


def test_schema_unknown(runner):
    """Test unknown schema names are refused"""
    assert runner.invoke(cli, ["schema", "nothing"]).exit_code == 2
