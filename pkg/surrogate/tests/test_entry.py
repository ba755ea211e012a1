import subprocess
import sys


def run_module(*args):
    return subprocess.run(
        [sys.executable, "-m", "cdrsurrogate", *args], capture_output=True, text=True
    )


def test_no_command_prints_usage_and_fails():
    proc = run_module()
    assert proc.returncode == 2
    assert "usage" in proc.stdout


def test_help_exits_zero():
    proc = run_module("--help")
    assert proc.returncode == 0
    assert "train" in proc.stdout and "analyze" in proc.stdout


def test_unknown_command_rejected():
    proc = run_module("frobnicate")
    assert proc.returncode == 2
    assert "unknown command" in proc.stderr


def test_missing_file_reported_cleanly():
    proc = run_module("train", "--data", "/nonexistent.cdr", "--out", "/tmp/x")
    assert proc.returncode == 2
    assert "error:" in proc.stderr
