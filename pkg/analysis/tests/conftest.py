import shutil
import subprocess

import pytest

GEOFLOW = shutil.which("geoflow")


def run_geoflow(*argv):
    assert GEOFLOW is not None, "solver CLI not on PATH"
    return subprocess.run([GEOFLOW, *argv], capture_output=True, text=True)


@pytest.fixture(scope="session")
def selftest_dir(tmp_path_factory):
    """Convergence tables produced by the solver's own selftest subcommand."""
    out = tmp_path_factory.mktemp("selftest")
    proc = run_geoflow("selftest", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    return out


@pytest.fixture(scope="session")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    proc = run_geoflow("run", "--grid", "64", "--dt", "1e-3",
                       "--t-final", "0.05", "--diagnostics-every", "5",
                       "--snapshot-every", "25", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    return out


@pytest.fixture(scope="session")
def continuation_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("continuation")
    proc = run_geoflow("continuation", "--grid", "32", "--dt", "1e-3",
                       "--t-final", "0.05", "--epsilons", "1e-2,5e-3",
                       "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    return out
