import pathlib
import subprocess
import sys

import numpy as np
import pytest

from geoflow_analysis import octonion

FIXTURE = pathlib.Path(__file__).resolve().parents[2] / "src" / "geoflow" / "data" / "octonion_table.json"


def test_fixture_regenerates_bit_identically():
    table = octonion.cross_product_table()
    octonion.verify_table(table)
    assert octonion.table_json(table) == FIXTURE.read_text()


def test_basis_products():
    table = octonion.cross_product_table()
    assert table[0][1] == 3        # e1 x e2 = +e3
    assert table[0][3] == 5        # e1 x e4 = +e5
    assert all(table[i][i] == 0 for i in range(7))


def test_antisymmetry():
    table = octonion.cross_product_table()
    for i in range(7):
        for j in range(7):
            assert table[i][j] == -table[j][i]


def test_octonion_norm_multiplicativity():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x, y = rng.standard_normal((2, 8))
        prod = octonion.oct_mul(x, y)
        assert np.isclose(np.linalg.norm(prod),
                          np.linalg.norm(x) * np.linalg.norm(y), rtol=1e-12)


def test_cli_check_against_fixture(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "geoflow_analysis.octonion",
         "--out", str(tmp_path / "table.json"),
         "--check-against", str(FIXTURE)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert (tmp_path / "table.json").read_bytes() == FIXTURE.read_bytes()


def test_cli_detects_mismatch(tmp_path):
    corrupted = tmp_path / "bad.json"
    corrupted.write_text(FIXTURE.read_text().replace('"dim": 7', '"dim": 8'))
    proc = subprocess.run(
        [sys.executable, "-m", "geoflow_analysis.octonion",
         "--check-against", str(corrupted)],
        capture_output=True, text=True)
    assert proc.returncode == 1
