"""Octonion multiplication and the seven-dimensional cross product table.

Generates the signed index table used by the solver's six-sphere almost
complex structure.  The table is derived from scratch via the
Cayley-Dickson doubling of the quaternions, so it is an independent check
of the checked-in fixture: regeneration must be bit-identical.
"""

from __future__ import annotations

import argparse
import json
import pathlib

import numpy as np

# Quaternion basis products: QUAT_MUL[i][j] = signed index of e_i * e_j,
# with indices 0..3 for (1, i, j, k) and sign encoded as +-(idx + 1).
_QUAT_SIGNED = [
    [+1, +2, +3, +4],
    [+2, -1, +4, -3],
    [+3, -4, -1, +2],
    [+4, +3, -2, -1],
]


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(4)
    for i in range(4):
        if a[i] == 0:
            continue
        for j in range(4):
            if b[j] == 0:
                continue
            s = _QUAT_SIGNED[i][j]
            out[abs(s) - 1] += np.sign(s) * a[i] * b[j]
    return out


def quat_conj(a: np.ndarray) -> np.ndarray:
    return np.array([a[0], -a[1], -a[2], -a[3]])


def oct_mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cayley-Dickson product of two octonions given as 8-vectors (a, b)."""
    a, b = x[:4], x[4:]
    c, d = y[:4], y[4:]
    # (a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))
    first = quat_mul(a, c) - quat_mul(quat_conj(d), b)
    second = quat_mul(d, a) + quat_mul(b, quat_conj(c))
    return np.concatenate([first, second])


def cross_product_table() -> list[list[int]]:
    """7x7 signed-index table T with e_i x e_j = sign(T[i][j]) * e_|T[i][j]|.

    Indices are 1-based over the imaginary units e_1..e_7; 0 marks a zero
    product.  The cross product is x X y = (xy - yx) / 2 on imaginary
    octonions.
    """
    basis = np.eye(8)
    table = []
    for i in range(1, 8):
        row = []
        for j in range(1, 8):
            prod = 0.5 * (oct_mul(basis[i], basis[j]) - oct_mul(basis[j], basis[i]))
            assert abs(prod[0]) < 1e-14, "cross product must be imaginary"
            nz = np.nonzero(np.abs(prod[1:]) > 1e-14)[0]
            if len(nz) == 0:
                row.append(0)
            else:
                assert len(nz) == 1
                k = int(nz[0])
                row.append(int(np.sign(prod[1 + k])) * (k + 1))
        table.append(row)
    return table


def verify_table(table: list[list[int]]) -> None:
    """Check total antisymmetry, vanishing diagonal and unit products."""
    for i in range(7):
        assert table[i][i] == 0
        for j in range(7):
            if i == j:
                continue
            assert table[i][j] == -table[j][i], (i, j)
            assert 1 <= abs(table[i][j]) <= 7, (i, j)
            # |e_i x e_j| = 1 for orthonormal i != j
            assert abs(table[i][j]) not in (i + 1, j + 1)


def table_json(table: list[list[int]]) -> str:
    payload = {
        "basis": "imaginary octonion units e1..e7 (Cayley-Dickson over quaternions)",
        "dim": 7,
        "encoding": "entry s at (i, j) means e_i x e_j = sign(s) * e_|s|; 0 means zero",
        "table": table,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description="Generate the 7-D cross product table")
    ap.add_argument("--out", type=pathlib.Path, default=None)
    ap.add_argument("--check-against", type=pathlib.Path, default=None,
                    help="existing fixture that must match bit-for-bit")
    args = ap.parse_args(argv)
    if args.out is None and args.check_against is None:
        ap.error("provide --out and/or --check-against")

    table = cross_product_table()
    verify_table(table)
    text = table_json(table)
    if args.check_against is not None:
        existing = args.check_against.read_text()
        if existing != text:
            print("fixture mismatch: regenerated table differs")
            return 1
        print("fixture matches regenerated table")
    if args.out is not None:
        args.out.write_text(text)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
