"""Shared factory for synthetic run CSVs in the simulator's schema."""

import numpy as np
import pytest

from plotviz.runcsv import CSV_COLUMNS


@pytest.fixture
def write_run(tmp_path):
    """Factory writing a full-schema run CSV; returns its path.

    Unset columns are zero.  `e_p`, `p`, `r` fill the per-axis error,
    position, and reference triples; any header name can be set
    directly via keyword (e.g. K_hat=..., d_hat=...).
    """

    def _write(name, t, e_p=None, p=None, r=None, **cols):
        t = np.asarray(t, dtype=float)
        n = t.shape[0]
        table = {col: np.zeros(n) for col in CSV_COLUMNS}
        table["t"] = t
        for triple, names in ((e_p, ("ex", "ey", "ez")),
                              (p, ("px", "py", "pz")),
                              (r, ("rx", "ry", "rz"))):
            if triple is not None:
                triple = np.asarray(triple, dtype=float)
                for i, col in enumerate(names):
                    table[col] = triple[:, i]
        for col, values in cols.items():
            assert col in CSV_COLUMNS, col
            table[col] = np.asarray(values, dtype=float)
        path = tmp_path / name
        with open(path, "w") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for k in range(n):
                fh.write(",".join(f"{table[col][k]:.9g}"
                                  for col in CSV_COLUMNS) + "\n")
        return path

    return _write
