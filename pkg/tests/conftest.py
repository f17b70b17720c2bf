import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fairaudit.dataset import ColumnSpec, from_records


def lending_schema():
    return [
        ColumnSpec("citizenship", "binary", "protected", positive="domestic"),
        ColumnSpec("income", "numeric", "feature"),
        ColumnSpec("repaid", "binary", "target", positive="yes"),
    ]


def make_table(groups, y, income=None, extra=None):
    """Small lending-style table from parallel value lists."""
    n = len(groups)
    if income is None:
        income = [float(10 + i) for i in range(n)]
    records = []
    for i in range(n):
        rec = {
            "citizenship": "domestic" if groups[i] == 1 else "foreign",
            "income": income[i],
            "repaid": "yes" if y[i] == 1 else "no",
        }
        if extra:
            for name, vals in extra.items():
                rec[name] = vals[i]
        records.append(rec)
    schema = lending_schema()
    if extra:
        for name in extra:
            schema.insert(2, ColumnSpec(name, "numeric", "feature"))
    return from_records(schema, records)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
