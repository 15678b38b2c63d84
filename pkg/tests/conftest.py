from pathlib import Path

import numpy as np
import pytest

from goa_osfs.data import Dataset, load_csv

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def wdbc():
    return load_csv(DATA / "wdbc.csv", label_column="diagnosis")


def make_dataset(values, labels, name="toy"):
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    m = int(labels.max()) + 1
    return Dataset(values, labels, m, tuple(f"f{j}" for j in range(values.shape[1])),
                   tuple(str(c) for c in range(m)), name=name)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
