"""Shared fixtures and helpers for the test suite.

Dataset fixtures load the CSV files under data/. Two of the reference
datasets are not committed (see data/README.md); tests that need them
call require_dataset, which fails with a pointer to the README instead
of skipping, so the gaps stay visible in every run.

The acceptance tests in test_acceptance.py are summarized at the end of
the run with one PASS/FAIL line per criterion.
"""

import re
from pathlib import Path

import numpy as np
import pytest

from ccadjust.correlation import TwoBlockData
from ccadjust.ingest import load_dataset

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


def dataset_or_none(name):
    """Load data/<name>.csv with its block spec, or None when absent."""
    csv_path = DATA_DIR / ("%s.csv" % name)
    if not csv_path.exists():
        return None
    return load_dataset(str(csv_path), str(DATA_DIR / ("%s_spec.json" % name)))


def require_dataset(name):
    """A dataset that must be present for the calling test to pass.

    Missing fixtures are a hard failure, not a skip: the test corpus is
    incomplete until the file is transcribed per data/README.md.
    """
    data = dataset_or_none(name)
    if data is None:
        pytest.fail(
            "data/%s.csv is not committed; transcribe it from its public "
            "source as documented in data/README.md to complete this "
            "fixture-dependent check" % name,
            pytrace=False,
        )
    return data


@pytest.fixture(scope="session")
def psychology():
    data = dataset_or_none("psychology")
    assert data is not None, "data/psychology.csv is part of the repository"
    return data


def random_psd(rng, m, low=0.1, high=2.0):
    """Random symmetric PSD matrix with eigenvalues in [low, high]."""
    q, _ = np.linalg.qr(rng.normal(size=(m, m)))
    return q @ np.diag(rng.uniform(low, high, m)) @ q.T


def random_two_block(rng, n, p, q, noise=1.0):
    """Random two-block dataset whose blocks share linear structure."""
    x = rng.normal(size=(n, p))
    y = x @ rng.normal(size=(p, q)) + noise * rng.normal(size=(n, q))
    return TwoBlockData(
        x=x,
        y=y,
        x_names=["x%d" % (i + 1) for i in range(p)],
        y_names=["y%d" % (j + 1) for j in range(q)],
    )


def sign_align(reference, other):
    """Flip columns of other to correlate positively with reference."""
    other = np.array(other, dtype=float)
    for j in range(min(reference.shape[1], other.shape[1])):
        if float(reference[:, j] @ other[:, j]) < 0:
            other[:, j] = -other[:, j]
    return other


_ACCEPTANCE = {}


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    if "test_acceptance" in item.nodeid and report.when in ("setup", "call"):
        if _ACCEPTANCE.get(item.name, "passed") == "passed":
            _ACCEPTANCE[item.name] = report.outcome
    return report


def _criterion_line(name, outcome):
    m = re.match(r"test_(criterion_\d+)_(\w+)", name)
    label = "%s (%s)" % (m.group(1), m.group(2)) if m else name
    return "%s: %s" % (label, "PASS" if outcome == "passed" else "FAIL")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_criterion_line(name, _ACCEPTANCE[name]))
