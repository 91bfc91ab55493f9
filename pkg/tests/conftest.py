"""Shared fixtures: toy tables, the stand-in cohort, and the real-file locator."""

import os
from pathlib import Path

import numpy as np
import pytest

from postop.dataset import AttributeSchema, Dataset, Instance, parse_arff

TESTS_DIR = Path(__file__).resolve().parent
REPO_DIR = TESTS_DIR.parent
COHORT_PATH = TESTS_DIR / "data" / "synthetic_cohort.arff"

THORACIC_FILE_ENV = "POSTOP_THORACIC_ARFF"
DATA_DIR_ENV = "POSTOP_DATA_DIR"


def thoracic_path() -> Path | None:
    """Locate the real clinical ARFF file, or None when unavailable."""
    env_file = os.environ.get(THORACIC_FILE_ENV)
    candidates = [Path(env_file)] if env_file else []
    for base in (os.environ.get(DATA_DIR_ENV), REPO_DIR / "data"):
        if base:
            base = Path(base)
            candidates += [base / "ThoraricSurgery.arff", base / "ThoracicSurgery.arff"]
    for c in candidates:
        if c.is_file():
            return c
    return None


@pytest.fixture(scope="session")
def cohort() -> Dataset:
    """The checked-in synthetic stand-in cohort (70 T / 400 F)."""
    return parse_arff(COHORT_PATH.read_text())


@pytest.fixture(scope="session")
def cohort_or_real() -> tuple[Dataset, str]:
    """The real clinical dataset when present, else the stand-in cohort."""
    path = thoracic_path()
    if path is not None:
        return parse_arff(path.read_text()), f"real file {path}"
    return parse_arff(COHORT_PATH.read_text()), "synthetic stand-in cohort"


def nominal_dataset(columns, class_column, domains=None, class_values=("c0", "c1")):
    """Build an all-nominal dataset from per-attribute value-index columns.

    columns: dict name -> list of value indexes. domains: dict name ->
    domain size (default: max index + 1).
    """
    domains = domains or {}
    schema = []
    names = list(columns)
    for name in names:
        size = domains.get(name, max(columns[name]) + 1)
        schema.append(AttributeSchema(name, "nominal", tuple(f"{name}v{i}" for i in range(size))))
    schema.append(AttributeSchema("cls", "nominal", tuple(class_values), role="class"))
    rows = []
    for i in range(len(class_column)):
        rows.append(Instance(tuple(columns[n][i] for n in names) + (class_column[i],)))
    return Dataset(schema, rows)


def fig_dataset() -> Dataset:
    """Ten rows over three nominal predictors whose tree is known by hand.

    The root must split on S1 (highest gain, passing the mean-gain filter
    despite a lower gain ratio than S2/S3), the v11 branch on S2, the v12
    branch on S3, and v13 is pure; the five leaves alternate class 1/0.
    """
    schema = [
        AttributeSchema("S1", "nominal", ("v11", "v12", "v13")),
        AttributeSchema("S2", "nominal", ("v21", "v22")),
        AttributeSchema("S3", "nominal", ("v31", "v32")),
        AttributeSchema("d", "nominal", ("1", "0"), role="class"),
    ]
    rows = [
        ("v11", "v21", "v31", "1"),
        ("v11", "v21", "v32", "1"),
        ("v11", "v22", "v31", "0"),
        ("v11", "v22", "v32", "0"),
        ("v12", "v21", "v31", "1"),
        ("v12", "v22", "v31", "1"),
        ("v12", "v21", "v32", "0"),
        ("v12", "v22", "v32", "0"),
        ("v13", "v21", "v31", "1"),
        ("v13", "v22", "v32", "1"),
    ]
    instances = [
        Instance(tuple(schema[i].values.index(tok) for i, tok in enumerate(row)))
        for row in rows
    ]
    return Dataset(schema, instances, relation="figure-tree")


def random_mixed_dataset(rng, n_rows, n_nominal=2, n_numeric=1, max_domain=3):
    """Random small mixed-type dataset with a binary class."""
    schema = []
    columns = []
    for a in range(n_nominal):
        size = int(rng.integers(2, max_domain + 1))
        schema.append(
            AttributeSchema(f"n{a}", "nominal", tuple(f"n{a}v{i}" for i in range(size)))
        )
        columns.append(rng.integers(0, size, size=n_rows).tolist())
    for a in range(n_numeric):
        schema.append(AttributeSchema(f"x{a}", "numeric"))
        # values from a small grid so ties and repeats occur
        columns.append((rng.integers(0, 6, size=n_rows) / 2.0).tolist())
    schema.append(AttributeSchema("cls", "nominal", ("c0", "c1"), role="class"))
    labels = rng.integers(0, 2, size=n_rows).tolist()
    rows = [
        Instance(tuple(col[i] for col in columns) + (labels[i],)) for i in range(n_rows)
    ]
    return Dataset(schema, rows)


# -- acceptance reporting -----------------------------------------------------

# one "[criterion NN] PASS/FAIL: ..." line per criterion, echoed after the
# run summary so they are visible without -s
CRITERION_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
