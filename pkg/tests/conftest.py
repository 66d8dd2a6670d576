"""Shared fixtures and the acceptance-suite summary printer."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

import lutnn

MNIST_DIR = Path(__file__).resolve().parent.parent / "data" / "mnist"

# criterion id -> (outcome, detail line), filled while acceptance tests run
_ACCEPTANCE_RESULTS: dict[str, list[str]] = {}
_ACCEPTANCE_NOTES: dict[str, list[str]] = {}


def note_acceptance(crit: str, detail: str) -> None:
    """Attach a human-readable detail line to an acceptance criterion."""
    parts = _ACCEPTANCE_NOTES.setdefault(crit, [])
    if detail not in parts:
        parts.append(detail)


@pytest.fixture(scope="session")
def mnist_train() -> lutnn.Dataset:
    images = MNIST_DIR / "train-images-idx3-ubyte.gz"
    labels = MNIST_DIR / "train-labels-idx1-ubyte.gz"
    if not (images.exists() and labels.exists()):
        pytest.skip(f"mnist archives not present under {MNIST_DIR}")
    return lutnn.load_idx(images, labels, name="mnist")


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(20260816))


def _criterion_of(nodeid: str) -> str | None:
    if "test_acceptance.py::test_c" not in nodeid:
        return None
    tail = nodeid.split("::test_c", 1)[1]
    digits = tail[:2]
    return digits if digits.isdigit() else None


def pytest_runtest_logreport(report):
    crit = _criterion_of(report.nodeid)
    if crit is None:
        return
    if report.when == "call":
        _ACCEPTANCE_RESULTS.setdefault(crit, []).append(report.outcome)
    elif report.when == "setup" and report.outcome in ("skipped", "failed"):
        _ACCEPTANCE_RESULTS.setdefault(crit, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE_RESULTS):
        outcomes = _ACCEPTANCE_RESULTS[crit]
        if all(o == "passed" for o in outcomes):
            status = "PASS"
        elif any(o == "failed" for o in outcomes):
            status = "FAIL"
        else:
            status = "SKIP"
        detail = "; ".join(_ACCEPTANCE_NOTES.get(crit, []))
        tr.write_line(f"criterion {crit} {status:<4} {detail}")
