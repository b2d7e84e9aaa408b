import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from depstrat.forest import ForestParams, split_dataset, train_forest  # noqa: E402
from depstrat.synthetic import planted_features  # noqa: E402

_criteria: dict[str, tuple[str, str]] = {}


class PlantedRun:
    def __init__(self, seed: int = 0, n: int = 2000, n_trees: int = 500):
        t0 = time.perf_counter()
        self.table = planted_features(n, seed=seed)
        self.split = split_dataset(self.table.labels, seed)
        labels = self.table.labels
        self.X_train = self.table.X[self.split.train_indices]
        self.y_train = [labels[i] for i in self.split.train_indices]
        self.X_test = self.table.X[self.split.test_indices]
        self.y_test = [labels[i] for i in self.split.test_indices]
        self.model = train_forest(self.X_train, self.y_train, ForestParams(n_trees=n_trees), seed,
                                  feature_names=self.table.feature_names)
        self.proba = self.model.predict_proba(self.X_test)
        self.seconds = time.perf_counter() - t0


@pytest.fixture(scope="session")
def planted():
    """Desk-scale planted-signal table with a 500-tree forest, trained once per session."""
    return PlantedRun()


def pytest_runtest_logreport(report):
    name = report.nodeid.split("::")[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
        _criteria[name] = (outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        outcome, detail = _criteria[name]
        label = name.removeprefix("test_criterion_")
        terminalreporter.write_line(f"{outcome} criterion {label}" + (f": {detail}" if detail else ""))
