import csv
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from gaarch.model import GaarchParams

# wall-clock deadlines are meaningless on a shared single core
settings.register_profile("gaarch", deadline=None)
settings.load_profile("gaarch")

DATA_DIR = Path(__file__).parent / "data"

# annualized %, as printed in the published size table
ALL_FUNDS = dict(
    alpha=16.05,
    gamma_comp=-7.80,
    sigma0=5.30,
    eta_minus=0.26,
    eta_plus=0.03,
    beta=0.70,
    nu_minus=15.24,
    nu_plus=16.95,
)


def _cell(text: str) -> float:
    # a bare "." is a coefficient estimated at its zero boundary; "200." is the cap
    return 0.0 if text.strip() == "." else float(text)


def published_rows() -> list[dict]:
    with (DATA_DIR / "published_estimates.csv").open(newline="") as fh:
        rows = []
        for rec in csv.DictReader(fh):
            row = {"group": rec.pop("group"), "label": rec.pop("label")}
            row.update({k: _cell(v) for k, v in rec.items()})
            rows.append(row)
    return rows


@pytest.fixture(scope="session")
def all_funds() -> GaarchParams:
    return GaarchParams.from_annualized(**ALL_FUNDS)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    name = marker.args[0]
    status = "PASS" if call.excinfo is None else "FAIL"
    detail = getattr(item, "acceptance_detail", "")
    ACCEPTANCE_LINES[name] = f"{status}  {name}" + (f"  ({detail})" if detail else "")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES.values():
        terminalreporter.write_line(line)
