import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bsdcert.curve import CurveModel  # noqa: E402
from bsdcert.io import fixture_path, parse_curve_file  # noqa: E402

DATA = Path(__file__).parent / "data"


def load_expectations():
    out = {}
    for line in (DATA / "cm_rank1_expectations.txt").read_text().splitlines():
        line = line.split("#", 1)[0].split()
        if line:
            out[line[0]] = (int(line[1]), int(line[2]))
    return out


FIXTURES = {r.label: r for r in parse_curve_file(fixture_path())}
EXPECTED_INDEX = load_expectations()

# Two classical non-CM curves used for rank-0 and non-CM paths.
C11A1 = CurveModel(0, -1, 1, -10, -20)
C37A1 = CurveModel(0, 0, 1, -1, 0)


@pytest.fixture(scope="session")
def fixtures():
    return FIXTURES


@pytest.fixture(params=sorted(FIXTURES), scope="session")
def fixture_record(request):
    return FIXTURES[request.param]


# -- acceptance reporting ------------------------------------------------------------

ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, text, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {status} - {text}" + (f" ({detail})" if detail else ""))
