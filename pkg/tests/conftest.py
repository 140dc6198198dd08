from pathlib import Path

import pytest

from tailboot.distributions import EmpiricalBody

BODY_FILE = Path(__file__).resolve().parents[1] / "src" / "tailboot" / "data" / "substitute_body.txt"


@pytest.fixture(scope="session")
def body():
    return EmpiricalBody.from_file(BODY_FILE)
