import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sloanegap.classes import ClassFlags
from sloanegap.gap import GapParams, classify
from sloanegap.ingest import load_stripped

FIXTURE_DIR = Path(__file__).parent / "fixtures"
STRIPPED = FIXTURE_DIR / "stripped_1000.txt"


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def fixture_table():
    table, stats = load_stripped(STRIPPED, n_max=10000)
    assert stats.sequences_parsed == 997
    return table


@pytest.fixture(scope="session")
def fixture_partition(fixture_table):
    return classify(fixture_table, GapParams())


@pytest.fixture(scope="session")
def study_flags():
    return ClassFlags.compute((301, 10000))
