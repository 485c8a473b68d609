import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cellless_wpt import generate_realization, load_scenario
from cellless_wpt.topology import default_scenario_path


@pytest.fixture(scope="session")
def default_topology():
    return load_scenario(default_scenario_path())


@pytest.fixture(scope="session")
def default_realization(default_topology):
    return generate_realization(default_topology, 42)
