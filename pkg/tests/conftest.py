import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lsdiv import PoissonFamily


@pytest.fixture(scope="session")
def family() -> PoissonFamily:
    return PoissonFamily()
