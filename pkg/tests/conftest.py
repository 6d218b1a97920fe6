import pytest

from optomem.config import preset
from optomem.runner import simulate


@pytest.fixture(scope="session")
def fig2_result():
    """Replication-timeline run: combined mode, N=30, full snapshot list."""
    return simulate(preset("fig2-combined"))


@pytest.fixture(scope="session")
def fig4_result():
    """Two-mode reference run: N=10x10, storage in the mechanical mode."""
    return simulate(preset("fig4"))
