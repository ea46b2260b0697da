"""Wiki search-promotion attack and defense toolkit."""

from ._core import *  # noqa: F401,F403
from ._core import stage_names


def run_all(run_dir, config=""):
    """Run every pipeline stage in order."""
    from ._core import run_stages

    run_stages(stage_names(), str(run_dir), config)
