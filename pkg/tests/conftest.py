import os

# Pin BLAS threads before numpy loads: the integrator's many small
# matrix products run faster without thread handoff.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import pytest

from nlcavity.config import bundled_figure, parse_config
from nlcavity.runner import run


@pytest.fixture(scope="session")
def bundled_runs(tmp_path_factory):
    """Run bundled figure configs once per session, on demand.

    Returns a getter: name -> (manifest, output directory).
    """
    root = tmp_path_factory.mktemp("figure-runs")
    cache = {}

    def get(name):
        if name not in cache:
            cfg = parse_config(str(bundled_figure(name)))
            out = root / name
            cache[name] = (run(cfg, out), out)
        return cache[name]

    return get
