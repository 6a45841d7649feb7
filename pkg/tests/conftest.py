import sys, pathlib
sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

import pytest

import ManifoldLens.patchio as pio
import ManifoldLens.synth as synth


@pytest.fixture
def synth_csv(tmp_path):
    """Write a synthetic patch to tmp_path/<name>.csv and return the path."""
    def make(name, **spec):
        path = tmp_path / f"{name}.csv"
        pio.write_patch(synth.sample(synth.SynthSpec(**spec)), path)
        return path
    return make


@pytest.fixture(autouse=True)
def _no_env_threads(monkeypatch):
    monkeypatch.delenv("CURV_THREADS", raising=False)
    monkeypatch.delenv("MANIFOLDLENS_LOG_DIR", raising=False)
