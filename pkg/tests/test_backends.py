import numpy as np
import pytest

from nlcavity import DensityMatrix, build_kerr, build_tpa
from nlcavity._backend import available_backends, backend_name
from nlcavity.master import drift_matrix, jump_operators

BACKENDS = available_backends()

needs_compiled = pytest.mark.skipif(
    "compiled" not in BACKENDS, reason="compiled extension not built"
)


def _setup(model):
    return drift_matrix(model), jump_operators(model), DensityMatrix.vacuum(model.sig).mat


@needs_compiled
@pytest.mark.parametrize(
    "model",
    [
        build_kerr(0.0, -20.0, 0.5, 0.0, 10, 10.0),
        build_tpa(0.0, 0.5, 0.0, 40.0, 10.0, 16),
    ],
    ids=["kerr", "tpa"],
)
def test_rk45_parity(model):
    g, cs, rho0 = _setup(model)
    tg = np.linspace(0.0, 0.5, 51)
    out = {}
    for name, mod in BACKENDS.items():
        states, info = mod.propagate_rk45(g, cs, rho0, tg, 1e-8, 1e-10)
        out[name] = (states, info)
    s_py, i_py = out["python"]
    s_c, i_c = out["compiled"]
    assert np.abs(s_py - s_c).max() < 1e-9
    # same controller: step counts agree closely
    assert abs(i_py["n_steps"] - i_c["n_steps"]) <= max(3, i_py["n_steps"] // 100)


@needs_compiled
def test_rk4_parity_bitwise_scale():
    model = build_kerr(0.0, -5.0, 0.5, 0.0, 8, 2.0)
    g, cs, rho0 = _setup(model)
    tg = np.linspace(0.0, 0.5, 11)
    s_py, _ = BACKENDS["python"].propagate_rk4(g, cs, rho0, tg, 1e-3)
    s_c, _ = BACKENDS["compiled"].propagate_rk4(g, cs, rho0, tg, 1e-3)
    assert np.abs(s_py - s_c).max() < 1e-12


@needs_compiled
def test_zero_channel_model():
    # pure Hamiltonian evolution (no jump operators)
    model = build_kerr(1.0, -2.0, 0.0, 0.0, 6, 0.0)
    g, cs, rho0 = _setup(model)
    assert cs.shape[0] == 0
    tg = np.linspace(0.0, 1.0, 11)
    for mod in BACKENDS.values():
        states, _ = mod.propagate_rk45(g, cs, rho0, tg, 1e-10, 1e-12)
        assert abs(np.trace(states[-1]) - 1.0) < 1e-10


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_step_underflow_raises(name):
    from nlcavity.errors import NumericalError

    model = build_kerr(0.0, -5.0, 0.5, 0.0, 6, 1.0)
    g, cs, rho0 = _setup(model)
    # a sub-epsilon output interval cannot be reached by any valid step
    grid = np.array([0.0, 1e-18, 1.0])
    with pytest.raises(NumericalError, match="underflow"):
        BACKENDS[name].propagate_rk45(g, cs, rho0, grid, 1e-8, 1e-10)


def test_backend_name_reported():
    assert backend_name() in BACKENDS


def test_python_backend_always_available():
    assert "python" in BACKENDS
