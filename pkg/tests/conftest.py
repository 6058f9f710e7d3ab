import numpy as np
import pytest

from accessorctl.model import AccessorSpec, ControlModel, CouplingTensor, SystemSpec

SEC4_ROWS = ["yx", "yy", "yz", "zx", "zy", "zz"]
SEC4_COLS = [(1, 0), (2, 0), (1, 1), (2, 1), (1, -1), (2, -1)]


def two_level_model(omega_s=1.0, omega_a=1.3):
    # g_xx = g_yy = g_zz = 1; sigma_y is -y_1 in the Chevalley convention
    coupling = CouplingTensor({("x", 1, 1): 1, ("y", 1, -1): -1, ("z", 1, 0): 1})
    return ControlModel(SystemSpec((omega_s, -omega_s)), AccessorSpec((omega_a,)), coupling)


def sec4_model(freqs=(1.0, 1.3), c1=0.7):
    coupling = CouplingTensor({(w, j, k): 1 for w, (j, k) in zip(SEC4_ROWS, SEC4_COLS)})
    return ControlModel(SystemSpec((1, 0, -1)), AccessorSpec(freqs, (c1,)), coupling)


def pauli_coupling(g):
    """Tensor for sum_ab g[a][b] sigma_a (x) sigma_b at N = 2 (sigma_y = -y_1)."""
    out = CouplingTensor()
    for a, (k, sign) in {"x": (1, 1), "y": (-1, -1), "z": (0, 1)}.items():
        for b in "xyz":
            if g[a][b]:
                out.add(b, 1, k, sign * g[a][b])
    return out


def random_skew(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    a = a - a.conj().T
    return a - np.trace(a) / d * np.eye(d)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def two_level():
    return two_level_model()


@pytest.fixture(scope="session")
def sec4():
    return sec4_model()
