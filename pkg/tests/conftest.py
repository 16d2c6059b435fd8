import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20250809)


def random_density(rng, dim):
    """Random full-rank density matrix via a Wishart construction."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng, dim, scale=1.0):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (g + g.conj().T) / 2.0


def partial_trace_by_summation(rho, keep, n_qubits):
    """Index-summation partial trace, independent of the library routine."""
    out = np.zeros((2, 2), dtype=complex)
    shift = n_qubits - 1 - keep
    rest_bits = n_qubits - 1
    for a in (0, 1):
        for b in (0, 1):
            total = 0.0
            for rest in range(1 << rest_bits):
                # splice the kept qubit's bit into position `keep`
                high = rest >> shift
                low = rest & ((1 << shift) - 1)
                i = (high << (shift + 1)) | (a << shift) | low
                j = (high << (shift + 1)) | (b << shift) | low
                total += rho[i, j]
            out[a, b] = total
    return out
