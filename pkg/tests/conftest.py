"""Shared oracles and helpers.

The oracles are deliberately independent of the library's transform and
gate kernels: explicit O(N^2) DFT summation, dense kronecker products and
dense diagonal matrices, so they can arbitrate the fast paths.
"""

from __future__ import annotations

import numpy as np
import pytest

from qrotor import Representation, StateVector, signed_levels


def brute_force_dft_matrix(n_q: int, sign: int = +1) -> np.ndarray:
    """Orthonormal DFT matrix with kernel e^{sign * 2 pi i a b / N}."""
    N = 1 << n_q
    a = np.arange(N)
    return np.exp(sign * 2j * np.pi * np.outer(a, a) / N) / np.sqrt(N)


def random_momentum_state(n_q: int, seed: int) -> StateVector:
    rng = np.random.default_rng(seed)
    N = 1 << n_q
    amps = rng.normal(size=N) + 1j * rng.normal(size=N)
    amps /= np.linalg.norm(amps)
    return StateVector(amps, Representation.MOMENTUM, n_q)


def random_unitary_2x2(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def dense_one_qubit_operator(U2: np.ndarray, j: int, n_q: int) -> np.ndarray:
    """Kronecker-product embedding of a 2x2 matrix acting on bit j."""
    return np.kron(np.kron(np.eye(1 << (n_q - 1 - j)), U2), np.eye(1 << j))


def dense_one_kick_operator(params) -> np.ndarray:
    """Dense one-kick unitary: F^dag D_kick F D_rot on raw indices, where
    F is the orthonormal DFT with kernel e^{+2 pi i a b / N}."""
    N = params.N
    n = signed_levels(params.n_q).astype(np.float64)
    d_rot = np.exp(-1j * params.T * n * n / 2.0)
    theta = 2.0 * np.pi * np.arange(N) / N
    d_kick = np.exp(-1j * params.k * np.cos(theta))
    F = brute_force_dft_matrix(params.n_q, +1)
    return F.conj().T @ np.diag(d_kick) @ F @ np.diag(d_rot)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
