"""Kicked-rotator core: wavefunction container, the two diagonal evolution
factors, and the exact FFT-based map step.

One period of the evolution applies ``exp(-i k cos(theta))`` after
``exp(-i T n^2 / 2)``, switching between momentum and angle representations
with a unitary Fourier transform.  Momentum indices wrap: array index ``i``
holds the signed level ``n = i`` for ``i < N/2`` and ``n = i - N`` otherwise,
so the transform acts on raw indices while phases use the signed value.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from enum import Enum

import numpy as np

TWO_PI = 2.0 * np.pi

MIN_QUBITS = 2
MAX_QUBITS = 24  # 2^24 complex amplitudes ~ 268 MB, the workstation ceiling


class StateError(Exception):
    """State is in the wrong representation or has mismatched dimensions."""


class Representation(Enum):
    MOMENTUM = "momentum"
    ANGLE = "angle"


class TransformDirection(Enum):
    TO_ANGLE = "to_angle"
    TO_MOMENTUM = "to_momentum"


def signed_levels(n_q: int) -> np.ndarray:
    """Signed momentum level for each raw array index: [0..N/2-1, -N/2..-1]."""
    N = 1 << n_q
    return ((np.arange(N, dtype=np.int64) + N // 2) % N) - N // 2


@dataclass(frozen=True)
class RotatorParams:
    """Physical constants of the map: kick strength k, period T, qubit count.

    The chaos parameter is derived, K = k*T, so the invariant T*k == K holds
    bit-exactly.  Use :meth:`from_chaos_parameter` to build from (k, K).
    """

    k: float
    T: float
    n_q: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"kick strength must be >= 0, got {self.k}")
        if self.T < 0:
            raise ValueError(f"period must be >= 0, got {self.T}")
        if not MIN_QUBITS <= self.n_q <= MAX_QUBITS:
            raise ValueError(
                f"n_q must be in [{MIN_QUBITS}, {MAX_QUBITS}], got {self.n_q}"
            )

    @classmethod
    def from_chaos_parameter(cls, k: float, K: float, n_q: int) -> "RotatorParams":
        """Build from kick strength and chaos parameter K; T = K/k."""
        if k <= 0:
            raise ValueError("k must be > 0 to derive the period from K")
        return cls(k=k, T=K / k, n_q=n_q)

    @property
    def K(self) -> float:
        return self.k * self.T

    @property
    def N(self) -> int:
        return 1 << self.n_q

    def in_quantum_chaos_regime(self) -> bool:
        """Whether k > K > 1, the regime all the diffusion presets assume."""
        return self.k > self.K > 1.0


@dataclass
class StateVector:
    """N = 2^n_q complex amplitudes in momentum or angle representation.

    Operations mutate ``amplitudes`` in place and return the same object;
    independent states are safe to evolve on separate threads.
    """

    amplitudes: np.ndarray
    representation: Representation
    n_q: int

    def __post_init__(self):
        if not MIN_QUBITS <= self.n_q <= MAX_QUBITS:
            raise ValueError(f"n_q out of range: {self.n_q}")
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_q,):
            raise ValueError(
                f"expected {1 << self.n_q} amplitudes, got {self.amplitudes.shape}"
            )

    @property
    def N(self) -> int:
        return 1 << self.n_q

    def norm_sq(self) -> float:
        a = self.amplitudes
        return float(np.sum(a.real * a.real + a.imag * a.imag))

    def norm_error(self) -> float:
        return abs(self.norm_sq() - 1.0)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.representation, self.n_q)

    def require(self, rep: Representation) -> None:
        if self.representation is not rep:
            raise StateError(
                f"operation requires {rep.value} representation, "
                f"state is in {self.representation.value}"
            )


def init_delta_state(params: RotatorParams, n0: int) -> StateVector:
    """All probability on the single momentum level n0."""
    N = params.N
    if not -N // 2 <= n0 < N // 2:
        raise ValueError(f"n0={n0} outside [-{N // 2}, {N // 2})")
    amps = np.zeros(N, dtype=np.complex128)
    amps[n0 % N] = 1.0
    return StateVector(amps, Representation.MOMENTUM, params.n_q)


@functools.lru_cache(maxsize=32)
def _rotation_table(n_q: int, T: float) -> np.ndarray:
    # exp(-i T n^2 / 2).  n^2 reaches 2^46 at n_q=24; squaring in int64 and
    # reducing the angle mod 2*pi in extended precision keeps the phase honest.
    n = signed_levels(n_q)
    ang = np.mod(np.longdouble(0.5 * T) * (n.astype(np.longdouble) ** 2),
                 np.longdouble(TWO_PI)).astype(np.float64)
    return np.exp(-1j * ang)


@functools.lru_cache(maxsize=32)
def _kick_table(n_q: int, k: float) -> np.ndarray:
    # exp(-i k cos(theta_l)), theta_l = 2*pi*l/N
    N = 1 << n_q
    theta = TWO_PI * np.arange(N) / N
    return np.exp(-1j * k * np.cos(theta))


def apply_rotation_phase(state: StateVector, params: RotatorParams) -> StateVector:
    """Free-rotation factor: psi_n *= exp(-i T n^2 / 2) on signed n."""
    state.require(Representation.MOMENTUM)
    state.amplitudes *= _rotation_table(params.n_q, params.T)
    return state


def apply_kick_phase(state: StateVector, params: RotatorParams) -> StateVector:
    """Kick factor: psi(theta_l) *= exp(-i k cos(theta_l))."""
    state.require(Representation.ANGLE)
    state.amplitudes *= _kick_table(params.n_q, params.k)
    return state


def exact_transform(state: StateVector, direction: TransformDirection) -> StateVector:
    """Unitary switch between momentum and angle representations.

    ToAngle applies psi(theta_l) = N^{-1/2} sum_n psi_n e^{+i n theta_l};
    on raw indices that is the orthonormal inverse DFT, so the round trip is
    the identity to machine precision.
    """
    if direction is TransformDirection.TO_ANGLE:
        state.require(Representation.MOMENTUM)
        state.amplitudes = np.fft.ifft(state.amplitudes, norm="ortho")
        state.representation = Representation.ANGLE
    elif direction is TransformDirection.TO_MOMENTUM:
        state.require(Representation.ANGLE)
        state.amplitudes = np.fft.fft(state.amplitudes, norm="ortho")
        state.representation = Representation.MOMENTUM
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return state


def step_exact(state: StateVector, params: RotatorParams) -> StateVector:
    """One kick of the map with exact (FFT) representation changes."""
    apply_rotation_phase(state, params)
    exact_transform(state, TransformDirection.TO_ANGLE)
    apply_kick_phase(state, params)
    exact_transform(state, TransformDirection.TO_MOMENTUM)
    return state
