"""Quantum-Fourier-transform gate backend with per-gate random imperfections.

The transform is decomposed into one-qubit mixing gates (A, ideally the
Hadamard), two-qubit controlled phases (B, ideal angle pi/2^d for bit
distance d) and a terminal bit-order reversal.  Every A or B application
draws fresh random errors: the A axis is tilted away from (1,0,1)/sqrt(2)
by a polar angle uniform in [0, b] with uniform azimuth, and the B angle
gets an additive error uniform in [-b, +b], where b = pi * epsilon is the
gate-error bound (see GATE_ERROR_SCALE).  The reversal is an exact index
relabeling and carries no noise.

Executed noiselessly the plan equals the orthonormal DFT with kernel
e^{+2 pi i a b / N} on raw indices, i.e. the momentum -> angle direction of
:func:`qrotor.rotor.exact_transform`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .rotor import (
    MAX_QUBITS,
    MIN_QUBITS,
    Representation,
    RotatorParams,
    StateError,
    StateVector,
    apply_kick_phase,
    apply_rotation_phase,
)


class QftDirection(Enum):
    FORWARD = "forward"    # momentum -> angle, kernel e^{+2 pi i a b / N}
    INVERSE = "inverse"    # angle -> momentum, conjugate plan in reverse


# Per-gate random angles are drawn with amplitude pi*epsilon (epsilon in
# half-turns).  This normalization makes the measured imperfection-induced
# diffusion follow D_eps ~ 5 eps^2 N^2 and the IPR departure time follow
# t_p ~ 0.33/(eps n_q)^2, the constants all presets and predictors use; with
# plain radians both come out a factor pi^2 off.
GATE_ERROR_SCALE = math.pi


@dataclass
class NoiseModel:
    """Imperfection amplitude plus a seeded stream of uniform draws.

    ``epsilon`` is the public imperfection amplitude; individual gate-error
    angles are bounded by ``pi * epsilon`` radians (see GATE_ERROR_SCALE).
    Draws are consumed in gate-execution order, one gate at a time (two
    uniforms per A gate, one per B gate), so a run is bit-reproducible from
    (seed, gate order) alone.  ``draw_counter`` counts values consumed.
    """

    epsilon: float
    seed: int = 0
    draw_counter: int = field(default=0, init=False)

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        self._rng = np.random.default_rng(self.seed)

    @property
    def gate_error_bound(self) -> float:
        """Bound on any single sampled error angle, in radians."""
        return GATE_ERROR_SCALE * self.epsilon

    def take(self, n: int) -> np.ndarray:
        """Next n uniforms in [0, 1)."""
        self.draw_counter += n
        return self._rng.random(n)


def _bit_reversal_pairs(n_q: int) -> tuple[np.ndarray, np.ndarray]:
    N = 1 << n_q
    idx = np.arange(N, dtype=np.int64)
    rev = np.zeros(N, dtype=np.int64)
    for b in range(n_q):
        rev |= ((idx >> b) & 1) << (n_q - 1 - b)
    mask = idx < rev
    return idx[mask], rev[mask]


@dataclass(eq=False)
class GatePlan:
    """Ordered elementary-gate decomposition of the size-2^n_q transform.

    ``gates`` lists descriptors ("A", target), ("B", control, target, angle)
    and a final ("reverse",); the parallel arrays drive the compiled
    executor.  Plans are immutable in use and safe to share across runs.
    """

    n_q: int
    gates: tuple
    kinds: np.ndarray
    targets: np.ndarray
    controls: np.ndarray
    thetas: np.ndarray
    rev_lo: np.ndarray
    rev_hi: np.ndarray
    n_draws: int
    kernel_sign: int

    @property
    def n_gates(self) -> int:
        return len(self.gates)


def _kernel_sign_probe(kinds, targets, controls, thetas, n_q: int) -> int:
    """Sign s such that the noiseless plan has kernel e^{s 2 pi i a b / N}.

    Probed on a delta state at index 1: the ideal output is
    N^{-1/2} e^{s 2 pi i l / N}, so the first Fourier component fixes s.
    The convention is structural (independent of n_q), so the probe size is
    capped to keep plan construction cheap.
    """
    rev_lo, rev_hi = _bit_reversal_pairs(n_q)
    amps = np.zeros(1 << n_q, dtype=np.complex128)
    amps[1] = 1.0
    no_noise = np.zeros(2 * len(kinds), dtype=np.float64)
    _kernels.execute_plan(amps, kinds, targets, controls, thetas,
                          rev_lo, rev_hi, no_noise, 0.0, False)
    N = 1 << n_q
    l = np.arange(N)
    plus = np.exp(2j * np.pi * l / N) / math.sqrt(N)
    if np.max(np.abs(amps - plus)) < 1e-9:
        return +1
    if np.max(np.abs(amps - plus.conj())) < 1e-9:
        return -1
    raise AssertionError("gate plan does not realize a DFT of either sign")


def _plan_parts(n_q: int):
    """Gate descriptors and executor arrays for the canonical decomposition."""
    gates: list[tuple] = []
    kinds: list[int] = []
    targets: list[int] = []
    controls: list[int] = []
    thetas: list[float] = []
    n_draws = 0
    for j in range(n_q - 1, -1, -1):
        gates.append(("A", j))
        kinds.append(_kernels.KIND_A)
        targets.append(j)
        controls.append(-1)
        thetas.append(0.0)
        n_draws += 2
        for k in range(j - 1, -1, -1):
            angle = math.pi / (1 << (j - k))
            gates.append(("B", j, k, angle))
            kinds.append(_kernels.KIND_B)
            # compiled kernel wants the low bit first; B is (j,k)-symmetric
            controls.append(k)
            targets.append(j)
            thetas.append(angle)
            n_draws += 1
    gates.append(("reverse",))
    return (tuple(gates), np.asarray(kinds, dtype=np.int8),
            np.asarray(targets, dtype=np.int8),
            np.asarray(controls, dtype=np.int8),
            np.asarray(thetas, dtype=np.float64), n_draws)


def build_qft_plan(n_q: int) -> GatePlan:
    """Canonical plan: per qubit (most significant first) an A gate followed
    by controlled phases pi/2^d to each less significant qubit at bit
    distance d, then one terminal bit-order reversal."""
    if not MIN_QUBITS <= n_q <= MAX_QUBITS:
        raise ValueError(f"n_q must be in [{MIN_QUBITS}, {MAX_QUBITS}], got {n_q}")
    gates, kinds, targets, controls, thetas, n_draws = _plan_parts(n_q)
    # The sign convention is structural, so probe it on a capped size built
    # by the same routine rather than paying a full-size plan application.
    probe_nq = min(n_q, 8)
    _, pk, pt, pc, pth, _ = _plan_parts(probe_nq)
    sign = _kernel_sign_probe(pk, pt, pc, pth, probe_nq)
    rev_lo, rev_hi = _bit_reversal_pairs(n_q)
    return GatePlan(n_q=n_q, gates=gates, kinds=kinds,
                    targets=targets, controls=controls, thetas=thetas,
                    rev_lo=rev_lo, rev_hi=rev_hi, n_draws=n_draws,
                    kernel_sign=sign)


def sample_A_gate(noise: NoiseModel) -> np.ndarray:
    """One-qubit mixing gate n.sigma with the axis tilted by a random error.

    The polar tilt is uniform in [0, pi*eps] with uniform azimuth.  At
    epsilon = 0 this is exactly the Hadamard matrix; any sample is Hermitian,
    unitary and involutory.
    """
    u = noise.take(2)
    nx, ny, nz = _kernels.a_gate_axis(noise.gate_error_bound, u[0], u[1])
    return np.array([[nz, nx - 1j * ny], [nx + 1j * ny, -nz]], dtype=np.complex128)


def sample_B_angle(theta_ideal: float, noise: NoiseModel) -> float:
    """Controlled-phase angle with additive error uniform in [-b, +b],
    b = pi*eps."""
    u = noise.take(1)
    return theta_ideal + noise.gate_error_bound * (2.0 * u[0] - 1.0)


def apply_single_qubit_gate(state: StateVector, j: int, U: np.ndarray) -> StateVector:
    """Combine amplitude pairs across bit j of the index by the 2x2 matrix U."""
    if not 0 <= j < state.n_q:
        raise ValueError(f"qubit index {j} out of range for n_q={state.n_q}")
    U = np.asarray(U, dtype=np.complex128)
    _kernels.apply_1q(state.amplitudes, j, U[0, 0], U[0, 1], U[1, 0], U[1, 1])
    return state


def apply_controlled_phase(state: StateVector, j: int, k: int, theta: float) -> StateVector:
    """Multiply by e^{i theta} every amplitude whose bits j and k are both set."""
    if j == k:
        raise ValueError("control and target qubits must differ")
    for q in (j, k):
        if not 0 <= q < state.n_q:
            raise ValueError(f"qubit index {q} out of range for n_q={state.n_q}")
    phase = complex(math.cos(theta), math.sin(theta))
    _kernels.apply_cphase(state.amplitudes, min(j, k), max(j, k), phase)
    return state


def noisy_qft(state: StateVector, plan: GatePlan, noise: NoiseModel,
              direction: QftDirection) -> StateVector:
    """Execute the plan with fresh per-gate errors; flips the representation.

    Forward runs the plan in order; inverse runs conjugated gates in reverse
    order with its own independent errors.  At epsilon = 0 forward followed
    by inverse is the identity.
    """
    if state.n_q != plan.n_q:
        raise StateError(f"state has n_q={state.n_q}, plan has n_q={plan.n_q}")
    u = noise.take(plan.n_draws)
    _kernels.execute_plan_staged(state.amplitudes.view(np.float64), plan.n_q,
                                 plan.rev_lo, plan.rev_hi, u,
                                 noise.gate_error_bound,
                                 direction is QftDirection.INVERSE)
    state.representation = (Representation.ANGLE
                            if state.representation is Representation.MOMENTUM
                            else Representation.MOMENTUM)
    return state


def step_gates(state: StateVector, params: RotatorParams, plan: GatePlan,
               noise: NoiseModel) -> StateVector:
    """One kick with the representation changes done by the noisy gate QFT.

    The two diagonal factors are applied exactly; imperfections live only in
    the transform circuit.
    """
    apply_rotation_phase(state, params)
    noisy_qft(state, plan, noise, QftDirection.FORWARD)
    apply_kick_phase(state, params)
    noisy_qft(state, plan, noise, QftDirection.INVERSE)
    return state
