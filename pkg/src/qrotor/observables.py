"""Diagnostics over momentum distributions and kick-by-kick series.

Covers the probability distribution and its moments, the inverse
participation ratio, plateau and power-of-two peak structure, diffusion-rate
fits, the IPR-departure time, and the closed-form time-scale predictors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rotor import Representation, RotatorParams, StateVector

IPR_DEPARTURE_RATIO = 1.5
TP_PREFACTOR = 0.33          # t_p ~ TP_PREFACTOR / (eps * n_q)^2
DIFFUSION_PREFACTOR = 5.0    # D_eps ~ DIFFUSION_PREFACTOR * eps^2 * N^2


@dataclass
class ProbabilityDistribution:
    """Weights W_n over signed momentum levels, ascending from -N/2."""

    levels: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.levels.shape != self.weights.shape:
            raise ValueError("levels and weights must have matching shapes")

    @property
    def N(self) -> int:
        return self.levels.size


@dataclass
class ObservableSeries:
    """Per-kick records of t, <n^2>, IPR and norm error for one run."""

    t: np.ndarray
    n2: np.ndarray
    ipr: np.ndarray
    norm_err: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.int64)
        self.n2 = np.asarray(self.n2, dtype=np.float64)
        self.ipr = np.asarray(self.ipr, dtype=np.float64)
        self.norm_err = np.asarray(self.norm_err, dtype=np.float64)
        if not (self.t.size == self.n2.size == self.ipr.size == self.norm_err.size):
            raise ValueError("series columns must have equal length")
        if self.t.size > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("t must be strictly increasing")
        for name in ("n2", "ipr", "norm_err"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite values in {name}")

    def __len__(self) -> int:
        return self.t.size


@dataclass(frozen=True)
class TimescalePrediction:
    """Closed-form characteristic scales for given parameters and epsilon."""

    t_q: float
    t_eps: float
    t_p_pred: float
    D_pred: float
    D_eps_pred: float
    D_eps_alt: float


def probabilities(state: StateVector) -> ProbabilityDistribution:
    """W_n = |psi_n|^2, reordered to ascending signed levels."""
    state.require(Representation.MOMENTUM)
    a = state.amplitudes
    W = a.real * a.real + a.imag * a.imag
    N = state.N
    return ProbabilityDistribution(
        levels=np.arange(-(N // 2), N // 2, dtype=np.int64),
        weights=np.roll(W, N // 2),
    )


def second_moment(dist: ProbabilityDistribution) -> float:
    """<n^2> = sum of n^2 W_n over signed levels."""
    lev = dist.levels.astype(np.float64)
    return float(dist.weights @ (lev * lev))


def ipr(dist: ProbabilityDistribution) -> float:
    """Inverse participation ratio 1 / sum W_n^2: effective level count."""
    s = float(dist.weights @ dist.weights)
    if s == 0.0:
        raise ValueError("IPR undefined for an all-zero distribution")
    return 1.0 / s


def _power_of_two_exclusion(dist: ProbabilityDistribution, pad: int = 1) -> np.ndarray:
    """Mask of levels within `pad` of any +-2^m, m = 1 .. n_q-1."""
    n_q = int(np.log2(dist.N))
    excl = np.zeros(dist.N, dtype=bool)
    absn = np.abs(dist.levels)
    for m in range(1, n_q):
        excl |= np.abs(absn - (1 << m)) <= pad
    return excl


def plateau_level(dist: ProbabilityDistribution) -> float:
    """Median weight over the outer half of momentum space, |n| in
    [N/4, N/2), with 3-level neighborhoods of each +-2^m excised.

    The median is robust against the power-of-two spikes riding on the
    noise-generated background floor.
    """
    N = dist.N
    absn = np.abs(dist.levels)
    window = (absn >= N // 4) & (absn < N // 2)
    window &= ~_power_of_two_exclusion(dist)
    if not window.any():
        raise ValueError("plateau window is empty (n_q too small)")
    return float(np.median(dist.weights[window]))


def detect_peaks(dist: ProbabilityDistribution, factor: float = 10.0,
                 half_window: int = 8) -> list[int]:
    """Signed levels whose weight exceeds `factor` times the median of the
    surrounding window [n-8, n+8] (center excluded, clipped at the edges)."""
    W = dist.weights
    N = dist.N
    peaks = []
    for i in range(N):
        lo = max(0, i - half_window)
        hi = min(N, i + half_window + 1)
        neighbors = np.concatenate((W[lo:i], W[i + 1:hi]))
        if W[i] > factor * np.median(neighbors):
            peaks.append(int(dist.levels[i]))
    return peaks


def detected_power_of_two_levels(dist: ProbabilityDistribution,
                                 peaks: list[int] | None = None,
                                 tolerance: int = 1) -> list[int]:
    """Which of the levels +-2^m (m = 1 .. n_q-1) carry a detected peak
    within `tolerance` levels (peaks broaden under the kick dynamics)."""
    if peaks is None:
        peaks = detect_peaks(dist)
    if not peaks:
        return []
    parr = np.asarray(sorted(peaks))
    n_q = int(np.log2(dist.N))
    found = []
    for m in range(1, n_q):
        for target in (1 << m, -(1 << m)):
            if target < -dist.N // 2 or target >= dist.N // 2:
                continue
            if np.min(np.abs(parr - target)) <= tolerance:
                found.append(target)
    return sorted(found)


def fit_diffusion(series: ObservableSeries, t_lo: float, t_hi: float,
                  bin_width: int) -> float:
    """Slope of <n^2> versus t from bin-averaged records in [t_lo, t_hi]."""
    if bin_width < 1:
        raise ValueError("bin width must be >= 1")
    if t_lo >= t_hi:
        raise ValueError(f"empty fit window [{t_lo}, {t_hi}]")
    sel = (series.t >= t_lo) & (series.t <= t_hi)
    t = series.t[sel].astype(np.float64)
    n2 = series.n2[sel]
    if t.size == 0:
        raise ValueError("no records in fit window")
    bins = ((t - t_lo) // bin_width).astype(np.int64)
    n_bins = int(bins.max()) + 1
    counts = np.bincount(bins, minlength=n_bins)
    used = counts > 0
    if used.sum() < 3:
        raise ValueError("need at least 3 populated bins for a slope fit")
    bt = np.bincount(bins, weights=t, minlength=n_bins)[used] / counts[used]
    bn = np.bincount(bins, weights=n2, minlength=n_bins)[used] / counts[used]
    return float(np.polyfit(bt, bn, 1)[0])


def detect_tp(noisy: ObservableSeries, clean: ObservableSeries,
              threshold: float = IPR_DEPARTURE_RATIO, hold: int = 10) -> int | None:
    """First kick count where IPR(noisy)/IPR(clean) reaches `threshold` and
    stays there for the next `hold` records; None if never.

    The hold requirement smooths over kick-to-kick IPR fluctuations.  The
    two series must share the record grid over their common range.
    """
    L = min(len(noisy), len(clean))
    if L == 0 or not np.array_equal(noisy.t[:L], clean.t[:L]):
        raise ValueError("record grids do not match")
    ratio = noisy.ipr[:L] / clean.ipr[:L]
    above = ratio >= threshold
    for i in range(L - hold):
        if above[i:i + hold + 1].all():
            return int(noisy.t[i])
    return None


def predict_timescales(params: RotatorParams, epsilon: float) -> TimescalePrediction:
    """Closed-form time scales and diffusion rates.

    t_q: kick count where imperfection diffusion overtakes the localized
    second moment, k^4 / (eps^2 n_q N^2); drops exponentially with n_q.
    t_eps: saturation of the diffusive growth at system size, 2/(n_q eps^2).
    t_p_pred: IPR departure from the noiseless value, 0.33/(eps n_q)^2;
    polynomial in n_q.  D_pred = k^2/2 is the chaotic diffusion rate and
    D_eps_pred = 5 eps^2 N^2 the imperfection-induced one (alternate
    normalization n_q eps^2 N^2 / 2 exposed as D_eps_alt).
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    N2 = float(params.N) ** 2
    D_pred = params.k ** 2 / 2.0
    if epsilon == 0.0:
        return TimescalePrediction(
            t_q=np.inf, t_eps=np.inf, t_p_pred=np.inf,
            D_pred=D_pred, D_eps_pred=0.0, D_eps_alt=0.0,
        )
    e2 = epsilon * epsilon
    return TimescalePrediction(
        t_q=params.k ** 4 / (e2 * params.n_q * N2),
        t_eps=2.0 / (params.n_q * e2),
        t_p_pred=TP_PREFACTOR / (epsilon * params.n_q) ** 2,
        D_pred=D_pred,
        D_eps_pred=DIFFUSION_PREFACTOR * e2 * N2,
        D_eps_alt=params.n_q * e2 * N2 / 2.0,
    )
