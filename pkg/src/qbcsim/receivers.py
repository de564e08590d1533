"""Decision procedures for the heterodyne, parametric-amplifier, and SFG receivers.

The heterodyne receiver averages complex envelope samples and picks the nearest
constellation point.  The PA receiver thresholds the phase-sensitive
cross-correlation statistic O = a_I a_R + a_I^dag a_R^dag averaged over the M
mode pairs.  The SFG receiver is simulated at the photon-bookkeeping level: the
return-idler correlation is converted cycle by cycle into a coherent amplitude
read out by photon counting, after a two-mode squeeze nulls one hypothesis.
"""

from __future__ import annotations

import cmath
import enum
import functools
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .gaussian import (
    mean_photon_number,
    phase_sensitive_correlation,
)
from .link import Alphabet, AlphabetKind, ChannelParams, Symbol, apply_channel


class UnsupportedAlphabetError(ValueError):
    """Raised when a receiver cannot operate on the requested alphabet."""


class ReceiverKind(enum.Enum):
    HETERODYNE = "heterodyne"
    PA = "pa"
    SFG = "sfg"


@dataclass(frozen=True)
class ReceiverSpec:
    """Receiver selection plus tunables.

    Unset tunables are filled from the channel parameters by `resolved`:
    pa_epsilon_sq defaults to sqrt(N_S)/N_Z (the geometric mean of its validity
    window N_S/N_Z << eps^2 << 1/N_Z) and sfg_tau defaults to 0.01/N_Z.
    """

    kind: ReceiverKind
    pa_epsilon_sq: float | None = None
    sfg_tau: float | None = None
    sfg_capture_eps: float = 1e-3
    include_thermal_residual: bool = False

    def resolved(self, cp: ChannelParams) -> "ReceiverSpec":
        """Fill defaults from the channel and validate the tunable windows."""
        spec = self
        if spec.kind is ReceiverKind.PA and spec.pa_epsilon_sq is None:
            spec = replace(spec, pa_epsilon_sq=math.sqrt(cp.N_S) / cp.N_Z if cp.N_S > 0 else 0.5 / cp.N_Z)
        if spec.kind is ReceiverKind.SFG and spec.sfg_tau is None:
            spec = replace(spec, sfg_tau=0.01 / cp.N_Z)
        if spec.kind is ReceiverKind.PA:
            eps2 = spec.pa_epsilon_sq
            if not (cp.N_S / cp.N_Z < eps2 < 1.0 / cp.N_Z):
                raise ValueError(
                    f"pa_epsilon_sq = {eps2:g} outside validity window "
                    f"({cp.N_S / cp.N_Z:g}, {1.0 / cp.N_Z:g})"
                )
        if spec.kind is ReceiverKind.SFG:
            if spec.sfg_tau * cp.N_Z > 0.1:
                raise ValueError(
                    f"sfg_tau * N_Z = {spec.sfg_tau * cp.N_Z:g} exceeds 0.1"
                )
            if not 0.0 < spec.sfg_capture_eps < 1.0:
                raise ValueError("sfg_capture_eps must lie in (0, 1)")
        return spec


# ---------------------------------------------------------------------------
# heterodyne receiver
# ---------------------------------------------------------------------------


def heterodyne_envelope(samples, N_S: float) -> complex:
    """Normalized envelope estimate: (sum of samples) / (M sqrt(N_S)).

    With samples drawn from the received mode, the mean of the result is
    sqrt(eta) e^{-i phi}.
    """
    if N_S <= 0:
        raise ValueError(f"N_S must be positive, got {N_S}")
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("need at least one sample")
    return complex(np.sum(samples) / (samples.size * math.sqrt(N_S)))


def heterodyne_decide(envelope: complex, a: Alphabet) -> Symbol:
    """Nearest constellation point; ties resolve to the lowest symbol index."""
    dists = [abs(envelope - s.complex_point()) for s in a.symbols]
    return a.symbols[int(np.argmin(dists))]


# ---------------------------------------------------------------------------
# parametric-amplifier receiver
# ---------------------------------------------------------------------------


def pa_statistic_moments(
    cp: ChannelParams, symbol: Symbol, exact_variance: bool = False
) -> tuple[float, float]:
    """Per-copy mean and variance of the cross-correlation statistic.

    The statistic is O = a_I a_R + a_I^dag a_R^dag, whose mean under a symbol
    (sqrt(eta), phase) is 2 sqrt(eta N_S (N_S+1)) cos(phase + cp.phi): both the
    correlation and its conjugate contribute, which is what makes the measured
    displacement twice the single-sided correlation.  The default variance is
    the bright-background approximation N_Z; exact_variance computes the full
    Gaussian fourth-moment expression from the joint state.
    """
    flags = cp.validity_warnings()
    if flags:
        warnings.warn(
            "PA statistic approximations assume "
            + "; ".join(flags),
            stacklevel=2,
        )
    phi = symbol.phase + cp.phi
    mean = 2.0 * math.sqrt(symbol.eta * cp.N_S * (cp.N_S + 1.0)) * math.cos(phi)
    if not exact_variance:
        return mean, cp.N_Z
    state = apply_channel(cp, symbol)
    c = phase_sensitive_correlation(state, 0, 1)
    n_r = mean_photon_number(state, 0)
    n_i = mean_photon_number(state, 1)
    # Wick expansion of <O^2> - <O>^2 for a zero-mean Gaussian state
    var = 2.0 * (c * c).real + (n_i + 1.0) * (n_r + 1.0) + n_i * n_r
    return mean, var


def pa_sample(
    cp: ChannelParams, symbol: Symbol, M: int, rng: np.random.Generator
) -> float:
    """One realization of the M-copy averaged statistic, Normal(mean, var/M)."""
    if M < 100:
        raise ValueError(f"central-limit sampling needs M >= 100, got {M}")
    mean, var = pa_statistic_moments(cp, symbol)
    return float(rng.normal(mean, math.sqrt(var / M)))


def pa_decision_grid(a: Alphabet, cp: ChannelParams) -> list[float]:
    """Expected statistic value for each symbol of an aligned alphabet."""
    return [
        2.0 * math.sqrt(s.eta * cp.N_S * (cp.N_S + 1.0)) * math.cos(s.phase + cp.phi)
        for s in a.symbols
    ]


def pa_decide(statistic: float, a: Alphabet, cp: ChannelParams) -> Symbol:
    """Nearest symbol along the statistic's real axis; PAM and BPSK only.

    QPSK is rejected: the statistic projects onto one axis, so orthogonal-phase
    symbols are indistinguishable and the receiver offers no gain there.
    """
    if a.kind is AlphabetKind.QPSK or len(a) != 2:
        raise UnsupportedAlphabetError(
            "PA receiver supports only two-symbol aligned alphabets (PAM, BPSK)"
        )
    grid = pa_decision_grid(a, cp)
    dists = [abs(statistic - g) for g in grid]
    return a.symbols[int(np.argmin(dists))]


# ---------------------------------------------------------------------------
# SFG receiver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SfgBookkeeping:
    """Per-cycle photon bookkeeping of the SFG feed-forward loop.

    C0_sq is the per-hypothesis squared correlation entering the cycle
    recursion; cycles holds (n_b, n_E) for k = 1..K; total is the captured
    sum of n_b + n_E over those cycles.
    """

    C0_sq: float
    cycles: tuple[tuple[float, float], ...]
    K: int
    total: float


def sfg_cycle_count(cp: ChannelParams, spec: ReceiverSpec) -> int:
    """Minimal K capturing a 1 - eps fraction of the infinite cycle series."""
    spec = spec.resolved(cp)
    x = 1.0 - spec.sfg_tau * (1.0 + cp.N_Z)
    if x <= 0.0:
        raise ValueError(
            f"tau (1 + N_Z) = {spec.sfg_tau * (1.0 + cp.N_Z):g} must be < 1"
        )
    return max(1, math.ceil(math.log(spec.sfg_capture_eps) / (2.0 * math.log(x))))


def sfg_bookkeeping(
    cp: ChannelParams, symbol_distance_sq: float, spec: ReceiverSpec
) -> SfgBookkeeping:
    """Cycle-by-cycle photon counts for a hypothesis pair at squared distance d^2.

    The per-hypothesis correlation magnitude entering the recursion is
    C0_sq = d^2 N_S (N_S + 1) / 4, and cycle k carries
    n_b = n_E = tau M C0_sq [1 - tau (1 + N_Z)]^{2k}.  The physical photon
    count rate of the nulled-hypothesis test is four times `total`, because
    nulling one hypothesis doubles the surviving coherent amplitude (see
    sfg_count_rate).
    """
    if symbol_distance_sq < 0:
        raise ValueError("squared distance must be >= 0")
    spec = spec.resolved(cp)
    x = 1.0 - spec.sfg_tau * (1.0 + cp.N_Z)
    if x <= 0.0:
        raise ValueError(
            f"tau (1 + N_Z) = {spec.sfg_tau * (1.0 + cp.N_Z):g} must be < 1"
        )
    C0_sq = symbol_distance_sq * cp.N_S * (cp.N_S + 1.0) / 4.0
    K = sfg_cycle_count(cp, spec)
    base = spec.sfg_tau * cp.M * C0_sq
    cycles = []
    total = 0.0
    for k in range(1, K + 1):
        n_b = base * x ** (2 * k)
        cycles.append((n_b, n_b))
        total += 2.0 * n_b
    return SfgBookkeeping(C0_sq=C0_sq, cycles=tuple(cycles), K=K, total=total)


def sfg_infinite_total(
    cp: ChannelParams, symbol_distance_sq: float, spec: ReceiverSpec
) -> float:
    """Closed form of the infinite cycle series, 2 tau M C0_sq x^2 / (1 - x^2)."""
    spec = spec.resolved(cp)
    x = 1.0 - spec.sfg_tau * (1.0 + cp.N_Z)
    if x <= 0.0:
        raise ValueError("tau (1 + N_Z) must be < 1")
    C0_sq = symbol_distance_sq * cp.N_S * (cp.N_S + 1.0) / 4.0
    return 2.0 * spec.sfg_tau * cp.M * C0_sq * x * x / (1.0 - x * x)


@functools.lru_cache(maxsize=4096)
def _count_rate_cached(cp: ChannelParams, symbol_distance_sq: float, spec: ReceiverSpec) -> float:
    return 4.0 * sfg_bookkeeping(cp, symbol_distance_sq, spec).total


def sfg_count_rate(
    cp: ChannelParams, symbol_distance_sq: float, spec: ReceiverSpec
) -> float:
    """Poisson rate of the photon counter when the true and nulled hypotheses
    sit at squared constellation distance d^2.

    The nulling squeeze displaces the correlation of the tested hypothesis to
    zero, so the surviving amplitude is the full pairwise difference: its
    squared magnitude is 4 C0_sq, i.e. four times the per-hypothesis total.
    """
    return _count_rate_cached(cp, symbol_distance_sq, spec.resolved(cp))


def sfg_nulling_params(symbol: Symbol, cp: ChannelParams) -> tuple[float, float]:
    """Two-mode squeeze (G, theta) that zeroes <a_R a_I> for the given hypothesis.

    Solved from the post-channel moments: with c = <a_R a_I> and
    n = n_R + n_I + 1, the gain satisfies G(G-1) = |c|^2 / (n^2 - 4|c|^2) and
    the phase is arg(c) + pi.  Because G sits on the float grid just above 1,
    the returned gain is snapped to the representable neighbor minimizing the
    analytic residual; the reachable null is limited to roughly
    eps * n^2 / (4 |c|) in double precision.
    """
    state = apply_channel(cp, symbol)
    c = phase_sensitive_correlation(state, 0, 1)
    cmag = abs(c)
    if cmag == 0.0:
        return 1.0, 0.0
    n = mean_photon_number(state, 0) + mean_photon_number(state, 1) + 1.0
    v = cmag * cmag / (n * n - 4.0 * cmag * cmag)
    w = 2.0 * v / (1.0 + math.sqrt(1.0 + 4.0 * v))  # G - 1, cancellation-free
    theta = (cmath.phase(c) + math.pi) % (2.0 * math.pi)

    def residual(G: float) -> float:
        wg = G - 1.0  # exact for G in [1, 2)
        return abs((G + wg) * cmag - math.sqrt(G * wg) * n)

    G0 = 1.0 + w
    candidates = {G0, math.nextafter(G0, 0.0), math.nextafter(G0, 2.0)}
    G = min(candidates, key=residual)
    return G, theta


def _pairwise_distance_sq(a: Symbol, b: Symbol) -> float:
    return abs(a.complex_point() - b.complex_point()) ** 2


@functools.lru_cache(maxsize=1024)
def _residual_context(
    cp: ChannelParams, true_symbol: Symbol, spec: ReceiverSpec
) -> tuple[float, int]:
    state = apply_channel(cp, true_symbol)
    n_r = mean_photon_number(state, 0)
    n_i = mean_photon_number(state, 1)
    return n_i * spec.sfg_tau * n_r, sfg_cycle_count(cp, spec)


def _thermal_residual_counts(
    cp: ChannelParams, true_symbol: Symbol, spec: ReceiverSpec, rng: np.random.Generator
) -> int:
    """Bose-Einstein background photons accumulated over the K cycles.

    Each cycle's converted mode rides on a weak thermal floor with mean
    occupancy n_I * (tau n_R); dropped by default since it is bounded by
    tau N_S N_Z << 1 per cycle.
    """
    nbar, K = _residual_context(cp, true_symbol, spec.resolved(cp))
    if nbar <= 0.0:
        return 0
    draws = rng.geometric(1.0 / (1.0 + nbar), size=K) - 1
    return int(np.sum(draws))


def sfg_null_symbol(a: Alphabet) -> Symbol:
    """Hypothesis whose correlation the squeeze nulls before counting.

    For PAM the lower-amplitude symbol is nulled; for BPSK the phase-pi symbol.
    """
    if len(a) != 2:
        raise UnsupportedAlphabetError("zero-photon test needs a two-symbol alphabet")
    if a.kind is AlphabetKind.BPSK:
        return max(a.symbols, key=lambda s: s.phase)
    return min(a.symbols, key=lambda s: s.amplitude)


def sfg_decide_zero_photon(
    cp: ChannelParams,
    a: Alphabet,
    true_symbol: Symbol,
    spec: ReceiverSpec,
    rng: np.random.Generator,
) -> Symbol:
    """Zero-photon test for two-symbol alphabets.

    Nulls one hypothesis, counts all converted photons over the K cycles, and
    declares the nulled hypothesis iff the count is zero.  The count is Poisson
    with rate sfg_count_rate at the pair distance (zero when the truth is the
    nulled hypothesis), plus an optional thermal-residual background.
    """
    if len(a) != 2:
        raise UnsupportedAlphabetError("zero-photon test needs a two-symbol alphabet")
    spec = spec.resolved(cp)
    null = sfg_null_symbol(a)
    other = a.symbols[1] if a.symbols[0] == null else a.symbols[0]
    if true_symbol == null:
        lam = 0.0
    else:
        lam = sfg_count_rate(cp, _pairwise_distance_sq(true_symbol, null), spec)
    count = int(rng.poisson(lam)) if lam > 0.0 else 0
    if spec.include_thermal_residual:
        count += _thermal_residual_counts(cp, true_symbol, spec, rng)
    return null if count == 0 else other


def sequential_click_test(rates, modes_budget: int, rng: np.random.Generator) -> int:
    """Advance-on-click schedule over hypotheses with given per-mode-pair rates.

    Tests hypotheses in the order given; the current one is discarded as soon
    as one photon arrives (geometric waiting time over mode pairs), consuming
    the pairs spent waiting.  Returns the index (into `rates`) of the
    hypothesis holding when the budget runs out, or the last discarded one if
    every hypothesis clicked.
    """
    declared = len(rates) - 1
    modes_left = modes_budget
    for j, r in enumerate(rates):
        if r <= 0.0:
            return j  # no photon ever arrives; hypothesis survives the budget
        p_click = -math.expm1(-r) if r < 30.0 else 1.0
        pairs_to_click = int(rng.geometric(p_click))
        if pairs_to_click > modes_left:
            return j  # survived the remaining budget without a click
        modes_left -= pairs_to_click
        declared = j
    return declared


def sfg_decide_qpsk(
    cp: ChannelParams,
    a: Alphabet,
    true_symbol: Symbol,
    spec: ReceiverSpec,
    rng: np.random.Generator,
) -> Symbol:
    """Sequential test over the four phase hypotheses.

    Hypotheses are visited in the fixed cyclic order of the alphabet, entered
    at a uniformly random offset (the constellation is rotationally symmetric,
    which keeps the error rate identical for every true symbol).  The currently
    nulled hypothesis is discarded as soon as one photon arrives; whichever
    hypothesis survives when the M pairs are exhausted is declared.  If every
    hypothesis is discarded, the last-discarded one is declared.
    """
    if a.kind is not AlphabetKind.QPSK or len(a) != 4:
        raise UnsupportedAlphabetError("sequential phase test needs a QPSK alphabet")
    spec = spec.resolved(cp)
    offset = int(rng.integers(4))
    order = [(offset + step) % 4 for step in range(4)]
    rates = []
    for idx in order:
        hyp = a.symbols[idx]
        if hyp == true_symbol:
            rates.append(0.0)
        else:
            d2 = _pairwise_distance_sq(true_symbol, hyp)
            rates.append(sfg_count_rate(cp, d2, spec) / cp.M)
    j = sequential_click_test(rates, cp.M, rng)
    return a.symbols[order[j]]
