"""Receiver decision procedures: heterodyne, PA, and SFG."""

import math

import numpy as np
import pytest

from qbcsim.gaussian import phase_sensitive_correlation
from qbcsim.link import (
    ChannelParams,
    Symbol,
    apply_channel,
    apply_channel_classical,
    make_alphabet_bpsk,
    make_alphabet_pam,
    make_alphabet_qpsk,
)
from qbcsim.gaussian import apply_two_mode_squeeze, heterodyne_samples
from qbcsim.receivers import (
    ReceiverKind,
    ReceiverSpec,
    UnsupportedAlphabetError,
    heterodyne_decide,
    heterodyne_envelope,
    pa_decide,
    pa_sample,
    pa_statistic_moments,
    sfg_bookkeeping,
    sfg_count_rate,
    sfg_cycle_count,
    sfg_decide_qpsk,
    sfg_decide_zero_photon,
    sfg_infinite_total,
    sfg_null_symbol,
    sfg_nulling_params,
)


def _cp(eta=0.01, phi=0.0, N_Z=100.0, M=10_000, N_S=0.01):
    return ChannelParams(eta=eta, phi=phi, N_Z=N_Z, M=M, N_S=N_S)


# ---------------------------------------------------------------------------
# heterodyne
# ---------------------------------------------------------------------------


def test_envelope_noise_free():
    eta, phi, N_S = 0.04, 0.6, 0.3
    sample = math.sqrt(eta * N_S) * np.exp(-1j * phi)
    env = heterodyne_envelope([sample] * 10, N_S)
    assert env == pytest.approx(math.sqrt(eta) * np.exp(-1j * phi), rel=1e-12)


def test_envelope_monte_carlo_mean():
    eta, N_S, N_Z = 0.01, 0.01, 1.0
    cp = _cp(eta=eta, N_Z=N_Z, N_S=N_S)
    state = apply_channel_classical(cp, Symbol(math.sqrt(eta), 0.0))
    rng = np.random.default_rng(314)
    M = 10**5
    env = heterodyne_envelope(heterodyne_samples(state, 0, M, rng), N_S)
    se = math.sqrt(((1 - eta) * N_Z + 1.0) / (2.0 * M * N_S))
    assert abs(env.real - math.sqrt(eta)) < 4 * se
    assert abs(env.imag) < 4 * se


def test_envelope_phase_flip():
    sample = math.sqrt(0.09 * 0.5) * np.exp(-1j * math.pi)
    env = heterodyne_envelope([sample] * 3, 0.5)
    assert env.real == pytest.approx(-0.3, rel=1e-12)


def test_envelope_rejects_bad_inputs():
    with pytest.raises(ValueError):
        heterodyne_envelope([], 0.1)
    with pytest.raises(ValueError):
        heterodyne_envelope([1.0], 0.0)


def test_decide_exact_point():
    a = make_alphabet_qpsk(0.25)
    for sym in a.symbols:
        assert heterodyne_decide(sym.complex_point(), a) == sym


def test_decide_tie_breaks_to_lowest_index():
    a = make_alphabet_bpsk(0.16)
    assert heterodyne_decide(0.0, a) == a.symbols[0]


def test_decide_qpsk_nearest_neighbor():
    eta = 0.09
    a = make_alphabet_qpsk(eta)
    env = math.sqrt(eta) * np.exp(-1j * math.pi / 2) * 1.05
    assert heterodyne_decide(env, a) == a.symbols[1]


def test_decide_rotation_invariance():
    a = make_alphabet_qpsk(0.2)
    rng = np.random.default_rng(8)
    from qbcsim.link import Alphabet, AlphabetKind

    for _ in range(50):
        env = complex(rng.normal(), rng.normal()) * 0.3
        shift = rng.uniform(0, 2 * math.pi)
        rotated = Alphabet(
            tuple(Symbol(s.amplitude, s.phase + shift) for s in a.symbols),
            AlphabetKind.CUSTOM,
        )
        picked = heterodyne_decide(env, a)
        picked_rot = heterodyne_decide(env * np.exp(-1j * shift), rotated)
        assert picked_rot.phase == pytest.approx((picked.phase + shift) % (2 * math.pi))


# ---------------------------------------------------------------------------
# PA receiver
# ---------------------------------------------------------------------------


def test_pa_mean_zero_at_quarter_phase():
    mean, _ = pa_statistic_moments(_cp(), Symbol(0.1, math.pi / 2))
    assert mean == pytest.approx(0.0, abs=1e-15)


def test_pa_moments_values():
    # amplitude 0.1 -> eta 0.01; the statistic carries both the correlation and
    # its conjugate, so the displacement is twice the one-sided correlation
    mean, var = pa_statistic_moments(_cp(), Symbol(0.1, 0.0))
    assert mean == pytest.approx(2.0 * math.sqrt(1.01e-4), rel=1e-12)
    assert var == pytest.approx(100.0)


def test_pa_mean_dark_symbol():
    mean, _ = pa_statistic_moments(_cp(), Symbol(0.0, 0.0))
    assert mean == 0.0


def test_pa_mean_is_even_in_phase():
    cp = _cp()
    for phi in (0.3, 1.2, 2.9):
        m_plus, _ = pa_statistic_moments(cp, Symbol(0.1, phi))
        m_minus, _ = pa_statistic_moments(cp, Symbol(0.1, -phi))
        assert m_plus == pytest.approx(m_minus, rel=1e-12)


def test_pa_exact_variance_close_to_approximation():
    cp = _cp()
    mean_a, var_a = pa_statistic_moments(cp, Symbol(0.1, 0.0))
    mean_e, var_e = pa_statistic_moments(cp, Symbol(0.1, 0.0), exact_variance=True)
    assert mean_e == mean_a
    # exact Wick variance is N_Z + O(1) in this regime
    assert var_e == pytest.approx(var_a, rel=0.05)


def test_pa_exact_variance_wick_value():
    cp = _cp(eta=0.3, N_Z=5.0, N_S=0.4)
    sym = Symbol(math.sqrt(0.3), 0.9)
    _, var = pa_statistic_moments(cp, sym, exact_variance=True)
    state = apply_channel(cp, sym)
    c = phase_sensitive_correlation(state, 0, 1)
    from qbcsim.gaussian import mean_photon_number

    n_r = mean_photon_number(state, 0)
    n_i = mean_photon_number(state, 1)
    expect = 2 * (c * c).real + (n_i + 1) * (n_r + 1) + n_i * n_r
    assert var == pytest.approx(expect, rel=1e-12)


def test_pa_sample_concentrates_at_large_m():
    cp = _cp()
    rng = np.random.default_rng(0)
    mean, _ = pa_statistic_moments(cp, Symbol(0.1, 0.0))
    draws = [pa_sample(cp, Symbol(0.1, 0.0), 10**9, rng) for _ in range(50)]
    assert np.mean(draws) == pytest.approx(mean, abs=1e-4)


def test_pa_sample_variance_scaling():
    cp = _cp()
    rng = np.random.default_rng(123)
    M = 1000
    draws = np.array([pa_sample(cp, Symbol(0.1, 0.0), M, rng) for _ in range(10**5)])
    assert np.var(draws) == pytest.approx(cp.N_Z / M, rel=0.05)


def test_pa_sample_off_symbol_zero_mean():
    cp = _cp()
    rng = np.random.default_rng(55)
    M = 1000
    n = 20_000
    draws = np.array([pa_sample(cp, Symbol(0.0, 0.0), M, rng) for _ in range(n)])
    se = math.sqrt(cp.N_Z / M / n)
    assert abs(np.mean(draws)) < 4 * se


def test_pa_sample_rejects_small_m():
    with pytest.raises(ValueError):
        pa_sample(_cp(), Symbol(0.1, 0.0), 50, np.random.default_rng(0))


def test_pa_decide_bpsk_threshold():
    cp = _cp()
    a = make_alphabet_bpsk(0.01)
    assert pa_decide(0.3, a, cp) == a.symbols[0]
    assert pa_decide(-0.3, a, cp) == a.symbols[1]


def test_pa_decide_ook_midpoint_tie():
    cp = _cp()
    a = make_alphabet_pam(0.0, 0.01)
    mid = 0.5 * 2.0 * math.sqrt(0.01 * cp.N_S * (cp.N_S + 1))
    assert pa_decide(mid, a, cp) == a.symbols[0]


def test_pa_decide_rejects_qpsk():
    with pytest.raises(UnsupportedAlphabetError):
        pa_decide(0.1, make_alphabet_qpsk(0.01), _cp())


# ---------------------------------------------------------------------------
# SFG bookkeeping
# ---------------------------------------------------------------------------


def _sfg_spec(**kw):
    return ReceiverSpec(kind=ReceiverKind.SFG, **kw)


def test_bookkeeping_matches_brute_force_series():
    cp = _cp()
    spec = _sfg_spec()
    d2 = 4 * cp.eta
    bk = sfg_bookkeeping(cp, d2, spec)
    tau = 0.01 / cp.N_Z
    x = 1.0 - tau * (1.0 + cp.N_Z)
    c0 = d2 * cp.N_S * (cp.N_S + 1) / 4.0
    brute = sum(2.0 * tau * cp.M * c0 * x ** (2 * k) for k in range(1, bk.K + 1))
    closed = 2.0 * tau * cp.M * c0 * x * x * (1 - x ** (2 * bk.K)) / (1 - x * x)
    assert bk.total == pytest.approx(brute, rel=1e-12)
    assert bk.total == pytest.approx(closed, rel=1e-9)
    assert bk.C0_sq == pytest.approx(c0, rel=1e-14)


def test_bookkeeping_captures_series_within_eps():
    cp = _cp()
    spec = _sfg_spec(sfg_capture_eps=1e-3)
    d2 = 4 * cp.eta
    bk = sfg_bookkeeping(cp, d2, spec)
    infinite = sfg_infinite_total(cp, d2, spec)
    assert bk.total <= infinite
    assert bk.total >= (1 - 1e-3) * infinite


def test_bookkeeping_small_tau_limit():
    cp = _cp()
    for tau_nz in (0.01, 0.003):
        spec = _sfg_spec(sfg_tau=tau_nz / cp.N_Z)
        d2 = 4 * cp.eta
        total_inf = sfg_infinite_total(cp, d2, spec)
        limit = cp.M * (d2 * cp.N_S * (cp.N_S + 1) / 4.0) / (1.0 + cp.N_Z)
        assert total_inf == pytest.approx(limit, rel=0.02)


def test_bookkeeping_limit_identity_pins_normalization():
    # 4 x (small-tau limit of the series) == d^2 N_S (N_S+1) M / (1 + N_Z), exactly
    cp = _cp()
    d2 = 4 * cp.eta
    c0 = d2 * cp.N_S * (cp.N_S + 1) / 4.0
    lhs = 4.0 * (cp.M * c0 / (1.0 + cp.N_Z))
    rhs = d2 * cp.N_S * (cp.N_S + 1) * cp.M / (1.0 + cp.N_Z)
    assert lhs == rhs


def test_bookkeeping_zero_correlation():
    bk = sfg_bookkeeping(_cp(), 0.0, _sfg_spec())
    assert bk.total == 0.0
    assert all(nb == 0.0 and ne == 0.0 for nb, ne in bk.cycles)


def test_bookkeeping_cycles_strictly_decreasing():
    bk = sfg_bookkeeping(_cp(), 0.04, _sfg_spec())
    n_b = [c[0] for c in bk.cycles]
    assert all(b > 0 for b in n_b)
    assert all(a > b for a, b in zip(n_b, n_b[1:]))
    assert all(nb == ne for nb, ne in bk.cycles)


def test_cycle_count_monotonicity():
    cp = _cp()
    # nonincreasing in the capture tolerance
    k_loose = sfg_cycle_count(cp, _sfg_spec(sfg_capture_eps=1e-2))
    k_tight = sfg_cycle_count(cp, _sfg_spec(sfg_capture_eps=1e-4))
    assert k_loose <= k_tight
    # nondecreasing in N_Z under the default tau = 0.01 / N_Z rule
    ks = [
        sfg_cycle_count(_cp(N_Z=nz), _sfg_spec())
        for nz in (30.0, 100.0, 300.0, 1000.0)
    ]
    assert all(a <= b for a, b in zip(ks, ks[1:]))


def test_bookkeeping_rejects_overdamped_tap():
    with pytest.raises(ValueError):
        sfg_bookkeeping(_cp(N_Z=5.0), 0.01, _sfg_spec(sfg_tau=0.25))


def test_count_rate_is_four_times_total():
    cp = _cp()
    spec = _sfg_spec()
    d2 = 4 * cp.eta
    assert sfg_count_rate(cp, d2, spec) == pytest.approx(
        4.0 * sfg_bookkeeping(cp, d2, spec).total, rel=1e-14
    )


# ---------------------------------------------------------------------------
# SFG nulling
# ---------------------------------------------------------------------------


def test_nulling_dark_symbol_is_identity():
    assert sfg_nulling_params(Symbol(0.0, 0.0), _cp()) == (1.0, 0.0)


def test_nulling_zeroes_the_correlation():
    cp = _cp()
    sym = Symbol(0.1, math.pi)
    G, theta = sfg_nulling_params(sym, cp)
    state = apply_channel(cp, sym)
    nulled = apply_two_mode_squeeze(state, 0, 1, G, theta)
    assert abs(phase_sensitive_correlation(nulled, 0, 1)) <= 1e-10


def test_nulling_doubles_opposite_hypothesis():
    cp = _cp()
    null_sym = Symbol(0.1, math.pi)
    true_sym = Symbol(0.1, 0.0)
    G, theta = sfg_nulling_params(null_sym, cp)
    state = apply_channel(cp, true_sym)
    displaced = apply_two_mode_squeeze(state, 0, 1, G, theta)
    c = phase_sensitive_correlation(displaced, 0, 1)
    expect = 2.0 * math.sqrt(0.01 * cp.N_S * (cp.N_S + 1))
    assert abs(c) == pytest.approx(expect, rel=1e-6)


def test_nulling_of_bare_source():
    # lossless channel with no thermal noise reduces to unsqueezing the source
    cp = ChannelParams(eta=1.0, phi=0.0, N_Z=0.0, M=100, N_S=0.25)
    G, theta = sfg_nulling_params(Symbol(1.0, 0.0), cp)
    assert G == pytest.approx(1.25, rel=1e-12)
    assert theta == pytest.approx(math.pi, rel=1e-12)


# ---------------------------------------------------------------------------
# SFG decisions
# ---------------------------------------------------------------------------


def test_zero_photon_null_hypothesis_always_correct():
    cp = _cp()
    a = make_alphabet_bpsk(cp.eta)
    spec = _sfg_spec()
    null = sfg_null_symbol(a)
    rng = np.random.default_rng(77)
    for _ in range(2000):
        assert sfg_decide_zero_photon(cp, a, null, spec, rng) == null


def test_zero_photon_null_symbol_choice():
    assert sfg_null_symbol(make_alphabet_bpsk(0.01)).phase == pytest.approx(math.pi)
    assert sfg_null_symbol(make_alphabet_pam(0.0, 0.01)).amplitude == 0.0


def test_zero_photon_error_rate_matches_poisson():
    cp = _cp(M=10_000)  # s = eta N_S M / N_Z = 0.01 * 0.01 * 1e4 / 100 = 0.01... scale up
    cp = _cp(M=1_000_000)  # s = 1
    a = make_alphabet_bpsk(cp.eta)
    spec = _sfg_spec()
    null = sfg_null_symbol(a)
    other = a.symbols[0]
    lam = sfg_count_rate(cp, 4 * cp.eta, spec)
    rng = np.random.default_rng(2025)
    n = 200_000
    errors = sum(
        sfg_decide_zero_photon(cp, a, other, spec, rng) != other for _ in range(n)
    )
    p = math.exp(-lam)
    assert abs(errors / n - p) < 3 * math.sqrt(p * (1 - p) / n)
    # lam evaluates near 4 s at s = 1 (the factor-4-enhanced exponent)
    assert lam == pytest.approx(4.0, rel=0.03)


def test_zero_photon_thermal_residual_option():
    cp = _cp(M=100_000)
    a = make_alphabet_bpsk(cp.eta)
    spec = _sfg_spec(include_thermal_residual=True)
    null = sfg_null_symbol(a)
    rng = np.random.default_rng(11)
    n = 20_000
    errors = sum(sfg_decide_zero_photon(cp, a, null, spec, rng) != null for _ in range(n))
    # background clicks now cause false rejections of the nulled hypothesis
    assert errors > 0
    from qbcsim.receivers import _residual_context

    nbar, K = _residual_context(cp, null, spec.resolved(cp))
    p_expect = 1.0 - (1.0 / (1.0 + nbar)) ** K
    assert errors / n == pytest.approx(p_expect, rel=0.2)


def test_zero_photon_rejects_qpsk():
    with pytest.raises(UnsupportedAlphabetError):
        sfg_decide_zero_photon(
            _cp(), make_alphabet_qpsk(0.01), Symbol(0.1, 0.0), _sfg_spec(),
            np.random.default_rng(0),
        )


def test_qpsk_decide_correct_at_high_snr():
    cp = _cp(eta=0.08, M=1_000_000)  # s = 8: adjacent rates ~ 16
    a = make_alphabet_qpsk(cp.eta)
    spec = _sfg_spec()
    rng = np.random.default_rng(4)
    errors = 0
    for k in range(2000):
        true = a.symbols[k % 4]
        errors += sfg_decide_qpsk(cp, a, true, spec, rng) != true
    assert errors == 0


def test_qpsk_decide_symmetric_across_symbols():
    cp = _cp(eta=0.1, M=100_000)  # s = 1
    a = make_alphabet_qpsk(cp.eta)
    spec = _sfg_spec()
    rng = np.random.default_rng(31)
    n_each = 25_000
    rates = []
    for sym in a.symbols:
        errs = sum(sfg_decide_qpsk(cp, a, sym, spec, rng) != sym for _ in range(n_each))
        rates.append(errs / n_each)
    pooled = float(np.mean(rates))
    se = math.sqrt(pooled * (1 - pooled) / n_each)
    for r in rates:
        assert abs(r - pooled) < 4 * se


def test_qpsk_decide_respects_analytic_envelope():
    cp = _cp(eta=0.04, M=1_000_000)  # s = 4
    a = make_alphabet_qpsk(cp.eta)
    spec = _sfg_spec()
    rng = np.random.default_rng(9)
    n = 10_000
    errors = 0
    for k in range(n):
        true = a.symbols[k % 4]
        errors += sfg_decide_qpsk(cp, a, true, spec, rng) != true
    s = cp.eta * cp.N_S * cp.M / cp.N_Z
    bound = 4.0 * math.exp(-s)
    assert errors / n <= bound * 1.1


def test_qpsk_decide_rejects_binary():
    with pytest.raises(UnsupportedAlphabetError):
        sfg_decide_qpsk(
            _cp(), make_alphabet_bpsk(0.01), Symbol(0.1, 0.0), _sfg_spec(),
            np.random.default_rng(0),
        )


def test_decides_are_deterministic_given_seed():
    cp = _cp(eta=0.02, M=100_000)
    a = make_alphabet_qpsk(cp.eta)
    b = make_alphabet_bpsk(cp.eta)
    spec = _sfg_spec()
    for seed in (0, 1, 2):
        r1 = np.random.default_rng(seed)
        r2 = np.random.default_rng(seed)
        d1 = [sfg_decide_qpsk(cp, a, a.symbols[1], spec, r1) for _ in range(50)]
        d2 = [sfg_decide_qpsk(cp, a, a.symbols[1], spec, r2) for _ in range(50)]
        assert d1 == d2
        r1 = np.random.default_rng(seed)
        r2 = np.random.default_rng(seed)
        z1 = [sfg_decide_zero_photon(cp, b, b.symbols[0], spec, r1) for _ in range(50)]
        z2 = [sfg_decide_zero_photon(cp, b, b.symbols[0], spec, r2) for _ in range(50)]
        assert z1 == z2


# ---------------------------------------------------------------------------
# ReceiverSpec validation
# ---------------------------------------------------------------------------


def test_pa_epsilon_window_enforced():
    cp = _cp()
    with pytest.raises(ValueError):
        ReceiverSpec(kind=ReceiverKind.PA, pa_epsilon_sq=1.0).resolved(cp)
    with pytest.raises(ValueError):
        ReceiverSpec(kind=ReceiverKind.PA, pa_epsilon_sq=1e-9).resolved(cp)
    spec = ReceiverSpec(kind=ReceiverKind.PA).resolved(cp)
    assert cp.N_S / cp.N_Z < spec.pa_epsilon_sq < 1.0 / cp.N_Z


def test_sfg_tau_window_enforced():
    cp = _cp()
    with pytest.raises(ValueError):
        ReceiverSpec(kind=ReceiverKind.SFG, sfg_tau=0.2 / cp.N_Z * 10).resolved(cp)
    spec = ReceiverSpec(kind=ReceiverKind.SFG).resolved(cp)
    assert spec.sfg_tau == pytest.approx(0.01 / cp.N_Z)
