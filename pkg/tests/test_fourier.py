import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rholab.fourier import (
    XI,
    FourierContext,
    PlancherelMismatch,
    alternation_census,
    alternation_lower,
    alternations,
    binary_digits,
    bit_count_exponent,
    checked_dft,
    dft,
    exact_l2,
    g_transform,
    increment_transform_bound_holds,
    l2_bound,
    l2_table,
    phi_s,
    pi_product,
    plancherel_residual,
    separating_function,
    separating_stats,
    sigma,
    window_alternations,
)
from rholab.mixing_lab import block_distribution, block_increment_law, block_mixing_budget, distances, increment_weight


def test_xi():
    assert 0.9069 < XI < 0.9070
    assert XI == pytest.approx(1 - (4 - math.sqrt(10)) / 9, abs=1e-15)


def test_context_exponent():
    for p in (3, 5, 7, 11, 31, 101, 127, 1023):
        m = bit_count_exponent(p)
        assert 2 ** (m - 1) < p < 2**m
    ctx = FourierContext.for_modulus(7)
    assert ctx.omega ** 7 == pytest.approx(1)


def test_l2_bound_examples():
    assert l2_bound(10, 5) == pytest.approx(13.800, abs=1e-3)
    assert l2_bound(4, 2) == pytest.approx(2 * XI**4) == pytest.approx(1.3530, abs=1e-4)
    assert l2_bound(2000, 5) < 1e-80


def test_dft_examples():
    p = 9
    assert np.allclose(dft(np.full(p, 1 / p)), np.eye(p)[0], atol=1e-15)
    delta = np.zeros(p)
    delta[0] = 1
    assert np.allclose(dft(delta), np.ones(p))


def test_dft_matches_numpy_fft_convention():
    v = np.random.default_rng(0).standard_normal(13)
    # f^(l) = sum w^{+lj} f(j) is p * ifft
    assert np.allclose(dft(v), 13 * np.fft.ifft(v))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 200), st.integers(0, 10**6))
def test_plancherel_property(p, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(p) + 1j * rng.standard_normal(p)
    assert plancherel_residual(v, checked_dft(v)) < 1e-9


def test_checked_dft_raises_on_corruption(monkeypatch):
    import rholab.fourier as fourier_mod

    monkeypatch.setattr(fourier_mod, "dft", lambda v: 2 * np.asarray(v, dtype=complex))
    with pytest.raises(PlancherelMismatch):
        fourier_mod.checked_dft(np.ones(5))


def test_exact_l2_point_mass():
    for p in (7, 31, 101):
        assert exact_l2(p, 0).value == pytest.approx(p - 1)


@pytest.mark.parametrize("p, s, m", [(31, 10, 5), (7, 6, 3)])
def test_exact_l2_under_bound_examples(p, s, m):
    assert exact_l2(p, s).value <= l2_bound(s, m)


@pytest.mark.parametrize("p", [7, 31, 127])
def test_l2_and_separation_grid(p):
    m = bit_count_exponent(p)
    for row in l2_table(p):
        assert row["exact_l2"] <= row["l2_bound"] + 1e-9
        assert row["sep_exact"] <= row["l2_bound"] + 1e-9
        assert row["plancherel_residual"] < 1e-9
    blocks = math.ceil(block_mixing_budget(m, 0.5))
    assert distances(block_distribution(p, blocks))[0] <= 0.5


def test_phi_examples():
    ctx = FourierContext.for_modulus(7)
    assert phi_s(1, 3, ctx) == 2
    assert phi_s(6, 1, ctx) == 0


def test_phi_matches_cosine_evaluation():
    for p in (7, 11, 31, 101):
        ctx = FourierContext.for_modulus(p)
        for ell in range(1, p):
            direct = sum(math.cos(2 * math.pi * ell * 2**j / p) <= 0 for j in range(12))
            assert phi_s(ell, 12, ctx) == direct


def test_phi_orbit_consistency():
    ctx = FourierContext.for_modulus(31)
    for ell in range(1, 31):
        for s in range(1, 15):
            # first step of the window plus the shifted window of the doubled frequency
            head = phi_s(ell, 1, ctx)
            assert phi_s(ell, s + 1, ctx) == head + phi_s(2 * ell % 31, s, ctx)


def test_sigma_examples():
    ctx = FourierContext.for_modulus(11)
    assert ctx.m == 4
    assert sigma(0, 3, ctx) == 3
    assert sigma(1, 3, ctx) == 4
    for r in range(3):
        assert sorted(sigma(r, ell, ctx) for ell in range(1, 11)) == list(range(1, 11))


def test_sigma_shifts_digit_window():
    ctx = FourierContext.for_modulus(31)
    for ell in range(1, 31):
        digits = binary_digits(ell, 31, 3 * ctx.m)
        for r in range(3):
            assert binary_digits(sigma(r, ell, ctx), 31, ctx.m) == digits[r * ctx.m:(r + 1) * ctx.m]


def test_binary_digits_reconstruct_fraction():
    for p in (7, 11, 101):
        for ell in range(1, p):
            d = binary_digits(ell, p, 60)
            assert sum(b * 2.0 ** -(i + 1) for i, b in enumerate(d)) == pytest.approx(ell / p, abs=1e-15)


@pytest.mark.parametrize("p", [7, 11, 31, 101])
def test_phi_dominates_alternation_bounds(p):
    ctx = FourierContext.for_modulus(p)
    for s in (ctx.m, 2 * ctx.m, 3 * ctx.m):
        for ell in range(1, p):
            phi = phi_s(ell, s, ctx)
            assert phi >= window_alternations(ell, s, ctx)
            assert phi >= alternation_lower(ell, s, ctx)


def test_alternation_census():
    assert alternation_census(5)[2] == 12
    for m in range(1, 13):
        H = alternation_census(m)
        assert sum(H) == 2**m
        assert H[0] == 2
        assert H == [2 * math.comb(m - 1, z) for z in range(m)]
    assert alternations([0, 1, 1, 0]) == 2


def test_g_transform():
    assert abs(g_transform(0) - 1) < 1e-12
    assert abs(g_transform(0.5) - 0.2) < 1e-12
    for x in np.linspace(0, 1, 100):
        series = increment_weight(0) + 2 * sum(increment_weight(k) * math.cos(2 * math.pi * k * x) for k in range(1, 61))
        assert abs(g_transform(x) - series) < 1e-12


def test_pi_product():
    assert pi_product(0, 3) == pytest.approx(1, abs=1e-12)
    law = block_distribution(7, 3)
    transform = dft(law)
    assert pi_product(1, 3) == pytest.approx(transform[1].real, abs=1e-6)
    assert abs(transform[1].imag) < 1e-12
    assert pi_product(1, 3) == pytest.approx(g_transform(1 / 7) * g_transform(2 / 7) * g_transform(4 / 7))
    for t in (3, 5, 7):
        for j in range(t):
            assert abs(pi_product(j, t)) <= 1 + 1e-12


def test_separating_function():
    f = separating_function(3)
    assert f[0] == pytest.approx(3)
    u = np.full(7, 1 / 7)
    assert abs(np.sum(u * f)) < 1e-12
    assert np.sum(u * np.abs(f) ** 2) == pytest.approx(3)


@pytest.mark.parametrize("t, r", [(3, 2), (3, 0), (5, 1), (5, 3)])
def test_separating_stats_agree(t, r):
    stats = separating_stats(t, r)
    assert abs(stats.mean - stats.mean_closed) < 1e-6
    assert abs(stats.second_moment - stats.second_moment_closed) < 1e-6
    assert stats.variance == pytest.approx(stats.variance_closed, abs=1e-6)


@pytest.mark.parametrize("p", [7, 31])
def test_increment_transform_bound(p):
    assert increment_transform_bound_holds(p)
    mu = block_increment_law(p)
    assert mu[0] >= 1 / 3 and mu[1] >= 1 / 9
