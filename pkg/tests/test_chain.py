import math

import numpy as np
import pytest

from gaussent.chain import (
    ChainConfig,
    Region,
    ZeroModeError,
    coupling_matrix,
    dispersion,
    ground_state_moments,
    half_region,
    reduce_region,
    region_entropy,
    region_spectrum,
    wavevectors,
)
from gaussent.dynamics import QuadraticModel
from gaussent.errors import DomainError
from gaussent.spectrum import entropy, grid_oracle, mode_spectrum_from_moments, symplectic_oracle
from gaussent.state import params_from_moments


@pytest.mark.parametrize("alpha", [0, 1])
@pytest.mark.parametrize("n", [2, 5, 12])
def test_fourier_sums_match_matrix_functions(n, alpha):
    config = ChainConfig(n, 0.7, alpha, lattice_const=0.9)
    xi = ground_state_moments(config)
    ref = QuadraticModel(coupling_matrix(config)).ground_state()
    np.testing.assert_allclose(xi.q_mat, ref.q_mat, atol=1e-13)
    np.testing.assert_allclose(xi.p_mat, ref.p_mat, atol=1e-13)


def test_toeplitz_structure():
    n = 8
    periodic = ground_state_moments(ChainConfig(n, 0.3, 0)).q_mat
    anti = ground_state_moments(ChainConfig(n, 0.3, 1)).q_mat
    for d in range(1, n):
        # periodic correlations are circulant, antiperiodic ones flip sign around the ring
        assert periodic[0, d] == pytest.approx(periodic[0, n - d], abs=1e-14)
        assert anti[0, d] == pytest.approx(-anti[0, n - d], abs=1e-14)
        np.testing.assert_allclose(np.diag(anti, d), anti[0, d], atol=1e-14)


def test_two_site_value():
    # unit lattice constant, unit mass, half the chain
    config = ChainConfig(2, 1.0, 0, lattice_const=1.0)
    assert region_entropy(config, Region(0, 1)) == pytest.approx(0.249388280108, abs=1e-11)


def test_dispersion_and_wavevectors():
    config = ChainConfig(4, 0.5, 1, lattice_const=2.0)
    k = wavevectors(config)
    np.testing.assert_allclose(k, [np.pi / 4, 3 * np.pi / 4, -3 * np.pi / 4, -np.pi / 4])
    assert dispersion(np.pi, config) == pytest.approx(np.sqrt(1.0 + 0.25))
    assert 0.0 in wavevectors(ChainConfig(5, 1.0, 0))


def test_fixed_length_units():
    config = ChainConfig.with_length(50, 3.0, 1, length=2.0)
    assert config.lattice_const == pytest.approx(0.04)
    assert config.system_length == pytest.approx(2.0)


def test_zero_mode_rejected():
    with pytest.raises(ZeroModeError):
        ChainConfig(10, 0.0, 0)
    ChainConfig(10, 0.0, 1)  # antiperiodic chain has no zero mode


@pytest.mark.parametrize("bad", [dict(n_sites=0, mass=1.0), dict(n_sites=4, mass=-1.0),
                                 dict(n_sites=4, mass=1.0, alpha=2),
                                 dict(n_sites=4, mass=1.0, lattice_const=0.0)])
def test_config_validation(bad):
    with pytest.raises(DomainError):
        ChainConfig(**bad)


def test_region_indices_wrap():
    np.testing.assert_array_equal(Region(8, 4).indices(10), [8, 9, 0, 1])
    with pytest.raises(DomainError):
        Region(0, 11).indices(10)
    with pytest.raises(DomainError):
        Region(10, 1).indices(10)
    assert half_region(ChainConfig(7, 1.0), 0.5) == Region(0, 3)


@pytest.mark.parametrize("alpha", [0, 1])
def test_ground_state_is_pure(alpha):
    config = ChainConfig.with_length(30, 1.0, alpha)
    xi = ground_state_moments(config)
    np.testing.assert_allclose(symplectic_oracle(xi), 1.0, atol=1e-9)
    assert entropy(mode_spectrum_from_moments(xi)) < 1e-8


def test_complement_and_translation_symmetry():
    config = ChainConfig.with_length(20, 0.1, 1)
    for ell in (1, 5, 10):
        s = region_entropy(config, Region(0, ell))
        assert region_entropy(config, Region(0, 20 - ell)) == pytest.approx(s, abs=1e-10)
        assert region_entropy(config, Region(13, ell)) == pytest.approx(s, abs=1e-10)


def test_reduction_keeps_subblocks():
    xi = ground_state_moments(ChainConfig(6, 1.0))
    sub = reduce_region(xi, Region(4, 3))
    idx = [4, 5, 0]
    np.testing.assert_array_equal(sub.q_mat, xi.q_mat[np.ix_(idx, idx)])


def test_entropy_grows_as_mass_drops():
    values = [region_entropy(ChainConfig.with_length(40, k, 0), Region(0, 20)) for k in (10.0, 1.0, 0.01)]
    assert values[0] < values[1] < values[2]


def test_region_spectrum_sorted():
    spec = region_spectrum(ChainConfig.with_length(40, 0.01, 1), Region(0, 20))
    assert np.all(np.diff(spec.xi) <= 0)
    assert spec.method == "eta"


def test_dispersion_examples():
    unit = ChainConfig(4, 1.0, 0, lattice_const=1.0)
    assert dispersion(0.0, unit) == pytest.approx(1.0)
    assert dispersion(np.pi / 2, unit) == pytest.approx(math.sqrt(3))
    assert dispersion(np.pi, ChainConfig(4, 0.0, 1)) == pytest.approx(2.0)


def test_wavevector_examples():
    np.testing.assert_allclose(wavevectors(ChainConfig(4, 1.0, 0)), [0, np.pi / 2, np.pi, -np.pi / 2])
    np.testing.assert_allclose(wavevectors(ChainConfig(2, 1.0, 0)), [0, np.pi])


def test_small_chain_moments():
    single = ground_state_moments(ChainConfig(1, 1.0, 0))
    assert single.q_mat[0, 0] == pytest.approx(0.5) and single.p_mat[0, 0] == pytest.approx(0.5)
    pair = ground_state_moments(ChainConfig(2, 1.0, 0, lattice_const=1.0))
    r5 = math.sqrt(5)
    np.testing.assert_allclose(pair.q_mat, [[(1 + 1 / r5) / 4, (1 - 1 / r5) / 4],
                                            [(1 - 1 / r5) / 4, (1 + 1 / r5) / 4]], rtol=1e-14)
    np.testing.assert_allclose(pair.p_mat, [[(1 + r5) / 4, (1 - r5) / 4],
                                            [(1 - r5) / 4, (1 + r5) / 4]], rtol=1e-14)
    np.testing.assert_array_equal(pair.s_mat, 0.0)
    np.testing.assert_allclose(symplectic_oracle(pair), [1.0, 1.0], atol=1e-14)


def test_two_site_reduction_against_grid():
    config = ChainConfig(2, 1.0, 0, lattice_const=1.0)
    site = reduce_region(ground_state_moments(config), Region(0, 1))
    mu = 2 * math.sqrt(site.q_mat[0, 0] * site.p_mat[0, 0])
    assert mu == pytest.approx(1.0820, abs=1e-4)
    spec = region_spectrum(config, Region(0, 1))
    assert spec.xi[0] == pytest.approx((mu - 1) / (mu + 1), rel=1e-12)
    assert spec.xi[0] == pytest.approx(0.039409, abs=5e-6)  # quoted to limited digits
    grid = grid_oracle(params_from_moments(site), 150, 8.0)
    np.testing.assert_allclose(grid[:4], spec.lambda0 * spec.xi[0] ** np.arange(4), atol=1e-6)


def test_full_region_is_identity():
    xi = ground_state_moments(ChainConfig(7, 0.4, 1))
    assert reduce_region(xi, Region(0, 7)).max_abs_diff(xi) == 0.0
    assert region_entropy(ChainConfig(7, 0.4, 1), Region(3, 7)) < 1e-8


@pytest.mark.parametrize("alpha", [0, 1])
def test_translation_over_every_start(alpha):
    config = ChainConfig(12, 0.3, alpha)
    for ell in (1, 4, 6, 11):
        values = [region_entropy(config, Region(s, ell)) for s in range(12)]
        assert max(values) - min(values) < 1e-10


@pytest.mark.parametrize("alpha", [0, 1])
def test_toeplitz_property(alpha):
    xi = ground_state_moments(ChainConfig(9, 0.8, alpha))
    for mat in (xi.q_mat, xi.p_mat):
        for d in range(9):
            np.testing.assert_allclose(np.diag(mat, d), mat[0, d], atol=1e-12)


@pytest.mark.parametrize("config", [
    ChainConfig.with_length(256, 1e-4, 0), ChainConfig.with_length(256, 1e-4, 1),
    ChainConfig(256, 1e-3, 0), ChainConfig(64, 10.0, 1), ChainConfig(33, 0.0, 1),
])
def test_full_state_purity(config):
    assert np.all(mode_spectrum_from_moments(ground_state_moments(config)).xi < 1e-8)


@pytest.mark.parametrize("n", [8, 31, 64])
def test_complement_symmetry(n):
    for alpha in (0, 1):
        config = ChainConfig.with_length(n, 1e-2, alpha)
        s = [region_entropy(config, Region(0, ell)) for ell in range(1, n)]
        np.testing.assert_allclose(s, s[::-1], atol=1e-8)


@pytest.mark.parametrize("make", [ChainConfig, ChainConfig.with_length])
def test_mass_monotone_and_zero_mode_split(make):
    s = [region_entropy(make(100, k, 0), Region(0, 50)) for k in (1e-3, 1e-1, 1e1)]
    assert s[0] > s[1] > s[2]
    for kappa in (10.0, 100.0):
        gap = region_entropy(make(100, kappa, 0), Region(0, 50)) - region_entropy(make(100, kappa, 1), Region(0, 50))
        assert abs(gap) < 0.05
    small = [region_entropy(make(100, k, 0), Region(0, 50)) - region_entropy(make(100, k, 1), Region(0, 50))
             for k in (1e-2, 1e-4, 1e-6)]
    assert small[0] < small[1] < small[2]


def test_extended_precision_matches_double():
    for config, region in [(ChainConfig.with_length(40, 1e-2, 0), Region(35, 13)),
                           (ChainConfig(20, 0.5, 1), Region(0, 10))]:
        double = region_spectrum(config, region)
        extended = region_spectrum(config, region, dps=30)
        big = double.xi > 1e-10
        # double precision carries ~1e-14 absolute error in the small values
        np.testing.assert_allclose(extended.xi[big], double.xi[big], rtol=1e-8, atol=1e-13)
        assert entropy(extended) == pytest.approx(entropy(double), abs=1e-10)
    with pytest.raises(DomainError):
        region_spectrum(ChainConfig(4, 1.0), Region(0, 2), dps=10)
