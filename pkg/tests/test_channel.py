import numpy as np
import pytest
from scipy import stats

from ambc_score.channel import (
    ChannelSet,
    FadingConfig,
    assemble_hbar,
    column_variances,
    sample_channel_set,
    sample_hbar,
)
from ambc_score.numerics import make_rng

N = 100_000


def test_config_validation():
    with pytest.raises(ValueError):
        FadingConfig(M=4, K=2, alpha=1.5)
    with pytest.raises(ValueError):
        FadingConfig(M=4, K=2, alpha=0.0)
    with pytest.raises(ValueError):
        FadingConfig(M=0, K=1)
    with pytest.raises(ValueError):
        FadingConfig(distribution="nakagami", m_shape=0.2)
    assert FadingConfig(K=3, alpha=0.6).alpha == (0.6, 0.6, 0.6)


def test_direct_link_power():
    ch = sample_channel_set(FadingConfig(M=1, K=1), make_rng(0), batch=(N,))
    assert abs(np.mean(np.abs(ch.h0) ** 2) - 1.0) < 0.03


def test_no_tags():
    cfg = FadingConfig(M=4, K=0, alpha=())
    ch = sample_channel_set(cfg, make_rng(1))
    assert ch.f.size == 0 and ch.g.size == 0
    hbar = assemble_hbar(ch)
    assert hbar.shape == (4, 1)
    np.testing.assert_array_equal(hbar, ch.h0)


def test_product_moment():
    ch = sample_channel_set(FadingConfig(M=1, K=1, alpha=1.0), make_rng(2), batch=(N,))
    p = np.abs(ch.f[..., 0, 0] * ch.g[..., 0, 0]) ** 2
    assert abs(p.mean() - 1.0) < 0.05


def test_identity_cascade():
    g = np.array([[1.0 + 2j], [3.0 - 1j]])
    ch = ChannelSet(h0=np.zeros((2, 1)), f=np.ones((1, 1)), g=g, alpha=np.array([1.0]))
    np.testing.assert_array_equal(assemble_hbar(ch)[:, 1:], g)


def test_assemble_arithmetic():
    ch = ChannelSet(h0=np.array([[0.0], [0.0]]), f=np.array([[1 + 1j]]),
                    g=np.array([[1.0], [1j]]), alpha=np.array([0.25]))
    np.testing.assert_allclose(assemble_hbar(ch)[:, 1], [0.5 * (1 + 1j), 0.5 * (1j - 1)])


def test_assemble_linear_in_g():
    rng = make_rng(3)
    cfg = FadingConfig(M=3, K=2, alpha=(0.6, 0.3))
    a, b = sample_channel_set(cfg, rng), sample_channel_set(cfg, rng)
    mix = ChannelSet(a.h0, a.f, 2.0 * a.g - 0.5j * b.g, a.alpha)
    lhs = assemble_hbar(mix)[:, 1:]
    rhs = 2.0 * assemble_hbar(a)[:, 1:] - 0.5j * assemble_hbar(ChannelSet(a.h0, a.f, b.g, a.alpha))[:, 1:]
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


@pytest.mark.parametrize("dist", ["rayleigh", "nakagami"])
def test_column_energy(dist):
    cfg = FadingConfig(M=4, K=2, alpha=(0.6, 0.3), distribution=dist, m_shape=2.0)
    H = sample_hbar(cfg, 50_000, make_rng(4))
    energy = np.mean(np.sum(np.abs(H) ** 2, axis=1), axis=0)
    expected = column_variances(cfg) * cfg.M
    np.testing.assert_allclose(energy, expected, rtol=0.05)


def test_cascaded_column_heavy_tailed():
    H = sample_hbar(FadingConfig(M=1, K=1, alpha=0.6), N, make_rng(5))
    assert stats.kurtosis(H[:, 0, 1].real) > 0.5
    # the direct link is Gaussian, so its excess kurtosis is near zero
    assert abs(stats.kurtosis(H[:, 0, 0].real)) < 0.1


def test_batch_determinism():
    cfg = FadingConfig()
    a = sample_hbar(cfg, 10, make_rng(8))
    b = sample_hbar(cfg, 10, make_rng(8))
    assert a.tobytes() == b.tobytes()
