import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pstaic import linops
from pstaic.simkit import (
    SCENES,
    SNR_CAP,
    DegradeSpec,
    PhantomSpec,
    blur,
    degrade,
    make_phantom,
    make_psf,
    metrics,
    psf_sigma_px,
    snr_db,
    ssim,
)

NAS = (0.8, 0.9, 1.0, 1.1, 1.2)


# ---------------------------------------------------------------- phantoms


@pytest.mark.parametrize("scene", SCENES)
def test_phantoms_deterministic_and_bounded(scene):
    spec = PhantomSpec((4, 32, 32), scene, seed=5)
    a, b = make_phantom(spec), make_phantom(spec)
    assert a.shape == (4, 32, 32) and np.array_equal(a, b)
    assert a.min() >= 0 and a.max() <= 1
    assert not np.array_equal(a, make_phantom(PhantomSpec((4, 32, 32), scene, seed=6)))


def test_static_scenes_do_not_change():
    tex = make_phantom(PhantomSpec((5, 32, 32), "static-texture"))
    assert np.all(tex == tex[0])
    still = make_phantom(PhantomSpec((5, 32, 32), "moving-disks", motion=0.0))
    assert np.all(still == still[0])
    moving = make_phantom(PhantomSpec((5, 32, 32), "moving-disks", motion=1.5))
    assert np.abs(np.diff(moving, 2, axis=0)).max() > 1e-3


def test_phantom_spec_validation():
    for bad in (dict(shape=(4, 4)), dict(shape=(4, 4, 4)), dict(scene="x"), dict(motion=-1.0)):
        with pytest.raises(ValueError):
            PhantomSpec(**bad)
    assert PhantomSpec().to_dict()["shape"] == [8, 64, 64]


# ---------------------------------------------------------------- PSF


@pytest.mark.parametrize("na", NAS)
def test_psf_normalised_and_symmetric(na):
    k = make_psf(DegradeSpec(na=na)).taps[0]
    assert k.sum() == pytest.approx(1.0) and k.min() >= 0
    assert np.allclose(k, np.rot90(k)) and np.allclose(k, k.T)


def test_psf_narrows_with_na():
    sig = [psf_sigma_px(DegradeSpec(na=na)) for na in NAS]
    assert all(a > b for a, b in zip(sig, sig[1:]))
    sizes = [make_psf(DegradeSpec(na=na)).shape[-1] for na in NAS]
    assert all(a >= b for a, b in zip(sizes, sizes[1:]))


def test_point_source_reproduces_kernel():
    h = make_psf(DegradeSpec(na=0.9))
    r = h.shape[-1] // 2
    img = np.zeros((1, 21, 21))
    img[0, 10, 10] = 1.0
    assert np.allclose(blur(img, h)[0, 10 - r : 11 + r, 10 - r : 11 + r], h.taps[0])


def test_degrade_spec_validation():
    for bad in (dict(na=0), dict(pixel_nm=0), dict(gamma_p=-1), dict(sigma_g=-1), dict(boundary="mirror")):
        with pytest.raises(ValueError):
            DegradeSpec(**bad)


# ---------------------------------------------------------------- noise


def test_degrade_edge_cases():
    g = np.zeros((2, 16, 16))
    assert np.all(degrade(g, DegradeSpec(gamma_p=1, sigma_g=0), seed=3) == 0)
    pure = degrade(np.ones((2, 16, 16)), DegradeSpec(gamma_p=0, sigma_g=2.0), seed=3)
    assert abs(pure.mean()) < 0.5 and pure.std() == pytest.approx(2.0, rel=0.15)
    with pytest.raises(ValueError):
        degrade(-np.ones((2, 16, 16)), DegradeSpec())


def test_degrade_reproducible_per_seed():
    g = 50 * make_phantom(PhantomSpec((3, 16, 16)))
    spec = DegradeSpec()
    assert np.array_equal(degrade(g, spec, 1), degrade(g, spec, 1))
    assert not np.array_equal(degrade(g, spec, 1), degrade(g, spec, 2))


def test_relative_poisson_noise_vanishes_at_high_gain():
    g = make_phantom(PhantomSpec((2, 16, 16), "static-texture"))
    clean = blur(g, make_psf(DegradeSpec()))
    m = degrade(g, DegradeSpec(gamma_p=1e6, sigma_g=0.0), seed=0) / 1e6
    assert np.abs(m - clean).max() < 5e-3


def test_noise_shared_across_na():
    # same seed, different optics: the residual noise fields nearly coincide
    g = 100 * make_phantom(PhantomSpec((2, 32, 32)))
    noise = []
    for na in (1.0, 1.05):
        spec = DegradeSpec(na=na)
        noise.append(degrade(g, spec, 4) - blur(g, make_psf(spec)))
    corr = np.corrcoef(noise[0].ravel(), noise[1].ravel())[0, 1]
    assert corr > 0.9


def test_snr_falls_with_read_noise():
    g = 100 * make_phantom(PhantomSpec((2, 32, 32)))
    snrs = [snr_db(g, degrade(g, DegradeSpec(sigma_g=s), 0)) for s in (0.0, 2.0, 8.0, 20.0)]
    assert all(a > b for a, b in zip(snrs, snrs[1:]))


# ---------------------------------------------------------------- metrics


def test_snr_definition():
    ref = np.random.default_rng(0).uniform(1, 2, size=(2, 8, 8))
    assert snr_db(ref, ref) == SNR_CAP
    assert snr_db(ref, np.zeros_like(ref)) == pytest.approx(0.0)
    e = np.random.default_rng(1).normal(size=ref.shape)
    e *= np.linalg.norm(ref) / np.linalg.norm(e) / 10
    assert snr_db(ref, ref + e) == pytest.approx(20.0)
    with pytest.raises(ValueError):
        snr_db(np.zeros(3), np.ones(3))
    with pytest.raises(ValueError):
        snr_db(ref, ref[:1])


@given(st.integers(0, 2**32 - 1))
def test_ssim_properties(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0, 1, size=(2, 16, 16))
    b = a + 0.1 * rng.normal(size=a.shape)
    assert ssim(a, a) == pytest.approx(1.0)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)
    assert ssim(a, b) < 1.0


def test_ssim_luminance_and_errors():
    c = np.full((1, 16, 16), 0.2)
    assert ssim(c, c + 0.5) < 1.0
    with pytest.raises(ValueError):
        ssim(c, np.ones((2, 16, 16)))
    q = metrics(c + 0.1, c + 0.1)
    assert q.snr_db == SNR_CAP and q.ssim == pytest.approx(1.0)


def test_blur_is_linear_and_mean_preserving():
    g = make_phantom(PhantomSpec((2, 16, 16)))
    h = make_psf(DegradeSpec(na=0.8))
    assert blur(g, h).mean() == pytest.approx(g.mean())
    assert np.allclose(blur(2 * g, h), 2 * blur(g, h))
    assert isinstance(h, linops.Kernel)
