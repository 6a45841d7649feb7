import time

import numpy as np
import pytest

import ManifoldLens.augment as aug
import ManifoldLens.models as models
from ManifoldLens.errors import DegenerateError, ParameterError


def _rgb(rows=12, cols=9, seed=0):
    rng = np.random.default_rng(seed)
    return models.ImageMatrix(tuple(rng.uniform(0, 255, size=(rows, cols)) for _ in range(3)))


def test_keep_all_reconstructs_original():
    img = _rgb()
    out = aug.derivative_image(img, aug.SingularMask.keep_all(img.singular_count))
    for a, b in zip(img.channels, out.channels):
        assert np.allclose(a, b, atol=1e-9)


def test_trailing_mask_counts():
    mask = aug.SingularMask.trailing_k(9, 3)
    assert mask.keep.tolist() == [True] * 6 + [False] * 3
    assert aug.SingularMask.trailing_k(9, 0).kept == 9


def test_trailing_k_must_leave_one_value():
    with pytest.raises(ParameterError):
        aug.SingularMask.trailing_k(9, 9)


def test_all_zero_mask_is_degenerate():
    with pytest.raises(DegenerateError):
        aug.SingularMask(np.zeros(4, dtype=bool))


def test_leading_mask_keeps_first_k():
    mask = aug.SingularMask.leading_k(5, 2)
    assert mask.keep.tolist() == [True, True, False, False, False]


def test_zeroing_specific_indices():
    mask = aug.SingularMask.zeroing(4, [0, 2])
    assert mask.keep.tolist() == [False, True, False, True]
    with pytest.raises(ParameterError):
        aug.SingularMask.zeroing(4, [4])


def test_derivative_has_rank_of_kept_values():
    img = _rgb(rows=10, cols=10)
    out = aug.derivative_image(img, aug.SingularMask.leading_k(10, 3))
    for chan in out.channels:
        assert np.linalg.matrix_rank(chan, tol=1e-8) == 3


def test_truncation_error_matches_frobenius_norm():
    img = _rgb()
    chan = img.channels[1]
    svd = aug.channel_svd(chan)
    mask = aug.SingularMask.trailing_k(svd.s.size, 4)
    diff = np.linalg.norm(chan - svd.reconstruct(mask))
    assert aug.truncation_error(svd.s, mask) == pytest.approx(diff, rel=1e-9)


def test_mask_length_mismatch():
    img = _rgb()
    with pytest.raises(ParameterError):
        aug.derivative_image(img, aug.SingularMask.keep_all(3))


def test_quantized_derivative_stays_in_byte_range():
    img = _rgb()
    out = aug.derivative_image(img, aug.SingularMask.leading_k(img.singular_count, 1), quantize=True)
    for chan in out.channels:
        assert chan.min() >= 0.0 and chan.max() <= 255.0
        assert np.array_equal(chan, np.rint(chan))


def test_grid_count_and_lexicographic_order():
    img = _rgb()
    spec = aug.GridSpec(k_max=3, channels=3)
    ks = [item.ks for item in aug.generate_grid(img, spec)]
    assert len(ks) == spec.count() == 27
    assert ks[0] == (1, 1, 1)
    assert ks[1] == (1, 1, 2)
    assert ks[-1] == (3, 3, 3)
    assert ks == sorted(ks)


def test_grid_matches_direct_derivative():
    img = _rgb()
    spec = aug.GridSpec(k_max=2, channels=3)
    items = {item.ks: item for item in aug.generate_grid(img, spec)}
    item = items[(2, 1, 2)]
    L = img.singular_count
    masks = [aug.SingularMask.trailing_k(L, k) for k in (2, 1, 2)]
    direct = aug.derivative_image(img, masks)
    for a, b in zip(item.image.channels, direct.channels):
        assert np.allclose(a, b, atol=1e-9)
    expected = np.sqrt(sum(e ** 2 for e in item.channel_errors))
    assert item.truncation_error == pytest.approx(expected, rel=1e-12)


def test_grid_truncation_error_is_frobenius_distance():
    img = _rgb()
    for item in aug.generate_grid(img, aug.GridSpec(k_max=3, channels=3)):
        diff = np.sqrt(sum(np.sum((a - b) ** 2) for a, b in zip(img.channels, item.image.channels)))
        assert item.truncation_error == pytest.approx(diff, rel=1e-9)


def test_full_rgb_grid_at_default_k_max():
    img = _rgb(rows=512, cols=512, seed=8)
    start = time.perf_counter()
    count = 0
    worst = 0.0
    for item in aug.generate_grid(img, aug.GridSpec()):
        diff = np.sqrt(sum(np.sum((a - b) ** 2) for a, b in zip(img.channels, item.image.channels)))
        worst = max(worst, abs(item.truncation_error - diff) / diff)
        count += 1
    assert count == 10648
    assert worst < 1e-9
    assert time.perf_counter() - start < 120.0


def test_truncation_error_grows_with_trailing_k():
    channel = _rgb(rows=30, cols=24, seed=4).channels[0]
    svd = aug.channel_svd(channel)
    errs, dists = [], []
    for k in range(1, 23):
        mask = aug.SingularMask.trailing_k(svd.s.size, k)
        errs.append(aug.truncation_error(svd.s, mask))
        dists.append(np.linalg.norm(channel - svd.reconstruct(mask)))
    assert all(b >= a for a, b in zip(errs, errs[1:]))
    assert all(b >= a * (1.0 - 1e-12) for a, b in zip(dists, dists[1:]))
    assert np.allclose(errs, dists, rtol=1e-9)


def test_grid_parallel_equals_serial():
    img = _rgb()
    spec = aug.GridSpec(k_max=2, channels=3)
    serial = list(aug.generate_grid(img, spec, workers=1))
    pooled = list(aug.generate_grid(img, spec, workers=3))
    assert [s.ks for s in serial] == [p.ks for p in pooled]
    for s, p in zip(serial, pooled):
        for a, b in zip(s.image.channels, p.image.channels):
            assert np.array_equal(a, b)


def test_grid_rejects_k_max_beyond_image():
    img = _rgb(rows=6, cols=5)
    with pytest.raises(ParameterError):
        aug.generate_grid(img, aug.GridSpec(k_max=5, channels=3))
    with pytest.raises(ParameterError):
        aug.generate_grid(img, aug.GridSpec(k_max=9999, channels=3))


def test_grid_rejects_channel_mismatch():
    gray = models.ImageMatrix((np.ones((4, 4)),))
    with pytest.raises(ParameterError):
        aug.generate_grid(gray, aug.GridSpec(k_max=2, channels=3))


def test_grayscale_grid():
    rng = np.random.default_rng(1)
    gray = models.ImageMatrix((rng.uniform(0, 255, size=(8, 8)),))
    items = list(aug.generate_grid(gray, aug.GridSpec(k_max=7, channels=1)))
    assert [i.ks for i in items] == [(k,) for k in range(1, 8)]


def test_derivative_names():
    assert aug.derivative_name("cat", (1, 22, 3)) == "cat_1_22_3"
    assert aug.parse_derivative_name("cat_photo_1_22_3") == ("cat_photo", (1, 22, 3))
    assert aug.parse_derivative_name("plain") is None
