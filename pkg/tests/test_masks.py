import numpy as np
import pytest
from scipy import ndimage

from ganiqa.errors import InvalidParam, NoEligibleSegments
from ganiqa.masks import (
    SuperpixelLabels,
    boundary_pixels,
    load_mask,
    mask_type1,
    mask_type2,
    mask_type3,
    punch_holes,
    save_mask,
    slic_segment,
)

from conftest import smooth_texture


def brute_force_boundary_dilation(seg, radius):
    """Independent oracle: per-pixel scan for boundary, then disk dilation."""
    h, w = seg.shape
    boundary = np.zeros((h, w), dtype=bool)
    for r in range(h):
        for c in range(w):
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and seg[rr, cc] != seg[r, c]:
                    boundary[r, c] = True
    out = np.zeros((h, w), dtype=bool)
    for r in range(h):
        for c in range(w):
            if boundary[r, c]:
                for rr in range(h):
                    for cc in range(w):
                        if (rr - r) ** 2 + (cc - c) ** 2 <= radius**2:
                            out[rr, cc] = True
    return out


class TestSlic:
    def test_constant_image_grid(self):
        # spatial-only Lloyd oracle: constant color means pure position
        # clustering, which from a 2x2 grid init stays the 2x2 block layout
        img = np.full((8, 8, 3), 0.5)
        labels = slic_segment(img, n_segments=4, compactness=1000.0)
        assert labels.n_segments == 4
        counts = np.bincount(labels.labels.ravel())
        assert list(counts) == [16, 16, 16, 16]
        blocks = {
            tuple(np.unique(labels.labels[r : r + 4, c : c + 4]))
            for r in (0, 4)
            for c in (0, 4)
        }
        assert all(len(b) == 1 for b in blocks)
        assert len(blocks) == 4

    def test_single_segment(self, rng):
        img = rng.random((10, 12, 3))
        labels = slic_segment(img, n_segments=1, compactness=10.0)
        assert (labels.labels == 0).all()

    def test_full_cover(self, rng):
        img = smooth_texture(rng, 32)
        labels = slic_segment(img, n_segments=9, compactness=10.0)
        counts = np.bincount(labels.labels.ravel(), minlength=labels.n_segments)
        assert counts.sum() == 32 * 32
        assert (counts > 0).all()

    def test_segments_connected(self, rng):
        img = smooth_texture(rng, 48)
        labels = slic_segment(img, n_segments=16, compactness=5.0)
        structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
        for lab in range(labels.n_segments):
            _, n = ndimage.label(labels.labels == lab, structure=structure)
            assert n == 1

    def test_invalid_params(self, rng):
        img = rng.random((8, 8, 3))
        with pytest.raises(InvalidParam):
            slic_segment(img, n_segments=0)
        with pytest.raises(InvalidParam):
            slic_segment(img, n_segments=4, compactness=0.0)


class TestMaskType1:
    def test_all_background(self):
        seg = np.zeros((9, 9), dtype=int)
        assert mask_type1(seg, 1).sum() == 0

    def test_single_pixel_oracle(self):
        seg = np.zeros((7, 7), dtype=int)
        seg[3, 3] = 1
        mask = mask_type1(seg, dilation_radius=1)
        oracle = brute_force_boundary_dilation(seg, 1)
        assert np.array_equal(mask.astype(bool), oracle)
        assert mask.sum() == 13

    def test_random_seg_oracle(self, rng):
        seg = rng.integers(0, 3, size=(12, 12))
        for radius in (1, 2):
            assert np.array_equal(
                mask_type1(seg, radius).astype(bool),
                brute_force_boundary_dilation(seg, radius),
            )

    def test_monotone_in_radius(self, rng):
        seg = rng.integers(0, 2, size=(16, 16))
        m1 = mask_type1(seg, 1)
        m2 = mask_type1(seg, 2)
        assert ((m2 - m1) >= 0).all()

    def test_superset_of_boundary(self, rng):
        seg = rng.integers(0, 4, size=(20, 20))
        for radius in (1, 3, 7):
            mask = mask_type1(seg, radius).astype(bool)
            assert (mask | boundary_pixels(seg)).sum() == mask.sum()


class TestMaskType2:
    def test_identity_shift(self, rng):
        m = rng.integers(0, 2, size=(8, 8)).astype(np.uint8)
        assert np.array_equal(mask_type2(m, (0, 0)), m)

    def test_fully_shifted_out(self, rng):
        m = rng.integers(0, 2, size=(6, 10)).astype(np.uint8)
        assert mask_type2(m, (10, 0)).sum() == 0

    def test_single_pixel(self):
        m = np.zeros((6, 8), dtype=np.uint8)
        m[2, 3] = 1
        out = mask_type2(m, (1, 0))
        assert out.sum() == 1
        assert out[2, 4] == 1

    def test_inverse_restricted(self, rng):
        m = rng.integers(0, 2, size=(10, 10)).astype(np.uint8)
        fwd = mask_type2(m, (3, 2))
        back = mask_type2(fwd, (-3, -2))
        # in-range pixels recover the original
        assert np.array_equal(back[:-2, :-3], m[:-2, :-3])


class TestMaskType3:
    def test_only_candidate(self):
        lab = np.zeros((15, 10), dtype=np.int64)
        lab[:5, :] = 1  # one 50-pixel segment; the rest is 100 px (not small)
        labels = SuperpixelLabels(labels=lab, n_segments=2)
        mask = mask_type3(labels, "small", rng_seed=0, fraction=1.0)
        assert mask.sum() == 50
        assert (mask[:5, :] == 1).all()

    def test_size_gap_rejected(self):
        # 150-pixel segments fall in neither size class
        lab = np.repeat(np.arange(6), 150).reshape(30, 30)
        labels = SuperpixelLabels(labels=lab, n_segments=6)
        with pytest.raises(NoEligibleSegments):
            mask_type3(labels, "small", rng_seed=0)

    def test_medium_component_sizes(self, rng):
        img = smooth_texture(rng, 64)
        labels = slic_segment(img, n_segments=12, compactness=10.0)
        mask = mask_type3(labels, "medium", rng_seed=1, fraction=0.5)
        structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
        cc, n = ndimage.label(mask, structure=structure)
        assert n >= 1
        for i in range(1, n + 1):
            assert 200 <= (cc == i).sum() <= 1000

    def test_whole_superpixels_only(self, rng):
        img = smooth_texture(rng, 64)
        labels = slic_segment(img, n_segments=64, compactness=10.0)
        mask = mask_type3(labels, "small", rng_seed=3, fraction=0.5)
        covered = np.unique(labels.labels[mask == 1])
        for lab in covered:
            assert (mask[labels.labels == lab] == 1).all()


class TestPunchHoles:
    def test_empty_mask_identity(self, rng):
        img = rng.random((8, 8, 3))
        assert np.array_equal(punch_holes(img, np.zeros((8, 8), dtype=int)), img)

    def test_full_mask_black(self, rng):
        img = rng.random((8, 8, 3))
        assert punch_holes(img, np.ones((8, 8), dtype=int)).sum() == 0

    def test_checkerboard_mean(self):
        img = np.full((8, 8, 3), 0.5)
        mask = np.indices((8, 8)).sum(axis=0) % 2
        out = punch_holes(img, mask)
        assert out.mean() == pytest.approx(0.25)

    def test_agreement_off_mask(self, rng):
        img = rng.random((12, 12, 3))
        mask = rng.integers(0, 2, size=(12, 12))
        out = punch_holes(img, mask)
        assert np.array_equal(out[mask == 0], img[mask == 0])
        assert (out[mask == 1] == 0).all()


class TestMaskIO:
    def test_roundtrip(self, tmp_path, rng):
        mask = rng.integers(0, 2, size=(16, 16)).astype(np.uint8)
        save_mask(mask, tmp_path / "m.png")
        assert np.array_equal(load_mask(tmp_path / "m.png"), mask)
